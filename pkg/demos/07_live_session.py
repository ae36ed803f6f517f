"""Driving the live-session engine programmatically.

The WebSocket service wraps this same engine; a session with no commands
reproduces the batch simulator exactly. Here we steer one in-process: poke
the slider mid-run and watch the controller recover, then retarget it.

To run the networked version instead:

    pushmpc-service --scenario targets --port 8787
    # then open the cockpit (frontend/dist) or connect to ws://127.0.0.1:8787/ws
"""

import math

from pushmpc.controller import default_mpc_config
from pushmpc.model import default_params
from pushmpc.service import Poke, SessionEngine, SetTarget, encode_snapshot
from pushmpc.sim import ClosedLoop, target_scenario

scenario = target_scenario(targets=((0.25, 0.0),), duration=math.inf)
engine = SessionEngine(ClosedLoop(default_params(), default_mpc_config(), scenario))

for k in range(40):
    snap = engine.step_period()
print("after 40 periods:", encode_snapshot(snap))

print("\npoking the slider sideways by 1 cm and 15 deg...")
engine.submit(Poke(dx=0.0, dy=0.01, dtheta=15 * math.pi / 180))
for k in range(40):
    snap = engine.step_period()
print("after recovery  :", encode_snapshot(snap))

print("\nretargeting to (0.10, -0.08)...")
engine.submit(SetTarget(0.10, -0.08))
for k in range(200):
    snap = engine.step_period()
    if engine.loop.done:
        break
print("final           :", encode_snapshot(snap))
print("session status  :", engine.loop.log.status)
