"""Command line front end for batch simulations.

Exit codes: 0 on success, 2 when more than 10% of periods faulted, 3 when a
target run timed out before reaching every target.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import load_config
from .sim import (
    ClosedLoop,
    emit_outputs,
    straight_line_scenario,
    target_scenario,
)

EXIT_OK = 0
EXIT_FAULT_STORM = 2
EXIT_TIMEOUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Closed-loop pusher-slider simulation",
    )
    parser.add_argument("--scenario", choices=["straight", "targets"], default=None)
    parser.add_argument("--controller", choices=["fom", "miqp"], default="fom")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--duration", type=float, default=None, help="override, seconds")
    parser.add_argument("--seed", type=int, default=None, help="recorded in the summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    scenario = cfg.scenario
    if args.scenario is not None and args.scenario != scenario.kind:
        scenario = (
            straight_line_scenario()
            if args.scenario == "straight"
            else target_scenario()
        )
    if args.duration is not None:
        scenario = dataclasses.replace(scenario, duration=args.duration)

    loop = ClosedLoop(cfg.params, cfg.mpc, scenario, controller=args.controller)
    log = loop.run()
    if args.seed is not None:
        log.meta["seed"] = args.seed
    csv_path, json_path = emit_outputs(log, args.out)
    print(f"wrote {csv_path} and {json_path} ({len(log.records)} periods, status={log.status})")

    faulted = sum(1 for r in log.records if "fault" in r.flags)
    if log.records and faulted > 0.10 * len(log.records):
        return EXIT_FAULT_STORM
    if log.status == "timeout":
        return EXIT_TIMEOUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
