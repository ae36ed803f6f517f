"""Structured JSON configuration: model, mpc and scenario sections.

Derived model quantities are always recomputed from the primitive
parameters; values for them in a file are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .controller import MpcConfig, default_mpc_config
from .model import ModelParams, default_params
from .sim import Scenario, straight_line_scenario

__all__ = ["RunConfig", "load_config", "save_config"]


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    mpc: MpcConfig
    scenario: Scenario

    def to_dict(self) -> dict:
        return {
            "model": self.params.to_config(),
            "mpc": self.mpc.to_config(),
            "scenario": self.scenario.to_config(),
        }


def load_config(path: str | None = None) -> RunConfig:
    """Load a config file; missing sections fall back to the defaults."""
    if path is None:
        return RunConfig(default_params(), default_mpc_config(), straight_line_scenario())
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    params = (
        ModelParams.from_config(raw["model"]) if "model" in raw else default_params()
    )
    mpc = MpcConfig.from_config(raw.get("mpc", {}))
    scenario = (
        Scenario.from_config(raw["scenario"])
        if "scenario" in raw
        else straight_line_scenario()
    )
    return RunConfig(params, mpc, scenario)


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
