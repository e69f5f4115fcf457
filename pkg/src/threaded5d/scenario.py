"""Scenario files: JSON documents naming a metric plus task parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .geodesic import AdaptedVelocity, GeodesicState, to_adapted
from .metric import ThreadedMetric, build_metric


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files(__package__).joinpath("scenario.schema.json").read_text()
    return json.loads(text)


@dataclass
class Scenario:
    raw: dict
    metric: ThreadedMetric

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def initial_state(self) -> GeodesicState | None:
        init = self.raw.get("initial")
        if init is None:
            return None
        point = np.array(init["point"], dtype=float)
        if init.get("frame", "natural") == "adapted":
            return GeodesicState(point, AdaptedVelocity.from_array(init["velocity"]))
        return GeodesicState(point, to_adapted(self.metric, point, init["velocity"]))


def parse_scenario(raw: dict) -> Scenario:
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"scenario invalid at {where}: {exc.message}") from None
    return Scenario(raw, build_metric(raw["metric"]))


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from None
    return parse_scenario(raw)
