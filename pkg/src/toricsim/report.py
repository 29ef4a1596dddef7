"""Result containers shared by the experiment pipelines."""

from __future__ import annotations

import datetime
import json
import math
from dataclasses import dataclass, field

import numpy as np


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Independent, reproducible stream for one shot of one experiment."""
    return np.random.default_rng([int(seed), int(shot)])


def mean_and_se(samples) -> tuple[float, float, int]:
    arr = np.asarray(samples, dtype=float)
    n = len(arr)
    if n == 0:
        return float("nan"), float("nan"), 0
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se, n


@dataclass
class ExperimentReport:
    """Per-observable means with standard errors plus run metadata.

    The JSON form is schema-versioned and deterministic for a fixed (config,
    seed) when rendered with canonical=True, which drops the timestamp.
    """

    command: str
    seed: int
    shots: int
    discard_fraction: float = 0.0
    observables: dict[str, dict] = field(default_factory=dict)
    derived: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    schema: int = 1

    def add_observable(self, name: str, samples) -> None:
        mean, se, n = mean_and_se(samples)
        if n and not -1.0 - 1e-9 <= mean <= 1.0 + 1e-9:
            raise ValueError(f"observable {name} mean {mean} outside [-1, 1]")
        self.observables[name] = {"mean": mean, "std_err": se, "n": n}

    def observable_mean(self, name: str) -> float:
        return self.observables[name]["mean"]

    def to_dict(self, canonical: bool = False) -> dict:
        doc = {
            "schema": self.schema,
            "command": self.command,
            "seed": self.seed,
            "shots": self.shots,
            "discard_fraction": self.discard_fraction,
            "observables": self.observables,
            "derived": self.derived,
            "metadata": self.metadata,
        }
        if not canonical:
            doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        return doc

    def to_json(self, canonical: bool = False) -> str:
        return json.dumps(self.to_dict(canonical), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["observable,mean,std_err,n"]
        for name in sorted(self.observables):
            o = self.observables[name]
            lines.append(f"{name},{o['mean']:.10g},{o['std_err']:.10g},{o['n']}")
        for name in sorted(self.derived):
            lines.append(f"{name},{self.derived[name]:.10g},,")
        return "\n".join(lines) + "\n"
