"""Run configuration shared by the command line and the experiment scripts."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .quatcore import InputError


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    fd_step: float = 1e-5
    samples: int = 100
    seed: int = 0
    max_search: int = 10 ** 7
    twisted: bool = True

    def __post_init__(self):
        if not (self.tol > 0 and self.fd_step > 0 and self.samples > 0 and self.max_search > 0):
            raise InputError(f"tolerance, step, sample count and search cap must be positive: {self}")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def to_json(self) -> dict:
        return asdict(self)
