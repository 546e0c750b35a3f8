"""Reproducible, splittable random streams keyed by a seed path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAM_TAGS = {"count": 0, "direction": 1, "base": 2, "position": 3, "probe": 4,
               "aux": 5}


@dataclass(frozen=True)
class SeedPath:
    """
    Address of one realization's randomness.

    ``scope`` separates otherwise identical realization indices (for example
    different scale factors r of one experiment). Each tag yields an
    independent Philox stream, so drawing more probes never perturbs the
    cylinders of the same realization.
    """

    master_seed: int
    realization_index: int = 0
    scope: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.realization_index < 0 or self.scope < 0:
            raise ValueError("realization_index and scope must be >= 0")

    def stream(self, tag: str, sub: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.master_seed,
            spawn_key=(self.scope, self.realization_index, STREAM_TAGS[tag], sub))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "SeedPath":
        return SeedPath(self.master_seed, index, self.scope)

    def __str__(self) -> str:
        return f"{self.master_seed}:{self.scope}:{self.realization_index}"
