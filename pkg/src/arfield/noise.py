"""Additive, independent, zero-mean measurement noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE_KINDS = ("none", "gaussian", "uniform")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    variance: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise.kind: unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if not self.variance >= 0:
            raise ValueError(f"noise.variance: must be >= 0, got {self.variance}")
        if self.kind == "none" and self.variance != 0:
            raise ValueError("noise.variance: kind 'none' requires variance 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "variance": self.variance}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(str(d.get("kind", "none")), float(d.get("variance", 0.0)))


def corrupt(values, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Add one i.i.d. draw of variance ``spec.variance`` to every sample.

    No random numbers are consumed for kind ``none``.
    """
    values = np.asarray(values, dtype=float)
    if spec.kind == "none":
        return values.copy()
    if spec.kind == "gaussian":
        return values + rng.normal(0.0, math.sqrt(spec.variance), values.shape)
    half_width = math.sqrt(3.0 * spec.variance)
    return values + rng.uniform(-half_width, half_width, values.shape)
