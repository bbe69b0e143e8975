"""Location-unaware Fourier coefficient estimation and distortion.

The estimator only sees the M readings in traversal order and pretends they
were taken on the uniform grid i/M:

    A_gen[k] = (1/M) sum_{i=1}^{M} v_i exp(-j 2 pi k i / M)
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .field import QUAD_GRID, FourierCoefficients, synthesize


class NoSamplesError(ValueError):
    """Estimation was attempted from an empty sample sequence."""


class BandwidthMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EstimatedCoefficients:
    b: int
    coeffs: np.ndarray
    m_used: int

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.b:
            raise IndexError(k)
        return complex(self.coeffs[self.b + k])

    def as_field(self) -> FourierCoefficients:
        return FourierCoefficients(self.b, self.coeffs)

    def to_dict(self) -> dict:
        d = self.as_field().to_dict()
        d["m_used"] = int(self.m_used)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatedCoefficients":
        f = FourierCoefficients.from_dict(d)
        return cls(f.b, f.coeffs, int(d["m_used"]))


@dataclass(frozen=True)
class DistortionReport:
    per_k: tuple
    total: float

    def to_json(self) -> str:
        return json.dumps({"per_k": list(self.per_k), "total": self.total})


def estimate(samples, b: int) -> EstimatedCoefficients:
    """Riemann-sum surrogate of a[-b..b] from ordered readings.

    Fewer samples than coefficients is allowed and simply aliases.
    """
    v = np.asarray(samples, dtype=float)
    m = len(v)
    if m == 0:
        raise NoSamplesError("cannot estimate coefficients from zero samples")
    phase = np.arange(1, m + 1) / m
    pos = np.empty(b + 1, dtype=complex)
    pos[0] = np.sum(v)
    for k in range(1, b + 1):
        pos[k] = np.dot(v, np.exp(-2j * np.pi * k * phase))
    pos /= m
    # real readings: A[-k] = conj(A[k]) exactly
    coeffs = np.concatenate([np.conj(pos[:0:-1]), pos])
    return EstimatedCoefficients(b, coeffs, m)


def reconstruct(est: EstimatedCoefficients, x):
    val = synthesize(est.coeffs, est.b, x).real
    return float(val) if np.ndim(val) == 0 else val


def _check_band(est, truth):
    if est.b != truth.b:
        raise BandwidthMismatchError(f"estimate has b={est.b}, truth has b={truth.b}")


def coefficient_distortion(est: EstimatedCoefficients, truth: FourierCoefficients) -> DistortionReport:
    _check_band(est, truth)
    per_k = np.abs(est.coeffs - truth.coeffs) ** 2
    return DistortionReport(tuple(float(p) for p in per_k), float(np.sum(per_k)))


def integral_distortion(
    est: EstimatedCoefficients, truth: FourierCoefficients, grid: int = QUAD_GRID
) -> float:
    """Trapezoid quadrature of the integral of |G_hat - g|^2 over one period."""
    _check_band(est, truth)
    xs = np.arange(grid + 1) / grid
    err = reconstruct(est, xs) - synthesize(truth.coeffs, truth.b, xs).real
    return float(trapezoid(err**2, xs))
