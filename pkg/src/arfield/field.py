"""Real bandlimited fields on the unit interval, stored as Fourier coefficients."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

SUP_GRID = 8192
QUAD_GRID = 8192
DERIVATIVE_GRID = 4096


class DegenerateFieldError(ValueError):
    """Raised when a field is identically zero and cannot be normalized."""


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Spectrum a[-b..b] of a real field g(x) = sum_k a[k] exp(j 2 pi k x).

    ``coeffs[b + k]`` holds a[k].
    """

    b: int
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        if self.b < 0:
            raise ValueError(f"bandwidth index must be >= 0, got {self.b}")
        if arr.shape != (2 * self.b + 1,):
            raise ValueError(
                f"expected {2 * self.b + 1} coefficients for b={self.b}, got {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.b, self.b + 1)

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.b:
            raise IndexError(k)
        return complex(self.coeffs[self.b + k])

    def __eq__(self, other):
        if not isinstance(other, FourierCoefficients):
            return NotImplemented
        return self.b == other.b and np.array_equal(self.coeffs, other.coeffs)

    def allclose(self, other: "FourierCoefficients", atol: float = 1e-12) -> bool:
        return self.b == other.b and bool(np.all(np.abs(self.coeffs - other.coeffs) <= atol))

    def scaled(self, c: float) -> "FourierCoefficients":
        return FourierCoefficients(self.b, self.coeffs * c)

    @classmethod
    def from_nonnegative(cls, a: "np.ndarray | list[complex]") -> "FourierCoefficients":
        """Build a conjugate-symmetric spectrum from a[0..b]."""
        a = np.asarray(a, dtype=complex)
        b = len(a) - 1
        full = np.concatenate([np.conj(a[:0:-1]), [a[0].real + 0j], a[1:]])
        return cls(b, full)

    def to_dict(self) -> dict:
        return {"b": int(self.b), "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, d: dict) -> "FourierCoefficients":
        coeffs = [complex(re, im) for re, im in d["coeffs"]]
        return cls(int(d["b"]), np.array(coeffs))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "FourierCoefficients":
        return cls.from_dict(json.loads(text))


# Field used in the reference simulations (b = 3), as published.
PAPER_FIELD = FourierCoefficients.from_nonnegative(
    [0.3002, -0.04131 + 0.0216j, 0.0871 + 0.0343j, -0.1679 - 0.0586j]
)


def synthesize(coeffs: np.ndarray, b: int, x) -> np.ndarray:
    """Complex harmonic sum sum_k c[k] exp(j 2 pi k x), evaluated pointwise."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, coeffs[b], dtype=complex)
    if b == 0:
        return out
    z = np.exp(2j * np.pi * x)
    zk = np.ones_like(z)
    for k in range(1, b + 1):
        # |z| = 1, so z^-k = conj(z^k)
        zk = zk * z
        out += coeffs[b + k] * zk + coeffs[b - k] * np.conj(zk)
    return out


def evaluate(f: FourierCoefficients, x):
    """Field value g(x); accepts a scalar or an array of positions."""
    val = synthesize(f.coeffs, f.b, x).real
    return float(val) if np.ndim(val) == 0 else val


def grid_sup(f: FourierCoefficients, grid: int = SUP_GRID) -> float:
    xs = np.arange(grid) / grid
    return float(np.max(np.abs(evaluate(f, xs))))


def normalize_sup(f: FourierCoefficients, grid: int = SUP_GRID) -> FourierCoefficients:
    """Rescale so that max |g| over a uniform grid on [0, 1) equals one."""
    sup = grid_sup(f, grid)
    if sup == 0.0:
        raise DegenerateFieldError("cannot normalize an identically zero field")
    return f.scaled(1.0 / sup)


def random_field(b: int, rng: np.random.Generator, grid: int = SUP_GRID) -> FourierCoefficients:
    """Draw a real field with Uniform[-1, 1] real/imaginary parts, then normalize.

    Draw order: a[0], then (Re a[k], Im a[k]) for k = 1..b.
    """
    if b < 0:
        raise ValueError(f"bandwidth index must be >= 0, got {b}")
    a0 = rng.uniform(-1.0, 1.0)
    parts = rng.uniform(-1.0, 1.0, size=(b, 2))
    a = np.concatenate([[a0 + 0j], parts[:, 0] + 1j * parts[:, 1]])
    return normalize_sup(FourierCoefficients.from_nonnegative(a), grid)


def derivative_bound(f: FourierCoefficients, grid: int = SUP_GRID) -> float:
    """Bernstein bound 2 b pi ||g||_inf on |g'(x)|."""
    return 2.0 * f.b * np.pi * grid_sup(f, grid)


def exact_coefficients(
    g: Callable[[np.ndarray], np.ndarray], b: int, grid: int = QUAD_GRID
) -> FourierCoefficients:
    """Recover a[-b..b] of a 1-periodic function by trapezoid quadrature.

    For periodic integrands the composite trapezoid rule on [0, 1] reduces to a
    plain mean over the ``grid`` points of [0, 1); it is exact for harmonics of
    order below ``grid``.
    """
    xs = np.arange(grid) / grid
    vals = np.asarray(g(xs), dtype=complex)
    coeffs = np.array(
        [np.mean(vals * np.exp(-2j * np.pi * k * xs)) for k in range(-b, b + 1)]
    )
    return FourierCoefficients(b, coeffs)
