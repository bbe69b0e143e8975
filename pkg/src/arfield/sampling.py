"""AR(1) sampling paths on [0, 1] driven by a renewal process.

Intersample distances follow X_1 = Y_1, X_i = rho X_{i-1} + Y_i with i.i.d.
positive Y_i of mean 1/n. Sample locations are the partial sums S_i, and M is
the number of locations falling in (0, 1].
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.signal import lfilter

KINDS = ("uniform", "scaled-beta", "exponential", "lognormal", "generalized-pareto")
BOUNDED_KINDS = ("uniform", "scaled-beta")


class RunawayPathError(RuntimeError):
    """The path failed to leave [0, 1] within the iteration guard."""


class EmptyPathError(ValueError):
    """A statistic needing at least one sample was given a path with M = 0."""


@dataclass(frozen=True)
class RenewalSpec:
    """Distribution of the driving terms Y_i, calibrated to mean 1/n.

    Bounded kinds have support (0, lam/n]. ``alpha`` is the Beta shape,
    ``s`` the variance of the underlying Gaussian for lognormal, ``xi`` the
    generalized Pareto tail index.
    """

    kind: str = "uniform"
    n: float = 100.0
    lam: float = 2.0
    alpha: float = 2.0
    s: float = 0.5
    xi: float = 0.4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind: unknown renewal kind {self.kind!r}, expected one of {KINDS}")
        if not self.n > 0:
            raise ValueError(f"n: sampling density must be positive, got {self.n}")
        if not self.lam > 1:
            raise ValueError(f"lambda: support parameter must exceed 1, got {self.lam}")
        if self.kind == "uniform" and self.lam != 2.0:
            # Uniform(0, lam/n] has mean lam/(2n); mean 1/n pins lam = 2
            raise ValueError(f"lambda: uniform kind requires lambda = 2, got {self.lam}")
        if self.kind == "scaled-beta" and not self.alpha > 0:
            raise ValueError(f"alpha: beta shape must be positive, got {self.alpha}")
        if self.kind == "lognormal" and not self.s > 0:
            raise ValueError(f"s: lognormal variance must be positive, got {self.s}")
        if self.kind == "generalized-pareto" and not 0 <= self.xi < 0.5:
            raise ValueError(f"xi: tail index must lie in [0, 0.5), got {self.xi}")

    @property
    def bounded(self) -> bool:
        return self.kind in BOUNDED_KINDS

    @property
    def mean(self) -> float:
        return 1.0 / self.n

    def with_density(self, n: float) -> "RenewalSpec":
        return RenewalSpec(self.kind, n, self.lam, self.alpha, self.s, self.xi)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RenewalSpec":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = set(d) - {"kind", "n", "lam", "alpha", "s", "xi"}
        if unknown:
            raise ValueError(f"renewal: unknown keys {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class ARConfig:
    rho: float
    renewal: RenewalSpec

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho: must lie in [0, 1), got {self.rho}")

    @property
    def max_steps(self) -> int:
        """Iteration guard; unreachable for bounded kinds."""
        return int(math.ceil(10 * self.renewal.lam * self.renewal.n / (1 - self.rho)))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One realization: S_1 < ... < S_M <= 1 < S_{M+1}."""

    locations: np.ndarray
    overshoot: float

    def __post_init__(self):
        arr = np.array(self.locations, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "locations", arr)

    @property
    def m(self) -> int:
        return len(self.locations)

    @property
    def remainder(self) -> float:
        return 1.0 - (self.locations[-1] if self.m else 0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "location"])
        for i, s in enumerate(self.locations, start=1):
            w.writerow([i, repr(float(s))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "locations": [float(s) for s in self.locations],
            "remainder": self.remainder,
            "overshoot": self.overshoot,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SamplePath":
        return cls(np.array(d["locations"], dtype=float), float(d["overshoot"]))


def draw_renewals(spec: RenewalSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` i.i.d. driving terms. Exact zeros are redrawn."""
    out = _raw_draws(spec, rng, size)
    bad = out <= 0.0
    while bad.any():
        out[bad] = _raw_draws(spec, rng, int(bad.sum()))
        bad = out <= 0.0
    return out


def draw_renewal(spec: RenewalSpec, rng: np.random.Generator) -> float:
    return float(draw_renewals(spec, rng, 1)[0])


def _raw_draws(spec: RenewalSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    n = spec.n
    if spec.kind == "uniform":
        # 1 - U maps [0, 1) onto (0, 1], giving support (0, 2/n]
        return (spec.lam / n) * (1.0 - rng.random(size))
    if spec.kind == "scaled-beta":
        return (spec.lam / n) * rng.beta(spec.alpha, spec.alpha * (spec.lam - 1.0), size)
    if spec.kind == "exponential":
        return rng.exponential(1.0 / n, size)
    if spec.kind == "lognormal":
        mu = -math.log(n) - spec.s / 2.0
        return rng.lognormal(mu, math.sqrt(spec.s), size)
    # generalized Pareto, location 0; mean = scale / (1 - xi)
    scale = (1.0 - spec.xi) / n
    u = 1.0 - rng.random(size)
    if spec.xi == 0.0:
        return -scale * np.log(u)
    return scale * np.expm1(-spec.xi * np.log(u)) / spec.xi


def recursive_locations(y: Sequence[float], rho: float) -> np.ndarray:
    """Partial sums S_i of the AR(1) distances built from driving terms ``y``."""
    x = lfilter([1.0], [1.0, -rho], np.asarray(y, dtype=float))
    return np.cumsum(x)


def generate_path(
    cfg: ARConfig,
    rng: Optional[np.random.Generator] = None,
    draws: Optional[Iterable[float]] = None,
) -> SamplePath:
    """Run the recursion until a location exceeds 1.

    Driving terms come from ``rng`` or, for deterministic checks, from the
    explicit sequence ``draws``.
    """
    if (rng is None) == (draws is None):
        raise ValueError("pass exactly one of rng or draws")
    rho = cfg.rho
    if draws is not None:
        y = np.asarray(list(draws), dtype=float)
        if np.any(y <= 0):
            raise ValueError("forced draws must be strictly positive")
        s = recursive_locations(y, rho)
        m = int(np.searchsorted(s, 1.0, side="right"))
        if m == len(s):
            raise ValueError(f"forced draws exhausted before crossing 1 (S = {s[-1] if m else 0.0})")
        return SamplePath(s[:m], float(s[m]))

    n = cfg.renewal.n
    # typical M is about n(1 - rho) + rho/(1 - rho); start there and grow
    chunk = int(n * (1 - rho) + 1 / (1 - rho) + 4 * math.sqrt(n)) + 16
    limit = cfg.max_steps
    pieces = []
    x_prev, s_prev, used = 0.0, 0.0, 0
    while True:
        y = draw_renewals(cfg.renewal, rng, chunk)
        x, _ = lfilter([1.0], [1.0, -rho], y, zi=[rho * x_prev])
        s = s_prev + np.cumsum(x)
        m = int(np.searchsorted(s, 1.0, side="right"))
        if m < len(s):
            pieces.append(s[:m])
            return SamplePath(np.concatenate(pieces), float(s[m]))
        used += chunk
        if used >= limit:
            raise RunawayPathError(f"no crossing of 1 after {used} steps (guard {limit})")
        pieces.append(s)
        x_prev, s_prev = float(x[-1]), float(s[-1])
        chunk *= 2


def closed_form_location(y: Sequence[float], rho: float, i: int) -> float:
    """S_i = (1/(1-rho)) sum_{r<=i} (1 - rho^(i-r+1)) Y_r, without recursion."""
    y = np.asarray(y, dtype=float)
    if not 1 <= i <= len(y):
        raise IndexError(f"index {i} outside 1..{len(y)}")
    powers = np.arange(i, 0, -1)  # i - r + 1 for r = 1..i
    if rho == 0.0:
        return float(np.sum(y[:i]))
    c = -np.expm1(powers * math.log(rho))
    return float(np.dot(c, y[:i]) / (1.0 - rho))


def grid_deviation(path: SamplePath) -> float:
    """(1/M) sum_i (S_i - i/M)^2: squared gap to the uniform surrogate grid."""
    m = path.m
    if m == 0:
        raise EmptyPathError("grid deviation needs at least one sample")
    grid = np.arange(1, m + 1) / m
    return float(np.mean((path.locations - grid) ** 2))


@dataclass(frozen=True)
class PathReport:
    """Per-path checks. ``None`` marks a bound that does not apply (unbounded kind)."""

    m_lower_ok: Optional[bool]
    remainder_ok: Optional[bool]
    increasing: bool
    brackets_one: bool

    @property
    def violations(self) -> int:
        flags = (self.m_lower_ok, self.remainder_ok, self.increasing, self.brackets_one)
        return sum(1 for f in flags if f is False)

    def to_dict(self) -> dict:
        return asdict(self)


def path_report(path: SamplePath, cfg: ARConfig) -> PathReport:
    locs = path.locations
    increasing = bool(np.all(np.diff(locs) > 0) and (path.m == 0 or locs[0] > 0))
    last = locs[-1] if path.m else 0.0
    brackets = bool(last <= 1.0 < path.overshoot)
    if not cfg.renewal.bounded:
        return PathReport(None, None, increasing, brackets)
    n, lam, rho = cfg.renewal.n, cfg.renewal.lam, cfg.rho
    m_ok = path.m > n * (1 - rho) / lam - 1
    r_ok = path.remainder <= lam / (n * (1 - rho))
    return PathReport(bool(m_ok), bool(r_ok), increasing, brackets)
