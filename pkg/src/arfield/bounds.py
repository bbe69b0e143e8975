"""Closed-form sample-count, remainder and density-threshold quantities."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class BoundSet:
    """Theoretical quantities for (rho, lambda[, n]).

    Entries that depend on n are ``None`` when no density was given.
    """

    rho: float
    lam: float
    n: Optional[float]
    density_threshold: float
    em_lower: Optional[float] = None
    em_upper: Optional[float] = None
    m_lower: Optional[float] = None
    remainder_upper: Optional[float] = None
    effective_density: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"rho": d.pop("rho"), "lambda": d.pop("lam"), **d}

    def table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items()]
        width = max(len(k) for k, _ in rows)
        lines = []
        for k, v in rows:
            shown = "n/a" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))
            lines.append(f"{k:<{width}}  {shown}")
        return "\n".join(lines)


def density_threshold(rho: float, lam: float) -> float:
    """Sufficient density (lam/(1-rho)) (1 - 2/ln rho); equals lam at rho = 0."""
    if rho == 0.0:
        return float(lam)
    return lam / (1.0 - rho) * (1.0 - 2.0 / math.log(rho))


def compute_bounds(rho: float, lam: float, n: Optional[float] = None) -> BoundSet:
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if not lam > 1.0:
        raise ValueError(f"lambda must exceed 1, got {lam}")
    thr = density_threshold(rho, lam)
    if n is None:
        return BoundSet(rho, lam, None, thr)
    if not n >= 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eff = n - n * rho  # exact for e.g. n=1e4, rho=0.99 where n*(1-rho) is not
    return BoundSet(
        rho,
        lam,
        n,
        thr,
        em_lower=eff - 1.0,
        em_upper=n + lam / (1.0 - rho) - 1.0,
        m_lower=eff / lam - 1.0,
        remainder_upper=lam / eff,
        effective_density=eff,
    )


def theorem_envelope(rho: float, n, c: float, c_prime: float):
    """(c - c' rho^n) / n. The constants are fitted, never known a priori."""
    n = np.asarray(n, dtype=float)
    out = (c - c_prime * rho**n) / n
    return float(out) if out.ndim == 0 else out


def fit_envelope(rho: float, ns: Sequence[float], ds: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares (c, c') in relative error, plus R^2 of log10 D.

    When rho^n underflows over the whole grid, c' is unidentifiable and the
    minimum-norm solution (c' = 0) is returned.
    """
    ns = np.asarray(ns, dtype=float)
    ds = np.asarray(ds, dtype=float)
    design = np.column_stack([1.0 / ns, -(rho**ns) / ns]) / ds[:, None]
    (c, c_prime), *_ = np.linalg.lstsq(design, np.ones_like(ds), rcond=None)
    fitted = theorem_envelope(rho, ns, c, c_prime)
    y = np.log10(ds)
    resid = y - np.log10(fitted)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(c), float(c_prime), float(r2)
