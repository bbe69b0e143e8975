"""Seeded Monte Carlo sweeps of estimation distortion over (rho, n).

Every trial owns a random stream derived only from its indices:

    SeedSequence(master_seed, spawn_key=(rho_index, n_index, trial_index))
      -> Philox counter-based bit generator

so results do not depend on execution order or on how trials are split
across workers. Aggregates are reduced in trial-index order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .estimator import coefficient_distortion, estimate, reconstruct
from .field import PAPER_FIELD, FourierCoefficients, evaluate, random_field
from .noise import NoiseSpec, corrupt
from .sampling import ARConfig, RenewalSpec, generate_path, path_report

CSV_COLUMNS = (
    "rho",
    "n",
    "lambda",
    "renewal_kind",
    "noise_variance",
    "trials",
    "mean_distortion",
    "stderr",
    "mean_M",
    "failed_trials",
    "bound_violations",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass(frozen=True)
class FieldSeed:
    """Field drawn by ``random_field(b, default_rng(seed))``."""

    b: int
    seed: int

    def realize(self) -> FourierCoefficients:
        return random_field(self.b, np.random.default_rng(self.seed))


@dataclass(frozen=True)
class ExperimentConfig:
    field: Union[FourierCoefficients, FieldSeed]
    rho_list: tuple
    n_list: tuple
    renewal: RenewalSpec = RenewalSpec()
    noise: NoiseSpec = NoiseSpec()
    trials: int = 1000
    master_seed: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rho_list", tuple(self.rho_list))
        object.__setattr__(self, "n_list", tuple(self.n_list))
        if not self.rho_list or not self.n_list:
            raise ConfigError("rho_list/n_list: empty experiment grid")
        for i, rho in enumerate(self.rho_list):
            if not 0.0 <= rho < 1.0:
                raise ConfigError(f"rho_list[{i}]: {rho} not in [0, 1)")
        for i, n in enumerate(self.n_list):
            if not n > 0:
                raise ConfigError(f"n_list[{i}]: density must be positive, got {n}")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigError("n_list: must be strictly increasing")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ConfigError(f"trials: must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.master_seed, int) and 0 <= self.master_seed < 2**64):
            raise ConfigError(f"master_seed: must be a 64-bit unsigned integer, got {self.master_seed!r}")

    def field_coefficients(self) -> FourierCoefficients:
        if isinstance(self.field, FieldSeed):
            return self.field.realize()
        return self.field

    def ar_config(self, rho: float, n: float) -> ARConfig:
        return ARConfig(rho, self.renewal.with_density(n))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**d)

    def to_dict(self) -> dict:
        if isinstance(self.field, FieldSeed):
            fd = {"b": self.field.b, "seed": self.field.seed}
        else:
            fd = self.field.to_dict()
        return {
            "name": self.name,
            "field": fd,
            "rho_list": list(self.rho_list),
            "n_list": list(self.n_list),
            "renewal": {k: v for k, v in self.renewal.to_dict().items() if k != "n"},
            "noise": self.noise.to_dict(),
            "trials": self.trials,
            "master_seed": self.master_seed,
        }


def _field_from_config(d) -> Union[FourierCoefficients, FieldSeed]:
    if d == "paper":
        return PAPER_FIELD
    if not isinstance(d, dict) or "b" not in d:
        raise ConfigError("field: expected \"paper\", {b, seed} or {b, coeffs}")
    try:
        if "coeffs" in d:
            f = FourierCoefficients.from_dict(d)
            if not np.allclose(f.coeffs, np.conj(f.coeffs[::-1]), atol=1e-12, rtol=0):
                raise ConfigError("field.coeffs: not conjugate symmetric, the field would not be real")
            return f
        return FieldSeed(int(d["b"]), int(d.get("seed", 0)))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"field: {exc}") from exc


def config_from_dict(d: dict) -> ExperimentConfig:
    known = {"name", "field", "rho_list", "n_list", "renewal", "noise", "trials", "master_seed", "description"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("field", "rho_list", "n_list"):
        if key not in d:
            raise ConfigError(f"{key}: missing")
    try:
        renewal = RenewalSpec.from_dict(d.get("renewal", {}))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"renewal.{exc}") from exc
    try:
        noise = NoiseSpec.from_dict(d.get("noise", {}))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(
        field=_field_from_config(d["field"]),
        rho_list=[float(r) for r in d["rho_list"]],
        n_list=list(d["n_list"]),
        renewal=renewal,
        noise=noise,
        trials=d.get("trials", 1000),
        master_seed=d.get("master_seed", 0),
        name=d.get("name", ""),
    )


def load_config(path) -> ExperimentConfig:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(d)


def trial_rng(master_seed: int, rho_index: int, n_index: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(rho_index, n_index, trial_index))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class TrialResult:
    """``distortion`` is NaN for a failed trial (no samples landed in [0, 1])."""

    distortion: float
    m: int
    violations: int

    @property
    def failed(self) -> bool:
        return self.m == 0


def run_trial(
    field: FourierCoefficients, cfg: ARConfig, noise: NoiseSpec, rng: np.random.Generator
) -> TrialResult:
    path = generate_path(cfg, rng)
    violations = path_report(path, cfg).violations
    if path.m == 0:
        return TrialResult(math.nan, 0, violations)
    readings = corrupt(evaluate(field, path.locations), noise, rng)
    est = estimate(readings, field.b)
    return TrialResult(coefficient_distortion(est, field).total, path.m, violations)


@dataclass
class CurvePoint:
    rho: float
    n: float
    lam: float
    renewal_kind: str
    noise_variance: float
    trials: int
    mean_distortion: float
    stderr: float
    mean_m: float
    failed_trials: int
    bound_violations: int

    def row(self) -> list:
        return [
            repr(self.rho),
            _num(self.n),
            repr(self.lam),
            self.renewal_kind,
            repr(self.noise_variance),
            str(self.trials),
            repr(self.mean_distortion),
            repr(self.stderr),
            repr(self.mean_m),
            str(self.failed_trials),
            str(self.bound_violations),
        ]


def _num(x) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _parse_num(s: str):
    v = float(s)
    return int(v) if v.is_integer() and "." not in s and "e" not in s.lower() else v


@dataclass
class DistortionCurve:
    points: list = dc_field(default_factory=list)
    slopes: dict = dc_field(default_factory=dict)
    field_digest: str = ""

    def series(self, rho: float) -> tuple[np.ndarray, np.ndarray]:
        pts = sorted((p for p in self.points if p.rho == rho), key=lambda p: p.n)
        return np.array([p.n for p in pts], dtype=float), np.array([p.mean_distortion for p in pts])

    def rhos(self) -> list:
        return list(dict.fromkeys(p.rho for p in self.points))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow(p.row())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "field_digest": self.field_digest,
            "slopes": [{"rho": r, "slope": s} for r, s in self.slopes.items()],
            "points": [asdict(p) for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def read_csv(text: str) -> list:
    """Parse curve points written by :meth:`DistortionCurve.to_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError("not a distortion-curve CSV (header mismatch)")
    out = []
    for r in rows[1:]:
        out.append(
            CurvePoint(
                rho=float(r[0]),
                n=_parse_num(r[1]),
                lam=float(r[2]),
                renewal_kind=r[3],
                noise_variance=float(r[4]),
                trials=int(r[5]),
                mean_distortion=float(r[6]),
                stderr=float(r[7]),
                mean_m=float(r[8]),
                failed_trials=int(r[9]),
                bound_violations=int(r[10]),
            )
        )
    return out


def field_digest(f: FourierCoefficients) -> str:
    return hashlib.sha256(f.to_json().encode()).hexdigest()[:16]


def fit_loglog_slope(ns: Sequence[float], ds: Sequence[float]) -> float:
    """OLS slope of log10 D against log10 n."""
    ns = np.asarray(ns, dtype=float)
    ds = np.asarray(ds, dtype=float)
    if len(ns) != len(ds) or len(ns) < 2:
        raise ValueError("need at least two (n, D) pairs")
    if np.any(ns <= 0) or np.any(ds <= 0) or not np.all(np.isfinite(ds)):
        raise ValueError("densities and distortions must be positive and finite")
    x, y = np.log10(ns), np.log10(ds)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def _run_block(args) -> list:
    field, cfg, noise, seed, ri, ni, trial_indices = args
    return [run_trial(field, cfg, noise, trial_rng(seed, ri, ni, t)) for t in trial_indices]


def _aggregate(results: list, cfg: ARConfig, noise: NoiseSpec) -> CurvePoint:
    d = np.array([r.distortion for r in results if not r.failed])
    if len(d) >= 2:
        stderr = float(np.std(d, ddof=1) / math.sqrt(len(d)))
    else:
        stderr = 0.0
    return CurvePoint(
        rho=cfg.rho,
        n=cfg.renewal.n,
        lam=cfg.renewal.lam,
        renewal_kind=cfg.renewal.kind,
        noise_variance=noise.variance,
        trials=len(results),
        mean_distortion=float(np.mean(d)) if len(d) else math.nan,
        stderr=stderr,
        mean_m=float(np.mean([r.m for r in results])),
        failed_trials=sum(r.failed for r in results),
        bound_violations=sum(r.violations for r in results),
    )


def monte_carlo(config: ExperimentConfig, workers: int = 1, progress=None) -> DistortionCurve:
    """Run ``config.trials`` trials at every (rho, n) point and fit per-rho slopes.

    ``workers > 1`` distributes trial blocks over processes; the output is
    identical to the serial run.
    """
    field = config.field_coefficients()
    points = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for ri, rho in enumerate(config.rho_list):
            for ni, n in enumerate(config.n_list):
                cfg = config.ar_config(rho, n)
                idx = np.arange(config.trials)
                if pool is None:
                    results = _run_block((field, cfg, config.noise, config.master_seed, ri, ni, idx))
                else:
                    blocks = [
                        (field, cfg, config.noise, config.master_seed, ri, ni, chunk)
                        for chunk in np.array_split(idx, workers * 4)
                        if len(chunk)
                    ]
                    results = [r for block in pool.map(_run_block, blocks) for r in block]
                points.append(_aggregate(results, cfg, config.noise))
                if progress is not None:
                    progress(points[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return DistortionCurve(points, _fit_slopes(points), field_digest(field))


def _fit_slopes(points: list) -> dict:
    slopes = {}
    for rho in dict.fromkeys(p.rho for p in points):
        pts = [p for p in points if p.rho == rho and p.mean_distortion > 0]
        if len(pts) >= 2:
            slopes[rho] = fit_loglog_slope([p.n for p in pts], [p.mean_distortion for p in pts])
        else:
            slopes[rho] = math.nan
    return slopes


def reconstruction_runs(config: ExperimentConfig, grid: int = 512) -> dict:
    """Reconstructed fields on a uniform grid for every (rho, n, trial).

    Returns ``{"x": xs, "truth": g(xs), "runs": [(rho, n, trial, values), ...]}``.
    """
    field = config.field_coefficients()
    xs = np.arange(grid) / grid
    runs = []
    for ri, rho in enumerate(config.rho_list):
        for ni, n in enumerate(config.n_list):
            cfg = config.ar_config(rho, n)
            for t in range(config.trials):
                rng = trial_rng(config.master_seed, ri, ni, t)
                path = generate_path(cfg, rng)
                if path.m == 0:
                    continue
                readings = corrupt(evaluate(field, path.locations), config.noise, rng)
                runs.append((rho, n, t, reconstruct(estimate(readings, field.b), xs)))
    return {"x": xs, "truth": evaluate(field, xs), "runs": runs}


def export(curve: DistortionCurve, fmt: str, path) -> Path:
    path = Path(path)
    if fmt == "csv":
        path.write_text(curve.to_csv())
    elif fmt == "json":
        path.write_text(curve.to_json())
    elif fmt == "svg":
        _write_svg(curve, path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    return path


def _write_svg(curve: DistortionCurve, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "arfield"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for rho in curve.rhos():
        ns, ds = curve.series(rho)
        ok = np.isfinite(ds) & (ds > 0)
        slope = curve.slopes.get(rho, math.nan)
        ax.loglog(ns[ok], ds[ok], "o-", ms=4, label=f"rho={rho:g}  slope {slope:.2f}")
    ax.set_xlabel("sampling density n")
    ax.set_ylabel("mean distortion")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_reconstruction_svg(runs: dict, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "arfield"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(runs["x"], runs["truth"], "k-", lw=2, label="g(x)")
    seen = set()
    for rho, n, _, vals in runs["runs"]:
        label = f"n={n:g}, rho={rho:g}"
        ax.plot(runs["x"], vals, lw=0.8, alpha=0.7, label=None if label in seen else label)
        seen.add(label)
    ax.set_xlabel("x")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
