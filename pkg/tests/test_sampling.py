import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arfield.sampling import (
    ARConfig,
    EmptyPathError,
    RenewalSpec,
    RunawayPathError,
    SamplePath,
    closed_form_location,
    draw_renewal,
    draw_renewals,
    generate_path,
    grid_deviation,
    path_report,
    recursive_locations,
)

HAND_DRAWS = (0.1, 0.2, 0.3, 0.9)


def hand_recursion(y, rho):
    """Plain loop: X_1 = Y_1, X_i = rho X_{i-1} + Y_i, S_i = S_{i-1} + X_i."""
    out, x, s = [], 0.0, 0.0
    for i, yi in enumerate(y):
        x = yi if i == 0 else rho * x + yi
        s += x
        out.append(s)
    return np.array(out)


SPECS = [
    RenewalSpec("uniform", n=100),
    RenewalSpec("scaled-beta", n=100, lam=2.0, alpha=2.0),
    RenewalSpec("scaled-beta", n=100, lam=3.5, alpha=0.7),
    RenewalSpec("exponential", n=100),
    RenewalSpec("lognormal", n=100, s=0.5),
    RenewalSpec("generalized-pareto", n=100, xi=0.4),
    RenewalSpec("generalized-pareto", n=100, xi=0.0),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-{s.lam}-{s.alpha}-{s.xi}")
def test_renewal_mean_is_one_over_n(spec):
    y = draw_renewals(spec, np.random.default_rng(7), 10**6)
    assert np.all(y > 0)
    se = y.std(ddof=1) / math.sqrt(len(y))
    assert abs(y.mean() - 1 / spec.n) <= 5 * se
    if spec.bounded:
        assert y.max() <= spec.lam / spec.n


def test_uniform_support():
    y = draw_renewals(RenewalSpec("uniform", n=100), np.random.default_rng(1), 10**5)
    assert y.min() > 0 and y.max() <= 0.02
    assert y.mean() == pytest.approx(0.01, rel=0.01)


def test_scaled_beta_example():
    spec = RenewalSpec("scaled-beta", n=10, lam=2.0, alpha=2.0)
    y = draw_renewals(spec, np.random.default_rng(2), 10**5)
    assert y.min() > 0 and y.max() <= 0.2
    # Beta(2, 2) has mean 1/2, so the scaled mean is 0.2 / 2
    assert y.mean() == pytest.approx(0.1, rel=0.01)


def test_draw_renewal_single(rng):
    assert 0 < draw_renewal(RenewalSpec("uniform", n=50), rng) <= 0.04


def test_zero_draws_are_redrawn():
    class ZeroFirst:
        """Generator stand-in whose first uniform batch contains an exact 1 (-> Y = 0)."""

        def __init__(self):
            self.calls = 0

        def random(self, size):
            self.calls += 1
            return np.ones(size) if self.calls == 1 else np.full(size, 0.5)

    y = draw_renewals(RenewalSpec("uniform", n=10), ZeroFirst(), 3)
    np.testing.assert_allclose(y, 0.1)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="gaussian"),
        dict(kind="uniform", lam=3.0),
        dict(kind="scaled-beta", lam=1.0),
        dict(kind="generalized-pareto", xi=0.5),
        dict(kind="uniform", n=0),
    ],
)
def test_invalid_renewal_specs(kwargs):
    with pytest.raises(ValueError):
        RenewalSpec(**kwargs)


@pytest.mark.parametrize("rho", [-0.1, 1.0, 1.5])
def test_invalid_rho(rho):
    with pytest.raises(ValueError):
        ARConfig(rho, RenewalSpec())


def test_hand_path():
    cfg = ARConfig(0.5, RenewalSpec("uniform", n=2))
    path = generate_path(cfg, draws=HAND_DRAWS)
    np.testing.assert_allclose(path.locations, [0.1, 0.35, 0.775], rtol=1e-14)
    assert path.m == 3
    assert path.remainder == pytest.approx(0.225, abs=1e-14)
    assert path.overshoot == pytest.approx(1.8875, abs=1e-14)


def test_hand_path_report():
    cfg = ARConfig(0.5, RenewalSpec("uniform", n=2))
    rep = path_report(generate_path(cfg, draws=HAND_DRAWS), cfg)
    # M = 3 > 2 * 0.5 / 2 - 1 = -0.5 and R_M = 0.225 <= 2 / (2 * 0.5) = 2
    assert rep.m_lower_ok and rep.remainder_ok and rep.increasing and rep.brackets_one
    assert rep.violations == 0


def test_forced_draws_must_cross():
    cfg = ARConfig(0.5, RenewalSpec("uniform", n=2))
    with pytest.raises(ValueError, match="exhausted"):
        generate_path(cfg, draws=[0.1, 0.1])
    with pytest.raises(ValueError):
        generate_path(cfg, draws=[0.1, -0.2, 2.0])
    with pytest.raises(ValueError):
        generate_path(cfg)


def test_rho_zero_is_pure_renewal():
    y = np.random.default_rng(3).uniform(0.001, 0.02, 200)
    path = generate_path(ARConfig(0.0, RenewalSpec("uniform", n=100)), draws=y)
    np.testing.assert_allclose(path.locations, np.cumsum(y)[: path.m], rtol=1e-14)


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.9, 0.995])
def test_recursion_matches_plain_loop(rho):
    y = np.random.default_rng(4).random(300)
    np.testing.assert_allclose(recursive_locations(y, rho), hand_recursion(y, rho), rtol=1e-12)


def test_chunked_generation_matches_loop():
    """The chunked generator consumes draws in order; replaying them must agree."""
    cfg = ARConfig(0.97, RenewalSpec("uniform", n=200))
    path = generate_path(cfg, np.random.default_rng(11))
    # replay: the same stream, drawn in the same chunk sizes
    gen = np.random.default_rng(11)
    n, rho = 200, 0.97
    chunk = int(n * (1 - rho) + 1 / (1 - rho) + 4 * math.sqrt(n)) + 16
    ys = []
    while True:
        ys.extend(draw_renewals(cfg.renewal, gen, chunk))
        s = hand_recursion(ys, rho)
        if s[-1] > 1:
            break
        chunk *= 2
    m = int(np.sum(s <= 1))
    np.testing.assert_allclose(path.locations, s[:m], rtol=1e-12)
    assert path.overshoot == pytest.approx(s[m], rel=1e-12)


def test_closed_form_examples():
    assert closed_form_location([0.1, 0.2, 0.3], 0.5, 3) == pytest.approx(0.775, abs=1e-15)
    y = [0.3, 0.1, 0.4]
    assert closed_form_location(y, 0.0, 3) == pytest.approx(0.8)
    for rho in (0.0, 0.2, 0.7, 0.99):
        assert closed_form_location(y, rho, 1) == pytest.approx(0.3, rel=1e-14)
    with pytest.raises(IndexError):
        closed_form_location(y, 0.5, 4)


def test_closed_form_matches_recursion():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10**4):
        rho = rng.random() * 0.999
        y = rng.random(int(rng.integers(1, 40)))
        s = recursive_locations(y, rho)
        i = int(rng.integers(1, len(y) + 1))
        worst = max(worst, abs(closed_form_location(y, rho, i) - s[i - 1]) / s[i - 1])
    assert worst <= 1e-10


def test_grid_deviation_examples():
    assert grid_deviation(SamplePath(np.arange(1, 11) / 10, 1.1)) == 0.0
    assert grid_deviation(SamplePath([0.3, 0.9], 1.2)) == pytest.approx(0.025, abs=1e-15)
    with pytest.raises(EmptyPathError):
        grid_deviation(SamplePath([], 1.5))


@pytest.mark.parametrize(
    "spec",
    [RenewalSpec("uniform", n=1000), RenewalSpec("scaled-beta", n=1000, lam=3.0, alpha=1.5)],
    ids=["uniform", "scaled-beta"],
)
@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
def test_per_path_bounds_bounded_kinds(spec, rho):
    cfg = ARConfig(rho, spec)
    rng = np.random.default_rng(int(rho * 10))
    for _ in range(2000):
        path = generate_path(cfg, rng)
        rep = path_report(path, cfg)
        assert rep.violations == 0, rep


def test_uniform_large_rho_sample_count():
    cfg = ARConfig(0.9, RenewalSpec("uniform", n=1000))
    rng = np.random.default_rng(8)
    assert min(generate_path(cfg, rng).m for _ in range(500)) > 49


def test_unbounded_kind_marks_bounds_not_applicable(rng):
    cfg = ARConfig(0.5, RenewalSpec("exponential", n=100))
    rep = path_report(generate_path(cfg, rng), cfg)
    assert rep.m_lower_ok is None and rep.remainder_ok is None
    assert rep.increasing and rep.brackets_one


def test_empty_path_is_possible_for_unbounded_kinds():
    cfg = ARConfig(0.0, RenewalSpec("exponential", n=0.5))
    rng = np.random.default_rng(0)
    paths = [generate_path(cfg, rng) for _ in range(200)]
    empty = [p for p in paths if p.m == 0]
    assert empty  # P(Y_1 > 1) = exp(-0.5)
    assert all(p.remainder == 1.0 and p.overshoot > 1 for p in empty)


def test_runaway_guard():
    class Tiny:
        def random(self, size):
            return np.full(size, 1 - 1e-12)

    cfg = ARConfig(0.0, RenewalSpec("uniform", n=10))
    with pytest.raises(RunawayPathError):
        generate_path(cfg, Tiny())


@settings(max_examples=200, deadline=None)
@given(
    rho=st.floats(0.01, 0.99),
    y=st.lists(st.floats(1e-4, 1.0), min_size=1, max_size=60),
)
def test_monotone_coupling(rho, y):
    assert np.all(recursive_locations(y, 0.0) <= recursive_locations(y, rho) * (1 + 1e-12))


def test_sample_path_serialization():
    path = generate_path(ARConfig(0.5, RenewalSpec("uniform", n=2)), draws=HAND_DRAWS)
    lines = path.to_csv().splitlines()
    assert lines[0] == "index,location"
    assert lines[1] == "1,0.1" and len(lines) == 4
    back = SamplePath.from_dict(json.loads(path.to_json()))
    np.testing.assert_array_equal(back.locations, path.locations)
    assert back.overshoot == path.overshoot and back.m == 3
