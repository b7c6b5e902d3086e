import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sagames import Branch, DomainError, EqBranch, GameParams, ParameterError, team_densities
from sagames import delay_game as dg
from sagames.delay_game import Regime
from oracles import bisect, delay_fixed_point_residual, grid_argmax, lambert_mp

P3 = GameParams(1.0, 3.0)          # lam*C_bar = 1.5
RHO_T = (1.5 * math.e) ** 2
RHO_M1 = math.exp(3.0)


def test_thresholds():
    th = dg.thresholds(P3)
    assert th.rho_t == pytest.approx(16.625376222593963, rel=1e-15)
    assert th.rho_boundary == pytest.approx(20.085536923187668, rel=1e-15)
    assert th.regime is Regime.LARGE_CONTENTION
    small = dg.thresholds(GameParams(1.0, 0.5))
    assert small.regime is Regime.SMALL_CONTENTION
    assert small.rho_boundary == pytest.approx(math.exp(0.5))
    at_one = dg.thresholds(GameParams(1.0, 2.0))
    assert at_one.rho_t == pytest.approx(at_one.rho_boundary, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0.01, 10.0))
def test_boundary_above_rho_t(lam, c):
    th = dg.thresholds(GameParams(lam, c))
    assert th.rho_boundary >= th.rho_t * (1 - 1e-15)


def test_rho_minus1_bisection_crosscheck():
    # rho_-1 solves -W_-1(-x / sqrt(rho)) = x
    x = 1.5
    f = lambda rho: -lambert_mp(-x / math.sqrt(rho), -1) - x
    root = bisect(f, RHO_T * 1.0001, 40.0, tol=1e-12)
    assert root == pytest.approx(dg.thresholds(P3).rho_boundary, rel=1e-9)


def test_two_equilibria_at_18():
    eqs = dg.sne_all(18.0, P3)
    assert [e.branch for e in eqs] == [EqBranch.LAMBERT_PRINCIPAL, EqBranch.LAMBERT_MINUS1]
    lo, hi = eqs
    # bisection oracle on the fixed point p = exp(1.5 p) / sqrt(18)
    f = lambda p: p - math.exp(1.5 * p) / math.sqrt(18.0)
    assert lo.p_star == pytest.approx(bisect(f, 0.0, 1 / 1.5), abs=1e-12)
    assert hi.p_star == pytest.approx(bisect(f, 1 / 1.5, 1.0), abs=1e-12)
    assert lo.p_star == pytest.approx(0.49598735516605905, abs=1e-13)
    assert hi.p_star == pytest.approx(0.87262220435560426, abs=1e-13)
    assert lo.stable and not hi.stable
    for e in eqs:
        assert delay_fixed_point_residual(e.p_star, 1.5, 18.0) <= 1e-10


def test_regime_labels():
    assert dg.regime_label(5.0, P3) == "unique_p1"
    assert dg.regime_label(RHO_T, P3) == "two_sne"
    assert dg.regime_label(18.0, P3) == "two_sne"
    assert dg.regime_label(RHO_M1, P3) == "two_sne"
    assert dg.regime_label(25.0, P3) == "unique_W0"
    small = GameParams(1.0, 0.5)
    assert dg.regime_label(1.0, small) == "unique_p1"
    assert dg.regime_label(5.0, small) == "unique_W0"


def test_degenerate_point_rho_t():
    eqs = dg.sne_all(RHO_T, P3)
    assert len(eqs) == 1
    assert eqs[0].branch is EqBranch.LAMBERT_PRINCIPAL
    assert eqs[0].p_star == pytest.approx(1 / 1.5, rel=1e-15)
    assert eqs[0].stable is False


def test_two_sne_window_sweep():
    th = dg.thresholds(P3)
    for rho in np.linspace(1.0, 60.0, 2000):
        n = len(dg.sne_all(rho, P3))
        inside = th.rho_t < rho < th.rho_boundary
        assert n == (2 if inside else 1), rho


def test_branch_ordering_and_stability():
    for rho in np.linspace(RHO_T, RHO_M1, 400)[1:-1]:
        lo, hi = dg.sne_all(rho, P3)
        assert lo.p_star < hi.p_star
        assert lo.stable and not hi.stable
        assert 1.5 * lo.p_star < 1 < 1.5 * hi.p_star
    for rho in np.linspace(RHO_M1 * 1.001, 200, 200):
        (eq,) = dg.sne_all(rho, P3)
        assert eq.stable and 1.5 * eq.p_star < 1


def test_small_contention():
    small = GameParams(1.0, 0.5)
    (eq,) = dg.sne_all(1.2, small)
    assert eq.p_star == 1.0 and eq.branch is EqBranch.BOUNDARY1 and eq.stable
    (eq,) = dg.sne_all(4.0, small)
    assert eq.branch is EqBranch.LAMBERT_PRINCIPAL
    assert delay_fixed_point_residual(eq.p_star, 0.25, 4.0) <= 1e-12


def _max_deviation_gain(eq, params):
    q = np.linspace(1e-4, 1.0, 10_000)
    u = -math.exp(eq.p_star * params.lam_C) / q - eq.rho * q
    return u.max() - eq.utility_at_eq


def test_no_profitable_deviation():
    rng = np.random.default_rng(17)
    for _ in range(200):
        params = GameParams(rng.uniform(0.1, 3.0), rng.uniform(0.1, 5.0))
        rho = rng.uniform(0.05, 4.0) * dg.thresholds(params).rho_boundary
        for eq in dg.sne_all(rho, params, include_boundary=True):
            assert _max_deviation_gain(eq, params) <= 1e-9 * max(1.0, abs(eq.utility_at_eq))


def test_corner_equilibrium_inside_window():
    eqs = dg.sne_all(18.0, P3, include_boundary=True)
    assert len(eqs) == 3
    corner = eqs[-1]
    assert corner.branch is EqBranch.BOUNDARY1 and corner.p_star == 1.0 and corner.stable
    assert dg.best_response(1.0, 18.0, P3) == 1.0


def test_best_response_fixed_points():
    for e in dg.sne_all(18.0, P3):
        assert dg.best_response(e.p_star, 18.0, P3) == pytest.approx(e.p_star, abs=1e-12)


def test_validation():
    with pytest.raises(DomainError):
        dg.sne_all(0.0, P3)
    with pytest.raises(DomainError):
        dg.sne_all(-1.0, P3)
    with pytest.raises(ParameterError):
        dg.utility(0.5, 1.5, 1.0, P3)
    with pytest.raises(DomainError):
        dg.utility(0.0, 0.5, 1.0, P3)
    with pytest.raises(DomainError):
        dg.equilibrium_delay(10.0, Branch.PRINCIPAL, P3)
    with pytest.raises(DomainError):
        dg.equilibrium_delay(25.0, Branch.MINUS1, P3)
    with pytest.raises(DomainError):
        dg.team_optimizer(5.0, GameParams(1.0, 0.9))
    with pytest.raises(DomainError):
        dg.poa(5.0, GameParams(1.0, 1.0))


def test_equilibrium_delays():
    assert dg.equilibrium_delay(18.0, Branch.PRINCIPAL, P3) == pytest.approx(
        1 / (0.49598735516605905 * math.exp(-3 * 0.49598735516605905)), rel=1e-12)
    assert dg.equilibrium_delay(18.0, Branch.MINUS1, P3) == pytest.approx(
        1 / (0.87262220435560426 * math.exp(-3 * 0.87262220435560426)), rel=1e-12)
    assert dg.h_objective(18.0, Branch.MINUS1, P3) == pytest.approx(
        -18 * lambert_mp(-1.5 / math.sqrt(18), -1), rel=1e-12)


def test_optimal_price_values():
    rho, d = dg.optimal_price(P3)
    assert rho == pytest.approx(9 * math.e, rel=1e-15)
    assert d == pytest.approx(3 * math.e, abs=1e-12)
    (eq,) = dg.sne_all(rho, P3)
    assert eq.p_star == pytest.approx(1 / 3, abs=1e-12)
    rho, d = dg.optimal_price(GameParams(1.0, 0.5))
    assert rho == pytest.approx(math.exp(0.5))
    assert d == pytest.approx(math.exp(0.5), abs=1e-12)
    assert dg.sne_all(rho, GameParams(1.0, 0.5))[0].p_star == 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 10.0))
def test_optimal_price_reaches_team_delay(lam, c):
    params = GameParams(lam, c)
    _, d_eq = dg.optimal_price(params)
    _, d_t = team_densities(params)
    assert d_eq == pytest.approx(d_t, rel=1e-12)


def test_optimal_price_minimises_equilibrium_delay():
    rho_star, d_star = dg.optimal_price(P3)
    for rho in np.linspace(RHO_T, 10 * rho_star, 500):
        assert P3.lam * dg.equilibrium_delay(rho, Branch.PRINCIPAL, P3) >= d_star * (1 - 1e-12)


def test_h_quasi_convex():
    rho_star, _ = dg.optimal_price(P3)
    grid = np.linspace(RHO_T, 10 * rho_star, 1000)
    h = np.array([dg.h_objective(r, Branch.PRINCIPAL, P3) for r in grid])
    k = int(np.argmin(h))
    assert np.all(np.diff(h[:k + 1]) <= 0)
    assert np.all(np.diff(h[k:]) >= 0)
    assert abs(grid[k] - 4 * math.e * 1.5 ** 2) <= grid[1] - grid[0]


@settings(max_examples=200, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.1, 20.0))
def test_bad_branch_penalty(lam, c):
    params = GameParams(lam, c)
    if params.C_bar * lam <= 1.0:
        with pytest.raises(DomainError):
            dg.bad_equilibrium_penalty(params)
    else:
        assert dg.bad_equilibrium_penalty(params) == pytest.approx(math.e / 2, abs=1e-12)


def test_team_optimizer():
    p_m = dg.team_optimizer(18.0, P3)
    root = bisect(lambda p: math.exp(3 * p) * (1 - 3 * p) - 18 * p * p, 1e-12, 1 / 3)
    assert p_m == pytest.approx(root, abs=1e-12)
    assert p_m == pytest.approx(0.20084213688724883, abs=1e-12)
    p_grid, _ = grid_argmax(lambda p: -np.exp(3 * p) / p - 18 * p, 1e-3, 1.0, 1_000_001)
    assert p_m == pytest.approx(p_grid, abs=1e-6)
    assert dg.team_optimizer(1e-12, P3) == pytest.approx(1 / 3, abs=1e-6)
    ps = [dg.team_optimizer(r, P3) for r in np.linspace(0.1, 100, 300)]
    assert np.all(np.diff(ps) <= 0)


def test_poa_at_18():
    rep = dg.poa(18.0, P3)
    assert rep.value == pytest.approx(0.40460748288504933, rel=1e-11)
    assert rep.lower_bound == pytest.approx(0.32663635534649190, rel=1e-11)
    assert rep.upper_bound == pytest.approx(0.56077116021248710, rel=1e-11)
    assert rep.bounds_hold
    assert rep.p_worst == pytest.approx(0.87262220435560426)


def test_poa_endpoints_hit_bounds():
    at_t = dg.poa(RHO_T, P3)
    assert at_t.value == pytest.approx(at_t.upper_bound, rel=1e-10)
    at_m1 = dg.poa(RHO_M1, P3)
    assert at_m1.value == pytest.approx(at_m1.lower_bound, rel=1e-10)


def test_poa_beyond_window():
    rep = dg.poa(25.0, P3)
    assert rep.bounds_hold and rep.upper_bound == 1.0
    assert rep.lower_bound == pytest.approx(rep.p_team / rep.p_worst)
    assert 0 < rep.value <= 1


def test_poa_bounds_grid_and_jump():
    grid = np.linspace(RHO_T, 2 * RHO_M1, 1000)
    reps = [dg.poa(r, P3) for r in grid]
    assert all(r.bounds_hold for r in reps)
    vals = np.array([r.value for r in reps])
    k = int(np.argmax(np.abs(np.diff(vals))))
    assert grid[k] <= RHO_M1 <= grid[k + 1]
    assert vals[k + 1] - vals[k] > 0.3


def test_poa_value_is_cost_ratio_inverse():
    rep = dg.poa(18.0, P3)
    cost_team, cost_eq = -rep.team_optimum, -rep.worst_equilibrium
    assert 1 / rep.value == pytest.approx(cost_eq / cost_team)
    assert cost_eq >= cost_team
