"""Medium-access game with goodput utility and linear energy pricing.

A tagged node using access probability ``q`` while everyone else uses ``p``
earns ``U(q, p) = q (exp(-p lam C) - rho)``. The utility is linear in
``q``, so equilibria come from sign arguments on the bracket, and the
price ``rho`` can be tuned so that the equilibrium coincides with the team
optimum.

All functions take ``params`` exposing ``lam`` and ``C`` (either
:class:`~sagames.model.NetworkParams` or :class:`~sagames.model.GameParams`)
and assume the noiseless model.
"""
import logging
import math

import numpy as np

from .errors import DomainError, ParameterError
from .lambertw import lambert_w
from .model import team_densities
from .results import EqBranch, Equilibrium, Metric, PoAReport, Trajectory

__all__ = [
    "utility",
    "sne",
    "equilibrium_goodput",
    "optimal_price",
    "replicator_rhs",
    "replicator_trajectory",
    "team_utility",
    "team_optimizer",
    "team_optimizer_closed_form",
    "poa",
]

log = logging.getLogger(__name__)


def _check_rho(rho):
    if not (rho >= 0.0 and math.isfinite(rho)):
        raise ParameterError(f"price factor must be a finite value >= 0, got {rho!r}")


def _check_map(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p!r}")


def utility(p_tag, p, rho, params):
    """Per-node utility ``p_tag * (exp(-p lam C) - rho)``."""
    _check_map(p_tag, "p_tag")
    _check_map(p)
    _check_rho(rho)
    return p_tag * (math.exp(-p * params.lam_C) - rho)


def sne(rho, params):
    """Symmetric Nash equilibrium of the goodput game.

    ``p* = 0`` when ``rho >= 1``; ``p* = 1`` when ``rho <= exp(-lam C)``;
    otherwise ``p* = -log(rho) / (lam C)``, where every node is indifferent
    to its own access probability.
    """
    _check_rho(rho)
    lc = params.lam_C
    if rho >= 1.0:
        p_star, branch = 0.0, EqBranch.BOUNDARY0
    elif rho <= math.exp(-lc):
        p_star, branch = 1.0, EqBranch.BOUNDARY1
    else:
        p_star, branch = -math.log(rho) / lc, EqBranch.INTERIOR
    # Every equilibrium of this game is an attractor of the replicator flow.
    return Equilibrium(p_star=p_star, branch=branch, stable=True,
                       utility_at_eq=utility(p_star, p_star, rho, params), rho=rho)


def equilibrium_goodput(rho, params):
    """Goodput ``g(p*, p*)`` of each node at the equilibrium for ``rho``."""
    _check_rho(rho)
    lc = params.lam_C
    if rho >= 1.0:
        return 0.0
    if rho <= math.exp(-lc):
        return math.exp(-lc)
    return -rho * math.log(rho) / lc


def optimal_price(params):
    """Price factor whose equilibrium reaches the team density of success.

    ``1/e`` if ``lam C > 1``, else ``exp(-lam C)``.
    """
    lc = params.lam_C
    return math.exp(-1.0) if lc > 1.0 else math.exp(-lc)


def replicator_rhs(p, rho, params):
    """Replicator vector field ``p (1 - p) (exp(-lam C p) - rho)``."""
    return p * (1.0 - p) * (math.exp(-params.lam_C * p) - rho)


def replicator_trajectory(p0, rho, params, horizon=1000.0, step=0.01, tol=1e-6):
    """Integrate the replicator dynamics with fixed-step RK4.

    States are clamped to ``[0, 1]`` after every step. ``converged`` on the
    returned :class:`Trajectory` tells whether the final state is within
    ``tol`` of the equilibrium predicted by :func:`sne`.
    """
    if not 0.0 < p0 < 1.0:
        raise ParameterError(f"initial state must lie in (0, 1), got {p0!r}")
    _check_rho(rho)
    if not (horizon > 0.0 and step > 0.0):
        raise ParameterError("horizon and step must be positive")
    if step >= horizon:
        raise ParameterError(f"step {step!r} must be smaller than horizon {horizon!r}")

    n = int(math.ceil(horizon / step - 1e-9))
    times = np.minimum(np.arange(n + 1) * step, horizon)
    states = np.empty(n + 1)
    lc = params.lam_C
    exp = math.exp

    def f(x):
        return x * (1.0 - x) * (exp(-lc * x) - rho)

    p = float(p0)
    states[0] = p
    for i in range(n):
        h = times[i + 1] - times[i]
        k1 = f(p)
        k2 = f(p + 0.5 * h * k1)
        k3 = f(p + 0.5 * h * k2)
        k4 = f(p + h * k3)
        p += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        p = min(1.0, max(0.0, p))
        states[i + 1] = p

    target = sne(rho, params).p_star
    converged = abs(p - target) <= tol
    return Trajectory(times=times, states=states, rho=rho, params=params,
                      target=target, converged=converged, tol=tol)


def team_utility(p, rho, params):
    """Team utility ``lam p exp(-p lam C) - lam p rho``."""
    return params.lam * utility(p, p, rho, params)


def team_optimizer_closed_form(rho, params):
    """``rho (1 - W(rho e))^2 / (C W(rho e))``, the analytic team maximum.

    Evaluated as ``(1 - W)^2 exp(W - 1) / C`` using ``rho / W = exp(W - 1)``,
    which stays accurate for tiny ``rho`` and gives ``1/(e C)`` at zero.
    """
    w = lambert_w(rho * math.e)
    return (1.0 - w) ** 2 * math.exp(w - 1.0) / params.C


def _team_argmax(rho, params):
    if rho >= 1.0:
        return 0.0
    return min(1.0, (1.0 - lambert_w(rho * math.e)) / params.lam_C)


def team_optimizer(rho, params):
    """Maximiser of :func:`team_utility` and the maximum value.

    The maximiser is ``p_m = (1 - W_0(rho e)) / (lam C)``. When ``lam C < 1``
    the formula only applies while ``W_0(rho e) >= 1 - lam C``. For
    ``rho > 1`` nobody should transmit and ``(0, 0)`` is returned.

    Raises
    ------
    DomainError
        If ``lam C < 1`` and ``W_0(rho e) < 1 - lam C``.
    """
    _check_rho(rho)
    if rho > 1.0:
        return 0.0, 0.0
    w = lambert_w(rho * math.e)
    lc = params.lam_C
    if lc < 1.0 and w < 1.0 - lc:
        raise DomainError(
            f"team maximiser leaves [0, 1] for lam*C={lc!r} < 1 and rho={rho!r}")
    p_m = min(1.0, (1.0 - w) / lc)
    u_max = team_utility(p_m, rho, params)
    closed = team_optimizer_closed_form(rho, params)
    if abs(closed - u_max) > 1e-9 * max(1.0, abs(u_max)):
        log.warning("team utility closed form %.17g differs from direct value %.17g",
                    closed, u_max)
    return p_m, u_max


def poa(rho, params):
    """Price of Anarchy of the goodput game at price factor ``rho``.

    The ratio of the best team utility to the spatial utility ``lam U(p*, p*)``
    at equilibrium. Once ``rho >= exp(-lam C)`` the equilibrium utility is
    zero and the PoA is ``math.inf``.
    """
    _check_rho(rho)
    p_m = _team_argmax(rho, params)
    u_team = team_utility(p_m, rho, params)
    eq = sne(rho, params)
    u_eq = params.lam * eq.utility_at_eq
    if rho >= math.exp(-params.lam_C) or u_eq <= 0.0:
        value = math.inf
    else:
        value = u_team / u_eq
    return PoAReport(rho=rho, metric=Metric.GOODPUT, team_optimum=u_team,
                     worst_equilibrium=u_eq, value=value, p_team=p_m,
                     p_worst=eq.p_star)


def check_pricing(params):
    """Return ``(rho*, equilibrium density, team density)`` for diagnostics."""
    rho = optimal_price(params)
    d_eq = params.lam * equilibrium_goodput(rho, params)
    d_team, _ = team_densities(params)
    return rho, d_eq, d_team


def best_deviation_gain(p_star, rho, params, n_grid=10_001):
    """Largest gain available to a unilateral deviator on a ``q``-grid."""
    q = np.linspace(0.0, 1.0, n_grid)
    gains = q * (math.exp(-p_star * params.lam_C) - rho)
    return float(gains.max() - utility(p_star, p_star, rho, params))

