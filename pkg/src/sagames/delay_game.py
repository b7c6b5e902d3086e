"""Medium-access game with potential-delay utility and energy pricing.

A tagged node using ``q`` against a population using ``p`` pays its
potential delay ``exp(p lam C) / q`` plus the energy price ``rho q``:

    U(q, p) = -exp(p lam C) / q - rho q

The best response is ``min(1, exp(p lam Cb) / sqrt(rho))`` with
``Cb = C / 2``, so interior equilibria solve
``p = exp(p lam Cb) / sqrt(rho)``, that is
``p* = -W(-lam Cb / sqrt(rho)) / (lam Cb)`` on either real Lambert branch.

Thresholds (``x = lam Cb``):

* ``rho_t = (e x)^2``: below it no interior equilibrium exists;
* ``rho_boundary = exp(2 x)``: the price at which the fixed point reaches
  ``p = 1``. It is called ``rho_0`` when ``x < 1`` (principal branch) and
  ``rho_-1`` when ``x >= 1`` (lower branch).
"""
from dataclasses import dataclass
import enum
import math

from scipy import optimize

from .errors import DomainError, ParameterError
from .lambertw import Branch, lambert_w
from .model import team_densities
from .results import EqBranch, Equilibrium, Metric, PoAReport

__all__ = [
    "Regime",
    "DelayThresholds",
    "utility",
    "best_response",
    "thresholds",
    "regime_label",
    "sne_all",
    "stability",
    "equilibrium_delay",
    "optimal_price",
    "h_objective",
    "bad_equilibrium_penalty",
    "team_utility",
    "team_optimizer",
    "poa_chain",
    "poa",
]

# Relative slack used to decide that a price sits exactly on a threshold.
_RHO_RTOL = 1e-12
# Best-response slopes this close to 1 are treated as marginal (unstable).
_SLOPE_TOL = 1e-7


class Regime(enum.Enum):
    SMALL_CONTENTION = "small_contention"
    LARGE_CONTENTION = "large_contention"


@dataclass(frozen=True)
class DelayThresholds:
    rho_t: float
    rho_boundary: float
    regime: Regime


def _check_rho(rho):
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainError(f"price factor must be positive and finite, got {rho!r}")


def _check_map(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p!r}")


def _lc_bar(params):
    return params.lam * params.C_bar


def _close(a, b):
    return abs(a - b) <= _RHO_RTOL * max(abs(a), abs(b))


def utility(p_tag, p, rho, params):
    """Per-node utility ``-exp(p lam C) / p_tag - rho p_tag``."""
    _check_map(p_tag, "p_tag")
    _check_map(p)
    if rho < 0.0:
        raise ParameterError(f"price factor must be >= 0, got {rho!r}")
    if p_tag == 0.0:
        raise DomainError("delay utility is -inf for a node that never transmits")
    return -math.exp(p * params.lam_C) / p_tag - rho * p_tag


def best_response(p, rho, params):
    """Utility-maximising access probability against a population at ``p``."""
    _check_map(p)
    if rho == 0.0:
        raise DomainError("best response is unbounded at rho = 0")
    _check_rho(rho)
    return min(1.0, math.exp(p * _lc_bar(params)) / math.sqrt(rho))


def thresholds(params):
    """Price thresholds ``rho_t`` and ``rho_boundary`` and the contention regime."""
    x = _lc_bar(params)
    regime = Regime.SMALL_CONTENTION if x < 1.0 else Regime.LARGE_CONTENTION
    return DelayThresholds(rho_t=(math.e * x) ** 2, rho_boundary=math.exp(2.0 * x),
                           regime=regime)


def regime_label(rho, params):
    """Label of the equilibrium regime: ``unique_p1``, ``two_sne`` or ``unique_W0``."""
    _check_rho(rho)
    th = thresholds(params)
    if th.regime is Regime.SMALL_CONTENTION:
        return "unique_p1" if rho <= th.rho_boundary else "unique_W0"
    if rho < th.rho_t and not _close(rho, th.rho_t):
        return "unique_p1"
    if rho <= th.rho_boundary or _close(rho, th.rho_boundary):
        return "two_sne"
    return "unique_W0"


def _lambert_map(rho, params, branch):
    x = _lc_bar(params)
    return -lambert_w(-x / math.sqrt(rho), branch) / x


def _equilibrium(p_star, branch, rho, params):
    p_star = min(1.0, p_star)
    eq = Equilibrium(p_star=p_star, branch=branch, stable=False,
                     utility_at_eq=utility(p_star, p_star, rho, params), rho=rho)
    return Equilibrium(p_star=p_star, branch=branch, stable=stability(eq, params),
                       utility_at_eq=eq.utility_at_eq, rho=rho)


def sne_all(rho, params, include_boundary=False):
    """All symmetric Nash equilibria for price factor ``rho``.

    Regimes:

    * ``lam Cb < 1``: ``p* = 1`` for ``rho <= rho_0``, else the principal
      Lambert solution.
    * ``lam Cb >= 1``: ``p* = 1`` for ``rho < rho_t``; both Lambert
      solutions for ``rho_t <= rho <= rho_-1`` (merged into one at
      ``rho_t``); the principal solution for ``rho > rho_-1``.

    Equilibria are ordered by increasing ``p*``.

    Parameters
    ----------
    include_boundary : bool, optional
        For ``lam Cb >= 1`` and ``rho_t < rho < rho_-1`` the corner
        ``p = 1`` is also a fixed point of the clamped best response
        (``exp(lam Cb) / sqrt(rho) > 1`` there) though no Lambert solution
        produces it. Set this to add it to the result.
    """
    _check_rho(rho)
    th = thresholds(params)
    x = _lc_bar(params)

    if th.regime is Regime.SMALL_CONTENTION:
        if rho <= th.rho_boundary and not _close(rho, th.rho_boundary):
            return [_equilibrium(1.0, EqBranch.BOUNDARY1, rho, params)]
        return [_equilibrium(_lambert_map(rho, params, Branch.PRINCIPAL),
                             EqBranch.LAMBERT_PRINCIPAL, rho, params)]

    if _close(rho, th.rho_t):
        return [_equilibrium(1.0 / x, EqBranch.LAMBERT_PRINCIPAL, rho, params)]
    if rho < th.rho_t:
        return [_equilibrium(1.0, EqBranch.BOUNDARY1, rho, params)]
    low = _equilibrium(_lambert_map(rho, params, Branch.PRINCIPAL),
                       EqBranch.LAMBERT_PRINCIPAL, rho, params)
    if _close(rho, th.rho_boundary):
        return [low, _equilibrium(1.0, EqBranch.LAMBERT_MINUS1, rho, params)]
    if rho < th.rho_boundary:
        out = [low, _equilibrium(_lambert_map(rho, params, Branch.MINUS1),
                                 EqBranch.LAMBERT_MINUS1, rho, params)]
        if include_boundary:
            out.append(_equilibrium(1.0, EqBranch.BOUNDARY1, rho, params))
        return out
    return [low]


def stability(eq, params):
    """Whether ``eq`` is stable under best-response dynamics.

    An interior fixed point is stable when the best-response slope
    ``lam Cb p*`` is below one. The corner ``p* = 1`` is stable when the
    unconstrained best response exceeds one, so the clamp holds on a
    neighbourhood; if it equals one the slope decides.
    """
    x = _lc_bar(params)
    slope = x * eq.p_star
    if eq.p_star >= 1.0:
        unclamped = math.exp(x) / math.sqrt(eq.rho)
        if unclamped > 1.0 + _RHO_RTOL:
            return True
    return slope < 1.0 - _SLOPE_TOL


def _hosted_w(rho, branch, params):
    branch = Branch(branch) if not isinstance(branch, Branch) else branch
    _check_rho(rho)
    x = _lc_bar(params)
    th = thresholds(params)
    if rho < th.rho_t and not _close(rho, th.rho_t):
        raise DomainError(f"no Lambert equilibrium for rho={rho!r} < rho_t={th.rho_t!r}")
    if branch is Branch.MINUS1 and x < 1.0:
        raise DomainError("the lower branch hosts no equilibrium when lam*C_bar < 1")
    arg = -x / math.sqrt(rho)
    if abs(arg + math.exp(-1.0)) <= 1e-15 or _close(rho, th.rho_t):
        w = -1.0
    else:
        w = lambert_w(arg, branch)
    if -w > x * (1.0 + 1e-12):
        raise DomainError(
            f"{branch.name} solution p={-w / x!r} exceeds 1 at rho={rho!r}")
    return w


def equilibrium_delay(rho, branch, params):
    """Potential delay ``-rho W(-lam Cb / sqrt(rho)) / (lam Cb)`` at equilibrium."""
    w = _hosted_w(rho, branch, params)
    return -rho * w / _lc_bar(params)


def optimal_price(params):
    """Price factor minimising the equilibrium spatial delay density.

    Returns
    -------
    rho_star, d_t_eq : float
        For ``lam C > 1``: ``rho* = 4 e (lam Cb)^2`` and
        ``d_t = lam^2 e C``. Otherwise ``rho* = exp(lam C)``, where the
        equilibrium is ``p* = 1``, and ``d_t = lam exp(lam C)``.
    """
    x = _lc_bar(params)
    if params.lam_C > 1.0:
        rho = 4.0 * math.e * x * x
    else:
        rho = math.exp(2.0 * x)
    return rho, params.lam * equilibrium_delay(rho, Branch.PRINCIPAL, params)


def h_objective(rho, branch, params):
    """``h(rho) = -rho W(-lam Cb / sqrt(rho))``, defined for ``sqrt(rho) >= e lam Cb``."""
    branch = Branch(branch) if not isinstance(branch, Branch) else branch
    _check_rho(rho)
    th = thresholds(params)
    if rho < th.rho_t and not _close(rho, th.rho_t):
        raise DomainError(f"h is defined for rho >= {th.rho_t!r}, got {rho!r}")
    if _close(rho, th.rho_t):
        return rho
    return -rho * lambert_w(-_lc_bar(params) / math.sqrt(rho), branch)


def bad_equilibrium_penalty(params):
    """Delay-density penalty of the best lower-branch equilibrium.

    The lower-branch objective is smallest at ``rho = rho_t`` with
    equilibrium ``1 / (lam Cb)``; its delay density divided by the global
    optimum ``lam^2 e C`` equals ``e / 2``.
    """
    x = _lc_bar(params)
    if not x > 1.0:
        raise DomainError(f"penalty defined for lam*C_bar > 1, got {x!r}")
    rho_t = thresholds(params).rho_t
    density = params.lam * h_objective(rho_t, Branch.MINUS1, params) / x
    _, d_t = team_densities(params)
    return density / d_t


def team_utility(p, rho, params):
    """Social utility ``-lam / (p exp(-p lam C)) - lam rho p``."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"team utility needs p in (0, 1], got {p!r}")
    return -params.lam * math.exp(p * params.lam_C) / p - params.lam * rho * p


def team_optimizer(rho, params):
    """Social optimum ``p_m`` solving ``exp(p lam C) (1 - p lam C) = rho p^2``.

    The root is unique in ``(0, 1 / (lam C))`` and is bracketed there.
    Requires ``lam C > 1`` so that ``p_m < 1``.
    """
    _check_rho(rho)
    lc = params.lam_C
    if not lc > 1.0:
        raise DomainError(f"delay team optimiser requires lam*C > 1, got {lc!r}")

    def f(p):
        return math.exp(p * lc) * (1.0 - p * lc) - rho * p * p

    hi = 1.0 / lc
    return optimize.brentq(f, 0.0, hi, xtol=1e-15, maxiter=200)


def poa_chain(p_m, minus_w, params):
    """``p_m lam Cb (2 - p_m lam C) / (2 (-W) (1 - p_m lam C))``.

    Closed form of the PoA once the team optimality condition has been used
    to eliminate the exponential; ``minus_w`` is ``-W`` at the equilibrium.
    """
    lc = params.lam_C
    return p_m * _lc_bar(params) * (2.0 - p_m * lc) / (2.0 * minus_w * (1.0 - p_m * lc))


def poa(rho, params, include_boundary=False):
    """Price of Anarchy of the delay game at price factor ``rho``.

    ``value = U_team(p_m) / (lam U(p*, p*))`` at the worst equilibrium
    (smallest ``lam U``). Both utilities are negative, so the value lies in
    ``(0, 1]`` and equals the ratio of the optimal to the equilibrium cost;
    ``1 / value`` is the cost inflation caused by selfishness.

    Bounds are attached for ``rho >= rho_t``:

    * ``rho_t <= rho <= rho_-1``: the chain evaluated at ``rho_-1``
      (``-W = lam Cb``) and at ``rho_t`` (``-W = 1``);
    * ``rho > rho_-1``: ``p_m / p*_0 <= PoA <= 1``.
    """
    _check_rho(rho)
    lc = params.lam_C
    if not lc > 1.0:
        raise DomainError(f"delay PoA requires lam*C > 1, got {lc!r}")
    th = thresholds(params)
    x = _lc_bar(params)

    p_m = team_optimizer(rho, params)
    u_team = team_utility(p_m, rho, params)
    eqs = sne_all(rho, params, include_boundary=include_boundary)
    worst = min(eqs, key=lambda e: e.utility_at_eq)
    u_eq = params.lam * worst.utility_at_eq
    value = u_team / u_eq

    lower = upper = None
    notes = []
    regime = regime_label(rho, params)
    if regime == "two_sne":
        pm_hi = team_optimizer(th.rho_boundary, params)
        pm_lo = team_optimizer(th.rho_t, params)
        lower = poa_chain(pm_hi, x, params)
        upper = poa_chain(pm_lo, 1.0, params)
        bare_lam = pm_hi * params.lam * (2.0 - pm_hi * lc) / (2.0 * (1.0 - pm_hi * lc))
        if abs(bare_lam - lower) > 1e-12 * abs(lower):
            notes.append(f"lower bound with a bare lam factor ({bare_lam:.17g}) differs from the chain value")
    elif regime == "unique_W0":
        lower = p_m / worst.p_star
        upper = 1.0
    bounds_hold = None
    if lower is not None:
        slack = 1e-9 * max(1.0, abs(value))
        bounds_hold = lower - slack <= value <= upper + slack
    return PoAReport(rho=rho, metric=Metric.DELAY, team_optimum=u_team,
                     worst_equilibrium=u_eq, value=value, p_team=p_m,
                     p_worst=worst.p_star, lower_bound=lower, upper_bound=upper,
                     bounds_hold=bounds_hold, notes=tuple(notes))

