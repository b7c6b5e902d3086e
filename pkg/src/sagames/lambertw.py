"""Real Lambert W function on the principal and lower branches.

``W(x)`` solves ``W * exp(W) = x``. On ``[-1/e, 0)`` there are two real
solutions: the principal branch ``W_0 >= -1`` and the lower branch
``W_{-1} <= -1``. Both meet at ``x = -1/e`` where they equal ``-1``.

Values are obtained by Halley iteration started from branch-specific
asymptotic expansions, so at most a handful of steps are needed.
"""
import enum
import math

from .errors import DomainError

__all__ = ["Branch", "lambert_w", "lambert_w_prime", "BRANCH_POINT"]

BRANCH_POINT = -math.exp(-1.0)

# Arguments this close to -1/e are treated as the branch point itself.
_BRANCH_SLACK = 1e-15
_STEP_TOL = 1e-14
_MAX_ITER = 50


class Branch(enum.Enum):
    PRINCIPAL = 0
    MINUS1 = -1


def _as_branch(branch):
    if isinstance(branch, Branch):
        return branch
    return Branch(branch)


def _initial_principal(x):
    if x < -0.25:
        q = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        return -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q ** 3
    if x < 0.5:
        return x * (1.0 - x + 1.5 * x * x)
    if x < 3.0:
        return 0.5 * math.log1p(x) + 0.2
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def _initial_minus1(x):
    if x < -0.25:
        q = -math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        return -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q ** 3
    l1 = math.log(-x)
    l2 = math.log(-l1)
    return l1 - l2 + l2 / l1


def _halley(w, x):
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= _STEP_TOL * (1.0 + abs(w)):
            break
    return w


def lambert_w(x, branch=Branch.PRINCIPAL):
    """Evaluate the real Lambert W function.

    Parameters
    ----------
    x : float
        Argument, ``x >= -1/e``. The lower branch additionally requires
        ``x < 0``.
    branch : Branch or int, optional
        ``Branch.PRINCIPAL`` (0, default) or ``Branch.MINUS1`` (-1).

    Returns
    -------
    float
        ``w`` with ``w * exp(w) == x``; ``w >= -1`` on the principal branch
        and ``w <= -1`` on the lower one.

    Raises
    ------
    DomainError
        If ``x < -1/e`` (beyond a 1e-15 slack), or if ``x >= 0`` on the
        lower branch.
    """
    branch = _as_branch(branch)
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w of NaN")
    if x < BRANCH_POINT - _BRANCH_SLACK:
        raise DomainError(f"lambert_w undefined for x={x!r} < -1/e")
    if abs(x - BRANCH_POINT) <= _BRANCH_SLACK:
        return -1.0
    if branch is Branch.PRINCIPAL:
        if x == 0.0:
            return 0.0
        if math.isinf(x):
            return math.inf
        return _halley(_initial_principal(x), x)
    if x >= 0.0:
        raise DomainError(f"lower branch requires x < 0, got {x!r}")
    return _halley(_initial_minus1(x), x)


def lambert_w_prime(x, branch=Branch.PRINCIPAL):
    """Derivative ``W'(x) = W(x) / (x (1 + W(x)))``.

    Singular at ``x = 0`` and at the branch point ``x = -1/e``; both raise
    :class:`DomainError`.
    """
    x = float(x)
    if x == 0.0 or abs(x - BRANCH_POINT) <= _BRANCH_SLACK:
        raise DomainError(f"lambert_w_prime is singular at x={x!r}")
    w = lambert_w(x, branch)
    return w / (x * (1.0 + w))
