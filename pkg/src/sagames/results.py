"""Result containers shared by the two medium-access games."""
from dataclasses import dataclass, field
import enum
import math
from typing import Optional

import numpy as np

__all__ = ["EqBranch", "Equilibrium", "PoAReport", "Trajectory", "Metric"]


class Metric(enum.Enum):
    GOODPUT = "goodput"
    DELAY = "delay"

    @property
    def alpha(self):
        """Fairness exponent of the utility family: 0 for goodput, 2 for delay."""
        return 0 if self is Metric.GOODPUT else 2


class EqBranch(enum.Enum):
    BOUNDARY0 = "boundary0"
    BOUNDARY1 = "boundary1"
    INTERIOR = "interior"
    LAMBERT_PRINCIPAL = "lambert_principal"
    LAMBERT_MINUS1 = "lambert_minus1"


@dataclass(frozen=True)
class Equilibrium:
    """A symmetric Nash equilibrium access probability.

    ``rho`` is the price factor it was computed for; ``utility_at_eq`` is
    the per-node utility ``U(p*, p*)``.
    """

    p_star: float
    branch: EqBranch
    stable: bool
    utility_at_eq: float
    rho: float


@dataclass(frozen=True)
class PoAReport:
    """Price of Anarchy at one price factor.

    ``value`` is ``team_optimum / worst_equilibrium`` and is ``math.inf``
    when the worst equilibrium utility is not positive (goodput game).
    Bounds are ``None`` where no analytic bound applies.
    """

    rho: float
    metric: Metric
    team_optimum: float
    worst_equilibrium: float
    value: float
    p_team: float
    p_worst: float
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    bounds_hold: Optional[bool] = None
    notes: tuple = ()

    @property
    def infinite(self):
        return math.isinf(self.value)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    rho: float
    params: object
    target: float
    converged: bool
    tol: float = 1e-6
    extra: dict = field(default_factory=dict)

    @property
    def final(self):
        return float(self.states[-1])
