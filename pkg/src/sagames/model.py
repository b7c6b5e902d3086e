"""Poisson bipolar network model and closed-form team performance.

Transmitters form a planar Poisson process of intensity ``lam``; every
transmitter talks to a receiver at fixed distance ``r``. Channels use
Rayleigh fading with mean ``1/mu``, path loss ``(A d)^-beta`` and a
deterministic noise power ``w``. A transmission succeeds when its SINR
exceeds ``T``.

Everything the game modules need is condensed into the contention constant
``C = 2 pi r^2 T^(2/beta) K(beta)``: under slotted Aloha with access
probability ``p`` the coverage probability is ``exp(-p lam C)`` times a
noise factor.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
import math

from scipy import integrate

from .errors import DomainError, ParameterError, QuadratureError

__all__ = [
    "NetworkParams",
    "GameParams",
    "ModelConstants",
    "spatial_contention",
    "contention_constant",
    "goodput_integral",
    "goodput_typical",
    "goodput_tagged",
    "team_optimal_map",
    "team_densities",
]


def spatial_contention(beta):
    """Spatial contention kernel ``K(beta) = Gamma(2/b) Gamma(1-2/b) / b``.

    Evaluated through the reflection formula ``(pi/b) / sin(2 pi / b)``,
    which avoids the gamma function entirely.
    """
    beta = float(beta)
    if not beta > 2.0:
        raise DomainError(f"path-loss exponent must exceed 2, got {beta!r}")
    if math.isinf(beta):
        return 0.5
    return (math.pi / beta) / math.sin(2.0 * math.pi / beta)


@dataclass(frozen=True)
class ModelConstants:
    K_beta: float
    C: float
    C_bar: float


@lru_cache(maxsize=256)
def _constants(r, T, beta):
    k = spatial_contention(beta)
    c = 2.0 * math.pi * r * r * T ** (2.0 / beta) * k
    return ModelConstants(K_beta=k, C=c, C_bar=0.5 * c)


def _check_map(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p!r}")


@dataclass(frozen=True)
class NetworkParams:
    """Physical parameters of the Poisson bipolar network.

    Attributes
    ----------
    lam : float
        Transmitter intensity per unit area.
    r : float
        Transmitter-receiver distance.
    beta : float
        Path-loss exponent, ``beta > 2``.
    T : float
        SINR threshold.
    A : float
        Attenuation scale in ``l(d) = (A d)^-beta``.
    mu : float
        Rayleigh fading rate (mean fading ``1/mu``).
    P : float
        Transmit power.
    w : float
        Deterministic noise power, ``w >= 0``.
    """

    lam: float
    r: float = 1.0
    beta: float = 4.0
    T: float = 1.0
    A: float = 1.0
    mu: float = 1.0
    P: float = 1.0
    w: float = 0.0

    def __post_init__(self):
        for name in ("lam", "r", "T", "A", "mu", "P"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")
        if not (self.w >= 0.0 and math.isfinite(self.w)):
            raise ParameterError(f"w must be non-negative, got {self.w!r}")
        if not self.beta > 2.0:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.beta!r}")

    @cached_property
    def constants(self):
        return contention_constant(self)

    @property
    def C(self):
        return self.constants.C

    @property
    def C_bar(self):
        return self.constants.C_bar

    @property
    def lam_C(self):
        return self.lam * self.C

    def path_loss(self, d):
        return (self.A * d) ** (-self.beta)

    @property
    def noise_factor(self):
        """Laplace transform of the noise, ``exp(-mu T w / (P l(r)))``."""
        return math.exp(-self.mu * self.T * self.w / (self.P * self.path_loss(self.r)))


@dataclass(frozen=True)
class GameParams:
    """Reduced parameters ``(lam, C)`` for noiseless game analysis.

    The games depend on geometry only through ``lam`` and ``C``; this type
    lets callers set ``C`` directly instead of deriving it from
    ``(r, T, beta)``.
    """

    lam: float
    C: float

    def __post_init__(self):
        for name in ("lam", "C"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_network(cls, params):
        return cls(lam=params.lam, C=params.C)

    @property
    def C_bar(self):
        return 0.5 * self.C

    @property
    def lam_C(self):
        return self.lam * self.C

    noise_factor = 1.0


def contention_constant(params):
    """Return :class:`ModelConstants` for ``params``.

    Only ``r``, ``T`` and ``beta`` matter; results are cached by value.
    """
    return _constants(float(params.r), float(params.T), float(params.beta))


def _contention_integral(beta, epsrel=1e-10):
    # int_0^inf v / (1 + v^beta) dv, split at 1; the outer half is mapped
    # to [0, 1] by v -> 1/t and has an algebraic singularity t^(beta-3).
    head, err_head, info_head = integrate.quad(
        lambda v: v / (1.0 + v ** beta), 0.0, 1.0,
        epsabs=0.0, epsrel=epsrel, limit=200, full_output=1)[:3]
    tail, err_tail, info_tail = integrate.quad(
        lambda t: 1.0 / (1.0 + t ** beta), 0.0, 1.0,
        weight="alg", wvar=(beta - 3.0, 0.0),
        epsabs=0.0, epsrel=epsrel, limit=200, full_output=1)[:3]
    total = head + tail
    if not math.isfinite(total) or err_head + err_tail > 10 * epsrel * abs(total):
        raise QuadratureError(
            f"contention integral did not converge (beta={beta}, "
            f"error estimate {err_head + err_tail:.3g})")
    return total


def goodput_integral(p, params, epsrel=1e-10):
    """Goodput of a typical node from the Laplace-functional integral.

    Computes ``p exp(-2 pi lam p I) psi_W(mu T / (P l(r)))`` with
    ``I = int_0^inf u / (1 + l(r) / (T l(u))) du`` evaluated by adaptive
    quadrature. After the substitution ``u = r T^(1/beta) v`` the integral
    becomes ``r^2 T^(2/beta) int_0^inf v / (1 + v^beta) dv``.

    This path is deliberately independent of the closed form in
    :func:`goodput_typical`; the two must agree.
    """
    _check_map(p)
    if p == 0.0:
        return 0.0
    scale = params.r ** 2 * params.T ** (2.0 / params.beta)
    integral = scale * _contention_integral(params.beta, epsrel)
    return p * math.exp(-2.0 * math.pi * params.lam * p * integral) * params.noise_factor


def goodput_typical(p, params):
    """Closed-form goodput ``p exp(-p lam C)`` times the noise factor."""
    _check_map(p)
    return p * math.exp(-p * params.lam * params.C) * params.noise_factor


def goodput_tagged(p_tag, p, params):
    """Goodput of a node using ``p_tag`` while all others use ``p``."""
    _check_map(p_tag, "p_tag")
    _check_map(p)
    return p_tag * math.exp(-p * params.lam * params.C) * params.noise_factor


def team_optimal_map(params):
    """Access probability maximising the density of success, ``min(1, 1/(lam C))``."""
    return min(1.0, 1.0 / params.lam_C)


def team_densities(params):
    """Optimal density of success and spatial delay density.

    Returns
    -------
    d_s, d_t : float
        ``lam g(p_m)`` and ``lam / g(p_m)`` at the team optimum. Without
        noise these are ``1/(e C)`` and ``lam^2 e C`` when ``lam C > 1``,
        and ``lam exp(-lam C)`` and ``lam exp(lam C)`` otherwise.
    """
    g = goodput_typical(team_optimal_map(params), params)
    return params.lam * g, params.lam / g
