"""Monte Carlo simulation of the Poisson bipolar network under slotted Aloha.

Each snapshot places the tagged receiver at the origin and its transmitter
at distance ``r``; by Slivnyak's theorem the other transmitters that are
active in the slot form a Poisson process of intensity ``p lam``. They are
generated in order of distance: if ``G_1 < G_2 < ...`` are the arrival
times of a unit-rate Poisson process, ``|X_k| = sqrt(G_k / (pi p lam))``.
This makes the set of simulated interferers nested in the window radius,
so enlarging the window only appends far-away points.

Interferers inside the window are simulated explicitly. The ones outside
it (or beyond the per-snapshot point budget) are accounted for exactly in
law: under Rayleigh fading, the success event factorises as
``{F_0 > T (I_near + noise)} and {U < L_far}`` where ``L_far`` is the Laplace
transform of the interference from the unsimulated annulus and ``U`` is an
independent uniform. Setting ``far_field=False`` drops that factor and
truncates the plane instead.

Random streams are Philox generators keyed by ``(seed, stream, chunk[, slot])``
so results do not depend on execution order.
"""
from dataclasses import dataclass, replace
import math
from typing import Optional
import warnings

import numpy as np
from scipy import special

from .errors import CensoringWarning, DomainError, ParameterError
from .model import spatial_contention

__all__ = [
    "SimConfig",
    "SimEstimate",
    "truncation_radius",
    "far_field_exponent",
    "estimate_coverage",
    "estimate_tagged_goodput",
    "simulate_local_delay_slots",
    "estimate_local_delay",
    "coverage_z_score",
]

_COVERAGE_STREAM = 0
_DELAY_STREAM = 1


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes
    ----------
    n_samples : int
        Independent snapshots (coverage) or replications (local delay).
    seed : int
        Root seed.
    window_radius : float or None
        Radius of the explicitly simulated disk around the tagged receiver.
        ``None`` selects :func:`truncation_radius` with ``bias_tol``.
    max_slots : int
        Cap on the number of slots per local-delay replication.
    bias_tol : float
        Coverage bias allowed by the automatic window when the far field is
        dropped.
    far_field : bool
        Apply the exact far-field factor beyond the simulated interferers.
    max_points : int
        Per-snapshot budget of explicitly simulated interferers.
    chunk_size : int
        Snapshots per random stream.
    """

    n_samples: int = 100_000
    seed: int = 0
    window_radius: Optional[float] = None
    max_slots: int = 1000
    bias_tol: float = 1e-3
    far_field: bool = True
    max_points: int = 512
    chunk_size: int = 4096

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError("n_samples must be >= 1")
        if self.max_slots < 1:
            raise ParameterError("max_slots must be >= 1")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ParameterError("window_radius must be positive")
        if not 0.0 < self.bias_tol < 1.0:
            raise ParameterError("bias_tol must lie in (0, 1)")
        if self.max_points < 1 or self.chunk_size < 1:
            raise ParameterError("max_points and chunk_size must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    value: float
    std_error: float
    n: int
    seed: int
    window_radius: float = math.inf
    censored_fraction: float = 0.0
    budget_fraction: float = 0.0

    def z_score(self, expected):
        """Standardised distance from ``expected`` (0 when both agree exactly)."""
        diff = self.value - expected
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def coverage_z_score(est, expected):
    """Binomial z-score of a coverage estimate under ``expected``.

    Uses the null standard error ``sqrt(q (1 - q) / n)`` so that a tiny
    coverage with zero observed successes is not flagged spuriously.
    """
    var = expected * (1.0 - expected) / est.n
    if var <= 0.0:
        return est.z_score(expected)
    return (est.value - expected) / math.sqrt(var)


def truncation_radius(params, p, bias_tol=1e-3):
    """Window radius whose truncation changes coverage by less than ``bias_tol``.

    The Laplace exponent of the interference outside radius ``R`` is at most
    ``2 pi p lam T r^beta R^(2-beta) / (beta - 2)``; the radius returned
    keeps it below ``-log(1 - bias_tol)``. The result is never smaller than
    ``r``. With ``p = 0`` there are no interferers and ``10 r`` is returned.
    """
    if not bias_tol > 0.0:
        raise DomainError("bias_tol must be positive")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return 10.0 * params.r
    if bias_tol >= 1.0:
        return params.r
    eps = -math.log1p(-bias_tol)
    b = params.beta
    log_rad = (math.log(2.0 * math.pi * p * params.lam * params.T / ((b - 2.0) * eps))
               + b * math.log(params.r)) / (b - 2.0)
    return max(params.r, math.exp(log_rad))


def _tail_integral(v, beta):
    # int_v^inf t / (1 + t^beta) dt, vectorised over v >= 0
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    big = v > 1.0
    vb = v[big]
    d = 2.0 / beta
    out[big] = vb ** (2.0 - beta) / (beta - 2.0) * special.hyp2f1(
        1.0, 1.0 - d, 2.0 - d, -vb ** (-beta))
    vs = v[~big]
    out[~big] = spatial_contention(beta) - 0.5 * vs ** 2 * special.hyp2f1(
        1.0, d, 1.0 + d, -vs ** beta)
    out[np.isinf(v)] = 0.0
    return out


def far_field_exponent(params, p, radius):
    """Laplace exponent of the interference from transmitters beyond ``radius``.

    ``2 pi p lam int_R^inf u / (1 + (u/r)^beta / T) du``, vectorised in
    ``radius``. The coverage factor contributed by that region is
    ``exp(-far_field_exponent)``.
    """
    scale = params.r * params.T ** (1.0 / params.beta)
    radius = np.asarray(radius, dtype=float)
    return 2.0 * math.pi * p * params.lam * scale ** 2 * _tail_integral(
        radius / scale, params.beta)


def _generator(seed, *key):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _resolve_window(params, p, sim):
    if sim.window_radius is not None:
        return float(sim.window_radius)
    return truncation_radius(params, p, sim.bias_tol)


def _sample_success(gen, n, params, p, radius, sim):
    """Success indicators of ``n`` independent tagged transmissions.

    Returns the indicator array and the number of snapshots that ran out of
    the point budget before covering the window.
    """
    mu = params.mu
    beta = params.beta
    r = params.r
    fading0 = gen.exponential(1.0 / mu, n)
    uniform = gen.random(n)
    noise = params.w / (params.P * params.path_loss(r))
    interference = np.zeros(n)
    density = p * params.lam * math.pi
    if density == 0.0:
        return fading0 > params.T * noise, 0

    target = density * radius * radius
    gamma = np.zeros(n)
    active = np.ones(n, dtype=bool)
    drawn = 0
    block = 64
    while drawn < sim.max_points and active.any():
        width = min(block, sim.max_points - drawn)
        gaps = gen.exponential(1.0, (n, width))
        fading = gen.exponential(1.0 / mu, (n, width))
        arrivals = gamma[:, None] + np.cumsum(gaps, axis=1)
        inside = arrivals < target
        # (|X| / r)^-beta with |X|^2 = G / density
        gain = (arrivals / (density * r * r)) ** (-0.5 * beta)
        interference += np.where(inside, fading * gain, 0.0).sum(axis=1)
        gamma = arrivals[:, -1]
        active = gamma < target
        drawn += width

    short = int(active.sum())
    if short and not sim.far_field:
        warnings.warn(f"{short} snapshots exhausted the point budget of {sim.max_points} "
                      "inside the window; coverage is truncated there", RuntimeWarning)
    success = fading0 > params.T * (interference + noise)
    if sim.far_field:
        reach = np.where(active, np.sqrt(gamma / density), radius)
        success &= uniform < np.exp(-far_field_exponent(params, p, reach))
    return success, short


def _chunks(n, size):
    start = 0
    index = 0
    while start < n:
        stop = min(n, start + size)
        yield index, stop - start
        start = stop
        index += 1


def estimate_coverage(params, p, sim=SimConfig()):
    """Monte Carlo coverage probability of the tagged transmission.

    Parameters
    ----------
    params : NetworkParams
    p : float
        Access probability of all other nodes, in ``(0, 1]``.
    sim : SimConfig

    Returns
    -------
    SimEstimate
        Fraction of covered snapshots and its binomial standard error.
    """
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"p must lie in (0, 1], got {p!r}")
    radius = _resolve_window(params, p, sim)
    hits = 0
    short = 0
    for index, count in _chunks(sim.n_samples, sim.chunk_size):
        gen = _generator(sim.seed, _COVERAGE_STREAM, index)
        success, k = _sample_success(gen, count, params, p, radius, sim)
        hits += int(success.sum())
        short += k
    n = sim.n_samples
    value = hits / n
    se = math.sqrt(value * (1.0 - value) / (n - 1)) if n > 1 else 0.0
    return SimEstimate(value=value, std_error=se, n=n, seed=sim.seed,
                       window_radius=radius, budget_fraction=short / n)


def estimate_tagged_goodput(p_tag, p, params, sim=SimConfig()):
    """Goodput of a tagged node: ``p_tag`` times the simulated coverage."""
    if not 0.0 <= p_tag <= 1.0:
        raise ParameterError(f"p_tag must lie in [0, 1], got {p_tag!r}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    if p_tag == 0.0:
        return SimEstimate(value=0.0, std_error=0.0, n=sim.n_samples, seed=sim.seed)
    if p == 0.0:
        # No interferers; only noise can block the transmission.
        gen = _generator(sim.seed, _COVERAGE_STREAM, 0)
        success, _ = _sample_success(gen, sim.n_samples, params, 0.0, params.r, sim)
        value = success.mean()
        se = math.sqrt(value * (1 - value) / max(1, sim.n_samples - 1))
        return SimEstimate(value=p_tag * value, std_error=p_tag * se,
                           n=sim.n_samples, seed=sim.seed)
    cov = estimate_coverage(params, p, sim)
    return replace(cov, value=p_tag * cov.value, std_error=p_tag * cov.std_error)


def simulate_local_delay_slots(params, p, sim=SimConfig()):
    """Slots needed by each replication to deliver one packet.

    Every slot re-draws the interferer positions, fadings and access
    decisions, so the slot count is geometric with success probability
    ``g(p, p)``. Replications still unsuccessful after ``max_slots`` slots
    are censored: their count is ``max_slots`` and the second array flags
    them.
    """
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"p must lie in (0, 1], got {p!r}")
    radius = _resolve_window(params, p, sim)
    counts = np.full(sim.n_samples, sim.max_slots, dtype=np.int64)
    censored = np.ones(sim.n_samples, dtype=bool)
    offset = 0
    for index, size in _chunks(sim.n_samples, sim.chunk_size):
        pending = np.arange(size)
        for slot in range(1, sim.max_slots + 1):
            if pending.size == 0:
                break
            gen = _generator(sim.seed, _DELAY_STREAM, index, slot)
            transmits = gen.random(pending.size) < p
            covered, _ = _sample_success(gen, pending.size, params, p, radius, sim)
            done = transmits & covered
            rows = offset + pending[done]
            counts[rows] = slot
            censored[rows] = False
            pending = pending[~done]
        offset += size
    return counts, censored


def estimate_local_delay(params, p, sim=SimConfig(n_samples=10_000)):
    """Mean local delay in slots, with censoring diagnostics.

    Emits :class:`CensoringWarning` when more than 1% of the replications
    reach ``max_slots``.
    """
    counts, censored = simulate_local_delay_slots(params, p, sim)
    frac = float(censored.mean())
    if frac > 0.01:
        warnings.warn(f"{frac:.2%} of local-delay replications hit max_slots="
                      f"{sim.max_slots}", CensoringWarning)
    n = counts.size
    value = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SimEstimate(value=value, std_error=se, n=n, seed=sim.seed,
                       window_radius=_resolve_window(params, p, sim),
                       censored_fraction=frac)
