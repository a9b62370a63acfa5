"""Closed-form diffusion kernels and Poisson detection statistics.

All functions work in SI base units (meters, seconds, counts).  They accept
scalars or numpy arrays in the time/mean arguments and broadcast like numpy
ufuncs; scalar inputs give scalar outputs.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "point_source_concentration",
    "observation_probability",
    "self_observation_probability",
    "poisson_cdf_below",
    "poisson_cdf_below_array",
]

# below this erf argument the two terms of the self-observation closed form
# cancel to O(x^3); switch to the series expansion
_SELF_SERIES_CUTOFF = 0.01

# direct term summation above this many terms would be slower than the
# incomplete-gamma route with no accuracy gain
_POISSON_SUM_LIMIT = 10_000

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _check_time(t) -> None:
    if np.any(np.asarray(t) <= 0.0):
        raise ValueError(f"time must be positive, got {t}")


def point_source_concentration(n_a: float, diffusion: float, dist, t):
    """Concentration (molecules/m^3) at distance ``dist`` and time ``t``
    after an impulsive release of ``n_a`` molecules at the origin.

    Gaussian free-diffusion kernel: n_a * (4 pi D t)^(-3/2) * exp(-dist^2 / (4 D t)).
    Far-field values underflow to 0.0 rather than raising.
    """
    if diffusion <= 0.0:
        raise ValueError(f"diffusion coefficient must be positive, got {diffusion}")
    if n_a < 0:
        raise ValueError(f"molecule count must be nonnegative, got {n_a}")
    _check_time(t)
    t = np.asarray(t, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    if np.any(dist < 0.0):
        raise ValueError("distance must be nonnegative")
    four_dt = 4.0 * diffusion * t
    with np.errstate(under="ignore"):
        out = n_a * (np.pi * four_dt) ** -1.5 * np.exp(-(dist**2) / four_dt)
    return out if out.ndim else float(out)


def observation_probability(volume: float, diffusion: float, dist, t):
    """Probability that one molecule released at the origin at t = 0 sits
    inside an observer of volume ``volume`` centered at distance ``dist``,
    under the uniform-concentration approximation (value = center
    concentration times volume), clamped to [0, 1].

    The approximation needs ``dist`` of at least a few observer radii; this
    is not enforced, the self-link case is handled exactly by
    :func:`self_observation_probability`.
    """
    if volume <= 0.0:
        raise ValueError(f"observer volume must be positive, got {volume}")
    raw = volume * point_source_concentration(1.0, diffusion, dist, t)
    clipped = np.clip(raw, 0.0, 1.0)
    return clipped if isinstance(raw, np.ndarray) else float(clipped)


def _self_obs_series(x):
    # erf(x) - (2/sqrt(pi)) x exp(-x^2) expanded around 0; terms through x^9
    # leave relative truncation error < 1e-16 for x < 0.01
    x2 = x * x
    return _TWO_OVER_SQRT_PI * (
        x2 * x * (2.0 / 3.0 + x2 * (-0.4 + x2 * (1.0 / 7.0 + x2 * (-1.0 / 27.0))))
    )


def self_observation_probability(radius: float, diffusion: float, t):
    """Probability that a molecule released at the center of a sphere of
    ``radius`` is still inside the sphere at time ``t``.

    Exact integral of the Gaussian kernel over the sphere:
    erf(x) - (2/sqrt(pi)) x exp(-x^2) with x = radius / (2 sqrt(D t)).
    A series expansion takes over for small x where the closed form loses
    digits to cancellation.
    """
    if radius <= 0.0:
        raise ValueError(f"observer radius must be positive, got {radius}")
    if diffusion <= 0.0:
        raise ValueError(f"diffusion coefficient must be positive, got {diffusion}")
    _check_time(t)
    t_arr = np.asarray(t, dtype=np.float64)
    x = radius / (2.0 * np.sqrt(diffusion * t_arr))
    closed = special.erf(x) - _TWO_OVER_SQRT_PI * x * np.exp(-(x * x))
    out = np.where(x < _SELF_SERIES_CUTOFF, _self_obs_series(x), closed)
    out = np.clip(out, 0.0, 1.0)
    return out if t_arr.ndim else float(out)


def poisson_cdf_below(mean: float, xi: float) -> float:
    """Pr(count < xi) for a Poisson variable with the given mean.

    Counts are integers, so Pr(count < xi) = Pr(count <= ceil(xi) - 1); the
    threshold xi itself may be any real (adaptive thresholds are not
    integers).  xi <= 0 gives 0; mean = 0 gives 1 for any positive xi.

    Terms are accumulated in log space through the recurrence
    term_{w+1} = term_w * mean / (w + 1); beyond 10^4 terms the regularized
    upper incomplete gamma function is used instead.  Stable for means well
    above 10^5.
    """
    if mean < 0.0:
        raise ValueError(f"mean must be nonnegative, got {mean}")
    if not math.isfinite(mean):
        raise ValueError(f"mean must be finite, got {mean}")
    k = math.ceil(xi)
    if k <= 0:
        return 0.0
    if mean == 0.0:
        return 1.0
    if k > _POISSON_SUM_LIMIT:
        return float(special.gammaincc(k, mean))
    # log-space accumulation of sum_{w=0}^{k-1} e^-mean mean^w / w!
    log_mean = math.log(mean)
    log_term = -mean
    log_sum = log_term
    for w in range(1, k):
        log_term += log_mean - math.log(w)
        log_sum = np.logaddexp(log_sum, log_term)
    return float(min(1.0, math.exp(log_sum)))


def poisson_cdf_below_array(mean, xi):
    """Vectorized :func:`poisson_cdf_below` for the analytics hot path.

    Same contract, evaluated as the regularized upper incomplete gamma
    Q(ceil(xi), mean); broadcasting applies across both arguments.  Agrees
    with the scalar routine to full precision (cross-checked in tests).
    """
    mean = np.asarray(mean, dtype=np.float64)
    if np.any(mean < 0.0):
        raise ValueError("mean must be nonnegative")
    k = np.ceil(np.asarray(xi, dtype=np.float64))
    # gammaincc(k, 0) = 1 covers the mean = 0 case; k is clamped before the
    # call so the xi <= 0 branch never feeds an invalid shape parameter
    return np.where(k > 0.0, special.gammaincc(np.maximum(k, 1.0), mean), 0.0)
