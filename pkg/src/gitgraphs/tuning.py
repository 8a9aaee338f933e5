"""Parameter tuning for the labeled-main (Boltzmann) distribution.

The mixed generating function has the closed form

    G(z, u) = (1 - u z^2 / (1-z)) ** (-(1-z)/z)

whose dominant singularity in z is ``rho(u) = (sqrt(1+4u) - 1) / (2u)``,
the root of ``u z^2 = 1 - z``. Everything here is double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

# requests closer than this to the singularity are refused
SINGULARITY_MARGIN = 1e-12


class OutsideDomain(ValueError):
    pass


def rho_of_u(u: float) -> float:
    if not u > 0:
        raise OutsideDomain(f"u must be positive, got {u}")
    # rationalised form of (sqrt(1+4u) - 1) / (2u), stable for small u
    return 2.0 / (math.sqrt(1.0 + 4.0 * u) + 1.0)


def u_of_rho(rho: float) -> float:
    if not 0 < rho < 1:
        raise OutsideDomain(f"rho must lie in (0, 1), got {rho}")
    return (1.0 - rho) / (rho * rho)


def u_of_alpha(alpha: float) -> float:
    """u whose asymptotic black-vertex ratio ``(1-rho)/(2-rho)`` is alpha."""
    if not 0 < alpha < 0.5:
        raise OutsideDomain(f"target ratio must lie in (0, 1/2), got {alpha}")
    return u_of_rho((1.0 - 2.0 * alpha) / (1.0 - alpha))


def _check(z: float, u: float) -> float:
    """Validate (z, u) and return the log-series parameter u z^2 / (1-z)."""
    if not 0 < z < 1:
        raise OutsideDomain(f"z must lie in (0, 1), got {z}")
    if not u > 0:
        raise OutsideDomain(f"u must be positive, got {u}")
    if z > (1.0 - SINGULARITY_MARGIN) * rho_of_u(u):
        raise OutsideDomain(f"z={z} is at or beyond the singularity rho(u)={rho_of_u(u)}")
    return u * z * z / (1.0 - z)


def log_gf(z: float, u: float) -> float:
    """``ln G(z, u)``; also the Poisson rate of the free-vertex count."""
    if z == 0:
        return 0.0
    p = _check(z, u)
    return -((1.0 - z) / z) * math.log1p(-p)


def dlog_gf(z: float, u: float) -> Tuple[float, float]:
    """Partial derivatives of :func:`log_gf` in z and in u."""
    p = _check(z, u)
    dp_dz = u * z * (2.0 - z) / (1.0 - z) ** 2
    d_z = math.log1p(-p) / (z * z) + ((1.0 - z) / z) * dp_dz / (1.0 - p)
    d_u = z / (1.0 - p)
    return d_z, d_u


def expected_size(z: float, u: float) -> float:
    if z == 0:
        return 0.0
    return z * dlog_gf(z, u)[0]


def expected_black(z: float, u: float) -> float:
    if z == 0:
        return 0.0
    return u * dlog_gf(z, u)[1]


def solve_z(n_target: float, u: float, rtol: float = 1e-9) -> float:
    """z in (0, rho(u)) with ``expected_size(z, u) == n_target``, by bisection."""
    if not n_target > 0:
        raise ValueError(f"target size must be positive, got {n_target}")
    lo, hi = 0.0, (1.0 - SINGULARITY_MARGIN) * rho_of_u(u)
    if expected_size(hi, u) < n_target:
        raise OutsideDomain(f"target size {n_target} is not reachable in double precision")
    while True:
        mid = 0.5 * (lo + hi)
        e = expected_size(mid, u)
        if abs(e - n_target) <= rtol * n_target or hi - lo <= 1e-17:
            return mid
        if e < n_target:
            lo = mid
        else:
            hi = mid


def asymptotic_moments(u: float, n: float) -> Tuple[float, float]:
    """Leading-order mean and variance of k for graphs of size n."""
    rho = rho_of_u(u)
    mean = n * (1.0 - rho) / (2.0 - rho)
    var = n * rho * (1.0 - rho) / (2.0 - rho) ** 3
    return mean, var


@dataclass(frozen=True)
class BoltzmannParams:
    z: float
    u: float

    def check(self) -> None:
        _check(self.z, self.u)

    @property
    def poisson_rate(self) -> float:
        return log_gf(self.z, self.u)

    @property
    def log_series_p(self) -> float:
        return _check(self.z, self.u)


@dataclass(frozen=True)
class TuningResult:
    alpha: float
    u: float
    rho: float
    z: float
    expected_size: float
    expected_black: float

    @property
    def params(self) -> BoltzmannParams:
        return BoltzmannParams(self.z, self.u)


def tune(alpha: float, size: float) -> TuningResult:
    """Boltzmann parameters targeting mean size *size* and black ratio *alpha*."""
    u = u_of_alpha(alpha)
    z = solve_z(size, u)
    return TuningResult(alpha, u, rho_of_u(u), z, expected_size(z, u), expected_black(z, u))
