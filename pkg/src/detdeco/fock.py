"""Truncated Fock-space numerics.

Wigner functions use the displaced-parity convention: the number projector
``|l><l|`` has the radial profile

    W_l(r) = (2/pi) (-1)^l exp(-2 r^2) L_l(4 r^2),

where ``r = |alpha|`` and ``L_l`` is the Laguerre polynomial. Under this
convention a normalized state integrates to one over the plane and the
identity operator has the constant value ``1/pi``.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import DomainError, TruncationWarning

WIGNER_CONVENTION = "displaced-parity: W_l(r)=(2/pi)(-1)^l exp(-2r^2) L_l(4r^2); W_identity=1/pi"
IDENTITY_WIGNER = 1.0 / math.pi

DEFAULT_ANALYTIC_CUTOFF = 200
DEFAULT_FIT_CUTOFF = 60

# CVZ weights overflow beyond this many terms ((3 + sqrt 8)^n must fit a double)
_MAX_ACCEL_TERMS = 400
_TAIL_WARN = 1e-10
_TAIL_NEGLIGIBLE = 1e-13


def check_cutoff(L: int) -> int:
    if int(L) != L or L < 1:
        raise DomainError(f"Fock cutoff must be an integer >= 1, got {L!r}")
    return int(L)


def coherent_weights(mu: float, L: int) -> np.ndarray:
    """Poisson photon-number weights ``exp(-mu) mu^l / l!`` for ``l = 0..L``.

    The vector is not renormalized; see :func:`truncation_deficit`.
    """
    L = check_cutoff(L)
    if not np.isfinite(mu) or mu < 0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    return stats.poisson.pmf(np.arange(L + 1), mu)


def truncation_deficit(mu: float, L: int) -> float:
    """Poisson mass beyond the cutoff, ``1 - sum_{l<=L} p_l(mu)``."""
    L = check_cutoff(L)
    if not np.isfinite(mu) or mu < 0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    return float(stats.poisson.sf(L, mu))


def laguerre_table(L: int, x) -> np.ndarray:
    """Laguerre polynomials ``L_0..L_L`` at ``x`` by upward recurrence.

    Returns an array of shape ``(L + 1,) + np.shape(x)``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((L + 1,) + x.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = 1.0 - x
    for k in range(1, L):
        out[k + 1] = ((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1)
    return out


def fock_wigner_table(L: int, r) -> np.ndarray:
    """Wigner profiles ``W_0(r)..W_L(r)``, shape ``(L + 1,) + np.shape(r)``."""
    r = np.asarray(r, dtype=float)
    x = 4.0 * r * r
    lag = laguerre_table(L, x)
    signs = np.where(np.arange(L + 1) % 2 == 0, 1.0, -1.0)
    signs = signs.reshape((L + 1,) + (1,) * r.ndim)
    return (2.0 / math.pi) * signs * np.exp(-0.5 * x) * lag


def fock_wigner_value(l: int, r):
    """Wigner function of the number projector ``|l><l|`` at radius ``r``."""
    if int(l) != l or l < 0:
        raise DomainError(f"photon number must be a non-negative integer, got {l!r}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("radius must be finite and >= 0")
    val = fock_wigner_table(int(l), r)[-1]
    return float(val) if val.ndim == 0 else val


def povm_wigner(coeffs, r) -> np.ndarray:
    """Pointwise ``sum_l coeffs[l] W_l(r)`` for a diagonal operator.

    Only meaningful for summable coefficient tails; saturating POVM elements
    should go through the complement (see ``DiagonalPovm.wigner``).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    r = np.asarray(r, dtype=float)
    table = fock_wigner_table(len(coeffs) - 1, r)
    return np.tensordot(coeffs, table, axes=(0, 0))


@dataclass(frozen=True)
class WignerSection:
    """Radial cross-section of a rotationally invariant Wigner function."""

    radii: np.ndarray
    values: np.ndarray
    label: str = "w"

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape:
            raise DomainError("radii and values must be 1-D arrays of equal length")
        if len(radii) == 0 or radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise DomainError("radii must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("Wigner values must be finite")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @property
    def origin(self) -> float:
        return float(self.values[0])


def povm_wigner_section(coeffs, radii, label: str = "w") -> WignerSection:
    return WignerSection(np.asarray(radii, dtype=float), povm_wigner(coeffs, radii), label)


@functools.lru_cache(maxsize=64)
def _cvz_weights(n: int) -> np.ndarray:
    # Cohen-Rodriguez Villegas-Zagier weights, scaled by 1/d to stay finite.
    d = (3.0 + math.sqrt(8.0)) ** n
    d = 0.5 * (d + 1.0 / d)
    b = -1.0 / d
    c = -1.0
    w = np.empty(n)
    for k in range(n):
        c = b - c
        w[k] = c
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1))
    return w


def alternating_sum(a, accelerate: bool = True) -> float:
    """``sum_k (-1)^k a_k``, accelerated when the tail has not died out.

    Acceleration is exact to machine precision for sequences that are
    moments of a (signed) measure on [0, 1], which covers every combination
    of geometric photon-number coefficients ``q^l`` with ``0 <= q <= 1``.
    """
    a = np.asarray(a, dtype=float)
    if not accelerate or abs(a[-1]) <= _TAIL_NEGLIGIBLE:
        signs = np.where(np.arange(len(a)) % 2 == 0, 1.0, -1.0)
        return float(np.dot(signs, a))
    n = min(len(a), _MAX_ACCEL_TERMS)
    return float(np.dot(_cvz_weights(n), a[:n]))


class OriginSum(NamedTuple):
    value: float
    last_term: float
    accelerated: bool


def alternating_origin_sum(coeffs, accelerate: bool = True, warn: bool = True) -> OriginSum:
    """Wigner value at the origin, ``(2/pi) sum_l (-1)^l r_l``.

    ``last_term`` is the magnitude of the last retained coefficient times
    ``2/pi``, a bound on what a plain truncated sum may be missing.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    last = (2.0 / math.pi) * abs(coeffs[-1])
    if warn and last > _TAIL_WARN:
        warnings.warn(
            f"origin sum truncated with last term {last:.3g}; raise the cutoff",
            TruncationWarning,
            stacklevel=2,
        )
    used_accel = accelerate and abs(coeffs[-1]) > _TAIL_NEGLIGIBLE
    value = (2.0 / math.pi) * alternating_sum(coeffs, accelerate)
    return OriginSum(value, last, used_accel)
