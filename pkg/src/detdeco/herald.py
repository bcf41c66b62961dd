"""Heralded state preparation on a two-mode squeezed vacuum.

The resource ``sqrt(1 - lam^2) sum_l lam^l |l, l>`` is measured on one mode
with a diagonal POVM. Because both the resource correlations and the POVM are
diagonal in photon number, the conditional state of the other mode is
diagonal with weights ``(1 - lam^2) lam^(2l) r[l, n]`` up to normalization.
:func:`gaussian_integral_oracle` recomputes the same Wigner function directly
as a phase-space overlap, as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detectors import DiagonalPovm
from .errors import DomainError, QuadratureError, TruncationError
from .fock import WignerSection, povm_wigner

HERALD_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class TmsvResource:
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise DomainError(f"lambda must lie in [0, 1), got {self.lam!r}")

    @classmethod
    def from_gain(cls, gain: float) -> "TmsvResource":
        if gain < 1.0:
            raise DomainError("intensity gain must be >= 1")
        return cls(math.sqrt(1.0 - 1.0 / gain))

    @property
    def gain(self) -> float:
        return 1.0 / (1.0 - self.lam**2)

    @property
    def cosh2r(self) -> float:
        return (1.0 + self.lam**2) / (1.0 - self.lam**2)

    @property
    def sinh2r(self) -> float:
        return 2.0 * self.lam / (1.0 - self.lam**2)

    def photon_weights(self, L: int) -> np.ndarray:
        """Thermal marginal ``(1 - lam^2) lam^(2l)`` for ``l = 0..L``."""
        return (1.0 - self.lam**2) * self.lam ** (2.0 * np.arange(L + 1))


@dataclass(frozen=True)
class HeraldedState:
    """Diagonal single-mode state; ``herald_probability`` is ``None`` for retrodicted states."""

    weights: np.ndarray
    herald_probability: float | None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("state weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def L(self) -> int:
        return len(self.weights) - 1


def _povm_meta(povm: DiagonalPovm, n: int) -> dict:
    return {
        "detector": {
            "kind": None if povm.kind is None else povm.kind.value,
            "eta": povm.eta,
            "nu": povm.nu,
            "L": povm.L,
        },
        "outcome": n,
    }


def herald_state(povm: DiagonalPovm, n: int, resource: TmsvResource) -> HeraldedState:
    if not 0 <= n < povm.outcomes:
        raise DomainError(f"outcome {n} out of range for a {povm.outcomes}-outcome POVM")
    tail = resource.lam ** (2 * (povm.L + 1))
    if tail >= HERALD_TAIL_TOL:
        raise TruncationError(
            f"resource weight beyond L={povm.L} is {tail:.3g} at lambda={resource.lam}; raise the cutoff"
        )
    joint = resource.photon_weights(povm.L) * povm.column(n)
    prob = float(joint.sum())
    if prob <= 0.0:
        raise DomainError(f"outcome {n} is never heralded")
    meta = _povm_meta(povm, n) | {"lambda": resource.lam}
    return HeraldedState(joint / prob, prob, meta)


def heralded_wigner_section(state: HeraldedState, radii, label: str = "w_c") -> WignerSection:
    radii = np.asarray(radii, dtype=float)
    return WignerSection(radii, povm_wigner(state.weights, radii), label)


def retrodicted_state(povm: DiagonalPovm, n: int, L: int | None = None) -> HeraldedState:
    """Normalized POVM element ``Pi_n / Tr Pi_n`` on the first ``L + 1`` levels.

    For saturating elements (APD on, TMD two clicks) the trace diverges and
    the result depends on the cutoff; ``meta["truncation_dependent"]`` says so.
    """
    L = povm.L if L is None else min(L, povm.L)
    coeffs = povm.column(n)[: L + 1]
    trace = float(coeffs.sum())
    if trace <= 0.0:
        raise DomainError(f"POVM element {n} has zero trace")
    meta = _povm_meta(povm, n) | {
        "trace": trace,
        "truncation_dependent": bool(povm.uses_complement(n)),
    }
    return HeraldedState(coeffs / trace, None, meta)


def trace_distance(p, q) -> float:
    """Trace distance between two diagonal states (zero-padded to equal length)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(len(p), len(q))
    p = np.pad(p, (0, size - len(p)))
    q = np.pad(q, (0, size - len(q)))
    return 0.5 * float(np.abs(p - q).sum())


def tmsv_wigner(resource: TmsvResource, xa, ya, xb, yb):
    """Two-mode Wigner function of the resource, with ``alpha = xa + i ya``.

    Gaussian with vacuum quadrature variance 1/4 per mode, scaled by
    ``cosh 2r``, and correlation ``sinh 2r`` between x quadratures
    (anti-correlation between y quadratures).
    """
    c, s = resource.cosh2r, resource.sinh2r
    xa, ya, xb, yb = (np.asarray(v, dtype=float) for v in (xa, ya, xb, yb))
    expo = -2.0 * c * (xa**2 + ya**2 + xb**2 + yb**2) + 4.0 * s * (xa * xb - ya * yb)
    return (4.0 / math.pi**2) * np.exp(expo)


def _overlap_numerators(povm, n, resource, xs, points, extent):
    c, s = resource.cosh2r, resource.sinh2r
    # conditional spread and shift of mode b given x_a = x, y_a = 0
    sigma = 0.5 / math.sqrt(c)
    u = np.linspace(-extent * sigma, extent * sigma, points)
    h = u[1] - u[0]
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        xb = (s / c) * x + u[:, None]
        yb = u[None, :]
        w_ab = tmsv_wigner(resource, x, 0.0, xb, yb)
        w_n = povm.wigner(n, np.hypot(xb, yb))
        out[i] = np.sum(w_ab * w_n) * h * h
    return out


def _overlap_denominator(povm, n, resource, points, extent):
    c = resource.cosh2r
    # reduced state of mode b is thermal: (2 / (pi c)) exp(-2 |beta|^2 / c)
    sigma = 0.5 * math.sqrt(c)
    u = np.linspace(-extent * sigma, extent * sigma, points)
    h = u[1] - u[0]
    xb, yb = u[:, None], u[None, :]
    w_b = (2.0 / (math.pi * c)) * np.exp(-2.0 * (xb**2 + yb**2) / c)
    return float(np.sum(w_b * povm.wigner(n, np.hypot(xb, yb))) * h * h)


def gaussian_integral_oracle(povm: DiagonalPovm, n: int, resource: TmsvResource, radii,
                             points: int = 81, extent: float = 8.0, tol: float = 1e-4,
                             label: str = "w_c") -> WignerSection:
    """Conditional Wigner section by direct phase-space quadrature.

    Integrates the product of the resource Wigner function and the POVM
    Wigner function over the measured mode on a uniform grid spanning
    ``extent`` conditional standard deviations, then divides by the same
    overlap integrated over both modes. The result is recomputed at roughly
    double resolution; a change above ``tol`` raises :class:`QuadratureError`.
    """
    radii = np.asarray(radii, dtype=float)

    def evaluate(pts):
        num = _overlap_numerators(povm, n, resource, radii, pts, extent)
        den = _overlap_denominator(povm, n, resource, pts, extent)
        if den <= 0.0:
            raise DomainError(f"outcome {n} is never heralded")
        return num / den

    coarse = evaluate(points)
    fine = evaluate(2 * points - 1)
    change = float(np.max(np.abs(fine - coarse)))
    if change > tol:
        raise QuadratureError(f"doubling the grid changed the section by {change:.3g}")
    return WignerSection(radii, fine, label)
