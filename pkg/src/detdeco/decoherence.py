"""Loss of Wigner negativity of the one-click POVM element under dark counts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .detectors import DetectorKind
from .errors import DomainError
from .fock import DEFAULT_FIT_CUTOFF
from .tomography import ClickRecord, FitReport, ml_reconstruct

NOISE_LEVELS = (0.0, 0.03, 0.08, 0.18)
DENSE_NU_GRID = np.linspace(0.0, 0.45, 181)
ONE_CLICK = 1


def apd_origin_value(eta, nu):
    """``W_on(0, 0) = (1/pi) (1 - e^{-nu} / (1 - eta/2))``."""
    eta = np.asarray(eta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = (1.0 - np.exp(-nu) / (1.0 - 0.5 * eta)) / math.pi
    return float(out) if out.ndim == 0 else out


def tmd_origin_value(eta, nu):
    """``W_1(0, 0) = (4/pi) e^{-nu} (e^{nu/2} / (2 - eta/2) - 1 / (2 - eta))``."""
    eta = np.asarray(eta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = (4.0 / math.pi) * np.exp(-nu) * (np.exp(0.5 * nu) / (2.0 - 0.5 * eta) - 1.0 / (2.0 - eta))
    return float(out) if out.ndim == 0 else out


def origin_value(kind, eta, nu):
    kind = DetectorKind(kind)
    if kind is DetectorKind.APD_ON_OFF:
        return apd_origin_value(eta, nu)
    return tmd_origin_value(eta, nu)


def threshold_exact(kind, eta: float) -> float:
    kind = DetectorKind(kind)
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"efficiency must lie in (0, 1], got {eta!r}")
    if kind is DetectorKind.APD_ON_OFF:
        return -math.log1p(-0.5 * eta)
    return -2.0 * math.log1p(-eta / (4.0 - eta))


@dataclass(frozen=True)
class Threshold:
    kind: DetectorKind
    eta: float
    nu_star_exact: float
    nu_star_bisect: float
    nu_star_empirical: float | None = None


def threshold(kind, eta: float, bracket=(0.0, 2.0)) -> Threshold:
    """Dark-count mean at which the one-click origin value reaches zero.

    Returned both from the closed form and from bisection of the origin-value
    function, so the two routes can be checked against each other.
    """
    kind = DetectorKind(kind)
    exact = threshold_exact(kind, eta)
    try:
        root = optimize.bisect(lambda nu: origin_value(kind, eta, nu), *bracket,
                               xtol=1e-15, rtol=1e-15, maxiter=200)
    except ValueError as exc:
        raise RuntimeError(f"origin value does not change sign on {bracket}: {exc}") from exc
    return Threshold(kind, eta, exact, float(root))


@dataclass(frozen=True)
class NegativityCurve:
    nu_grid: np.ndarray
    origin_values: np.ndarray
    source: str
    kind: DetectorKind | None = None
    eta: float | None = None

    def __post_init__(self):
        nus = np.asarray(self.nu_grid, dtype=float)
        vals = np.asarray(self.origin_values, dtype=float)
        if nus.shape != vals.shape or nus.ndim != 1:
            raise DomainError("nu_grid and origin_values must be 1-D and equally long")
        if np.any(np.diff(nus) <= 0):
            raise DomainError("nu_grid must be strictly ascending")
        if self.source not in ("analytic", "reconstructed"):
            raise DomainError(f"unknown curve source {self.source!r}")
        object.__setattr__(self, "nu_grid", nus)
        object.__setattr__(self, "origin_values", vals)

    def crossing(self) -> float | None:
        """First negative-to-non-negative crossing, linearly interpolated.

        ``None`` means no crossing in range.
        """
        v = self.origin_values
        for i in range(len(v) - 1):
            if v[i] < 0.0 <= v[i + 1]:
                nu0, nu1 = self.nu_grid[i], self.nu_grid[i + 1]
                return float(nu0 + (nu1 - nu0) * (-v[i]) / (v[i + 1] - v[i]))
        return None


def negativity_curve(kind, eta: float, nu_grid: Sequence[float] = NOISE_LEVELS,
                     source: str = "analytic", fit_inputs=None, L: int = DEFAULT_FIT_CUTOFF,
                     **fit_options) -> NegativityCurve:
    """Origin value of the one-click element as a function of dark-count mean.

    For ``source="reconstructed"`` pass one entry per noise level in
    ``fit_inputs``: a :class:`ClickRecord` (fitted here) or a ready
    :class:`FitReport`.
    """
    kind = DetectorKind(kind)
    nus = np.asarray(nu_grid, dtype=float)
    if source == "analytic":
        vals = origin_value(kind, eta, nus)
        return NegativityCurve(nus, np.atleast_1d(vals), source, kind, eta)
    if source != "reconstructed":
        raise DomainError(f"unknown curve source {source!r}")
    if fit_inputs is None or len(fit_inputs) != len(nus):
        raise DomainError("reconstructed curves need one click record or fit per noise level")
    vals = []
    for item in fit_inputs:
        if isinstance(item, ClickRecord):
            item = ml_reconstruct(item, L=L, kind=kind, outcome=ONE_CLICK, **fit_options)
        if not isinstance(item, FitReport):
            raise DomainError(f"expected ClickRecord or FitReport, got {type(item).__name__}")
        vals.append(item.origin_value)
    return NegativityCurve(nus, np.array(vals), source, kind, eta)
