"""Analytic POVMs of noisy phase-insensitive photon counters.

Two devices are modelled, each with quantum efficiency ``eta`` and
Poissonian dark counts of mean ``nu`` per detection window:

* an on/off avalanche photodiode (outcomes ``off``, ``on``);
* a single-loop time-multiplexed detector with two equally likely time bins
  read by one APD (outcomes 0, 1 and 2 clicks). Each bin carries its own
  Poissonian dark counts of mean ``nu / 2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import DomainError, TruncationError
from .fock import (
    DEFAULT_ANALYTIC_CUTOFF,
    IDENTITY_WIGNER,
    WignerSection,
    alternating_origin_sum,
    check_cutoff,
    coherent_weights,
    povm_wigner,
    truncation_deficit,
)

COMPLETENESS_TOL = 1e-10
POSITIVITY_SLACK = 1e-9
# a column whose last coefficient exceeds this is not summable in practice
_SATURATION_TAIL = 1e-13


class DetectorKind(str, enum.Enum):
    APD_ON_OFF = "apd"
    TMD_SINGLE_LOOP = "tmd"

    @property
    def n_outcomes(self) -> int:
        return 2 if self is DetectorKind.APD_ON_OFF else 3

    @property
    def outcome_labels(self) -> tuple[str, ...]:
        return ("off", "on") if self is DetectorKind.APD_ON_OFF else ("0", "1", "2")


@dataclass(frozen=True)
class DetectorSpec:
    kind: DetectorKind
    eta: float
    nu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        if not (0.0 <= self.eta <= 1.0):
            raise DomainError(f"efficiency must lie in [0, 1], got {self.eta!r}")
        if not (np.isfinite(self.nu) and self.nu >= 0.0):
            raise DomainError(f"dark-count mean must be finite and >= 0, got {self.nu!r}")


@dataclass(frozen=True)
class DiagonalPovm:
    """POVM diagonal in the Fock basis: ``Pi_n = sum_l table[l, n] |l><l|``.

    ``kind``, ``eta`` and ``nu`` describe the model the table came from and
    are ``None`` when unknown.
    """

    table: np.ndarray
    kind: DetectorKind | None = None
    eta: float | None = None
    nu: float | None = None
    source: str = "analytic"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 1:
            raise DomainError("POVM table must have shape (L + 1, outcomes) with L >= 1")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        if self.kind is not None:
            object.__setattr__(self, "kind", DetectorKind(self.kind))

    @property
    def L(self) -> int:
        return self.table.shape[0] - 1

    @property
    def outcomes(self) -> int:
        return self.table.shape[1]

    @property
    def labels(self) -> tuple[str, ...]:
        if self.kind is not None and self.kind.n_outcomes == self.outcomes:
            return self.kind.outcome_labels
        return tuple(str(n) for n in range(self.outcomes))

    def column(self, n: int) -> np.ndarray:
        return self.table[:, n]

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.table.sum(axis=1) - 1.0)))

    def min_coefficient(self) -> float:
        return float(self.table.min())

    def check(self, tol: float = COMPLETENESS_TOL) -> None:
        if self.completeness_error() > tol:
            raise DomainError(f"POVM not complete: max row-sum error {self.completeness_error():.3g}")
        if self.min_coefficient() < -POSITIVITY_SLACK:
            raise DomainError(f"POVM has negative coefficient {self.min_coefficient():.3g}")

    def saturating_outcome(self) -> int:
        """The outcome that absorbs high photon numbers (APD on, TMD 2 clicks)."""
        return int(np.argmax(self.table[-1]))

    def uses_complement(self, n: int) -> bool:
        return n == self.saturating_outcome() and self.table[-1, n] > _SATURATION_TAIL

    def wigner(self, n: int, r) -> np.ndarray:
        """Wigner function of ``Pi_n`` at radii ``r``.

        A saturating element is evaluated as ``1/pi`` minus the Wigner
        functions of the other, summable elements.
        """
        if self.uses_complement(n):
            others = [m for m in range(self.outcomes) if m != n]
            rest = self.table[:, others].sum(axis=1)
            return IDENTITY_WIGNER - povm_wigner(rest, r)
        return povm_wigner(self.table[:, n], r)

    def wigner_section(self, n: int, radii, label: str = "w") -> WignerSection:
        radii = np.asarray(radii, dtype=float)
        return WignerSection(radii, self.wigner(n, radii), label)

    def origin_value(self, n: int, warn: bool = True) -> float:
        if self.uses_complement(n):
            others = [m for m in range(self.outcomes) if m != n]
            rest = self.table[:, others].sum(axis=1)
            return IDENTITY_WIGNER - alternating_origin_sum(rest, warn=warn).value
        return alternating_origin_sum(self.table[:, n], warn=warn).value


def _require(spec: DetectorSpec, kind: DetectorKind) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} detector spec, got {spec.kind.value}")


def apd_povm(spec: DetectorSpec, L: int = DEFAULT_ANALYTIC_CUTOFF) -> DiagonalPovm:
    _require(spec, DetectorKind.APD_ON_OFF)
    L = check_cutoff(L)
    l = np.arange(L + 1)
    off = math.exp(-spec.nu) * (1.0 - spec.eta) ** l
    return DiagonalPovm(np.column_stack([off, 1.0 - off]), spec.kind, spec.eta, spec.nu)


def tmd_povm(spec: DetectorSpec, L: int = DEFAULT_ANALYTIC_CUTOFF) -> DiagonalPovm:
    """Single-loop two-bin TMD.

    The one-click coefficient is written as
    ``2 e^{-nu/2} (1 - eta/2)^l - 2 e^{-nu} (1 - eta)^l``, which stays finite
    at ``eta = 1``.
    """
    _require(spec, DetectorKind.TMD_SINGLE_LOOP)
    L = check_cutoff(L)
    l = np.arange(L + 1)
    zero = math.exp(-spec.nu) * (1.0 - spec.eta) ** l
    one_bin_dark = math.exp(-0.5 * spec.nu) * (1.0 - 0.5 * spec.eta) ** l
    one = 2.0 * (one_bin_dark - zero)
    # (1 - e^{-nu/2})^2 at l = 0 can round below zero
    two = np.maximum(1.0 - zero - one, 0.0)
    meta = {"eta_limit": True} if spec.eta == 1.0 else {}
    return DiagonalPovm(np.column_stack([zero, one, two]), spec.kind, spec.eta, spec.nu, meta=meta)


def build_povm(spec: DetectorSpec, L: int = DEFAULT_ANALYTIC_CUTOFF) -> DiagonalPovm:
    if spec.kind is DetectorKind.APD_ON_OFF:
        return apd_povm(spec, L)
    return tmd_povm(spec, L)


class ClickDistribution(NamedTuple):
    probs: np.ndarray
    deficit: float


def forward_matrix(mus, L: int) -> np.ndarray:
    """Coherent weights ``p_l(mu_j)`` stacked as a ``(J, L + 1)`` matrix."""
    return np.vstack([coherent_weights(mu, L) for mu in np.atleast_1d(mus)])


def click_probabilities(povm: DiagonalPovm, mu: float, max_deficit: float = 1e-6) -> ClickDistribution:
    """Outcome distribution ``P(n | mu)`` for a coherent probe of mean ``mu``.

    The truncated sum is renormalized; the discarded Poisson mass is
    returned as ``deficit``.
    """
    deficit = truncation_deficit(mu, povm.L)
    if deficit > max_deficit:
        raise TruncationError(
            f"Poisson tail beyond L={povm.L} is {deficit:.3g} at mu={mu}; use a larger cutoff"
        )
    probs = coherent_weights(mu, povm.L) @ povm.table
    return ClickDistribution(probs / probs.sum(), deficit)


def dark_count_convolve(clean, nu: float, max_clicks: int) -> np.ndarray:
    """Add Poissonian dark clicks to a noiseless click distribution.

    Click numbers at or above ``max_clicks`` pile into the top bin. This is
    the exact noise model of the on/off APD; the TMD distributes its dark
    counts over two bins and saturates per bin instead (see ``tmd_povm``).
    """
    clean = np.asarray(clean, dtype=float)
    if len(clean) != max_clicks + 1:
        raise DomainError("clean distribution length must equal max_clicks + 1")
    if nu < 0:
        raise DomainError("dark-count mean must be >= 0")
    dark = stats.poisson.pmf(np.arange(max_clicks + 1), nu)
    noisy = np.zeros(max_clicks + 1)
    for m, pm in enumerate(clean):
        for k in range(max_clicks + 1 - m):
            noisy[m + k] += pm * dark[k]
        # dark-count mass that pushes past the top bin
        noisy[max_clicks] += pm * (1.0 - dark[: max_clicks + 1 - m].sum())
    return noisy
