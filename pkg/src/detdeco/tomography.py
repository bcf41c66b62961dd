"""Synthetic detector tomography with coherent probes.

The estimator is the expectation-maximization scheme for phase-insensitive
detectors: the hidden variable is the photon number reaching the device,
whose prior under probe ``j`` is the Poisson law ``p_l(mu_j)``. Each update
multiplies ``r[l, n]`` by the expected posterior weight and renormalizes
every row, so the iterate stays a valid POVM (non-negative, rows summing to
one) and the log-likelihood never decreases.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .detectors import DetectorKind, DetectorSpec, DiagonalPovm, build_povm, forward_matrix
from .errors import ConditioningWarning, DomainError, TruncationWarning
from .fock import DEFAULT_FIT_CUTOFF, check_cutoff, truncation_deficit

PROB_FLOOR = 1e-300
MIN_SPANNING_POINTS = 10
DEFAULT_JITTER = 0.05            # peak-to-peak relative intensity fluctuation
RESAMPLE_VARIANCE_FACTOR = 0.025  # resampling variance, in units of mu_j
# EMS smoothing used by the reconstruction entry points; 0 gives plain EM.
# Twenty probes cannot pin ~60 coefficients and the unidentified directions
# oscillate in l, which is exactly what the origin value is sensitive to.
DEFAULT_SMOOTHING = 0.005
_QUAD_NODES = 32


@dataclass(frozen=True)
class ProbeSet:
    intensities: np.ndarray
    pulses_per_point: int = 10**6

    def __post_init__(self):
        mus = np.asarray(self.intensities, dtype=float)
        if mus.ndim != 1 or len(mus) == 0:
            raise DomainError("probe intensities must be a non-empty 1-D array")
        if np.any(mus < 0) or not np.all(np.isfinite(mus)):
            raise DomainError("probe intensities must be finite and >= 0")
        if np.any(np.diff(mus) < 0):
            raise DomainError("probe intensities must be sorted ascending")
        if int(self.pulses_per_point) != self.pulses_per_point or self.pulses_per_point < 1:
            raise DomainError("pulses_per_point must be a positive integer")
        object.__setattr__(self, "intensities", mus)
        object.__setattr__(self, "pulses_per_point", int(self.pulses_per_point))

    def is_spanning(self) -> bool:
        return len(np.unique(self.intensities)) >= MIN_SPANNING_POINTS


def default_probes(n_points: int = 20, mu_max: float = 10.0, pulses_per_point: int = 10**6) -> ProbeSet:
    """``n_points`` evenly spaced intensities from vacuum to ``mu_max``."""
    return ProbeSet(np.linspace(0.0, mu_max, n_points), pulses_per_point)


@dataclass(frozen=True)
class ClickRecord:
    """Outcome tallies, one row per probe intensity."""

    intensities: np.ndarray
    counts: np.ndarray
    pulses_per_point: int
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        mus = np.asarray(self.intensities, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != len(mus):
            raise DomainError("counts must have one row per probe intensity")
        if np.any(counts < 0) or np.any(counts.sum(axis=1) != self.pulses_per_point):
            raise DomainError("every row of counts must sum to pulses_per_point")
        object.__setattr__(self, "intensities", mus)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "pulses_per_point", int(self.pulses_per_point))

    @property
    def outcomes(self) -> int:
        return self.counts.shape[1]

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.pulses_per_point

    @property
    def probes(self) -> ProbeSet:
        return ProbeSet(self.intensities, self.pulses_per_point)


def _required_cutoff(mu_max: float, tail: float = 1e-12, floor: int = DEFAULT_FIT_CUTOFF) -> int:
    L = floor
    while truncation_deficit(mu_max, L) > tail:
        L += 10
    return L


def jittered_probabilities(povm: DiagonalPovm, mu: float, jitter: float) -> np.ndarray:
    """Outcome probabilities averaged over a uniform intensity in ``mu (1 +- jitter/2)``."""
    if jitter == 0 or mu == 0:
        mus = np.array([mu])
        wts = np.array([1.0])
    else:
        x, w = np.polynomial.legendre.leggauss(_QUAD_NODES)
        mus = mu * (1.0 + 0.5 * jitter * x)
        wts = 0.5 * w
    probs = wts @ (forward_matrix(mus, povm.L) @ povm.table)
    return probs / probs.sum()


def simulate_clicks(spec: DetectorSpec, probes: ProbeSet, jitter: float = DEFAULT_JITTER,
                    seed: int = 0) -> ClickRecord:
    """Draw outcome tallies for every probe point.

    Every pulse sees an intensity drawn uniformly from ``mu_j (1 +- jitter/2)``.
    Pulses are independent, so the tallies are multinomial with the
    intensity-averaged outcome probabilities; the average is taken by
    Gauss-Legendre quadrature, which is exact to rounding for these smooth
    integrands.
    """
    if not 0.0 <= jitter <= 0.2:
        raise DomainError(f"jitter must lie in [0, 0.2], got {jitter!r}")
    L = _required_cutoff(probes.intensities[-1] * (1.0 + 0.5 * jitter))
    povm = build_povm(spec, L)
    rng = np.random.default_rng(seed)
    counts = np.empty((len(probes.intensities), povm.outcomes), dtype=np.int64)
    for j, mu in enumerate(probes.intensities):
        p = jittered_probabilities(povm, mu, jitter)
        counts[j] = rng.multinomial(probes.pulses_per_point, p)
    meta = {"kind": spec.kind.value, "eta": spec.eta, "nu": spec.nu, "jitter": jitter}
    return ClickRecord(probes.intensities, counts, probes.pulses_per_point, seed, meta)


def exact_record(spec: DetectorSpec, probes: ProbeSet, L: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free forward frequencies ``(mus, freqs)`` of the analytic model."""
    L = L or _required_cutoff(probes.intensities[-1])
    povm = build_povm(spec, L)
    freqs = forward_matrix(probes.intensities, L) @ povm.table
    return probes.intensities, freqs / freqs.sum(axis=1, keepdims=True)


def log_likelihood(freqs, mus, table) -> float:
    """``sum_{j,n} f[j,n] log P(n | mu_j)`` for a diagonal POVM table."""
    A = forward_matrix(mus, np.shape(table)[0] - 1)
    P = np.maximum(A @ table, PROB_FLOOR)
    return float(np.sum(special.xlogy(freqs, P)))


@dataclass
class FitReport:
    povm: DiagonalPovm
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    origin_value: float
    origin_halfwidth: float = 0.0
    outcome: int = 1
    warnings: list = field(default_factory=list)
    seed: int | None = None


def em_fit(freqs, mus, L: int = DEFAULT_FIT_CUTOFF, max_iter: int = 20000, tol: float = 1e-12,
           smoothing: float = 0.0, init=None, callback=None):
    """Run the EM iteration. Returns ``(table, loglik_trace, converged)``.

    ``callback(table)`` is invoked after every update.

    ``smoothing`` > 0 mixes each row with the mean of its neighbours after
    every update (the EMS variant of EM). This damps the oscillating
    components the probe data cannot see, at the price of the monotonicity
    guarantee and a small bias.
    """
    L = check_cutoff(L)
    freqs = np.asarray(freqs, dtype=float)
    A = forward_matrix(mus, L)
    N = freqs.shape[1]
    R = np.full((L + 1, N), 1.0 / N) if init is None else np.array(init, dtype=float)

    def loglik(P):
        return float(np.sum(special.xlogy(freqs, np.maximum(P, PROB_FLOOR))))

    P = A @ R
    trace = [loglik(P)]
    converged = False
    for _ in range(max_iter):
        update = R * (A.T @ (freqs / np.maximum(P, PROB_FLOOR)))
        norm = update.sum(axis=1, keepdims=True)
        # rows no probe can reach (all weights underflow) are left alone
        seen = norm[:, 0] > 0
        R = R.copy()
        R[seen] = update[seen] / norm[seen]
        if smoothing > 0:
            nb = R.copy()
            nb[1:-1] = 0.5 * (R[:-2] + R[2:])
            R = (1.0 - smoothing) * R + smoothing * nb
            R /= R.sum(axis=1, keepdims=True)
        if callback is not None:
            callback(R)
        P = A @ R
        trace.append(loglik(P))
        if abs(trace[-1] - trace[-2]) < tol * max(abs(trace[-2]), 1e-300):
            converged = True
            break
    return R, np.array(trace), converged


def ml_reconstruct(record: ClickRecord, probes: ProbeSet | None = None, L: int = DEFAULT_FIT_CUTOFF,
                   max_iter: int = 20000, tol: float = 1e-12, smoothing: float = DEFAULT_SMOOTHING,
                   outcome: int = 1, kind: DetectorKind | str | None = None) -> FitReport:
    """Maximum-likelihood diagonal POVM from coherent-probe click statistics."""
    probes = probes if probes is not None else record.probes
    if len(probes.intensities) != len(record.intensities):
        raise DomainError("probe set and click record have different lengths")
    notes = []
    if not probes.is_spanning():
        msg = (f"only {len(np.unique(probes.intensities))} distinct probe intensities; "
               f"at least {MIN_SPANNING_POINTS} are needed to constrain the POVM")
        warnings.warn(msg, ConditioningWarning, stacklevel=2)
        notes.append(msg)
    tail = truncation_deficit(probes.intensities[-1], L)
    if tail > 1e-8:
        msg = f"Poisson tail beyond L={L} at the brightest probe is {tail:.3g}"
        warnings.warn(msg, TruncationWarning, stacklevel=2)
        notes.append(msg)

    table, trace, converged = em_fit(record.frequencies, probes.intensities, L, max_iter, tol, smoothing)
    if kind is None:
        kind = record.meta.get("kind")
    povm = DiagonalPovm(table, kind, source="reconstructed")
    return FitReport(
        povm=povm,
        loglik_trace=trace,
        iterations=len(trace) - 1,
        converged=converged,
        origin_value=povm.origin_value(outcome, warn=False),
        outcome=outcome,
        warnings=notes,
        seed=record.seed,
    )


@dataclass(frozen=True)
class Envelope:
    mean: float
    halfwidth: float
    truncation_halfrange: float
    resample_std: float
    truncation_values: np.ndarray
    resample_values: np.ndarray
    failures: int


def uncertainty_envelope(record: ClickRecord, probes: ProbeSet | None = None, trunc_list=(60,),
                         variance_factor: float = RESAMPLE_VARIANCE_FACTOR, resamples: int = 16,
                         seed: int = 0, outcome: int = 1, max_iter: int = 20000,
                         tol: float = 1e-12, smoothing: float = DEFAULT_SMOOTHING) -> Envelope:
    """Error bar on the fitted origin value.

    Two contributions, added in quadrature: the half-range of the origin
    value over refits with each cutoff in ``trunc_list``, and the standard
    deviation over refits in which every probe intensity is replaced by a
    Gaussian draw of mean ``mu_j`` and variance ``variance_factor * mu_j``.
    Resampled fits use the largest cutoff.
    """
    probes = probes if probes is not None else record.probes
    trunc_list = [check_cutoff(L) for L in trunc_list]
    if not trunc_list:
        raise DomainError("trunc_list must not be empty")
    if resamples < 8:
        raise DomainError("at least 8 resamples are required")
    freqs = record.frequencies
    mus = probes.intensities
    failures = 0
    total = len(trunc_list) + resamples

    def refit(mu_vec, L):
        table, _, _ = em_fit(freqs, mu_vec, L, max_iter, tol, smoothing)
        return DiagonalPovm(table, source="reconstructed").origin_value(outcome, warn=False)

    trunc_vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for L in trunc_list:
            try:
                trunc_vals.append(refit(mus, L))
            except (ValueError, FloatingPointError, np.linalg.LinAlgError):
                failures += 1

        rng = np.random.default_rng(seed)
        sigma = np.sqrt(variance_factor * mus)
        res_vals = []
        for _ in range(resamples):
            jittered = np.clip(mus + sigma * rng.standard_normal(len(mus)), 0.0, None)
            try:
                res_vals.append(refit(jittered, max(trunc_list)))
            except (ValueError, FloatingPointError, np.linalg.LinAlgError):
                failures += 1

    if failures > total / 2 or not trunc_vals:
        raise RuntimeError(f"{failures} of {total} refits failed")
    trunc_vals = np.array(trunc_vals)
    res_vals = np.array(res_vals)
    half_range = 0.5 * float(trunc_vals.max() - trunc_vals.min())
    std = float(res_vals.std(ddof=1)) if len(res_vals) > 1 else 0.0
    mean = float(np.mean(np.concatenate([trunc_vals, res_vals])))
    return Envelope(mean, math.hypot(half_range, std), half_range, std, trunc_vals, res_vals, failures)
