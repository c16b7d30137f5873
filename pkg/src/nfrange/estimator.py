"""Received-signal synthesis, the maximum-likelihood range statistic and a
Monte Carlo harness comparing the estimator RMSE with the CRB.

Every antenna pair ``(tx, rx)`` gets its own record (orthogonal time slots),
sampled on a common time grid ``t_n = t0 + n / f_s``. Continuous integrals are
replaced by the rectangle rule ``sum(...) / f_s``.

Two evaluations of the statistic exist. :func:`ml_statistic` builds the
hypothesised signal for every sample and every pair (slow, reference).
:class:`MatchedFilterBank` correlates each pair once against the pulse on a
fine lag grid and interpolates the outputs with cubic splines; the search in
:func:`estimate_range` runs on the bank.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .crb import CrbMethod, crb_range
from .errors import InvalidParameterError, WindowCoverageError
from .geometry import (SPEED_OF_LIGHT, DistanceMode, TargetKind, TargetModel,
                       distance)
from .scenario import Scenario

DEFAULT_OVERSAMPLING = 8       # f_s = 8 B
DEFAULT_HALF_WINDOW = 256      # record half-length in units of 1/B
COVERAGE_GUARD = 4             # hypothesised delays must stay 4/B inside the record
BANK_POLYPHASE = 4             # lag grid step = 1 / (4 f_s)
REFINE_FRACTION = 1e-4         # golden-section resolution relative to the coarse step
OUTLIER_GATE = 3               # gate in main-lobe widths c / (2B)


def coarse_step(s: Scenario) -> float:
    """Coarse search step ``c / (4B)``."""
    return SPEED_OF_LIGHT / (4 * s.waveform.bandwidth)


def refinement_resolution(s: Scenario) -> float:
    return REFINE_FRACTION * coarse_step(s)


def main_lobe_width(s: Scenario) -> float:
    """Peak-to-first-null distance of the waveform factor, ``c / (2B)``."""
    return SPEED_OF_LIGHT / (2 * s.waveform.bandwidth)


@dataclass(frozen=True, eq=False)
class ReceivedBatch:
    """Complex baseband records ``u[rx, tx, n]`` for one snapshot."""

    samples: np.ndarray
    fs: float
    t0: float
    seed: int | None

    def __post_init__(self):
        if self.samples.ndim != 3:
            raise InvalidParameterError("samples must have shape (n_rx, n_tx, n_t)")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) / self.fs


def _check_rate(s: Scenario, fs: float | None) -> float:
    fs = DEFAULT_OVERSAMPLING * s.waveform.bandwidth if fs is None else float(fs)
    if not np.isfinite(fs) or fs < 2 * s.waveform.bandwidth:
        raise InvalidParameterError(f"sampling rate {fs:g} Hz is below 2B = {2 * s.waveform.bandwidth:g} Hz")
    return fs


def _pair_delays(s: Scenario, rho, kind: TargetKind) -> np.ndarray:
    z, y = s.array.pair_grid()
    return distance(TargetModel(kind, DistanceMode.EXACT), rho, z, y)


def _signal(s: Scenario, dist: np.ndarray, times: np.ndarray) -> np.ndarray:
    # exp(-j k r) s(t - r/c) for every pair, shape (n_rx, n_tx, n_t)
    tau = dist[..., None] / SPEED_OF_LIGHT
    return np.exp(-1j * s.k * dist)[..., None] * s.waveform.pulse(times - tau)


def synthesize(s: Scenario, fs: float | None = None, seed: int | None = 0,
               half_window: float = DEFAULT_HALF_WINDOW, centre: float | None = None) -> ReceivedBatch:
    """Noisy received records for the scenario's true range.

    The delayed pulse is evaluated directly at ``t_n - r/c`` from its
    band-limited representation. Noise is circular complex Gaussian with
    per-sample variance ``gamma_n f_s``. The record spans
    ``centre +- half_window / B`` (default centre ``2R/c``).
    """
    fs = _check_rate(s, fs)
    if not half_window > COVERAGE_GUARD:
        raise InvalidParameterError(f"half_window must exceed {COVERAGE_GUARD} (units of 1/B)")
    centre = 2 * s.R / SPEED_OF_LIGHT if centre is None else float(centre)
    half = int(np.ceil(half_window * fs / s.waveform.bandwidth))
    t0 = centre - half / fs
    times = t0 + np.arange(2 * half + 1) / fs
    samples = s.xi * _signal(s, _pair_delays(s, s.R, s.target.kind), times)
    if s.gamma_n > 0:
        rng = np.random.default_rng(seed)
        sigma = np.sqrt(s.gamma_n * fs / 2)
        samples = samples + sigma * (rng.standard_normal(samples.shape)
                                     + 1j * rng.standard_normal(samples.shape))
    return ReceivedBatch(samples, fs, t0, seed)


def _check_coverage(batch: ReceivedBatch, s: Scenario, delays: np.ndarray):
    guard = COVERAGE_GUARD / s.waveform.bandwidth
    first, last = batch.t0, batch.t0 + (batch.n_samples - 1) / batch.fs
    if np.min(delays) < first + guard or np.max(delays) > last - guard:
        raise WindowCoverageError(
            f"hypothesised delays [{np.min(delays):.6g}, {np.max(delays):.6g}] s leave the "
            f"record [{first:.6g}, {last:.6g}] s minus a {guard:.3g} s guard")


def _hypothesis_kind(s: Scenario, hypothesis) -> TargetKind:
    return s.target.kind if hypothesis is None else TargetKind(hypothesis)


def ml_statistic(batch: ReceivedBatch, s: Scenario, rho, hypothesis=None):
    """``|sum_pairs int u mu_rho^* dt| / sqrt(sum_pairs int |mu_rho|^2 dt)``.

    Evaluated directly with the rectangle rule. ``hypothesis`` selects the
    target model of ``mu_rho`` (defaults to the scenario's target).
    """
    kind = _hypothesis_kind(s, hypothesis)
    rhos = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(~(rhos > 0)):
        raise InvalidParameterError("hypothesised ranges must be positive")
    times = batch.times
    out = np.empty(rhos.size)
    for i, r in enumerate(rhos):
        dist = _pair_delays(s, r, kind)
        _check_coverage(batch, s, dist / SPEED_OF_LIGHT)
        mu = _signal(s, dist, times)
        num = np.vdot(mu, batch.samples) / batch.fs
        den = np.sqrt(np.sum(np.abs(mu) ** 2) / batch.fs)
        out[i] = abs(num) / den
    return float(out[0]) if np.ndim(rho) == 0 else out


class MatchedFilterBank:
    """Per-pair pulse correlations on a fine lag grid for fast statistic evaluation.

    Valid for hypotheses in ``[rho_min, rho_max]``. Build once per record
    timing; :meth:`correlate` then costs one matrix product per batch.
    """

    def __init__(self, s: Scenario, fs: float, t0: float, n_samples: int,
                 rho_min: float, rho_max: float, hypothesis=None,
                 polyphase: int = BANK_POLYPHASE):
        if not 0 < rho_min < rho_max:
            raise InvalidParameterError("need 0 < rho_min < rho_max")
        self.scenario = s
        self.kind = _hypothesis_kind(s, hypothesis)
        self.fs, self.t0, self.n_samples = float(fs), float(t0), int(n_samples)
        self.rho_min, self.rho_max = float(rho_min), float(rho_max)

        lo = np.min(_pair_delays(s, rho_min, self.kind)) / SPEED_OF_LIGHT
        hi = np.max(_pair_delays(s, rho_max, self.kind)) / SPEED_OF_LIGHT
        times = t0 + np.arange(n_samples) / fs
        guard = COVERAGE_GUARD / s.waveform.bandwidth
        if lo < times[0] + guard or hi > times[-1] - guard:
            raise WindowCoverageError("search interval is not covered by the record")
        step = 1.0 / (polyphase * fs)
        lags = np.arange(lo - 3 * step, hi + 3.5 * step, step)
        self.lags = lags
        self._templates = np.conj(s.waveform.pulse(times[:, None] - lags[None, :])) / fs
        energy = np.sum(np.abs(self._templates) ** 2, axis=0) * fs
        self._energy = CubicSpline(lags, energy)
        self._pair_index = np.arange(s.array.n_pairs)

    @classmethod
    def for_batch(cls, batch: ReceivedBatch, s: Scenario, rho_min, rho_max, hypothesis=None):
        return cls(s, batch.fs, batch.t0, batch.n_samples, rho_min, rho_max, hypothesis)

    def correlate(self, batch: ReceivedBatch) -> "BankOutput":
        if batch.n_samples != self.n_samples or batch.fs != self.fs or batch.t0 != self.t0:
            raise InvalidParameterError("batch timing differs from the bank's")
        flat = batch.samples.reshape(-1, batch.n_samples)
        outputs = flat @ self._templates          # (n_pairs, n_lags)
        spline = CubicSpline(self.lags, outputs.T, axis=0)
        return BankOutput(self, spline.c)

    def _locate(self, tau):
        idx = np.clip(np.searchsorted(self.lags, tau) - 1, 0, self.lags.size - 2)
        return idx, tau - self.lags[idx]


@dataclass(eq=False)
class BankOutput:
    bank: MatchedFilterBank
    coeffs: np.ndarray = field(repr=False)

    def statistic(self, rho):
        """Interpolated ``Lambda(rho)``; ``rho`` must lie in the bank's interval."""
        b = self.bank
        s = b.scenario
        rhos = np.atleast_1d(np.asarray(rho, dtype=float))
        tol = 1e-9 * b.rho_max
        if np.any(rhos < b.rho_min - tol) or np.any(rhos > b.rho_max + tol):
            raise WindowCoverageError("hypothesis outside the matched-filter bank interval")
        out = np.empty(rhos.size)
        for i, r in enumerate(rhos):
            dist = _pair_delays(s, r, b.kind).ravel()
            tau = dist / SPEED_OF_LIGHT
            idx, dx = b._locate(tau)
            c = self.coeffs[:, idx, b._pair_index]
            y = ((c[0] * dx + c[1]) * dx + c[2]) * dx + c[3]
            num = np.sum(np.exp(1j * s.k * dist) * y)
            den = np.sqrt(np.sum(b._energy(tau)))
            out[i] = abs(num) / den
        return float(out[0]) if np.ndim(rho) == 0 else out


@dataclass(frozen=True)
class SearchGrid:
    """Prior interval for the range search; ``step`` defaults to ``c / (4B)``."""

    rho_min: float
    rho_max: float
    step: float | None = None

    def __post_init__(self):
        if not (0 < self.rho_min < self.rho_max) or not np.isfinite(self.rho_max):
            raise InvalidParameterError(f"search grid needs 0 < rho_min < rho_max, got "
                                        f"[{self.rho_min!r}, {self.rho_max!r}]")
        if self.step is not None and not self.step > 0:
            raise InvalidParameterError("grid step must be positive")

    @classmethod
    def around(cls, s: Scenario, lobes: float = 5.0) -> "SearchGrid":
        """``R +- lobes`` main-lobe widths, clipped to positive ranges."""
        half = lobes * main_lobe_width(s)
        return cls(max(s.R - half, 1e-3 * s.R), s.R + half)

    def points(self, s: Scenario) -> np.ndarray:
        step = coarse_step(s) if self.step is None else self.step
        n = max(3, int(np.ceil((self.rho_max - self.rho_min) / step)) + 1)
        return np.linspace(self.rho_min, self.rho_max, n)


@dataclass(frozen=True)
class EstimationResult:
    r_hat: float
    lambda_peak: float
    boundary: bool
    grid_rho: np.ndarray = field(repr=False)
    grid_lambda: np.ndarray = field(repr=False)


def _refine(output: BankOutput, rho: np.ndarray, i: int, resolution: float) -> tuple[float, float]:
    def neg(r):
        return -output.statistic(r)

    bracket = (rho[i - 1], rho[i], rho[i + 1])
    tol = resolution / (2 * abs(rho[i]))
    res = minimize_scalar(neg, bracket=bracket, method="golden", tol=tol)
    r = float(np.clip(res.x, rho[i - 1], rho[i + 1]))
    return r, float(-neg(r))


def estimate_range(batch: ReceivedBatch, s: Scenario, grid: SearchGrid, hypothesis=None,
                   bank: MatchedFilterBank | None = None) -> EstimationResult:
    """Coarse grid search at ``c/(4B)`` followed by golden-section refinement.

    A maximum on the first or last grid point is returned unrefined with
    ``boundary`` set.
    """
    rho = grid.points(s)
    if bank is None:
        bank = MatchedFilterBank.for_batch(batch, s, rho[0], rho[-1], hypothesis)
    output = bank.correlate(batch)
    values = output.statistic(rho)
    i = int(np.argmax(values))
    if i == 0 or i == rho.size - 1:
        return EstimationResult(float(rho[i]), float(values[i]), True, rho, values)
    r_hat, peak = _refine(output, rho, i, refinement_resolution(s))
    if peak < values[i]:
        r_hat, peak = float(rho[i]), float(values[i])
    return EstimationResult(r_hat, peak, False, rho, values)


@dataclass(frozen=True)
class MonteCarloResult:
    estimates: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    rmse: float
    bias: float
    crb: float
    ratio: float | None
    rmse_gated: float
    ratio_gated: float | None
    outlier_fraction: float
    boundary_failures: int
    resolution: float
    seed: int

    def summary(self) -> dict:
        def clean(v):
            return None if v is None or not np.isfinite(v) else float(v)
        return {"trials": int(self.estimates.size), "rmse": clean(self.rmse), "bias": clean(self.bias),
                "crb": clean(self.crb), "ratio": clean(self.ratio),
                "rmse_gated": clean(self.rmse_gated), "ratio_gated": clean(self.ratio_gated),
                "outlier_fraction": float(self.outlier_fraction),
                "boundary_failures": int(self.boundary_failures),
                "resolution": float(self.resolution), "seed": int(self.seed)}


def monte_carlo(s: Scenario, trials: int, fs: float | None = None, grid: SearchGrid | None = None,
                seed: int = 0, half_window: float = DEFAULT_HALF_WINDOW,
                hypothesis=None) -> MonteCarloResult:
    """Repeat synthesis and estimation; trial ``t`` uses seed ``seed ^ t``.

    Errors beyond ``3 c/(2B)`` count as outliers and are excluded from the
    gated RMSE. The CRB is the exact-sum bound (zero when noise-free).
    """
    if int(trials) != trials or trials < 1:
        raise InvalidParameterError("trials must be a positive integer")
    if int(seed) != seed or seed < 0:
        raise InvalidParameterError("seed must be a non-negative integer")
    seed = int(seed)
    fs = _check_rate(s, fs)
    grid = SearchGrid.around(s) if grid is None else grid
    rho = grid.points(s)

    bank = None
    estimates = np.empty(int(trials))
    boundary = 0
    for t in range(int(trials)):
        batch = synthesize(s, fs, seed ^ t, half_window)
        if bank is None:
            bank = MatchedFilterBank.for_batch(batch, s, rho[0], rho[-1], hypothesis)
        res = estimate_range(batch, s, grid, hypothesis, bank)
        estimates[t] = res.r_hat
        boundary += res.boundary

    errors = estimates - s.R
    rmse = float(np.sqrt(np.mean(errors ** 2)))
    crb = 0.0 if s.gamma_n == 0 else crb_range(s, CrbMethod.EXACT_SUM).crb
    inliers = np.abs(errors) <= OUTLIER_GATE * main_lobe_width(s)
    rmse_gated = float(np.sqrt(np.mean(errors[inliers] ** 2))) if inliers.any() else float("nan")
    root = np.sqrt(crb)
    return MonteCarloResult(estimates, errors, rmse, float(np.mean(errors)), float(crb),
                            rmse / root if root > 0 else None, rmse_gated,
                            rmse_gated / root if root > 0 else None,
                            float(1.0 - inliers.mean()), boundary,
                            refinement_resolution(s), seed)


def write_trials_csv(result: MonteCarloResult, path, header: list[str] | None = None) -> None:
    """Columns trial, r_hat, error; optional ``#`` header lines first."""
    with open(Path(path), "w", newline="") as fh:
        for line in header or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["trial", "r_hat", "error"])
        for t, (r, e) in enumerate(zip(result.estimates, result.errors)):
            writer.writerow([t, repr(float(r)), repr(float(e))])


def write_summary_json(result: MonteCarloResult, path, meta: dict | None = None) -> None:
    payload = {"meta": meta or {}, "summary": result.summary()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
