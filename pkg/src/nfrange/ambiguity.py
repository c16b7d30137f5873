"""Normalised ambiguity functions of the maximum-likelihood range estimator.

All ``chi_*`` functions accept a scalar or an array of hypothesised ranges
``rho``. Scalars return an :class:`AmbiguitySample`; arrays go through
:func:`ambiguity_surface`.
"""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (AssumptionWarning, InvalidParameterError,
                     UnsupportedConfigurationError)
from .geometry import (SPEED_OF_LIGHT, ArrayTag, DistanceMode, TargetKind,
                       TargetModel, distance_excess)
from .scenario import Config, Scenario
from .special import fresnel_ratio, sinc

_BLOCK_ELEMENTS = 1 << 21


class AmbiguityMethod(enum.Enum):
    EXACT = "exact"          # full per-pair sum with exact distances
    PRODUCT = "product"      # waveform factor times Fresnel phase sum
    ANALYTIC = "analytic"    # waveform factor times Fresnel-integral closed form
    MISMATCH = "mismatch"    # ET truth, PT hypothesis, SIMO closed form


@dataclass(frozen=True)
class AmbiguitySample:
    rho: float
    chi_total: float
    chi_waveform: float | None
    chi_phase: float | None
    method: AmbiguityMethod


def _rho_array(rho):
    arr = np.atleast_1d(np.asarray(rho, dtype=float))
    if arr.ndim != 1 or np.any(~(arr > 0)) or not np.all(np.isfinite(arr)):
        raise InvalidParameterError("hypothesised ranges must be positive and finite")
    return arr


def _pair_mean(s: Scenario, rho: np.ndarray, term) -> np.ndarray:
    """Mean over antenna pairs of ``term(rho, z, y)``, blocked to bound memory."""
    z_all, y = s.array.tx, s.array.rx[None, :, None]
    n_pairs = s.array.n_pairs
    out = np.zeros(rho.size, dtype=complex)
    tx_block = max(1, min(z_all.size, _BLOCK_ELEMENTS // max(1, y.size)))
    rho_block = max(1, _BLOCK_ELEMENTS // (tx_block * y.size))
    for i in range(0, rho.size, rho_block):
        r = rho[i:i + rho_block, None, None]
        acc = np.zeros(r.shape[0], dtype=complex)
        for j in range(0, z_all.size, tx_block):
            z = z_all[None, None, j:j + tx_block]
            acc += term(r, z, y).sum(axis=(1, 2))
        out[i:i + rho_block] = acc / n_pairs
    return out


def _hypothesis(s: Scenario, hypothesis, mode: DistanceMode) -> tuple[TargetModel, TargetModel]:
    kind = s.target.kind if hypothesis is None else TargetKind(hypothesis)
    return TargetModel(kind, mode), TargetModel(s.target.kind, mode)


def _difference(hyp: TargetModel, truth: TargetModel, R: float, r, z, y):
    # hypothesised minus true round-trip distance, free of cancellation
    return 2.0 * (r - R) + (distance_excess(hyp, r, z, y) - distance_excess(truth, R, z, y))


def _exact_values(s: Scenario, rho: np.ndarray, hypothesis=None) -> np.ndarray:
    hyp, truth = _hypothesis(s, hypothesis, DistanceMode.EXACT)
    k, w = s.k, s.waveform

    def term(r, z, y):
        delta = _difference(hyp, truth, s.R, r, z, y)
        return np.exp(1j * k * delta) * w.autocorrelation(delta / SPEED_OF_LIGHT)

    return np.abs(_pair_mean(s, rho, term)) / w.energy


def _phase_values(s: Scenario, rho: np.ndarray, hypothesis=None) -> np.ndarray:
    hyp, truth = _hypothesis(s, hypothesis, DistanceMode.FRESNEL)
    k = s.k

    def term(r, z, y):
        return np.exp(1j * k * _difference(hyp, truth, s.R, r, z, y))

    return np.minimum(np.abs(_pair_mean(s, rho, term)), 1.0)


def waveform_factor(s: Scenario, rho) -> np.ndarray:
    """``|C(2 (rho - R) / c)| / E_c``."""
    rho = np.asarray(rho, dtype=float)
    tau = 2.0 * (rho - s.R) / SPEED_OF_LIGHT
    return np.minimum(np.abs(s.waveform.autocorrelation(tau)) / s.waveform.energy, 1.0)


def _warn_assumptions(s: Scenario):
    if not s.a1_holds:
        warnings.warn(f"R = {s.R:g} m is below 1.2 D = {1.2 * s.array.aperture:g} m; "
                      "Fresnel distances may be inaccurate", AssumptionWarning, stacklevel=3)
    if not s.a2_holds:
        bound = s.rayleigh_distance * s.waveform.bandwidth / s.fc
        warnings.warn(f"R = {s.R:g} m is below R_D B / f_c = {bound:g} m; "
                      "the waveform term is not pair independent", AssumptionWarning, stacklevel=3)


def beta_param(rho, R, rayleigh):
    """``sqrt(R_D |1/rho - 1/R|)``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)) or not R > 0 or rayleigh < 0:
        raise InvalidParameterError("beta_param needs rho > 0, R > 0 and R_D >= 0")
    out = np.sqrt(rayleigh * np.abs(1.0 / rho - 1.0 / R))
    return float(out) if out.ndim == 0 else out


def gamma_param(rho, R, rayleigh):
    """Mismatch counterpart of :func:`beta_param`: ``sqrt(R_D |2/rho - 1/R|)``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)) or not R > 0 or rayleigh < 0:
        raise InvalidParameterError("gamma_param needs rho > 0, R > 0 and R_D >= 0")
    out = np.sqrt(rayleigh * np.abs(2.0 / rho - 1.0 / R))
    return float(out) if out.ndim == 0 else out


def _chi_single(beta):
    # |2 F(beta/2) / beta| for a uniform line array
    return np.abs(fresnel_ratio(np.asarray(beta) / 2.0))


def _chi_cross(beta):
    # |2 F(b)/b - exp(j pi b^2/4) sinc(b^2/4)| for two uniform arrays of equal size
    b = np.asarray(beta, dtype=float)
    q = b * b / 4.0
    return np.abs(2.0 * fresnel_ratio(b) - np.exp(1j * np.pi * q) * sinc(q))


def chi_phase_analytic(config, beta):
    """Closed-form phase ambiguity as a function of ``beta`` for a tagged config."""
    config = Config.parse(config)
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise InvalidParameterError("beta must be finite and non-negative")
    if config is Config.PT_SIMO:
        out = _chi_single(b)
    elif config is Config.PT_MIMO:
        out = _chi_single(b) ** 2
    elif config is Config.ET_SIMO:
        out = _chi_single(b / np.sqrt(2.0))
    else:
        out = _chi_cross(b / np.sqrt(2.0))
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


def _surface(s: Scenario, rho: np.ndarray, method: AmbiguityMethod, hypothesis=None):
    if method is AmbiguityMethod.EXACT:
        total = _exact_values(s, rho, hypothesis)
        return total, None, None
    if method is AmbiguityMethod.PRODUCT:
        _warn_assumptions(s)
        wf = waveform_factor(s, rho)
        ph = _phase_values(s, rho, hypothesis)
        return wf * ph, wf, ph
    if method is AmbiguityMethod.ANALYTIC:
        _warn_assumptions(s)
        wf = waveform_factor(s, rho)
        ph = chi_phase_analytic(s.config, beta_param(rho, s.R, s.rayleigh_distance))
        return wf * ph, wf, np.atleast_1d(ph)
    if method is AmbiguityMethod.MISMATCH:
        if s.array.tag is not ArrayTag.SIMO:
            raise UnsupportedConfigurationError("the mismatch closed form is derived for SIMO arrays only")
        if s.target.kind is not TargetKind.ET:
            raise UnsupportedConfigurationError("the mismatch closed form assumes an ET truth")
        wf = waveform_factor(s, rho)
        gam = gamma_param(rho, s.R, s.rayleigh_distance)
        ph = np.atleast_1d(chi_phase_analytic(Config.PT_SIMO, np.asarray(gam) / np.sqrt(2.0)))
        return wf * ph, wf, ph
    raise InvalidParameterError(f"unknown method {method!r}")


def _sample(s, rho, method, hypothesis=None) -> AmbiguitySample:
    r = _rho_array(rho)
    if r.size != 1:
        raise InvalidParameterError("expected a single rho; use ambiguity_surface for grids")
    total, wf, ph = _surface(s, r, method, hypothesis)
    return AmbiguitySample(float(r[0]), float(np.atleast_1d(total)[0]),
                           None if wf is None else float(np.atleast_1d(wf)[0]),
                           None if ph is None else float(np.atleast_1d(ph)[0]), method)


def chi_exact(s: Scenario, rho, hypothesis=None) -> AmbiguitySample:
    """Full ambiguity with exact distances and the waveform autocorrelation per pair.

    ``hypothesis`` optionally evaluates the hypothesised distances with a
    different target kind than the truth (model mismatch).
    """
    return _sample(s, rho, AmbiguityMethod.EXACT, hypothesis)


def chi_phase(s: Scenario, rho, hypothesis=None):
    """Phase-only ambiguity ``|mean exp(j k (rho~ - r~))|`` with Fresnel distances."""
    r = _rho_array(rho)
    vals = _phase_values(s, r, hypothesis)
    return float(vals[0]) if np.ndim(rho) == 0 else vals


def chi_product(s: Scenario, rho) -> AmbiguitySample:
    """Waveform factor times the Fresnel phase ambiguity.

    Warns with :class:`AssumptionWarning` when the scenario is outside the
    regime where the factorisation is expected to hold.
    """
    return _sample(s, rho, AmbiguityMethod.PRODUCT)


def chi_analytic(s: Scenario, rho) -> AmbiguitySample:
    return _sample(s, rho, AmbiguityMethod.ANALYTIC)


def chi_mismatch(s: Scenario, rho) -> AmbiguitySample:
    """ET truth estimated with PT hypotheses, SIMO closed form.

    The phase factor peaks at ``rho = 2R`` while the waveform factor still
    peaks at ``rho = R``.
    """
    return _sample(s, rho, AmbiguityMethod.MISMATCH)


def ambiguity_surface(s: Scenario, rho_grid, method=AmbiguityMethod.EXACT,
                      hypothesis=None) -> list[AmbiguitySample]:
    """Evaluate one method over an increasing grid of hypothesised ranges."""
    method = AmbiguityMethod(method)
    rho = np.asarray(rho_grid, dtype=float)
    if rho.ndim != 1 or rho.size == 0:
        raise InvalidParameterError("rho grid must be a non-empty 1-D sequence")
    if np.any(np.diff(rho) <= 0):
        raise InvalidParameterError("rho grid must be strictly increasing")
    rho = _rho_array(rho)
    total, wf, ph = _surface(s, rho, method, hypothesis)
    return [AmbiguitySample(float(r), float(t),
                            None if wf is None else float(wf[i]),
                            None if ph is None else float(ph[i]), method)
            for i, (r, t) in enumerate(zip(rho, total))]


def surface_array(samples: list[AmbiguitySample], field: str = "chi_total") -> np.ndarray:
    return np.array([np.nan if getattr(p, field) is None else getattr(p, field) for p in samples])


def write_surface_csv(samples: list[AmbiguitySample], path) -> None:
    """CSV with columns rho, chi_total, chi_waveform, chi_phase, method."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rho", "chi_total", "chi_waveform", "chi_phase", "method"])
        for p in samples:
            writer.writerow([repr(p.rho), repr(p.chi_total),
                             "" if p.chi_waveform is None else repr(p.chi_waveform),
                             "" if p.chi_phase is None else repr(p.chi_phase),
                             p.method.value])
