"""Cramer-Rao bounds on the target range.

The bound combines a near-field phase term ``(eta - beta^2) (f_c + f_M)^2``
with a waveform term ``eta B_RMS^2``::

    CRB = (N_r N_t SNR)^-1 / [(32 pi^2 / c^2) (phase_term + waveform_term)]

``eta`` and ``beta`` are the mean square and the mean of half the range
derivatives of the pair distances. Four routes produce them: exact sums over
the antenna pairs, closed forms in ``u = R/D`` for uniform arrays, the
fourth-order Taylor law ``alpha (D/R)^4 / 11520``, and a brute-force Fisher
information built from finite differences of the signal model.
"""

from __future__ import annotations

import csv
import enum
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (AssumptionWarning, DegenerateScenarioError,
                     InvalidParameterError, NumericalAccuracyError,
                     UnsupportedConfigurationError)
from .geometry import (SPEED_OF_LIGHT, ArrayConfig, DistanceMode, TargetModel,
                       derivative_deficit, pair_distances)
from .scenario import Config, Scenario
from .waveform import central_frequency, rms_bandwidth

TAYLOR_DENOMINATOR = 11520.0

ALPHA = {
    Config.PT_SIMO: 4.0,
    Config.PT_MIMO: 8.0,
    Config.ET_SIMO: 1.0,
    Config.ET_MIMO: 7.0,
}


class CrbMethod(enum.Enum):
    EXACT_SUM = "exact"
    ANALYTIC = "analytic"
    TAYLOR = "taylor"
    NUMERICAL_FIM = "fim"


@dataclass(frozen=True)
class CrbBreakdown:
    """Every intermediate term of a range CRB evaluation.

    ``phase_term`` and ``waveform_term`` are in Hz^2, ``crb`` in m^2. The
    numerical-FIM route leaves the geometry terms as NaN and fills ``fim``.
    """

    eta: float
    crb_beta: float
    nf_geometry_term: float
    phase_term: float
    waveform_term: float
    crb: float
    method: CrbMethod
    fim: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def std(self) -> float:
        return float(np.sqrt(self.crb))

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("fim")
        d["method"] = self.method.value
        return d


class GeometryFactors(NamedTuple):
    eta: float
    crb_beta: float
    nf_geometry_term: float


CSV_FIELDS = ["eta", "crb_beta", "nf_geometry_term", "phase_term", "waveform_term", "crb", "method"]


def eta_beta_exact(array: ArrayConfig, target: TargetModel, R: float) -> GeometryFactors:
    """Mean square and mean of ``0.5 dr/dR`` over all antenna pairs.

    The variance ``eta - beta^2`` is returned as a mean of squared deviations,
    which stays accurate when both moments are close to one.
    """
    if not R > 0:
        raise InvalidParameterError(f"range must be positive, got {R!r}")
    z, y = array.pair_grid()
    half_deficit = 0.5 * derivative_deficit(target.with_mode(DistanceMode.EXACT), R, z, y)
    half_deficit = np.broadcast_to(half_deficit, (array.n_rx, array.n_tx))
    mean_deficit = half_deficit.mean()
    crb_beta = 1.0 - mean_deficit
    nf = float(np.mean((half_deficit - mean_deficit) ** 2))
    eta = nf + crb_beta ** 2
    return GeometryFactors(float(eta), float(crb_beta), nf)


def eta_beta_analytic(config, u: float) -> GeometryFactors:
    """Continuous-aperture closed forms of ``eta`` and ``beta`` as functions of ``u = R/D``."""
    config = Config.parse(config)
    if not (u > 0 and np.isfinite(u)):
        raise InvalidParameterError(f"u = R/D must be positive, got {u!r}")
    x2, x4 = 1.0 / (2 * u), 1.0 / (4 * u)
    if config is Config.PT_SIMO:
        eta = 0.25 + u / 2 * np.arctan(x2) + u * np.arcsinh(x2)
        beta = 0.5 + u * np.arcsinh(x2)
    elif config is Config.PT_MIMO:
        eta = u * np.arctan(x2) + 2 * u * u * np.arcsinh(x2) ** 2
        beta = 2 * u * np.arcsinh(x2)
    elif config is Config.ET_SIMO:
        eta = 4 * u * np.arctan(x4)
        beta = 4 * u * np.arcsinh(x4)
    else:
        eta = 4 * u * np.arctan(x2) - 4 * u * u * np.log1p(x2 * x2)
        # sqrt(1+a) - 1 written as a / (sqrt(1+a) + 1) to dodge cancellation
        beta = 4 * u * np.arcsinh(x2) - 8 * u * u * (x2 * x2) / (np.sqrt(1 + x2 * x2) + 1)
    return GeometryFactors(float(eta), float(beta), float(max(eta - beta ** 2, 0.0)))


def alpha_factor(config) -> float:
    """Coefficient of the ``(D/R)^4 / 11520`` law of the near-field term."""
    try:
        return ALPHA[Config.parse(config)]
    except KeyError:
        raise UnsupportedConfigurationError(f"no alpha factor for {config!r}") from None


def taylor_nf_term(config, u: float) -> float:
    """``alpha (D/R)^4 / 11520``."""
    if not u > 0:
        raise InvalidParameterError("u = R/D must be positive")
    return alpha_factor(config) / (TAYLOR_DENOMINATOR * u ** 4)


def _assemble(s: Scenario, geometry: GeometryFactors, method: CrbMethod) -> CrbBreakdown:
    snr = s.snr
    if not (snr > 0) or not np.isfinite(snr):
        raise InvalidParameterError(f"the CRB needs a finite positive SNR, got {snr!r}")
    fm = central_frequency(s.waveform)
    brms = rms_bandwidth(s.waveform)
    phase_term = geometry.nf_geometry_term * (s.fc + fm) ** 2
    waveform_term = geometry.eta * brms ** 2
    info = phase_term + waveform_term
    if not info > 0:
        raise DegenerateScenarioError("no range information: zero near-field term and zero RMS bandwidth")
    scale = 32 * np.pi ** 2 / SPEED_OF_LIGHT ** 2
    crb = 1.0 / (s.array.n_pairs * snr * scale * info)
    return CrbBreakdown(geometry.eta, geometry.crb_beta, geometry.nf_geometry_term,
                        float(phase_term), float(waveform_term), float(crb), method)


def crb_range(s: Scenario, method=CrbMethod.EXACT_SUM) -> CrbBreakdown:
    """Range CRB through the requested route."""
    method = CrbMethod(method)
    if method is CrbMethod.EXACT_SUM:
        return _assemble(s, eta_beta_exact(s.array, s.target, s.R), method)
    if method is CrbMethod.ANALYTIC:
        return _assemble(s, eta_beta_analytic(s.config, s.R / s.array.aperture), method)
    if method is CrbMethod.TAYLOR:
        return crb_taylor(s)
    return fim_oracle(s)


def crb_taylor(s: Scenario) -> CrbBreakdown:
    """CRB with ``eta = 1`` and the ``alpha (D/R)^4 / 11520`` near-field term."""
    config = s.config
    if not s.a1_holds:
        warnings.warn(f"R = {s.R:g} m is below 1.2 D; the Taylor law is outside its range",
                      AssumptionWarning, stacklevel=2)
    nf = taylor_nf_term(config, s.R / s.array.aperture)
    geometry = GeometryFactors(1.0, float(np.sqrt(max(1.0 - nf, 0.0))), nf)
    return _assemble(s, geometry, CrbMethod.TAYLOR)


def effective_nf_range(config, aperture: float, fc: float, fm: float, brms: float) -> float:
    """Range at which the Taylor near-field term equals the waveform term."""
    alpha = alpha_factor(config)
    if not brms > 0:
        raise InvalidParameterError("B_RMS must be positive (zero gives an unbounded near-field region)")
    if not (aperture > 0 and fc + fm > 0):
        raise InvalidParameterError("aperture and f_c + f_M must be positive")
    return aperture * np.sqrt((fc + fm) / brms) * (alpha / TAYLOR_DENOMINATOR) ** 0.25


def scenario_nf_range(s: Scenario) -> float:
    w = s.waveform
    return effective_nf_range(s.config, s.array.aperture, s.fc, central_frequency(w), rms_bandwidth(w))


# ---------------------------------------------------------------------------
# Numerical Fisher information
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FimSettings:
    """Discretisation of the numerical Fisher-information oracle.

    Attributes:
        oversampling: sampling rate as a multiple of ``B``.
        half_window: time window half-width beyond the delay spread, in ``1/B``.
        step: initial finite-difference step in wavelengths.
        levels: Richardson levels (each halves the step).
        rtol: accepted relative change between the last two Richardson levels.
        min_energy_fraction: minimum captured fraction of ``N_r N_t E_c``.
    """

    oversampling: float = 8.0
    half_window: float = 2000.0
    step: float = 0.04
    levels: int = 5
    rtol: float = 1e-6
    min_energy_fraction: float = 0.999


def _richardson(f, x0, h0, levels):
    """First and second central differences of ``f`` at ``x0``, Richardson-extrapolated.

    Each level halves the step; successive eliminations cancel the
    ``h^2, h^4, ...`` error terms.
    """
    f0 = f(x0)
    d1, d2 = [], []
    h = h0
    for _ in range(levels):
        fp, fn = f(x0 + h), f(x0 - h)
        d1.append((fp - fn) / (2 * h))
        d2.append((fp - 2 * f0 + fn) / (h * h))
        h /= 2
    for m in range(1, levels):
        factor = 4.0 ** m
        d1 = [(factor * d1[i + 1] - d1[i]) / (factor - 1) for i in range(len(d1) - 1)]
        d2 = [(factor * d2[i + 1] - d2[i]) / (factor - 1) for i in range(len(d2) - 1)]
    return f0, d1[0], d2[0]


def _model_signal(s: Scenario, t: np.ndarray, R: float) -> np.ndarray:
    """``exp(-j k r) s(t - r/c)`` for every pair, shape ``(n_pairs, n_t)``."""
    r = pair_distances(s.array, s.target.with_mode(DistanceMode.EXACT), R).reshape(-1, 1)
    return np.exp(-1j * s.k * r) * s.waveform.pulse(t[None, :] - r / SPEED_OF_LIGHT)


def fim_oracle(s: Scenario, settings: FimSettings | None = None) -> CrbBreakdown:
    """Range CRB from a numerically assembled 3x3 Fisher information matrix.

    Parameters are ``(Re xi, Im xi, R)``. The model ``mu(t; R)`` is sampled on
    a uniform grid and differentiated in ``R`` by Richardson-extrapolated
    central differences; time integrals use the rectangle rule. Following the
    expected-Hessian form, the range entry is ``-(2/gamma_n) |xi|^2 Re M`` with
    ``M = sum int mu d2mu*/dR2 dt``, and the cross terms use
    ``N = sum int mu dmu*/dR dt``. The bound is the inverse of the Schur
    complement of the ``xi`` block.

    The step is halved until two successive Richardson tables agree to
    ``settings.rtol``; otherwise :class:`NumericalAccuracyError` is raised.
    """
    settings = settings or FimSettings()
    if not s.gamma_n > 0:
        raise InvalidParameterError("the CRB needs a positive noise PSD")
    if abs(s.xi) == 0:
        raise InvalidParameterError("the CRB needs a nonzero complex gain")
    w = s.waveform
    B = w.bandwidth
    fs = settings.oversampling * B
    r_true = pair_distances(s.array, s.target.with_mode(DistanceMode.EXACT), s.R)
    t_lo = r_true.min() / SPEED_OF_LIGHT - settings.half_window / B
    t_hi = r_true.max() / SPEED_OF_LIGHT + settings.half_window / B
    n = int(np.ceil((t_hi - t_lo) * fs)) + 1
    t = t_lo + np.arange(n) / fs
    dt = 1.0 / fs
    xi = s.xi

    def model(R):
        return _model_signal(s, t, R)

    def information(h0):
        mu, d1, d2 = _richardson(model, s.R, h0, settings.levels)
        energy = float(np.sum(np.abs(mu) ** 2) * dt)
        N = complex(np.sum(mu * np.conj(d1)) * dt)
        M = complex(np.sum(mu * np.conj(d2)) * dt)
        return energy, N, M

    h = settings.step * s.wavelength
    energy, N, M = information(h)
    captured = energy / (s.array.n_pairs * w.energy)
    if captured < settings.min_energy_fraction:
        raise NumericalAccuracyError(f"time window captures only {captured:.6f} of the pulse energy")

    cross = np.array([np.real(np.conj(xi) * N), np.real(1j * np.conj(xi) * N)])
    scale = 2.0 / s.gamma_n
    fim = scale * np.array([
        [energy, 0.0, cross[0]],
        [0.0, energy, cross[1]],
        [cross[0], cross[1], -abs(xi) ** 2 * M.real],
    ])

    def schur(N_, M_):
        c_ = np.array([np.real(np.conj(xi) * N_), np.real(1j * np.conj(xi) * N_)])
        return -abs(xi) ** 2 * M_.real - c_ @ c_ / energy

    info = schur(N, M)
    for _ in range(4):
        h /= 2
        _, N_f, M_f = information(h)
        info_f = schur(N_f, M_f)
        drift = abs(info_f - info) / abs(info_f)
        info = info_f
        if drift <= settings.rtol:
            break
    else:
        raise NumericalAccuracyError(f"finite-difference derivatives did not converge (drift {drift:.2e})")
    if not info > 0:
        raise DegenerateScenarioError("numerical Fisher information for the range is not positive")
    crb = 1.0 / (scale * info)
    nan = float("nan")
    return CrbBreakdown(nan, nan, nan, nan, nan, float(crb), CrbMethod.NUMERICAL_FIM, fim)


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

def write_breakdowns_csv(rows: list[CrbBreakdown], path, extra: dict | None = None) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for b in rows:
            d = b.as_dict()
            writer.writerow([d[k] for k in CSV_FIELDS])


def breakdowns_to_json(rows: list[CrbBreakdown]) -> str:
    def clean(d):
        return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}
    return json.dumps([clean(b.as_dict()) for b in rows], indent=2)
