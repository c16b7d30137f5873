"""Baseband waveforms described by their power spectrum.

A waveform is stored as ``|S(f)|**2`` on a uniform grid covering
``[-B/2, B/2]``. The autocorrelation ``C(tau)`` and the time-domain pulse
``s(t)`` are derived from that single spectrum, so the spectral moments and
the lag-domain quantities never disagree.

The cardinal sine keeps closed forms for ``C(tau)`` and ``s(t)``; only its
spectral moments go through quadrature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import InvalidParameterError
from .special import sinc

DEFAULT_SPECTRUM_POINTS = 4096
DEFAULT_LAG_OVERSAMPLING = 16
DEFAULT_LAG_SPAN = 64  # tabulated support of C(tau), in units of 1/B


class WaveformKind(enum.Enum):
    CARDINAL_SINE = "sinc"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class Waveform:
    """Immutable baseband waveform.

    Attributes:
        kind: closed-form cardinal sine or tabulated custom spectrum.
        bandwidth: two-sided bandwidth ``B`` in Hz; the spectrum lives in
            ``[-B/2, B/2]``.
        energy: ``E_c = C(0)``.
        freqs: uniform frequency grid (Hz).
        psd: ``|S(f)|**2`` sampled on ``freqs``.
    """

    kind: WaveformKind
    bandwidth: float
    energy: float
    freqs: np.ndarray = field(repr=False)
    psd: np.ndarray = field(repr=False)
    lag_step: float = field(default=0.0, repr=False)
    _acf: CubicSpline | None = field(default=None, repr=False)
    _pulse: CubicSpline | None = field(default=None, repr=False)
    _support: float = field(default=np.inf, repr=False)

    @property
    def support(self) -> float:
        """Half-width of the tabulated lag / time support (inf for closed forms)."""
        return self._support

    def spectrum(self, f):
        """``|S(f)|**2``, linearly interpolated, zero outside the grid."""
        return np.interp(f, self.freqs, self.psd, left=0.0, right=0.0)

    def autocorrelation(self, tau):
        """``C(tau) = int s(t) s*(t - tau) dt``.

        Closed form for the cardinal sine; cubic interpolation of the lag
        table otherwise, zero beyond the tabulated support.
        """
        tau = np.asarray(tau, dtype=float)
        if self.kind is WaveformKind.CARDINAL_SINE:
            out = np.asarray(self.energy * sinc(self.bandwidth * tau) + 0j)
        else:
            mag = np.abs(tau)
            out = np.where(mag <= self._support, self._acf(np.minimum(mag, self._support)), 0.0)
            out = np.where(tau < 0, np.conj(out), out)
            out = np.where(tau == 0, self.energy + 0j, out)
        if out.ndim == 0:
            return complex(out)
        return out

    def pulse(self, t):
        """Time-domain baseband pulse ``s(t)``, centred at ``t = 0``."""
        t = np.asarray(t, dtype=float)
        if self.kind is WaveformKind.CARDINAL_SINE:
            return np.sqrt(self.energy * self.bandwidth) * sinc(self.bandwidth * t) + 0j
        inside = np.abs(t) <= self._support
        return np.where(inside, self._pulse(np.clip(t, -self._support, self._support)), 0.0)

    @property
    def central_frequency(self) -> float:
        return central_frequency(self)

    @property
    def rms_bandwidth(self) -> float:
        return rms_bandwidth(self)


def _check_positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")


def make_cardinal_sine(bandwidth: float, energy: float = 1.0,
                       n_points: int = DEFAULT_SPECTRUM_POINTS) -> Waveform:
    """Waveform with a flat spectrum ``E_c/B`` on ``[-B/2, B/2]``.

    ``C(tau) = E_c sinc(B tau)`` and ``s(t) = sqrt(E_c B) sinc(B t)``.
    """
    _check_positive("bandwidth", bandwidth)
    _check_positive("energy", energy)
    if n_points < 2:
        raise InvalidParameterError("n_points must be >= 2")
    freqs = np.linspace(-bandwidth / 2, bandwidth / 2, n_points)
    psd = np.full(n_points, energy / bandwidth)
    return Waveform(WaveformKind.CARDINAL_SINE, float(bandwidth), float(energy), freqs, psd)


def _fourier_table(freqs, weights, values, lags, block=256):
    # int values(f) exp(j 2 pi f tau) df, trapezoid weights, blocked over lags
    out = np.empty(lags.size, dtype=complex)
    wv = weights * values
    for i in range(0, lags.size, block):
        ph = np.exp(2j * np.pi * np.outer(lags[i:i + block], freqs))
        out[i:i + block] = ph @ wv
    return out


def _trapezoid_weights(freqs):
    h = np.diff(freqs)
    w = np.zeros_like(freqs)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def make_custom(freqs, psd, n_points: int | None = None,
                lag_oversampling: int = DEFAULT_LAG_OVERSAMPLING,
                lag_span: float = DEFAULT_LAG_SPAN) -> Waveform:
    """Build a waveform from a tabulated power spectrum ``|S(f)|**2``.

    The bandwidth is ``2 max|f|`` over the grid. Non-uniform grids (or an
    explicit ``n_points``) are resampled onto a uniform grid spanning
    ``[-B/2, B/2]``. The pulse is taken with zero spectral phase,
    ``S(f) = sqrt(|S(f)|**2)``.

    ``C(tau)`` and ``s(t)`` are tabulated on a lag grid of step
    ``1/(lag_oversampling * B)`` over ``|tau| <= lag_span / B``.
    """
    freqs = np.asarray(freqs, dtype=float)
    psd = np.asarray(psd, dtype=float)
    if freqs.ndim != 1 or freqs.shape != psd.shape or freqs.size < 2:
        raise InvalidParameterError("freqs and psd must be 1-D arrays of equal length >= 2")
    if np.any(np.diff(freqs) <= 0):
        raise InvalidParameterError("frequency grid must be strictly increasing")
    if np.any(psd < 0) or not np.all(np.isfinite(psd)):
        raise InvalidParameterError("power spectrum must be finite and non-negative")
    bandwidth = 2.0 * float(np.max(np.abs(freqs)))
    _check_positive("bandwidth", bandwidth)

    steps = np.diff(freqs)
    uniform = np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)
    if n_points is not None or not uniform:
        n = n_points or DEFAULT_SPECTRUM_POINTS
        grid = np.linspace(-bandwidth / 2, bandwidth / 2, n)
        psd = np.interp(grid, freqs, psd, left=0.0, right=0.0)
        freqs = grid

    weights = _trapezoid_weights(freqs)
    energy = float(weights @ psd)
    _check_positive("waveform energy", energy)

    lag_step = 1.0 / (lag_oversampling * bandwidth)
    n_half = int(np.ceil(lag_span * lag_oversampling))
    pos_lags = np.arange(n_half + 1) * lag_step
    acf_pos = _fourier_table(freqs, weights, psd, pos_lags)
    acf_pos[0] = energy
    lags = np.concatenate([-pos_lags[:0:-1], pos_lags])
    acf = np.concatenate([np.conj(acf_pos[:0:-1]), acf_pos])
    pulse = _fourier_table(freqs, weights, np.sqrt(psd), lags)
    support = float(pos_lags[-1])
    return Waveform(WaveformKind.CUSTOM, bandwidth, energy, freqs, psd, lag_step,
                    CubicSpline(lags, acf), CubicSpline(lags, pulse), support)


def load_spectrum(path, **kwargs) -> Waveform:
    """Read a two-column text file (frequency in Hz, ``|S(f)|**2``).

    Lines starting with ``#`` are ignored.
    """
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise InvalidParameterError(f"{path}: expected two columns, got {data.shape[1]}")
    order = np.argsort(data[:, 0])
    return make_custom(data[order, 0], data[order, 1], **kwargs)


def central_frequency(w: Waveform) -> float:
    """First spectral moment ``f_M = (1/E_c) int f |S(f)|^2 df``."""
    return float(trapezoid(w.freqs * w.psd, w.freqs) / w.energy)


def rms_bandwidth(w: Waveform) -> float:
    """``B_RMS = sqrt((1/E_c) int (f - f_M)^2 |S(f)|^2 df)``."""
    fm = central_frequency(w)
    var = trapezoid((w.freqs - fm) ** 2 * w.psd, w.freqs) / w.energy
    return float(np.sqrt(max(var, 0.0)))


def autocorrelation(w: Waveform, tau):
    return w.autocorrelation(tau)
