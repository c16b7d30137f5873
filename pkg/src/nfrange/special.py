"""Fresnel integral and cardinal sine.

``fresnel(x)`` returns the complex Fresnel integral

    F(x) = int_0^x exp(j*pi*t**2/2) dt = C(x) + j*S(x)

using the normalisation of ``scipy.special.fresnel``.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

from .errors import InvalidParameterError

_SINC_SERIES_CUTOFF = 1e-4


def fresnel(x):
    """Complex Fresnel integral ``C(x) + j S(x)``.

    Accepts scalars or arrays; a scalar input gives a Python ``complex``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("fresnel argument must be finite")
    s, c = _sp.fresnel(arr)
    out = c + 1j * s
    if out.ndim == 0:
        return complex(out)
    return out


def sinc(x):
    """Normalised cardinal sine ``sin(pi x) / (pi x)``.

    Exactly zero at nonzero integers and exactly one at zero.
    """
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    small = np.abs(arr) < _SINC_SERIES_CUTOFF
    px2 = (np.pi * arr[small]) ** 2
    out[small] = 1.0 - px2 / 6.0 + px2 * px2 / 120.0
    big = ~small
    xb = arr[big]
    # reduce to [-1, 1] before sin() so large arguments keep their accuracy
    red = xb - 2.0 * np.round(xb / 2.0)
    vals = np.sin(np.pi * red) / (np.pi * xb)
    vals[xb == np.round(xb)] = 0.0
    out[big] = vals
    if out.ndim == 0:
        return float(out)
    return out


def fresnel_ratio(x):
    """``F(x)/x`` with the removable singularity at ``x = 0`` handled.

    Below 1e-6 the two-term series ``1 + j*pi*x**2/6`` is used.
    """
    arr = np.asarray(x, dtype=float)
    out = np.empty(arr.shape, dtype=complex)
    tiny = np.abs(arr) < 1e-6
    out[tiny] = 1.0 + 1j * np.pi * arr[tiny] ** 2 / 6.0
    xs = arr[~tiny]
    out[~tiny] = fresnel(xs) / xs if xs.size else np.empty(0, dtype=complex)
    if out.ndim == 0:
        return complex(out)
    return out
