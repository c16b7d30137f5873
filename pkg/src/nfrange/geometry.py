"""Linear antenna layouts and round-trip propagation distances.

Positions are z-coordinates (metres) along a line parallel to the target.
Two target models are supported: a point target (PT) on the array axis and
an extended planar reflector (ET), each with an exact distance and its
second-order (Fresnel) expansion in the antenna coordinates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, UnsupportedModeError

SPEED_OF_LIGHT = 299_792_458.0


class TargetKind(enum.Enum):
    PT = "pt"
    ET = "et"


class DistanceMode(enum.Enum):
    EXACT = "exact"
    FRESNEL = "fresnel"


class ArrayTag(enum.Enum):
    SIMO = "simo"
    MIMO = "mimo"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TargetModel:
    kind: TargetKind = TargetKind.ET
    distance_mode: DistanceMode = DistanceMode.EXACT

    def with_mode(self, mode: DistanceMode) -> "TargetModel":
        return TargetModel(self.kind, mode)


def make_ula(n: int, aperture: float) -> np.ndarray:
    """``n`` uniformly spaced positions spanning ``[-D/2, D/2]``; ``n = 1`` gives ``[0]``."""
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"number of antennas must be a positive integer, got {n!r}")
    if aperture < 0 or not np.isfinite(aperture):
        raise InvalidParameterError(f"aperture must be non-negative, got {aperture!r}")
    if n == 1:
        return np.zeros(1)
    return np.linspace(-aperture / 2, aperture / 2, int(n))


@dataclass(frozen=True, eq=False)
class ArrayConfig:
    """Transmit and receive positions plus the aperture ``D``.

    Use :meth:`simo`, :meth:`mimo` or :meth:`custom` rather than the raw
    constructor; the tag is what gates the closed-form shortcuts.
    """

    tx: np.ndarray
    rx: np.ndarray
    aperture: float
    tag: ArrayTag

    def __post_init__(self):
        tx = np.atleast_1d(np.asarray(self.tx, dtype=float))
        rx = np.atleast_1d(np.asarray(self.rx, dtype=float))
        if tx.ndim != 1 or rx.ndim != 1 or tx.size < 1 or rx.size < 1:
            raise InvalidParameterError("tx and rx must be non-empty 1-D position lists")
        if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(rx))):
            raise InvalidParameterError("antenna positions must be finite")
        tx.setflags(write=False)
        rx.setflags(write=False)
        object.__setattr__(self, "tx", tx)
        object.__setattr__(self, "rx", rx)
        if self.tag is not ArrayTag.CUSTOM:
            limit = self.aperture / 2 * (1 + 1e-12)
            if max(np.max(np.abs(tx)), np.max(np.abs(rx))) > limit:
                raise InvalidParameterError("antenna positions exceed the aperture D/2")

    @classmethod
    def simo(cls, n_rx: int, aperture: float) -> "ArrayConfig":
        return cls(np.zeros(1), make_ula(n_rx, aperture), float(aperture), ArrayTag.SIMO)

    @classmethod
    def mimo(cls, n_tx: int, n_rx: int, aperture: float) -> "ArrayConfig":
        return cls(make_ula(n_tx, aperture), make_ula(n_rx, aperture), float(aperture), ArrayTag.MIMO)

    @classmethod
    def custom(cls, tx, rx) -> "ArrayConfig":
        tx = np.atleast_1d(np.asarray(tx, dtype=float))
        rx = np.atleast_1d(np.asarray(rx, dtype=float))
        aperture = max(np.ptp(tx), np.ptp(rx))
        return cls(tx, rx, float(aperture), ArrayTag.CUSTOM)

    @property
    def n_tx(self) -> int:
        return self.tx.size

    @property
    def n_rx(self) -> int:
        return self.rx.size

    @property
    def n_pairs(self) -> int:
        return self.tx.size * self.rx.size

    def pair_grid(self):
        """Broadcastable ``(z, y)`` with shape ``(N_r, 1)`` and ``(1, N_t)``."""
        return self.tx[None, :], self.rx[:, None]


def load_layout(path) -> ArrayConfig:
    """Read a custom layout file with ``[tx]`` and ``[rx]`` sections.

    One position in metres per line; blank lines and ``#`` comments are skipped.
    """
    sections = {"tx": [], "rx": []}
    current = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise InvalidParameterError(f"{path}:{lineno}: unknown section {line}")
            continue
        if current is None:
            raise InvalidParameterError(f"{path}:{lineno}: position outside a [tx]/[rx] section")
        try:
            sections[current].append(float(line))
        except ValueError:
            raise InvalidParameterError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not sections["tx"] or not sections["rx"]:
        raise InvalidParameterError(f"{path}: both [tx] and [rx] sections need positions")
    return ArrayConfig.custom(sections["tx"], sections["rx"])


def _check_range(R):
    R = np.asarray(R, dtype=float)
    if np.any(~(R > 0)):
        raise InvalidParameterError("range must be positive")
    return R


def distance(model: TargetModel, R, z, y):
    """Round-trip distance between transmit position ``z`` and receive position ``y``.

    Broadcasts over ``R``, ``z`` and ``y``.
    """
    R = _check_range(R)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if model.kind is TargetKind.PT:
        if model.distance_mode is DistanceMode.EXACT:
            return np.hypot(R, z) + np.hypot(R, y)
        return 2 * R + (z * z + y * y) / (2 * R)
    d = z - y
    if model.distance_mode is DistanceMode.EXACT:
        return np.hypot(2 * R, d)
    return 2 * R + d * d / (4 * R)


def distance_excess(model: TargetModel, R, z, y):
    """``distance - 2R`` without cancellation.

    Differences of round-trip distances at two nearby ranges should be
    formed as ``2 (rho - R) + excess(rho) - excess(R)``; subtracting the full
    distances loses about ``1e-16 R`` metres, which the carrier phase
    ``k r`` amplifies.
    """
    R = _check_range(R)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if model.kind is TargetKind.PT:
        if model.distance_mode is DistanceMode.EXACT:
            return z * z / (np.hypot(R, z) + R) + y * y / (np.hypot(R, y) + R)
        return (z * z + y * y) / (2 * R)
    d = z - y
    if model.distance_mode is DistanceMode.EXACT:
        return d * d / (np.hypot(2 * R, d) + 2 * R)
    return d * d / (4 * R)


def distance_derivative(model: TargetModel, R, z, y):
    """``d r / d R`` for the exact distance models; lies in ``(0, 2]``."""
    if model.distance_mode is not DistanceMode.EXACT:
        raise UnsupportedModeError("range derivatives are only defined for exact distances")
    return 2.0 - derivative_deficit(model, R, z, y)


def derivative_deficit(model: TargetModel, R, z, y):
    """``2 - d r / d R`` computed without cancellation.

    Tends to zero as ``(pos/R)**2``; used wherever differences between pair
    derivatives matter (the near-field CRB term).
    """
    R = _check_range(R)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)

    def one_minus_inv_sqrt(q):
        # 1 - (1+q)^(-1/2)
        return -np.expm1(-0.5 * np.log1p(q))

    if model.kind is TargetKind.PT:
        return one_minus_inv_sqrt((z / R) ** 2) + one_minus_inv_sqrt((y / R) ** 2)
    return 2.0 * one_minus_inv_sqrt(((z - y) / (2 * R)) ** 2)


def rayleigh_distance(aperture: float, fc: float) -> float:
    """``R_D = 2 D**2 / lambda`` with ``lambda = c / f_c``."""
    if aperture < 0 or not np.isfinite(aperture):
        raise InvalidParameterError(f"aperture must be non-negative, got {aperture!r}")
    if not fc > 0 or not np.isfinite(fc):
        raise InvalidParameterError(f"carrier frequency must be positive, got {fc!r}")
    return 2.0 * aperture ** 2 * fc / SPEED_OF_LIGHT


def pair_distances(array: ArrayConfig, model: TargetModel, R) -> np.ndarray:
    """``(N_r, N_t)`` matrix of round-trip distances (extra leading axes follow ``R``)."""
    z, y = array.pair_grid()
    R = np.asarray(R, dtype=float)
    return distance(model, R[..., None, None], z, y)
