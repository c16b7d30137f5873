"""Experiment description shared by the ambiguity, CRB and estimator modules."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, UnsupportedConfigurationError
from .geometry import (SPEED_OF_LIGHT, ArrayConfig, ArrayTag, TargetKind,
                       TargetModel, rayleigh_distance)
from .waveform import Waveform


class Config(enum.Enum):
    """The four target/array combinations that have closed forms."""

    PT_SIMO = "pt-simo"
    PT_MIMO = "pt-mimo"
    ET_SIMO = "et-simo"
    ET_MIMO = "et-mimo"

    @classmethod
    def of(cls, target, tag) -> "Config":
        target = TargetKind(target) if not isinstance(target, TargetKind) else target
        tag = ArrayTag(tag) if not isinstance(tag, ArrayTag) else tag
        if tag is ArrayTag.CUSTOM:
            raise UnsupportedConfigurationError("closed forms exist only for SIMO/MIMO layouts")
        return cls(f"{target.value}-{tag.value}")

    @classmethod
    def parse(cls, value) -> "Config":
        if isinstance(value, Config):
            return value
        try:
            return cls(str(value).lower().replace("_", "-"))
        except ValueError:
            raise UnsupportedConfigurationError(f"unknown configuration {value!r}") from None

    @property
    def target(self) -> TargetKind:
        return TargetKind(self.value.split("-")[0])

    @property
    def tag(self) -> ArrayTag:
        return ArrayTag(self.value.split("-")[1])


@dataclass(frozen=True)
class Scenario:
    """Carrier, true range, complex gain, noise PSD, waveform, array and target.

    ``gamma_n`` is the complex-noise power spectral density; the per-antenna
    SNR is ``|xi|**2 E_c / gamma_n``.
    """

    fc: float
    R: float
    waveform: Waveform
    array: ArrayConfig
    target: TargetModel
    xi: complex = 1.0 + 0j
    gamma_n: float = 1.0

    def __post_init__(self):
        if not (self.fc > 0 and np.isfinite(self.fc)):
            raise InvalidParameterError(f"carrier frequency must be positive, got {self.fc!r}")
        if not (self.R > 0 and np.isfinite(self.R)):
            raise InvalidParameterError(f"range must be positive, got {self.R!r}")
        if not (self.gamma_n >= 0 and np.isfinite(self.gamma_n)):
            raise InvalidParameterError(f"noise PSD must be non-negative, got {self.gamma_n!r}")
        object.__setattr__(self, "xi", complex(self.xi))

    @classmethod
    def from_snr(cls, fc, R, waveform, array, target, snr_db: float, xi: complex = 1.0):
        """Choose ``gamma_n`` so that ``|xi|^2 E_c / gamma_n`` equals ``snr_db``."""
        snr = 10.0 ** (snr_db / 10.0)
        gamma_n = abs(xi) ** 2 * waveform.energy / snr
        return cls(fc, R, waveform, array, target, complex(xi), gamma_n)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc

    @property
    def k(self) -> float:
        return 2 * np.pi * self.fc / SPEED_OF_LIGHT

    @property
    def snr(self) -> float:
        if self.gamma_n == 0:
            return np.inf
        return abs(self.xi) ** 2 * self.waveform.energy / self.gamma_n

    @property
    def rayleigh_distance(self) -> float:
        return rayleigh_distance(self.array.aperture, self.fc)

    @property
    def a1_holds(self) -> bool:
        """Range at least 1.2 apertures."""
        return self.R >= 1.2 * self.array.aperture

    @property
    def a2_holds(self) -> bool:
        """Near-field delay spread stays a small fraction of 1/B."""
        return self.R >= self.rayleigh_distance * self.waveform.bandwidth / self.fc

    @property
    def config(self) -> Config:
        return Config.of(self.target.kind, self.array.tag)
