"""System-level bookkeeping: loss chains, pump power budget, DFB tuning, noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class Stage:
    name: str
    efficiency: float

    def __post_init__(self) -> None:
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"stage {self.name!r}: efficiency must be in (0, 1], got {self.efficiency}")


@dataclass(frozen=True)
class ChainResult:
    efficiency: float
    loss_db: float


def chain_efficiency(stages: Sequence[Stage]) -> ChainResult:
    """Product of stage efficiencies and the equivalent total loss in dB."""
    if not stages:
        raise ValueError("loss chain is empty")
    eff = math.prod(st.efficiency for st in stages)
    loss_db = sum(-10.0 * math.log10(st.efficiency) for st in stages)
    return ChainResult(eff, loss_db)


@dataclass(frozen=True)
class PowerBudget:
    source_mw: float
    coupling: float
    per_channel_uw: float

    def __post_init__(self) -> None:
        if self.source_mw <= 0 or self.per_channel_uw <= 0 or self.coupling <= 0:
            raise ValueError("budget quantities must be positive")
        if self.coupling > 1.0:
            raise ValueError("coupling efficiency cannot exceed 1")

    @property
    def on_chip_uw(self) -> float:
        return self.source_mw * 1e3 * self.coupling


def channel_count(budget: PowerBudget) -> int:
    """Whole channels the coupled pump power can feed at the per-channel optimum."""
    ratio = budget.on_chip_uw / budget.per_channel_uw
    # guard exact multiples against round-off, e.g. 3.6 mW / 360 µW
    return int(math.floor(ratio * (1.0 + 1e-12)))


@dataclass(frozen=True)
class DfbTuning:
    lambda0: float  # nm at t0
    t0: float  # °C
    slope_pm_per_c: float = 85.5
    t_range: tuple[float, float] = (15.0, 60.0)

    def __post_init__(self) -> None:
        if self.slope_pm_per_c <= 0:
            raise ValueError("tuning slope must be positive")


def dfb_wavelength(tuning: DfbTuning, temperature: float) -> float:
    lo, hi = tuning.t_range
    if not lo <= temperature <= hi:
        raise ValueError(f"temperature {temperature} °C outside safe range [{lo}, {hi}] °C")
    return tuning.lambda0 + tuning.slope_pm_per_c * 1e-3 * (temperature - tuning.t0)


def detuning_temperature(tuning: DfbTuning, shift_nm: float) -> float:
    """Temperature change [°C] that moves the laser by ``shift_nm``."""
    return shift_nm / (tuning.slope_pm_per_c * 1e-3)


@dataclass(frozen=True)
class NoiseModel:
    """
    Pump-induced noise count rate N(P) = c1·P + c2·P² [counts/s, P in W].

    The default is a pure linear law through a single anchor of 7000 cps at
    360 µW. It is an interpolation placeholder, not a fitted trend.
    """

    c1: float = 7000.0 / 360e-6
    c2: float = 0.0

    def rate(self, pump_w: float) -> float:
        return self.c1 * pump_w + self.c2 * pump_w**2

    @classmethod
    def from_anchor(cls, pump_w: float, counts: float) -> "NoiseModel":
        return cls(counts / pump_w, 0.0)
