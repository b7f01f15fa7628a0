"""
Effective- and group-index models for the quasi-TM fundamental mode.

Each wavelength band (signal, pump, sum-frequency) carries its own short
polynomial in (λ - λ_c), valid over a few nm around the band center:

    n_eff(λ) = Σ_k c_k (λ - λ_c)^k          k = 0..4
    n_g(λ)   = n_eff(λ) - λ · dn_eff/dλ

The ring resonance condition m = 2πR·n_eff/λ is inverted by
``resonant_index`` to anchor the models on known azimuthal mode numbers.

Units: wavelengths in nm, radii in µm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

BANDS = ("signal", "pump", "sf")
MAX_DEGREE = 4
DEFAULT_GROUP_INDEX = 2.2


class WavelengthRangeError(ValueError):
    """Query wavelength lies outside a model's validity interval."""


class DegenerateInputError(ValueError):
    """Anchor set cannot determine the requested fit."""


@dataclass(frozen=True)
class WaveguideXSection:
    """Rib waveguide cross-section; all lengths in nm."""

    film_thickness: float
    etch_depth: float
    top_width: float

    def __post_init__(self) -> None:
        if min(self.film_thickness, self.etch_depth, self.top_width) <= 0:
            raise ValueError("cross-section lengths must be positive")
        if self.etch_depth > self.film_thickness:
            raise ValueError(
                f"etch depth {self.etch_depth} nm exceeds film thickness {self.film_thickness} nm"
            )


@dataclass(frozen=True)
class IndexModel:
    """
    Polynomial effective-index model for one band.

    Parameters
    ----------
    band : str
        One of ``"signal"``, ``"pump"``, ``"sf"``.
    center_wavelength : float
        Expansion point λ_c [nm].
    coeffs : tuple of float
        Ascending coefficients c_0..c_d of n_eff in powers of (λ - λ_c)/nm.
    valid_range : tuple of float
        Closed interval (lo, hi) in nm where the model may be evaluated.
    """

    band: str
    center_wavelength: float
    coeffs: tuple[float, ...]
    valid_range: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "valid_range", tuple(float(v) for v in self.valid_range))
        if self.band not in BANDS:
            raise ValueError(f"unknown band {self.band!r}; expected one of {BANDS}")
        if not 1 <= len(self.coeffs) <= MAX_DEGREE + 1:
            raise ValueError(f"polynomial degree must be 0..{MAX_DEGREE}")
        lo, hi = self.valid_range
        if not lo < hi:
            raise ValueError(f"empty valid range {self.valid_range}")
        grid = np.linspace(lo, hi, 257) - self.center_wavelength
        if np.any(P.polyval(grid, self.coeffs) <= 1.0):
            raise ValueError(f"{self.band} model drops to n_eff <= 1 inside {self.valid_range}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])

    def to_dict(self) -> dict:
        return {
            "band": self.band,
            "center_nm": self.center_wavelength,
            "coeffs": list(self.coeffs),
            "range_nm": list(self.valid_range),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexModel":
        return cls(
            band=d["band"],
            center_wavelength=float(d["center_nm"]),
            coeffs=tuple(d["coeffs"]),
            valid_range=tuple(d["range_nm"]),
        )


def _check_range(model: IndexModel, wavelength: float, strict: bool) -> None:
    lo, hi = model.valid_range
    inside = lo < wavelength < hi if strict else lo <= wavelength <= hi
    if not inside:
        raise WavelengthRangeError(
            f"{wavelength} nm outside the {model.band} model's valid range [{lo}, {hi}] nm"
        )


def n_eff(model: IndexModel, wavelength: float) -> float:
    """Effective index at ``wavelength`` [nm]."""
    _check_range(model, wavelength, strict=False)
    return float(P.polyval(wavelength - model.center_wavelength, model.coeffs))


def n_group(model: IndexModel, wavelength: float) -> float:
    """Group index n_eff - λ·dn_eff/dλ, derivative taken from the polynomial."""
    _check_range(model, wavelength, strict=True)
    x = wavelength - model.center_wavelength
    n = P.polyval(x, model.coeffs)
    dn = P.polyval(x, P.polyder(model.coeffs)) if model.degree > 0 else 0.0
    return float(n - wavelength * dn)


class GroupIndex(NamedTuple):
    value: float
    fallback: bool


def group_index_or_default(
    model: IndexModel, wavelength: float, override: float = DEFAULT_GROUP_INDEX
) -> GroupIndex:
    """
    Group index for FSR/Q work.

    A constant model has no dispersion information, so its n_g would equal
    n_eff, which is physically wrong for a high-confinement waveguide. In
    that case ``override`` is returned and ``fallback`` is set.
    """
    if model.is_constant:
        return GroupIndex(float(override), True)
    return GroupIndex(n_group(model, wavelength), False)


def resonant_index(m: int, wavelength: float, radius: float) -> float:
    """
    Effective index that puts azimuthal order ``m`` on resonance.

    Inverts m = 2πR·n_eff/λ with λ in nm and R in µm. The nominal ring
    radius is used as the optical path radius.
    """
    if m <= 0 or wavelength <= 0 or radius <= 0:
        raise ValueError("m, wavelength and radius must all be positive")
    return m * wavelength / (2.0 * math.pi * radius * 1e3)


def calibrate(
    anchors: Iterable[tuple[float, float]],
    degree: int,
    band: str = "signal",
    valid_range: Sequence[float] | None = None,
    pad: float = 50.0,
) -> IndexModel:
    """
    Least-squares polynomial through (λ, n_eff) anchor points.

    The expansion center is the mean anchor wavelength. With exactly
    ``degree + 1`` anchors the fit interpolates. When ``valid_range`` is
    omitted it spans the anchors widened by ``pad`` nm on each side.
    """
    pts = [(float(lam), float(n)) for lam, n in anchors]
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be 0..{MAX_DEGREE}, got {degree}")
    lams = np.array([p[0] for p in pts])
    ns = np.array([p[1] for p in pts])
    if len(np.unique(lams)) != len(lams):
        raise DegenerateInputError("anchor wavelengths must be distinct")
    if len(pts) < degree + 1:
        raise DegenerateInputError(
            f"{len(pts)} anchors cannot determine a degree-{degree} polynomial"
        )
    center = float(lams.mean())
    coeffs = P.polyfit(lams - center, ns, degree)
    if valid_range is None:
        valid_range = (float(lams.min()) - pad, float(lams.max()) + pad)
    return IndexModel(band, center, tuple(coeffs), tuple(valid_range))


# Reference design point: R = 74 µm, modes (550, 875, 1584) at 1533 nm and
# 1064 nm; the SF wavelength follows from energy conservation.
REFERENCE_RADIUS_UM = 74.0
REFERENCE_MODES = {"signal": 550, "pump": 875, "sf": 1584}
REFERENCE_WAVELENGTHS_NM = {
    "signal": 1533.0,
    "pump": 1064.0,
    "sf": 1.0 / (1.0 / 1533.0 + 1.0 / 1064.0),
}


def default_models() -> dict[str, IndexModel]:
    """Constant per-band models anchored on the reference design's mode numbers."""
    return {
        band: calibrate(
            [(lam, resonant_index(REFERENCE_MODES[band], lam, REFERENCE_RADIUS_UM))],
            degree=0,
            band=band,
        )
        for band, lam in REFERENCE_WAVELENGTHS_NM.items()
    }
