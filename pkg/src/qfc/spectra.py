"""
Through-port resonance spectra: synthesis, Lorentzian fitting and Q
extraction, plus the wavelength response of the input directional coupler.

A single resonance seen at the through port of its feeding bus has field
transmission

    t(Δ) = 1 - κ_ext/(κ_tot/2 - iΔ),      Δ = ω - ω_0

so that |t|² = 1 - (1 - T_0)/(1 + (2Δ/κ_tot)²) with
T_0 = (1 - 2κ_ext/κ_tot)². The dip depth fixes κ_ext/κ_tot only up to the
choice of branch: (1 + √T_0)/2 when over-coupled, (1 - √T_0)/2 when
under-coupled. The caller must say which.
"""

from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.signal import find_peaks

from .fitting import levenberg_marquardt
from .ring import RingParams

log = logging.getLogger(__name__)

Regime = Literal["over", "under", "critical"]
CRITICAL_SQRT_T0 = 1e-3
SAMPLES_PER_LINEWIDTH = 20
SPAN_LINEWIDTHS = 5.0
TRANSMISSION_EPS = 0.05
DETECT_SIGMA = 10.0


class SamplingError(ValueError):
    """Wavelength grid too coarse or too narrow for the resonance."""


class DipDetectionError(ValueError):
    """No resonance dip stands out of the noise."""


class MultipleDipsError(ValueError):
    """More than one resonance dip is present in the trace."""


@dataclass(frozen=True)
class SpectrumTrace:
    wavelengths: np.ndarray  # nm
    transmission: np.ndarray
    band: str = "signal"

    def __post_init__(self) -> None:
        wl = np.asarray(self.wavelengths, dtype=float)
        tr = np.asarray(self.transmission, dtype=float)
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "transmission", tr)
        if wl.shape != tr.shape or wl.ndim != 1:
            raise ValueError("wavelengths and transmission must be 1-D and equal length")
        if np.any(np.diff(wl) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        if np.any(tr < 0) or np.any(tr > 1 + TRANSMISSION_EPS):
            raise ValueError("transmission must lie in [0, 1 + eps]")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("wavelength_nm,transmission\n")
        for w, t in zip(self.wavelengths, self.transmission):
            buf.write(f"{w:.12g},{t:.9g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, band: str = "signal") -> "SpectrumTrace":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        header = [h.strip() for h in lines[0].split(",")]
        if header != ["wavelength_nm", "transmission"]:
            raise ValueError(f"expected header 'wavelength_nm,transmission', got {lines[0]!r}")
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        return cls(data[:, 0], data[:, 1], band)


@dataclass(frozen=True)
class LineParams:
    """One resonance: center [nm], external and intrinsic decay rates [rad/s]."""

    center: float
    kappa_ext: float
    kappa_0: float

    @classmethod
    def from_q(cls, center: float, q_intrinsic: float, q_loaded: float) -> "LineParams":
        w0 = 2.0 * math.pi * C_LIGHT / (center * 1e-9)
        kappa = w0 / q_loaded
        kappa_0 = w0 / q_intrinsic
        return cls(center, kappa - kappa_0, kappa_0)

    @property
    def kappa_tot(self) -> float:
        return self.kappa_ext + self.kappa_0

    @property
    def q_loaded(self) -> float:
        return 2.0 * math.pi * C_LIGHT / (self.center * 1e-9) / self.kappa_tot

    @property
    def fwhm(self) -> float:
        """Linewidth [nm], λ_0/Q_l."""
        return self.center / self.q_loaded

    @property
    def t0(self) -> float:
        return (1.0 - 2.0 * self.kappa_ext / self.kappa_tot) ** 2


@dataclass(frozen=True)
class ResonanceFit:
    center: float  # nm
    fwhm: float  # nm
    t0: float
    q_loaded: float
    q_intrinsic: float
    regime: Regime
    residual_rms: float
    baseline: float = 1.0
    iterations: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def fsr(ring: RingParams, n_g: float, wavelength: float) -> float:
    """Free spectral range [nm] = λ²/(n_g·L)."""
    if n_g <= 0 or wavelength <= 0:
        raise ValueError("n_g and wavelength must be positive")
    return wavelength**2 / (n_g * ring.circumference * 1e3)


def through_port(wavelengths, line: LineParams) -> np.ndarray:
    omega = 2.0 * math.pi * C_LIGHT / (np.asarray(wavelengths, dtype=float) * 1e-9)
    omega0 = 2.0 * math.pi * C_LIGHT / (line.center * 1e-9)
    t = 1.0 - line.kappa_ext / (line.kappa_tot / 2.0 - 1j * (omega - omega0))
    return np.abs(t) ** 2


def synth_transmission(
    wavelengths,
    line: LineParams,
    ring: RingParams | None = None,
    n_g: float | None = None,
    noise_sigma: float = 0.0,
    seed: int | None = None,
    band: str = "signal",
) -> SpectrumTrace:
    """
    Through-port spectrum of ``line`` sampled on ``wavelengths`` [nm].

    With ``ring`` and ``n_g`` the line is repeated every FSR across the grid
    (a comb of identical, non-interacting resonances). Additive Gaussian
    noise of width ``noise_sigma`` is optional; negative samples are clipped.
    """
    wl = np.asarray(wavelengths, dtype=float)
    if np.any(np.diff(wl) <= 0):
        raise ValueError("wavelength grid must be strictly increasing")
    fw = line.fwhm
    if np.max(np.diff(wl)) > fw / SAMPLES_PER_LINEWIDTH:
        raise SamplingError(
            f"grid step {np.max(np.diff(wl)):.3g} nm exceeds linewidth/{SAMPLES_PER_LINEWIDTH} "
            f"({fw / SAMPLES_PER_LINEWIDTH:.3g} nm)"
        )
    half_span = SPAN_LINEWIDTHS / 2.0 * fw
    if wl[0] > line.center - half_span or wl[-1] < line.center + half_span:
        raise SamplingError(f"grid must cover ±{SPAN_LINEWIDTHS / 2} linewidths around {line.center} nm")

    centers = [line.center]
    if ring is not None and n_g is not None:
        spacing = fsr(ring, n_g, line.center)
        k_lo = math.floor((wl[0] - line.center) / spacing)
        k_hi = math.ceil((wl[-1] - line.center) / spacing)
        centers = [line.center + k * spacing for k in range(k_lo, k_hi + 1)]

    T = np.ones_like(wl)
    for c0 in centers:
        T *= through_port(wl, LineParams(c0, line.kappa_ext, line.kappa_0))
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        T = np.clip(T + rng.normal(0.0, noise_sigma, T.shape), 0.0, 1.0 + TRANSMISSION_EPS)
    return SpectrumTrace(wl, T, band)


def intrinsic_q(q_loaded: float, t0: float, regime: Regime) -> float:
    """
    Intrinsic Q from loaded Q and on-resonance transmission.

    Over-coupled: κ_ext/κ_tot = (1 + √T_0)/2, Q_0 = 2Q_l/(1 - √T_0).
    Under-coupled: κ_ext/κ_tot = (1 - √T_0)/2, Q_0 = 2Q_l/(1 + √T_0).
    """
    root = math.sqrt(min(max(t0, 0.0), 1.0))
    if regime == "critical":
        return 2.0 * q_loaded
    if regime == "over":
        ext = (1.0 + root) / 2.0
    elif regime == "under":
        ext = (1.0 - root) / 2.0
    else:
        raise ValueError(f"regime must be 'over' or 'under', got {regime!r}")
    if ext >= 1.0:
        return math.inf
    return q_loaded / (1.0 - ext)


def _noise_floor(y: np.ndarray) -> float:
    d = np.diff(y)
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / math.sqrt(2.0))


def _detect_dip(trace: SpectrumTrace) -> tuple[int, float, float]:
    T = trace.transmission
    baseline = float(np.percentile(T, 98))
    depth = baseline - T
    sigma = _noise_floor(T)
    i_min = int(np.argmax(depth))
    if depth[i_min] <= max(DETECT_SIGMA * sigma, 1e-12):
        raise DipDetectionError(
            f"deepest point is {depth[i_min]:.3g} below baseline; noise floor {sigma:.3g}"
        )
    prominence = max(DETECT_SIGMA * sigma, 0.1 * depth[i_min])
    peaks, _ = find_peaks(depth, prominence=prominence, width=3)
    if len(peaks) == 0:
        raise DipDetectionError(
            f"no dip at least 3 samples wide with prominence above {prominence:.3g}"
        )
    if len(peaks) > 1:
        raise MultipleDipsError(
            f"{len(peaks)} dips at {np.round(trace.wavelengths[peaks], 4).tolist()} nm"
        )
    return i_min, baseline, sigma


def fit_resonance(
    trace: SpectrumTrace,
    regime_hint: Regime,
    max_iter: int = 200,
    gtol: float = 1e-12,
) -> ResonanceFit:
    """
    Fit one Lorentzian dip and derive loaded/intrinsic Q.

    The line shape is fitted on the exact optical-frequency axis, so a
    trace synthesized by :func:`synth_transmission` is reproduced without
    model error. ``regime_hint`` ('over' or 'under') picks the branch for
    Q_0; a dip with √T_0 below 1e-3 is reported as critical.
    """
    if regime_hint not in ("over", "under"):
        raise ValueError("regime_hint must be 'over' or 'under'")
    i_min, b0, _ = _detect_dip(trace)
    nu = C_LIGHT / (trace.wavelengths * 1e-9)
    T = trace.transmission
    d0 = 1.0 - T[i_min] / b0
    below = np.flatnonzero(T <= b0 * (1.0 - d0 / 2.0))
    nu_c = nu[i_min]
    scale = abs(nu[below.min()] - nu[below.max()])
    scale = max(scale, float(np.max(np.abs(np.diff(nu)))))
    x = (nu - nu_c) / scale

    def model(p):
        x0, gamma, d, b = p
        u = 2.0 * (x - x0) / gamma
        lor = 1.0 / (1.0 + u * u)
        return b * (1.0 - d * lor), u, lor

    def residual(p):
        return model(p)[0] - T

    def jacobian(p):
        x0, gamma, d, b = p
        _, u, lor = model(p)
        l2 = lor * lor
        return np.stack(
            [
                -4.0 * b * d * u * l2 / gamma,
                -2.0 * b * d * u * u * l2 / gamma,
                -b * lor,
                1.0 - d * lor,
            ],
            axis=1,
        )

    res = levenberg_marquardt(residual, jacobian, [0.0, 1.0, d0, b0], max_iter=max_iter, gtol=gtol)
    if not res.converged:
        log.warning("resonance fit stopped without converging: %s", res.message)
    x0, gamma, d, b = res.x
    nu0 = nu_c + x0 * scale
    q_loaded = nu0 / (abs(gamma) * scale)
    center = C_LIGHT / nu0 * 1e9
    t0 = float(min(max(1.0 - d, 0.0), 1.0))
    regime: Regime = "critical" if math.sqrt(t0) < CRITICAL_SQRT_T0 else regime_hint
    return ResonanceFit(
        center=float(center),
        fwhm=float(center / q_loaded),
        t0=t0,
        q_loaded=float(q_loaded),
        q_intrinsic=intrinsic_q(float(q_loaded), t0, regime),
        regime=regime,
        residual_rms=math.sqrt(2.0 * res.cost / T.size),
        baseline=float(b),
        iterations=res.iterations,
    )


@dataclass(frozen=True)
class DcModel:
    """
    Directional coupler: cross = sin²θ(λ) with θ linear in λ.

    ``slope`` is dθ/dλ [rad/nm]. ``band`` bounds where the linear phase
    model is trusted. Excess loss applies to the bar port only.
    """

    length: float  # µm
    ref_wavelength: float  # nm
    cross_ref: float
    slope: float
    excess_loss_db: float = 0.0
    band: tuple[float, float] = (1500.0, 1600.0)

    def __post_init__(self) -> None:
        if not 0.0 <= self.cross_ref <= 1.0:
            raise ValueError("reference cross coupling must be in [0, 1]")
        if self.excess_loss_db < 0:
            raise ValueError("excess loss must be >= 0 dB")
        lo, hi = self.band
        if not lo <= self.ref_wavelength <= hi:
            raise ValueError("reference wavelength must lie inside the band")

    @property
    def theta_ref(self) -> float:
        return math.asin(math.sqrt(self.cross_ref))


def dc_transfer(dc: DcModel, wavelength: float) -> tuple[float, float]:
    """(bar, cross) power fractions at ``wavelength`` [nm]."""
    lo, hi = dc.band
    if not lo <= wavelength <= hi:
        raise ValueError(f"{wavelength} nm outside coupler band [{lo}, {hi}] nm")
    theta = dc.theta_ref + dc.slope * (wavelength - dc.ref_wavelength)
    cross = math.sin(theta) ** 2
    bar = (1.0 - cross) * 10.0 ** (-dc.excess_loss_db / 10.0)
    return bar, cross


# Slopes are placeholders; only the anchor values are measured quantities.
def reference_dc_models() -> dict[str, DcModel]:
    return {
        "signal": DcModel(450.0, 1533.0, 0.98, 0.0028, 0.0, (1500.0, 1570.0)),
        "pump": DcModel(450.0, 1064.0, 0.012, 0.0028, 0.0, (1050.0, 1080.0)),
    }
