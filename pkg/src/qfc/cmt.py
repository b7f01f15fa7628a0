"""
Classical coupled-mode theory of cavity sum-frequency generation.

Three cavity modes (signal s, pump p, sum-frequency sf) with energy
amplitudes normalized so that |a|² is the intracavity photon number and
|s_in|² the input photon flux. From H_int = g(a_s a_p a_sf† + h.c.):

    da_s/dt  = -(κ_s/2  + iδ_s)  a_s  - i g a_p* a_sf + √κ_ext,s s_in
    da_p/dt  = -(κ_p/2  + iδ_p)  a_p  [- i g a_s* a_sf] + √κ_ext,p p_in
    da_sf/dt = -(κ_sf/2 + iδ_sf) a_sf - i g a_s a_p

The bracketed pump back-action is off by default (undepleted pump). On
resonance the steady state reduces to

    η(P) = η_max · 4x/(1 + x)²,   x = P/P_opt,
    η_max = (κ_ext,s/κ_s)(κ_ext,sf/κ_sf),
    P_opt : 4 g² N_p = κ_s κ_sf,   N_p = 4 κ_ext,p P/(ħω_p κ_p²).

External coupling is counted at port A for signal and pump and at port B
for the SF output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import hbar

from .ring import QSet

log = logging.getLogger(__name__)

FREQ_TOL = 1e-4


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NoConversionError(ValueError):
    """The nonlinear coupling is zero, so no optimum pump power exists."""


def omega_from_wavelength(wavelength_nm: float) -> float:
    return 2.0 * math.pi * C_LIGHT / (wavelength_nm * 1e-9)


@dataclass(frozen=True)
class Mode:
    """One cavity mode: angular frequency and decay rates [rad/s]."""

    omega: float
    kappa_tot: float
    kappa_ext: float
    detuning: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa_ext <= self.kappa_tot:
            raise ValueError(
                f"need 0 < kappa_ext <= kappa_tot, got {self.kappa_ext:.4g}, {self.kappa_tot:.4g}"
            )

    @property
    def coupling_fraction(self) -> float:
        return self.kappa_ext / self.kappa_tot

    @property
    def response(self) -> complex:
        return complex(self.kappa_tot / 2.0, self.detuning)


@dataclass(frozen=True)
class CmtParams:
    signal: Mode
    pump: Mode
    sf: Mode
    g: float = 0.0

    def __post_init__(self) -> None:
        if self.g < 0:
            raise ValueError("g must be non-negative")
        w_sum = self.signal.omega + self.pump.omega
        if abs(self.sf.omega - w_sum) > FREQ_TOL * w_sum:
            raise ValueError("ω_sf must equal ω_s + ω_p")

    @classmethod
    def from_qset(cls, q: QSet, wavelengths_nm: Mapping[str, float], g: float = 0.0) -> "CmtParams":
        """Decay rates from loaded/intrinsic Q: κ_tot = ω/Q_l, κ_ext = ω(1/Q_l - 1/Q_0)."""
        if q.pump is None:
            raise ValueError("pump Q factors are required for coupled-mode parameters")
        modes = {}
        for band in ("signal", "pump", "sf"):
            qf = getattr(q, band)
            w = omega_from_wavelength(wavelengths_nm[band])
            modes[band] = Mode(w, w / qf.loaded, w * (1.0 / qf.loaded - 1.0 / qf.intrinsic))
        return cls(g=g, **modes)

    def with_detuning(self, signal: float = 0.0, pump: float = 0.0, sf: float = 0.0) -> "CmtParams":
        return replace(
            self,
            signal=replace(self.signal, detuning=signal),
            pump=replace(self.pump, detuning=pump),
            sf=replace(self.sf, detuning=sf),
        )

    @property
    def on_resonance(self) -> bool:
        return self.signal.detuning == self.pump.detuning == self.sf.detuning == 0.0


@dataclass(frozen=True)
class SteadyState:
    a_s: complex
    a_p: complex
    a_sf: complex
    eta: float
    steps: int


@dataclass(frozen=True)
class ConversionCurve:
    pump: np.ndarray
    eta: np.ndarray
    eta_max: float
    p_opt: float

    def __post_init__(self) -> None:
        if self.pump.shape != self.eta.shape:
            raise ValueError("pump and eta must have equal length")
        if np.any(np.diff(self.pump) <= 0):
            raise ValueError("pump powers must be strictly increasing")

    def to_csv(self) -> str:
        rows = ["pump_W,eta"]
        rows += [f"{p:.9g},{e:.9g}" for p, e in zip(self.pump, self.eta)]
        return "\n".join(rows) + "\n"


def eta_max(params: CmtParams) -> float:
    """Peak conversion on resonance: product of signal and SF coupling fractions."""
    return params.signal.coupling_fraction * params.sf.coupling_fraction


def pump_photons(params: CmtParams, pump_power) -> np.ndarray | float:
    """Intracavity pump photon number for input power [W] (undepleted)."""
    p = params.pump
    flux = np.asarray(pump_power, dtype=float) / (hbar * p.omega)
    return p.kappa_ext * flux / abs(p.response) ** 2


def p_opt(params: CmtParams) -> float:
    """On-resonance pump power [W] that maximizes conversion."""
    if params.g <= 0:
        raise NoConversionError("g = 0: no pump power produces conversion")
    s, p, sf = params.signal, params.pump, params.sf
    n_opt = s.kappa_tot * sf.kappa_tot / (4.0 * params.g**2)
    return n_opt * hbar * p.omega * p.kappa_tot**2 / (4.0 * p.kappa_ext)


def calibrate_g(eta_max_measured: float, p_opt_measured: float, params: CmtParams) -> CmtParams:
    """
    Fix g so that the on-resonance optimum falls at ``p_opt_measured`` [W].

    The decay rates already set the cavity ceiling on η_max; a measured
    peak above that ceiling is inconsistent and is logged. A measured value
    below it is expected (collection and routing losses sit outside the ring).
    """
    if not 0.0 < eta_max_measured < 1.0:
        raise ValueError(f"eta_max must be in (0, 1), got {eta_max_measured}")
    if p_opt_measured <= 0:
        raise ValueError(f"P_opt must be positive, got {p_opt_measured}")
    ceiling = eta_max(params)
    if eta_max_measured > ceiling:
        log.warning(
            "measured eta_max %.4g exceeds the decay-rate ceiling %.4g", eta_max_measured, ceiling
        )
    s, p, sf = params.signal, params.pump, params.sf
    g2 = hbar * p.omega * s.kappa_tot * sf.kappa_tot * p.kappa_tot**2 / (
        16.0 * p.kappa_ext * p_opt_measured
    )
    return replace(params, g=math.sqrt(g2))


def calibration_report(params: CmtParams, eta_max_measured: float) -> dict:
    return {"g_rad_per_s": params.g, "p_opt_W": p_opt(params), "eta_max": eta_max_measured}


def eta_of_pump(params: CmtParams, pump_power, detuned: bool = False):
    """
    Steady-state photon conversion efficiency vs pump power [W].

    Without ``detuned`` the parameters must be on resonance and the
    canonical saturation law is used. With it, the general undepleted-pump
    steady state including all three detunings is evaluated.
    """
    P = np.asarray(pump_power, dtype=float)
    if np.any(P < 0):
        raise ValueError("pump power must be non-negative")
    if not detuned:
        if not params.on_resonance:
            raise ValueError("parameters carry detuning; pass detuned=True")
        if params.g == 0:
            out = np.zeros_like(P)
        else:
            x = P / p_opt(params)
            out = eta_max(params) * 4.0 * x / (1.0 + x) ** 2
    else:
        s, sf = params.signal, params.sf
        gn = params.g**2 * pump_photons(params, P)
        ls, lsf = s.response, sf.response
        out = (
            s.kappa_ext * sf.kappa_ext * gn / abs(lsf) ** 2 / np.abs(ls + gn / lsf) ** 2
        )
    return float(out) if out.ndim == 0 else out


def conversion_curve(params: CmtParams, pumps: Sequence[float]) -> ConversionCurve:
    pumps = np.asarray(pumps, dtype=float)
    return ConversionCurve(pumps, np.asarray(eta_of_pump(params, pumps)), eta_max(params), p_opt(params))


def normalized_efficiency(curve: ConversionCurve, degree: int = 3) -> float:
    """
    Low-power slope dη/dP in %/W.

    A polynomial through the origin (up to ``degree``) is least-squares
    fitted to the points below 0.1·P_opt and its linear coefficient kept,
    which removes the saturation curvature from the slope. Under the
    saturation law the result is 4·η_max/P_opt.
    """
    low = curve.pump < 0.1 * curve.p_opt
    if np.count_nonzero(low) < 3:
        raise ValueError("need at least 3 curve points below 0.1·P_opt")
    x = curve.pump[low] / curve.p_opt
    y = curve.eta[low]
    d = min(degree, len(x))
    basis = np.stack([x**k for k in range(1, d + 1)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return 100.0 * coef[0] / curve.p_opt


def qe_from_powers(p_signal: float, p_sf: float, lambda_s: float, lambda_sf: float) -> float:
    """Photon-number conversion ratio from measured powers: P_sf·λ_sf/(P_s·λ_s)."""
    if p_signal == 0:
        raise ZeroDivisionError("signal power is zero")
    return p_sf * lambda_sf / (p_signal * lambda_s)


def _rk4_batch(params: CmtParams, p_in: np.ndarray, s_in: float, depletion: bool,
               max_steps: int, tol: float) -> tuple[np.ndarray, int]:
    s, p, sf = params.signal, params.pump, params.sf
    g = params.g
    ls, lp, lsf = s.response, p.response, sf.response
    drive_s = math.sqrt(s.kappa_ext) * s_in
    drive_p = math.sqrt(p.kappa_ext) * p_in
    kmax = max(s.kappa_tot, p.kappa_tot, sf.kappa_tot)
    h = 0.01 / kmax

    def f(a):
        a_s, a_p, a_sf = a
        ds = -ls * a_s - 1j * g * np.conj(a_p) * a_sf + drive_s
        dp = -lp * a_p + drive_p
        if depletion:
            dp = dp - 1j * g * np.conj(a_s) * a_sf
        dsf = -lsf * a_sf - 1j * g * a_s * a_p
        return np.stack([ds, dp, dsf])

    a = np.zeros((3, p_in.size), dtype=complex)
    limit = tol * h * kmax
    residual = math.inf
    for step in range(1, max_steps + 1):
        k1 = f(a)
        k2 = f(a + 0.5 * h * k1)
        k3 = f(a + 0.5 * h * k2)
        k4 = f(a + h * k3)
        delta = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        a = a + delta
        mag = np.abs(a)
        change = np.abs(delta)
        if np.all(change <= limit * mag):
            return a, step
        if step % 1000 == 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                residual = float(np.nanmax(np.where(mag > 0, change / mag, change)) / (h * kmax))
    raise ConvergenceError(
        f"RK4 did not reach steady state in {max_steps} steps (relative rate {residual:.3g})",
        residual,
    )


def steady_state_sweep(
    params: CmtParams,
    pump_powers: Sequence[float],
    p_signal: float = 20e-9,
    depletion: bool = False,
    max_steps: int = 1_000_000,
    tol: float = 1e-10,
) -> list[SteadyState]:
    """
    Integrate the coupled-mode equations from the empty cavity to steady state.

    Fixed-step RK4 with h = 0.01/max(κ_tot); a point is converged when every
    amplitude changes by less than ``tol`` relative per unit κ_max·t. All
    pump powers are advanced together and stop when the slowest converges.
    """
    if min(params.signal.kappa_tot, params.pump.kappa_tot, params.sf.kappa_tot) <= 0:
        raise ValueError("decay rates must be positive")
    pumps = np.atleast_1d(np.asarray(pump_powers, dtype=float))
    p_in = np.sqrt(pumps / (hbar * params.pump.omega))
    s_in = math.sqrt(p_signal / (hbar * params.signal.omega))
    a, steps = _rk4_batch(params, p_in, s_in, depletion, max_steps, tol)
    sf_flux = params.sf.kappa_ext * np.abs(a[2]) ** 2
    etas = sf_flux / s_in**2 if s_in > 0 else np.zeros_like(sf_flux)
    return [
        SteadyState(complex(a[0, i]), complex(a[1, i]), complex(a[2, i]), float(etas[i]), steps)
        for i in range(pumps.size)
    ]


def steady_state_ode(
    params: CmtParams,
    p_pump: float,
    p_signal: float = 20e-9,
    depletion: bool = False,
    max_steps: int = 1_000_000,
    tol: float = 1e-10,
) -> SteadyState:
    """Single-drive version of :func:`steady_state_sweep`."""
    return steady_state_sweep(params, [p_pump], p_signal, depletion, max_steps, tol)[0]


def photon_flux_balance(params: CmtParams, state: SteadyState, p_signal: float) -> dict[str, float]:
    """
    Split the input signal photon flux into its steady-state sinks.

    In steady state input = through-port signal + dissipated signal
    + extracted SF + dissipated SF, since each converted signal photon
    becomes exactly one SF photon.
    """
    s, sf = params.signal, params.sf
    s_in = math.sqrt(p_signal / (hbar * s.omega))
    through = abs(s_in - math.sqrt(s.kappa_ext) * state.a_s) ** 2
    parts = {
        "input": s_in**2,
        "signal_through": through,
        "signal_dissipated": (s.kappa_tot - s.kappa_ext) * abs(state.a_s) ** 2,
        "sf_extracted": sf.kappa_ext * abs(state.a_sf) ** 2,
        "sf_dissipated": (sf.kappa_tot - sf.kappa_ext) * abs(state.a_sf) ** 2,
    }
    out_total = sum(v for k, v in parts.items() if k != "input")
    parts["relative_error"] = abs(out_total - parts["input"]) / parts["input"]
    return parts


def reference_params(g: float = 0.0) -> CmtParams:
    from .dispersion import REFERENCE_WAVELENGTHS_NM
    from .ring import reference_qset

    return CmtParams.from_qset(reference_qset(), REFERENCE_WAVELENGTHS_NM, g)
