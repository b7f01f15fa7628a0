"""
Double-pulley add-drop ring: geometry, losses, quasi-phase matching and
the maximum conversion efficiency.

Coupler convention: signal and pump enter through port A, the
sum-frequency (SF) leaves through port B. The coupling at the *other*
port is parasitic and is counted as internal loss, so the intrinsic Q of
signal/pump contains propagation + port-B loss and that of the SF contains
propagation + port-A loss.

Units: R, w_ring, w_wg, gap in µm; α in dB/cm; wavelengths in nm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

from scipy.optimize import bisect

from .dispersion import BANDS, IndexModel, n_eff

PORTS = ("A", "B")
# Port through which each band is fed (signal, pump) or extracted (sf).
DESIGNATED_PORT = {"signal": "A", "pump": "A", "sf": "B"}
ENERGY_TOL = 1e-4


class InfeasibleGeometryError(ValueError):
    """No positive gap / width satisfies the pulley matching relation."""


class LossRegimeError(ValueError):
    """Round-trip loss is outside the small-loss regime of the Q formula."""


@dataclass(frozen=True)
class RingParams:
    """Ring radius R and width [µm], propagation loss α [dB/cm]."""

    radius: float
    width: float
    alpha_db_per_cm: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.width <= 0:
            raise ValueError(f"ring width must be positive, got {self.width}")
        if self.alpha_db_per_cm < 0:
            raise ValueError(f"propagation loss must be >= 0, got {self.alpha_db_per_cm}")

    @property
    def circumference(self) -> float:
        """L = 2πR [µm]."""
        return 2.0 * math.pi * self.radius

    def to_dict(self) -> dict:
        return {"R_um": self.radius, "w_ring_um": self.width, "alpha_db_per_cm": self.alpha_db_per_cm}

    @classmethod
    def from_dict(cls, d: Mapping) -> "RingParams":
        return cls(float(d["R_um"]), float(d["w_ring_um"]), float(d["alpha_db_per_cm"]))


@dataclass(frozen=True)
class PortGeometry:
    w_wg: float  # nm
    gap: float  # nm


@dataclass(frozen=True)
class CouplerSpec:
    """
    Round-trip power coupling κ² per (band, port) plus bus geometry per port.

    ``kappa2`` maps ``(band, port)`` to a fraction in [0, 1). Pump entries
    may be omitted; signal and SF entries at both ports are required.
    """

    kappa2: Mapping[tuple[str, str], float]
    geometry: Mapping[str, PortGeometry] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (band, port), k2 in self.kappa2.items():
            if band not in BANDS or port not in PORTS:
                raise ValueError(f"unknown coupler entry ({band}, {port})")
            if not 0.0 <= k2 < 1.0:
                raise ValueError(f"kappa2 for ({band}, {port}) must be in [0, 1), got {k2}")
        for key in (("signal", "A"), ("signal", "B"), ("sf", "A"), ("sf", "B")):
            if key not in self.kappa2:
                raise ValueError(f"missing kappa2 entry {key}")

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self.kappa2[key]

    def has_band(self, band: str) -> bool:
        return all((band, p) in self.kappa2 for p in PORTS)

    def replace(self, band: str, port: str, value: float) -> "CouplerSpec":
        k2 = dict(self.kappa2)
        k2[(band, port)] = value
        return CouplerSpec(k2, self.geometry)

    def to_dict(self) -> dict:
        out: dict = {f"kappa2_{b}_{p}": v for (b, p), v in sorted(self.kappa2.items())}
        for port, geo in sorted(self.geometry.items()):
            out[f"w_wg_{port}_nm"] = geo.w_wg
            out[f"gap_{port}_nm"] = geo.gap
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "CouplerSpec":
        k2 = {}
        geometry = {}
        for band in BANDS:
            for port in PORTS:
                key = f"kappa2_{band}_{port}"
                if key in d:
                    k2[(band, port)] = float(d[key])
        for port in PORTS:
            if f"w_wg_{port}_nm" in d and f"gap_{port}_nm" in d:
                geometry[port] = PortGeometry(float(d[f"w_wg_{port}_nm"]), float(d[f"gap_{port}_nm"]))
        return cls(k2, geometry)


@dataclass(frozen=True)
class ModeTriple:
    """Azimuthal orders and wavelengths [nm] of the three interacting modes."""

    m_s: int
    m_p: int
    m_sf: int
    lambda_s: float
    lambda_p: float
    lambda_sf: float
    poling_order: int
    energy_tol: float = ENERGY_TOL

    def __post_init__(self) -> None:
        if min(self.m_s, self.m_p, self.m_sf) <= 0:
            raise ValueError("azimuthal mode numbers must be positive")
        if min(self.lambda_s, self.lambda_p, self.lambda_sf) <= 0:
            raise ValueError("wavelengths must be positive")
        inv_sum = 1.0 / self.lambda_s + 1.0 / self.lambda_p
        mismatch = abs(1.0 / self.lambda_sf - inv_sum) / inv_sum
        if mismatch > self.energy_tol:
            raise ValueError(
                f"energy conservation violated: 1/λ_sf differs from 1/λ_s + 1/λ_p "
                f"by {mismatch:.2e} (tolerance {self.energy_tol:.0e})"
            )

    @property
    def modes(self) -> dict[str, int]:
        return {"signal": self.m_s, "pump": self.m_p, "sf": self.m_sf}

    @property
    def wavelengths(self) -> dict[str, float]:
        return {"signal": self.lambda_s, "pump": self.lambda_p, "sf": self.lambda_sf}

    @property
    def phase_matched(self) -> bool:
        return qpm_order(self) == self.poling_order

    def to_dict(self) -> dict:
        return {
            "m_s": self.m_s, "m_p": self.m_p, "m_sf": self.m_sf,
            "lambda_s_nm": self.lambda_s, "lambda_p_nm": self.lambda_p,
            "lambda_sf_nm": self.lambda_sf, "M": self.poling_order,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModeTriple":
        m_s, m_p, m_sf = int(d["m_s"]), int(d["m_p"]), int(d["m_sf"])
        lam_s, lam_p = float(d["lambda_s_nm"]), float(d["lambda_p_nm"])
        lam_sf = float(d.get("lambda_sf_nm") or 1.0 / (1.0 / lam_s + 1.0 / lam_p))
        return cls(m_s, m_p, m_sf, lam_s, lam_p, lam_sf, int(d.get("M", m_sf - m_s - m_p)))


class QFactors(NamedTuple):
    intrinsic: float
    loaded: float

    def check(self, band: str = "") -> None:
        if self.intrinsic <= 0 or self.loaded <= 0:
            raise ValueError(f"{band} Q factors must be positive")
        if self.loaded >= self.intrinsic:
            raise ValueError(
                f"{band} loaded Q {self.loaded:.4g} must be below intrinsic Q {self.intrinsic:.4g}"
            )

    @property
    def external_fraction(self) -> float:
        """κ_ext/κ_tot = 1 - Q_l/Q_0."""
        return 1.0 - self.loaded / self.intrinsic


@dataclass(frozen=True)
class QSet:
    signal: QFactors
    sf: QFactors
    pump: QFactors | None = None

    def __post_init__(self) -> None:
        self.signal.check("signal")
        self.sf.check("sf")
        if self.pump is not None:
            self.pump.check("pump")

    def to_dict(self) -> dict:
        out = {}
        for band in BANDS:
            q = getattr(self, band)
            if q is not None:
                out[band] = {"Q0": q.intrinsic, "Ql": q.loaded}
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "QSet":
        def entry(band):
            if band not in d:
                return None
            return QFactors(float(d[band]["Q0"]), float(d[band]["Ql"]))

        return cls(signal=entry("signal"), sf=entry("sf"), pump=entry("pump"))


def qpm_order(triple: ModeTriple) -> int:
    """Poling order that closes the azimuthal momentum balance."""
    return triple.m_sf - triple.m_s - triple.m_p


def poling_period(radius: float, order: int) -> float:
    """Poling period along the circumference, 2πR/M, in the units of ``radius``."""
    if order <= 0:
        raise ValueError(f"poling order must be positive, got {order}")
    return 2.0 * math.pi * radius / order


def alpha_roundtrip(ring: RingParams) -> float:
    """Fractional power lost to propagation in one round trip."""
    loss_db = ring.alpha_db_per_cm * ring.circumference * 1e-4
    return 1.0 - 10.0 ** (-loss_db / 10.0)


def eta_max_from_losses(
    alpha_l: float, k2_sf_a: float, k2_sf_b: float, k2_s_a: float, k2_s_b: float
) -> float:
    """
    Ceiling on SFG efficiency of a double-pulley ring.

    η_max = r_sf/(1 + r_sf) · r_s/(1 + r_s), with
    r_sf = κ²_sf,B/(αL + κ²_sf,A) and r_s = κ²_s,A/(αL + κ²_s,B).
    """
    den_sf = alpha_l + k2_sf_a
    den_s = alpha_l + k2_s_b
    if den_sf <= 0 or den_s <= 0:
        raise ZeroDivisionError(
            "coupling ratio is singular: internal loss plus parasitic coupling is zero"
        )
    r_sf = k2_sf_b / den_sf
    r_s = k2_s_a / den_s
    return (r_sf / (1.0 + r_sf)) * (r_s / (1.0 + r_s))


def eta_max_couplings(ring: RingParams, coupler: CouplerSpec) -> float:
    return eta_max_from_losses(
        alpha_roundtrip(ring),
        coupler["sf", "A"], coupler["sf", "B"],
        coupler["signal", "A"], coupler["signal", "B"],
    )


def eta_max_q(q: QSet) -> float:
    """(1 - Q_s,l/Q_s,0)(1 - Q_sf,l/Q_sf,0)."""
    q.signal.check("signal")
    q.sf.check("sf")
    return q.signal.external_fraction * q.sf.external_fraction


def q_from_losses(
    n_g: float,
    ring: RingParams,
    wavelength: float,
    coupling_loss: float,
    other_loss: float = 0.0,
) -> QFactors:
    """
    Loaded and intrinsic Q from round-trip fractional power losses.

    Q = 2π·n_g·L/(λ·ℓ). ``coupling_loss`` is the coupling at the band's
    designated port (A for signal/pump, B for SF); ``other_loss`` is any
    further round-trip loss, normally the coupling at the opposite port.
    Intrinsic Q counts propagation plus ``other_loss``.

    Only valid for total loss well below unity; ℓ_tot must lie in (0, 0.5).
    """
    alpha_l = alpha_roundtrip(ring)
    total = alpha_l + coupling_loss + other_loss
    if not 0.0 < total < 0.5:
        raise LossRegimeError(
            f"round-trip loss {total:.4g} outside (0, 0.5); use an exact photon-lifetime treatment"
        )
    phase = 2.0 * math.pi * n_g * ring.circumference * 1e3 / wavelength
    internal = alpha_l + other_loss
    intrinsic = phase / internal if internal > 0 else math.inf
    return QFactors(intrinsic, phase / total)


def qset_from_couplings(
    ring: RingParams,
    coupler: CouplerSpec,
    group_index: Mapping[str, float],
    wavelengths: Mapping[str, float],
) -> QSet:
    """Build a QSet for every band the coupler describes, using the port convention."""
    entries = {}
    for band in BANDS:
        if not coupler.has_band(band):
            continue
        port = DESIGNATED_PORT[band]
        other = "B" if port == "A" else "A"
        entries[band] = q_from_losses(
            group_index[band], ring, wavelengths[band], coupler[band, port], coupler[band, other]
        )
    return QSet(**entries)


def pulley_gap(
    model_ring: IndexModel,
    model_wg: IndexModel,
    ring: RingParams,
    w_wg: float,
    wavelength: float,
) -> float:
    """
    Gap [µm] that phase-matches a pulley bus to the ring mode.

    Solves n_ring·(R + w_ring/4) = n_wg·(R + gap + w_ring/2 + w_wg/2) for gap.
    """
    n_ring = n_eff(model_ring, wavelength)
    n_wg = n_eff(model_wg, wavelength)
    if n_wg <= 0:
        raise InfeasibleGeometryError("bus waveguide index must be positive")
    gap = n_ring * (ring.radius + ring.width / 4.0) / n_wg - ring.radius - ring.width / 2.0 - w_wg / 2.0
    if gap <= 0:
        raise InfeasibleGeometryError(
            f"index ratio {n_ring / n_wg:.5f} gives non-positive gap {gap:.4g} µm"
        )
    return gap


def pulley_width_search(
    model_ring: IndexModel,
    wg_model_for_width: Callable[[float], IndexModel],
    ring: RingParams,
    gap: float,
    wavelength: float,
    width_bounds: tuple[float, float],
    xtol: float = 1e-6,
) -> float:
    """
    Bus width [µm] satisfying the pulley relation at a fixed gap.

    ``wg_model_for_width`` returns the bus index model for a given width;
    the answer is only as good as that family of models. Bisection needs a
    sign change of the matching residual across ``width_bounds``.
    """
    n_ring = n_eff(model_ring, wavelength)
    lhs = n_ring * (ring.radius + ring.width / 4.0)

    def mismatch(w: float) -> float:
        n_wg = n_eff(wg_model_for_width(w), wavelength)
        return lhs - n_wg * (ring.radius + gap + ring.width / 2.0 + w / 2.0)

    lo, hi = width_bounds
    if mismatch(lo) * mismatch(hi) > 0:
        raise InfeasibleGeometryError(f"no width in {width_bounds} µm matches the ring mode")
    return bisect(mismatch, lo, hi, xtol=xtol)


def triple_resonance_residual(
    models: Mapping[str, IndexModel], ring: RingParams, triple: ModeTriple
) -> dict[str, float]:
    """Per-band 2πR·n_eff(λ)/λ - m; zero for every band at triple resonance."""
    out = {}
    lam = triple.wavelengths
    for band, m in triple.modes.items():
        n = n_eff(models[band], lam[band])
        out[band] = 2.0 * math.pi * ring.radius * 1e3 * n / lam[band] - m
    return out


def is_triple_resonant(residuals: Mapping[str, float], tol: float = 1e-3) -> bool:
    return all(abs(r) < tol for r in residuals.values())


def reference_ring() -> RingParams:
    return RingParams(radius=74.0, width=1.73, alpha_db_per_cm=0.2)


def reference_coupler() -> CouplerSpec:
    return CouplerSpec(
        {
            ("signal", "A"): 0.03, ("signal", "B"): 0.004,
            ("pump", "A"): 0.03, ("pump", "B"): 0.003,
            ("sf", "A"): 0.005, ("sf", "B"): 0.05,
        },
        {"A": PortGeometry(600.0, 700.0), "B": PortGeometry(300.0, 390.0)},
    )


def reference_triple() -> ModeTriple:
    lam_sf = 1.0 / (1.0 / 1533.0 + 1.0 / 1064.0)
    return ModeTriple(550, 875, 1584, 1533.0, 1064.0, lam_sf, 159)


def reference_qset() -> QSet:
    return QSet(
        signal=QFactors(1.01e6, 1.46e5),
        pump=QFactors(3.29e6, 5.26e5),
        sf=QFactors(8.93e5, 1.64e5),
    )
