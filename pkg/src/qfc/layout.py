"""
Waveguide routing primitives: symmetric Euler (clothoid) bends and linear
tapers, returned as sampled polylines.

The Euler bend ramps curvature linearly in arc length from 1/R_max to
1/R_min over the first half and back over the second, so for a bend of
total angle Θ

    Θ = s_total · (1/R_max + 1/R_min)/2.

Mode-loss figures are carried as metadata only.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

ANGLE_TOL = 1e-6


class BendAngleError(ValueError):
    """Path is not the 90° bend an operation requires."""


@dataclass(frozen=True)
class EulerBendSpec:
    r_max: float  # µm
    r_min: float  # µm
    angle: float  # rad
    width: float = 950.0  # nm
    quoted_loss_db: float | None = None

    def __post_init__(self) -> None:
        if not self.r_max > self.r_min > 0:
            raise ValueError(f"need R_max > R_min > 0, got {self.r_max}, {self.r_min}")
        if not 0 < self.angle <= math.pi:
            raise ValueError(f"bend angle must be in (0, π], got {self.angle}")


@dataclass(frozen=True)
class TaperSpec:
    w_in: float  # nm
    w_out: float  # nm
    length: float  # µm
    kind: Literal["abrupt", "adiabatic"] = "abrupt"
    quoted_loss_db: float | None = None

    def __post_init__(self) -> None:
        if min(self.w_in, self.w_out, self.length) <= 0:
            raise ValueError("taper widths and length must be positive")
        if self.kind not in ("abrupt", "adiabatic"):
            raise ValueError(f"unknown taper kind {self.kind!r}")

    @property
    def width_slope(self) -> float:
        """Width change per unit length [nm/nm]."""
        return (self.w_out - self.w_in) / (self.length * 1e3)


@dataclass(frozen=True)
class PathPolyline:
    s: np.ndarray  # µm
    x: np.ndarray  # µm
    y: np.ndarray  # µm
    theta: np.ndarray  # rad
    k: np.ndarray  # 1/µm
    width: np.ndarray | None = None  # nm
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.s)
        for name in ("x", "y", "theta", "k"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from s")
        if np.any(np.diff(self.s) < 0):
            raise ValueError("arc length must be monotone")
        if not np.all(np.isfinite(self.k)):
            raise ValueError("curvature must be finite")

    def to_csv(self) -> str:
        cols = ["s_um", "x_um", "y_um", "theta_rad", "k_per_um"]
        arrays = [self.s, self.x, self.y, self.theta, self.k]
        if self.width is not None:
            cols.append("width_nm")
            arrays.append(self.width)
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for row in zip(*arrays):
            buf.write(",".join(f"{v:.9g}" for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        d = {
            "s_um": self.s.tolist(),
            "x_um": self.x.tolist(),
            "y_um": self.y.tolist(),
            "theta_rad": self.theta.tolist(),
            "k_per_um": self.k.tolist(),
            "metadata": self.metadata,
        }
        if self.width is not None:
            d["width_nm"] = self.width.tolist()
        return json.dumps(d, sort_keys=True)

    def chord_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))


def clothoid_arc_length(r_max: float, r_min: float, angle: float) -> float:
    """Arc length of a symmetric linear-curvature bend; R_max = R_min gives R·angle."""
    return 2.0 * angle / (1.0 / r_max + 1.0 / r_min)


def bend_arc_length(spec: EulerBendSpec) -> float:
    return clothoid_arc_length(spec.r_max, spec.r_min, spec.angle)


def _curvature(s: np.ndarray, spec: EulerBendSpec) -> np.ndarray:
    half = bend_arc_length(spec) / 2.0
    k1, k2 = 1.0 / spec.r_max, 1.0 / spec.r_min
    dist = np.minimum(s, 2.0 * half - s)
    return k1 + (k2 - k1) * np.clip(dist, 0.0, half) / half


def euler_bend_path(spec: EulerBendSpec, n_samples: int = 1025) -> PathPolyline:
    """
    Sample the bend from the origin, heading +x and turning left.

    x' = cos θ, y' = sin θ, θ' = k(s) are integrated with fixed-step RK4.
    The step count is rounded up to an even number so the curvature peak at
    mid-length falls on a sample and no RK4 step straddles the kink; the
    polyline therefore has ``n_samples`` or ``n_samples + 1`` points.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    steps = n_samples - 1
    steps += steps % 2
    total = bend_arc_length(spec)
    h = total / steps
    s = np.linspace(0.0, total, steps + 1)
    k = _curvature(s, spec)
    kmid = _curvature(s[:-1] + h / 2.0, spec)

    x = np.zeros(steps + 1)
    y = np.zeros(steps + 1)
    th = np.zeros(steps + 1)
    for i in range(steps):
        t0 = th[i]
        # θ stages; k is known in closed form so only the position needs RK4 weights
        t_mid = t0 + 0.5 * h * (k[i] + kmid[i]) / 2.0
        t_end = t0 + h * (k[i] + 4.0 * kmid[i] + k[i + 1]) / 6.0
        x[i + 1] = x[i] + h * (math.cos(t0) + 4.0 * math.cos(t_mid) + math.cos(t_end)) / 6.0
        y[i + 1] = y[i] + h * (math.sin(t0) + 4.0 * math.sin(t_mid) + math.sin(t_end)) / 6.0
        th[i + 1] = t_end
    meta = {"r_max_um": spec.r_max, "r_min_um": spec.r_min, "angle_rad": spec.angle}
    if spec.quoted_loss_db is not None:
        meta["quoted_loss_db"] = spec.quoted_loss_db
    width = np.full(steps + 1, float(spec.width))
    return PathPolyline(s, x, y, th, k, width, meta)


def effective_radius(path: PathPolyline) -> float:
    """
    Radius of the 90° arc with the same endpoint displacement.

    A quarter circle of radius R moves the endpoint by (R, R); for a general
    90° bend the larger of |Δx|, |Δy| is returned.
    """
    turn = path.theta[-1] - path.theta[0]
    if abs(abs(turn) - math.pi / 2.0) > ANGLE_TOL:
        raise BendAngleError(f"path turns {math.degrees(turn):.6f}°, not 90°")
    return float(max(abs(path.x[-1] - path.x[0]), abs(path.y[-1] - path.y[0])))


def taper_profile(spec: TaperSpec, n_samples: int = 101) -> PathPolyline:
    """Straight taper along +x with width varying linearly from w_in to w_out."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    s = np.linspace(0.0, spec.length, n_samples)
    zeros = np.zeros_like(s)
    width = np.linspace(spec.w_in, spec.w_out, n_samples)
    meta = {"kind": spec.kind, "quoted_loss_db": spec.quoted_loss_db}
    return PathPolyline(s, s.copy(), zeros, zeros.copy(), zeros.copy(), width, meta)


def reference_euler_bend() -> EulerBendSpec:
    return EulerBendSpec(300.0, 28.5, math.pi / 2.0, 950.0, quoted_loss_db=0.01)


def reference_tapers() -> dict[str, TaperSpec]:
    return {
        "abrupt": TaperSpec(300.0, 950.0, 4.0, "abrupt", quoted_loss_db=0.24),
        "adiabatic": TaperSpec(300.0, 950.0, 300.0, "adiabatic"),
    }
