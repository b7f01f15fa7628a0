import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.special import fresnel

from qfc.layout import (
    BendAngleError,
    EulerBendSpec,
    PathPolyline,
    TaperSpec,
    bend_arc_length,
    clothoid_arc_length,
    effective_radius,
    euler_bend_path,
    reference_euler_bend,
    reference_tapers,
    taper_profile,
)


@pytest.fixture(scope="module")
def bend():
    return euler_bend_path(reference_euler_bend())


def fresnel_point(k1, k2, half):
    """Closed-form end point of a linear-curvature ramp k1 -> k2 over length ``half``."""
    a = (k2 - k1) / half
    c = k1 * k1 / (2 * a)
    scale = math.sqrt(a / math.pi)
    t0, t1 = (k1 / a) * scale, (half + k1 / a) * scale
    S1, C1 = fresnel(t1)
    S0, C0 = fresnel(t0)
    dC, dS = C1 - C0, S1 - S0
    r = math.sqrt(math.pi / a)
    return r * (math.cos(c) * dC + math.sin(c) * dS), r * (math.cos(c) * dS - math.sin(c) * dC)


def test_arc_length_reference_bend():
    expected = 2 * (math.pi / 2) / (1 / 300 + 1 / 28.5)
    assert bend_arc_length(reference_euler_bend()) == pytest.approx(expected, rel=1e-14)
    assert bend_arc_length(reference_euler_bend()) == pytest.approx(81.8, abs=0.05)


def test_arc_length_circular_limit():
    assert clothoid_arc_length(50.0, 50.0, math.pi / 2) == pytest.approx(25 * math.pi, rel=1e-14)


@given(r_min=st.floats(1.0, 100.0), ratio=st.floats(1.01, 20.0), angle=st.floats(0.01, math.pi), c=st.floats(0.1, 10.0))
def test_arc_length_scales_with_radii(r_min, ratio, angle, c):
    base = clothoid_arc_length(r_min * ratio, r_min, angle)
    assert clothoid_arc_length(c * r_min * ratio, c * r_min, angle) == pytest.approx(c * base, rel=1e-12)


def test_total_turn(bend):
    assert bend.theta[-1] == pytest.approx(math.pi / 2, abs=1e-9)


def test_curvature_integral(bend):
    assert trapezoid(bend.k, bend.s) == pytest.approx(math.pi / 2, abs=1e-6)


def test_curvature_peak_at_midpoint(bend):
    i = int(np.argmax(bend.k))
    assert i == (len(bend.s) - 1) // 2
    assert bend.k[i] == pytest.approx(1 / 28.5, rel=1e-12)
    assert bend.k[0] == pytest.approx(1 / 300) and bend.k[-1] == pytest.approx(1 / 300)


def test_mirror_symmetry(bend):
    p = np.stack([bend.x, bend.y], axis=1)
    chord = p[-1] - p[0]
    u = chord / np.linalg.norm(chord)
    mid = (p[-1] + p[0]) / 2
    reflected = p - 2 * ((p - mid) @ u)[:, None] * u
    assert np.max(np.linalg.norm(reflected - p[::-1], axis=1)) <= 1e-6


def test_midpoint_matches_fresnel_oracle(bend):
    half = bend_arc_length(reference_euler_bend()) / 2
    xm, ym = fresnel_point(1 / 300, 1 / 28.5, half)
    m = (len(bend.s) - 1) // 2
    assert bend.x[m] == pytest.approx(xm, abs=1e-9)
    assert bend.y[m] == pytest.approx(ym, abs=1e-9)


def test_effective_radius_near_nominal(bend):
    r = effective_radius(bend)
    assert abs(r - 50.0) / 50.0 <= 0.10
    assert r == pytest.approx(49.33, abs=0.01)


def test_step_halving_convergence():
    spec = reference_euler_bend()
    a, b = euler_bend_path(spec, 1025), euler_bend_path(spec, 2049)
    assert math.hypot(a.x[-1] - b.x[-1], a.y[-1] - b.y[-1]) < 1e-4


def test_chord_converges_to_arc():
    spec = reference_euler_bend()
    path = euler_bend_path(spec, 4096)
    total = bend_arc_length(spec)
    assert abs(path.chord_length() - total) / total <= 1e-4
    assert path.s[-1] == pytest.approx(total, rel=1e-14)


def test_quarter_circle_effective_radius():
    R = 40.0
    s = np.linspace(0, R * math.pi / 2, 200)
    th = s / R
    path = PathPolyline(s, R * np.sin(th), R * (1 - np.cos(th)), th, np.full_like(s, 1 / R))
    assert effective_radius(path) == pytest.approx(R, rel=1e-12)


def test_non_right_angle_rejected():
    path = euler_bend_path(EulerBendSpec(300.0, 28.5, math.pi / 3))
    with pytest.raises(BendAngleError):
        effective_radius(path)


def test_spec_invariants():
    with pytest.raises(ValueError):
        EulerBendSpec(28.5, 300.0, math.pi / 2)
    with pytest.raises(ValueError):
        EulerBendSpec(300.0, 28.5, 4.0)
    with pytest.raises(ValueError):
        euler_bend_path(reference_euler_bend(), 10)


def test_bend_outputs(bend):
    lines = bend.to_csv().splitlines()
    assert lines[0] == "s_um,x_um,y_um,theta_rad,k_per_um,width_nm"
    assert len(lines) == len(bend.s) + 1
    d = json.loads(bend.to_json())
    assert d["metadata"]["quoted_loss_db"] == 0.01
    assert np.all(bend.width == 950.0)


def test_taper_slopes():
    tapers = reference_tapers()
    assert tapers["abrupt"].width_slope == pytest.approx(0.1625, rel=1e-12)
    assert tapers["adiabatic"].width_slope == pytest.approx(650 / 300e3, rel=1e-12)
    assert tapers["adiabatic"].width_slope == pytest.approx(0.0021667, abs=1e-7)


def test_taper_profile_linear():
    prof = taper_profile(reference_tapers()["abrupt"], 41)
    assert prof.width[0] == 300.0 and prof.width[-1] == 950.0
    assert np.allclose(np.diff(prof.width), 650 / 40)
    assert prof.s[-1] == pytest.approx(4.0)
    assert prof.metadata["quoted_loss_db"] == 0.24
    with pytest.raises(ValueError):
        TaperSpec(300.0, 950.0, 0.0)
