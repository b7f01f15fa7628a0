"""
Acceptance gate. Every criterion runs at its pinned tolerance; the terminal
summary lists one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from qfc.cmt import calibrate_g, eta_of_pump, p_opt, reference_params, steady_state_sweep
from qfc.config import load_config, run_config
from qfc.layout import bend_arc_length, effective_radius, euler_bend_path, reference_euler_bend
from qfc.ring import (
    eta_max_couplings,
    eta_max_from_losses,
    eta_max_q,
    reference_coupler,
    reference_qset,
    reference_ring,
    reference_triple,
    poling_period,
    qpm_order,
)
from qfc.spectra import DcModel, LineParams, dc_transfer, fit_resonance, synth_transmission
from qfc.system import PowerBudget, channel_count

criterion = pytest.mark.criterion


def fit_round_trip(q0, ql, center=1533.0):
    line = LineParams.from_q(center, q0, ql)
    fw = line.fwhm
    wl = np.linspace(center - 10 * fw, center + 10 * fw, 801)
    return fit_resonance(synth_transmission(wl, line), "over")


@criterion("1 coupling-form ceiling 0.726 +/- 0.01")
def test_criterion_1_coupling_ceiling():
    assert eta_max_couplings(reference_ring(), reference_coupler()) == pytest.approx(0.726, abs=0.01)


@criterion("2 Q-form ceiling 0.698 +/- 0.005")
def test_criterion_2_q_ceiling():
    assert eta_max_q(reference_qset()) == pytest.approx(0.698, abs=0.005)


@criterion("3 QPM order 159 exactly, poling period 2.924 +/- 0.001 um")
def test_criterion_3_qpm():
    t = reference_triple()
    assert (t.m_s, t.m_p, t.m_sf) == (550, 875, 1584)
    order = qpm_order(t)
    assert order == 159
    assert poling_period(74.0, order) == pytest.approx(2.924, abs=1e-3)


@criterion("4 ODE vs closed form over 20 pumps <= 1e-6, P_opt round trip 1e-9, <= 10 s")
def test_criterion_4_cmt_oracle():
    start = time.perf_counter()
    params = calibrate_g(0.57, 360e-6, reference_params())
    assert p_opt(params) == pytest.approx(360e-6, rel=1e-9)
    pumps = np.logspace(-2, 2, 20) * p_opt(params)
    states = steady_state_sweep(params, pumps)
    dev = np.max(np.abs(np.array([s.eta for s in states]) - eta_of_pump(params, pumps)))
    elapsed = time.perf_counter() - start
    assert dev <= 1e-6
    assert elapsed <= 10.0


@criterion("5 spectrum round trips: 4 reference Qs and 100 random pairs within 1%, <= 30 s")
def test_criterion_5_spectrum_round_trip():
    start = time.perf_counter()
    for q0, ql in [(1.01e6, 1.46e5), (8.93e5, 1.64e5)]:
        fit = fit_round_trip(q0, ql)
        assert fit.q_intrinsic == pytest.approx(q0, rel=0.01)
        assert fit.q_loaded == pytest.approx(ql, rel=0.01)
    rng = np.random.default_rng(20240601)
    for _ in range(100):
        ql = 10 ** rng.uniform(4, 6)
        q0 = ql * 10 ** rng.uniform(math.log10(2), math.log10(50))
        fit = fit_round_trip(q0, ql, center=rng.uniform(1500, 1570))
        assert fit.q_intrinsic == pytest.approx(q0, rel=0.01)
        assert fit.q_loaded == pytest.approx(ql, rel=0.01)
    assert time.perf_counter() - start <= 30.0


@criterion("6 Euler bend: 90 deg +/- 1e-6 rad, 81.8 +/- 0.1 um, R_eff within 10% of 50 um, symmetry 1e-6 um")
def test_criterion_6_euler_bend():
    spec = reference_euler_bend()
    path = euler_bend_path(spec)
    assert path.theta[-1] - path.theta[0] == pytest.approx(math.pi / 2, abs=1e-6)
    assert bend_arc_length(spec) == pytest.approx(81.8, abs=0.1)
    assert abs(effective_radius(path) - 50.0) <= 5.0
    p = np.stack([path.x, path.y], axis=1)
    u = (p[-1] - p[0]) / np.linalg.norm(p[-1] - p[0])
    mid = (p[-1] + p[0]) / 2
    mirrored = p - 2 * ((p - mid) @ u)[:, None] * u
    assert np.max(np.linalg.norm(mirrored - p[::-1], axis=1)) <= 1e-6
    m = (len(path.k) - 1) // 2
    assert path.k[m] == pytest.approx(1 / 28.5, rel=1e-12)
    assert np.max(np.abs(path.k - path.k[::-1])) <= 1e-12


@criterion("7 channel_count(20 mW, 0.20, 360 uW) = 11 (> 10)")
def test_criterion_7_budget():
    n = channel_count(PowerBudget(20.0, 0.20, 360.0))
    assert n == 11 and n > 10


@criterion("8a saturation symmetry eta(c P_opt) = eta(P_opt/c), c in {2,5,10}, 1e-9")
def test_criterion_8a_saturation_symmetry():
    params = calibrate_g(0.57, 360e-6, reference_params())
    po = p_opt(params)
    for c in (2, 5, 10):
        assert abs(eta_of_pump(params, c * po) - eta_of_pump(params, po / c)) <= 1e-9


@criterion("8b ceiling scale invariance and monotonicity")
def test_criterion_8b_ceiling_properties():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        a, sfa, sfb, sa, sb = rng.uniform(1e-4, 0.2, 5)
        c = rng.uniform(0.1, 4.0)
        base = eta_max_from_losses(a, sfa, sfb, sa, sb)
        assert eta_max_from_losses(c * a, c * sfa, c * sfb, c * sa, c * sb) == pytest.approx(base, rel=1e-12)
        up = 1.0 + rng.uniform(0.01, 1.0)
        assert eta_max_from_losses(a, sfa, sfb * up, sa, sb) > base
        assert eta_max_from_losses(a, sfa, sfb, sa * up, sb) > base
        assert eta_max_from_losses(a * up, sfa, sfb, sa, sb) < base
        assert eta_max_from_losses(a, sfa * up, sfb, sa, sb) < base
        assert eta_max_from_losses(a, sfa, sfb, sa, sb * up) < base


@criterion("8c directional coupler energy bound bar + cross <= 1")
def test_criterion_8c_dc_bound():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        dc = DcModel(100.0, 1550.0, rng.uniform(0, 1), rng.uniform(-0.05, 0.05), rng.uniform(0, 3))
        bar, cross = dc_transfer(dc, rng.uniform(1500, 1600))
        assert bar >= 0 and cross >= 0 and bar + cross <= 1 + 1e-12


@criterion("8d run_config determinism (byte-identical outputs)")
def test_criterion_8d_determinism():
    cfg, base = load_config("reference")
    first = run_config(cfg, None, base)
    second = run_config(cfg, None, base)
    assert first.to_json() == second.to_json()
    assert first.files == second.files
