"""
JSON configuration schema and the task runner behind the command line.

One document holds a section per subsystem; ``tasks`` lists which of
design, simulate, sweep, fit, bend and budget to execute. Every task
returns a JSON-able section and optional CSV/JSON files. Floats are
rounded to 9 significant digits so identical configs give identical bytes.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import cmt, dispersion, layout, ring, spectra, system

log = logging.getLogger(__name__)

TASKS = ("design", "simulate", "sweep", "fit", "bend", "budget")


class ConfigError(ValueError):
    """Config document does not match the schema or is internally inconsistent."""


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_frac = {"type": "number", "minimum": 0, "maximum": 1}

_index_model = {
    "type": "object",
    "required": ["band", "center_nm", "coeffs", "range_nm"],
    "properties": {
        "band": {"enum": list(dispersion.BANDS)},
        "center_nm": _pos,
        "coeffs": {"type": "array", "items": _num, "minItems": 1, "maxItems": 5},
        "range_nm": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
    },
}

_q = {"type": "object", "required": ["Q0", "Ql"], "properties": {"Q0": _pos, "Ql": _pos}}

_dc = {
    "type": "object",
    "required": ["length_um", "ref_nm", "cross_ref", "slope_rad_per_nm", "band_nm"],
    "properties": {
        "length_um": _pos, "ref_nm": _pos, "cross_ref": _frac, "slope_rad_per_nm": _num,
        "excess_loss_db": {"type": "number", "minimum": 0},
        "band_nm": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
    },
}

_stage = {
    "type": "object",
    "required": ["name", "efficiency"],
    "properties": {"name": {"type": "string"}, "efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["tasks"],
    "properties": {
        "name": {"type": "string"},
        "tasks": {"type": "array", "items": {"enum": list(TASKS)}},
        "ring": {
            "type": "object",
            "required": ["R_um", "w_ring_um", "alpha_db_per_cm"],
            "properties": {"R_um": _pos, "w_ring_um": _pos, "alpha_db_per_cm": {"type": "number", "minimum": 0}},
        },
        "coupler": {
            "type": "object",
            "patternProperties": {
                "^kappa2_(signal|pump|sf)_(A|B)$": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "^(w_wg|gap)_(A|B)_nm$": _pos,
            },
            "additionalProperties": False,
        },
        "modes": {
            "type": "object",
            "required": ["m_s", "m_p", "m_sf", "lambda_s_nm", "lambda_p_nm"],
            "properties": {
                "m_s": {"type": "integer", "minimum": 1},
                "m_p": {"type": "integer", "minimum": 1},
                "m_sf": {"type": "integer", "minimum": 1},
                "lambda_s_nm": _pos, "lambda_p_nm": _pos, "lambda_sf_nm": _pos,
                "M": {"type": "integer"},
            },
        },
        "index_models": {"type": "array", "items": _index_model},
        "q_factors": {"type": "object", "properties": {b: _q for b in dispersion.BANDS}},
        "group_index_override": _pos,
        "dc": {"type": "object", "properties": {"signal": _dc, "pump": _dc}},
        "pulley": {
            "type": "object",
            "required": ["ports"],
            "properties": {
                "ports": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["port", "band", "w_wg_um", "ring_model", "bus_model"],
                        "properties": {
                            "port": {"enum": ["A", "B"]},
                            "band": {"enum": list(dispersion.BANDS)},
                            "w_wg_um": _pos,
                            "ring_model": _index_model,
                            "bus_model": _index_model,
                        },
                    },
                }
            },
        },
        "simulate": {
            "type": "object",
            "required": ["eta_max_measured", "p_opt_W"],
            "properties": {
                "eta_max_measured": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "p_opt_W": _pos, "p_signal_W": _pos,
                "curve_points": {"type": "integer", "minimum": 3},
                "ode_check": {"type": "boolean"},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["parameter", "start", "stop", "points"],
            "properties": {
                "parameter": {"type": "string", "pattern": "^(kappa2_(signal|pump|sf)_(A|B)|alpha_db_per_cm)$"},
                "start": {"type": "number", "minimum": 0},
                "stop": {"type": "number", "minimum": 0},
                "points": {"type": "integer", "minimum": 1},
            },
        },
        "fit": {
            "type": "object",
            "properties": {
                "traces": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["path", "regime"],
                        "properties": {
                            "path": {"type": "string"},
                            "band": {"enum": list(dispersion.BANDS)},
                            "regime": {"enum": ["over", "under"]},
                        },
                    },
                },
                "synthetic": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["band", "center_nm", "Q0", "Ql", "regime"],
                        "properties": {
                            "band": {"enum": list(dispersion.BANDS)},
                            "center_nm": _pos, "Q0": _pos, "Ql": _pos,
                            "regime": {"enum": ["over", "under"]},
                            "noise_sigma": {"type": "number", "minimum": 0},
                            "seed": {"type": "integer"},
                            "span_linewidths": {"type": "number", "minimum": 5},
                            "samples_per_linewidth": {"type": "number", "minimum": 20},
                        },
                    },
                },
            },
        },
        "bend": {
            "type": "object",
            "required": ["r_max_um", "r_min_um", "angle_deg"],
            "properties": {
                "r_max_um": _pos, "r_min_um": _pos,
                "angle_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 180},
                "width_nm": _pos, "n_samples": {"type": "integer", "minimum": 64},
                "quoted_loss_db": {"type": "number", "minimum": 0},
                "tapers": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "w_in_nm", "w_out_nm", "length_um"],
                        "properties": {
                            "name": {"type": "string"},
                            "w_in_nm": _pos, "w_out_nm": _pos, "length_um": _pos,
                            "kind": {"enum": ["abrupt", "adiabatic"]},
                            "quoted_loss_db": {"type": "number", "minimum": 0},
                            "n_samples": {"type": "integer", "minimum": 2},
                        },
                    },
                },
            },
        },
        "budget": {
            "type": "object",
            "required": ["P_source_mW", "eta_couple", "P_per_channel_uW"],
            "properties": {
                "P_source_mW": _pos,
                "eta_couple": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "P_per_channel_uW": _pos,
                "loss_chains": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "items": _stage, "minItems": 1},
                },
                "dfb": {
                    "type": "object",
                    "required": ["lambda0_nm", "T0_C"],
                    "properties": {
                        "lambda0_nm": _pos, "T0_C": _num, "slope_pm_per_C": _pos,
                        "T_range_C": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                        "T_C": {"type": "array", "items": _num},
                    },
                },
                "noise": {
                    "type": "object",
                    "properties": {"c1_cps_per_W": {"type": "number", "minimum": 0}, "c2_cps_per_W2": {"type": "number", "minimum": 0}},
                },
            },
        },
        "metadata": {"type": "object"},
    },
}


def validate(config: Any) -> None:
    """Raise ConfigError naming the JSON path of the first offending field."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (list(e.path), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(f"{err.json_path}: {err.message}")


def load_config(path: str | Path) -> tuple[dict, Path]:
    """Read a config file; ``reference`` names the bundled reference-design config."""
    if str(path) == "reference":
        text = resources.files("qfc.data").joinpath("reference_design.json").read_text()
        return json.loads(text), Path.cwd()
    p = Path(path)
    try:
        cfg = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"$: config file {p} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})") from exc
    return cfg, p.parent


def round_sig(obj: Any, digits: int = 9) -> Any:
    """Recursively round floats to ``digits`` significant figures; non-finite → string."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{digits}g}")
    if isinstance(obj, dict):
        return {str(k): round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [round_sig(v, digits) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(round_sig(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class Report:
    sections: dict = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)
    summary: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        body = dict(self.sections)
        if self.warnings:
            body["warnings"] = list(self.warnings)
        return dumps(body)

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        for name, text in sorted(self.files.items()):
            (out / name).write_text(text)


# -- helpers to build domain objects from the config -------------------------

def _ring(cfg: dict) -> ring.RingParams:
    return ring.RingParams.from_dict(cfg.get("ring") or ring.reference_ring().to_dict())


def _coupler(cfg: dict) -> ring.CouplerSpec:
    if "coupler" not in cfg:
        return ring.reference_coupler()
    return ring.CouplerSpec.from_dict(cfg["coupler"])


def _triple(cfg: dict) -> ring.ModeTriple:
    if "modes" not in cfg:
        return ring.reference_triple()
    return ring.ModeTriple.from_dict(cfg["modes"])


def _models(cfg: dict, triple: ring.ModeTriple, rp: ring.RingParams) -> dict[str, dispersion.IndexModel]:
    if "index_models" in cfg:
        models = {m["band"]: dispersion.IndexModel.from_dict(m) for m in cfg["index_models"]}
        missing = set(dispersion.BANDS) - set(models)
        if missing:
            raise ConfigError(f"$.index_models: missing bands {sorted(missing)}")
        return models
    # constant models anchored on the configured mode numbers
    return {
        band: dispersion.calibrate(
            [(lam, dispersion.resonant_index(triple.modes[band], lam, rp.radius))], 0, band
        )
        for band, lam in triple.wavelengths.items()
    }


def _qset(cfg: dict) -> ring.QSet | None:
    if "q_factors" not in cfg:
        return None
    return ring.QSet.from_dict(cfg["q_factors"])


# -- tasks ---------------------------------------------------------------------

def task_design(cfg: dict, rep: Report, base: Path) -> None:
    rp, cp, triple = _ring(cfg), _coupler(cfg), _triple(cfg)
    models = _models(cfg, triple, rp)
    override = cfg.get("group_index_override", dispersion.DEFAULT_GROUP_INDEX)
    order = ring.qpm_order(triple)
    sec: dict[str, Any] = {
        "qpm_order": order,
        "phase_matched": triple.phase_matched,
        "poling_period_um": ring.poling_period(rp.radius, order) if order > 0 else None,
        "circumference_um": rp.circumference,
        "alpha_roundtrip": ring.alpha_roundtrip(rp),
        "eta_max_couplings": ring.eta_max_couplings(rp, cp),
    }
    q = _qset(cfg)
    if q is not None:
        sec["eta_max_q"] = ring.eta_max_q(q)

    residuals = ring.triple_resonance_residual(models, rp, triple)
    sec["triple_resonance_residual"] = residuals
    sec["triple_resonant"] = ring.is_triple_resonant(residuals)

    n_g, fsr_nm, fallback = {}, {}, []
    for band, lam in triple.wavelengths.items():
        gi = dispersion.group_index_or_default(models[band], lam, override)
        n_g[band] = gi.value
        fsr_nm[band] = spectra.fsr(rp, gi.value, lam)
        if gi.fallback:
            fallback.append(band)
    sec["group_index"] = n_g
    sec["fsr_nm"] = fsr_nm
    if fallback:
        rep.warnings.append(
            f"constant index model for {', '.join(fallback)}: group index override {override} used"
        )
    qs = ring.qset_from_couplings(rp, cp, n_g, triple.wavelengths)
    sec["q_from_couplings"] = qs.to_dict()
    sec["eta_max_q_from_couplings"] = ring.eta_max_q(qs)

    if "pulley" in cfg:
        gaps = []
        for entry in cfg["pulley"]["ports"]:
            lam = triple.wavelengths[entry["band"]]
            gap = ring.pulley_gap(
                dispersion.IndexModel.from_dict(entry["ring_model"]),
                dispersion.IndexModel.from_dict(entry["bus_model"]),
                rp, entry["w_wg_um"], lam,
            )
            gaps.append({"port": entry["port"], "band": entry["band"], "gap_um": gap})
        sec["pulley_gaps"] = gaps

    if "dc" in cfg:
        dc_out = {}
        for band, d in cfg["dc"].items():
            model = spectra.DcModel(
                d["length_um"], d["ref_nm"], d["cross_ref"], d["slope_rad_per_nm"],
                d.get("excess_loss_db", 0.0), tuple(d["band_nm"]),
            )
            bar, cross = spectra.dc_transfer(model, d["ref_nm"])
            dc_out[band] = {"wavelength_nm": d["ref_nm"], "bar": bar, "cross": cross}
        sec["dc"] = dc_out

    rep.sections["design"] = sec
    rep.files["index_models.json"] = dumps([m.to_dict() for m in models.values()])
    rep.summary += [
        f"design: M = {order}, poling period {sec['poling_period_um']:.4f} um" if order > 0 else f"design: M = {order}",
        f"design: eta_max (couplings) = {sec['eta_max_couplings']:.3f}",
    ]
    if "eta_max_q" in sec:
        rep.summary.append(f"design: eta_max (Q factors) = {sec['eta_max_q']:.3f}")


REFERENCE_NORMALIZED_EFFICIENCY = 386_000.0  # %/W as quoted


def task_simulate(cfg: dict, rep: Report, base: Path) -> None:
    q = _qset(cfg)
    if q is None or q.pump is None:
        raise ConfigError("$.q_factors: signal, pump and sf Q factors are required for simulate")
    sim = cfg.get("simulate")
    if sim is None:
        raise ConfigError("$.simulate: section required for the simulate task")
    triple = _triple(cfg)
    params = cmt.CmtParams.from_qset(q, triple.wavelengths)
    params = cmt.calibrate_g(sim["eta_max_measured"], sim["p_opt_W"], params)
    popt = cmt.p_opt(params)
    ceiling = cmt.eta_max(params)
    measured = sim["eta_max_measured"]

    n = sim.get("curve_points", 20)
    pumps = np.logspace(-2, 2, n) * popt
    cavity = cmt.conversion_curve(params, pumps)
    # on-chip curve: same saturation law scaled to the measured peak
    onchip = cmt.ConversionCurve(pumps, cavity.eta * measured / ceiling, measured, popt)
    sec: dict[str, Any] = {
        "calibration": cmt.calibration_report(params, measured),
        "eta_max_cavity": ceiling,
        "p_opt_W": popt,
        "decay_rates_rad_per_s": {
            b: {"kappa_tot": getattr(params, b).kappa_tot, "kappa_ext": getattr(params, b).kappa_ext}
            for b in ("signal", "pump", "sf")
        },
    }
    try:
        norm = cmt.normalized_efficiency(onchip)
        sec["normalized_efficiency_pct_per_W"] = norm
        rep.warnings.append(
            f"normalized efficiency {norm:.4g} %/W (low-power slope 4*eta_max/P_opt) differs from the "
            f"quoted {REFERENCE_NORMALIZED_EFFICIENCY:.0f} %/W; that figure's definition is not stated"
        )
    except ValueError as exc:
        rep.warnings.append(f"normalized efficiency unavailable: {exc}")

    if sim.get("ode_check", False):
        p_sig = sim.get("p_signal_W", 20e-9)
        st = cmt.steady_state_ode(params, popt, p_sig)
        closed = cmt.eta_of_pump(params, popt)
        sec["ode_check"] = {"eta_ode": st.eta, "eta_closed_form": closed, "abs_diff": abs(st.eta - closed), "steps": st.steps}

    rep.sections["simulate"] = sec
    rep.files["conversion_curve.csv"] = cavity.to_csv()
    rep.files["conversion_curve_onchip.csv"] = onchip.to_csv()
    rep.files["calibration.json"] = dumps(cmt.calibration_report(params, measured))
    rep.summary += [
        f"simulate: g = {params.g:.4g} rad/s, P_opt = {popt * 1e6:.1f} uW, cavity eta_max = {ceiling:.3f}",
    ]


def _sweep_point(rp: ring.RingParams, cp: ring.CouplerSpec, parameter: str, value: float) -> float:
    if parameter == "alpha_db_per_cm":
        rp = ring.RingParams(rp.radius, rp.width, value)
    else:
        _, band, port = parameter.split("_")
        cp = cp.replace(band, port, value)
    return ring.eta_max_couplings(rp, cp)


def task_sweep(cfg: dict, rep: Report, base: Path) -> None:
    sw = cfg.get("sweep")
    if sw is None:
        raise ConfigError("$.sweep: section required for the sweep task")
    rp, cp = _ring(cfg), _coupler(cfg)
    values = np.linspace(sw["start"], sw["stop"], sw["points"])
    if sw["parameter"].startswith("kappa2") and np.any(values >= 1):
        raise ConfigError("$.sweep.stop: kappa2 values must stay below 1")
    with ThreadPoolExecutor() as pool:
        etas = list(pool.map(lambda v: _sweep_point(rp, cp, sw["parameter"], float(v)), values))
    lines = [f"{sw['parameter']},eta_max"] + [f"{v:.9g},{e:.9g}" for v, e in zip(values, etas)]
    rep.files["sweep.csv"] = "\n".join(lines) + "\n"
    rep.sections["sweep"] = {"parameter": sw["parameter"], "points": len(values), "eta_max_range": [min(etas), max(etas)]}
    rep.summary.append(f"sweep: {sw['parameter']} over {len(values)} points, eta_max {min(etas):.3f}..{max(etas):.3f}")


def task_fit(cfg: dict, rep: Report, base: Path) -> None:
    fc = cfg.get("fit")
    if fc is None:
        raise ConfigError("$.fit: section required for the fit task")
    results = []
    for i, entry in enumerate(fc.get("traces", [])):
        path = base / entry["path"]
        try:
            trace = spectra.SpectrumTrace.from_csv(path.read_text(), entry.get("band", "signal"))
        except FileNotFoundError as exc:
            raise ConfigError(f"$.fit.traces[{i}].path: {path} not found") from exc
        fit = spectra.fit_resonance(trace, entry["regime"])
        results.append({"source": entry["path"], "band": trace.band, **json.loads(fit.to_json())})
    for entry in fc.get("synthetic", []):
        line = spectra.LineParams.from_q(entry["center_nm"], entry["Q0"], entry["Ql"])
        span = entry.get("span_linewidths", 20.0)
        per = entry.get("samples_per_linewidth", 40.0)
        npts = int(math.ceil(span * per)) + 1
        wl = np.linspace(line.center - span / 2 * line.fwhm, line.center + span / 2 * line.fwhm, npts)
        trace = spectra.synth_transmission(
            wl, line, noise_sigma=entry.get("noise_sigma", 0.0), seed=entry.get("seed", 0), band=entry["band"]
        )
        name = f"trace_{entry['band']}.csv"
        rep.files[name] = trace.to_csv()
        fit = spectra.fit_resonance(trace, entry["regime"])
        results.append({"source": name, "band": entry["band"], "Q0_true": entry["Q0"], "Ql_true": entry["Ql"],
                        **json.loads(fit.to_json())})
    rep.sections["fit"] = results
    rep.files["fits.json"] = dumps(results)
    for r in results:
        rep.summary.append(
            f"fit: {r['band']:6s} Q_l = {r['q_loaded']:.4g}, Q_0 = {r['q_intrinsic']:.4g} ({r['regime']}-coupled)"
        )


def task_bend(cfg: dict, rep: Report, base: Path) -> None:
    bc = cfg.get("bend")
    if bc is None:
        raise ConfigError("$.bend: section required for the bend task")
    try:
        spec = layout.EulerBendSpec(
            bc["r_max_um"], bc["r_min_um"], math.radians(bc["angle_deg"]), bc.get("width_nm", 950.0),
            bc.get("quoted_loss_db"),
        )
    except ValueError as exc:
        raise ConfigError(f"$.bend: {exc}") from exc
    path = layout.euler_bend_path(spec, bc.get("n_samples", 1025))
    sec: dict[str, Any] = {
        "arc_length_um": layout.bend_arc_length(spec),
        "turn_rad": float(path.theta[-1] - path.theta[0]),
        "endpoint_um": [float(path.x[-1]), float(path.y[-1])],
        "quoted_loss_db": spec.quoted_loss_db,
    }
    if abs(abs(spec.angle) - math.pi / 2) <= layout.ANGLE_TOL:
        sec["effective_radius_um"] = layout.effective_radius(path)
    rep.files["bend_path.csv"] = path.to_csv()
    tapers = {}
    for t in bc.get("tapers", []):
        ts = layout.TaperSpec(t["w_in_nm"], t["w_out_nm"], t["length_um"], t.get("kind", "abrupt"), t.get("quoted_loss_db"))
        prof = layout.taper_profile(ts, t.get("n_samples", 101))
        rep.files[f"taper_{t['name']}.csv"] = prof.to_csv()
        tapers[t["name"]] = {"width_slope_nm_per_nm": ts.width_slope, "quoted_loss_db": ts.quoted_loss_db}
    sec["tapers"] = tapers
    rep.sections["bend"] = sec
    line = f"bend: arc length {sec['arc_length_um']:.2f} um"
    if "effective_radius_um" in sec:
        line += f", effective radius {sec['effective_radius_um']:.2f} um"
    rep.summary.append(line)


def task_budget(cfg: dict, rep: Report, base: Path) -> None:
    bc = cfg.get("budget")
    if bc is None:
        raise ConfigError("$.budget: section required for the budget task")
    budget = system.PowerBudget(bc["P_source_mW"], bc["eta_couple"], bc["P_per_channel_uW"])
    sec: dict[str, Any] = {"on_chip_pump_uW": budget.on_chip_uw, "channels": system.channel_count(budget)}
    chains = {}
    for name, stages in sorted(bc.get("loss_chains", {}).items()):
        res = system.chain_efficiency([system.Stage(s["name"], s["efficiency"]) for s in stages])
        chains[name] = {"efficiency": res.efficiency, "loss_db": res.loss_db}
    sec["loss_chains"] = chains
    if "dfb" in bc:
        d = bc["dfb"]
        tuning = system.DfbTuning(d["lambda0_nm"], d["T0_C"], d.get("slope_pm_per_C", 85.5),
                                  tuple(d.get("T_range_C", (15.0, 60.0))))
        try:
            sec["dfb_wavelength_nm"] = {f"{t:g}": system.dfb_wavelength(tuning, t) for t in d.get("T_C", [])}
        except ValueError as exc:
            raise ConfigError(f"$.budget.dfb.T_C: {exc}") from exc
        rp = _ring(cfg)
        n_g = cfg.get("group_index_override", dispersion.DEFAULT_GROUP_INDEX)
        fsr_p = spectra.fsr(rp, n_g, d["lambda0_nm"])
        sec["dfb_delta_T_per_fsr_C"] = system.detuning_temperature(tuning, fsr_p)
    noise_cfg = bc.get("noise", {})
    noise = system.NoiseModel(noise_cfg.get("c1_cps_per_W", system.NoiseModel().c1), noise_cfg.get("c2_cps_per_W2", 0.0))
    sec["noise_cps_at_channel_pump"] = noise.rate(budget.per_channel_uw * 1e-6)
    sec["noise_model"] = {"c1_cps_per_W": noise.c1, "c2_cps_per_W2": noise.c2, "note": "single-anchor placeholder"}
    if "metadata" in cfg:
        sec["metadata"] = cfg["metadata"]
    rep.sections["budget"] = sec
    rep.summary.append(f"budget: {sec['channels']} channels at {budget.per_channel_uw:g} uW each")
    for name, c in chains.items():
        rep.summary.append(f"budget: chain {name}: {c['efficiency']:.3f} ({c['loss_db']:.2f} dB)")


TASK_FUNCS: dict[str, Callable[[dict, Report, Path], None]] = {
    "design": task_design,
    "simulate": task_simulate,
    "sweep": task_sweep,
    "fit": task_fit,
    "bend": task_bend,
    "budget": task_budget,
}


def run_config(config: dict, tasks: list[str] | None = None, base_dir: str | Path = ".") -> Report:
    """
    Validate ``config`` and execute ``tasks`` (default: the config's task list).

    Raises ConfigError for schema or consistency problems; any other
    exception is a runtime failure.
    """
    validate(config)
    rep = Report()
    chosen = config["tasks"] if tasks is None else tasks
    for name in chosen:
        if name not in TASK_FUNCS:
            raise ConfigError(f"$.tasks: unknown task {name!r}")
        log.info("running task %s", name)
        try:
            TASK_FUNCS[name](config, rep, Path(base_dir))
        except (ConfigError, ring.LossRegimeError):
            raise
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"$: task {name}: {exc}") from exc
    return rep
