"""Scenario configs and runners behind the command-line front end.

Configs are YAML mappings with a strict schema: unknown keys are rejected,
every optional field has a documented default (see DEFAULTS), and semantic
errors name the offending key path.  A run produces a RunReport whose
canonical payload (everything except the wall clock) is byte-reproducible
for a fixed config and seed.
"""
from __future__ import annotations

import json
import time

import numpy as np
import yaml

from . import scalar as sc
from .checks import (FAIL, PASS, Verdict, check_rp, check_schwarz, concavity_scan,
                     monotonicity_check, torque_scan)
from .dipole import Dipole, dipole_energy, mirror_pair_energy, orientation_table, reflect_dipole
from .enumeration import EnumerationBudgetError, check_budget
from .energy import energy_scan
from .gauge import (GaugeModel, ZnEnumeration, evaluate_on_field, parse_group,
                    random_plus_gauge_functional, spanning_tree_links,
                    theta_gauge_functional)
from .lattice import build_geometry
from .mc import MCParams, mc_samples
from .probes import (Conductor, charge_at_distance, plane_rotation, slab_at_distance)

SCENARIOS = ("rp-exact", "rp-mc", "casimir-scan", "torque-scan", "dipole")

DEFAULTS = {
    "geometry": {"boundary": "periodic", "reflection_dim": None, "reflection_plane": 0},
    "model": {"theory": "gauge", "group": "Z2", "inverse_coupling": 1.0,
              "c2": 0.5, "c4": 0.0},
    "functionals": {"count": 100, "seed": 12345, "max_terms": 3,
                    "max_factors": 2, "max_power": 3},
    "probe": {"type": "charge", "q": 1, "alpha": None, "transverse": None},
    "rotations": {"dim_a": 0, "dim_b": 1, "center": None, "count": 4},
    "mc": {"therm_sweeps": 200, "measure_sweeps": 2000, "n_blocks": 20,
           "proposal_width": 0.5, "chains": 1, "measure_every": 1,
           "overlap_threshold": 0.5},
    "dipole": {"kind": "electric", "moment": [0.0, 0.0, 1.0],
               "separation": [0.0, 0.0, 2.0], "axis": [1.0, 0.0, 0.0],
               "orientations": 16},
    "output": {"format": "csv"},
}

_SCHEMA = {
    "scenario": None,
    "geometry": {"extents", "boundary", "reflection_dim", "reflection_plane"},
    "model": {"theory", "group", "inverse_coupling", "c2", "c4"},
    "mode": None,
    "levels": None,
    "gauge_fix_tree": None,
    "functionals": {"count", "seed", "max_terms", "max_factors", "max_power"},
    "probe": {"type", "q", "alpha", "transverse", "cells"},
    "separations": None,
    "rotations": {"dim_a", "dim_b", "center", "count"},
    "mc": {"seed", "therm_sweeps", "measure_sweeps", "n_blocks", "proposal_width",
           "chains", "measure_every", "overlap_threshold"},
    "dipole": {"kind", "moment", "separation", "axis", "orientations"},
    "output": {"format"},
}


class ConfigError(ValueError):
    pass


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}{key}' "
                              f"(allowed: {sorted(allowed)})")


def parse_config(text: str) -> dict:
    """Parses and validates a scenario config, filling documented defaults."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    _reject_unknown(raw, set(_SCHEMA), "")
    for key, sub in _SCHEMA.items():
        if sub is not None and key in raw:
            if not isinstance(raw[key], dict):
                raise ConfigError(f"'{key}' must be a mapping")
            _reject_unknown(raw[key], sub, f"{key}.")

    cfg = {}
    for section, defaults in DEFAULTS.items():
        merged = dict(defaults)
        merged.update(raw.get(section, {}))
        cfg[section] = merged
    for key in ("scenario", "mode", "levels", "gauge_fix_tree", "separations"):
        if key in raw:
            cfg[key] = raw[key]
    cfg.setdefault("gauge_fix_tree", False)
    cfg.setdefault("levels", 3)
    cfg.setdefault("separations", [2, 4, 6])
    if "extents" in raw.get("geometry", {}):
        cfg["geometry"]["extents"] = list(raw["geometry"]["extents"])

    scenario = cfg.get("scenario")
    if scenario is not None and scenario not in SCENARIOS:
        raise ConfigError(f"scenario.{scenario}: unknown scenario "
                          f"(one of {SCENARIOS})")
    if "mode" in cfg and cfg["mode"] not in ("exact", "mc"):
        raise ConfigError("mode: must be 'exact' or 'mc'")
    if cfg["output"]["format"] not in ("csv", "json"):
        raise ConfigError("output.format: must be 'csv' or 'json'")
    return cfg


def _build_geometry(cfg):
    g = cfg["geometry"]
    if "extents" not in g or g["extents"] is None:
        raise ConfigError("geometry.extents is required")
    extents = list(g["extents"])
    rdim = g["reflection_dim"]
    if rdim is None:
        rdim = len(extents) - 1
    try:
        return build_geometry(extents, g["boundary"], rdim, g["reflection_plane"])
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc


def _build_model(cfg):
    m = cfg["model"]
    if m["theory"] == "scalar":
        try:
            return sc.ScalarModel(float(m["c2"]), float(m["c4"]))
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc
    if m["theory"] == "gauge":
        try:
            return GaugeModel(parse_group(m["group"]), float(m["inverse_coupling"]))
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc
    raise ConfigError(f"model.theory: unknown theory {m['theory']!r}")


def _mc_params(cfg) -> MCParams:
    m = dict(cfg["mc"])
    if "seed" not in m or m["seed"] is None:
        raise ConfigError("mc.seed is required for Monte Carlo scenarios "
                          "(seeds are mandatory; there is no entropy default)")
    try:
        return MCParams(**{k: (int(v) if k != "proposal_width" and k != "overlap_threshold"
                               else float(v)) for k, v in m.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"mc: {exc}") from exc


def _check_enum_budget(cfg, geom, model):
    try:
        if isinstance(model, sc.ScalarModel):
            check_budget(int(cfg["levels"]), geom.n_sites)
        else:
            if model.group.is_u1:
                raise ConfigError("model.group: U(1) cannot be enumerated "
                                  "exactly; use mode: mc or a Z_N group")
            n_links = geom.n_links
            if cfg["gauge_fix_tree"]:
                n_links -= len(spanning_tree_links(geom))
            check_budget(model.group.n, n_links)
    except EnumerationBudgetError as exc:
        raise ConfigError(f"enumeration budget: {exc}") from exc


def _probe_factory(cfg, geom, model):
    p = cfg["probe"]
    kind = p["type"]
    if kind == "charge":
        return lambda k: charge_at_distance(geom, int(p["q"]), k,
                                            transverse=p["transverse"])
    if kind == "dielectric-slab":
        if p["alpha"] is None:
            raise ConfigError("probe.alpha is required for dielectric-slab")
        return lambda k: slab_at_distance(geom, k, alpha=float(p["alpha"]))
    if kind == "conductor-slab":
        if model.group.is_u1:
            raise ConfigError("probe: exact conductors exist only for Z_N; on "
                              "U(1) use dielectric-slab with large alpha")
        return lambda k: slab_at_distance(geom, k)
    raise ConfigError(f"probe.type: unknown type {kind!r} for a separation scan")


def _cells_probe(cfg, geom):
    p = cfg["probe"]
    if p.get("cells") is None:
        raise ConfigError("probe.cells is required for torque-scan "
                          "(list of [site-coords, mu, nu])")
    pids = []
    for cell in p["cells"]:
        coords, mu, nu = cell[0], int(cell[1]), int(cell[2])
        try:
            pids.append(geom.plaquette_id(coords, mu, nu))
        except ValueError as exc:
            raise ConfigError(f"probe.cells: {exc}") from exc
    return Conductor(plaquettes=tuple(pids))


# -- runners -------------------------------------------------------------------

def _run_rp_exact(cfg, geom, model):
    fpars = cfg["functionals"]
    rng = np.random.default_rng(int(fpars["seed"]))
    count = int(fpars["count"])
    verdicts = []
    if isinstance(model, sc.ScalarModel):
        levels = int(cfg["levels"])
        fs = [sc.random_plus_functional(geom, rng, fpars["max_terms"],
                                        fpars["max_factors"], fpars["max_power"])
              for _ in range(count)]
        thetas = [sc.theta_functional(geom, f) for f in fs]
        enum = sc.ScalarEnumeration(model, geom, levels)
        obs = [lambda phi, a=f, b=tf: sc.evaluate_functional(a, phi)
               * sc.evaluate_functional(b, phi) for f, tf in zip(fs, thetas)]
        values = enum.expectations(obs)
        for i, v in enumerate(values):
            verdicts.append(_named(check_rp(v), f"rp[{i}]"))
        for i, f in enumerate(fs):
            rhs = sc.factorization_rhs(model, geom, f, levels)
            verdicts.append(_equality_verdict(f"factorization[{i}]", values[i], rhs, 1e-12))
    else:
        fs = [random_plus_gauge_functional(geom, model.group, rng,
                                           fpars["max_terms"], fpars["max_factors"])
              for _ in range(count)]
        thetas = [theta_gauge_functional(geom, f) for f in fs]
        obs = [lambda field, a=f, b=tf: evaluate_on_field(a, field)
               * evaluate_on_field(b, field) for f, tf in zip(fs, thetas)]
        cross = [(i, i + 1) for i in range(0, count - 1, 2)]
        for i, j in cross:
            obs.append(lambda field, a=fs[i], b=thetas[j]:
                       evaluate_on_field(a, field) * evaluate_on_field(b, field))
        enum = ZnEnumeration(model, geom, gauge_fix_tree=bool(cfg["gauge_fix_tree"]))
        values = enum.expectations(obs)
        for i in range(count):
            verdicts.append(_named(check_rp(values[i]), f"rp[{i}]"))
        for k, (i, j) in enumerate(cross):
            v = check_schwarz(values[count + k], values[i], values[j])
            verdicts.append(_named(v, f"schwarz[{i},{j}]"))
    return {"verdicts": [v.as_dict() for v in verdicts]}, verdicts


def _run_rp_mc(cfg, geom, model):
    fpars = cfg["functionals"]
    rng = np.random.default_rng(int(fpars["seed"]))
    count = int(fpars["count"])
    params = _mc_params(cfg)
    if isinstance(model, sc.ScalarModel):
        fs = [sc.random_plus_functional(geom, rng, fpars["max_terms"],
                                        fpars["max_factors"], fpars["max_power"])
              for _ in range(count)]
        thetas = [sc.theta_functional(geom, f) for f in fs]
        obs = [lambda phi, a=f, b=tf: sc.evaluate_functional(a, phi)
               * sc.evaluate_functional(b, phi) for f, tf in zip(fs, thetas)]
    else:
        fs = [random_plus_gauge_functional(geom, model.group, rng,
                                           fpars["max_terms"], fpars["max_factors"])
              for _ in range(count)]
        thetas = [theta_gauge_functional(geom, f) for f in fs]
        obs = [lambda field, a=f, b=tf: evaluate_on_field(a, field)
               * evaluate_on_field(b, field) for f, tf in zip(fs, thetas)]
    names = [f"rp{i}" for i in range(count)]
    samples = mc_samples(model, geom, obs, params, names=names)
    verdicts = [_named(check_rp(samples.estimate(n)), f"rp[{i}]")
                for i, n in enumerate(names)]
    return {"verdicts": [v.as_dict() for v in verdicts],
            "estimates": {n: samples.estimate(n).as_dict() for n in names}}, verdicts


def _run_casimir_scan(cfg, geom, model):
    mode = cfg.get("mode", "exact")
    separations = [int(z) for z in cfg["separations"]]
    if len(separations) < 3:
        raise ConfigError("separations: a scan needs at least 3 points for "
                          "the concavity checks")
    make_probe = _probe_factory(cfg, geom, model)
    params = _mc_params(cfg) if mode == "mc" else None
    try:
        curve = energy_scan(model, geom, make_probe, separations, mode=mode,
                            params=params, gauge_fix_tree=bool(cfg["gauge_fix_tree"]))
    except ValueError as exc:
        raise ConfigError(f"separations: {exc}") from exc
    verdicts = concavity_scan(curve)
    verdicts.append(monotonicity_check(curve))
    return {"verdicts": [v.as_dict() for v in verdicts],
            "curve": list(curve.rows())}, verdicts


def _run_torque_scan(cfg, geom, model):
    mode = cfg.get("mode", "exact")
    probe = _cells_probe(cfg, geom)
    r = cfg["rotations"]
    center = r["center"] if r["center"] is not None else [0] * len(geom.extents)
    rots = [plane_rotation(len(geom.extents), int(r["dim_a"]), int(r["dim_b"]),
                           k, center) for k in range(int(r["count"]))]
    params = _mc_params(cfg) if mode == "mc" else None
    matrix, verdicts = torque_scan(model, geom, probe, rots, mode=mode,
                                   params=params,
                                   gauge_fix_tree=bool(cfg["gauge_fix_tree"]))
    rows = []
    for i, row in enumerate(matrix):
        for j, est in enumerate(row):
            rows.append({"i": i, "j": j,
                         "energy_mean": float(np.real(est.mean)),
                         "energy_stderr": float(est.std_error),
                         "n_samples": est.n_samples})
    return {"verdicts": [v.as_dict() for v in verdicts], "matrix": rows}, verdicts


def _run_dipole(cfg):
    d = cfg["dipole"]
    dip = Dipole(tuple(float(x) for x in d["moment"]), d["kind"])
    r = np.array([float(x) for x in d["separation"]])
    rows = orientation_table(dip, r, np.array([float(x) for x in d["axis"]]),
                             int(d["orientations"]))
    verdicts = []
    for k, (angle, energy) in enumerate(rows):
        verdicts.append(Verdict(f"mirror-energy-sign[{k}]",
                                PASS if energy <= 1e-12 else FAIL,
                                margin=-energy, details={"angle": angle}))
    # cross-validate the closed form against the reflect-then-pair route
    rhat = r / np.linalg.norm(r)
    for k, (angle, energy) in enumerate(rows):
        from .dipole import rotate_vector
        rotated = Dipole(tuple(rotate_vector(dip.vec, np.array(
            [float(x) for x in d["axis"]]), angle)), d["kind"])
        other = dipole_energy(rotated, reflect_dipole(rotated, rhat), r)
        verdicts.append(_equality_verdict(f"two-path-consistency[{k}]",
                                          energy, other, 1e-12))
    table = [{"angle": a, "energy": e} for a, e in rows]
    return {"verdicts": [v.as_dict() for v in verdicts], "table": table}, verdicts


def _named(v: Verdict, name: str) -> Verdict:
    return Verdict(name, v.status, margin=v.margin, z_score=v.z_score,
                   details=v.details)


def _equality_verdict(name, a, b, rel_tol) -> Verdict:
    scale = max(abs(complex(a)), abs(complex(b)), 1e-300)
    rel = abs(complex(a) - complex(b)) / scale
    return Verdict(name, PASS if rel <= rel_tol else FAIL, margin=rel_tol - rel,
                   details={"lhs": complex(a).real, "rhs": complex(b).real,
                            "rel_diff": rel})


def run_scenario(cfg: dict) -> dict:
    """Dispatches a validated config; returns the RunReport as a dict."""
    scenario = cfg.get("scenario")
    if scenario is None:
        raise ConfigError("scenario is required")
    t0 = time.time()
    if scenario == "dipole":
        payload, verdicts = _run_dipole(cfg)
        seed = None
    else:
        geom = _build_geometry(cfg)
        model = _build_model(cfg)
        mode = cfg.get("mode", "mc" if scenario == "rp-mc" else "exact")
        cfg["mode"] = mode
        if mode == "exact":
            _check_enum_budget(cfg, geom, model)
        if scenario == "rp-exact":
            if mode != "exact":
                raise ConfigError("rp-exact runs in exact mode")
            payload, verdicts = _run_rp_exact(cfg, geom, model)
            seed = int(cfg["functionals"]["seed"])
        elif scenario == "rp-mc":
            payload, verdicts = _run_rp_mc(cfg, geom, model)
            seed = int(cfg["mc"]["seed"])
        elif scenario == "casimir-scan":
            payload, verdicts = _run_casimir_scan(cfg, geom, model)
            seed = int(cfg["mc"]["seed"]) if mode == "mc" else int(cfg["functionals"]["seed"])
        elif scenario == "torque-scan":
            payload, verdicts = _run_torque_scan(cfg, geom, model)
            seed = int(cfg["mc"]["seed"]) if mode == "mc" else int(cfg["functionals"]["seed"])
        else:
            raise ConfigError(f"unknown scenario {scenario!r}")
    report = {
        "scenario": scenario,
        "config": _json_safe(cfg),
        "seed": seed,
        **payload,
        "n_fail": sum(1 for v in verdicts if v.failed),
        "n_pass": sum(1 for v in verdicts if v.status == PASS),
        "n_inconclusive": sum(1 for v in verdicts if v.status == "inconclusive"),
    }
    report["wall_clock_s"] = time.time() - t0
    return report


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def canonical_payload(report: dict) -> bytes:
    """Deterministic byte serialization of a report, wall clock excluded."""
    trimmed = {k: v for k, v in report.items() if k != "wall_clock_s"}
    return json.dumps(trimmed, sort_keys=True, ensure_ascii=True).encode()
