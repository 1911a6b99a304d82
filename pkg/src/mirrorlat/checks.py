"""Executable verdicts for the mirror-pair inequality chain.

Two-tier tolerance policy: exact (enumeration) results must satisfy every
inequality to an absolute 1e-12 on unit-normalized correlators — at the
lattice level these are theorems, so an exact-mode failure means an
implementation bug.  Monte Carlo results fail only on a violation beyond
``k_sigma`` jackknife errors (default 3); estimates whose errors could not
be formed (non-positive correlators inside a log, overlap pathologies)
yield "inconclusive" rather than a verdict either way.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyCurve
from .lattice import LatticeGeometry, Region
from .mc import MCParams, mc_samples
from .probes import is_charged, mirror_probe, probe_evaluator, probe_region, rotate_probe
from .stats import Estimate, exact_estimate

EXACT_TOL = 1e-12

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    name: str
    status: str
    margin: float | None = None
    z_score: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def as_dict(self):
        return {
            "check": self.name,
            "status": self.status,
            "margin": None if self.margin is None else float(self.margin),
            "z_score": None if self.z_score is None else float(self.z_score),
            "details": {k: (float(v) if isinstance(v, (int, float, np.floating)) else str(v))
                        for k, v in self.details.items()},
        }


def _margin_verdict(name: str, margin, std_error: float, tol: float,
                    k_sigma: float, details=None) -> Verdict:
    """Pass/fail/inconclusive for a quantity that must be >= 0."""
    details = dict(details or {})
    if not np.isfinite(margin) or not np.isfinite(std_error):
        return Verdict(name, INCONCLUSIVE, details=details)
    if std_error == 0.0:
        status = PASS if margin >= -tol else FAIL
        return Verdict(name, status, margin=float(margin), details=details)
    z = margin / std_error
    status = FAIL if margin < -k_sigma * std_error else PASS
    return Verdict(name, status, margin=float(margin), z_score=float(z), details=details)


def _as_estimate(value) -> Estimate:
    if isinstance(value, Estimate):
        return value
    return exact_estimate(complex(value), 0)


def check_rp(value, tol: float = EXACT_TOL, k_sigma: float = 3.0) -> Verdict:
    """Positivity of a mirror-paired correlator: real part >= 0 and
    imaginary part zero, at the appropriate tolerance tier."""
    est = _as_estimate(value)
    re, im = float(np.real(est.mean)), float(np.imag(est.mean))
    if not np.isfinite(re) or not np.isfinite(im):
        return Verdict("rp", INCONCLUSIVE)
    details = {"re": re, "im": im}
    if est.std_error == 0.0:
        ok = re >= -tol and abs(im) <= tol
        return Verdict("rp", PASS if ok else FAIL, margin=re, details=details)
    sigma = est.std_error
    ok = re >= -k_sigma * sigma and abs(im) <= k_sigma * sigma
    return Verdict("rp", PASS if ok else FAIL, margin=re, z_score=re / sigma,
                   details=details)


def check_schwarz(c12, c11, c22, tol: float = EXACT_TOL, k_sigma: float = 3.0) -> Verdict:
    """``|<f1 theta f2>|^2 <= <f1 theta f1><f2 theta f2>``.

    A diagonal entry negative beyond tolerance is reported as an rp failure.
    """
    e12, e11, e22 = _as_estimate(c12), _as_estimate(c11), _as_estimate(c22)
    for label, est in (("c11", e11), ("c22", e22)):
        v = check_rp(est, tol=tol, k_sigma=k_sigma)
        if v.failed:
            return Verdict("schwarz", FAIL, margin=v.margin,
                           details={"rp_failure": label, **v.details})
    a = float(np.real(e11.mean))
    b = float(np.real(e22.mean))
    x = abs(complex(e12.mean))
    margin = a * b - x * x
    if e11.std_error == e22.std_error == e12.std_error == 0.0:
        return _margin_verdict("schwarz", margin, 0.0, tol, k_sigma,
                               details={"c12_abs": x, "c11": a, "c22": b})
    sigma = np.sqrt((b * e11.std_error) ** 2 + (a * e22.std_error) ** 2
                    + (2 * x * e12.std_error) ** 2)
    return _margin_verdict("schwarz", margin, float(sigma), tol, k_sigma,
                           details={"c12_abs": x, "c11": a, "c22": b})


# -- energy-curve checks -----------------------------------------------------

def _require_uniform_grid(curve: EnergyCurve, minimum: int):
    zs = curve.separations
    if len(zs) < minimum:
        raise ValueError(f"need at least {minimum} separations, got {len(zs)}")
    steps = {b - a for a, b in zip(zs, zs[1:])}
    if len(steps) > 1:
        raise ValueError(f"separations must form a uniform grid, got {zs}")


def _curve_margin(curve: EnergyCurve, coeffs, name, tol, k_sigma, details) -> Verdict:
    """Verdict on ``sum_k coeffs[k] * E(z_k) >= 0``; jackknifed jointly when
    the curve carries its sample blocks."""
    if curve.samples is not None and curve.energy_funcs is not None:
        def fn(means):
            return sum(c * curve.energy_funcs[i](means) for i, c in coeffs)
        est = curve.samples.jackknife(fn)
        return _margin_verdict(name, float(np.real(est.mean)), est.std_error,
                               tol, k_sigma, details)
    vals = curve.values
    errs = np.array([e.std_error for e in curve.estimates])
    margin = sum(c * vals[i] for i, c in coeffs)
    sigma = float(np.sqrt(sum((c * errs[i]) ** 2 for i, c in coeffs)))
    return _margin_verdict(name, margin, sigma, tol, k_sigma, details)


def concavity_scan(curve: EnergyCurve, tol: float = EXACT_TOL,
                   k_sigma: float = 3.0) -> list:
    """Midpoint concavity ``2 E(z1+z2) >= E(2 z1) + E(2 z2)`` for every
    admissible pair on the grid, plus the localized second-difference form
    at every interior point."""
    _require_uniform_grid(curve, 3)
    zs = curve.separations
    pos = {z: i for i, z in enumerate(zs)}
    verdicts = []
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            mid = (zs[i] + zs[j]) / 2
            if mid != int(mid) or int(mid) not in pos:
                continue
            m = pos[int(mid)]
            verdicts.append(_curve_margin(
                curve, [(m, 2.0), (i, -1.0), (j, -1.0)],
                f"concavity-midpoint[z1={zs[i] // 2},z2={zs[j] // 2}]",
                tol, k_sigma, {"z_lo": zs[i], "z_mid": int(mid), "z_hi": zs[j]}))
    for k in range(1, len(zs) - 1):
        verdicts.append(_curve_margin(
            curve, [(k, 2.0), (k - 1, -1.0), (k + 1, -1.0)],
            f"concavity-second-difference[z={zs[k]}]",
            tol, k_sigma, {"z": zs[k]}))
    return verdicts


def monotonicity_check(curve: EnergyCurve, tol: float = EXACT_TOL,
                       k_sigma: float = 3.0) -> Verdict:
    """Attraction: E(z) non-decreasing over the accessible separations.

    On a periodic mirror dimension, separations past extent/2 wrap around
    the second fixed plane (E(z) = E(extent - z)), so differences reaching
    beyond ``curve.accessible_max`` carry no theorem and are skipped.
    """
    if len(curve.separations) < 2:
        raise ValueError("need at least 2 separations")
    worst = None
    for i in range(len(curve.separations) - 1):
        z_hi = curve.separations[i + 1]
        if curve.accessible_max is not None and z_hi > curve.accessible_max:
            continue
        v = _curve_margin(curve, [(i + 1, 1.0), (i, -1.0)], "monotonicity",
                          tol, k_sigma, {"z_lo": curve.separations[i],
                                         "z_hi": z_hi})
        if worst is None or _verdict_order(v) < _verdict_order(worst):
            worst = v
    if worst is None:
        raise ValueError("no separation pair inside the accessible range "
                         f"(max {curve.accessible_max})")
    return worst


def _verdict_order(v: Verdict):
    rank = {FAIL: 0, INCONCLUSIVE: 1, PASS: 2}[v.status]
    return (rank, np.inf if v.margin is None else v.margin)


# -- torque -------------------------------------------------------------------

def torque_scan(model, geom: LatticeGeometry, probe, rotations,
                mode: str = "exact", params: MCParams | None = None,
                gauge_fix_tree: bool = False, tol: float = EXACT_TOL,
                k_sigma: float = 3.0):
    """Orientation energy matrix ``M[i][j] = E(R_i probe, mirror(R_j probe))``
    and the torque verdicts.

    Checks ``2 M[i][j] >= M[i][i] + M[j][j]`` for every pair and that the
    matrix minimum is attained on a diagonal (mirror-symmetric) entry.
    Returns ``(matrix, verdicts)`` with the matrix a list of Estimate rows.
    """
    from .gauge import ZnEnumeration

    oriented = [rotate_probe(geom, probe, r) for r in rotations]
    for k, p in enumerate(oriented):
        if probe_region(geom, p) != Region.PLUS:
            raise ValueError(f"rotation {k} moves the probe out of PLUS")
    mirrors = [mirror_probe(geom, p) for p in oriented]
    n = len(oriented)
    beta = geom.time_extent

    evalp = [probe_evaluator(model.group, geom, p) for p in oriented]
    evalm = [probe_evaluator(model.group, geom, p) for p in mirrors]

    observables, names = [], []
    pair_idx = {}
    for i in range(n):
        for j in range(n):
            pair_idx[(i, j)] = len(observables)
            observables.append(lambda f, a=evalp[i], b=evalm[j]: a(f) * b(f))
            names.append(f"pair_{i}{j}")
    single_p, single_m = [], []
    for i in range(n):
        if is_charged(model.group, oriented[i]):
            single_p.append(None)
            single_m.append(None)
        else:
            single_p.append(len(observables))
            observables.append(evalp[i])
            names.append(f"probe_{i}")
            single_m.append(len(observables))
            observables.append(evalm[i])
            names.append(f"mirror_{i}")

    def energy_fn(i, j):
        from .energy import _pair_energy_fn
        return _pair_energy_fn(beta, pair_idx[(i, j)], single_p[i], single_m[j])

    if mode == "exact":
        enum = ZnEnumeration(model, geom, gauge_fix_tree=gauge_fix_tree)
        means = np.array(enum.expectations(observables))
        matrix = [[exact_estimate(energy_fn(i, j)(means), enum.total)
                   for j in range(n)] for i in range(n)]
        samples = None
    else:
        if params is None:
            raise ValueError("mode='mc' needs MCParams")
        samples = mc_samples(model, geom, observables, params, names=names)
        matrix = [[samples.jackknife(energy_fn(i, j)) for j in range(n)]
                  for i in range(n)]

    def margin_verdict(name, terms, details):
        if samples is not None:
            fn = lambda means: sum(c * energy_fn(i, j)(means) for (i, j), c in terms)
            est = samples.jackknife(fn)
            return _margin_verdict(name, float(np.real(est.mean)), est.std_error,
                                   tol, k_sigma, details)
        margin = sum(c * float(np.real(matrix[i][j].mean)) for (i, j), c in terms)
        return _margin_verdict(name, margin, 0.0, tol, k_sigma, details)

    verdicts = []
    for i in range(n):
        for j in range(i + 1, n):
            verdicts.append(margin_verdict(
                f"torque[{i},{j}]",
                [((i, j), 2.0), ((i, i), -1.0), ((j, j), -1.0)],
                {"i": i, "j": j}))

    vals = np.array([[float(np.real(matrix[i][j].mean)) for j in range(n)]
                     for i in range(n)])
    off = vals[~np.eye(n, dtype=bool)]
    min_margin = (off.min() - vals.diagonal().min()) if off.size else 0.0
    verdicts.append(_margin_verdict(
        "torque-minimum-on-diagonal", float(min_margin), 0.0 if samples is None
        else float(np.mean([matrix[i][j].std_error for i in range(n) for j in range(n)])),
        tol, k_sigma, {"min_diagonal": vals.diagonal().min(),
                       "min_offdiagonal": off.min() if off.size else np.nan}))
    return matrix, verdicts
