import numpy as np
import pytest

from mirrorlat.checks import (FAIL, INCONCLUSIVE, PASS, check_rp, check_schwarz,
                              concavity_scan, monotonicity_check, torque_scan)
from mirrorlat.energy import EnergyCurve, energy_scan
from mirrorlat.gauge import GaugeGroup, GaugeModel
from mirrorlat.lattice import build_geometry
from mirrorlat.mc import MCParams
from mirrorlat.probes import Conductor, charge_at_distance, plane_rotation
from mirrorlat.stats import Estimate, exact_estimate


def curve_from_values(zs, values, stderr=0.0):
    if stderr:
        ests = tuple(Estimate(v, stderr, 100, 10) for v in values)
    else:
        ests = tuple(exact_estimate(v, 1) for v in values)
    return EnergyCurve(tuple(zs), ests)


def test_check_rp_exact_examples():
    assert check_rp(0.0).status == PASS           # boundary value
    assert check_rp(-1e-6).status == FAIL         # clear violation
    assert check_rp(1e-13 + 1e-13j).status == PASS
    assert check_rp(1.0 + 1e-6j).status == FAIL   # imaginary leak


def test_check_rp_mc_examples():
    est = Estimate(-0.001 + 0j, 0.01, 100, 10)
    assert check_rp(est).status == PASS           # within noise
    assert check_rp(Estimate(-0.1 + 0j, 0.01, 100, 10)).status == FAIL
    assert check_rp(Estimate(complex("nan"), 1.0, 1, 2)).status == INCONCLUSIVE


def test_check_schwarz_examples():
    # saturation at f1 = f2
    assert check_schwarz(0.7, 0.7, 0.7).status == PASS
    assert check_schwarz(0.5, 1.0, 1.0).status == PASS
    assert check_schwarz(1.1, 1.0, 1.0).status == FAIL
    # a negative diagonal propagates as an rp failure
    v = check_schwarz(0.1, -1e-6, 1.0)
    assert v.status == FAIL and v.details.get("rp_failure") == "c11"


def test_concavity_synthetic_concave_passes():
    zs = [2, 4, 6]
    curve = curve_from_values(zs, [-1 / z for z in zs])
    verdicts = concavity_scan(curve)
    assert len(verdicts) == 2     # one midpoint triple + one interior point
    assert all(v.status == PASS for v in verdicts)


def test_concavity_synthetic_convex_fails():
    zs = [2, 4, 6]
    curve = curve_from_values(zs, [z ** 2 for z in zs])
    assert all(v.status == FAIL for v in concavity_scan(curve))


def test_concavity_grid_requirements():
    with pytest.raises(ValueError, match="at least 3"):
        concavity_scan(curve_from_values([2, 4], [0.0, 0.0]))
    with pytest.raises(ValueError, match="uniform"):
        concavity_scan(curve_from_values([2, 4, 8], [0.0, 0.0, 0.0]))


def test_monotonicity_examples():
    assert monotonicity_check(
        curve_from_values([2, 4, 6], [-1.0, -0.5, -0.25])).status == PASS
    assert monotonicity_check(
        curve_from_values([2, 4], [-0.25, -0.5])).status == FAIL
    with pytest.raises(ValueError, match="at least 2"):
        monotonicity_check(curve_from_values([2], [0.0]))


def test_monotonicity_respects_accessible_range():
    ests = tuple(exact_estimate(v, 1) for v in (-1.0, -0.5, -1.0))
    curve = EnergyCurve((2, 4, 6), ests, accessible_max=4)
    assert monotonicity_check(curve).status == PASS     # the 4->6 drop is aliased
    curve_full = EnergyCurve((2, 4, 6), ests)
    assert monotonicity_check(curve_full).status == FAIL


def test_mc_margins_use_sigma():
    curve = curve_from_values([2, 4, 6], [-1.0, -0.5, -0.52], stderr=0.05)
    # slight non-monotonicity well inside 3 sigma
    assert monotonicity_check(curve).status == PASS
    curve = curve_from_values([2, 4, 6], [-1.0, -0.5, -0.8], stderr=0.05)
    assert monotonicity_check(curve).status == FAIL


def test_torque_single_rotation_trivial():
    g = build_geometry([2, 2, 3], ["periodic", "periodic", "open"], 2, 1)
    model = GaugeModel(GaugeGroup(2), 0.5)
    probe = Conductor(plaquettes=(g.plaquette_id((0, 0, 2), 0, 1),))
    rots = [plane_rotation(3, 0, 1, 0, center=(0, 0, 0))]
    matrix, verdicts = torque_scan(model, g, probe, rots, mode="exact",
                                   gauge_fix_tree=True)
    assert len(matrix) == 1
    assert all(v.status == PASS for v in verdicts)


def test_torque_full_matrix_exact():
    g = build_geometry([2, 2, 3], ["periodic", "periodic", "open"], 2, 1)
    model = GaugeModel(GaugeGroup(2), 0.5)
    cell = g.plaquette_id((0, 0, 2), 0, 1)
    vert = g.plaquette_id((0, 0, 1), 0, 2)
    probe = Conductor(plaquettes=(cell, vert))
    rots = [plane_rotation(3, 0, 1, k, center=(0, 0, 0)) for k in range(4)]
    matrix, verdicts = torque_scan(model, g, probe, rots, mode="exact",
                                   gauge_fix_tree=True)
    vals = np.array([[m.mean.real for m in row] for row in matrix])
    # mirror-pair symmetry of the energy matrix
    assert np.allclose(vals, vals.T, atol=1e-12)
    # rotations are lattice symmetries commuting with the mirror: circulant
    for k in range(1, 4):
        assert vals[0, k] == pytest.approx(vals[1, (1 + k) % 4], rel=1e-10)
    assert all(v.status == PASS for v in verdicts)
    # the aligned (mirror-symmetric) orientation is strictly preferred here
    off = vals[~np.eye(4, dtype=bool)]
    assert vals.diagonal().min() < off.min() - 1e-6


def test_mc_verdicts_do_not_flip_with_more_statistics():
    # theorem-backed check: doubling the sweeps must not turn pass into fail
    g = build_geometry([2, 5], ["periodic", "open"], 1, 2)
    model = GaugeModel(GaugeGroup(2), 0.6)
    statuses = []
    for sweeps in (2000, 4000):
        params = MCParams(seed=31, therm_sweeps=300, measure_sweeps=sweeps,
                          n_blocks=20)
        curve = energy_scan(model, g, lambda k: charge_at_distance(g, 1, k),
                            [2, 4], mode="mc", params=params)
        statuses.append(monotonicity_check(curve).status)
    assert not (statuses[0] == PASS and statuses[1] == FAIL)
