import numpy as np
import pytest

from mirrorlat.enumeration import EnumerationBudgetError
from mirrorlat.gauge import (GaugeFunctional, GaugeGroup, GaugeModel, U1,
                             ZnEnumeration, average_plaquette, cold_config,
                             constant_gauge_functional, evaluate_gauge_functional,
                             exact_gauge_correlator, gauge_metropolis_sweep,
                             gauge_transform, link_functional, parse_group,
                             plaq_functional, plaquette_value, random_config,
                             random_plus_gauge_functional, reflect_config,
                             spanning_tree_links, theta_gauge_functional,
                             wilson_action)
from mirrorlat.lattice import build_geometry
from mirrorlat.mc import MCParams, mc_samples


def small_geom():
    return build_geometry([2, 4], "periodic", 1, 0)


def test_parse_group():
    assert parse_group("U1").is_u1
    assert parse_group("z4").n == 4
    with pytest.raises(ValueError):
        parse_group("SU2")
    with pytest.raises(ValueError):
        GaugeGroup(1)


def test_identity_config_trivial_plaquettes():
    g = small_geom()
    cfg = cold_config(g, GaugeGroup(2))
    assert plaquette_value(GaugeGroup(2), g, cfg, ((0, 0), 0, 1)) == 1.0
    model = GaugeModel(GaugeGroup(2), 0.5)
    assert wilson_action(model, g, cfg) == pytest.approx(-0.5 * g.n_plaquettes)


def test_gauge_invariance_of_plaquettes_and_action():
    g = small_geom()
    for group in (GaugeGroup(4), U1):
        rng = np.random.default_rng(1)
        cfg = random_config(g, group, rng)
        elems = (rng.integers(0, 4, g.n_sites) if not group.is_u1
                 else rng.uniform(0, 2 * np.pi, g.n_sites))
        cfg2 = gauge_transform(group, g, cfg, elems)
        for pid in range(g.n_plaquettes):
            plaq = (tuple(int(c) for c in g.site_coords[g.plaq_site[pid]]),
                    int(g.plaq_mu[pid]), int(g.plaq_nu[pid]))
            assert plaquette_value(group, g, cfg2, plaq) == pytest.approx(
                plaquette_value(group, g, cfg, plaq))
        model = GaugeModel(group, 0.7)
        assert wilson_action(model, g, cfg2) == pytest.approx(
            wilson_action(model, g, cfg), rel=1e-12)


def test_shared_link_opposite_orientation():
    # one link touched by two (t,z) plaquettes with opposite circulation
    g = small_geom()
    cfg = cold_config(g, U1)
    lid = g.link_id((0, 1), 1)    # z-link at (t=0, z=1)
    cfg[lid] = 0.3
    # enters cell (0,1) against and cell (1,1) along its circulation
    up = plaquette_value(U1, g, cfg, ((0, 1), 0, 1))
    down = plaquette_value(U1, g, cfg, ((1, 1), 0, 1))
    assert up == pytest.approx(np.exp(-1j * 0.3))
    assert down == pytest.approx(np.exp(+1j * 0.3))


def test_wilson_action_independent_resummation():
    g = small_geom()
    group = GaugeGroup(4)
    model = GaugeModel(group, 0.9)
    rng = np.random.default_rng(3)
    cfg = random_config(g, group, rng)
    total = 0.0
    for pid in range(g.n_plaquettes):
        plaq = (tuple(int(c) for c in g.site_coords[g.plaq_site[pid]]),
                int(g.plaq_mu[pid]), int(g.plaq_nu[pid]))
        total += plaquette_value(group, g, cfg, plaq).real
    assert wilson_action(model, g, cfg) == pytest.approx(-0.9 * total, rel=1e-12)


def test_action_theta_invariant():
    g = small_geom()
    for group in (GaugeGroup(3), U1):
        rng = np.random.default_rng(4)
        cfg = random_config(g, group, rng)
        model = GaugeModel(group, 0.6)
        assert wilson_action(model, g, reflect_config(group, g, cfg)) == \
            pytest.approx(wilson_action(model, g, cfg), rel=1e-12)


def test_reflect_config_involution():
    g = small_geom()
    for group in (GaugeGroup(5), U1):
        cfg = random_config(g, group, np.random.default_rng(8))
        back = reflect_config(group, g, reflect_config(group, g, cfg))
        assert np.allclose(back, np.mod(cfg, 2 * np.pi) if group.is_u1 else cfg)


def test_theta_functional_examples():
    g = small_geom()
    # Polyakov-type line with winding q reflects to effective charge -q
    f = GaugeFunctional(((1.0, (("link", g.link_id((0, 1), 0), 1),
                                ("link", g.link_id((1, 1), 0), 1))),))
    tf = theta_gauge_functional(g, f)
    (coeff, factors), = tf.terms
    assert coeff == 1.0
    assert {(k, p) for k, _, p in factors} == {("link", -1)}
    # involution
    rng = np.random.default_rng(9)
    for _ in range(10):
        f = random_plus_gauge_functional(g, GaugeGroup(4), rng)
        assert theta_gauge_functional(g, theta_gauge_functional(g, f)) == f.canonical()
    # real coefficients stay real
    fp = plaq_functional(g, ((0, 1), 0, 1), coeff=2.0)
    assert theta_gauge_functional(g, fp).terms[0][0] == 2.0


def test_theta_rejects_mixed_support():
    g = small_geom()
    f = GaugeFunctional(((1.0, (("link", g.link_id((0, 1), 0), 1),
                                ("link", g.link_id((0, 3), 0), 1))),))
    with pytest.raises(ValueError, match="entirely"):
        theta_gauge_functional(g, f)


def test_exact_correlator_normalization_and_rp():
    g = small_geom()
    model = GaugeModel(GaugeGroup(2), 0.5)
    one = constant_gauge_functional(1)
    assert exact_gauge_correlator(model, g, one, one) == pytest.approx(1.0)
    for seed in range(30):
        f = random_plus_gauge_functional(g, model.group, np.random.default_rng(seed))
        v = exact_gauge_correlator(model, g, f, theta_gauge_functional(g, f))
        assert v.real >= -1e-12
        assert abs(v.imag) <= 1e-12


def test_charge_two_loop_trivial_in_z2():
    g = small_geom()
    model = GaugeModel(GaugeGroup(2), 0.5)
    loop1 = plaq_functional(g, ((0, 1), 0, 1), power=2)
    loop0 = constant_gauge_functional(1)
    one = constant_gauge_functional(1)
    assert exact_gauge_correlator(model, g, loop1, one) == pytest.approx(
        exact_gauge_correlator(model, g, loop0, one))


def test_u1_not_enumerable():
    g = small_geom()
    with pytest.raises(ValueError, match="not enumerable"):
        ZnEnumeration(GaugeModel(U1, 1.0), g)


def test_enumeration_budget():
    g = build_geometry([2, 4, 4], "periodic", 1, 0)   # 96 links
    with pytest.raises(EnumerationBudgetError, match="2\\^26"):
        ZnEnumeration(GaugeModel(GaugeGroup(2), 0.5), g)


def test_tree_gauge_fixing_matches_full_enumeration():
    g = small_geom()
    model = GaugeModel(GaugeGroup(3), 0.4)
    tree = spanning_tree_links(g)
    assert len(tree) == g.n_sites - 1
    obs = average_plaquette(g)
    full = ZnEnumeration(model, g).expectations([obs])[0]
    fixed = ZnEnumeration(model, g, gauge_fix_tree=True).expectations([obs])[0]
    assert fixed == pytest.approx(full, rel=1e-12)
    # and for a conductor-style indicator functional
    from mirrorlat.probes import Conductor, probe_evaluator
    probe = Conductor(plaquettes=(0, 3))
    ev = probe_evaluator(model.group, g, probe)
    full = ZnEnumeration(model, g).expectations([ev])[0]
    fixed = ZnEnumeration(model, g, gauge_fix_tree=True).expectations([ev])[0]
    assert fixed == pytest.approx(full, rel=1e-12)


def test_strong_coupling_average_plaquette_vanishes():
    g = small_geom()
    model = GaugeModel(GaugeGroup(4), 0.0)    # uniform measure
    params = MCParams(seed=21, therm_sweeps=100, measure_sweeps=4000, n_blocks=20)
    est = mc_samples(model, g, [average_plaquette(g)], params, names=["p"]).estimate("p")
    assert abs(est.mean.real) < 3 * est.std_error


def test_zn_mc_matches_enumeration():
    g = build_geometry([3, 2], "periodic", 1, 0)
    model = GaugeModel(GaugeGroup(4), 0.5)
    obs = average_plaquette(g)
    exact = ZnEnumeration(model, g).expectations([obs])[0]
    params = MCParams(seed=11, therm_sweeps=500, measure_sweeps=20000, n_blocks=20)
    est = mc_samples(model, g, [obs], params, names=["p"]).estimate("p")
    assert abs(est.mean.real - exact.real) < 3 * est.std_error


def test_u1_mc_reproducible_and_mixing():
    g = small_geom()
    model = GaugeModel(U1, 1.0)
    cfgs = []
    for _ in range(2):
        cfg = cold_config(g, U1)
        rng = np.random.default_rng(5)
        rates = [gauge_metropolis_sweep(model, g, cfg, rng, 0.5) for _ in range(100)]
        cfgs.append(cfg.copy())
        assert 0.1 < np.mean(rates) < 1.0
    assert np.array_equal(cfgs[0], cfgs[1])


def test_zn_mc_reproducible():
    g = small_geom()
    model = GaugeModel(GaugeGroup(2), 0.7)
    outs = []
    for _ in range(2):
        cfg = cold_config(g, model.group)
        rng = np.random.default_rng(6)
        for _ in range(60):
            gauge_metropolis_sweep(model, g, cfg, rng, 0.5)
        outs.append(cfg.copy())
    assert np.array_equal(outs[0], outs[1])


def test_evaluate_gauge_functional_single_config():
    g = small_geom()
    cfg = cold_config(g, GaugeGroup(4))
    lid = g.link_id((0, 1), 0)
    cfg[lid] = 1                      # element i in Z4
    f = link_functional(g, ((0, 1), 0), power=1, coeff=2.0)
    assert evaluate_gauge_functional(GaugeGroup(4), g, f, cfg) == pytest.approx(2j)
