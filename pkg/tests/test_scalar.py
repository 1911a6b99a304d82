import numpy as np
import pytest

from mirrorlat.lattice import Region, build_geometry
from mirrorlat.scalar import (ScalarEnumeration, ScalarFunctional, ScalarModel,
                              cold_config, constant_functional, evaluate_functional,
                              exact_correlator, factorization_check,
                              metropolis_sweep, quadrature_rule,
                              random_plus_functional, scalar_action,
                              site_action_delta, site_functional, theta_functional)
from mirrorlat.enumeration import EnumerationBudgetError
from mirrorlat.mc import MCParams, mc_samples


def open_chain_geom():
    # periodic time of extent 2, open mirror dim of extent 3
    return build_geometry([2, 3], ["periodic", "open"], 1, 1)


def oracle_geom():
    return build_geometry([4, 3], ["periodic", "open"], 1, 1)


def test_model_validation():
    with pytest.raises(ValueError):
        ScalarModel(c2=0.0, c4=0.0)
    with pytest.raises(ValueError):
        ScalarModel(c2=1.0, c4=-0.1)
    ScalarModel(c2=-0.5, c4=0.2)   # double well is fine


def test_zero_field_zero_action():
    g = oracle_geom()
    assert scalar_action(ScalarModel(0.5, 0.1), g, cold_config(g)) == 0.0


def test_single_link_kinetic_term():
    # kick one site by 1: the kinetic part is one half per attached link
    g = open_chain_geom()
    model = ScalarModel(c2=0.0, c4=0.25)
    phi = cold_config(g)
    sid = g.site_id((0, 2))
    phi[sid] = 1.0
    n_links_at_site = g.nbr_offsets[sid + 1] - g.nbr_offsets[sid]
    expected = 0.5 * n_links_at_site + model.potential(1.0)
    assert scalar_action(model, g, phi) == pytest.approx(expected, rel=1e-14)


def test_action_matches_independent_resummation():
    # brute-force re-summation straight from coordinates
    g = build_geometry([2, 4], "periodic", 1, 0)
    model = ScalarModel(0.3, 0.05)
    rng = np.random.default_rng(2)
    phi = rng.normal(0, 1, g.n_sites)

    total = 0.0
    for t in range(2):
        for z in range(4):
            a = phi[g.site_id((t, z))]
            total += 0.5 * (a - phi[g.site_id(((t + 1) % 2, z))]) ** 2
            total += 0.5 * (a - phi[g.site_id((t, (z + 1) % 4))]) ** 2
            total += model.potential(a)
    assert scalar_action(model, g, phi) == pytest.approx(total, rel=1e-12)


def test_local_delta_matches_full_action_difference():
    g = oracle_geom()
    model = ScalarModel(0.5, 0.1)
    rng = np.random.default_rng(3)
    phi = rng.normal(0, 1, g.n_sites)
    for sid in range(g.n_sites):
        new = float(rng.normal())
        ds = site_action_delta(model, g, phi, sid, new)
        phi2 = phi.copy()
        phi2[sid] = new
        full = scalar_action(model, g, phi2) - scalar_action(model, g, phi)
        assert ds == pytest.approx(full, abs=1e-10)


def test_evaluate_functional_examples():
    g = oracle_geom()
    cfg = cold_config(g)
    assert evaluate_functional(constant_functional(3 - 1j), cfg) == 3 - 1j
    sid = g.site_id((0, 2))
    cfg[sid] = 2.0
    assert evaluate_functional(site_functional(g, (0, 2)), cfg) == 2.0
    f = site_functional(g, (0, 2), power=2, coeff=1 + 1j)
    assert evaluate_functional(f, cfg) == 4 + 4j


def test_theta_examples():
    g = oracle_geom()
    f = site_functional(g, (0, 2), coeff=1j)
    tf = theta_functional(g, f)
    assert tf.terms == ((-1j, ((g.site_id((0, 0)), 1),)),)
    # involution
    assert theta_functional(g, tf) == f.canonical()
    # real coefficients survive untouched
    fr = site_functional(g, (0, 2), power=3, coeff=2.5)
    assert theta_functional(g, fr).terms[0][0] == 2.5


def test_theta_rejects_plane_support():
    g = oracle_geom()
    with pytest.raises(ValueError, match="PLUS or entirely"):
        theta_functional(g, site_functional(g, (0, 1)))


def test_metropolis_tiny_width_accepts_everything():
    g = oracle_geom()
    model = ScalarModel(0.5, 0.0)
    cfg = cold_config(g)
    rate = metropolis_sweep(model, g, cfg, np.random.default_rng(0), 1e-12)
    assert rate == 1.0


def test_metropolis_fixed_seed_reproducible():
    g = oracle_geom()
    model = ScalarModel(0.5, 0.1)
    out = []
    for _ in range(2):
        cfg = cold_config(g)
        rng = np.random.default_rng(42)
        rates = [metropolis_sweep(model, g, cfg, rng, 0.8) for _ in range(50)]
        out.append((cfg.copy(), rates))
    assert np.array_equal(out[0][0], out[1][0])
    assert out[0][1] == out[1][1]


def test_metropolis_gaussian_marginal_matches_covariance():
    # pure Gaussian action: the exact single-site variance is (A^-1)_ss with
    # A the lattice Laplacian plus the mass term
    g = open_chain_geom()
    c2 = 0.3
    model = ScalarModel(c2, 0.0)
    lap = np.zeros((g.n_sites, g.n_sites))
    for lid in range(g.n_links):
        a, b = g.link_endpoints(lid)
        lap[a, a] += 1.0
        lap[b, b] += 1.0
        lap[a, b] -= 1.0
        lap[b, a] -= 1.0
    cov = np.linalg.inv(lap + 2 * c2 * np.eye(g.n_sites))
    sid = g.site_id((0, 0))

    params = MCParams(seed=9, therm_sweeps=500, measure_sweeps=40000, n_blocks=25,
                      proposal_width=1.2)
    samples = mc_samples(model, g, [lambda phi: phi[:, sid] ** 2 + 0j], params,
                         names=["var"])
    est = samples.estimate("var")
    assert abs(est.mean.real - cov[sid, sid]) < 3 * est.std_error


def test_metropolis_quartic_marginal_matches_quadrature():
    # quartic case against the enumeration oracle at high quadrature order
    g = open_chain_geom()
    model = ScalarModel(0.4, 0.3)
    sid = g.site_id((0, 0))
    obs = lambda phi: phi[:, sid] ** 2 + 0j
    exact = ScalarEnumeration(model, g, levels=14).expectations([obs])[0]
    params = MCParams(seed=10, therm_sweeps=500, measure_sweeps=40000, n_blocks=25,
                      proposal_width=1.2)
    est = mc_samples(model, g, [obs], params, names=["var"]).estimate("var")
    assert abs(est.mean.real - exact.real) < 3 * est.std_error


def test_exact_correlator_normalization_and_commutativity():
    g = oracle_geom()
    model = ScalarModel(0.5, 0.1)
    one = constant_functional(1)
    assert exact_correlator(model, g, one, one, 3) == pytest.approx(1.0)
    rng = np.random.default_rng(4)
    f = random_plus_functional(g, rng)
    h = random_plus_functional(g, rng)
    assert exact_correlator(model, g, f, h, 3) == pytest.approx(
        exact_correlator(model, g, h, f, 3))


def test_reflection_positivity_exact_small():
    g = open_chain_geom()
    model = ScalarModel(0.5, 0.1)
    for seed in range(30):
        f = random_plus_functional(g, np.random.default_rng(seed))
        v = exact_correlator(model, g, f, theta_functional(g, f), 3)
        assert v.real >= -1e-12
        assert abs(v.imag) <= 1e-12


def test_factorization_identity():
    g = open_chain_geom()
    model = ScalarModel(0.5, 0.1)
    one = constant_functional(1)
    lhs, rhs = factorization_check(model, g, one, 3)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0)
    for seed in range(10):
        f = random_plus_functional(g, np.random.default_rng(100 + seed))
        lhs, rhs = factorization_check(model, g, f, 3)
        assert rhs >= 0.0
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_mc_matches_exact_correlator():
    g = open_chain_geom()
    model = ScalarModel(0.5, 0.1)
    f = site_functional(g, (0, 2))
    tf = theta_functional(g, f)
    obs = lambda phi: evaluate_functional(f, phi) * evaluate_functional(tf, phi)
    exact = ScalarEnumeration(model, g, levels=14).expectations([obs])[0]
    params = MCParams(seed=12, therm_sweeps=500, measure_sweeps=30000, n_blocks=25,
                      proposal_width=1.2)
    est = mc_samples(model, g, [obs], params, names=["c"]).estimate("c")
    assert abs(est.mean.real - exact.real) < 3 * est.std_error


def test_enumeration_budget_enforced():
    g = build_geometry([4, 4, 4], "periodic", 1, 0)   # 64 sites
    with pytest.raises(EnumerationBudgetError, match="2\\^26"):
        ScalarEnumeration(ScalarModel(0.5, 0.0), g, levels=3)


def test_quadrature_weights_positive():
    for model in (ScalarModel(0.5, 0.0), ScalarModel(0.5, 0.3),
                  ScalarModel(-0.5, 0.2)):
        nodes, logw = quadrature_rule(model, 8)
        assert np.all(np.isfinite(logw))
        assert len(nodes) == 8


def test_canonical_merges_terms():
    f = ScalarFunctional(((1.0, ((3, 1), (3, 1))), (2.0, ((3, 2),))))
    assert f.canonical().terms == ((3 + 0j, ((3, 2),)),)
