import numpy as np
import pytest

from mirrorlat.dipole import (Dipole, ELECTRIC, MAGNETIC, dipole_energy,
                              mirror_pair_energy,
                              mirror_pair_energy_radial_derivative,
                              orientation_table, reflect_dipole, rotate_vector)

ez = (0.0, 0.0, 1.0)


def test_aligned_pair_energy():
    d = Dipole(ez)
    r = np.array([0, 0, 2.0])
    assert dipole_energy(d, d, r) == pytest.approx(-2 / 8)


def test_orthogonal_pair_energy_vanishes():
    d1 = Dipole((1.0, 0.0, 0.0))
    d2 = Dipole((0.0, 1.0, 0.0))
    assert dipole_energy(d1, d2, [0, 0, 3.0]) == 0.0


def test_bilinearity():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d1 = Dipole(tuple(rng.normal(size=3)))
        d2 = Dipole(tuple(rng.normal(size=3)))
        r = rng.normal(size=3)
        assert dipole_energy(Dipole(tuple(2 * d1.vec)), d2, r) == pytest.approx(
            2 * dipole_energy(d1, d2, r))


def test_magnetic_pair_is_negated():
    m1 = Dipole(ez, MAGNETIC)
    m2 = Dipole((1.0, 0.0, 0.0), MAGNETIC)
    e1 = Dipole(ez)
    e2 = Dipole((1.0, 0.0, 0.0))
    r = np.array([0.5, 0.2, 1.0])
    assert dipole_energy(m1, m2, r) == pytest.approx(-dipole_energy(e1, e2, r))
    with pytest.raises(ValueError, match="mixed"):
        dipole_energy(m1, e1, r)


def test_reflect_rules():
    n = np.array([0.0, 0.0, 1.0])
    assert reflect_dipole(Dipole(ez), n).moment == pytest.approx(ez)          # parallel electric
    assert reflect_dipole(Dipole((1, 0, 0)), n).moment == pytest.approx((-1, 0, 0))
    assert reflect_dipole(Dipole(ez, MAGNETIC), n).moment == pytest.approx((0, 0, -1))
    assert reflect_dipole(Dipole((1, 0, 0), MAGNETIC), n).moment == pytest.approx((1, 0, 0))
    with pytest.raises(ValueError, match="unit"):
        reflect_dipole(Dipole(ez), (0, 0, 1.1))


def test_reflect_involution():
    rng = np.random.default_rng(1)
    for kind in (ELECTRIC, MAGNETIC):
        for _ in range(200):
            d = Dipole(tuple(rng.normal(size=3)), kind)
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            assert reflect_dipole(reflect_dipole(d, n), n).moment == pytest.approx(d.moment)


def test_mirror_pair_closed_form():
    r = np.array([0, 0, 2.0])
    assert mirror_pair_energy(Dipole(ez), r) == pytest.approx(-2 / 8)
    assert mirror_pair_energy(Dipole((1, 0, 0)), r) == pytest.approx(-1 / 8)


def test_two_paths_agree():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        d = Dipole(tuple(rng.normal(size=3)))
        r = rng.normal(size=3)
        rhat = r / np.linalg.norm(r)
        via_reflection = dipole_energy(d, reflect_dipole(d, rhat), r)
        assert mirror_pair_energy(d, r) == pytest.approx(via_reflection, rel=1e-12)


def test_mirror_energy_never_positive():
    rng = np.random.default_rng(3)
    for kind in (ELECTRIC, MAGNETIC):
        for _ in range(5000):
            d = Dipole(tuple(rng.normal(size=3)), kind)
            r = rng.normal(size=3)
            assert mirror_pair_energy(d, r) <= 0.0


def test_scaling_inverse_cube():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = Dipole(tuple(rng.normal(size=3)))
        r = rng.normal(size=3)
        lam = float(rng.uniform(0.5, 3.0))
        assert mirror_pair_energy(d, lam * r) == pytest.approx(
            mirror_pair_energy(d, r) / lam ** 3)


def test_radial_derivative_matches_finite_differences():
    rng = np.random.default_rng(5)
    for kind in (ELECTRIC, MAGNETIC):
        for _ in range(200):
            d = Dipole(tuple(rng.normal(size=3)), kind)
            r = rng.normal(size=3)
            rhat = r / np.linalg.norm(r)
            s = np.linalg.norm(r)
            h = 1e-5 * s
            fd = (mirror_pair_energy(d, (s + h) * rhat)
                  - mirror_pair_energy(d, (s - h) * rhat)) / (2 * h)
            exact = mirror_pair_energy_radial_derivative(d, r)
            assert fd == pytest.approx(exact, rel=1e-6)
            assert exact >= 0.0     # energy rises with separation: attraction


def test_orientation_table_signs():
    rows = orientation_table(Dipole(ez), np.array([0, 0, 2.0]),
                             np.array([1.0, 0, 0]), 16)
    assert len(rows) == 16
    assert all(e <= 0 for _, e in rows)


def test_zero_separation_rejected():
    with pytest.raises(ValueError, match="zero"):
        mirror_pair_energy(Dipole(ez), (0.0, 0.0, 0.0))


def test_rotate_vector_roundtrip():
    v = np.array([1.0, 2.0, 3.0])
    out = rotate_vector(v, (0, 0, 1.0), 2 * np.pi)
    assert out == pytest.approx(v)
