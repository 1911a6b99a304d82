"""Real scalar field: nearest-neighbor action, Metropolis sampling,
polynomial functionals, and an exact quadrature-enumeration oracle.

The action is ``S = sum_links 1/2 (phi_x - phi_y)^2 + sum_sites V(phi_x)``
with ``V(phi) = c2 phi^2 + c4 phi^4``.  The exact oracle replaces the field
domain at every site by a finite set of quadrature nodes with strictly
positive weights; positivity of the discrete single-site measure is what the
mirror-factorization identity rests on, so any positive rule is a valid
oracle (Gauss-Hermite against the Gaussian part of V is used for accuracy).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .enumeration import check_budget, digit_chunks
from .lattice import LatticeGeometry, Region


@dataclass(frozen=True)
class ScalarModel:
    """Single-site potential V(phi) = c2 phi^2 + c4 phi^4."""
    c2: float = 0.5
    c4: float = 0.0

    def __post_init__(self):
        if self.c4 < 0:
            raise ValueError("c4 must be >= 0")
        if self.c4 == 0 and self.c2 <= 0:
            raise ValueError("need c2 > 0 when c4 = 0 (normalizable weight)")

    def potential(self, phi):
        return self.c2 * phi ** 2 + self.c4 * phi ** 4


def cold_config(geom: LatticeGeometry) -> np.ndarray:
    return np.zeros(geom.n_sites, dtype=np.float64)


def scalar_action(model: ScalarModel, geom: LatticeGeometry, config) -> float:
    """Full action of a configuration (one real value per site)."""
    phi = np.asarray(config, dtype=np.float64)
    if phi.shape != (geom.n_sites,):
        raise ValueError(f"config must have {geom.n_sites} entries")
    kinetic = 0.5 * np.sum((phi[geom.link_site] - phi[geom.link_head]) ** 2)
    return float(kinetic + np.sum(model.potential(phi)))


def site_action_delta(model: ScalarModel, geom: LatticeGeometry, config,
                      site_id: int, new_value: float) -> float:
    """Local action change for a single-site update (what Metropolis uses)."""
    phi = np.asarray(config, dtype=np.float64)
    old = phi[site_id]
    lo, hi = geom.nbr_offsets[site_id], geom.nbr_offsets[site_id + 1]
    nb = phi[geom.nbr_sites[lo:hi]]
    ds = np.sum(0.5 * (new_value - nb) ** 2 - 0.5 * (old - nb) ** 2)
    ds += model.potential(new_value) - model.potential(old)
    return float(ds)


def metropolis_sweep(model: ScalarModel, geom: LatticeGeometry, config,
                     rng: np.random.Generator, proposal_width: float) -> float:
    """One sweep of sequential single-site Gaussian-proposal Metropolis.

    Sites are visited in fixed (flat index) order; the proposal offsets and
    acceptance uniforms are pre-drawn in that order, which pins the
    trajectory for a given generator state.  Returns the acceptance rate;
    ``config`` is mutated in place.
    """
    if proposal_width <= 0:
        raise ValueError("proposal_width must be > 0")
    prop = rng.normal(0.0, proposal_width, geom.n_sites)
    unif = rng.random(geom.n_sites)
    n_acc = kernels.scalar_sweep(config, geom.nbr_sites, geom.nbr_offsets,
                                 model.c2, model.c4, prop, unif)
    return n_acc / geom.n_sites


# -- polynomial functionals ------------------------------------------------

@dataclass(frozen=True)
class ScalarFunctional:
    """Formal polynomial in site variables with complex coefficients.

    ``terms`` is a tuple of ``(coeff, ((site_id, power), ...))`` monomials.
    """
    terms: tuple

    def canonical(self) -> "ScalarFunctional":
        acc = {}
        for coeff, factors in self.terms:
            powers = {}
            for site, power in factors:
                powers[int(site)] = powers.get(int(site), 0) + int(power)
            key = tuple(sorted((s, p) for s, p in powers.items() if p != 0))
            acc[key] = acc.get(key, 0j) + complex(coeff)
        terms = tuple((c, k) for k, c in sorted(acc.items(), key=lambda kv: kv[0])
                      if c != 0)
        return ScalarFunctional(terms)

    def sites(self):
        return sorted({s for _, factors in self.terms for s, _ in factors})

    def __call__(self, config):
        return evaluate_functional(self, config)


def constant_functional(c) -> ScalarFunctional:
    return ScalarFunctional(((complex(c), ()),))


def site_functional(geom: LatticeGeometry, coords, power: int = 1, coeff=1.0) -> ScalarFunctional:
    return ScalarFunctional(((complex(coeff), ((geom.site_id(coords), power),)),))


def evaluate_functional(f: ScalarFunctional, config):
    """Polynomial value at a configuration.

    ``config`` may be one configuration ``(n_sites,)`` or a batch
    ``(m, n_sites)``; returns a complex scalar or an ``(m,)`` array.
    """
    phi = np.asarray(config, dtype=np.float64)
    batched = phi.ndim == 2
    out = np.zeros(phi.shape[0] if batched else (), dtype=complex)
    for coeff, factors in f.terms:
        term = np.full_like(out, coeff)
        for site, power in factors:
            term = term * (phi[:, site] if batched else phi[site]) ** power
        out = out + term
    return out if batched else complex(out)


def require_support(geom: LatticeGeometry, f: ScalarFunctional, region: Region = Region.PLUS):
    bad = [s for s in f.sites() if geom.site_region[s] != region]
    if bad:
        raise ValueError(f"functional support must lie in {region.name}; "
                         f"offending sites {bad}")


def _require_one_sided(geom: LatticeGeometry, sites, what="functional"):
    regions = {int(geom.site_region[s]) for s in sites}
    if Region.ZERO in regions or len(regions) > 1:
        raise ValueError(f"{what} support must lie entirely in PLUS or entirely "
                         f"in MINUS (regions found: {regions})")


def theta_functional(geom: LatticeGeometry, f: ScalarFunctional) -> ScalarFunctional:
    """Mirror conjugate: every site reflected, every coefficient conjugated.

    Defined for one-sided functionals (so that theta is an involution); a
    PLUS-supported argument yields a MINUS-supported result and vice versa.
    """
    _require_one_sided(geom, f.sites())
    terms = tuple(
        (np.conj(coeff), tuple((int(geom.site_reflect[s]), p) for s, p in factors))
        for coeff, factors in f.terms
    )
    return ScalarFunctional(terms).canonical()


def random_plus_functional(geom: LatticeGeometry, rng: np.random.Generator,
                           max_terms: int = 3, max_factors: int = 2,
                           max_power: int = 3) -> ScalarFunctional:
    """Seeded random polynomial supported on the PLUS sites."""
    plus = geom.region_ids("site", Region.PLUS)
    if plus.size == 0:
        raise ValueError("geometry has no PLUS sites")
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        coeff = complex(rng.normal(), rng.normal())
        n_f = int(rng.integers(1, max_factors + 1))
        factors = tuple(
            (int(rng.choice(plus)), int(rng.integers(1, max_power + 1)))
            for _ in range(n_f)
        )
        terms.append((coeff, factors))
    return ScalarFunctional(tuple(terms)).canonical()


# -- exact quadrature-enumeration oracle ------------------------------------

def quadrature_rule(model: ScalarModel, levels: int):
    """Positive nodes/weights discretizing the single-site measure exp(-V).

    Gauss-Hermite nodes scaled to the Gaussian part of V; any residual
    (quartic) part is folded into the weights, keeping them positive.
    """
    if levels < 2:
        raise ValueError("need at least 2 quadrature levels")
    a = model.c2 + 2.0 * np.sqrt(model.c4) if model.c4 > 0 else model.c2
    if a <= 0:
        a = 2.0 * np.sqrt(model.c4)
    y, w = np.polynomial.hermite.hermgauss(levels)
    nodes = y / np.sqrt(a)
    logw = np.log(w) + y ** 2 - model.potential(nodes) - 0.5 * np.log(a)
    return nodes, logw


class ScalarEnumeration:
    """Exhaustive sum over quadrature-discretized field configurations.

    Caches the weights (and field values when small enough) so a batch of
    functionals can be averaged in a single pass.
    """

    def __init__(self, model: ScalarModel, geom: LatticeGeometry, levels: int,
                 chunk_size: int = 1 << 18):
        self.model = model
        self.geom = geom
        self.levels = int(levels)
        self.total = check_budget(self.levels, geom.n_sites)
        self.chunk_size = chunk_size
        self.nodes, self.logw = quadrature_rule(model, self.levels)

    def _chunk_weights(self, digits):
        phi = self.nodes[digits]
        logw = self.logw[digits].sum(axis=1)
        s_coupling = 0.5 * np.sum(
            (phi[:, self.geom.link_site] - phi[:, self.geom.link_head]) ** 2, axis=1)
        return phi, np.exp(logw - s_coupling)

    def expectations(self, observables):
        """Normalized ``<obs>`` for each callable ``obs(phi_matrix)``."""
        num = np.zeros(len(observables), dtype=complex)
        den = 0.0
        for _, digits in digit_chunks(self.levels, self.geom.n_sites, self.chunk_size):
            phi, w = self._chunk_weights(digits)
            den += w.sum()
            for i, obs in enumerate(observables):
                num[i] += np.sum(w * obs(phi))
        return [complex(v / den) for v in num]


def exact_correlator(model: ScalarModel, geom: LatticeGeometry,
                     f: ScalarFunctional, g: ScalarFunctional, levels: int) -> complex:
    """``<f g>`` by exhaustive enumeration over quadrature configurations."""
    enum = ScalarEnumeration(model, geom, levels)
    return enum.expectations([lambda phi: evaluate_functional(f, phi)
                              * evaluate_functional(g, phi)])[0]


def factorization_check(model: ScalarModel, geom: LatticeGeometry,
                        f: ScalarFunctional, levels: int):
    """Both sides of the mirror factorization identity.

    lhs: ``<f . theta(f)>`` by plain enumeration.  rhs: for every fixed-plane
    configuration, the PLUS half (with its coupling links to the plane) is
    enumerated to form ``|sum_+ w f|^2``, then averaged over the plane with
    its residual weight.  The two answers agree to rounding; rhs is
    manifestly a nonnegative real number.
    """
    lhs = exact_correlator(model, geom, f, theta_functional(geom, f), levels)
    return lhs, factorization_rhs(model, geom, f, levels)


def factorization_rhs(model: ScalarModel, geom: LatticeGeometry,
                      f: ScalarFunctional, levels: int) -> float:
    """The split-measure side of the factorization identity (real, >= 0)."""
    require_support(geom, f, Region.PLUS)
    zero_sites = geom.region_ids("site", Region.ZERO)
    plus_sites = geom.region_ids("site", Region.PLUS)
    check_budget(levels, len(zero_sites) + len(plus_sites))
    nodes, logw = quadrature_rule(model, levels)

    col = {int(s): k for k, s in enumerate(plus_sites)}
    zcol = {int(s): k for k, s in enumerate(zero_sites)}

    def link_ends(region):
        ends = []
        for lid in geom.region_ids("link", region):
            a, b = geom.link_endpoints(lid)
            ends.append((a, b))
        return ends

    plus_links = link_ends(Region.PLUS)   # includes the plane-to-plus couplings
    zero_links = link_ends(Region.ZERO)

    n_plus = len(plus_sites)
    num = 0.0
    den = 0.0
    for _, zdigits in digit_chunks(levels, len(zero_sites), 1 << 12):
        for zrow in zdigits:
            phi0 = nodes[zrow]
            logw0 = logw[zrow].sum()
            s00 = sum(0.5 * (phi0[zcol[a]] - phi0[zcol[b]]) ** 2 for a, b in zero_links)
            w0 = np.exp(logw0 - s00)

            # enumerate the PLUS half against this plane configuration
            partial = 0.0 + 0.0j
            wsum = 0.0
            for _, pdigits in digit_chunks(levels, n_plus, 1 << 16):
                phi_p = nodes[pdigits]
                lw = logw[pdigits].sum(axis=1)
                s_p = np.zeros(len(pdigits))
                for a, b in plus_links:
                    va = phi_p[:, col[a]] if a in col else phi0[zcol[a]]
                    vb = phi_p[:, col[b]] if b in col else phi0[zcol[b]]
                    s_p += 0.5 * (va - vb) ** 2
                w = np.exp(lw - s_p)
                full = np.zeros((len(pdigits), geom.n_sites))
                full[:, plus_sites] = phi_p
                partial += np.sum(w * evaluate_functional(f, full))
                wsum += w.sum()
            num += w0 * abs(partial) ** 2
            den += w0 * wsum ** 2
    return float(num / den)
