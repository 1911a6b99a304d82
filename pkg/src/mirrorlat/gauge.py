"""Compact abelian gauge fields: U(1) for Monte Carlo, Z_N for exact
enumeration, with the plaquette (Wilson) action.

Link variables are stored per canonical link: an angle in [0, 2pi) for U(1),
a digit in {0..N-1} for Z_N (element ``exp(2 pi i digit / N)``).  "Re tr" is
the real part of the unimodular plaquette element.  The mirror operation on
functionals reflects every element index, conjugates every coefficient, and
inverts orientation-flipped links (``U_<x,y> = U_<y,x>^dagger``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .enumeration import check_budget, digit_chunks
from .lattice import LatticeGeometry, Region

TAU = 2.0 * np.pi


@dataclass(frozen=True)
class GaugeGroup:
    """U(1) (``n=None``) or the cyclic subgroup Z_n."""
    n: int | None = None

    def __post_init__(self):
        if self.n is not None and self.n < 2:
            raise ValueError("Z_N needs N >= 2")

    @property
    def is_u1(self) -> bool:
        return self.n is None

    @property
    def name(self) -> str:
        return "U1" if self.is_u1 else f"Z{self.n}"


U1 = GaugeGroup(None)


def parse_group(name: str) -> GaugeGroup:
    s = str(name).strip().upper()
    if s == "U1":
        return U1
    if s.startswith("Z") and s[1:].isdigit():
        return GaugeGroup(int(s[1:]))
    raise ValueError(f"unknown gauge group {name!r} (use 'U1' or 'Z<N>')")


@dataclass(frozen=True)
class GaugeModel:
    group: GaugeGroup
    inverse_coupling: float = 1.0    # 1/(2 g^2); 0 is the strong-coupling limit

    def __post_init__(self):
        if not np.isfinite(self.inverse_coupling) or self.inverse_coupling < 0:
            raise ValueError("inverse_coupling must be finite and >= 0")


def cold_config(geom: LatticeGeometry, group: GaugeGroup) -> np.ndarray:
    """All links at the identity element."""
    dtype = np.float64 if group.is_u1 else np.int64
    return np.zeros(geom.n_links, dtype=dtype)


def random_config(geom: LatticeGeometry, group: GaugeGroup,
                  rng: np.random.Generator) -> np.ndarray:
    if group.is_u1:
        return rng.uniform(0.0, TAU, geom.n_links)
    return rng.integers(0, group.n, geom.n_links, dtype=np.int64)


# -- field views: batched evaluation contexts --------------------------------

class ZnField:
    """Batch of Z_N configurations with lazy plaquette digits.

    ``digits`` has shape (m, n_links) uint8; element values are
    ``exp(2 pi i d / N)``.  The ``memo`` dict lets evaluators cache per-batch
    intermediate values (each functional is evaluated once per batch even
    when it appears in many correlator products).
    """

    def __init__(self, geom: LatticeGeometry, n: int, digits):
        self.geom = geom
        self.n = int(n)
        self.digits = np.asarray(digits, dtype=np.uint8)
        self._plaq = None
        self.memo = {}
        k = np.arange(self.n)
        self.unit_table = np.exp(2j * np.pi * k / self.n)
        self.cos_table = np.cos(TAU * k / self.n)

    def plaq_digits(self) -> np.ndarray:
        # oriented digit sum per plaquette, kept in uint8 by replacing
        # subtraction with the additive complement (valid for N <= 63) and
        # reducing through a small lookup table
        if self._plaq is None:
            g = self.geom
            n = self.n
            if n <= 63:
                pd = np.zeros((self.digits.shape[0], g.n_plaquettes), dtype=np.uint8)
                comp = (np.arange(256) * (n - 1)) % n   # maps d -> (-d) mod n
                comp8 = comp.astype(np.uint8)
                for k in range(4):
                    col = self.digits[:, g.plaq_links[:, k]]
                    pd += col if g.plaq_signs[0, k] > 0 else comp8[col]
                self._plaq = (np.arange(256) % n).astype(np.uint8)[pd]
            else:
                pd = np.zeros((self.digits.shape[0], g.n_plaquettes), dtype=np.int16)
                for k in range(4):
                    sign = int(g.plaq_signs[0, k])
                    pd += sign * self.digits[:, g.plaq_links[:, k]].astype(np.int16)
                self._plaq = np.mod(pd, n).astype(np.uint8)
        return self._plaq

    def link_digit(self, lid: int) -> np.ndarray:
        return self.digits[:, lid].astype(np.int64)

    def plaq_digit(self, pid: int) -> np.ndarray:
        return self.plaq_digits()[:, pid].astype(np.int64)

    def unit(self, exponents) -> np.ndarray:
        return self.unit_table[np.mod(exponents, self.n)]

    def plaq_re(self, pids) -> np.ndarray:
        """Sum over ``pids`` of Re U_P, per configuration."""
        return self.cos_table[self.plaq_digits()[:, pids]].sum(axis=1)


class U1Field:
    """Batch of U(1) configurations (angles), lazy plaquette angles."""

    def __init__(self, geom: LatticeGeometry, angles):
        self.geom = geom
        self.angles = angles
        self._plaq = None
        self.memo = {}

    def plaq_angles(self) -> np.ndarray:
        if self._plaq is None:
            g = self.geom
            pa = np.zeros((self.angles.shape[0], g.n_plaquettes))
            for k in range(4):
                pa += g.plaq_signs[:, k] * self.angles[:, g.plaq_links[:, k]]
            self._plaq = pa
        return self._plaq

    def link_angle(self, lid: int) -> np.ndarray:
        return self.angles[:, lid]

    def plaq_angle(self, pid: int) -> np.ndarray:
        return self.plaq_angles()[:, pid]

    def plaq_re(self, pids) -> np.ndarray:
        return np.cos(self.plaq_angles()[:, pids]).sum(axis=1)


def make_field(group: GaugeGroup, geom: LatticeGeometry, config):
    cfg = np.asarray(config)
    batch = cfg if cfg.ndim == 2 else cfg[None, :]
    if group.is_u1:
        return U1Field(geom, np.asarray(batch, dtype=np.float64))
    return ZnField(geom, group.n, np.asarray(batch, dtype=np.int64))


# -- action and basic observables -------------------------------------------

def plaquette_value(group: GaugeGroup, geom: LatticeGeometry, config, plaq) -> complex:
    """Path-ordered product of the four oriented links of ``(site, mu, nu)``,
    traversed counterclockwise; a unimodular complex number."""
    site, mu, nu = plaq
    pid = geom.plaquette_id(site, mu, nu)
    field = make_field(group, geom, config)
    if group.is_u1:
        return complex(np.exp(1j * field.plaq_angle(pid)[0]))
    return complex(field.unit(field.plaq_digit(pid))[0])


def wilson_action(model: GaugeModel, geom: LatticeGeometry, config) -> float:
    """``-(1/2g^2) sum_P Re U_P`` over all plaquettes."""
    field = make_field(model.group, geom, config)
    if model.group.is_u1:
        re = np.cos(field.plaq_angles()[0])
    else:
        re = field.cos_table[field.plaq_digits()[0]]
    return float(-model.inverse_coupling * re.sum())


def average_plaquette(geom: LatticeGeometry):
    """Observable callable: mean of Re U_P over all plaquettes."""
    pids = np.arange(geom.n_plaquettes)

    def obs(field):
        return field.plaq_re(pids) / geom.n_plaquettes

    return obs


def gauge_metropolis_sweep(model: GaugeModel, geom: LatticeGeometry, config,
                           rng: np.random.Generator, proposal_width: float = 0.5) -> float:
    """One sweep of sequential link Metropolis with staple-local action.

    U(1) proposals are uniform offsets in [-width, width]; Z_N proposals are
    uniform nonzero digit shifts.  Randoms are pre-drawn in link order, so a
    fixed generator state fixes the trajectory bit-exactly.
    """
    kappa = model.inverse_coupling
    unif_last = rng.random  # drawn after proposals, see below
    if model.group.is_u1:
        if proposal_width <= 0:
            raise ValueError("proposal_width must be > 0 for U(1)")
        prop = rng.uniform(-proposal_width, proposal_width, geom.n_links)
        unif = unif_last(geom.n_links)
        n_acc = kernels.u1_sweep(config, geom.staple_links, geom.staple_signs,
                                 geom.staple_offsets, kappa, prop, unif)
    else:
        n = model.group.n
        # propose a uniform group element (identity shift included): a
        # nonzero-only shift is deterministic for Z_2 and breaks ergodicity
        # at weak coupling
        prop = rng.integers(0, n, geom.n_links, dtype=np.int64)
        unif = unif_last(geom.n_links)
        cos_table = np.cos(TAU * np.arange(n) / n)
        n_acc = kernels.zn_sweep(config, n, geom.staple_links, geom.staple_signs,
                                 geom.staple_offsets, kappa, cos_table, prop, unif)
    return n_acc / geom.n_links


def gauge_transform(group: GaugeGroup, geom: LatticeGeometry, config, site_elems):
    """``U_<x,y> -> g_x U g_y^(-1)``; leaves every plaquette value unchanged."""
    if group.is_u1:
        return np.mod(config + site_elems[geom.link_site] - site_elems[geom.link_head], TAU)
    return np.mod(config + site_elems[geom.link_site] - site_elems[geom.link_head], group.n)


def reflect_config(group: GaugeGroup, geom: LatticeGeometry, config) -> np.ndarray:
    """The mirror-image configuration ``(theta U)_l = U_(theta l)`` with
    orientation-flipped links inverted."""
    vals = np.asarray(config)[geom.link_reflect_id]
    sign = np.where(geom.link_reflect_flip, -1, 1)
    if group.is_u1:
        return np.mod(sign * vals, TAU)
    return np.mod(sign * vals, group.n)


# -- formal functionals ------------------------------------------------------

LINK = "link"
PLAQ = "plaq"


@dataclass(frozen=True)
class GaugeFunctional:
    """Sum of monomials in link/plaquette variables with integer winding
    powers: ``terms = ((coeff, ((kind, id, power), ...)), ...)``."""
    terms: tuple

    def canonical(self) -> "GaugeFunctional":
        acc = {}
        for coeff, factors in self.terms:
            powers = {}
            for kind, eid, p in factors:
                key = (kind, int(eid))
                powers[key] = powers.get(key, 0) + int(p)
            key = tuple(sorted((k, e, p) for (k, e), p in powers.items() if p != 0))
            acc[key] = acc.get(key, 0j) + complex(coeff)
        terms = tuple((c, k) for k, c in sorted(acc.items(), key=lambda kv: kv[0]) if c != 0)
        return GaugeFunctional(terms)

    def elements(self):
        return sorted({(kind, int(eid)) for _, factors in self.terms
                       for kind, eid, _ in factors})


def constant_gauge_functional(c) -> GaugeFunctional:
    return GaugeFunctional(((complex(c), ()),))


def link_functional(geom: LatticeGeometry, link, power: int = 1, coeff=1.0) -> GaugeFunctional:
    site, mu = link
    return GaugeFunctional(((complex(coeff), ((LINK, geom.link_id(site, mu), int(power)),)),))


def plaq_functional(geom: LatticeGeometry, plaq, power: int = 1, coeff=1.0) -> GaugeFunctional:
    site, mu, nu = plaq
    return GaugeFunctional(((complex(coeff), ((PLAQ, geom.plaquette_id(site, mu, nu), int(power)),)),))


def evaluate_gauge_functional(group: GaugeGroup, geom: LatticeGeometry,
                              f: GaugeFunctional, config):
    """Value(s) of the functional on one configuration or a batch."""
    field = make_field(group, geom, config)
    vals = evaluate_on_field(f, field)
    return vals if np.asarray(config).ndim == 2 else complex(vals[0])


def evaluate_on_field(f: GaugeFunctional, field) -> np.ndarray:
    """Functional values over a field batch, memoized per batch."""
    key = (id(f), "values")
    if key in field.memo:
        return field.memo[key]
    m = field.digits.shape[0] if isinstance(field, ZnField) else field.angles.shape[0]
    out = np.zeros(m, dtype=complex)
    for coeff, factors in f.terms:
        if isinstance(field, ZnField):
            e = np.zeros(m, dtype=np.int64)
            for kind, eid, p in factors:
                d = field.link_digit(eid) if kind == LINK else field.plaq_digit(eid)
                e += p * d
            out += coeff * field.unit(e)
        else:
            ang = np.zeros(m)
            for kind, eid, p in factors:
                a = field.link_angle(eid) if kind == LINK else field.plaq_angle(eid)
                ang = ang + p * a
            out += coeff * np.exp(1j * ang)
    field.memo[key] = out
    return out


def _element_region(geom: LatticeGeometry, kind: str, eid: int) -> int:
    table = geom.link_region if kind == LINK else geom.plaq_region
    return int(table[eid])


def require_gauge_support(geom: LatticeGeometry, f: GaugeFunctional,
                          region: Region = Region.PLUS):
    bad = [e for e in f.elements() if _element_region(geom, *e) != region]
    if bad:
        raise ValueError(f"functional support must lie in {region.name}; "
                         f"offending elements {bad}")


def theta_gauge_functional(geom: LatticeGeometry, f: GaugeFunctional) -> GaugeFunctional:
    """Mirror conjugate of a one-sided functional.

    Coefficients are conjugated and every element index reflected; the net
    winding on the reflected canonical element is ``-p``, or ``+p`` when the
    reflection reverses the element's orientation (conjugation of the
    reversed traversal).
    """
    regions = {_element_region(geom, *e) for e in f.elements()}
    if Region.ZERO in regions or len(regions) > 1:
        raise ValueError("functional support must lie entirely in PLUS or "
                         f"entirely in MINUS (regions found: {regions})")
    terms = []
    for coeff, factors in f.terms:
        new_factors = []
        for kind, eid, p in factors:
            if kind == LINK:
                rid = int(geom.link_reflect_id[eid])
                flip = bool(geom.link_reflect_flip[eid])
            else:
                rid = int(geom.plaq_reflect_id[eid])
                flip = bool(geom.plaq_reflect_flip[eid])
            new_factors.append((kind, rid, p if flip else -p))
        terms.append((np.conj(coeff), tuple(new_factors)))
    return GaugeFunctional(tuple(terms)).canonical()


def random_plus_gauge_functional(geom: LatticeGeometry, group: GaugeGroup,
                                 rng: np.random.Generator, max_terms: int = 3,
                                 max_factors: int = 2) -> GaugeFunctional:
    """Seeded random winding polynomial supported on PLUS links/plaquettes."""
    plus = ([(LINK, int(e)) for e in geom.region_ids("link", Region.PLUS)]
            + [(PLAQ, int(e)) for e in geom.region_ids("plaq", Region.PLUS)])
    if not plus:
        raise ValueError("geometry has no PLUS links or plaquettes")
    max_p = (group.n - 1) if not group.is_u1 else 2
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        coeff = complex(rng.normal(), rng.normal())
        n_f = int(rng.integers(1, max_factors + 1))
        factors = []
        for _ in range(n_f):
            kind, eid = plus[int(rng.integers(0, len(plus)))]
            p = int(rng.integers(1, max_p + 1))
            if group.is_u1 and rng.random() < 0.5:
                p = -p
            factors.append((kind, eid, p))
        terms.append((coeff, tuple(factors)))
    return GaugeFunctional(tuple(terms)).canonical()


# -- exact enumeration --------------------------------------------------------

def spanning_tree_links(geom: LatticeGeometry):
    """Link ids of a BFS spanning tree of the site graph (gauge fixing:
    tree links may be set to the identity without changing gauge-invariant
    expectations)."""
    visited = np.zeros(geom.n_sites, dtype=bool)
    visited[0] = True
    tree = []
    frontier = [0]
    adj = [[] for _ in range(geom.n_sites)]
    for lid in range(geom.n_links):
        a, b = geom.link_endpoints(lid)
        adj[a].append((b, lid))
        adj[b].append((a, lid))
    while frontier:
        nxt = []
        for s in frontier:
            for t, lid in adj[s]:
                if not visited[t]:
                    visited[t] = True
                    tree.append(lid)
                    nxt.append(t)
        frontier = nxt
    if not visited.all():
        raise AssertionError("site graph is disconnected")
    return sorted(tree)


class ZnEnumeration:
    """Exhaustive expectation values for a Z_N model.

    With ``gauge_fix_tree=True`` a maximal tree of links is frozen at the
    identity and only the remaining links are enumerated; this is exact for
    gauge-invariant observables and shrinks the budget from ``N^links`` to
    ``N^(links - sites + 1)``.
    """

    def __init__(self, model: GaugeModel, geom: LatticeGeometry,
                 gauge_fix_tree: bool = False, chunk_size: int = 1 << 19):
        if model.group.is_u1:
            raise ValueError("U(1) is not enumerable; use Z_N or Monte Carlo")
        self.model = model
        self.geom = geom
        self.n = model.group.n
        self.chunk_size = chunk_size
        if gauge_fix_tree:
            tree = set(spanning_tree_links(geom))
            self.enum_links = np.array([l for l in range(geom.n_links) if l not in tree],
                                       dtype=np.int64)
        else:
            self.enum_links = np.arange(geom.n_links, dtype=np.int64)
        self.total = check_budget(self.n, len(self.enum_links))

    def expectations(self, observables) -> list:
        """Normalized ``<obs>`` for callables ``obs(field)``, single pass."""
        num = np.zeros(len(observables), dtype=complex)
        den = 0.0
        kappa = self.model.inverse_coupling
        full_set = len(self.enum_links) == self.geom.n_links
        for _, digits in digit_chunks(self.n, len(self.enum_links), self.chunk_size):
            if full_set:
                full = digits
            else:
                full = np.zeros((digits.shape[0], self.geom.n_links),
                                dtype=np.uint8, order="F")
                full[:, self.enum_links] = digits
            field = ZnField(self.geom, self.n, full)
            pd = field.plaq_digits()
            if self.n == 2:
                # Re U_P = 1 - 2 d_P: the Boltzmann weight depends only on
                # the frustrated-plaquette count
                frustrated = pd.sum(axis=1, dtype=np.int64)
                table = np.exp(kappa * (self.geom.n_plaquettes
                                        - 2.0 * np.arange(self.geom.n_plaquettes + 1)))
                w = table[frustrated]
            else:
                w = np.exp(kappa * field.cos_table[pd].sum(axis=1))
            den += w.sum()
            for i, obs in enumerate(observables):
                num[i] += np.sum(w * obs(field))
        return [complex(v / den) for v in num]


def exact_gauge_correlator(model: GaugeModel, geom: LatticeGeometry,
                           f: GaugeFunctional, g: GaugeFunctional,
                           gauge_fix_tree: bool = False) -> complex:
    """``<f g>`` by exhaustive enumeration (Z_N only)."""
    enum = ZnEnumeration(model, geom, gauge_fix_tree=gauge_fix_tree)
    return enum.expectations(
        [lambda field: evaluate_on_field(f, field) * evaluate_on_field(g, field)])[0]
