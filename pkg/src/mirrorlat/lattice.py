"""Hypercubic lattice geometry with a site-plane mirror reflection.

Coordinates are tuples ``(x0, x1, ..., x_{d-1})`` with dimension 0 the
Euclidean time direction (always periodic; the inverse temperature is the
time extent, lattice spacing fixed to 1).  One dimension carries the mirror:
sites are reflected through the fixed plane ``z -> 2*plane - z`` (mod extent
when periodic).  Every site, link and plaquette is classified into one of the
regions PLUS / ZERO / MINUS relative to the mirror.

Element conventions:
  * a link is ``(site, mu)`` and points from ``site`` to ``site + mu_hat``;
  * a plaquette is ``(site, mu, nu)`` with ``mu < nu``, traversed
    counterclockwise ``site -> +mu -> +nu -> -mu -> -nu``;
  * reflected links/plaquettes whose traversal reverses relative to the
    canonical representative carry ``flipped=True`` (the group element of a
    flipped link enters as its inverse, ``U_<x,y> = U_<y,x>^dagger``).

All derived index tables are numpy arrays frozen after construction, so a
geometry can be shared freely between concurrent workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Region(IntEnum):
    PLUS = 1
    ZERO = 0
    MINUS = -1


PERIODIC = "periodic"
OPEN = "open"


def _freeze(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatticeGeometry:
    """Validated lattice with precomputed index and reflection tables.

    Construct with :func:`build_geometry`; the constructor itself performs
    the validation and table building.
    """

    extents: tuple
    boundary: tuple          # "periodic" / "open" per dimension
    reflection_dim: int
    reflection_plane: int

    # derived tables, filled in __post_init__
    n_sites: int = field(init=False)
    n_links: int = field(init=False)
    n_plaquettes: int = field(init=False)

    def __post_init__(self):
        extents = tuple(int(e) for e in self.extents)
        boundary = tuple(self.boundary)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "boundary", boundary)
        self._validate()
        self._build_sites()
        self._build_links()
        self._build_plaquettes()
        self._build_reflection()
        self._build_regions()
        self._build_neighbors()
        self._build_staples()

    # -- validation -----------------------------------------------------

    def _validate(self):
        d = len(self.extents)
        if d < 2 or d > 4:
            raise ValueError(f"dimension must be 2..4, got {d}")
        if len(self.boundary) != d:
            raise ValueError("boundary flags must match number of extents")
        for e in self.extents:
            if e < 2:
                raise ValueError(f"extents must be >= 2, got {self.extents}")
        for b in self.boundary:
            if b not in (PERIODIC, OPEN):
                raise ValueError(f"boundary flag must be 'periodic' or 'open', got {b!r}")
        if self.boundary[0] != PERIODIC:
            raise ValueError("the time dimension (index 0) must be periodic")
        r = self.reflection_dim
        if not 0 <= r < d:
            raise ValueError(f"reflection_dim {r} out of range for dimension {d}")
        L = self.extents[r]
        p = self.reflection_plane
        if self.boundary[r] == PERIODIC:
            if L % 2 != 0:
                raise ValueError(
                    f"periodic reflection dimension needs an even extent, got {L}"
                )
            if not 0 <= p < L:
                raise ValueError(f"reflection_plane {p} outside extent {L}")
        else:
            # open boundary: the plane must sit at the centre, otherwise the
            # reflection maps sites off the lattice
            if L % 2 == 0 or p != (L - 1) // 2:
                raise ValueError(
                    "open reflection dimension needs an odd extent with the "
                    f"plane at the centre (extent {L}, plane {p})"
                )

    # -- sites ----------------------------------------------------------

    def _build_sites(self):
        d = len(self.extents)
        n = int(np.prod(self.extents))
        strides = np.ones(d, dtype=np.int64)
        for k in range(d - 2, -1, -1):
            strides[k] = strides[k + 1] * self.extents[k + 1]
        coords = np.empty((n, d), dtype=np.int64)
        idx = np.arange(n, dtype=np.int64)
        rem = idx.copy()
        for k in range(d):
            coords[:, k] = rem // strides[k]
            rem = rem % strides[k]
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "_strides", _freeze(strides))
        object.__setattr__(self, "site_coords", _freeze(coords))

    def site_id(self, coords) -> int:
        """Flat index of a site, wrapping periodic coordinates."""
        c = self.wrap(coords)
        return int(np.dot(c, self._strides))

    def wrap(self, coords):
        """Normalize coordinates; raises if an open coordinate is outside."""
        c = np.asarray(coords, dtype=np.int64).copy()
        if c.shape[-1] != len(self.extents):
            raise ValueError(f"expected {len(self.extents)} coordinates, got {c.shape[-1]}")
        for k, (L, b) in enumerate(zip(self.extents, self.boundary)):
            if b == PERIODIC:
                c[..., k] %= L
            else:
                if np.any((c[..., k] < 0) | (c[..., k] >= L)):
                    raise ValueError(f"coordinate {coords} outside open extent {L} in dim {k}")
        return c

    def _shift_site(self, sid: int, mu: int, step: int):
        """Neighbor site id in direction mu, or None across an open edge."""
        c = self.site_coords[sid].copy()
        c[mu] += step
        L = self.extents[mu]
        if self.boundary[mu] == PERIODIC:
            c[mu] %= L
        elif not 0 <= c[mu] < L:
            return None
        return int(np.dot(c, self._strides))

    # -- links ----------------------------------------------------------

    def _build_links(self):
        d = len(self.extents)
        link_site, link_dir = [], []
        link_table = -np.ones((self.n_sites, d), dtype=np.int64)
        for sid in range(self.n_sites):
            for mu in range(d):
                if self._shift_site(sid, mu, +1) is None:
                    continue
                link_table[sid, mu] = len(link_site)
                link_site.append(sid)
                link_dir.append(mu)
        object.__setattr__(self, "n_links", len(link_site))
        object.__setattr__(self, "link_site", _freeze(np.array(link_site, dtype=np.int64)))
        object.__setattr__(self, "link_dir", _freeze(np.array(link_dir, dtype=np.int64)))
        object.__setattr__(self, "_link_table", _freeze(link_table))
        head = np.array([self._shift_site(int(s), int(m), +1)
                         for s, m in zip(link_site, link_dir)], dtype=np.int64)
        object.__setattr__(self, "link_head", _freeze(head))

    def link_id(self, coords, mu: int) -> int:
        lid = self._link_table[self.site_id(coords), mu]
        if lid < 0:
            raise ValueError(f"no link at {tuple(coords)} in direction {mu}")
        return int(lid)

    def link_endpoints(self, lid: int):
        sid = int(self.link_site[lid])
        mu = int(self.link_dir[lid])
        return sid, self._shift_site(sid, mu, +1)

    # -- plaquettes -------------------------------------------------------

    def _build_plaquettes(self):
        d = len(self.extents)
        p_site, p_mu, p_nu, p_links, p_signs = [], [], [], [], []
        p_table = {}
        for sid in range(self.n_sites):
            for mu in range(d):
                for nu in range(mu + 1, d):
                    s_mu = self._shift_site(sid, mu, +1)
                    s_nu = self._shift_site(sid, nu, +1)
                    if s_mu is None or s_nu is None:
                        continue
                    # counterclockwise: (s,mu)+, (s+mu,nu)+, (s+nu,mu)-, (s,nu)-
                    l1 = self._link_table[sid, mu]
                    l2 = self._link_table[s_mu, nu]
                    l3 = self._link_table[s_nu, mu]
                    l4 = self._link_table[sid, nu]
                    if min(l1, l2, l3, l4) < 0:
                        continue
                    p_table[(sid, mu, nu)] = len(p_site)
                    p_site.append(sid)
                    p_mu.append(mu)
                    p_nu.append(nu)
                    p_links.append((l1, l2, l3, l4))
                    p_signs.append((1, 1, -1, -1))
        object.__setattr__(self, "n_plaquettes", len(p_site))
        object.__setattr__(self, "plaq_site", _freeze(np.array(p_site, dtype=np.int64)))
        object.__setattr__(self, "plaq_mu", _freeze(np.array(p_mu, dtype=np.int64)))
        object.__setattr__(self, "plaq_nu", _freeze(np.array(p_nu, dtype=np.int64)))
        object.__setattr__(self, "plaq_links", _freeze(np.array(p_links, dtype=np.int64)))
        object.__setattr__(self, "plaq_signs", _freeze(np.array(p_signs, dtype=np.int8)))
        object.__setattr__(self, "_plaq_table", p_table)

    def plaquette_id(self, coords, mu: int, nu: int) -> int:
        if mu >= nu:
            raise ValueError(f"plaquette needs mu < nu, got ({mu},{nu})")
        key = (self.site_id(coords), mu, nu)
        if key not in self._plaq_table:
            raise ValueError(f"no plaquette at {tuple(coords)} in plane ({mu},{nu})")
        return self._plaq_table[key]

    # -- reflection -------------------------------------------------------

    def _reflect_coord(self, z: int) -> int:
        r = self.reflection_dim
        L = self.extents[r]
        z2 = 2 * self.reflection_plane - z
        return z2 % L if self.boundary[r] == PERIODIC else z2

    def _build_reflection(self):
        r = self.reflection_dim
        L = self.extents[r]
        p = self.reflection_plane

        coords = self.site_coords.copy()
        z = coords[:, r]
        z2 = 2 * p - z
        if self.boundary[r] == PERIODIC:
            z2 = z2 % L
        coords[:, r] = z2
        site_reflect = coords @ self._strides

        link_reflect = np.empty(self.n_links, dtype=np.int64)
        link_flip = np.zeros(self.n_links, dtype=bool)
        for lid in range(self.n_links):
            sid = int(self.link_site[lid])
            mu = int(self.link_dir[lid])
            c = self.site_coords[sid].copy()
            if mu == r:
                # the reflected segment points backwards along r; its
                # canonical representative starts one step lower
                c[r] = 2 * p - c[r] - 1
                if self.boundary[r] == PERIODIC:
                    c[r] %= L
                link_reflect[lid] = self._link_table[int(np.dot(c, self._strides)), mu]
                link_flip[lid] = True
            else:
                link_reflect[lid] = self._link_table[int(site_reflect[sid]), mu]
        if np.any(link_reflect < 0):
            raise AssertionError("reflection mapped a link off the lattice")

        plaq_reflect = np.empty(self.n_plaquettes, dtype=np.int64)
        plaq_flip = np.zeros(self.n_plaquettes, dtype=bool)
        for pid in range(self.n_plaquettes):
            sid = int(self.plaq_site[pid])
            mu = int(self.plaq_mu[pid])
            nu = int(self.plaq_nu[pid])
            c = self.site_coords[sid].copy()
            if r in (mu, nu):
                c[r] = 2 * p - c[r] - 1
                if self.boundary[r] == PERIODIC:
                    c[r] %= L
                plaq_flip[pid] = True   # circulation reverses when one leg flips
            else:
                c[r] = self._reflect_coord(c[r])
            plaq_reflect[pid] = self._plaq_table[(int(np.dot(c, self._strides)), mu, nu)]

        object.__setattr__(self, "site_reflect", _freeze(site_reflect))
        object.__setattr__(self, "link_reflect_id", _freeze(link_reflect))
        object.__setattr__(self, "link_reflect_flip", _freeze(link_flip))
        object.__setattr__(self, "plaq_reflect_id", _freeze(plaq_reflect))
        object.__setattr__(self, "plaq_reflect_flip", _freeze(plaq_flip))

    # -- regions ----------------------------------------------------------

    def _build_regions(self):
        r = self.reflection_dim
        L = self.extents[r]
        p = self.reflection_plane
        z = self.site_coords[:, r]
        site_region = np.empty(self.n_sites, dtype=np.int8)
        if self.boundary[r] == PERIODIC:
            rel = (z - p) % L
            site_region[rel == 0] = Region.ZERO
            site_region[rel == L // 2] = Region.ZERO
            site_region[(rel > 0) & (rel < L // 2)] = Region.PLUS
            site_region[rel > L // 2] = Region.MINUS
        else:
            site_region[z == p] = Region.ZERO
            site_region[z > p] = Region.PLUS
            site_region[z < p] = Region.MINUS

        def from_sites(sites):
            regs = site_region[list(sites)]
            nonfixed = regs[regs != Region.ZERO]
            if nonfixed.size == 0:
                return Region.ZERO
            if np.all(nonfixed == Region.PLUS):
                return Region.PLUS
            if np.all(nonfixed == Region.MINUS):
                return Region.MINUS
            raise AssertionError("element straddles the mirror plane")

        link_region = np.empty(self.n_links, dtype=np.int8)
        for lid in range(self.n_links):
            link_region[lid] = from_sites(self.link_endpoints(lid))

        plaq_region = np.empty(self.n_plaquettes, dtype=np.int8)
        for pid in range(self.n_plaquettes):
            sid = int(self.plaq_site[pid])
            mu = int(self.plaq_mu[pid])
            nu = int(self.plaq_nu[pid])
            s_mu = self._shift_site(sid, mu, +1)
            s_nu = self._shift_site(sid, nu, +1)
            s_mn = self._shift_site(s_mu, nu, +1)
            plaq_region[pid] = from_sites((sid, s_mu, s_nu, s_mn))

        object.__setattr__(self, "site_region", _freeze(site_region))
        object.__setattr__(self, "link_region", _freeze(link_region))
        object.__setattr__(self, "plaq_region", _freeze(plaq_region))

    # -- adjacency tables for the Metropolis kernels ----------------------

    def _build_neighbors(self):
        # flat CSR neighbor list over link endpoints; a doubled link
        # (periodic extent 2) contributes its partner twice, which is the
        # correct multiplicity for the action
        nbrs = [[] for _ in range(self.n_sites)]
        for lid in range(self.n_links):
            a, b = self.link_endpoints(lid)
            nbrs[a].append(b)
            nbrs[b].append(a)
        offsets = np.zeros(self.n_sites + 1, dtype=np.int64)
        flat = []
        for sid, lst in enumerate(nbrs):
            flat.extend(lst)
            offsets[sid + 1] = len(flat)
        object.__setattr__(self, "nbr_sites", _freeze(np.array(flat, dtype=np.int64)))
        object.__setattr__(self, "nbr_offsets", _freeze(offsets))

    def _build_staples(self):
        # for each link l, every plaquette P containing l contributes one
        # staple: the three remaining (link, sign) pairs with signs folded
        # by l's own sign in P, so that Re U_P = cos(theta_l + staple phase)
        per_link = [[] for _ in range(self.n_links)]
        for pid in range(self.n_plaquettes):
            links = self.plaq_links[pid]
            signs = self.plaq_signs[pid]
            for k in range(4):
                l = int(links[k])
                s_l = int(signs[k])
                others = [(int(links[j]), s_l * int(signs[j])) for j in range(4) if j != k]
                per_link[l].append(others)
        offsets = np.zeros(self.n_links + 1, dtype=np.int64)
        st_links, st_signs = [], []
        for lid, staples in enumerate(per_link):
            for triple in staples:
                for l, s in triple:
                    st_links.append(l)
                    st_signs.append(s)
            offsets[lid + 1] = len(st_links) // 3
        object.__setattr__(self, "staple_links", _freeze(np.array(st_links, dtype=np.int64)))
        object.__setattr__(self, "staple_signs", _freeze(np.array(st_signs, dtype=np.int8)))
        object.__setattr__(self, "staple_offsets", _freeze(offsets))

    # -- convenience ------------------------------------------------------

    @property
    def time_extent(self) -> int:
        return self.extents[0]

    def region_ids(self, kind: str, region: Region) -> np.ndarray:
        table = {"site": self.site_region, "link": self.link_region,
                 "plaq": self.plaq_region}[kind]
        return np.nonzero(table == region)[0]


def build_geometry(extents, boundary, reflection_dim, reflection_plane) -> LatticeGeometry:
    """Validated geometry with all site/link/plaquette tables precomputed.

    Parameters
    ----------
    extents : sequence of int
        Lattice size per dimension; index 0 is Euclidean time.
    boundary : sequence of str or str
        "periodic"/"open" per dimension, or one flag for all dimensions.
        Time must be periodic.
    reflection_dim : int
        Dimension carrying the mirror plane.
    reflection_plane : int
        Coordinate of the fixed site plane.  Periodic mirrors have a second
        fixed plane at ``plane + extent/2``; open mirrors must be centred.
    """
    if isinstance(boundary, str):
        boundary = (boundary,) * len(tuple(extents))
    return LatticeGeometry(tuple(extents), tuple(boundary), int(reflection_dim),
                           int(reflection_plane))


# -- element-level operations (public, coordinate tuples in and out) -------

def reflect_site(geom: LatticeGeometry, site) -> tuple:
    """Mirror image of a site, ``z -> 2*plane - z`` in the reflection dim."""
    sid = geom.site_id(site)
    return tuple(int(x) for x in geom.site_coords[geom.site_reflect[sid]])


def reflect_link(geom: LatticeGeometry, link):
    """Mirror image of a link ``(site, mu)``.

    Returns ``((site', mu), flipped)``; ``flipped`` is True when the link
    points along the reflection dimension, in which case the evaluated group
    element must be inverted.
    """
    site, mu = link
    lid = geom.link_id(site, mu)
    rid = int(geom.link_reflect_id[lid])
    coords = tuple(int(x) for x in geom.site_coords[geom.link_site[rid]])
    return (coords, int(geom.link_dir[rid])), bool(geom.link_reflect_flip[lid])


def reflect_plaquette(geom: LatticeGeometry, plaq):
    """Mirror image of a plaquette ``(site, mu, nu)``; flips circulation when
    one of its legs lies along the reflection dimension."""
    site, mu, nu = plaq
    pid = geom.plaquette_id(site, mu, nu)
    rid = int(geom.plaq_reflect_id[pid])
    coords = tuple(int(x) for x in geom.site_coords[geom.plaq_site[rid]])
    return (coords, int(geom.plaq_mu[rid]), int(geom.plaq_nu[rid])), bool(geom.plaq_reflect_flip[pid])


def classify(geom: LatticeGeometry, element) -> Region:
    """Region of a site ``(x0,..)``, link ``(site, mu)`` or plaquette
    ``(site, mu, nu)``.

    A link/plaquette is ZERO only when all its sites are fixed by the
    reflection, PLUS when all non-fixed sites are on the positive side.
    """
    if isinstance(element, (list, np.ndarray)) or (
            isinstance(element, tuple) and all(isinstance(x, (int, np.integer)) for x in element)
            and len(element) == len(geom.extents)):
        return Region(int(geom.site_region[geom.site_id(element)]))
    if len(element) == 2:
        site, mu = element
        return Region(int(geom.link_region[geom.link_id(site, mu)]))
    if len(element) == 3:
        site, mu, nu = element
        return Region(int(geom.plaq_region[geom.plaquette_id(site, mu, nu)]))
    raise ValueError(f"cannot classify element {element!r}")
