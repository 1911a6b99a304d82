"""Static vacuum probes as path-integral weights.

Three probe kinds:
  * PointCharge: a closed timelike line (the full periodic time extent at a
    fixed spatial site) raised to the integer charge;
  * Dielectric: ``exp(alpha * sum Re U_P)`` over a worldvolume of timelike
    plaquettes (relative permittivity enters through alpha);
  * Conductor: indicator that every worldvolume plaquette equals the
    identity.  Exact only for Z_N; on U(1) it must be realized as a
    Dielectric with large alpha.

Probes are immutable id-based records tied to a geometry; geometric moves
(translation, mirror image, axis-aligned 90-degree rotations) produce new
probes.  The mirror image of a charge carries the opposite charge; neutral
probes map to their reflected worldvolumes unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeGeometry, Region


@dataclass(frozen=True)
class PointCharge:
    """Static charge q at a fixed spatial site (coords for dims 1..d-1)."""
    q: int
    spatial_site: tuple

    def __post_init__(self):
        object.__setattr__(self, "spatial_site", tuple(int(c) for c in self.spatial_site))


@dataclass(frozen=True)
class Dielectric:
    """Worldvolume of timelike plaquette ids weighted by exp(alpha Re U)."""
    alpha: float
    plaquettes: tuple

    def __post_init__(self):
        object.__setattr__(self, "plaquettes", tuple(sorted(int(p) for p in self.plaquettes)))
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not self.plaquettes:
            raise ValueError("empty worldvolume")


@dataclass(frozen=True)
class Conductor:
    """Worldvolume of plaquette ids pinned to the identity element."""
    plaquettes: tuple

    def __post_init__(self):
        object.__setattr__(self, "plaquettes", tuple(sorted(int(p) for p in self.plaquettes)))
        if not self.plaquettes:
            raise ValueError("empty worldvolume")


def validate_probe(geom: LatticeGeometry, probe):
    if isinstance(probe, PointCharge):
        if geom.reflection_dim == 0:
            raise ValueError("static probes need a spatial mirror: a closed "
                             "timelike worldline cannot lie on one side of a "
                             "time reflection")
        worldline_links(geom, probe.spatial_site)
    elif isinstance(probe, Dielectric):
        mu = geom.plaq_mu[list(probe.plaquettes)]
        if np.any(mu != 0):
            raise ValueError("dielectric worldvolume must consist of timelike "
                             "plaquettes (one link in the time direction)")
    elif isinstance(probe, Conductor):
        pass
    else:
        raise TypeError(f"not a probe: {probe!r}")
    return probe


def worldline_links(geom: LatticeGeometry, spatial_site) -> np.ndarray:
    """Link ids of the closed timelike line at a spatial site."""
    if len(spatial_site) != len(geom.extents) - 1:
        raise ValueError(f"spatial site needs {len(geom.extents) - 1} coordinates")
    return np.array([geom.link_id((t, *spatial_site), 0)
                     for t in range(geom.time_extent)], dtype=np.int64)


def is_charged(group, probe) -> bool:
    """True when the probe's single-probe correlator vanishes identically
    (center symmetry kills any net winding of the timelike line)."""
    if not isinstance(probe, PointCharge):
        return False
    return (probe.q % group.n != 0) if not group.is_u1 else (probe.q != 0)


def probe_region(geom: LatticeGeometry, probe) -> Region:
    """Common region of the probe's support; raises when mixed."""
    if isinstance(probe, PointCharge):
        regions = {int(geom.link_region[l]) for l in worldline_links(geom, probe.spatial_site)}
    else:
        regions = {int(geom.plaq_region[p]) for p in probe.plaquettes}
    if len(regions) != 1:
        raise ValueError(f"probe support spans regions {regions}")
    return Region(regions.pop())


def probe_evaluator(group, geom: LatticeGeometry, probe):
    """Weight functional of the probe as a batched callable ``field -> array``.

    Values are memoized per field batch (the same probe often appears in
    several correlator products of one measurement pass).
    """
    validate_probe(geom, probe)
    if isinstance(probe, PointCharge):
        lids = worldline_links(geom, probe.spatial_site)
        q = probe.q

        def raw(field):
            if hasattr(field, "angles"):
                return np.exp(1j * q * field.angles[:, lids].sum(axis=1))
            return field.unit(q * field.digits[:, lids].sum(axis=1, dtype=np.int64))
    elif isinstance(probe, Dielectric):
        pids = np.array(probe.plaquettes)
        alpha = probe.alpha

        def raw(field):
            return np.exp(alpha * field.plaq_re(pids)) + 0j
    else:
        # conductor: delta functions on a continuous group need regularization
        if group.is_u1:
            raise ValueError("exact conductors exist only for Z_N; on U(1) use "
                             "a Dielectric with large alpha (e.g. 50/(2 g^2))")
        pids = np.array(probe.plaquettes)

        def raw(field):
            return np.all(field.plaq_digits()[:, pids] == 0, axis=1).astype(complex)

    def evaluator(field):
        key = (id(probe), "probe")
        if key not in field.memo:
            field.memo[key] = raw(field)
        return field.memo[key]

    return evaluator


def probe_weight(group, geom: LatticeGeometry, config, probe) -> complex:
    """Weight of one configuration (PointCharge: Polyakov line to the q-th
    power; Dielectric: positive real; Conductor: 0 or 1)."""
    from .gauge import make_field
    return complex(probe_evaluator(group, geom, probe)(make_field(group, geom, config))[0])


# -- geometric moves ---------------------------------------------------------

def _plaq_tuple(geom: LatticeGeometry, pid: int):
    return (tuple(int(x) for x in geom.site_coords[geom.plaq_site[pid]]),
            int(geom.plaq_mu[pid]), int(geom.plaq_nu[pid]))


def mirror_probe(geom: LatticeGeometry, probe):
    """The mirror-conjugate partner: geometry reflected through the fixed
    plane, charges negated, neutral probes unchanged in type and strength.

    The probe must lie strictly on one side of the mirror (so the map is an
    involution); probes touching the fixed plane are rejected.
    """
    if probe_region(geom, probe) == Region.ZERO:
        raise ValueError("probe touches the fixed plane; a mirror pair needs "
                         "support strictly on one side")
    if isinstance(probe, PointCharge):
        full = (0, *probe.spatial_site)
        sid = geom.site_id(full)
        refl = geom.site_coords[geom.site_reflect[sid]]
        return PointCharge(q=-probe.q, spatial_site=tuple(int(c) for c in refl[1:]))
    new_pids = tuple(int(geom.plaq_reflect_id[p]) for p in probe.plaquettes)
    if isinstance(probe, Dielectric):
        return Dielectric(alpha=probe.alpha, plaquettes=new_pids)
    return Conductor(plaquettes=new_pids)


def translate_probe(geom: LatticeGeometry, probe, offset):
    """Rigid translation by an integer offset vector (wrapping periodic dims)."""
    offset = np.asarray(offset, dtype=np.int64)
    if isinstance(probe, PointCharge):
        if offset[0] != 0:
            raise ValueError("a static charge cannot be translated in time")
        site = np.array((0, *probe.spatial_site)) + offset
        return PointCharge(q=probe.q, spatial_site=tuple(int(c) for c in geom.wrap(site)[1:]))
    pids = []
    for p in probe.plaquettes:
        base, mu, nu = _plaq_tuple(geom, p)
        pids.append(geom.plaquette_id(geom.wrap(np.array(base) + offset), mu, nu))
    if isinstance(probe, Dielectric):
        return Dielectric(alpha=probe.alpha, plaquettes=tuple(pids))
    return Conductor(plaquettes=tuple(pids))


@dataclass(frozen=True)
class Rotation:
    """Axis-aligned 90-degree rotation: integer orthogonal matrix acting
    about a center given in doubled coordinates (so plaquette centers and
    sites are both representable exactly).

    A rotation is a lattice map only when ``(I - M) @ center`` is an integer
    vector; this is validated when applied.
    """
    matrix: tuple
    center2: tuple

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("rotation matrix must be square")
        if not np.array_equal(m @ m.T, np.eye(m.shape[0], dtype=np.int64)):
            raise ValueError("rotation matrix must be orthogonal with integer entries")
        if round(float(np.linalg.det(m))) != 1:
            raise ValueError("rotation must be proper (det +1)")
        object.__setattr__(self, "matrix", tuple(tuple(int(x) for x in row) for row in m))
        object.__setattr__(self, "center2", tuple(int(c) for c in self.center2))

    def map_point2(self, p2):
        """Image of a point in doubled coordinates."""
        m = np.array(self.matrix, dtype=np.int64)
        c = np.array(self.center2, dtype=np.int64)
        return m @ (np.asarray(p2, dtype=np.int64) - c) + c


def plane_rotation(d: int, dim_a: int, dim_b: int, quarter_turns: int, center) -> Rotation:
    """Rotation by ``quarter_turns * 90`` degrees in the (dim_a, dim_b) plane
    about ``center`` (may have half-integer entries)."""
    m = np.eye(d, dtype=np.int64)
    k = quarter_turns % 4
    block = [np.array([[1, 0], [0, 1]]), np.array([[0, -1], [1, 0]]),
             np.array([[-1, 0], [0, -1]]), np.array([[0, 1], [-1, 0]])][k]
    for i, di in enumerate((dim_a, dim_b)):
        for j, dj in enumerate((dim_a, dim_b)):
            m[di, dj] = block[i, j]
    center2 = tuple(int(round(2 * c)) for c in center)
    return Rotation(tuple(tuple(int(x) for x in row) for row in m), center2)


def rotate_site(geom: LatticeGeometry, rot: Rotation, coords) -> tuple:
    p2 = rot.map_point2(2 * np.asarray(coords, dtype=np.int64))
    if np.any(p2 % 2 != 0):
        raise ValueError(f"rotation {rot.center2} does not map site {tuple(coords)} "
                         "to a lattice site (center is not a lattice symmetry point)")
    return tuple(int(c) for c in geom.wrap(p2 // 2))


def rotate_probe(geom: LatticeGeometry, probe, rot: Rotation):
    """Rotate a probe worldvolume; raises when the image leaves the lattice."""
    if isinstance(probe, PointCharge):
        m = np.array(rot.matrix)
        if not (m[0, 0] == 1 and np.all(m[0, 1:] == 0) and np.all(m[1:, 0] == 0)):
            raise ValueError("a static charge can only be rotated spatially")
        site = rotate_site(geom, rot, (0, *probe.spatial_site))
        return PointCharge(q=probe.q, spatial_site=site[1:])
    pids = []
    for p in probe.plaquettes:
        base, mu, nu = _plaq_tuple(geom, p)
        base = np.array(base, dtype=np.int64)
        corners = [base.copy(), base.copy(), base.copy(), base.copy()]
        corners[1][mu] += 1
        corners[2][nu] += 1
        corners[3][mu] += 1
        corners[3][nu] += 1
        images2 = [rot.map_point2(2 * c) for c in corners]
        if any(np.any(i2 % 2 != 0) for i2 in images2):
            raise ValueError("rotation center does not map the worldvolume onto the lattice")
        images = np.array([i2 // 2 for i2 in images2])
        new_base = images.min(axis=0)
        span = images.max(axis=0) - new_base
        dims = np.nonzero(span)[0]
        assert len(dims) == 2 and np.all(span[dims] == 1)
        pids.append(geom.plaquette_id(geom.wrap(new_base), int(dims[0]), int(dims[1])))
    if isinstance(probe, Dielectric):
        return Dielectric(alpha=probe.alpha, plaquettes=tuple(pids))
    return Conductor(plaquettes=tuple(pids))


# -- worldvolume builders ----------------------------------------------------

def slab_plaquettes(geom: LatticeGeometry, layer: int) -> tuple:
    """Timelike plaquettes of a thin sheet at a fixed mirror coordinate,
    spanning every transverse direction (needs d >= 3)."""
    r = geom.reflection_dim
    if r == 0:
        raise ValueError("slabs need a spatial mirror dimension")
    trans = [k for k in range(1, len(geom.extents)) if k != r]
    if not trans:
        raise ValueError("slab worldvolumes need at least one transverse dimension")
    pids = []
    for pid in range(geom.n_plaquettes):
        if geom.plaq_mu[pid] != 0 or geom.plaq_nu[pid] not in trans:
            continue
        if geom.site_coords[geom.plaq_site[pid]][r] == layer:
            pids.append(pid)
    return tuple(pids)


def layer_cells(geom: LatticeGeometry, layer: int, dim_a: int = 0, dim_b: int = 1) -> tuple:
    """All (dim_a, dim_b)-plaquettes in the mirror-coordinate layer."""
    r = geom.reflection_dim
    pids = []
    for pid in range(geom.n_plaquettes):
        if geom.plaq_mu[pid] == dim_a and geom.plaq_nu[pid] == dim_b:
            if geom.site_coords[geom.plaq_site[pid]][r] == layer:
                pids.append(pid)
    return tuple(pids)


def charge_at_distance(geom: LatticeGeometry, q: int, distance: int, transverse=None) -> PointCharge:
    """A point charge ``distance`` sites from the mirror plane on the PLUS side."""
    r = geom.reflection_dim
    d = len(geom.extents)
    spatial = [0] * (d - 1)
    if transverse is not None:
        spatial = list(transverse)
    spatial[r - 1] = (geom.reflection_plane + distance) % geom.extents[r] \
        if geom.boundary[r] == "periodic" else geom.reflection_plane + distance
    return PointCharge(q=q, spatial_site=tuple(spatial))


def slab_at_distance(geom: LatticeGeometry, distance: int, alpha=None) -> Dielectric | Conductor:
    """A slab ``distance`` layers from the mirror plane on the PLUS side;
    Dielectric when ``alpha`` is given, Conductor otherwise."""
    r = geom.reflection_dim
    layer = geom.reflection_plane + distance
    if geom.boundary[r] == "periodic":
        layer %= geom.extents[r]
    pids = slab_plaquettes(geom, layer)
    return Dielectric(alpha=alpha, plaquettes=pids) if alpha is not None \
        else Conductor(plaquettes=pids)
