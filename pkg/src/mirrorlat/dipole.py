"""Classical dipole pairs and their mirror conjugates in closed form.

Gaussian-style units with every prefactor set to one; only signs and ratios
matter here.  The mirror image of an electric dipole picks up a global minus
from charge conjugation on top of the geometric reflection; a magnetic
dipole (persistent current) reflects without it, but the pair energy of
magnetic dipoles is minus the electric expression, so the mirror-pair
energy comes out the same — and is never positive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ELECTRIC = "electric"
MAGNETIC = "magnetic"


@dataclass(frozen=True)
class Dipole:
    moment: tuple
    kind: str = ELECTRIC

    def __post_init__(self):
        m = np.asarray(self.moment, dtype=np.float64)
        if m.shape != (3,) or not np.all(np.isfinite(m)):
            raise ValueError("moment must be a finite 3-vector")
        if self.kind not in (ELECTRIC, MAGNETIC):
            raise ValueError(f"kind must be '{ELECTRIC}' or '{MAGNETIC}'")
        object.__setattr__(self, "moment", tuple(float(x) for x in m))

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.moment)


def _unit(r):
    r = np.asarray(r, dtype=np.float64)
    n = np.linalg.norm(r)
    if n == 0:
        raise ValueError("zero separation")
    return r, n, r / n


def dipole_energy(d1: Dipole, d2: Dipole, r) -> float:
    """Pair energy at separation r: ``[d1.d2 - 3 (d1.rhat)(d2.rhat)] / |r|^3``
    for electric dipoles, minus that for a magnetic (persistent-current) pair."""
    if d1.kind != d2.kind:
        raise ValueError("mixed electric/magnetic pairs are not defined here")
    _, n, rhat = _unit(r)
    v1, v2 = d1.vec, d2.vec
    e = (v1 @ v2 - 3.0 * (v1 @ rhat) * (v2 @ rhat)) / n ** 3
    return float(-e if d1.kind == MAGNETIC else e)


def reflect_dipole(d: Dipole, n_hat) -> Dipole:
    """Mirror conjugate moment: electric ``-d + 2 n (d.n)``, magnetic
    ``d - 2 n (d.n)``; the kind is preserved."""
    n = np.asarray(n_hat, dtype=np.float64)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("n_hat must be a unit vector")
    v = d.vec
    proj = 2.0 * n * (v @ n)
    out = -v + proj if d.kind == ELECTRIC else v - proj
    return Dipole(tuple(out), d.kind)


def mirror_pair_energy(d: Dipole, r) -> float:
    """Energy of a dipole with its mirror conjugate across the plane normal
    to r.

    Electric dipoles use the closed form ``-(d.d + (d.rhat)^2)/|r|^3``; the
    magnetic case goes through the reflection rule and the magnetic pair
    sign, which lands on the same expression.  Never positive.
    """
    _, n, rhat = _unit(r)
    if d.kind == ELECTRIC:
        v = d.vec
        return float(-(v @ v + (v @ rhat) ** 2) / n ** 3)
    return dipole_energy(d, reflect_dipole(d, rhat), r)


def mirror_pair_energy_radial_derivative(d: Dipole, r) -> float:
    """Analytic d/d|r| of the mirror-pair energy at fixed direction.

    Positive for any nonzero moment: the energy rises with separation, i.e.
    the pair attracts.
    """
    _, n, rhat = _unit(r)
    v = d.vec
    return float(3.0 * (v @ v + (v @ rhat) ** 2) / n ** 4)


def rotate_vector(v, axis, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` about ``axis`` by ``angle`` radians."""
    _, _, k = _unit(axis)
    v = np.asarray(v, dtype=np.float64)
    return (v * np.cos(angle) + np.cross(k, v) * np.sin(angle)
            + k * (k @ v) * (1.0 - np.cos(angle)))


def orientation_table(d: Dipole, r, axis, n_orientations: int):
    """Mirror-pair energies for the dipole rotated about an axis.

    Returns a list of ``(angle, energy)`` rows; every energy is <= 0.
    """
    rows = []
    for k in range(n_orientations):
        angle = 2.0 * np.pi * k / n_orientations
        rotated = Dipole(tuple(rotate_vector(d.vec, axis, angle)), d.kind)
        rows.append((float(angle), mirror_pair_energy(rotated, r)))
    return rows
