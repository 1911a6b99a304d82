"""Free energies of probe insertions and mirror-pair energy curves.

With periodic Euclidean time of period beta (the time extent), a product of
static probe weights measures ``exp(-beta E)``.  Interaction energies are
formed as the correlator ratio

    E_int = -(1/beta) [ ln<f1 f2> - ln<f1> - ln<f2> ],

which cancels the probe self-energies multiplicatively.  Charged probes are
the one exception: a single closed charged line averages to zero exactly
(center symmetry), so its self-energy term is dropped and the curve is
defined up to a separation-independent constant — every inequality checked
downstream is invariant under such shifts.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gauge import GaugeModel, ZnEnumeration
from .lattice import LatticeGeometry, Region
from .mc import MCParams, mc_samples
from .probes import is_charged, mirror_probe, probe_evaluator, probe_region
from .stats import BlockedSamples, Estimate, exact_estimate


def _safe_log(x) -> float:
    x = np.real(x)
    return np.log(x) if x > 0 else np.nan


@dataclass(frozen=True)
class EnergyCurve:
    """Mirror-pair energy versus separation.

    For Monte Carlo curves the blocked samples and the per-point energy
    functions are retained so that derived margins (concavity differences)
    can be jackknifed jointly, preserving cross-separation correlations.
    """
    separations: tuple
    estimates: tuple
    samples: BlockedSamples | None = None
    energy_funcs: tuple | None = None
    # largest separation not aliased by periodic wrapping (extent/2 for a
    # periodic mirror dimension); monotonicity is only asserted up to here
    accessible_max: int | None = None

    def __post_init__(self):
        seps = tuple(self.separations)
        if any(b <= a for a, b in zip(seps, seps[1:])):
            raise ValueError("separations must be strictly increasing")
        for est in self.estimates:
            if np.isfinite(est.mean) and abs(np.imag(est.mean)) > max(
                    3.0 * est.std_error, 1e-10):
                raise ValueError("energy estimate has a non-negligible imaginary part")

    @property
    def values(self) -> np.ndarray:
        return np.array([np.real(e.mean) for e in self.estimates])

    def rows(self):
        for z, e in zip(self.separations, self.estimates):
            yield {"separation": z, "energy_mean": float(np.real(e.mean)),
                   "energy_stderr": float(e.std_error), "n_samples": e.n_samples}


def _pair_energy_fn(beta, i12, i1, i2):
    """Energy as a function of the observable-means vector; the self-energy
    indices may be None (charged probes)."""
    def fn(means):
        val = _safe_log(means[i12])
        if i1 is not None:
            val -= _safe_log(means[i1])
        if i2 is not None:
            val -= _safe_log(means[i2])
        return -val / beta
    return fn


def interaction_energy(model: GaugeModel, geom: LatticeGeometry, probe1, probe2,
                       mode: str = "exact", params: MCParams | None = None,
                       gauge_fix_tree: bool = False) -> Estimate:
    """Interaction energy of two probes with self-energies cancelled.

    ``mode="exact"`` enumerates (Z_N only); ``mode="mc"`` samples and
    propagates errors through the logarithms by jackknife.
    """
    evals = [probe_evaluator(model.group, geom, p) for p in (probe1, probe2)]

    def pair(field):
        return evals[0](field) * evals[1](field)

    charged = [is_charged(model.group, p) for p in (probe1, probe2)]
    observables = [pair]
    idx = [None, None]
    for k in range(2):
        if not charged[k]:
            idx[k] = len(observables)
            observables.append(evals[k])
    beta = geom.time_extent
    energy = _pair_energy_fn(beta, 0, idx[0], idx[1])

    if mode == "exact":
        enum = ZnEnumeration(model, geom, gauge_fix_tree=gauge_fix_tree)
        means = np.array(enum.expectations(observables))
        if np.real(means[0]) <= 0:
            raise ValueError(
                f"pair correlator is not positive ({means[0]}): probes are "
                "incompatible (overconstrained conductor?)")
        return exact_estimate(energy(means), enum.total)

    if params is None:
        raise ValueError("mode='mc' needs MCParams")
    samples = mc_samples(model, geom, observables, params)
    est = samples.jackknife(energy)
    for i in range(len(observables)):
        ce = samples.estimate(samples.names[i])
        if ce.relative_error > params.overlap_threshold:
            warnings.warn("overlap pathology in a correlator estimate; energy "
                          "will be reported but may be inconclusive", RuntimeWarning)
    return est


def energy_scan(model: GaugeModel, geom: LatticeGeometry, make_probe, separations,
                mode: str = "exact", params: MCParams | None = None,
                gauge_fix_tree: bool = False) -> EnergyCurve:
    """Mirror-pair energy curve E(z) over even separations.

    ``make_probe(k)`` places the probe at distance ``k = z/2`` from the
    mirror plane (strictly in PLUS); its conjugate partner is the mirror
    image.  Exact mode enumerates once per scan; MC mode measures every
    separation against one common ensemble.
    """
    separations = [int(z) for z in separations]
    if any(z <= 0 or z % 2 for z in separations):
        raise ValueError("separations must be positive even integers "
                         "(probe at z/2, mirror at -z/2)")

    pairs = []
    for z in separations:
        probe = make_probe(z // 2)
        if probe_region(geom, probe) != Region.PLUS:
            raise ValueError(f"probe at separation {z} does not lie in PLUS")
        partner = mirror_probe(geom, probe)
        pairs.append((probe, partner))

    r = geom.reflection_dim
    accessible = geom.extents[r] // 2 if geom.boundary[r] == "periodic" else None

    beta = geom.time_extent
    observables, names, energy_fns = [], [], []
    for z, (p1, p2) in zip(separations, pairs):
        e1 = probe_evaluator(model.group, geom, p1)
        e2 = probe_evaluator(model.group, geom, p2)
        observables.append(lambda f, a=e1, b=e2: a(f) * b(f))
        names.append(f"pair_z{z}")
        i12 = len(observables) - 1
        idx = [None, None]
        for k, (p, e) in enumerate(((p1, e1), (p2, e2))):
            if not is_charged(model.group, p):
                idx[k] = len(observables)
                observables.append(e)
                names.append(f"single{k + 1}_z{z}")
        energy_fns.append(_pair_energy_fn(beta, i12, idx[0], idx[1]))

    if mode == "exact":
        enum = ZnEnumeration(model, geom, gauge_fix_tree=gauge_fix_tree)
        means = np.array(enum.expectations(observables))
        ests = []
        for z, fn in zip(separations, energy_fns):
            val = fn(means)
            if not np.isfinite(val):
                raise ValueError(f"non-positive correlator at separation {z}")
            ests.append(exact_estimate(val, enum.total))
        return EnergyCurve(tuple(separations), tuple(ests), accessible_max=accessible)

    if params is None:
        raise ValueError("mode='mc' needs MCParams")
    samples = mc_samples(model, geom, observables, params, names=names)
    ests = tuple(samples.jackknife(fn) for fn in energy_fns)
    return EnergyCurve(tuple(separations), ests, samples=samples,
                       energy_funcs=tuple(energy_fns), accessible_max=accessible)
