"""Monte Carlo measurement driver.

Probes are measured as observables against the probe-free ensemble
(reweighting): one ensemble serves every separation and orientation, and
energy differences inherit the cancellation of correlated fluctuations.
Chains are seeded from one SeedSequence and merged in chain order, so a
given (config, seed) pair fixes every reported number bit-exactly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gauge import GaugeModel, cold_config as gauge_cold, gauge_metropolis_sweep, make_field
from .lattice import LatticeGeometry
from .scalar import ScalarModel, cold_config as scalar_cold, metropolis_sweep
from .stats import BlockedSamples, Estimate


@dataclass(frozen=True)
class MCParams:
    """Sampling parameters; the seed is mandatory (no entropy default)."""
    seed: int
    therm_sweeps: int = 200
    measure_sweeps: int = 2000
    n_blocks: int = 20
    proposal_width: float = 0.5
    chains: int = 1
    measure_every: int = 1
    overlap_threshold: float = 0.5

    def __post_init__(self):
        if self.therm_sweeps < 1:
            raise ValueError("therm_sweeps must be >= 1")
        if self.measure_sweeps < self.n_blocks:
            raise ValueError("measure_sweeps must be >= n_blocks")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")


def _run_chain(model, geom, observables, params, seed):
    rng = np.random.default_rng(seed)
    scalar = isinstance(model, ScalarModel)
    config = scalar_cold(geom) if scalar else gauge_cold(geom, model.group)

    def sweep():
        if scalar:
            return metropolis_sweep(model, geom, config, rng, params.proposal_width)
        return gauge_metropolis_sweep(model, geom, config, rng, params.proposal_width)

    def measure():
        if scalar:
            batch = config[None, :]
            return [obs(batch)[0] for obs in observables]
        field = make_field(model.group, geom, config)
        return [obs(field)[0] for obs in observables]

    for _ in range(params.therm_sweeps):
        sweep()
    n_meas = params.measure_sweeps // params.measure_every
    samples = np.empty((len(observables), n_meas), dtype=complex)
    k = 0
    for s in range(params.measure_sweeps):
        sweep()
        if (s + 1) % params.measure_every == 0:
            samples[:, k] = measure()
            k += 1
    return samples[:, :k]


def mc_samples(model, geom: LatticeGeometry, observables, params: MCParams,
               names=None) -> BlockedSamples:
    """Blocked samples of the observables, chains merged in order.

    ``observables`` are batched callables: ``obs(phi_matrix)`` for scalar
    models, ``obs(field)`` for gauge models.
    """
    names = list(names) if names is not None else [f"obs{i}" for i in range(len(observables))]
    children = np.random.SeedSequence(params.seed).spawn(params.chains)
    parts = []
    for c in range(params.chains):
        samples = _run_chain(model, geom, observables, params, children[c])
        parts.append(BlockedSamples.from_samples(names, samples, params.n_blocks))
    return BlockedSamples.merge(parts)


def correlator_mc(model: GaugeModel, geom: LatticeGeometry, probes,
                  params: MCParams) -> Estimate:
    """Jackknife estimate of the expectation of the product of probe weights.

    Warns when the relative error of the estimate exceeds the overlap
    threshold (reweighting breaking down).
    """
    from .probes import probe_evaluator

    probes = list(probes)
    if not probes:
        return Estimate(mean=1.0 + 0j, std_error=0.0, n_samples=0, n_blocks=0)
    evals = [probe_evaluator(model.group, geom, p) for p in probes]

    def product(field):
        out = evals[0](field)
        for ev in evals[1:]:
            out = out * ev(field)
        return out

    samples = mc_samples(model, geom, [product], params, names=["probe_product"])
    est = samples.estimate("probe_product")
    if est.relative_error > params.overlap_threshold:
        warnings.warn(
            f"overlap pathology: relative error {est.relative_error:.2f} exceeds "
            f"{params.overlap_threshold} (probe reweighting unreliable)",
            RuntimeWarning,
        )
    return est
