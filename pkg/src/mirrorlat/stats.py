"""Estimates and blocked jackknife resampling.

Monte Carlo measurements are reduced to per-block means; nonlinear derived
quantities (log ratios, inequality margins) are jackknifed jointly over the
blocks so that correlations between observables from the same ensemble
cancel in the error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """A statistical measurement: complex mean, jackknife error, counts.

    Exact (enumeration) results use ``std_error=0`` and ``n_blocks=0``.
    """
    mean: complex
    std_error: float
    n_samples: int
    n_blocks: int

    @property
    def relative_error(self) -> float:
        m = abs(self.mean)
        return float("inf") if m == 0 else self.std_error / m

    def as_dict(self):
        return {
            "mean_re": float(np.real(self.mean)),
            "mean_im": float(np.imag(self.mean)),
            "std_error": float(self.std_error),
            "n_samples": int(self.n_samples),
            "n_blocks": int(self.n_blocks),
        }


def exact_estimate(value, n_configs: int) -> Estimate:
    return Estimate(mean=complex(value), std_error=0.0, n_samples=int(n_configs), n_blocks=0)


class BlockedSamples:
    """Per-block means of a set of named observables from one ensemble.

    ``block_means`` has shape (n_obs, n_blocks).  Chains are merged by
    concatenating their blocks in chain order, keeping reductions
    deterministic.
    """

    def __init__(self, names, block_means, n_samples):
        self.names = list(names)
        self.block_means = np.asarray(block_means, dtype=complex)
        if self.block_means.ndim != 2 or self.block_means.shape[0] != len(self.names):
            raise ValueError("block_means must be (n_obs, n_blocks)")
        if self.block_means.shape[1] < 2:
            raise ValueError("need at least 2 blocks for a jackknife error")
        self.n_samples = int(n_samples)

    @property
    def n_blocks(self) -> int:
        return self.block_means.shape[1]

    @classmethod
    def from_samples(cls, names, samples, n_blocks):
        """Blocks a (n_obs, n_meas) sample matrix; trailing remainder samples
        beyond an even block split are dropped."""
        samples = np.asarray(samples, dtype=complex)
        n_meas = samples.shape[1]
        if n_blocks < 2:
            raise ValueError("n_blocks must be >= 2")
        block_len = n_meas // n_blocks
        if block_len < 1:
            raise ValueError(f"{n_meas} measurements cannot fill {n_blocks} blocks")
        used = block_len * n_blocks
        blocks = samples[:, :used].reshape(samples.shape[0], n_blocks, block_len)
        return cls(names, blocks.mean(axis=2), used)

    @classmethod
    def merge(cls, parts):
        """Concatenates block means of independent chains (in given order)."""
        parts = list(parts)
        names = parts[0].names
        for p in parts[1:]:
            if p.names != names:
                raise ValueError("cannot merge samples with different observables")
        means = np.concatenate([p.block_means for p in parts], axis=1)
        return cls(names, means, sum(p.n_samples for p in parts))

    def index(self, name) -> int:
        return self.names.index(name)

    def jackknife(self, func) -> Estimate:
        """Estimate of ``func(obs_means)`` with a leave-one-block-out error.

        ``func`` maps a complex vector of per-observable means to a scalar
        (it is called once on the full means and once per deleted block).
        """
        means = self.block_means.mean(axis=1)
        center = complex(func(means))
        b = self.n_blocks
        total = self.block_means.sum(axis=1)
        reps = np.empty(b, dtype=complex)
        for i in range(b):
            reps[i] = func((total - self.block_means[:, i]) / (b - 1))
        rep_mean = reps.mean()
        var = (b - 1) / b * np.sum(np.abs(reps - rep_mean) ** 2)
        return Estimate(mean=center, std_error=float(np.sqrt(var.real)),
                        n_samples=self.n_samples, n_blocks=b)

    def estimate(self, name) -> Estimate:
        """Plain jackknife estimate of one observable's mean."""
        i = self.index(name)
        return self.jackknife(lambda m: m[i])
