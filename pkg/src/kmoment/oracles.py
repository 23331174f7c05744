"""Sequences with known answers: analytic models and Monte Carlo estimators.

All sampling uses ``numpy.random.default_rng(seed)`` (the PCG64 bit generator),
so outputs are reproducible for a given seed and numpy version.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conversion import CorrelationSequence, MomentSequence, moment_to_corr
from .grid import (DiscreteMeasure, PointConfiguration, SymTensor, canonical_indices,
                   masses_of, power_products, site_counts)

MODEL_KINDS = ("poisson", "bernoulli", "fixed-measure", "fixed-config", "dirichlet-subprob")


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of an oracle model.

    ``params`` keys by kind: poisson ``sigma``; bernoulli ``p``; fixed-measure
    ``eta``; fixed-config ``counts``; dirichlet-subprob ``concentration`` and
    ``mass`` (``("constant", c)`` or ``("beta", a, b)``).
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    samples: int | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.kind == "bernoulli":
            p = np.asarray(self.params.get("p"), dtype=float)
            if np.any((p < 0) | (p > 1)):
                raise ValueError("occupancy probabilities must lie in [0, 1]")
        if self.kind == "poisson" and np.any(np.asarray(self.params.get("sigma"), dtype=float) < 0):
            raise ValueError("sigma must be nonnegative")
        if self.kind == "dirichlet-subprob" and (self.seed is None or not self.samples):
            raise ValueError("sampled models need a seed and a positive sample count")

    def generate(self, D: int):
        """Sequence of the model up to truncation ``D``."""
        if self.kind == "poisson":
            return poisson_correlations(self.params["sigma"], D)
        if self.kind == "bernoulli":
            return bernoulli_correlations(self.params["p"], D)
        if self.kind == "fixed-measure":
            return fixed_measure_moments(self.params["eta"], D)
        if self.kind == "fixed-config":
            return fixed_config_moments(self.params["counts"], D)
        return dirichlet_subprob_moments(self.params, np.random.default_rng(self.seed),
                                         self.samples, D)


def poisson_correlations(sigma, D: int) -> CorrelationSequence:
    """Poisson process with intensity sigma: ``rho^(n) = sigma^{⊗n}``."""
    sigma = masses_of(sigma)
    if np.any(sigma < 0):
        raise ValueError("sigma must be nonnegative")
    return CorrelationSequence([SymTensor.tensor_power(sigma, n) for n in range(D + 1)],
                               nonneg=True)


def bernoulli_correlations(p, D: int) -> CorrelationSequence:
    """Independent {0,1} occupancy: products of p on distinct sites, 0 on repeats."""
    p = masses_of(p)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("occupancy probabilities must lie in [0, 1]")
    m = len(p)
    comps = []
    for n in range(D + 1):
        t = SymTensor.tensor_power(p, n)
        distinct = np.all(site_counts(m, n) <= 1, axis=1)
        comps.append(SymTensor(m, n, np.where(distinct, t.values, t.values * 0)))
    return CorrelationSequence(comps, nonneg=True)


def fixed_measure_moments(eta, D: int) -> MomentSequence:
    """Moments of the point mass at ``eta``: ``m^(n) = eta^{⊗n}``."""
    masses = masses_of(eta)
    return MomentSequence([SymTensor.tensor_power(masses, n) for n in range(D + 1)], nonneg=True)


def fixed_config_moments(counts, D: int) -> MomentSequence:
    gamma = counts if isinstance(counts, PointConfiguration) else PointConfiguration(counts)
    return fixed_measure_moments(gamma.as_measure(), D)


def fixed_config_correlations(counts, D: int) -> CorrelationSequence:
    return moment_to_corr(fixed_config_moments(counts, D))


def sample_poisson(sigma, rng: np.random.Generator, size: int | None = None):
    """Per-site independent Poisson counts; one configuration or a (size, m) array."""
    sigma = np.asarray(masses_of(sigma), dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be nonnegative")
    if size is None:
        return PointConfiguration(rng.poisson(sigma))
    return rng.poisson(sigma, size=(size, len(sigma)))


def sample_bernoulli(p, rng: np.random.Generator, size: int) -> np.ndarray:
    p = np.asarray(masses_of(p), dtype=float)
    return (rng.random((size, len(p))) < p).astype(np.int64)


def _falling(counts: np.ndarray, n: int) -> np.ndarray:
    """``(counts)_n`` computed elementwise in float."""
    out = np.ones(counts.shape)
    for j in range(n):
        out *= counts - j
    return out


def mc_correlations(samples, D: int) -> tuple[CorrelationSequence, list[SymTensor]]:
    """Empirical correlation sequence and per-entry standard errors.

    For canonical alpha with site counts a_s, the per-sample statistic is
    ``prod_s (gamma_s)_{a_s}`` (ordered selections of distinct points landing on
    alpha); averaging gives the estimate of ``rho^(n)(alpha)``.
    """
    if isinstance(samples, np.ndarray):
        counts = samples
    else:
        counts = np.array([s.counts if isinstance(s, PointConfiguration) else s for s in samples])
    if counts.size == 0 or len(counts) == 0:
        raise ValueError("at least one sample is required")
    counts = counts.astype(float)
    N, m = counts.shape
    max_count = D
    # falls[a][:, s] = (gamma_s)_a
    falls = [_falling(counts, a) for a in range(max_count + 1)]
    comps, errors = [], []
    for n in range(D + 1):
        sc = site_counts(m, n)
        stat = np.ones((N, len(sc)))
        for s in range(m):
            for a in np.unique(sc[:, s]):
                if a == 0:
                    continue
                rows = sc[:, s] == a
                stat[:, rows] *= falls[a][:, [s]]
        mean = stat.mean(axis=0)
        se = stat.std(axis=0, ddof=1) / math.sqrt(N) if N > 1 else np.zeros(len(sc))
        comps.append(SymTensor(m, n, mean))
        errors.append(SymTensor(m, n, se))
    return CorrelationSequence(comps), errors


def dirichlet_subprob_moments(params: dict, rng: np.random.Generator, N: int, D: int,
                              with_errors: bool = False):
    """Monte Carlo moments of a random sub-probability ``eta = M * w``.

    ``w ~ Dirichlet(concentration)`` and the total mass ``M`` follows
    ``params["mass"]``: ``("constant", c)`` or ``("beta", a, b)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    alpha = np.asarray(params["concentration"], dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("Dirichlet concentration must be positive")
    law = tuple(params.get("mass", ("constant", 1.0)))
    if law[0] == "constant":
        if not 0 <= law[1] <= 1:
            raise ValueError("constant mass must lie in [0, 1]")
        mass = np.full(N, float(law[1]))
    elif law[0] == "beta":
        mass = rng.beta(law[1], law[2], size=N)
    else:
        raise ValueError(f"unknown mass law {law[0]!r}")
    if len(alpha) == 1:
        w = np.ones((N, 1))
    else:
        w = rng.dirichlet(alpha, size=N)
    etas = mass[:, None] * w
    m = len(alpha)
    comps, errors = [], []
    for n in range(D + 1):
        vals = power_products(etas, m, n).reshape(N, -1)
        comps.append(SymTensor(m, n, vals.mean(axis=0)))
        se = vals.std(axis=0, ddof=1) / math.sqrt(N) if N > 1 else np.zeros(vals.shape[1])
        errors.append(SymTensor(m, n, se))
    seq = MomentSequence(comps)
    return (seq, errors) if with_errors else seq


__all__ = [
    "ModelSpec", "MODEL_KINDS", "poisson_correlations", "bernoulli_correlations",
    "fixed_measure_moments", "fixed_config_moments", "fixed_config_correlations",
    "sample_poisson", "sample_bernoulli", "mc_correlations", "dirichlet_subprob_moments",
]
