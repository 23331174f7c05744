"""Moment and correlation sequences, their Riesz functionals, and conversions.

Conversions use set partitions of {1..n}: a block collapses its arguments to a
single site.  ``corr_to_moment`` sums the collapsed correlations with weight 1,
``moment_to_corr`` is its Moebius inverse with weights
``(-1)^(n-|pi|) prod_B (|B|-1)!``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .factorial import enumerate_set_partitions
from .grid import SymTensor, canonical_indices, rank, tensor_pairing


class DegreeError(ValueError):
    """A polynomial or sequence needs more orders than the truncation provides."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True, eq=False)
class _Sequence:
    components: tuple
    nonneg: bool = False

    basis = ""

    def __init__(self, components: Iterable[SymTensor], nonneg: bool = False):
        comps = tuple(components)
        if not comps:
            raise ValueError("a sequence needs at least the order-0 component")
        m = comps[0].n_sites
        for n, c in enumerate(comps):
            if c.order != n or c.n_sites != m:
                raise ValueError(f"component {n} has order {c.order} on {c.n_sites} sites")
        if nonneg and any(np.any(c.values < 0) for c in comps):
            raise ValueError("nonneg flag set but some entries are negative")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "nonneg", nonneg)

    @property
    def truncation(self) -> int:
        return len(self.components) - 1

    @property
    def n_sites(self) -> int:
        return self.components[0].n_sites

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.components)

    def __getitem__(self, n: int) -> SymTensor:
        return self.components[n]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def replace(self, n: int, tensor: SymTensor):
        comps = list(self.components)
        comps[n] = tensor
        return type(self)(comps)

    def truncate(self, degree: int):
        if degree > self.truncation:
            raise DegreeError(f"cannot extend truncation {self.truncation} to {degree}", degree)
        return type(self)(self.components[:degree + 1], self.nonneg)

    def to_float(self):
        return type(self)([c.to_float() for c in self.components], self.nonneg)

    def require(self, degree: int, what: str = "operation") -> None:
        if degree > self.truncation:
            raise DegreeError(
                f"{what} needs truncation D >= {degree}, sequence has D = {self.truncation}",
                degree)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n_sites={self.n_sites}, D={self.truncation})"


class MomentSequence(_Sequence):
    basis = "moment"


class CorrelationSequence(_Sequence):
    basis = "correlation"


def riesz_moment(m: MomentSequence, p) -> object:
    """``L_m(P)`` for ``P(eta) = sum_k <p^(k), eta^{⊗k}>`` given as ``[(k, tensor)]``."""
    total = 0
    for k, t in p:
        m.require(k, "polynomial")
        total = total + tensor_pairing(t, m[k])
    return total


def riesz_corr(rho: CorrelationSequence, G) -> object:
    """``L~_rho(KG) = sum_j <g^(j), rho^(j)> / j!``."""
    total = 0
    for j, g in sorted(G.components.items()):
        if g.is_zero():
            continue
        rho.require(j, "coefficient sequence")
        total = total + tensor_pairing(g, rho[j]) * _inv_factorial(j, g.exact and rho[j].exact)
    return total


def _inv_factorial(j: int, exact: bool):
    from fractions import Fraction

    return Fraction(1, math.factorial(j)) if exact else 1.0 / math.factorial(j)


@functools.lru_cache(maxsize=None)
def _collapse_plan(n_sites: int, n: int) -> tuple:
    """Per partition: (k, sign weight, rows where the blocks are constant, source ranks)."""
    table = canonical_indices(n_sites, n)
    plan = []
    for blocks in enumerate_set_partitions(n):
        mask = np.ones(len(table), dtype=bool)
        for b in blocks:
            for i in b[1:]:
                mask &= table[:, i] == table[:, b[0]]
        rows = np.nonzero(mask)[0]
        if len(rows) == 0:
            continue
        reps = np.sort(table[np.ix_(rows, [b[0] for b in blocks])], axis=1)
        k = len(blocks)
        mobius = (-1) ** (n - k) * math.prod(math.factorial(len(b) - 1) for b in blocks)
        plan.append((k, mobius, rows, rank(reps, n_sites)))
    return tuple(plan)


def _convert(seq: _Sequence, inverse: bool) -> list[SymTensor]:
    m = seq.n_sites
    out = [seq[0]]
    for n in range(1, seq.truncation + 1):
        vals = np.array(seq[n].values * 0)
        for k, mobius, rows, src in _collapse_plan(m, n):
            vals[rows] += (mobius if inverse else 1) * seq[k].values[src]
        out.append(SymTensor(m, n, vals))
    return out


def corr_to_moment(rho: CorrelationSequence) -> MomentSequence:
    return MomentSequence(_convert(rho, inverse=False), nonneg=rho.nonneg)


def moment_to_corr(m: MomentSequence) -> CorrelationSequence:
    return CorrelationSequence(_convert(m, inverse=True))


__all__ = [
    "DegreeError", "MomentSequence", "CorrelationSequence", "riesz_moment", "riesz_corr",
    "corr_to_moment", "moment_to_corr",
]
