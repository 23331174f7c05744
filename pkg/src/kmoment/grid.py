"""Site grids, discrete measures and symmetric tensors with canonical storage.

A symmetric tensor of order ``n`` over ``m`` sites is stored as a dense vector
indexed by the sorted multi-indices ``a_0 <= a_1 <= ... <= a_{n-1}``.  Rows are
ordered colexicographically, which gives the closed-form rank

    rank(a) = sum_i C(a_i + i, i + 1).

Two value dtypes are supported: ``float64`` and ``object`` (Python ints and
``fractions.Fraction``) for exact arithmetic.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

#: Maximum number of canonical entries any single tensor may have.
ENTRY_CAP = 2_000_000


class GridSizeError(ValueError):
    """Raised when a tensor would exceed :data:`ENTRY_CAP` canonical entries."""


# ----------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class GridSpec:
    sites: tuple
    coords: np.ndarray
    sigma: np.ndarray

    def __init__(self, sites: Sequence, coords=None, sigma=None):
        sites = tuple(sites)
        if len(set(sites)) != len(sites):
            raise ValueError("site identifiers must be unique")
        m = len(sites)
        if coords is None:
            coords = np.arange(m, dtype=float).reshape(m, 1)
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(m, 1)
        if coords.shape[0] != m or coords.shape[1] < 1:
            raise ValueError("coords must have shape (sites, d) with d >= 1")
        sigma = np.ones(m) if sigma is None else np.asarray(sigma, dtype=float)
        if sigma.shape != (m,) or np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be a finite nonnegative vector, one entry per site")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @classmethod
    def line(cls, m: int, sigma=None) -> "GridSpec":
        return cls([f"s{i}" for i in range(m)], sigma=sigma)


def _as_values(values) -> np.ndarray:
    """Coerce to float64, or to an object array when the input is exact."""
    arr = np.asarray(values)
    if arr.dtype == object:
        if all(isinstance(v, (Rational, np.integer)) for v in arr.flat):
            return np.array([v if isinstance(v, Rational) else int(v) for v in arr.flat],
                            dtype=object).reshape(arr.shape)
        return arr.astype(float)
    if arr.dtype.kind in "iub":
        return arr.astype(object)
    if arr.dtype.kind == "f":
        return arr.astype(float)
    raise TypeError(f"unsupported value dtype {arr.dtype}")


@dataclass(frozen=True)
class DiscreteMeasure:
    masses: np.ndarray

    def __post_init__(self):
        masses = _as_values(self.masses).reshape(-1)
        if np.any(masses < 0):
            raise ValueError("masses must be nonnegative")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def n_sites(self) -> int:
        return len(self.masses)

    def total(self):
        return self.masses.sum()


@dataclass(frozen=True)
class PointConfiguration:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(counts, 1), 0)):
                raise ValueError("counts must be integers")
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        counts = counts.astype(np.int64).reshape(-1)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n_sites(self) -> int:
        return len(self.counts)

    @property
    def is_simple(self) -> bool:
        return bool(np.all(self.counts <= 1))

    def total(self) -> int:
        return int(self.counts.sum())

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.counts.astype(object))


@dataclass(frozen=True)
class SiteFunction:
    values: np.ndarray

    def __post_init__(self):
        values = _as_values(self.values).reshape(-1)
        if values.dtype != object and not np.all(np.isfinite(values)):
            raise ValueError("site function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def is_nonneg(self) -> bool:
        return bool(np.all(self.values >= 0))

    @property
    def is_capped(self) -> bool:
        return self.is_nonneg and bool(np.all(self.values <= 1))


def masses_of(eta) -> np.ndarray:
    """Mass vector of a measure, configuration or plain array."""
    if isinstance(eta, DiscreteMeasure):
        return eta.masses
    if isinstance(eta, PointConfiguration):
        return eta.counts.astype(object)
    if isinstance(eta, SiteFunction):
        return eta.values
    return _as_values(eta).reshape(-1)


# ----------------------------------------------------------------------------
# canonical index tables


def canonical_count(n_sites: int, order: int) -> int:
    return math.comb(n_sites + order - 1, order)


def _check_cap(n_sites: int, order: int) -> None:
    count = canonical_count(n_sites, order)
    if count > ENTRY_CAP:
        raise GridSizeError(
            f"order {order} on {n_sites} sites needs {count} entries (cap {ENTRY_CAP})")


@functools.lru_cache(maxsize=None)
def _binom_table(rows: int, cols: int) -> np.ndarray:
    return np.array([[math.comb(x, y) for y in range(cols)] for x in range(rows)],
                    dtype=np.int64)


def rank(sorted_rows: np.ndarray, n_sites: int) -> np.ndarray:
    """Colex rank of sorted multi-indices; ``sorted_rows`` has shape (..., n)."""
    rows = np.asarray(sorted_rows, dtype=np.int64)
    n = rows.shape[-1]
    if n == 0:
        return np.zeros(rows.shape[:-1], dtype=np.int64)
    b = rows + np.arange(n)
    table = _binom_table(n_sites + n, n + 1)
    return table[b, np.arange(1, n + 1)].sum(axis=-1)


def index_rank(index: Sequence[int], n_sites: int) -> int:
    return int(rank(np.sort(np.asarray(index, dtype=np.int64)), n_sites))


@functools.lru_cache(maxsize=None)
def canonical_indices(n_sites: int, order: int) -> np.ndarray:
    """All sorted multi-indices of size ``order``, row ``r`` having colex rank ``r``."""
    _check_cap(n_sites, order)
    rows = sorted(combinations_with_replacement(range(n_sites), order), key=lambda c: c[::-1])
    out = np.array(rows, dtype=np.int64).reshape(len(rows), order)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def site_counts(n_sites: int, order: int) -> np.ndarray:
    """(N, m) occupation counts of every canonical multi-index."""
    table = canonical_indices(n_sites, order)
    out = np.zeros((len(table), n_sites), dtype=np.int64)
    for col in range(order):
        np.add.at(out, (np.arange(len(table)), table[:, col]), 1)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def _multiplicities(n_sites: int, order: int) -> np.ndarray:
    counts = site_counts(n_sites, order)
    fact = math.factorial(order)
    out = np.array([fact // math.prod(math.factorial(int(c)) for c in row) for row in counts],
                   dtype=object)
    out.setflags(write=False)
    return out


def multiplicities(n_sites: int, order: int, exact: bool = True) -> np.ndarray:
    out = _multiplicities(n_sites, order)
    return out if exact else out.astype(float)


def multiplicity(alpha: Sequence[int]) -> int:
    """Number of ordered tuples whose sorted form is ``alpha``."""
    alpha = tuple(alpha)
    if list(alpha) != sorted(alpha):
        raise ValueError("alpha must be sorted")
    out = math.factorial(len(alpha))
    for site in set(alpha):
        out //= math.factorial(alpha.count(site))
    return out


@functools.lru_cache(maxsize=None)
def sub_rank(n_sites: int, order: int, positions: tuple) -> np.ndarray:
    """Ranks of ``table[:, positions]`` (already sorted since positions increase)."""
    table = canonical_indices(n_sites, order)
    out = rank(table[:, list(positions)], n_sites)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def merge_rank(n_sites: int, order: int, extra: tuple) -> np.ndarray:
    """Ranks of ``sort(row + extra)`` for every canonical row of the given order."""
    table = canonical_indices(n_sites, order)
    cols = np.broadcast_to(np.asarray(extra, dtype=np.int64), (len(table), len(extra)))
    merged = np.sort(np.concatenate([table, cols], axis=1), axis=1)
    out = rank(merged, n_sites)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def repeat_rank(n_sites: int, parts: tuple) -> np.ndarray:
    """Ranks of rows ``(x_1^{parts_1}, ..., x_k^{parts_k})`` for canonical ``x`` of size k."""
    table = canonical_indices(n_sites, len(parts))
    rows = np.sort(np.repeat(table, parts, axis=1), axis=1)
    out = rank(rows, n_sites)
    out.setflags(write=False)
    return out


# ----------------------------------------------------------------------------
# symmetric tensors


def exact_coef(x, exact: bool):
    """Coefficient in the arithmetic of the operand: Fraction when exact, else float."""
    if exact:
        return Fraction(x)
    return float(x)


class SymTensor:
    """Symmetric tensor of fixed order over ``n_sites`` sites.

    ``values[r]`` is the entry at the canonical multi-index of colex rank ``r``
    (see :func:`canonical_indices`).  Instances are immutable.
    """

    __slots__ = ("n_sites", "order", "values", "_lookup")

    def __init__(self, n_sites: int, order: int, values):
        values = _as_values(values).reshape(-1)
        if len(values) != canonical_count(n_sites, order):
            raise ValueError(
                f"expected {canonical_count(n_sites, order)} entries for order {order} "
                f"on {n_sites} sites, got {len(values)}")
        values.setflags(write=False)
        self.n_sites = int(n_sites)
        self.order = int(order)
        self.values = values
        self._lookup = None

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, n_sites: int, order: int, exact: bool = False) -> "SymTensor":
        _check_cap(n_sites, order)
        count = canonical_count(n_sites, order)
        vals = np.array([0] * count, dtype=object) if exact else np.zeros(count)
        return cls(n_sites, order, vals)

    @classmethod
    def scalar(cls, value, n_sites: int) -> "SymTensor":
        return cls(n_sites, 0, np.array([value], dtype=object if _is_exact(value) else float))

    @classmethod
    def from_entries(cls, n_sites: int, order: int, entries: Mapping[tuple, object],
                     exact: bool | None = None) -> "SymTensor":
        """Build from a map ``index tuple -> value``; indices may be unordered."""
        if exact is None:
            exact = all(_is_exact(v) for v in entries.values())
        vals = list(cls.zeros(n_sites, order, exact).values)
        for idx, v in entries.items():
            if len(idx) != order:
                raise ValueError(f"index {idx} does not have order {order}")
            if any(not 0 <= s < n_sites for s in idx):
                raise ValueError(f"index {idx} out of range")
            vals[index_rank(idx, n_sites)] = v if exact else float(v)
        return cls(n_sites, order, np.array(vals, dtype=object if exact else float))

    @classmethod
    def from_function(cls, n_sites: int, order: int,
                      fn: Callable[[tuple], object]) -> "SymTensor":
        table = canonical_indices(n_sites, order)
        vals = [fn(tuple(int(s) for s in row)) for row in table]
        exact = all(_is_exact(v) for v in vals)
        return cls(n_sites, order, np.array(vals, dtype=object if exact else float))

    @classmethod
    def tensor_power(cls, g, order: int) -> "SymTensor":
        """``g^{⊗order}`` for a site vector ``g``."""
        g = masses_of(g)
        table = canonical_indices(len(g), order)
        if g.dtype == object:
            vals = np.array([math.prod(g[row], start=1) for row in table], dtype=object)
        else:
            vals = np.prod(g[table], axis=1)
        return cls(len(g), order, vals)

    @classmethod
    def indicator(cls, n_sites: int, alpha: Sequence[int]) -> "SymTensor":
        """Value 1 at the canonical index ``alpha`` and 0 elsewhere."""
        return cls.from_entries(n_sites, len(alpha), {tuple(alpha): 1})

    @classmethod
    def monomial(cls, n_sites: int, alpha: Sequence[int]) -> "SymTensor":
        """Tensor ``u`` with ``<u, eta^{⊗n}> = prod_i eta(alpha_i)``."""
        alpha = tuple(sorted(alpha))
        return cls.from_entries(n_sites, len(alpha), {alpha: Fraction(1, multiplicity(alpha))})

    # access -------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def table(self) -> np.ndarray:
        return canonical_indices(self.n_sites, self.order)

    def __len__(self) -> int:
        return len(self.values)

    def entry(self, index: Sequence[int]):
        """Value at an ordered tuple (its sorted form is looked up)."""
        if len(index) != self.order:
            raise ValueError(f"index {tuple(index)} does not have order {self.order}")
        if self._lookup is None:
            self._lookup = {tuple(int(s) for s in row): v for row, v in zip(self.table, self.values)}
        return self._lookup[tuple(sorted(int(s) for s in index))]

    def entries(self, nonzero: bool = True) -> dict:
        out = {}
        for row, v in zip(self.table, self.values):
            if not nonzero or v != 0:
                out[tuple(int(s) for s in row)] = v
        return out

    def to_float(self) -> "SymTensor":
        return self if not self.exact else SymTensor(self.n_sites, self.order,
                                                     self.values.astype(float))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values.astype(float)))) if len(self.values) else 0.0

    def is_zero(self) -> bool:
        return not np.any(self.values != 0)

    # arithmetic ---------------------------------------------------------

    def _like(self, values) -> "SymTensor":
        return SymTensor(self.n_sites, self.order, values)

    def _check_compatible(self, other: "SymTensor") -> None:
        if self.n_sites != other.n_sites or self.order != other.order:
            raise ValueError("tensor shape mismatch "
                             f"({self.n_sites}, {self.order}) vs ({other.n_sites}, {other.order})")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._check_compatible(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        self._check_compatible(other)
        return self._like(self.values - other.values)

    def __neg__(self) -> "SymTensor":
        return self._like(-self.values)

    def __mul__(self, c) -> "SymTensor":
        if isinstance(c, SymTensor):
            return NotImplemented
        if self.exact and _is_exact(c):
            return self._like(self.values * c)
        return self._like(self.values.astype(float) * float(c))

    __rmul__ = __mul__

    def pointwise(self, other: "SymTensor") -> "SymTensor":
        """Entrywise product (symmetric when both factors are)."""
        self._check_compatible(other)
        return self._like(self.values * other.values)

    def contract(self, phi) -> "SymTensor":
        """Integrate one argument against the site vector ``phi``."""
        if self.order == 0:
            raise ValueError("cannot contract an order-0 tensor")
        phi = masses_of(phi)
        out = None
        for s in range(self.n_sites):
            if phi[s] == 0:
                continue
            term = phi[s] * self.values[merge_rank(self.n_sites, self.order - 1, (s,))]
            out = term if out is None else out + term
        if out is None:
            return SymTensor.zeros(self.n_sites, self.order - 1, self.exact and phi.dtype == object)
        return SymTensor(self.n_sites, self.order - 1, out)

    def equals(self, other: "SymTensor") -> bool:
        return (self.n_sites == other.n_sites and self.order == other.order
                and bool(np.all(self.values == other.values)))

    def __repr__(self) -> str:
        return f"SymTensor(n_sites={self.n_sites}, order={self.order}, entries={len(self)})"


def _is_exact(v) -> bool:
    return isinstance(v, (Rational, np.integer))


# ----------------------------------------------------------------------------
# pairings


def tensor_pairing(f: SymTensor, t: SymTensor):
    """Sum over ordered tuples of ``f * t``."""
    if f.order != t.order or f.n_sites != t.n_sites:
        raise ValueError(f"order mismatch: {f.order} vs {t.order}")
    mult = multiplicities(f.n_sites, f.order, exact=f.exact or t.exact)
    return (mult * f.values * t.values).sum()


def power_products(eta, n_sites: int, order: int) -> np.ndarray:
    """``prod_i eta(alpha_i)`` for every canonical alpha; ``eta`` may be (B, m)."""
    eta = np.asarray(eta)
    table = canonical_indices(n_sites, order)
    if eta.dtype == object:
        if eta.ndim == 1:
            return np.array([math.prod(eta[row], start=1) for row in table], dtype=object)
        return np.array([[math.prod(e[row], start=1) for row in table] for e in eta], dtype=object)
    return np.prod(eta[..., table], axis=-1)


def tensor_power_pairing(f: SymTensor, eta):
    """``<f, eta^{⊗n}>``."""
    masses = masses_of(eta)
    if len(masses) != f.n_sites:
        raise ValueError("measure and tensor live on different grids")
    if f.order == 0:
        return f.values[0]
    mult = multiplicities(f.n_sites, f.order, exact=f.exact)
    return (mult * f.values * power_products(masses, f.n_sites, f.order)).sum()


def tensor_power_pairing_many(f: SymTensor, etas: np.ndarray) -> np.ndarray:
    """Float batch of ``<f, eta^{⊗n}>`` over the rows of ``etas``."""
    etas = np.asarray(etas, dtype=float)
    if f.order == 0:
        return np.full(len(etas), float(f.values[0]))
    w = multiplicities(f.n_sites, f.order, exact=False) * f.values.astype(float)
    return power_products(etas, f.n_sites, f.order) @ w


def sym_outer(f: SymTensor, g: SymTensor) -> SymTensor:
    """Symmetrized outer product ``f ⊗̂ g``."""
    if f.n_sites != g.n_sites:
        raise ValueError("tensors live on different grids")
    m, a, b = f.n_sites, f.order, g.order
    n = a + b
    exact = f.exact and g.exact
    out = None
    for pos in combinations(range(n), a):
        rest = tuple(i for i in range(n) if i not in pos)
        term = f.values[sub_rank(m, n, pos)] * g.values[sub_rank(m, n, rest)]
        out = term if out is None else out + term
    return SymTensor(m, n, out * exact_coef(Fraction(1, math.comb(n, a)), exact))


__all__ = [
    "ENTRY_CAP", "GridSizeError", "GridSpec", "DiscreteMeasure", "PointConfiguration",
    "SiteFunction", "SymTensor", "canonical_count", "canonical_indices", "rank",
    "index_rank", "multiplicity", "multiplicities", "tensor_pairing",
    "tensor_power_pairing", "tensor_power_pairing_many", "sym_outer", "masses_of",
]
