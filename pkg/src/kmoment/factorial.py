"""Factorial powers, diagonal restriction and the factorial/monomial basis change.

The factorial power pairing is evaluated through ordered compositions of n:

    <f, eta^{⊙n}> = sum_k (-1)^(n-k)/k! sum_{c_1+...+c_k=n} n!/(c_1...c_k)
                    * <T_c f, eta^{⊗k}>

where ``T_c f(x_1..x_k) = f(x_1^{c_1}, ..., x_k^{c_k})``.  Everything that only
depends on the multiset of parts is grouped so each shape is evaluated once.
"""
from __future__ import annotations

import functools
import math
from collections import Counter
from fractions import Fraction
from itertools import combinations

import numpy as np

from .grid import (PointConfiguration, SymTensor, exact_coef, masses_of, multiplicities,
                   power_products, repeat_rank, tensor_power_pairing,
                   tensor_power_pairing_many)

MAX_ORDER = 12


def _check_order(n: int) -> None:
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}, got {n}")


@functools.lru_cache(maxsize=None)
def _compositions(n: int) -> tuple:
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        out.extend((first,) + rest for rest in _compositions(n - first))
    return tuple(out)


def enumerate_compositions(n: int) -> list[tuple[int, ...]]:
    """All ``2^(n-1)`` ordered compositions of ``n``."""
    _check_order(n)
    return list(_compositions(n))


@functools.lru_cache(maxsize=None)
def _set_partitions(n: int) -> tuple:
    # restricted growth strings: a[i] <= 1 + max(a[:i])
    out = []

    def grow(prefix, top):
        if len(prefix) == n:
            blocks = [[] for _ in range(top + 1)]
            for i, b in enumerate(prefix):
                blocks[b].append(i)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(top + 2):
            grow(prefix + [b], max(top, b))

    grow([0], 0)
    return tuple(out)


def enumerate_set_partitions(n: int) -> list[tuple[tuple[int, ...], ...]]:
    """All set partitions of ``{0..n-1}``; blocks are sorted and ordered by minimum."""
    _check_order(n)
    return list(_set_partitions(n))


@functools.lru_cache(maxsize=None)
def _shapes(n: int) -> dict:
    """k -> [(sorted parts, number of compositions with that multiset)]."""
    out: dict = {}
    for shape, count in sorted(Counter(tuple(sorted(c)) for c in _compositions(n)).items()):
        out.setdefault(len(shape), []).append((shape, count))
    return out


def _composition_weight(parts: tuple, n: int) -> Fraction:
    k = len(parts)
    return Fraction((-1) ** (n - k) * math.factorial(n), math.factorial(k) * math.prod(parts))


@functools.lru_cache(maxsize=None)
def _distinct_perms(parts: tuple) -> tuple:
    """Distinct orderings of a multiset of parts, without enumerating all k! permutations."""
    if not parts:
        return ((),)
    out = []
    for first in sorted(set(parts)):
        rest = list(parts)
        rest.remove(first)
        out.extend((first,) + tail for tail in _distinct_perms(tuple(rest)))
    return tuple(out)


def t_restrict(f: SymTensor, parts) -> SymTensor:
    """Diagonal restriction ``T_c f``, symmetrized over its k arguments."""
    parts = tuple(int(p) for p in parts)
    if any(p < 1 for p in parts) or sum(parts) != f.order:
        raise ValueError(f"composition {parts} does not sum to order {f.order}")
    perms = _distinct_perms(tuple(sorted(parts)))
    out = None
    for perm in perms:
        term = f.values[repeat_rank(f.n_sites, perm)]
        out = term if out is None else out + term
    return SymTensor(f.n_sites, len(parts), out * exact_coef(Fraction(1, len(perms)), f.exact))


def factorial_pairing(f: SymTensor, eta):
    """``<f, eta^{⊙n}>`` via the composition formula; works for real-valued ``eta``."""
    n = f.order
    if n == 0:
        return f.values[0]
    masses = masses_of(eta)
    exact = f.exact and masses.dtype == object
    total = 0
    for k, shapes in _shapes(n).items():
        for shape, count in shapes:
            w = exact_coef(_composition_weight(shape, n) * count, exact)
            total = total + w * tensor_power_pairing(t_restrict(f, shape), masses)
    return total


def factorial_pairing_many(f: SymTensor, etas) -> np.ndarray:
    """Batch of :func:`factorial_pairing` over the rows of ``etas``.

    Exact (object array of Fractions) when ``f`` is exact and ``etas`` is an
    integer array; float otherwise.
    """
    etas = np.asarray(etas)
    if f.exact and etas.dtype.kind in "iu":
        return _factorial_pairing_exact_many(f, etas)
    etas = etas.astype(float)
    n = f.order
    if n == 0:
        return np.full(len(etas), float(f.values[0]))
    total = np.zeros(len(etas))
    for k, shapes in _shapes(n).items():
        for shape, count in shapes:
            w = float(_composition_weight(shape, n) * count)
            total += w * tensor_power_pairing_many(t_restrict(f, shape), etas)
    return total


def _factorial_pairing_exact_many(f: SymTensor, etas: np.ndarray) -> np.ndarray:
    # integer arithmetic over a common denominator keeps the batch fast
    n, m = f.order, f.n_sites
    if n == 0:
        return np.array([Fraction(f.values[0])] * len(etas), dtype=object)
    den = math.lcm(*(Fraction(v).denominator for v in f.values))
    scaled = np.array([int(Fraction(v) * den) for v in f.values], dtype=object)
    terms = []
    for k, shapes in _shapes(n).items():
        mult = multiplicities(m, k)
        powers = power_products(etas.astype(np.int64), m, k).astype(object)
        for shape, count in shapes:
            perms = _distinct_perms(shape)
            summed = sum(scaled[repeat_rank(m, p)] for p in perms)
            w = _composition_weight(shape, n) * count / len(perms)
            terms.append((w, powers @ (mult * summed)))
    L = math.lcm(*(w.denominator for w, _ in terms))
    total = sum(int(w * L) * v for w, v in terms)
    return np.array([Fraction(int(t), L * den) for t in total], dtype=object)


def factorial_pairing_config(f: SymTensor, gamma: PointConfiguration):
    """Sum of ``f`` over ordered selections of ``n`` distinct points of ``gamma``."""
    counts = gamma.counts if isinstance(gamma, PointConfiguration) else np.asarray(gamma)
    labels = np.repeat(np.arange(len(counts)), counts)
    n = f.order
    if n == 0:
        return f.values[0]
    if n > len(labels):
        return 0
    total = 0
    for combo in combinations(labels.tolist(), n):
        total = total + f.entry(combo)
    return total * math.factorial(n)


def factorial_poly_expand(f: SymTensor) -> list[tuple[int, SymTensor]]:
    """Monomial coefficients ``c^(k)`` with ``<f, eta^{⊙n}> = sum_k <c^(k), eta^{⊗k}>``.

    Returned highest order first.
    """
    n = f.order
    if n == 0:
        return [(0, f)]
    out = []
    for k in range(n, 0, -1):
        vals = None
        for parts in _compositions(n):
            if len(parts) != k:
                continue
            w = exact_coef(_composition_weight(parts, n), f.exact)
            term = w * f.values[repeat_rank(f.n_sites, parts)]
            vals = term if vals is None else vals + term
        out.append((k, SymTensor(f.n_sites, k, vals)))
    return out


def power_poly_expand(f: SymTensor) -> list[tuple[int, SymTensor]]:
    """Factorial coefficients ``d^(k)`` with ``<f, eta^{⊗n}> = sum_k <d^(k), eta^{⊙k}>``.

    Inverse of :func:`factorial_poly_expand`; highest order first.
    """
    n = f.order
    if n == 0:
        return [(0, f)]
    out = []
    for k in range(n, 0, -1):
        vals = None
        for parts in _compositions(n):
            if len(parts) != k:
                continue
            w = Fraction(math.factorial(n),
                         math.factorial(k) * math.prod(math.factorial(p) for p in parts))
            term = exact_coef(w, f.exact) * f.values[repeat_rank(f.n_sites, parts)]
            vals = term if vals is None else vals + term
        out.append((k, SymTensor(f.n_sites, k, vals)))
    return out


def falling_factorial(x, n: int):
    out = 1
    for j in range(n):
        out = out * (x - j)
    return out


__all__ = [
    "enumerate_compositions", "enumerate_set_partitions", "t_restrict",
    "factorial_pairing", "factorial_pairing_many", "factorial_pairing_config",
    "factorial_poly_expand", "power_poly_expand", "falling_factorial",
]
