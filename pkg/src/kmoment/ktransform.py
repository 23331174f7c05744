"""K-transform, the ⋆ product, the H~ construction and shifted correlations."""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .conversion import CorrelationSequence, DegreeError, riesz_corr
from .factorial import factorial_pairing, factorial_pairing_many
from .grid import (SymTensor, canonical_indices, exact_coef, masses_of, merge_rank,
                   multiplicity, sub_rank, sym_outer)

STAR_MAX_ORDER = 10


class CoeffSequence:
    """Finitely supported coefficient sequence ``G = (g^(j))``.

    ``degree`` is the truncation degree; ``truncated`` records that an
    operation dropped nonzero components above it.
    """

    __slots__ = ("n_sites", "components", "degree", "truncated")

    def __init__(self, components: Mapping[int, SymTensor], n_sites: int | None = None,
                 degree: int | None = None, truncated: bool = False):
        comps = {int(j): t for j, t in components.items()}
        if n_sites is None:
            if not comps:
                raise ValueError("n_sites is required for an empty sequence")
            n_sites = next(iter(comps.values())).n_sites
        for j, t in comps.items():
            if t.order != j or t.n_sites != n_sites:
                raise ValueError(f"component {j} has order {t.order} on {t.n_sites} sites")
        top = max(comps, default=0)
        if degree is None:
            degree = top
        elif any(j > degree and not t.is_zero() for j, t in comps.items()):
            raise ValueError("components above the truncation degree must vanish")
        self.n_sites = n_sites
        self.components = dict(sorted(comps.items()))
        self.degree = degree
        self.truncated = truncated

    @classmethod
    def unit(cls, n_sites: int) -> "CoeffSequence":
        return cls({0: SymTensor.scalar(1, n_sites)})

    @classmethod
    def single(cls, tensor: SymTensor) -> "CoeffSequence":
        return cls({tensor.order: tensor})

    @classmethod
    def exponential(cls, g, degree: int) -> "CoeffSequence":
        """``(g^{⊗j})_{j <= degree}``."""
        g = masses_of(g)
        return cls({j: SymTensor.tensor_power(g, j) for j in range(degree + 1)})

    def get(self, j: int) -> SymTensor | None:
        return self.components.get(j)

    @property
    def exact(self) -> bool:
        return all(t.exact for t in self.components.values())

    def __repr__(self) -> str:
        return (f"CoeffSequence(n_sites={self.n_sites}, orders={list(self.components)}, "
                f"degree={self.degree}, truncated={self.truncated})")


def phi_sequence(phi, n: int) -> CoeffSequence:
    """Embedding of ``Phi_{phi,n}(eta) = <phi^{⊗n}, eta^{⊙n}>`` as ``g^(n) = n! phi^{⊗n}``."""
    t = SymTensor.tensor_power(masses_of(phi), n)
    return CoeffSequence({n: t * math.factorial(n)})


def factorial_basis_element(n_sites: int, alpha: Sequence[int]) -> CoeffSequence:
    """``e_alpha`` with ``K e_alpha(eta) = prod_s (eta_s)_{a_s}`` (falling factorials)."""
    alpha = tuple(sorted(alpha))
    k = len(alpha)
    u = SymTensor.from_entries(n_sites, k, {alpha: Fraction(math.factorial(k), multiplicity(alpha))})
    return CoeffSequence({k: u}, n_sites=n_sites)


def k_transform(G: CoeffSequence, eta):
    """``KG(eta) = sum_j <g^(j), eta^{⊙j}> / j!``."""
    masses = masses_of(eta)
    total = 0
    for j, g in G.components.items():
        exact = g.exact and masses.dtype == object
        total = total + factorial_pairing(g, masses) * exact_coef(Fraction(1, math.factorial(j)), exact)
    return total


def k_transform_many(G: CoeffSequence, etas) -> np.ndarray:
    etas = np.asarray(etas, dtype=float)
    total = np.zeros(len(etas))
    for j, g in G.components.items():
        total += factorial_pairing_many(g, etas) / math.factorial(j)
    return total


def _star_component(G: CoeffSequence, H: CoeffSequence, j: int, m: int, exact: bool):
    vals = None
    for q in range(j + 1):
        for p in range(j - q + 1):
            r = j - p - q
            g, h = G.get(p + q), H.get(q + r)
            if g is None or h is None or g.is_zero() or h.is_zero():
                continue
            for J1 in combinations(range(j), p + q):
                rest = [i for i in range(j) if i not in J1]
                for Q in combinations(J1, q):
                    J2 = tuple(sorted(set(Q) | set(rest)))
                    term = g.values[sub_rank(m, j, J1)] * h.values[sub_rank(m, j, J2)]
                    vals = term if vals is None else vals + term
    if vals is None:
        return None
    return SymTensor(m, j, vals)


def star(G: CoeffSequence, H: CoeffSequence, degree: int | None = None) -> CoeffSequence:
    """``(G⋆H)^(j)(x_J) = sum_{J1 ∪ J2 = J} g(x_{J1}) h(x_{J2})`` (overlap allowed)."""
    if G.n_sites != H.n_sites:
        raise ValueError("sequences live on different grids")
    m = G.n_sites
    if degree is None:
        degree = G.degree + H.degree
    top_g = max((j for j, t in G.components.items() if not t.is_zero()), default=None)
    top_h = max((j for j, t in H.components.items() if not t.is_zero()), default=None)
    top = -1 if top_g is None or top_h is None else top_g + top_h
    if min(top, degree) > STAR_MAX_ORDER:
        raise ValueError(f"star is limited to orders <= {STAR_MAX_ORDER}")
    exact = G.exact and H.exact
    out = {}
    for j in range(min(top, degree) + 1):
        comp = _star_component(G, H, j, m, exact)
        if comp is not None:
            out[j] = comp
    # the top order g^(a) ⊗̂ h^(b) of two nonzero components never vanishes
    truncated = top > degree or G.truncated or H.truncated
    return CoeffSequence(out, n_sites=m, degree=degree, truncated=truncated)


def h_tilde(H: CoeffSequence, x: Sequence[int]) -> CoeffSequence:
    """``H~_x^(s)(y) = sum_{J ⊂ {1..n}} H^(s+|J|)(y, x_J)``."""
    x = tuple(int(v) for v in x)
    m = H.n_sites
    subsets: dict = {}
    for size in range(len(x) + 1):
        for J in combinations(range(len(x)), size):
            key = tuple(sorted(x[i] for i in J))
            subsets[key] = subsets.get(key, 0) + 1
    out = {}
    for s in range(H.degree + 1):
        vals = None
        for key, count in subsets.items():
            h = H.get(s + len(key))
            if h is None:
                continue
            term = h.values[merge_rank(m, s, key)] * count
            vals = term if vals is None else vals + term
        if vals is not None:
            out[s] = SymTensor(m, s, vals)
    return CoeffSequence(out, n_sites=m, degree=H.degree)


def _elementary_symmetric(phi: np.ndarray, m: int, k: int, l: int) -> SymTensor:
    """``phi^{⊗l} ⊗̂ 1^{⊗(k-l)}``."""
    exact = phi.dtype == object
    ones = np.array([1] * m, dtype=object) if exact else np.ones(m)
    return sym_outer(SymTensor.tensor_power(phi, l), SymTensor.tensor_power(ones, k - l))


def shift_corr(rho: CorrelationSequence, phi, n: int) -> CorrelationSequence:
    """Correlation sequence of ``Phi_{phi,n}`` times ``rho`` (closed form).

    Component ``k`` is

        sum_l n!k!/((n-l)! l! (k-l)!) (phi^{⊗l} ⊗̂ 1^{⊗(k-l)}) · C_phi^{n-l} rho^(n-l+k)

    where ``C_phi`` contracts one argument against ``phi``.
    """
    phi = masses_of(phi)
    if np.any(phi < 0):
        raise ValueError("phi must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    D = rho.truncation
    if D < n:
        raise DegreeError(f"shift by order {n} needs truncation D >= {n}, got {D}", n)
    m = rho.n_sites
    exact = rho.exact and phi.dtype == object
    comps = []
    for k in range(D - n + 1):
        total = None
        for l in range(min(n, k) + 1):
            coef = Fraction(math.factorial(n) * math.factorial(k),
                            math.factorial(n - l) * math.factorial(l) * math.factorial(k - l))
            contracted = rho[n - l + k]
            for _ in range(n - l):
                contracted = contracted.contract(phi)
            term = _elementary_symmetric(phi, m, k, l).pointwise(contracted) * exact_coef(coef, exact)
            total = term if total is None else total + term
        comps.append(total)
    return CorrelationSequence(comps)


def shift_corr_bruteforce(rho: CorrelationSequence, P: CoeffSequence, Q: CoeffSequence):
    """``L~_rho(KP · KQ)`` through ``star(P, Q)``."""
    need = P.degree + Q.degree
    rho.require(need, "shifted functional")
    return riesz_corr(rho, star(P, Q))


def rewriting_lhs(HH: CoeffSequence, phi, y: Sequence[int], x: Sequence[int]):
    """Left side of the H~ rewriting at ``(y, x)`` with ``HH = star(H, H)``.

    ``sum_l C(n,l) avg_{|J|=l} (H⋆H)^(i+l)(y, x_J) prod_{j in J} phi(x_j) prod_{j not in J} phi(x_j)``.
    """
    phi = masses_of(phi)
    y, x = tuple(y), tuple(x)
    n = len(x)
    total = 0
    for l in range(n + 1):
        comp = HH.get(len(y) + l)
        if comp is None:
            continue
        subsets = list(combinations(range(n), l))
        acc = 0
        for J in subsets:
            acc = acc + comp.entry(y + tuple(x[j] for j in J))
        total = total + math.comb(n, l) * acc / len(subsets)
    return total * math.prod(phi[list(x)], start=1)


def rewriting_rhs(H: CoeffSequence, phi, y: Sequence[int], x: Sequence[int]):
    """``(H~_x ⋆ H~_x)^(i)(y) prod_j phi(x_j)``."""
    phi = masses_of(phi)
    Ht = h_tilde(H, x)
    comp = star(Ht, Ht).get(len(y))
    value = 0 if comp is None else comp.entry(tuple(y))
    return value * math.prod(phi[list(x)], start=1)


__all__ = [
    "CoeffSequence", "phi_sequence", "factorial_basis_element", "k_transform",
    "k_transform_many", "star", "h_tilde", "shift_corr", "shift_corr_bruteforce",
    "rewriting_lhs", "rewriting_rhs",
]
