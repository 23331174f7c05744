"""Randomized identity suites run by ``kmoment verify``.

Each suite returns an :class:`IdentityResult` holding the worst error seen
over its battery and the tolerance it is held to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .conversion import (CorrelationSequence, corr_to_moment, moment_to_corr, riesz_corr,
                         riesz_moment)
from .factorial import (enumerate_compositions, enumerate_set_partitions, factorial_pairing,
                        factorial_pairing_config, factorial_pairing_many,
                        factorial_poly_expand, falling_factorial, power_poly_expand)
from .grid import PointConfiguration, SymTensor, canonical_count, canonical_indices
from .ktransform import (CoeffSequence, factorial_basis_element, k_transform_many, phi_sequence,
                         rewriting_lhs, rewriting_rhs, shift_corr, shift_corr_bruteforce, star)
from .realizability import (_GramBuilder, factorial_gram, factorial_to_monomial,
                            ConstraintPoly)


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_error: float
    tol: float
    cases: int

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: max error {self.max_error:.3e} "
                f"(tol {self.tol:.0e}, {self.cases} cases)")


def _rel(a, b) -> float:
    a, b = float(a), float(b)
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def random_tensor(rng, m: int, n: int, kind: str = "normal") -> SymTensor:
    size = canonical_count(m, n)
    if kind == "int":
        return SymTensor(m, n, rng.integers(-9, 10, size))
    if kind == "uniform":
        return SymTensor(m, n, rng.uniform(0.0, 1.0, size))
    return SymTensor(m, n, rng.normal(size=size))


def random_coeffs(rng, m: int, degree: int, kind: str = "normal") -> CoeffSequence:
    return CoeffSequence({j: random_tensor(rng, m, j, kind) for j in range(degree + 1)})


def propconv(pairs: int = 100, etas_per_pair: int = 5, seed: int = 0) -> IdentityResult:
    """``K(G⋆H)(eta) = KG(eta) KH(eta)``; error relative to ``1 + |lhs|``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        m = int(rng.integers(1, 6))
        G = random_coeffs(rng, m, int(rng.integers(0, 4)))
        H = random_coeffs(rng, m, int(rng.integers(0, 4)))
        etas = rng.uniform(0.0, 1.5, (etas_per_pair, m))
        lhs = k_transform_many(star(G, H), etas)
        rhs = k_transform_many(G, etas) * k_transform_many(H, etas)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs)))))
    return IdentityResult("propconv", worst, 1e-10, pairs * etas_per_pair)


def shift(max_degree: int = 5, sites=(2, 3), seed: int = 0) -> IdentityResult:
    """Closed-form shifted sequence against ``L~_rho(K(P ⋆ e_alpha))``."""
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for m in sites:
        rho = CorrelationSequence([random_tensor(rng, m, n, "uniform")
                                   for n in range(max_degree + 1)])
        phi = rng.uniform(0.1, 1.0, m)
        for n in range(1, max_degree + 1):
            shifted = shift_corr(rho, phi, n)
            P = phi_sequence(phi, n)
            for k in range(max_degree - n + 1):
                for alpha in canonical_indices(m, k):
                    e = factorial_basis_element(m, alpha)
                    worst = max(worst, _rel(riesz_corr(shifted, e),
                                            shift_corr_bruteforce(rho, P, e)))
                    cases += 1
    return IdentityResult("shift", worst, 1e-12, cases)


def htilde(n_max: int = 3, i_max: int = 3, m: int = 3, seed: int = 0) -> IdentityResult:
    """Rewriting of the shifted test function through ``H~_x``, pointwise."""
    rng = np.random.default_rng(seed)
    H = random_coeffs(rng, m, 3, "uniform")
    phi = rng.uniform(0.1, 1.0, m)
    HH = star(H, H)
    worst, cases = 0.0, 0
    for n in range(n_max + 1):
        for x in product(range(m), repeat=n):
            for i in range(i_max + 1):
                for y in canonical_indices(m, i):
                    y = tuple(int(v) for v in y)
                    worst = max(worst, _rel(rewriting_lhs(HH, phi, y, x),
                                            rewriting_rhs(H, phi, y, x)))
                    cases += 1
    return IdentityResult("htilde", worst, 1e-12, cases)


def integer_configurations(m: int, max_total: int) -> np.ndarray:
    return np.array([c for c in product(range(max_total + 1), repeat=m) if sum(c) <= max_total],
                    dtype=np.int64)


def factorial(tensors: int = 200, max_total: int = 8, seed: int = 0) -> IdentityResult:
    """Composition formula vs distinct-index sum, and the falling-factorial law (exact)."""
    rng = np.random.default_rng(seed)
    mismatches, cases = 0, 0
    configs = {m: integer_configurations(m, max_total) for m in range(1, 5)}
    for _ in range(tensors):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(0, 7))
        f = random_tensor(rng, m, n, "int")
        fast = factorial_pairing_many(f, configs[m])
        for c, v in zip(configs[m], fast):
            mismatches += v != factorial_pairing_config(f, PointConfiguration(c))
            cases += 1
    m = 3
    for size in range(1, m + 1):
        for A in combinations(range(m), size):
            ind = np.zeros(m, dtype=np.int64)
            ind[list(A)] = 1
            for n in range(1, 9):
                f = SymTensor.tensor_power(ind, n)
                got = factorial_pairing_many(f, configs[m])
                want = [falling_factorial(int(c[list(A)].sum()), n) for c in configs[m]]
                mismatches += sum(g != w for g, w in zip(got, want))
                cases += len(want)
    return IdentityResult("factorial", float(mismatches), 0.0, cases)


def random_rational_corr(rng, m: int, D: int) -> CorrelationSequence:
    comps = []
    for n in range(D + 1):
        num = rng.integers(-20, 21, canonical_count(m, n))
        den = rng.integers(1, 7, canonical_count(m, n))
        comps.append(SymTensor(m, n, np.array([Fraction(int(a), int(b)) for a, b in zip(num, den)],
                                              dtype=object)))
    return CorrelationSequence(comps)


def conversion(D: int = 8, m: int = 3, seed: int = 0) -> IdentityResult:
    """Exact round trips, partition-weight identity, and Riesz functional agreement."""
    rng = np.random.default_rng(seed)
    errors = 0.0
    rho = random_rational_corr(rng, m, D)
    back = moment_to_corr(corr_to_moment(rho))
    errors += sum(not a.equals(b) for a, b in zip(rho, back))
    mom = corr_to_moment(random_rational_corr(rng, m, D))
    errors += sum(not a.equals(b) for a, b in zip(mom, corr_to_moment(moment_to_corr(mom))))
    for n in range(1, D + 1):
        blocks = [len(p) for p in enumerate_set_partitions(n)]
        for k in range(1, n + 1):
            lhs = sum(Fraction(math.factorial(n),
                               math.factorial(k) * math.prod(math.factorial(c) for c in comp))
                      for comp in enumerate_compositions(n) if len(comp) == k)
            errors += lhs != blocks.count(k)
    rho_f = CorrelationSequence([random_tensor(rng, m, n, "uniform") for n in range(D + 1)])
    mom_f = corr_to_moment(rho_f)
    worst = 0.0
    for n in range(1, D + 1):
        f = random_tensor(rng, m, n)
        lhs = riesz_moment(mom_f, [(n, f)])
        rhs = riesz_corr(rho_f, CoeffSequence(
            {k: t * math.factorial(k) for k, t in power_poly_expand(f)}, n_sites=m))
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
        lhs = riesz_moment(mom_f, factorial_poly_expand(f))
        rhs = riesz_corr(rho_f, CoeffSequence({n: f * math.factorial(n)}))
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
    return IdentityResult("conversion", max(errors, worst), 1e-12, 2 * D + D * (D + 1) // 2 + 2)


def congruence(D: int = 6, sites=(2, 3), seed: int = 0) -> IdentityResult:
    """Factorial-basis matrices equal ``T M T^t`` for the monomial-basis matrices."""
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for m in sites:
        rho = CorrelationSequence([random_tensor(rng, m, n, "uniform") for n in range(D + 1)])
        mom = corr_to_moment(rho)
        phi = rng.uniform(0.0, 1.0, m)
        for n in range(0, D + 1):
            r = (D - n) // 2
            T = factorial_to_monomial(m, r).astype(float)
            gb = _GramBuilder(mom, r)
            if n == 0:
                F, M = factorial_gram(rho, r), gb.shifted(())
            else:
                F = factorial_gram(shift_corr(rho, phi, n), r)
                M = gb.localizing(ConstraintPoly("Phi_phi_k", phi, n))
            diff = np.max(np.abs(F - T @ M @ T.T)) / (1 + np.max(np.abs(F)))
            worst = max(worst, float(diff))
            cases += 1
    return IdentityResult("congruence", worst, 1e-10, cases)


SUITES = {
    "propconv": propconv,
    "shift": shift,
    "htilde": htilde,
    "factorial": factorial,
    "conversion": conversion,
    "congruence": congruence,
}


def run_suites(names=None) -> list[IdentityResult]:
    names = list(SUITES) if not names else names
    return [SUITES[name]() for name in names]


__all__ = ["IdentityResult", "SUITES", "run_suites", "propconv", "shift", "htilde",
           "factorial", "conversion", "congruence"]
