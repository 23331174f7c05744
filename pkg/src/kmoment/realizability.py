"""Hankel and localizing matrices, PSD verdicts and the realizability checks.

Two polynomial bases are used:

* the monomial basis ``x^alpha`` (canonical multi-indices up to degree r), for
  moment sequences, with entries ``L_m(P x^alpha x^beta)``;
* the factorial basis ``e_alpha`` with ``K e_alpha = prod_s (eta_s)_{a_s}``, for
  correlation sequences, with entries ``L~_rho(K(e_alpha ⋆ e_beta))``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .conversion import CorrelationSequence, DegreeError, MomentSequence
from .factorial import factorial_poly_expand
from .grid import (GridSpec, SymTensor, canonical_indices, masses_of, merge_rank,
                   multiplicities, multiplicity, power_products, rank, tensor_pairing)
from .ktransform import CoeffSequence, factorial_basis_element, shift_corr, star

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
ON_TEST_SET = "passed on test set"


# ----------------------------------------------------------------------------
# bases and constraint polynomials


@functools.lru_cache(maxsize=None)
def _basis_elements(n_sites: int, r: int) -> tuple:
    out = []
    for k in range(r + 1):
        out.extend(tuple(int(s) for s in row) for row in canonical_indices(n_sites, k))
    return tuple(out)


class MonomialBasis:
    """All canonical multi-indices of size <= r, ordered by degree then colex rank."""

    def __init__(self, n_sites: int, r: int):
        self.n_sites = n_sites
        self.r = r
        self.elements = _basis_elements(n_sites, r)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True, eq=False)
class ConstraintPoly:
    """One of the constraint polynomials of the realizability theorems.

    ``Phi_psi``: <psi, eta>;  ``Upsilon_phi``: 1 - <phi, eta>^2;
    ``Theta_phi``: 1 - <phi, eta>;  ``Phi_phi_k``: <phi^{⊗k}, eta^{⊙k}>.
    """

    kind: str
    phi: np.ndarray
    k: int = 1
    label: str = ""

    KINDS = ("Phi_psi", "Upsilon_phi", "Theta_phi", "Phi_phi_k")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        object.__setattr__(self, "phi", masses_of(self.phi))
        if self.kind == "Phi_phi_k" and self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def n_sites(self) -> int:
        return len(self.phi)

    @property
    def degree(self) -> int:
        return {"Phi_psi": 1, "Upsilon_phi": 2, "Theta_phi": 1, "Phi_phi_k": self.k}[self.kind]

    def tensor_terms(self) -> list[tuple[int, SymTensor]]:
        """``P(eta) = sum_k <c^(k), eta^{⊗k}>``."""
        m, phi = self.n_sites, self.phi
        one = SymTensor.scalar(1, m)
        if self.kind == "Phi_psi":
            return [(1, SymTensor(m, 1, phi))]
        if self.kind == "Upsilon_phi":
            return [(0, one), (2, -SymTensor.tensor_power(phi, 2))]
        if self.kind == "Theta_phi":
            return [(0, one), (1, -SymTensor(m, 1, phi))]
        return factorial_poly_expand(SymTensor.tensor_power(phi, self.k))

    @functools.cached_property
    def monomials(self) -> tuple:
        """``((gamma, coef), ...)`` with ``P(eta) = sum coef * prod_i eta(gamma_i)``."""
        out = []
        for k, t in self.tensor_terms():
            mult = multiplicities(self.n_sites, k, exact=t.exact)
            for row, c, w in zip(canonical_indices(self.n_sites, k), t.values, mult):
                if c != 0:
                    out.append((tuple(int(s) for s in row), c * w))
        return tuple(out)

    def evaluate(self, eta):
        masses = masses_of(eta)
        return sum(c * math.prod(masses[list(g)], start=1) for g, c in self.monomials)


def constraint(kind: str, phi, k: int = 1, label: str = "") -> ConstraintPoly:
    return ConstraintPoly(kind, phi, k, label)


# ----------------------------------------------------------------------------
# matrix assembly


@functools.lru_cache(maxsize=None)
def _pair_plan(n_sites: int, r: int) -> tuple:
    """Group the (alpha, beta) pairs of the basis by merged degree."""
    elems = _basis_elements(n_sites, r)
    groups: dict = {}
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            groups.setdefault(len(a) + len(b), []).append((i, j, tuple(sorted(a + b))))
    plan = []
    for d, items in sorted(groups.items()):
        rows = np.array([t[0] for t in items])
        cols = np.array([t[1] for t in items])
        merged = np.array([t[2] for t in items], dtype=np.int64).reshape(len(items), d)
        plan.append((d, rows, cols, merged))
    return tuple(plan)


def _shifted_gram(m: MomentSequence, r: int, gamma: tuple) -> np.ndarray:
    """``M[alpha, beta] = m^(|alpha|+|beta|+|gamma|)(alpha ⊎ beta ⊎ gamma)``."""
    n = m.n_sites
    size = len(_basis_elements(n, r))
    exact = m.exact
    out = np.zeros((size, size), dtype=object if exact else float)
    for d, rows, cols, merged in _pair_plan(n, r):
        g = np.broadcast_to(np.asarray(gamma, dtype=np.int64), (len(rows), len(gamma)))
        idx = rank(np.sort(np.concatenate([merged, g], axis=1), axis=1), n)
        out[rows, cols] = m[d + len(gamma)].values[idx]
    return out


class _GramBuilder:
    def __init__(self, m: MomentSequence, r: int):
        self.m = m
        self.r = r
        self._cache: dict = {}

    def shifted(self, gamma: tuple) -> np.ndarray:
        if gamma not in self._cache:
            self._cache[gamma] = _shifted_gram(self.m, self.r, gamma)
        return self._cache[gamma]

    def localizing(self, P: ConstraintPoly) -> np.ndarray:
        out = None
        for gamma, c in P.monomials:
            term = c * self.shifted(gamma)
            out = term if out is None else out + term
        if out is None:
            return self.shifted(()) * 0
        return out


def hankel_matrix(m: MomentSequence, r: int) -> np.ndarray:
    """``L_m(x^alpha x^beta)`` over the monomial basis of degree <= r."""
    m.require(2 * r, f"hankel matrix of degree {r}")
    return _shifted_gram(m, r, ())


def localizing_matrix(m: MomentSequence, P: ConstraintPoly, r: int) -> np.ndarray:
    """``L_m(P x^alpha x^beta)`` over the monomial basis of degree <= r."""
    m.require(2 * r + P.degree, f"localizing matrix of degree {r} for {P.kind}")
    return _GramBuilder(m, r).localizing(P)


def factorial_to_monomial(n_sites: int, r: int) -> np.ndarray:
    """Matrix ``T`` with ``K e_alpha = sum_gamma T[alpha, gamma] x^gamma``.

    Lower triangular with unit diagonal in the degree-ordered basis, so the
    factorial-basis matrices equal ``T M T^t`` for the monomial-basis ones.
    """
    elems = _basis_elements(n_sites, r)
    pos = {e: i for i, e in enumerate(elems)}
    out = np.zeros((len(elems), len(elems)), dtype=object)
    for i, a in enumerate(elems):
        u = SymTensor.monomial(n_sites, a)
        for k, c in factorial_poly_expand(u):
            mult = multiplicities(n_sites, k)
            for row, v, w in zip(canonical_indices(n_sites, k), c.values, mult):
                if v != 0:
                    out[i, pos[tuple(int(s) for s in row)]] += v * w
    return out


@functools.lru_cache(maxsize=None)
def _star_weights(n_sites: int, r: int) -> tuple:
    """Per order j, ``W_j`` with ``F.flat = sum_j W_j @ rho^(j).values``."""
    elems = _basis_elements(n_sites, r)
    size = len(elems)
    basis = [factorial_basis_element(n_sites, a) for a in elems]
    basis = [CoeffSequence({j: t.to_float() for j, t in e.components.items()}, n_sites=n_sites)
             for e in basis]
    W = [np.zeros((size * size, len(canonical_indices(n_sites, j)))) for j in range(2 * r + 1)]
    for i in range(size):
        for k in range(i, size):
            prod = star(basis[i], basis[k])
            for j, t in prod.components.items():
                w = multiplicities(n_sites, j, exact=False) * t.values / math.factorial(j)
                W[j][i * size + k] = w
                W[j][k * size + i] = w
    for w in W:
        w.setflags(write=False)
    return tuple(W)


def factorial_gram(rho: CorrelationSequence, r: int) -> np.ndarray:
    """``L~_rho(K(e_alpha ⋆ e_beta))`` over the factorial basis of degree <= r."""
    rho.require(2 * r, f"factorial-basis matrix of degree {r}")
    return _gram_from_components([rho[j].values for j in range(2 * r + 1)], rho.n_sites, r)


def _gram_from_components(values, n_sites: int, r: int) -> np.ndarray:
    W = _star_weights(n_sites, r)
    size = len(_basis_elements(n_sites, r))
    flat = sum(W[j] @ np.asarray(values[j], dtype=float) for j in range(2 * r + 1))
    return flat.reshape(size, size)


def psd_verdict(M, tol: float) -> tuple[float, bool]:
    """Minimum eigenvalue of the symmetrized matrix and ``min_eig >= -tol (1 + max|M|)``."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.size == 0:
        return 0.0, True
    M = (M + M.T) / 2
    lam = float(np.linalg.eigvalsh(M)[0])
    return lam, lam >= -_threshold_scale(M) * tol


def _threshold_scale(M: np.ndarray) -> float:
    return 1.0 + float(np.max(np.abs(M))) if M.size else 1.0


# ----------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ConditionRecord:
    label: str
    dimension: int
    min_eigenvalue: float
    threshold: float
    passed: bool
    scope: str = "verified"


@dataclass(frozen=True)
class EqualityRecord:
    label: str
    lhs: float
    rhs: float
    gap: float
    tol: float
    passed: bool


@dataclass(frozen=True)
class DiagnosticRecord:
    label: str
    value: float
    bound: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class DeterminacyDiagnostic:
    horizon: int
    xi: list
    carleman: list
    growth: list
    fitted_exponent: float | None
    almost_increasing: float | None
    consistent: bool
    note: str = ""


@dataclass
class CheckReport:
    kind: str
    conditions: list = field(default_factory=list)
    equalities: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    determinacy: DeterminacyDiagnostic | None = None
    test_set: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if not all(c.passed for c in self.conditions) or not all(e.passed for e in self.equalities):
            return FAIL
        if not all(d.passed for d in self.diagnostics):
            return INCONCLUSIVE
        if self.determinacy is not None and not self.determinacy.consistent:
            return INCONCLUSIVE
        return PASS

    @property
    def failures(self) -> list:
        return [r for r in self.conditions + self.equalities if not r.passed]

    def condition(self, label: str) -> ConditionRecord:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "conditions": [asdict(c) for c in self.conditions],
            "equalities": [asdict(e) for e in self.equalities],
            "diagnostics": [asdict(d) for d in self.diagnostics],
            "determinacy": None if self.determinacy is None else asdict(self.determinacy),
            "test_set": list(self.test_set),
        }


def _psd_record(report: CheckReport, label: str, M, tol: float, scope: str = "verified") -> None:
    M = np.asarray(M, dtype=float)
    lam, ok = psd_verdict(M, tol)
    report.conditions.append(ConditionRecord(
        label, int(M.shape[0]), lam, -tol * _threshold_scale((M + M.T) / 2), ok, scope))


def _equality_record(report: CheckReport, label: str, lhs, rhs, tol_eq: float) -> None:
    lhs, rhs = float(lhs), float(rhs)
    gap = abs(lhs - rhs)
    report.equalities.append(EqualityRecord(label, lhs, rhs, gap, tol_eq, gap <= tol_eq))


# ----------------------------------------------------------------------------
# test sets


@dataclass(frozen=True)
class TestSetConfig:
    """Finite family of capped test functions: subset indicators plus random vectors."""

    __test__ = False  # keep pytest from collecting this class

    subset_cap: int = 8
    n_random: int = 0
    seed: int = 0

    def vectors(self, n_sites: int) -> list[tuple[str, np.ndarray]]:
        out = []
        for size in range(1, min(self.subset_cap, n_sites) + 1):
            for A in combinations(range(n_sites), size):
                v = np.zeros(n_sites)
                v[list(A)] = 1.0
                out.append((_indicator_label(A), v))
        if n_sites > self.subset_cap:
            out.append((_indicator_label(range(n_sites)), np.ones(n_sites)))
        rng = np.random.default_rng(self.seed)
        for i in range(self.n_random):
            out.append((f"random[{i}]", rng.uniform(0.0, 1.0, n_sites)))
        return out

    def describe(self) -> str:
        policy = "indicators" if self.n_random == 0 else f"indicators+random:{self.n_random}"
        return f"{policy} (subset cap {self.subset_cap}, seed {self.seed})"


def _indicator_label(A) -> str:
    return "1_{" + ",".join(str(s) for s in A) + "}"


def _site_vectors(n_sites: int) -> list[tuple[str, np.ndarray]]:
    return [(f"e_{s}", np.eye(n_sites)[s]) for s in range(n_sites)]


def default_degree(D: int, extra: int, cap: int = 3) -> int:
    """Largest r with 2r + extra <= D, capped."""
    r = (D - extra) // 2
    if r < 0:
        raise DegreeError(f"checks need truncation D >= {extra}, got {D}", extra)
    return min(r, cap)


def _resolve(seq, r, extra: int, what: str) -> int:
    if r is None:
        r = default_degree(seq.truncation, extra)
    seq.require(2 * r + extra, what)
    return r


# ----------------------------------------------------------------------------
# moment-sequence checks


def _mass_bound(report: CheckReport, m: MomentSequence, tol: float) -> None:
    m0 = float(m[0].values[0])
    for n in range(1, m.truncation // 2 + 1):
        mass = float(tensor_pairing(SymTensor.tensor_power(np.ones(m.n_sites), 2 * n),
                                    m[2 * n].to_float()))
        bound = m0 + tol * (1 + abs(m0))
        report.diagnostics.append(DiagnosticRecord(
            f"mass bound m^({2 * n})", mass, m0, mass <= bound,
            "total mass of the even moment is at most m^(0)"))


def _weighted_condition(report: CheckReport) -> None:
    report.diagnostics.append(DiagnosticRecord(
        "weighted growth condition", 0.0, 0.0, True,
        "satisfied by construction: total masses are finite on a finite grid"))


def _subprob_core(m: MomentSequence, r: int, tol: float, test_set: TestSetConfig,
                  kind: str, bounding: str) -> CheckReport:
    report = CheckReport(kind)
    mf = m.to_float()
    gb = _GramBuilder(mf, r)
    n = m.n_sites
    _psd_record(report, "hankel", gb.shifted(()), tol)
    for label, e in _site_vectors(n):
        P = ConstraintPoly("Phi_psi", e)
        _psd_record(report, f"Phi_psi[{label}]", gb.localizing(P), tol)
    tests = test_set.vectors(n)
    report.test_set = [label for label, _ in tests]
    for label, phi in tests:
        P = ConstraintPoly(bounding, phi)
        name = "Upsilon" if bounding == "Upsilon_phi" else "Theta"
        _psd_record(report, f"{name}[{label}]", gb.localizing(P), tol, ON_TEST_SET)
    _mass_bound(report, m, tol)
    _weighted_condition(report)
    return report


def check_subprob(m: MomentSequence, r: int | None = None, tol: float = 1e-9,
                  test_set: TestSetConfig | None = None) -> CheckReport:
    """Sub-probability realizability: hankel, Phi_psi and Upsilon_phi localizers."""
    r = _resolve(m, r, 2, "sub-probability check")
    return _subprob_core(m, r, tol, test_set or TestSetConfig(), "subprob", "Upsilon_phi")


def check_subprob_alt(m: MomentSequence, r: int | None = None, tol: float = 1e-9,
                      test_set: TestSetConfig | None = None) -> CheckReport:
    """Variant of :func:`check_subprob` with Theta_phi = 1 - <phi, eta> in place of Upsilon."""
    r = _resolve(m, r, 1, "sub-probability check")
    return _subprob_core(m, r, tol, test_set or TestSetConfig(), "subprob-alt", "Theta_phi")


def check_prob(m: MomentSequence, r: int | None = None, tol: float = 1e-9,
               test_set: TestSetConfig | None = None, tol_eq: float = 1e-9) -> CheckReport:
    """Probability realizability: sub-probability conditions plus sum m^(1) = m^(0)."""
    r = _resolve(m, r, 2, "probability check")
    report = _subprob_core(m, r, tol, test_set or TestSetConfig(), "prob", "Upsilon_phi")
    _equality_record(report, "total-mass equality", sum(m[1].values), m[0].values[0], tol_eq)
    return report


def check_multi_config(m: MomentSequence, r: int | None = None, k_max: int = 2,
                       tol: float = 1e-9, test_set: TestSetConfig | None = None,
                       horizon: int | None = None) -> CheckReport:
    """Realizability on multiple configurations: hankel plus Phi_{phi,k}, k <= k_max."""
    r = _resolve(m, r, k_max, "multiple-configuration check")
    test_set = test_set or TestSetConfig()
    report = CheckReport("multi-config")
    gb = _GramBuilder(m.to_float(), r)
    _psd_record(report, "hankel", gb.shifted(()), tol)
    tests = test_set.vectors(m.n_sites)
    report.test_set = [label for label, _ in tests]
    for k in range(1, k_max + 1):
        for label, phi in tests:
            P = ConstraintPoly("Phi_phi_k", phi, k)
            _psd_record(report, f"Phi[{label},k={k}]", gb.localizing(P), tol, ON_TEST_SET)
    report.determinacy = stieltjes_diagnostic(m, horizon)
    return report


def check_simple_config(m: MomentSequence, r: int | None = None, tol: float = 1e-9,
                        test_set: TestSetConfig | None = None, tol_eq: float = 1e-9,
                        horizon: int | None = None, sites: Sequence | None = None) -> CheckReport:
    """Realizability on simple configurations: multi-config with k <= 2 plus the diagonal."""
    r = _resolve(m, r, 2, "simple-configuration check")
    report = check_multi_config(m, r, 2, tol, test_set, horizon)
    report.kind = "simple-config"
    names = list(sites) if sites is not None else list(range(m.n_sites))
    for s in range(m.n_sites):
        _equality_record(report, f"diagonal site {names[s]}", m[2].entry((s, s)), m[1].entry((s,)),
                         tol_eq)
    return report


# ----------------------------------------------------------------------------
# correlation-sequence checks


def _corr_determinacy(rho: CorrelationSequence, horizon: int | None) -> DeterminacyDiagnostic:
    diag = stieltjes_diagnostic(rho, horizon)
    C = almost_increasing(rho)
    consistent = diag.consistent
    note = diag.note
    if C is None:
        if _finite_occupancy(rho):
            note = (note + "; " if note else "") + "correlations vanish above a fixed order"
        else:
            consistent = False
            note = (note + "; " if note else "") + "not almost-increasing"
    return DeterminacyDiagnostic(diag.horizon, diag.xi, diag.carleman, diag.growth,
                                 diag.fitted_exponent, C, consistent, note)


def check_corr_multi(rho: CorrelationSequence, r: int | None = None, n_max: int = 2,
                     tol: float = 1e-9, test_set: TestSetConfig | None = None,
                     horizon: int | None = None) -> CheckReport:
    """Factorial-basis PSD of rho and of its shifts by Phi_{phi,n}, n <= n_max."""
    r = _resolve(rho, r, n_max, "correlation check")
    test_set = test_set or TestSetConfig()
    report = CheckReport("corr-multi")
    report.test_set = [label for label, _ in test_set.vectors(rho.n_sites)]
    _corr_core(report, rho, r, range(n_max + 1), tol, test_set)
    report.determinacy = _corr_determinacy(rho, horizon)
    return report


def _corr_core(report, rho, r, shifts, tol, test_set) -> None:
    for n in shifts:
        if n == 0:
            _psd_record(report, "factorial gram", factorial_gram(rho, r), tol)
            continue
        for label, phi in test_set.vectors(rho.n_sites):
            shifted = shift_corr(rho, phi, n)
            _psd_record(report, f"shift[{label},n={n}]", factorial_gram(shifted, r), tol,
                        ON_TEST_SET)


def check_corr_simple(rho: CorrelationSequence, r: int | None = None, tol: float = 1e-9,
                      test_set: TestSetConfig | None = None, tol_eq: float = 1e-9,
                      horizon: int | None = None, sites: Sequence | None = None) -> CheckReport:
    """Shifts n in {0, 1, 2} plus the vanishing of rho^(2) on the diagonal."""
    r = _resolve(rho, r, 2, "simple correlation check")
    test_set = test_set or TestSetConfig()
    report = CheckReport("corr-simple")
    report.test_set = [label for label, _ in test_set.vectors(rho.n_sites)]
    _corr_core(report, rho, r, (0, 1, 2), tol, test_set)
    names = list(sites) if sites is not None else list(range(rho.n_sites))
    for s in range(rho.n_sites):
        _equality_record(report, f"diagonal site {names[s]}", rho[2].entry((s, s)), 0, tol_eq)
    report.determinacy = _corr_determinacy(rho, horizon)
    return report


def thm_suff_matrix(rho: CorrelationSequence, sigma, x: Sequence[int], r: int) -> np.ndarray:
    """Bilinear form ``B_x`` built from the densities of rho with respect to sigma."""
    sigma = np.asarray(sigma, dtype=float)
    m = rho.n_sites
    x = tuple(sorted(int(s) for s in x))
    n = len(x)
    rho.require(2 * r + n, "density form")
    slices = []
    for i in range(2 * r + 1):
        full = rho[i + n].to_float()
        density = full.values / power_products(sigma, m, i + n)
        slices.append(density[merge_rank(m, i, x)] * power_products(sigma, m, i))
    return _gram_from_components(slices, m, r)


def check_thm_suff(rho: CorrelationSequence, grid: GridSpec, n_max: int = 2,
                   r: int | None = None, tol: float = 1e-9,
                   horizon: int | None = None) -> CheckReport:
    """Density-form sufficient condition: ``B_x`` PSD for every x-tuple of size <= n_max."""
    sigma = np.asarray(grid.sigma, dtype=float)
    if len(sigma) != rho.n_sites:
        raise ValueError("grid and sequence have different numbers of sites")
    if np.any(sigma <= 0):
        bad = [grid.sites[s] for s in np.nonzero(sigma <= 0)[0]]
        raise ValueError(f"sigma must be positive at every site; zero at {bad}")
    r = _resolve(rho, r, n_max, "density-form check")
    report = CheckReport("thm-suff")
    # B_x is symmetric in x, so sorted tuples cover every ordered tuple
    for n in range(n_max + 1):
        for x in canonical_indices(rho.n_sites, n):
            label = "B[" + ",".join(str(grid.sites[s]) for s in x) + "]"
            _psd_record(report, label, thm_suff_matrix(rho, sigma, x, r), tol)
    report.determinacy = _corr_determinacy(rho, horizon)
    return report


# ----------------------------------------------------------------------------
# determinacy diagnostics

GROWTH_EXPONENT_LIMIT = 3.0


def _sup_norms(seq, orders) -> list[float]:
    return [seq[n].max_abs() for n in orders]


def stieltjes_diagnostic(seq, horizon: int | None = None) -> DeterminacyDiagnostic:
    """Growth of ``xi_n = sqrt(max |seq^(2n)|)`` against ``B (C n^2 ln n)^n``.

    The flag fits ``log xi_n ~ a + b n + g n log n`` over ``2 <= n <= horizon``
    and reports consistency when ``g <= 3`` (the reference growth has g = 2,
    ``((2n)!)^2`` has g = 4).  Vanishing xi_n count as determining.
    """
    if horizon is None:
        horizon = seq.truncation // 2
    if 2 * horizon > seq.truncation:
        raise DegreeError(f"horizon {horizon} needs truncation D >= {2 * horizon}", 2 * horizon)
    xi = [math.sqrt(v) for v in _sup_norms(seq, [2 * n for n in range(1, horizon + 1)])]
    carleman, total = [], 0.0
    for n, x in enumerate(xi, start=1):
        total += math.inf if x == 0 else x ** (-1.0 / (2 * n))
        carleman.append(total)
    growth = [None if x == 0 or n < 2 else math.log(x) / (n * math.log(n))
              for n, x in enumerate(xi, start=1)]
    pts = [(n, math.log(x)) for n, x in enumerate(xi, start=1) if n >= 2 and x > 0]
    fitted = None
    consistent = True
    note = ""
    if len(pts) >= 3:
        A = np.array([[1.0, n, n * math.log(n)] for n, _ in pts])
        y = np.array([v for _, v in pts])
        fitted = float(np.linalg.lstsq(A, y, rcond=None)[0][2])
        consistent = fitted <= GROWTH_EXPONENT_LIMIT
    else:
        note = "too few nonzero orders to fit a growth exponent"
    return DeterminacyDiagnostic(horizon, xi, carleman, growth, fitted, None, consistent, note)


def _rho_norms(rho, horizon: int) -> list[float]:
    return _sup_norms(rho, range(1, horizon + 1))


def almost_increasing(rho, horizon: int | None = None) -> float | None:
    """Least ``C >= 1`` with ``rho_n/n! <= C^s rho_s/s!`` for ``1 <= n <= s <= horizon``."""
    if horizon is None:
        horizon = rho.truncation
    rho.require(horizon, "almost-increasing scan")
    norms = _rho_norms(rho, horizon)
    scaled = [v / math.factorial(n) for n, v in enumerate(norms, start=1)]
    C = 1.0
    for s in range(1, horizon + 1):
        top = max(scaled[:s])
        if top == 0:
            continue
        if scaled[s - 1] == 0:
            return None
        C = max(C, (top / scaled[s - 1]) ** (1.0 / s))
    return C


def _finite_occupancy(rho) -> bool:
    norms = _rho_norms(rho, rho.truncation)
    nonzero = [n for n, v in enumerate(norms, start=1) if v > 0]
    return not nonzero or all(norms[n - 1] > 0 for n in range(1, max(nonzero) + 1))


__all__ = [
    "MonomialBasis", "ConstraintPoly", "constraint", "CheckReport", "ConditionRecord",
    "EqualityRecord", "DiagnosticRecord", "DeterminacyDiagnostic", "TestSetConfig",
    "hankel_matrix", "localizing_matrix", "factorial_gram", "factorial_to_monomial",
    "psd_verdict", "check_subprob", "check_subprob_alt", "check_prob", "check_multi_config",
    "check_simple_config", "check_corr_multi", "check_corr_simple", "check_thm_suff",
    "thm_suff_matrix", "stieltjes_diagnostic", "almost_increasing", "default_degree",
    "PASS", "FAIL", "INCONCLUSIVE",
]
