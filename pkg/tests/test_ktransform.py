import math
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmoment.conversion import CorrelationSequence, DegreeError, riesz_corr
from kmoment.grid import PointConfiguration, SymTensor, canonical_count, canonical_indices, sym_outer
from kmoment.identities import random_coeffs, random_tensor
from kmoment.ktransform import (CoeffSequence, factorial_basis_element, h_tilde, k_transform,
                                k_transform_many, phi_sequence, rewriting_lhs, rewriting_rhs,
                                shift_corr, shift_corr_bruteforce, star)
from kmoment.oracles import poisson_correlations


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def test_k_transform_constant():
    G = CoeffSequence({0: SymTensor.scalar(2.5, 3)})
    for eta in ([0, 0, 0], [1.0, 2.0, 0.5]):
        assert k_transform(G, eta) == 2.5


def test_k_transform_exponential_form():
    rng = np.random.default_rng(0)
    for _ in range(10):
        # the tail is a binomial series in g, so keep |g| <= 0.25 with |g|*sum(eta) = 0.5
        g = rng.uniform(-0.25, 0.25, 4)
        eta = rng.uniform(0, 1, 4)
        eta *= 0.5 / (np.abs(g).max() * eta.sum())
        got = k_transform(CoeffSequence.exponential(g, 12), eta)
        assert abs(got - math.exp(np.log1p(g) @ eta)) <= 1e-8


def test_k_transform_on_simple_configuration_is_subset_sum():
    rng = np.random.default_rng(1)
    m = 6
    G = random_coeffs(rng, m, 4)
    gamma = [1, 0, 1, 1, 0, 1]
    sites = [s for s in range(m) if gamma[s]]
    want = 0.0
    for size in range(len(sites) + 1):
        if size > 4:
            break
        for xi in combinations(sites, size):
            want += G.get(size).entry(xi)
    assert close(k_transform(G, PointConfiguration(gamma)), want)


def test_star_unit_is_identity():
    rng = np.random.default_rng(2)
    G = random_coeffs(rng, 3, 3)
    out = star(G, CoeffSequence.unit(3))
    for j, g in G.components.items():
        assert np.allclose(out.get(j).values, g.values)


def test_star_first_order_example():
    m = 3
    g0, h0 = 2.0, -1.5
    g, h = np.array([1.0, 2.0, 3.0]), np.array([0.5, -1.0, 2.0])
    G = CoeffSequence({0: SymTensor.scalar(g0, m), 1: SymTensor(m, 1, g)})
    H = CoeffSequence({0: SymTensor.scalar(h0, m), 1: SymTensor(m, 1, h)})
    out = star(G, H)
    assert out.get(0).values[0] == g0 * h0
    assert np.allclose(out.get(1).values, g0 * h + g * h0 + g * h)


def test_star_of_exponentials():
    rng = np.random.default_rng(3)
    g, h = rng.normal(size=3), rng.normal(size=3)
    out = star(CoeffSequence.exponential(g, 3), CoeffSequence.exponential(h, 3))
    for j in range(4):
        want = SymTensor.tensor_power(g + h + g * h, j)
        assert np.allclose(out.get(j).values, want.values)


def test_star_truncation_flag():
    rng = np.random.default_rng(4)
    G, H = random_coeffs(rng, 2, 2), random_coeffs(rng, 2, 2)
    assert not star(G, H).truncated
    cut = star(G, H, degree=3)
    assert cut.truncated and cut.degree == 3 and max(cut.components) == 3
    zero_top = CoeffSequence({0: SymTensor.scalar(1.0, 2), 2: SymTensor.zeros(2, 2)})
    assert not star(zero_top, G, degree=2).truncated


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(1, 4))
def test_star_commutative_and_associative(seed, m):
    rng = np.random.default_rng(seed)
    A, B, C = (random_coeffs(rng, m, int(rng.integers(0, 3))) for _ in range(3))
    ab, ba = star(A, B), star(B, A)
    for j in ab.components:
        assert np.allclose(ab.get(j).values, ba.get(j).values, rtol=1e-12, atol=1e-12)
    left, right = star(star(A, B), C), star(A, star(B, C))
    for j in left.components:
        assert np.allclose(left.get(j).values, right.get(j).values, rtol=1e-12, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(1, 5))
def test_homomorphism(seed, m):
    rng = np.random.default_rng(seed)
    G = random_coeffs(rng, m, int(rng.integers(0, 4)))
    H = random_coeffs(rng, m, int(rng.integers(0, 4)))
    etas = rng.uniform(0, 1.5, (50, m))
    lhs = k_transform_many(star(G, H), etas)
    rhs = k_transform_many(G, etas) * k_transform_many(H, etas)
    assert np.all(np.abs(lhs - rhs) <= 1e-10 * (1 + np.abs(lhs)))
    # scalar and batch paths agree
    assert close(k_transform(G, etas[0]), k_transform_many(G, etas[:1])[0])


def test_h_tilde_examples():
    rng = np.random.default_rng(5)
    H = random_coeffs(rng, 3, 2)
    same = h_tilde(H, ())
    for j, h in H.components.items():
        assert same.get(j).equals(h)
    h = np.array([1.5, -2.0, 0.25])
    single = CoeffSequence({1: SymTensor(3, 1, h)})
    out = h_tilde(single, (1,))
    assert out.get(0).values[0] == h[1]
    assert np.allclose(out.get(1).values, h)


def test_h_tilde_definition():
    rng = np.random.default_rng(6)
    H = random_coeffs(rng, 3, 3)
    x = (2, 0, 2)
    out = h_tilde(H, x)
    for s in range(4):
        for y in product(range(3), repeat=s):
            want = 0.0
            for size in range(4):
                for J in combinations(range(3), size):
                    comp = H.get(s + size)
                    if comp is not None:
                        want += comp.entry(y + tuple(x[j] for j in J))
            assert close(out.get(s).entry(y), want)


def test_shift_small_cases():
    rng = np.random.default_rng(7)
    m = 3
    rho = CorrelationSequence([random_tensor(rng, m, n, "uniform") for n in range(4)])
    phi = rng.random(m)
    sh = shift_corr(rho, phi, 1)
    assert sh.truncation == 2
    assert close(sh[0].values[0], phi @ rho[1].values)
    h = rng.normal(size=m)
    lhs = (SymTensor(m, 1, h).values * 1) @ sh[1].values
    hphi = sym_outer(SymTensor(m, 1, h), SymTensor(m, 1, phi))
    from kmoment.grid import tensor_pairing
    want = tensor_pairing(hphi, rho[2]) + (h * phi) @ rho[1].values
    assert close(lhs, want)


def test_shift_matches_bruteforce():
    rng = np.random.default_rng(8)
    for m in (2, 3):
        D = 5
        rho = CorrelationSequence([random_tensor(rng, m, n, "uniform") for n in range(D + 1)])
        phi = rng.random(m)
        for n in range(1, D + 1):
            sh = shift_corr(rho, phi, n)
            P = phi_sequence(phi, n)
            for k in range(D - n + 1):
                for alpha in canonical_indices(m, k):
                    e = factorial_basis_element(m, alpha)
                    assert close(riesz_corr(sh, e), shift_corr_bruteforce(rho, P, e))


def test_shift_bruteforce_examples():
    rho = poisson_correlations(np.array([0.5, 1.5]), 4)
    unit = CoeffSequence.unit(2)
    assert shift_corr_bruteforce(rho, unit, unit) == 1
    Q = random_coeffs(np.random.default_rng(0), 2, 2)
    assert close(shift_corr_bruteforce(rho, unit, Q), riesz_corr(rho, Q))
    with pytest.raises(DegreeError):
        shift_corr_bruteforce(rho, Q, random_coeffs(np.random.default_rng(1), 2, 3))


def test_shift_errors():
    rho = poisson_correlations(np.array([0.5, 1.5]), 2)
    with pytest.raises(ValueError):
        shift_corr(rho, [-1.0, 0.5], 1)
    with pytest.raises(ValueError):
        shift_corr(rho, [1.0, 0.5], 0)
    with pytest.raises(DegreeError):
        shift_corr(rho, [1.0, 0.5], 3)


def test_phi_embedding():
    rng = np.random.default_rng(9)
    phi = rng.random(3)
    for n in range(1, 4):
        for _ in range(5):
            eta = rng.uniform(0, 3, 3)
            want = k_transform(CoeffSequence({n: SymTensor.tensor_power(phi, n)}), eta) * math.factorial(n)
            assert close(k_transform(phi_sequence(phi, n), eta), want)


def test_factorial_basis_element_gives_falling_factorials():
    for alpha in [(0,), (0, 0), (0, 1, 1), (1, 1, 1), (0, 1, 2)]:
        e = factorial_basis_element(3, alpha)
        for counts in product(range(4), repeat=3):
            want = 1
            for s in range(3):
                for j in range(alpha.count(s)):
                    want *= counts[s] - j
            assert k_transform(e, PointConfiguration(counts)) == want


def test_rewriting_identity():
    rng = np.random.default_rng(10)
    m = 2
    H = random_coeffs(rng, m, 3)
    phi = rng.random(m)
    HH = star(H, H)
    for n in range(4):
        for x in product(range(m), repeat=n):
            for i in range(4):
                for y in canonical_indices(m, i):
                    y = tuple(int(v) for v in y)
                    assert close(rewriting_lhs(HH, phi, y, x), rewriting_rhs(H, phi, y, x))
