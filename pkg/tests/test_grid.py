import math
from fractions import Fraction
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import kmoment.grid as grid
from kmoment.grid import (DiscreteMeasure, GridSizeError, GridSpec, PointConfiguration,
                          SiteFunction, SymTensor, canonical_count, canonical_indices,
                          multiplicity, rank, sym_outer, tensor_pairing, tensor_power_pairing)


def naive_power_pairing(f, eta):
    total = 0
    for idx in product(range(f.n_sites), repeat=f.order):
        total += f.entry(idx) * math.prod(eta[list(idx)], start=1)
    return total


def test_multiplicity_examples():
    assert multiplicity((0, 0)) == 1
    assert multiplicity((0, 1)) == 2
    assert multiplicity((0, 0, 1)) == 3
    assert multiplicity(()) == 1
    with pytest.raises(ValueError):
        multiplicity((1, 0))


def test_multiplicity_counts_orderings():
    for alpha in canonical_indices(3, 4):
        alpha = tuple(alpha)
        orderings = sum(1 for t in product(range(3), repeat=4) if tuple(sorted(t)) == alpha)
        assert multiplicity(alpha) == orderings


@pytest.mark.parametrize("m,n", [(1, 0), (1, 5), (2, 3), (3, 4), (5, 3), (4, 6)])
def test_canonical_rank_is_bijection(m, n):
    table = canonical_indices(m, n)
    assert len(table) == canonical_count(m, n) == math.comb(m + n - 1, n)
    assert np.array_equal(rank(table, m), np.arange(len(table)))
    assert np.all(np.diff(table, axis=1) >= 0)
    assert len({tuple(r) for r in table}) == len(table)


def test_tensor_pairing_examples():
    assert tensor_pairing(SymTensor.scalar(2, 2), SymTensor.scalar(3, 2)) == 6
    assert tensor_pairing(SymTensor(2, 1, [1, 2]), SymTensor(2, 1, [3, 4])) == 11
    f = SymTensor.indicator(2, (0, 1))
    t = SymTensor.from_entries(2, 2, {(1, 0): 5})
    assert tensor_pairing(f, t) == 10
    with pytest.raises(ValueError):
        tensor_pairing(SymTensor.scalar(1, 2), SymTensor(2, 1, [1, 1]))


def test_tensor_power_pairing_examples():
    g2 = SymTensor.tensor_power(np.array([1, 1]), 2)
    assert tensor_power_pairing(g2, DiscreteMeasure([2, 3])) == 25
    f = SymTensor(3, 2, np.arange(6.0))
    assert tensor_power_pairing(f, np.zeros(3)) == 0
    assert tensor_power_pairing(SymTensor.scalar(7, 3), np.zeros(3)) == 7


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 3), n=st.integers(0, 4), seed=st.integers(0, 2**31))
def test_tensor_power_pairing_matches_naive_loop(m, n, seed):
    rng = np.random.default_rng(seed)
    f_int = SymTensor(m, n, rng.integers(-5, 6, canonical_count(m, n)))
    eta_int = rng.integers(0, 4, m).astype(object)
    assert tensor_power_pairing(f_int, eta_int) == naive_power_pairing(f_int, eta_int)
    f = SymTensor(m, n, rng.normal(size=canonical_count(m, n)))
    eta = rng.random(m)
    want = naive_power_pairing(f, eta)
    assert tensor_power_pairing(f, eta) == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 4), n=st.integers(0, 4), seed=st.integers(0, 2**31))
def test_tensor_pairing_symmetric(m, n, seed):
    rng = np.random.default_rng(seed)
    f = SymTensor(m, n, rng.integers(-9, 10, canonical_count(m, n)))
    t = SymTensor(m, n, rng.integers(-9, 10, canonical_count(m, n)))
    assert tensor_pairing(f, t) == tensor_pairing(t, f)
    brute = sum(f.entry(i) * t.entry(i) for i in product(range(m), repeat=n))
    assert tensor_pairing(f, t) == brute


def test_sym_outer_examples():
    g = SymTensor(3, 1, [1.0, 2.0, 3.0])
    assert np.allclose(sym_outer(SymTensor.scalar(2.0, 3), g).values, 2 * g.values)
    assert np.allclose(sym_outer(g, g).values, SymTensor.tensor_power(g.values, 2).values)
    f = SymTensor(3, 1, [0.5, -1.0, 4.0])
    out = sym_outer(f, g)
    for s, t in product(range(3), repeat=2):
        want = (f.values[s] * g.values[t] + f.values[t] * g.values[s]) / 2
        assert out.entry((s, t)) == pytest.approx(want)


@settings(max_examples=25, deadline=None)
@given(a=st.integers(0, 3), b=st.integers(0, 3), seed=st.integers(0, 2**31))
def test_sym_outer_pairs_like_unsymmetrized_product(a, b, seed):
    m = 3
    rng = np.random.default_rng(seed)
    f = SymTensor(m, a, rng.normal(size=canonical_count(m, a)))
    g = SymTensor(m, b, rng.normal(size=canonical_count(m, b)))
    t = SymTensor(m, a + b, rng.normal(size=canonical_count(m, a + b)))
    brute = sum(f.entry(i[:a]) * g.entry(i[a:]) * t.entry(i)
                for i in product(range(m), repeat=a + b))
    assert tensor_pairing(sym_outer(f, g), t) == pytest.approx(brute, rel=1e-12, abs=1e-12)
    # permutation-average oracle at one tuple
    idx = tuple(rng.integers(0, m, a + b))
    perms = list(permutations(idx))
    avg = sum(f.entry(p[:a]) * g.entry(p[a:]) for p in perms) / len(perms)
    assert sym_outer(f, g).entry(idx) == pytest.approx(avg, rel=1e-12, abs=1e-12)


def test_sym_outer_exact():
    f = SymTensor(2, 1, [1, 2])
    g = SymTensor(2, 1, [3, 5])
    assert sym_outer(f, g).entry((0, 1)) == Fraction(11, 2)


def test_entry_is_order_independent():
    t = SymTensor.from_entries(3, 3, {(2, 0, 1): 7})
    for p in permutations((0, 1, 2)):
        assert t.entry(p) == 7
    assert t.entries() == {(0, 1, 2): 7}


def test_contract_matches_definition():
    rng = np.random.default_rng(3)
    t = SymTensor(3, 3, rng.normal(size=10))
    phi = rng.random(3)
    c = t.contract(phi)
    for y in product(range(3), repeat=2):
        want = sum(phi[s] * t.entry(y + (s,)) for s in range(3))
        assert c.entry(y) == pytest.approx(want)


def test_entry_cap_guardrail(monkeypatch):
    monkeypatch.setattr(grid, "ENTRY_CAP", 100)
    with pytest.raises(GridSizeError):
        SymTensor.zeros(10, 3)
    assert len(SymTensor.zeros(5, 2)) == 15


def test_domain_type_validation():
    with pytest.raises(ValueError):
        GridSpec(["a", "a"])
    with pytest.raises(ValueError):
        GridSpec(["a", "b"], sigma=[1.0, -1.0])
    g = GridSpec(["a", "b"], coords=[[0.0, 1.0], [1.0, 0.0]], sigma=[1.0, 2.0])
    assert g.n_sites == 2 and g.dim == 2
    with pytest.raises(ValueError):
        DiscreteMeasure([1.0, -0.5])
    with pytest.raises(ValueError):
        PointConfiguration([1, -1])
    with pytest.raises(ValueError):
        PointConfiguration([0.5, 1])
    assert PointConfiguration([0, 1, 1]).is_simple
    assert not PointConfiguration([2, 0]).is_simple
    assert SiteFunction([0.0, 1.0]).is_capped
    assert not SiteFunction([0.0, 1.5]).is_capped
    assert not SiteFunction([-1.0, 0.5]).is_nonneg
    with pytest.raises(ValueError):
        SiteFunction([np.inf])


def test_tensor_immutable():
    t = SymTensor(2, 1, [1.0, 2.0])
    with pytest.raises(ValueError):
        t.values[0] = 3.0
