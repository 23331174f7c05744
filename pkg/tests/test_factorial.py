import math
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmoment.factorial import (enumerate_compositions, enumerate_set_partitions,
                               factorial_pairing, factorial_pairing_config,
                               factorial_pairing_many, factorial_poly_expand, falling_factorial,
                               power_poly_expand, t_restrict)
from kmoment.grid import (PointConfiguration, SymTensor, canonical_count, sym_outer,
                          tensor_power_pairing)


def bell_numbers(n_max):
    # Bell triangle
    row, out = [1], [1]
    for _ in range(n_max):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
        out.append(row[0])
    return out


def test_compositions():
    assert enumerate_compositions(1) == [(1,)]
    assert sorted(enumerate_compositions(3)) == sorted([(3,), (1, 2), (2, 1), (1, 1, 1)])
    six = enumerate_compositions(6)
    assert len(six) == 32 and all(sum(c) == 6 for c in six) and len(set(six)) == 32
    with pytest.raises(ValueError):
        enumerate_compositions(0)
    with pytest.raises(ValueError):
        enumerate_compositions(13)


def test_set_partitions_bell_counts():
    bell = bell_numbers(10)
    assert len(enumerate_set_partitions(2)) == 2
    assert len(enumerate_set_partitions(3)) == 5
    assert len(enumerate_set_partitions(6)) == 203
    for n in range(1, 9):
        parts = enumerate_set_partitions(n)
        assert len(parts) == bell[n]
        for p in parts:
            flat = sorted(i for b in p for i in b)
            assert flat == list(range(n))
        assert len({p for p in parts}) == len(parts)
    with pytest.raises(ValueError):
        enumerate_set_partitions(13)


def test_t_restrict_examples():
    rng = np.random.default_rng(0)
    g = rng.random(3)
    f = SymTensor.tensor_power(g, 4)
    out = t_restrict(f, (1, 3))
    want = sym_outer(SymTensor(3, 1, g), SymTensor(3, 1, g ** 3))
    assert np.allclose(out.values, want.values)
    h = SymTensor(3, 3, rng.normal(size=10))
    assert np.allclose(t_restrict(h, (1, 1, 1)).values, h.values)
    h2 = SymTensor(3, 2, rng.normal(size=6))
    d = t_restrict(h2, (2,))
    assert all(d.entry((s,)) == h2.entry((s, s)) for s in range(3))
    with pytest.raises(ValueError):
        t_restrict(h2, (1, 2))


def test_factorial_pairing_examples():
    rng = np.random.default_rng(1)
    g, eta = rng.random(4), rng.random(4) * 3
    f = SymTensor.tensor_power(g, 2)
    assert factorial_pairing(f, eta) == pytest.approx((g @ eta) ** 2 - (g ** 2) @ eta)
    ind = np.array([1, 1, 0])
    eta = PointConfiguration([2, 1, 5])
    assert factorial_pairing(SymTensor.tensor_power(ind, 2), eta) == 6
    assert factorial_pairing(SymTensor.tensor_power(ind, 4), eta) == 0
    assert factorial_pairing(SymTensor.scalar(3, 3), eta) == 3
    h = SymTensor(3, 1, [1.0, 2.0, 3.0])
    assert factorial_pairing(h, [1.0, 1.0, 2.0]) == tensor_power_pairing(h, [1.0, 1.0, 2.0])


def test_factorial_pairing_config_examples():
    g = np.array([2, 3])
    f = SymTensor.tensor_power(g, 2)
    assert factorial_pairing_config(f, PointConfiguration([1, 1])) == 2 * 2 * 3
    assert factorial_pairing_config(SymTensor.tensor_power(np.ones(1, dtype=int), 2),
                                    PointConfiguration([2])) == 2
    f6 = SymTensor(2, 6, np.ones(7, dtype=int))
    assert factorial_pairing_config(f6, PointConfiguration([3, 2])) == 0


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 3), n=st.integers(0, 5), counts=st.lists(st.integers(0, 3), min_size=3,
                                                              max_size=3),
       seed=st.integers(0, 2**31))
def test_composition_formula_matches_distinct_index_sum(m, n, counts, seed):
    rng = np.random.default_rng(seed)
    f = SymTensor(m, n, rng.integers(-9, 10, canonical_count(m, n)))
    gamma = PointConfiguration(counts[:m])
    assert factorial_pairing(f, gamma) == factorial_pairing_config(f, gamma)
    assert factorial_pairing_many(f, np.array([counts[:m]]))[0] == factorial_pairing_config(f, gamma)


def test_falling_factorial_law_exact():
    m = 3
    for size in range(1, m + 1):
        for A in combinations(range(m), size):
            ind = np.zeros(m, dtype=int)
            ind[list(A)] = 1
            for counts in product(range(4), repeat=m):
                eta = PointConfiguration(counts)
                total = sum(counts[s] for s in A)
                for n in range(1, 7):
                    f = SymTensor.tensor_power(ind, n)
                    assert factorial_pairing(f, eta) == falling_factorial(total, n)


def test_factorial_poly_expand_examples():
    f = SymTensor(3, 1, [1.0, 2.0, 3.0])
    [(k, c)] = factorial_poly_expand(f)
    assert k == 1 and c.equals(f)
    g = np.array([1, 2, 3])
    terms = dict(factorial_poly_expand(SymTensor.tensor_power(g, 2)))
    assert terms[2].equals(SymTensor.tensor_power(g, 2))
    assert terms[1].equals(SymTensor(3, 1, -(g ** 2)))


@settings(max_examples=20, deadline=None)
@given(m=st.integers(1, 4), n=st.integers(1, 5), seed=st.integers(0, 2**31))
def test_factorial_poly_expand_evaluates_like_pairing(m, n, seed):
    rng = np.random.default_rng(seed)
    f = SymTensor(m, n, rng.normal(size=canonical_count(m, n)))
    expansion = factorial_poly_expand(f)
    for _ in range(20):
        eta = rng.uniform(0, 2, m)
        got = sum(tensor_power_pairing(c, eta) for _, c in expansion)
        assert got == pytest.approx(factorial_pairing(f, eta), rel=1e-12, abs=1e-12)


def test_expansions_are_mutually_inverse_exact():
    rng = np.random.default_rng(5)
    for n in range(1, 6):
        f = SymTensor(3, n, rng.integers(-5, 6, canonical_count(3, n)))
        for counts in product(range(3), repeat=3):
            eta = np.array(counts, dtype=object)
            via = sum(factorial_pairing(d, eta) for _, d in power_poly_expand(f))
            assert via == tensor_power_pairing(f, eta)


def test_factorial_pairing_exact_rational():
    f = SymTensor(2, 3, np.array([Fraction(1, 3), Fraction(-2, 5), 1, Fraction(7, 2)], dtype=object))
    for counts in product(range(4), repeat=2):
        gamma = PointConfiguration(counts)
        assert factorial_pairing(f, gamma) == factorial_pairing_config(f, gamma)
        assert isinstance(factorial_pairing(f, gamma), (int, Fraction))
