import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracefn_lab.arith import (
    RationalFunctionModQ,
    factorize,
    is_prime,
    legendre,
    make_composite_modulus,
    make_prime_modulus,
    sieve_tables,
    vector_modpow,
)
from tracefn_lab.errors import CapacityError, InvalidModulusError


def brute_divisor_tuples(n: int, k: int) -> int:
    """Ordered k-tuples with product n, by direct enumeration."""
    if k == 1:
        return 1
    return sum(brute_divisor_tuples(n // d, k - 1) for d in range(1, n + 1)
               if n % d == 0)


def brute_mobius(n: int) -> int:
    fact = factorize(n) if n > 1 else []
    if any(e > 1 for _, e in fact):
        return 0
    return (-1) ** len(fact)


class TestSieve:
    def test_small_limit(self):
        t = sieve_tables(10)
        assert list(t.primes) == [2, 3, 5, 7]
        assert t.mu[6] == 1
        assert t.vmangoldt[8] == pytest.approx(math.log(2))
        assert t.d3[4] == 6

    def test_smallest(self):
        t = sieve_tables(2)
        assert list(t.primes) == [2]
        assert t.mu[1] == 1 and t.mu[2] == -1

    def test_divisor_functions_against_enumeration(self):
        t = sieve_tables(30)
        assert t.d2[12] == 6
        assert t.d3[12] == 18
        for n in (1, 4, 12, 28, 30):
            assert t.d2[n] == brute_divisor_tuples(n, 2)
            assert t.d3[n] == brute_divisor_tuples(n, 3)

    def test_mobius_against_enumeration(self):
        t = sieve_tables(200)
        for n in range(1, 201):
            assert t.mu[n] == brute_mobius(n)

    def test_mobius_convolution_identity(self, rng):
        t = sieve_tables(5000)
        for n in rng.integers(1, 5001, size=40):
            n = int(n)
            s = sum(int(t.mu[d]) for d in range(1, n + 1) if n % d == 0)
            assert s == (1 if n == 1 else 0)

    def test_vmangoldt_convolution_is_log(self, rng):
        t = sieve_tables(5000)
        for n in rng.integers(2, 5001, size=40):
            n = int(n)
            s = sum(float(t.vmangoldt[d]) for d in range(1, n + 1) if n % d == 0)
            assert s == pytest.approx(math.log(n), abs=1e-9)

    def test_d3_is_d2_convolved(self):
        t = sieve_tables(300)
        for n in range(1, 301):
            s = sum(int(t.d2[n // d]) for d in range(1, n + 1) if n % d == 0)
            assert t.d3[n] == s

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            sieve_tables(1)
        with pytest.raises(CapacityError):
            sieve_tables(10**8 + 1)


class TestPrimeModulus:
    def test_q7(self, q7):
        assert q7.g == 3
        assert q7.dlog[2] == 2  # 3^2 = 2 mod 7

    def test_q3(self):
        m = make_prime_modulus(3)
        assert m.g == 2
        assert m.dlog[1] == 0 and m.dlog[2] == 1

    def test_q101_root_order(self):
        m = make_prime_modulus(101)
        for r in (2, 5):
            assert pow(m.g, 100 // r, 101) != 1

    def test_composite_rejected(self):
        with pytest.raises(InvalidModulusError):
            make_prime_modulus(91)
        with pytest.raises(InvalidModulusError):
            make_prime_modulus(4)

    @pytest.mark.parametrize("q", [3, 5, 7, 31, 101, 257, 9973])
    def test_dlog_roundtrip_exhaustive(self, q):
        m = make_prime_modulus(q)
        x = np.arange(1, q)
        assert np.array_equal(m.pow_table[m.dlog[x]], x)
        assert sorted(m.dlog[1:]) == list(range(q - 1))

    def test_dlog_roundtrip_every_prime_to_1e4(self):
        for q in sieve_tables(10**4).primes[1:]:
            m = make_prime_modulus(int(q))
            x = np.arange(1, q)
            assert np.array_equal(m.pow_table[m.dlog[x]], x)
            assert np.array_equal(np.sort(m.dlog[1:]), np.arange(q - 1))

    def test_e_q_table(self, q101):
        j = np.arange(101)
        expected = np.exp(2j * np.pi * j / 101)
        assert np.abs(q101.e_q_table - expected).max() < 1e-15 * 101

    def test_inverse_table(self, q101):
        x = np.arange(1, 101)
        assert np.all(x * q101.inverse_table[x] % 101 == 1)


class TestLegendre:
    def test_examples(self, q7):
        assert legendre(2, q7) == 1
        assert legendre(0, q7) == 0
        assert legendre(3, q7) == -1

    def test_euler_criterion_every_prime_to_500(self):
        for q in sieve_tables(500).primes[1:]:
            q = int(q)
            m = make_prime_modulus(q)
            a = np.arange(1, q)
            euler = vector_modpow(a, (q - 1) // 2, q)
            expected = np.where(euler == 1, 1, -1)
            assert np.array_equal(m.legendre_table[a], expected)

    def test_multiplicativity_every_prime_to_500(self):
        for q in sieve_tables(500).primes[1:]:
            q = int(q)
            m = make_prime_modulus(q)
            leg = m.legendre_table
            a = np.arange(1, q)
            prod_table = leg[np.outer(a, a) % q]
            assert np.array_equal(prod_table, np.outer(leg[a], leg[a]))


class TestCompositeModulus:
    def test_c15(self):
        cm = make_composite_modulus(15)
        assert cm.factors == (3, 5)
        assert cm.cofactor_inverses[3] == 2  # 5^(-1) mod 3
        assert (15 // 5) * cm.cofactor_inverses[5] % 5 == 1

    def test_prime_case(self):
        cm = make_composite_modulus(7)
        assert cm.factors == (7,)
        assert cm.cofactor_inverses[7] == 1

    def test_c105(self):
        assert make_composite_modulus(105).factors == (3, 5, 7)

    def test_rejects_square_and_even(self):
        with pytest.raises(InvalidModulusError):
            make_composite_modulus(45)
        with pytest.raises(InvalidModulusError):
            make_composite_modulus(10)

    def test_units_and_carmichael(self):
        cm = make_composite_modulus(15)
        units = cm.units()
        assert len(units) == 8
        assert np.all(vector_modpow(units, cm.carmichael, 15) == 1)


class TestVectorModpow:
    @given(st.integers(min_value=3, max_value=10**6), st.integers(0, 50))
    @settings(max_examples=60, deadline=None)
    def test_matches_python_pow(self, m, e):
        base = np.arange(1, min(m, 200), dtype=np.int64)
        got = vector_modpow(base, e, m)
        assert all(int(g) == pow(int(b), e, m) for b, g in zip(base, got))


class TestRationalFunction:
    def test_gcd_reduction(self):
        # (x^2 - 1)/(x - 1) reduces to x + 1
        f = RationalFunctionModQ((6, 0, 1), (6, 1), q=7)  # -1 = 6 mod 7
        assert f.denominator == (1,)
        assert f.numerator == (1, 1)

    def test_pole_reporting(self, q5):
        f = RationalFunctionModQ((1,), (0, 1), q=5)  # 1/x
        vals, poles = f.evaluate_all(q5)
        assert poles[0] and not poles[1:].any()
        assert vals[2] == 3  # inverse of 2 mod 5

    def test_zero_denominator_rejected(self):
        with pytest.raises(Exception):
            RationalFunctionModQ((1,), (0,), q=5)

    def test_pole_profile(self):
        # 1/x: one simple pole
        f = RationalFunctionModQ((1,), (0, 1), q=7)
        assert f.pole_profile() == (1, 1)
        # x^3/x has a pole at infinity of order 2 after reduction to x^2
        g = RationalFunctionModQ((0, 0, 1), q=7)
        assert g.pole_profile() == (1, 2)

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=4),
           st.lists(st.integers(0, 6), min_size=1, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_reduction_removes_shared_roots(self, num, den):
        if not any(den):
            return
        f = RationalFunctionModQ(num, den, q=7)

        def eval_poly(coeffs, x):
            return sum(c * pow(x, i, 7) for i, c in enumerate(coeffs)) % 7

        if any(f.numerator):
            for x in range(7):
                assert not (eval_poly(f.numerator, x) == 0
                            and eval_poly(f.denominator, x) == 0)

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=4),
           st.lists(st.integers(0, 6), min_size=1, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_values_survive_reduction(self, num, den):
        if not any(den):
            return
        f = RationalFunctionModQ(num, den, q=7)
        vals, poles = f.evaluate_all(make_prime_modulus(7))

        def eval_poly(coeffs, x):
            return sum(c * pow(x, i, 7) for i, c in enumerate(coeffs)) % 7

        for x in range(7):
            d = eval_poly(den, x)
            if d != 0:
                expected = eval_poly(num, x) * pow(d, -1, 7) % 7
                assert not poles[x] and vals[x] == expected


def test_is_prime_against_factorization():
    for n in range(2, 2000):
        assert is_prime(n) == (len(factorize(n)) == 1 and factorize(n)[0][1] == 1)
