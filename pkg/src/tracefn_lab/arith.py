"""Exact integer and modular arithmetic.

Primality, factorization, primitive roots, full discrete-log tables,
Legendre symbols, squarefree composite moduli with CRT data, and sieved
tables of the classical arithmetic functions (primes, mu, von Mangoldt,
d2, d3).  Everything here is exact; floating point enters only in the
optional table of q-th roots of unity.

All values are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError, InvalidArgumentError, InvalidModulusError

# Deterministic Miller-Rabin witness set, valid for all n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

SIEVE_LIMIT = 10**8
MODULUS_CEILING = 2**31


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, (prime, exponent) pairs."""
    if n < 1:
        raise InvalidArgumentError(f"cannot factor {n}")
    out: list[tuple[int, int]] = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True, eq=False)
class PrimeModulus:
    """A prime q with its multiplicative structure fully tabulated.

    ``dlog[x]`` is the index of x in base g for x in 1..q-1 (entry 0 is a
    -1 sentinel so the array is indexable by residue), ``pow_table[j]`` is
    g^j for j in 0..q-2, and ``e_q_table`` holds exp(2*pi*i*j/q) when it
    has been materialized.
    """

    q: int
    g: int
    dlog: np.ndarray
    pow_table: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.dlog.setflags(write=False)
        self.pow_table.setflags(write=False)

    @property
    def e_q_table(self) -> np.ndarray:
        """q-th roots of unity exp(2*pi*i*j/q), j = 0..q-1 (cached)."""
        tab = self._cache.get("e_q")
        if tab is None:
            tab = np.exp(2j * np.pi * np.arange(self.q) / self.q)
            tab.setflags(write=False)
            self._cache["e_q"] = tab
        return tab

    @property
    def inverse_table(self) -> np.ndarray:
        """Modular inverses, inv[x]*x = 1 mod q for x in 1..q-1; inv[0] = 0."""
        inv = self._cache.get("inv")
        if inv is None:
            n = self.q - 1
            inv = np.zeros(self.q, dtype=np.int64)
            # xbar = g^(-dlog x): one gather through the power table.
            inv[self.pow_table] = self.pow_table[(n - np.arange(n)) % n]
            inv.setflags(write=False)
            self._cache["inv"] = inv
        return inv

    @property
    def legendre_table(self) -> np.ndarray:
        """Legendre symbol (x|q) for x = 0..q-1, from discrete-log parity."""
        leg = self._cache.get("leg")
        if leg is None:
            leg = np.zeros(self.q, dtype=np.int8)
            leg[1:] = np.where(self.dlog[1:] % 2 == 0, 1, -1)
            leg.setflags(write=False)
            self._cache["leg"] = leg
        return leg

    def e_q(self, x) -> np.ndarray:
        """Standard additive character e_q(x) = exp(2*pi*i*x/q)."""
        return self.e_q_table[np.asarray(x, dtype=np.int64) % self.q]


def _build_power_table(q: int, g: int) -> np.ndarray:
    """g^j mod q for j = 0..q-2, block-vectorized (products stay < 2^62)."""
    n = q - 1
    block = min(n, 1024)
    pt = np.empty(n, dtype=np.int64)
    acc = 1
    for j in range(block):
        pt[j] = acc
        acc = acc * g % q
    if n > block:
        gb = pow(g, block, q)
        for start in range(block, n, block):
            end = min(start + block, n)
            np.multiply(pt[start - block : end - block], gb, out=pt[start:end])
            np.mod(pt[start:end], q, out=pt[start:end])
    return pt


def construct_prime_modulus(q: int) -> PrimeModulus:
    """Uncached modulus construction; see make_prime_modulus."""
    if q < 3 or q >= MODULUS_CEILING:
        raise InvalidModulusError(f"modulus {q} outside supported range [3, 2^31)")
    if not is_prime(q):
        raise InvalidModulusError(f"modulus {q} is not prime")
    radicals = [p for p, _ in factorize(q - 1)]
    g = 2
    while any(pow(g, (q - 1) // r, q) == 1 for r in radicals):
        g += 1
    pt = _build_power_table(q, g)
    dlog = np.full(q, -1, dtype=np.int64)
    dlog[pt] = np.arange(q - 1, dtype=np.int64)
    return PrimeModulus(q=q, g=g, dlog=dlog, pow_table=pt)


@lru_cache(maxsize=None)
def make_prime_modulus(q: int) -> PrimeModulus:
    """Tabulate the least primitive root and the full discrete-log table.

    The root is certified by checking g^((q-1)/r) != 1 for every prime
    r | q-1.  O(q) memory, cached per process; q below 2^31 by design.
    Prefer construct_prime_modulus for throwaway sweeps over many large
    moduli.
    """
    return construct_prime_modulus(q)


def legendre(a: int, q: PrimeModulus) -> int:
    """Legendre symbol (a|q) in {-1, 0, +1}, via discrete-log parity."""
    return int(q.legendre_table[a % q.q])


@dataclass(frozen=True, eq=False)
class CompositeModulus:
    """Odd squarefree c with its prime factors and CRT cofactor inverses.

    ``cofactor_inverses[p]`` is the inverse of c/p modulo p, the quantity
    that drives twisted multiplicativity.
    """

    c: int
    factors: tuple[int, ...]
    cofactor_inverses: dict[int, int]

    @property
    def carmichael(self) -> int:
        lam = 1
        for p in self.factors:
            lam = lam * (p - 1) // math.gcd(lam, p - 1)
        return lam

    def units(self) -> np.ndarray:
        """Residues coprime to c, ascending."""
        x = np.arange(1, self.c, dtype=np.int64)
        mask = np.ones(self.c - 1, dtype=bool)
        for p in self.factors:
            mask &= x % p != 0
        return x[mask]


@lru_cache(maxsize=None)
def make_composite_modulus(c: int) -> CompositeModulus:
    if c < 3 or c % 2 == 0:
        raise InvalidModulusError(f"composite modulus {c} must be odd and >= 3")
    fact = factorize(c)
    if any(e > 1 for _, e in fact):
        raise InvalidModulusError(f"composite modulus {c} is not squarefree")
    factors = tuple(p for p, _ in fact)
    inverses = {p: pow(c // p, -1, p) for p in factors}
    return CompositeModulus(c=c, factors=factors, cofactor_inverses=inverses)


def vector_modpow(base: np.ndarray, exponent: int, modulus: int) -> np.ndarray:
    """base**exponent mod modulus, elementwise, int64-safe for modulus < 2^31.

    Drops to in-place int32 arithmetic when modulus^2 fits (modulus below
    46341), which roughly halves the memory traffic of the square chain.
    """
    if modulus >= MODULUS_CEILING:
        raise CapacityError("vector_modpow requires modulus < 2^31")
    dtype = np.int32 if modulus < 46341 else np.int64
    b = np.mod(base, modulus).astype(dtype)
    result = np.ones_like(b)
    e = exponent
    while e > 0:
        if e & 1:
            np.multiply(result, b, out=result)
            np.mod(result, modulus, out=result)
        e >>= 1
        if e:
            np.multiply(b, b, out=b)
            np.mod(b, modulus, out=b)
    return result.astype(np.int64)


@dataclass(frozen=True, eq=False)
class ArithmeticTables:
    """Sieved arithmetic functions up to an inclusive limit X.

    ``mu``, ``vmangoldt``, ``d2`` and ``d3`` are indexed directly by n
    (entry 0 unused).
    """

    limit: int
    primes: np.ndarray
    mu: np.ndarray
    vmangoldt: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def prime_count(self, x: int) -> int:
        return int(np.searchsorted(self.primes, x, side="right"))


@lru_cache(maxsize=8)
def sieve_tables(X: int) -> ArithmeticTables:
    """Sieve primes, mu, von Mangoldt and the divisor functions d2, d3."""
    if not 2 <= X <= SIEVE_LIMIT:
        raise CapacityError(f"sieve limit {X} outside [2, {SIEVE_LIMIT}]")
    size = X + 1
    is_comp = np.zeros(size, dtype=bool)
    is_comp[:2] = True
    for p in range(2, int(math.isqrt(X)) + 1):
        if not is_comp[p]:
            is_comp[p * p :: p] = True
    primes = np.nonzero(~is_comp)[0].astype(np.int64)

    mu = np.ones(size, dtype=np.int8)
    mu[0] = 0
    vm = np.zeros(size, dtype=np.float64)
    for p in primes:
        p = int(p)
        mu[p::p] *= -1
        if p * p <= X:
            mu[p * p :: p * p] = 0
        logp = math.log(p)
        pk = p
        while pk <= X:
            vm[pk] = logp
            pk *= p

    d2 = np.zeros(size, dtype=np.int64)
    for d in range(1, size):
        d2[d::d] += 1
    d3 = np.zeros(size, dtype=np.int64)
    for d in range(1, size):
        d3[d::d] += d2[1 : (X // d) + 1]

    for arr in (primes, mu, vm, d2, d3):
        arr.setflags(write=False)
    return ArithmeticTables(limit=X, primes=primes, mu=mu, vmangoldt=vm, d2=d2, d3=d3)


class RationalFunctionModQ:
    """A reduced rational function over Z/qZ.

    Coefficients are stored low degree first.  The gcd of numerator and
    denominator is divided out at construction, so a residue can never be
    simultaneously a zero of both; evaluation reports poles as a mask, a
    distinguished outcome rather than an error.
    """

    def __init__(self, numerator: Sequence[int], denominator: Sequence[int] = (1,), *, q: int):
        self.q = q
        num = _poly_trim([c % q for c in numerator])
        den = _poly_trim([c % q for c in denominator])
        if not den:
            raise InvalidArgumentError("denominator is identically zero mod q")
        if num:
            g = _poly_gcd(num, den, q)
            if len(g) > 1:
                num = _poly_divexact(num, g, q)
                den = _poly_divexact(den, g, q)
        # normalize the denominator to be monic
        lead_inv = pow(den[-1], -1, q)
        den = [c * lead_inv % q for c in den]
        num = [c * lead_inv % q for c in num]
        self.numerator = tuple(num)
        self.denominator = tuple(den)

    @classmethod
    def from_poly(cls, coeffs: Sequence[int], q: int) -> "RationalFunctionModQ":
        return cls(coeffs, (1,), q=q)

    @property
    def is_polynomial(self) -> bool:
        return self.denominator == (1,)

    def degree_bounds(self) -> tuple[int, int]:
        return (len(self.numerator) - 1 if self.numerator else -1, len(self.denominator) - 1)

    def evaluate_all(self, mod: PrimeModulus) -> tuple[np.ndarray, np.ndarray]:
        """Values f(x) for x = 0..q-1 and a boolean pole mask.

        Values at poles are reported as 0 under the mask.
        """
        if mod.q != self.q:
            raise InvalidArgumentError("modulus mismatch")
        x = np.arange(self.q, dtype=np.int64)
        num = _poly_eval_all(self.numerator, x, self.q)
        den = _poly_eval_all(self.denominator, x, self.q)
        poles = den == 0
        safe = np.where(poles, 1, den)
        vals = num * mod.inverse_table[safe] % self.q
        vals[poles] = 0
        return vals, poles

    def pole_profile(self) -> tuple[int, int]:
        """(number of distinct poles, total pole multiplicity) over the
        algebraic closure, the point at infinity included."""
        den = list(self.denominator)
        deg_n = len(self.numerator) - 1 if self.numerator else -1
        deg_d = len(den) - 1
        distinct = len(_poly_squarefree_part(den, self.q)) - 1
        total = deg_d
        if deg_n > deg_d:  # pole at infinity of order deg_n - deg_d
            distinct += 1
            total += deg_n - deg_d
        return distinct, total


def _poly_trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a: list[int], b: list[int], q: int) -> list[int]:
    a = a[:]
    inv_lead = pow(b[-1], -1, q)
    while len(a) >= len(b) and a:
        coef = a[-1] * inv_lead % q
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bc) % q
        a = _poly_trim(a)
    return a


def _poly_gcd(a: list[int], b: list[int], q: int) -> list[int]:
    a, b = a[:], b[:]
    while b:
        a, b = b, _poly_mod(a, b, q)
    if a:
        inv = pow(a[-1], -1, q)
        a = [c * inv % q for c in a]
    return a


def _poly_divexact(a: list[int], b: list[int], q: int) -> list[int]:
    out = [0] * (len(a) - len(b) + 1)
    rem = a[:]
    inv_lead = pow(b[-1], -1, q)
    for k in range(len(out) - 1, -1, -1):
        coef = rem[k + len(b) - 1] * inv_lead % q
        out[k] = coef
        for i, bc in enumerate(b):
            rem[k + i] = (rem[k + i] - coef * bc) % q
    return _poly_trim(out)


def _poly_deriv(a: Sequence[int], q: int) -> list[int]:
    return _poly_trim([i * c % q for i, c in enumerate(a)][1:])


def _poly_squarefree_part(a: list[int], q: int) -> list[int]:
    d = _poly_deriv(a, q)
    if not d:
        # perfect q-th power territory; fall back on the polynomial itself
        return a[:]
    g = _poly_gcd(a, d, q)
    return _poly_divexact(a, g, q) if len(g) > 1 else a[:]


def _poly_eval_all(coeffs: Sequence[int], x: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = (out * x + c) % q
    return out
