"""Concrete trace-function families as dense complex arrays over F_q.

A TraceFunction is a length-q vector of complex values together with
family metadata.  Undefined points (poles, ramified points, the preimage
of infinity under a fractional linear map) are extended by zero.  When a
family carries a theoretical sup-norm (2 for Kl_2, k for Kl_k, ...) the
bound is enforced as a runtime assertion at construction, which turns
purity bounds into executable contracts.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .arith import (
    CompositeModulus,
    PrimeModulus,
    RationalFunctionModQ,
    make_prime_modulus,
    vector_modpow,
)
from .errors import CapacityError, InvalidArgumentError

REAL_TOL = 1e-9
SUP_TOL = 1e-9

DIRECT_SUM_CEILING = 10**9


@dataclass(eq=False)
class TraceFunction:
    """Dense values of a trace function plus its family metadata."""

    modulus: Union[PrimeModulus, CompositeModulus]
    values: np.ndarray
    family: str
    params: dict = field(default_factory=dict)
    real_valued: bool = False
    sup_norm: Optional[float] = None
    conductor: Optional[int] = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        size = self.modulus.q if isinstance(self.modulus, PrimeModulus) else self.modulus.c
        if len(self.values) != size:
            raise InvalidArgumentError(
                f"values length {len(self.values)} != modulus size {size}"
            )
        if self.real_valued and np.abs(self.values.imag).max(initial=0.0) > REAL_TOL:
            raise InvalidArgumentError(
                f"family {self.family} declared real but max |Im| = "
                f"{np.abs(self.values.imag).max():.3e}"
            )
        if self.sup_norm is not None:
            peak = np.abs(self.values).max(initial=0.0)
            if peak > self.sup_norm + SUP_TOL:
                raise InvalidArgumentError(
                    f"family {self.family}: sup {peak:.12f} exceeds declared "
                    f"bound {self.sup_norm}"
                )
        self.values.setflags(write=False)

    @property
    def q(self) -> int:
        return self.modulus.q if isinstance(self.modulus, PrimeModulus) else self.modulus.c

    def is_prime_modulus(self) -> bool:
        return isinstance(self.modulus, PrimeModulus)

    def __call__(self, x) -> complex:
        return self.values[int(x) % self.q]

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}({ps}) mod {self.q}"


def _require_prime(K: TraceFunction) -> PrimeModulus:
    if not K.is_prime_modulus():
        raise InvalidArgumentError(f"{K.family} requires a prime modulus")
    return K.modulus


def _require_same_modulus(K1: TraceFunction, K2: TraceFunction):
    if K1.modulus is not K2.modulus and K1.q != K2.q:
        raise InvalidArgumentError(
            f"modulus mismatch: {K1.q} vs {K2.q}"
        )


# ---------------------------------------------------------------------------
# elementary families
# ---------------------------------------------------------------------------

def all_ones(q: PrimeModulus) -> TraceFunction:
    """The trivial family, constant 1."""
    return TraceFunction(q, np.ones(q.q), "one", real_valued=True, sup_norm=1.0,
                         conductor=1)


def dirac(q: PrimeModulus, a: int) -> TraceFunction:
    """Indicator of the residue class a."""
    v = np.zeros(q.q)
    v[a % q.q] = 1.0
    return TraceFunction(q, v, "dirac", {"a": a % q.q}, real_valued=True, sup_norm=1.0)


def additive_phase(q: PrimeModulus, f: RationalFunctionModQ) -> TraceFunction:
    """x -> e_q(f(x)), zero at the poles of f (extension by zero)."""
    vals, poles = f.evaluate_all(q)
    out = q.e_q_table[vals]
    out[poles] = 0.0
    npoles, mult = f.pole_profile()
    return TraceFunction(
        q, out, "additive_phase",
        {"numerator": f.numerator, "denominator": f.denominator},
        sup_norm=1.0,
        conductor=3 if (npoles, mult) == (1, 1) else 1 + npoles + mult,
    )


def mult_phase(q: PrimeModulus, m: int, f: RationalFunctionModQ) -> TraceFunction:
    """x -> chi_m(f(x)) for the multiplicative character of index m.

    Zero where f vanishes or has a pole; m = (q-1)/2 reproduces the
    Legendre symbol of f(x).
    """
    if not 0 <= m < q.q - 1:
        raise InvalidArgumentError(f"character index {m} outside [0, q-2]")
    vals, poles = f.evaluate_all(q)
    dead = poles | (vals == 0)
    idx = np.where(dead, 1, vals)
    out = np.exp(2j * np.pi * m * q.dlog[idx] / (q.q - 1))
    out[dead] = 0.0
    return TraceFunction(q, out, "mult_phase",
                         {"m": m, "numerator": f.numerator, "denominator": f.denominator},
                         real_valued=(2 * m) % (q.q - 1) == 0,
                         sup_norm=1.0, conductor=3)


def identity_map(q: PrimeModulus) -> RationalFunctionModQ:
    return RationalFunctionModQ((0, 1), q=q.q)


def legendre_family(q: PrimeModulus) -> TraceFunction:
    """The Legendre symbol as a trace function."""
    K = mult_phase(q, (q.q - 1) // 2, identity_map(q))
    K.params["name"] = "legendre"
    return K


def inverse_phase(q: PrimeModulus) -> TraceFunction:
    """x -> e_q(1/x), the basic non-polynomial additive phase."""
    return additive_phase(q, RationalFunctionModQ((1,), (0, 1), q=q.q))


# ---------------------------------------------------------------------------
# Kloosterman-type point evaluations (brute-force oracles)
# ---------------------------------------------------------------------------

def kloosterman_direct(q: PrimeModulus, k: int, a: int) -> complex:
    """Normalized hyper-Kloosterman sum Kl_k(a;q) by direct summation.

    q^(-(k-1)/2) * sum over x_1*...*x_k = a of e_q(x_1+...+x_k); cost
    O(q^(k-1)), intended as the oracle for the transform pipeline.
    """
    if k < 2:
        raise InvalidArgumentError("hyper-Kloosterman sums need k >= 2")
    a %= q.q
    if a == 0:
        raise InvalidArgumentError("parameter a must be a unit")
    if q.q ** (k - 1) > DIRECT_SUM_CEILING:
        raise CapacityError(f"direct Kl_{k} sum at q={q.q} exceeds cost ceiling")
    inv = q.inverse_table
    eq = q.e_q_table
    if k == 2:
        x = np.arange(1, q.q, dtype=np.int64)
        return complex(eq[(x + a * inv[x]) % q.q].sum() / np.sqrt(q.q))
    # fold variables one at a time through the distribution table
    # dist[p] = sum over (x_1..x_j) with x_1*...*x_j = p of e_q(x_1+..+x_j)
    x = np.arange(1, q.q, dtype=np.int64)
    dist = np.zeros(q.q, dtype=np.complex128)
    dist[x] = eq[x]
    for _ in range(k - 2):
        new = np.zeros(q.q, dtype=np.complex128)
        for xj in range(1, q.q):
            new[x * xj % q.q] += dist[x] * eq[xj]
        dist = new
    # last variable is determined: x_k = a / prod
    tot = (dist[x] * eq[(a * inv[x]) % q.q]).sum()
    return complex(tot / q.q ** ((k - 1) / 2))


def salie(q: PrimeModulus, a: int) -> complex:
    """Salie sum q^(-1/2) * sum_{xy=a} (x|q) e_q(x+y).

    Real for q = 1 mod 4, purely imaginary for q = 3 mod 4, and zero when
    a is a non-residue; see salie_normalized for the phase-free variant.
    """
    a %= q.q
    if a == 0:
        raise InvalidArgumentError("parameter a must be a unit")
    x = np.arange(1, q.q, dtype=np.int64)
    terms = q.legendre_table[x] * q.e_q_table[(x + a * q.inverse_table[x]) % q.q]
    return complex(terms.sum() / np.sqrt(q.q))


def birch_family(q: PrimeModulus, a_poly: RationalFunctionModQ,
                 b_poly: RationalFunctionModQ) -> TraceFunction:
    """Normalized elliptic-curve trace t -> -q^(-1/2) sum_x (x^3+a(t)x+b(t) | q).

    Zero where the discriminant 4a(t)^3 + 27b(t)^2 vanishes.  Values obey
    the Hasse bound |.| <= 2.
    """
    if not (a_poly.is_polynomial and b_poly.is_polynomial):
        raise InvalidArgumentError("birch family requires polynomial coefficients")
    Q = q.q
    a_vals, _ = a_poly.evaluate_all(q)
    b_vals, _ = b_poly.evaluate_all(q)
    x = np.arange(Q, dtype=np.int64)
    x3 = x * x % Q * x % Q
    leg = q.legendre_table
    out = np.empty(Q)
    for t in range(Q):
        out[t] = leg[(x3 + a_vals[t] * x + b_vals[t]) % Q].sum()
    out = -out / np.sqrt(Q)
    disc = (4 * a_vals * a_vals % Q * a_vals + 27 * b_vals * b_vals) % Q
    out[disc == 0] = 0.0
    return TraceFunction(q, out, "birch",
                         {"a": a_poly.numerator, "b": b_poly.numerator},
                         real_valued=True, sup_norm=2.0)


# ---------------------------------------------------------------------------
# PGL_2 pullbacks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pgl2Element:
    """A fractional linear map x -> (ax+b)/(cx+d), stored up to scalar.

    The canonical representative scales the first nonzero entry of
    (a, b, c, d) to 1, which pins equality tests.
    """

    a: int
    b: int
    c: int
    d: int
    q: int

    @classmethod
    def of(cls, a: int, b: int, c: int, d: int, q: int) -> "Pgl2Element":
        a, b, c, d = a % q, b % q, c % q, d % q
        if (a * d - b * c) % q == 0:
            raise InvalidArgumentError("matrix is singular mod q")
        for first in (a, b, c, d):
            if first != 0:
                inv = pow(first, -1, q)
                return cls(a * inv % q, b * inv % q, c * inv % q, d * inv % q, q)
        raise InvalidArgumentError("zero matrix")

    @classmethod
    def identity(cls, q: int) -> "Pgl2Element":
        return cls.of(1, 0, 0, 1, q)

    @classmethod
    def translation(cls, b: int, q: int) -> "Pgl2Element":
        return cls.of(1, b, 0, 1, q)

    @classmethod
    def scaling(cls, a: int, q: int) -> "Pgl2Element":
        return cls.of(a, 0, 0, 1, q)

    @classmethod
    def inversion(cls, q: int) -> "Pgl2Element":
        return cls.of(0, 1, 1, 0, q)

    def __matmul__(self, other: "Pgl2Element") -> "Pgl2Element":
        if self.q != other.q:
            raise InvalidArgumentError("modulus mismatch")
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return Pgl2Element.of(a, b, c, d, self.q)

    def inverse(self) -> "Pgl2Element":
        return Pgl2Element.of(self.d, -self.b, -self.c, self.a, self.q)

    def apply(self, mod: PrimeModulus) -> tuple[np.ndarray, np.ndarray]:
        """Images gamma.x for x = 0..q-1 plus the mask of x mapping to infinity."""
        x = np.arange(self.q, dtype=np.int64)
        den = (self.c * x + self.d) % self.q
        num = (self.a * x + self.b) % self.q
        at_inf = den == 0
        safe = np.where(at_inf, 1, den)
        img = num * mod.inverse_table[safe] % self.q
        img[at_inf] = 0
        return img, at_inf


def pullback(K: TraceFunction, gamma: Pgl2Element) -> TraceFunction:
    """K pulled back along gamma: result[x] = K(gamma.x), zero at x -> infinity."""
    mod = _require_prime(K)
    if gamma.q != K.q:
        raise InvalidArgumentError("modulus mismatch")
    img, at_inf = gamma.apply(mod)
    vals = K.values[img].copy()
    vals[at_inf] = 0.0
    return TraceFunction(mod, vals, f"pullback({K.family})",
                         {"gamma": (gamma.a, gamma.b, gamma.c, gamma.d), **K.params},
                         real_valued=K.real_valued, sup_norm=K.sup_norm,
                         conductor=K.conductor)


def mult_translate(K: TraceFunction, a: int) -> TraceFunction:
    """[x a]*K, i.e. x -> K(ax)."""
    return pullback(K, Pgl2Element.scaling(a, K.q))


# ---------------------------------------------------------------------------
# pointwise algebra
# ---------------------------------------------------------------------------

def product(K1: TraceFunction, K2: TraceFunction) -> TraceFunction:
    _require_same_modulus(K1, K2)
    sup = None
    if K1.sup_norm is not None and K2.sup_norm is not None:
        sup = K1.sup_norm * K2.sup_norm
    return TraceFunction(K1.modulus, K1.values * K2.values,
                         f"product({K1.family},{K2.family})",
                         real_valued=K1.real_valued and K2.real_valued,
                         sup_norm=sup)


def conjugate(K: TraceFunction) -> TraceFunction:
    return TraceFunction(K.modulus, np.conj(K.values), f"conj({K.family})",
                         dict(K.params), real_valued=K.real_valued,
                         sup_norm=K.sup_norm, conductor=K.conductor)


def scale(K: TraceFunction, s: complex) -> TraceFunction:
    sup = None if K.sup_norm is None else K.sup_norm * abs(s)
    return TraceFunction(K.modulus, K.values * s, f"scale({K.family})",
                         dict(K.params),
                         real_valued=K.real_valued and complex(s).imag == 0,
                         sup_norm=sup)


# ---------------------------------------------------------------------------
# composite-modulus Kloosterman sums
# ---------------------------------------------------------------------------

def composite_kloosterman(c: CompositeModulus, a: int) -> tuple[complex, complex]:
    """Kl_2(a;c) two ways: direct unit sum, and the product over p | c of
    Kl_2(a * ((c/p)^-1)^2 ; p) given by twisted multiplicativity.

    Both values are returned; agreement is the caller's check, not ours.
    """
    a %= c.c
    if any(a % p == 0 for p in c.factors):
        raise InvalidArgumentError(f"gcd({a}, {c.c}) > 1")
    units = c.units()
    inv = vector_modpow(units, c.carmichael - 1, c.c)
    phases = (inv + a * units) % c.c
    direct = complex(np.exp(2j * np.pi * phases / c.c).sum() / np.sqrt(c.c))
    prod = 1.0 + 0.0j
    for p in c.factors:
        mod_p = make_prime_modulus(p)
        shift = a * c.cofactor_inverses[p] ** 2 % p
        prod *= kloosterman_direct(mod_p, 2, shift)
    return direct, prod


# ---------------------------------------------------------------------------
# binary container
# ---------------------------------------------------------------------------

_MAGIC = b"TFN1"
_FLAG_REAL = 1


def write_tracefunction(K: TraceFunction, path) -> None:
    """Serialize: magic, q as u64 LE, u32 flags, family string, then q
    little-endian (re, im) double pairs."""
    if not K.is_prime_modulus():
        raise InvalidArgumentError("container format covers prime-modulus functions")
    fam = K.family.encode("utf-8")
    flags = _FLAG_REAL if K.real_valued else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QLL", K.q, flags, len(fam)))
        fh.write(fam)
        interleaved = np.empty(2 * K.q, dtype="<f8")
        interleaved[0::2] = K.values.real
        interleaved[1::2] = K.values.imag
        fh.write(interleaved.tobytes())


def read_tracefunction(path) -> TraceFunction:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise InvalidArgumentError(f"bad magic {magic!r}")
        q, flags, famlen = struct.unpack("<QLL", fh.read(16))
        fam = fh.read(famlen).decode("utf-8")
        raw = np.frombuffer(fh.read(16 * q), dtype="<f8")
    vals = raw[0::2] + 1j * raw[1::2]
    return TraceFunction(make_prime_modulus(int(q)), vals, fam,
                         real_valued=bool(flags & _FLAG_REAL))
