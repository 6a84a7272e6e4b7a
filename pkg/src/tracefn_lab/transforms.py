"""Fast transforms over F_q and F_q^x.

Additive Fourier transform at arbitrary prime length, multiplicative
convolution and Mellin transform through discrete-log reindexing, the
Voronoi transform, Gauss sums, and the convolution construction of
hyper-Kloosterman sums.

Sign conventions: ``fourier`` defaults to the -1 kernel e_q(-xy); the
Voronoi pipeline uses the +1 kernel internally so that the Dirac image
comes out as a normalized Kloosterman sum on the nose.  Everywhere the
sign is an explicit parameter, since both conventions are in genuine use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .arith import PrimeModulus
from .errors import CapacityError, InvalidArgumentError
from .tracefn import TraceFunction, _require_prime, _require_same_modulus

DFT_CEILING = 10**7


def dft(values: np.ndarray, direction: int = -1) -> np.ndarray:
    """out[y] = sum_x in[x] * exp(direction * 2*pi*i*x*y/N), any length N.

    Arbitrary (in particular prime) lengths run in O(N log N) via the
    chirp-z reduction inside pocketfft.
    """
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 1:
        raise InvalidArgumentError("dft expects a one-dimensional array")
    n = len(values)
    if not 1 <= n <= DFT_CEILING:
        raise CapacityError(f"dft length {n} outside [1, {DFT_CEILING}]")
    if direction == -1:
        return scipy.fft.fft(values)
    if direction == +1:
        return scipy.fft.ifft(values) * n
    raise InvalidArgumentError("direction must be +1 or -1")


def fourier(K: TraceFunction, sign: int = -1) -> TraceFunction:
    """Normalized Fourier transform K^(y) = q^(-1/2) sum_x K(x) e_q(sign*x*y)."""
    mod = _require_prime(K)
    vals = dft(K.values, sign) / np.sqrt(mod.q)
    return TraceFunction(mod, vals, f"fourier{'+' if sign > 0 else '-'}({K.family})",
                         dict(K.params))


def _mult_reindex(K: TraceFunction) -> np.ndarray:
    """Values of K at g^j for j = 0..q-2."""
    return K.values[K.modulus.pow_table]


def _mult_unindex(mod: PrimeModulus, cyclic: np.ndarray) -> np.ndarray:
    out = np.zeros(mod.q, dtype=np.complex128)
    out[mod.pow_table] = cyclic
    return out


def mult_convolution(K1: TraceFunction, K2: TraceFunction) -> TraceFunction:
    """Normalized multiplicative convolution

        (K1 * K2)(x) = q^(-1/2) sum_{x1*x2 = x} K1(x1) K2(x2),  x != 0,

    zero at x = 0.  Discrete-log reindexing turns it into one cyclic
    convolution of length q-1.
    """
    mod = _require_prime(K1)
    _require_same_modulus(K1, K2)
    a = scipy.fft.fft(_mult_reindex(K1))
    b = scipy.fft.fft(_mult_reindex(K2))
    cyc = scipy.fft.ifft(a * b) / np.sqrt(mod.q)
    return TraceFunction(mod, _mult_unindex(mod, cyc),
                         f"mconv({K1.family},{K2.family})")


def mult_convolution_direct(K1: TraceFunction, K2: TraceFunction) -> np.ndarray:
    """O(q^2) convolution oracle used to pin the fast path in tests."""
    mod = _require_prime(K1)
    q = mod.q
    out = np.zeros(q, dtype=np.complex128)
    inv = mod.inverse_table
    for x in range(1, q):
        x2 = x * inv[1:q] % q  # x2 = x / x1
        out[x] = (K1.values[1:q] * K2.values[x2]).sum() / np.sqrt(q)
    return out


def hyper_kloosterman_all(q: PrimeModulus, k: int) -> TraceFunction:
    """Kl_k on all of F_q^x as the k-fold multiplicative self-convolution
    of the additive character, O(k + q log q) total.

    Agrees with kloosterman_direct pointwise; real-valued iff k is even;
    obeys the Deligne bound |Kl_k| <= k.
    """
    if k < 2:
        raise InvalidArgumentError("hyper-Kloosterman sums need k >= 2")
    if q.q > DFT_CEILING:
        raise CapacityError(f"q={q.q} exceeds transform ceiling")
    psi_cyclic = q.e_q_table[q.pow_table]
    spec = scipy.fft.fft(psi_cyclic)
    cyc = scipy.fft.ifft(spec**k) / q.q ** ((k - 1) / 2)
    vals = _mult_unindex(q, cyc)
    return TraceFunction(q, vals, f"kl{k}", {"k": k},
                         real_valued=(k % 2 == 0), sup_norm=float(k),
                         conductor=k + 3)


def kloosterman_function(q: PrimeModulus, k: int = 2) -> TraceFunction:
    return hyper_kloosterman_all(q, k)


def gauss_sum(q: PrimeModulus, m: int, a: int = 1) -> complex:
    """Normalized Gauss sum eps_chi(a) = q^(-1/2) sum_{x != 0} chi_m(x) e_q(ax)."""
    x = np.arange(1, q.q, dtype=np.int64)
    chi = np.exp(2j * np.pi * (m % (q.q - 1)) * q.dlog[x] / (q.q - 1))
    return complex((chi * q.e_q_table[a * x % q.q]).sum() / np.sqrt(q.q))


@dataclass(eq=False)
class CharacterSpectrum:
    """Values indexed by multiplicative character index m = 0..q-2."""

    q: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if len(self.values) != self.q - 1:
            raise InvalidArgumentError("spectrum length must be q-1")


def gauss_sum_spectrum(q: PrimeModulus, a: int = 1) -> CharacterSpectrum:
    """eps_chi_m(a) for every m at once: one cyclic DFT of e_q(a*g^j)."""
    phases = q.e_q_table[a * q.pow_table % q.q]
    vals = dft(phases, +1) / np.sqrt(q.q)
    return CharacterSpectrum(q.q, vals)


def mellin(K: TraceFunction) -> CharacterSpectrum:
    """K~(m) = (q-1)^(-1/2) sum_{x != 0} K(x) chi_m(x), all m at once."""
    mod = _require_prime(K)
    vals = dft(_mult_reindex(K), +1) / np.sqrt(mod.q - 1)
    return CharacterSpectrum(mod.q, vals)


def mellin_inverse(q: PrimeModulus, spec: CharacterSpectrum) -> TraceFunction:
    """K(x) = (q-1)^(-1/2) sum_m K~(m) chi_m^(-1)(x) on F_q^x, zero at 0."""
    if spec.q != q.q:
        raise InvalidArgumentError("modulus mismatch")
    cyc = dft(spec.values, -1) / np.sqrt(q.q - 1)
    return TraceFunction(q, _mult_unindex(q, cyc), "mellin_inverse")


def voronoi_transform(K: TraceFunction) -> TraceFunction:
    """Voronoi transform K?(n) = q^(-1/2) sum_{h != 0} K^+(h) e_q(hbar * n),

    with K^+ the +1-sign Fourier transform.  Sends dirac(a) to
    q^(-1/2) Kl_2(a*n;q).
    """
    mod = _require_prime(K)
    plus = dft(K.values, +1) / np.sqrt(mod.q)  # +1-sign Fourier transform
    flipped = np.zeros(mod.q, dtype=np.complex128)
    x = np.arange(1, mod.q)
    flipped[x] = plus[mod.inverse_table[x]]
    vals = dft(flipped, +1) / np.sqrt(mod.q)
    return TraceFunction(mod, vals, f"voronoi({K.family})", dict(K.params))


def salie_all(q: PrimeModulus) -> TraceFunction:
    """All Salie sums at once as the convolution (chi * psi-weighted) pair.

    salie(a) = q^(-1/2) sum_{xy=a} (x|q) e_q(x+y), computed for every a
    through one multiplicative convolution.
    """
    f = TraceFunction(q, q.legendre_table * q.e_q_table, "leg_psi")
    h = TraceFunction(q, q.e_q_table.copy(), "psi")
    conv = mult_convolution(f, h)
    return TraceFunction(q, conv.values, "salie", sup_norm=2.0)


def salie_normalized(q: PrimeModulus) -> TraceFunction:
    """Salie sums divided by the quadratic Gauss sum phase eps_chi(1).

    The normalized values are real for every odd q (raw sums are real
    only for q = 1 mod 4), vanish at non-residues, and lie in [-2, 2].
    """
    eps = gauss_sum(q, (q.q - 1) // 2, 1)
    raw = salie_all(q)
    return TraceFunction(q, raw.values / eps, "salie_normalized",
                         real_valued=True, sup_norm=2.0)
