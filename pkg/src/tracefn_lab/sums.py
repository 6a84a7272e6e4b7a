"""Incomplete and complete sum statistics of trace functions.

Interval and smoothed sums, the Poisson dual-sum identity, correlation
and multicorrelation sums, moments, bilinear forms, sums over primes and
the Heath-Brown decomposition of the von Mangoldt function, divisor
functions in arithmetic progressions, van der Corput sums for bimodular
products, and the complete sums behind the Burgess and +ab-shift
completion methods.

Wherever a theorem only gives O(sqrt(q))-type cancellation with an
implicit constant, the functions here return the raw value together with
a dimensionless bound ratio; thresholds for those ratios live in the
calibration manifest, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .arith import ArithmeticTables, PrimeModulus, make_prime_modulus
from .errors import CapacityError, InvalidArgumentError
from .tracefn import Pgl2Element, TraceFunction, _require_prime, _require_same_modulus
from .transforms import fourier

PRODUCT_SUM_CEILING = 10**8
HEATH_BROWN_CEILING = 10**6
PV_EXACT_LIMIT = 3000


# ---------------------------------------------------------------------------
# the smooth test function
# ---------------------------------------------------------------------------

class SmoothBump:
    """V(x) = exp(-1/((x-1)(2-x))) on (1,2), zero elsewhere.

    ``hat`` evaluates the real-line Fourier transform
    Vhat(t) = integral V(x) e(xt) dx by a fixed 2000-node Gauss-Legendre
    rule on [1,2]; with all derivatives of V vanishing at the endpoints
    the rule is accurate to ~1e-15 for |t| up to a few hundred.
    """

    _GL_NODES = 2000

    def __init__(self):
        x, w = np.polynomial.legendre.leggauss(self._GL_NODES)
        self._nodes = 1.5 + 0.5 * x
        self._weights = 0.5 * w * self(self._nodes)
        self.integral = float(self._weights.sum())

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        inside = (x > 1.0) & (x < 2.0)
        xi = x[inside]
        out[inside] = np.exp(-1.0 / ((xi - 1.0) * (2.0 - xi)))
        return out

    def hat(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        phases = np.exp(2j * np.pi * np.outer(t, self._nodes))
        return phases @ self._weights

    def hat_scalar(self, t: float) -> complex:
        return complex(self.hat(t)[0])

    def support_integers(self, N: float) -> np.ndarray:
        """Integers n with V(n/N) != 0, i.e. N < n < 2N."""
        lo = math.floor(N) + 1
        hi = math.ceil(2 * N) - 1
        if hi < lo:
            return np.empty(0, dtype=np.int64)
        return np.arange(lo, hi + 1, dtype=np.int64)


# a single shared instance; the bump is fixed by construction
BUMP = SmoothBump()


# ---------------------------------------------------------------------------
# coefficient sequences and shift tuples
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CoefficientSequence:
    """Complex weights alpha_m for m in [M, 2M), each |alpha_m| <= 1."""

    offset: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if np.abs(self.values).max(initial=0.0) > 1 + 1e-12:
            raise InvalidArgumentError("coefficients must satisfy |alpha_m| <= 1")

    @classmethod
    def random_signs(cls, M: int, seed: int) -> "CoefficientSequence":
        rng = np.random.default_rng(seed)
        return cls(M, rng.choice([-1.0, 1.0], size=M).astype(np.complex128))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.values), dtype=np.int64)

    def l2(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class ShiftTuple:
    """b = (b_1..b_2l) with entries in a declared integer box [lo, hi]."""

    entries: tuple[int, ...]
    half_length: int
    box: tuple[int, int]

    def __post_init__(self):
        if len(self.entries) != 2 * self.half_length:
            raise InvalidArgumentError("shift tuple needs 2l entries")
        lo, hi = self.box
        if any(not lo <= b <= hi for b in self.entries):
            raise InvalidArgumentError(f"entries leave declared box [{lo}, {hi}]")

    @classmethod
    def of(cls, entries: Sequence[int], B: Optional[int] = None) -> "ShiftTuple":
        entries = tuple(int(b) for b in entries)
        if B is None:
            box = (min(entries), max(entries))
        else:
            box = (B, 2 * B - 1)
        return cls(entries, len(entries) // 2, box)

    @property
    def left(self) -> tuple[int, ...]:
        return self.entries[: self.half_length]

    @property
    def right(self) -> tuple[int, ...]:
        return self.entries[self.half_length :]


@dataclass(eq=False)
class DiscrepancyReport:
    """E(d_k; q, a) with both addends retained for recomputation."""

    k: int
    X: int
    q: int
    a: int
    progression_sum: float
    coprime_average: float

    @property
    def discrepancy(self) -> float:
        return self.progression_sum - self.coprime_average

    @property
    def reference_scale(self) -> float:
        return self.X / self.q

    @property
    def ratio(self) -> float:
        return abs(self.discrepancy) / self.reference_scale


# ---------------------------------------------------------------------------
# interval sums and Polya-Vinogradov extremal scans
# ---------------------------------------------------------------------------

def interval_sum(K: TraceFunction, a: int, b: int) -> complex:
    """sum_{a <= n <= b} K(n), endpoints inclusive, no wrap-around."""
    if not 0 <= a <= b < K.q:
        raise InvalidArgumentError(f"interval [{a}, {b}] not inside [0, q-1]")
    return complex(K.values[a : b + 1].sum())


def _prefix_path(K: TraceFunction) -> np.ndarray:
    """P[0] = 0, P[j] = K(0) + ... + K(j-1); interval sums are P[b+1]-P[a]."""
    path = np.empty(K.q + 1, dtype=np.complex128)
    path[0] = 0.0
    np.cumsum(K.values, out=path[1:])
    return path


@dataclass(eq=False)
class ExtremalScan:
    maximum: float
    interval: tuple[int, int]
    method: str

    @property
    def exact(self) -> bool:
        return self.method == "exact"


def _diameter(points: np.ndarray) -> tuple[float, int, int]:
    """Exact planar diameter of the prefix path via its convex hull."""
    pts = np.column_stack([points.real, points.imag])
    try:
        from scipy.spatial import ConvexHull

        hull = np.unique(ConvexHull(pts).vertices)
    except Exception:  # degenerate (collinear) point sets
        hull = np.arange(len(pts))
    sub = pts[hull]
    d2 = ((sub[:, None, :] - sub[None, :, :]) ** 2).sum(axis=2)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    return float(math.sqrt(d2[i, j])), int(hull[i]), int(hull[j])


def pv_extremal_scan(K: TraceFunction, force_heuristic: bool = False) -> ExtremalScan:
    """max over intervals I of |S(K;I)| plus the maximizing interval.

    Exact (diameter of the complex prefix path) for q <= 3000; above
    that a 64-angle rotated-prefix scan returns a certified lower bound
    tagged as such.
    """
    _require_prime(K)
    path = _prefix_path(K)
    if K.q <= PV_EXACT_LIMIT and not force_heuristic:
        best, i, j = _diameter(path)
        i, j = min(i, j), max(i, j)
        return ExtremalScan(best, (i, j - 1), "exact")
    best = -1.0
    arg = (0, 0)
    for phi in np.linspace(0.0, np.pi, 64, endpoint=False):
        rot = (path * np.exp(1j * phi)).real
        imin = int(np.argmin(rot))
        imax = int(np.argmax(rot))
        val = abs(path[imax] - path[imin])
        if val > best:
            best = val
            i, j = min(imin, imax), max(imin, imax)
            arg = (i, j - 1)
    return ExtremalScan(best, arg, "lower_bound")


def pv_ratio(K: TraceFunction) -> float:
    """Extremal interval sum over the Polya-Vinogradov scale sqrt(q) log q."""
    scan = pv_extremal_scan(K)
    return scan.maximum / (math.sqrt(K.q) * math.log(K.q))


def interval_refinement_ratio(K: TraceFunction, samples: int = 50, seed: int = 0) -> float:
    """max over sampled intervals with sqrt(q) < |I| <= q of
    |S(K;I)| / (sqrt(q) * (1 + log(|I|/sqrt(q))))."""
    _require_prime(K)
    q = K.q
    rng = np.random.default_rng(seed)
    path = _prefix_path(K)
    rt = math.sqrt(q)
    worst = 0.0
    for _ in range(samples):
        length = int(rng.integers(int(rt) + 1, q + 1))
        a = int(rng.integers(0, q - length + 1))
        s = abs(path[a + length] - path[a])
        worst = max(worst, s / (rt * (1.0 + math.log(length / rt))))
    return worst


# ---------------------------------------------------------------------------
# smoothed sums and the Poisson dual identity
# ---------------------------------------------------------------------------

def smoothed_sum(K: TraceFunction, V: SmoothBump, N: float) -> complex:
    """sum_n K(n mod q) V(n/N) over the integer support N < n < 2N."""
    ns = V.support_integers(N)
    if len(ns) == 0:
        return 0.0 + 0.0j
    return complex((K.values[ns % K.q] * V(ns / N)).sum())


def poisson_dual_sum(K: TraceFunction, V: SmoothBump, N: float,
                     truncation: Optional[int] = None, sign: int = -1) -> complex:
    """(N/sqrt(q)) * sum_{|n| <= T} K^(n) Vhat(-sign * nN/q), T ~ 50 q/N.

    Exact dual of smoothed_sum(K, V, N) for arbitrary K under either
    transform sign: the discrete kernel e_q(sign * xy) must pair with the
    real-line transform at the opposite sign, which is the one consistent
    reading of the two classical conventions.  With sign = -1 the dual
    weight is Vhat(+nN/q), the textbook form.
    """
    mod = _require_prime(K)
    q = mod.q
    T = truncation if truncation is not None else int(50 * q / N)
    Khat = fourier(K, sign).values
    ns = np.arange(-T, T + 1, dtype=np.int64)
    vhat = V.hat(-sign * ns * N / q)
    return complex((Khat[ns % q] * vhat).sum() * N / math.sqrt(q))


# ---------------------------------------------------------------------------
# correlation sums
# ---------------------------------------------------------------------------

def correlation(K1: TraceFunction, K2: TraceFunction) -> complex:
    """C(K1, K2) = q^(-1) sum_x K1(x) conj(K2(x))."""
    _require_same_modulus(K1, K2)
    return complex((K1.values * np.conj(K2.values)).sum() / K1.q)


def autocorrelation_spectrum(K: TraceFunction) -> np.ndarray:
    """C([x a]*K, K) for every scaling a != 0, indexed by a; one cyclic FFT.

    Matches correlation(mult_translate(K, a), K) exactly, the (constant)
    x = 0 term included; entry at a = 1 is the self-correlation.
    """
    import scipy.fft as _fft

    mod = _require_prime(K)
    cyc = K.values[mod.pow_table]
    spec = _fft.fft(cyc)
    # ([x g^i]*K, K) pairs K(g^(i+j)) with conj K(g^j): cyclic autocorrelation
    corr_cyc = _fft.ifft(spec * np.conj(spec)) / mod.q
    out = np.zeros(mod.q, dtype=np.complex128)
    out[mod.pow_table] = corr_cyc
    out += abs(K.values[0]) ** 2 / mod.q
    out[0] = 0.0
    return out


def multicorrelation(K: TraceFunction, gammas: Sequence[tuple[Pgl2Element, bool]],
                     h: int = 0) -> complex:
    """q^(-1) sum_x prod_i K(gamma_i . x)^(conj_i) e_q(xh).

    Each gamma comes with a conjugation flag; factors whose gamma sends x
    to infinity contribute zero (so the whole term dies).
    """
    mod = _require_prime(K)
    q = mod.q
    acc = mod.e_q_table[np.arange(q) * (h % q) % q].astype(np.complex128)
    for gamma, conj_flag in gammas:
        img, at_inf = gamma.apply(mod)
        factor = K.values[img].copy()
        factor[at_inf] = 0.0
        acc *= np.conj(factor) if conj_flag else factor
    return complex(acc.sum() / q)


def khan_ngo_sum(K: TraceFunction, ells: Sequence[int]) -> complex:
    """sum over r in F_q^x of prod_i K(lbar_i * r), the 4-fold (or 2l-fold)
    Kloosterman product sum."""
    mod = _require_prime(K)
    q = mod.q
    r = np.arange(1, q, dtype=np.int64)
    acc = np.ones(q - 1, dtype=np.complex128)
    inv = mod.inverse_table
    for ell in ells:
        lbar = inv[ell % q]
        acc *= K.values[lbar * r % q]
    return complex(acc.sum())


def is_paired_tuple(ells: Sequence[int]) -> bool:
    """True when (l1..l4) splits into two equal pairs (the diagonal case)."""
    a, b, c, d = ells
    return (a == b and c == d) or (a == c and b == d) or (a == d and b == c)


def moment(K: TraceFunction, l: int) -> float:
    """M_2l = q^(-1) sum_x |K(x)|^(2l), with |0|^0 := 1 so M_0 = 1."""
    if l < 0:
        raise InvalidArgumentError("moment order must be >= 0")
    if l == 0:
        return 1.0
    return float((np.abs(K.values) ** (2 * l)).sum() / K.q)


def kloosterman_fourth_moment_oracle(q: int) -> int:
    """Exact integer q^2 * sum_{a != 0} |Kl_2(a;q)|^4 by combinatorics.

    Counts pairs of pairs (x1,y1),(x2,y2) in (F_q^x)^2 bucketed by
    (x+y, xbar+ybar); rationality of the moment lets the q-th roots of
    unity collapse to two integer coefficients.  O(q^2) time, exact
    integer arithmetic throughout.
    """
    mod = make_prime_modulus(q)
    inv = mod.inverse_table
    x = np.arange(1, q, dtype=np.int64)
    sums = (x[:, None] + x[None, :]) % q
    invs = (inv[1:, None] + inv[None, 1:]) % q
    counts = np.zeros((q, q), dtype=np.int64)
    np.add.at(counts, (invs.ravel(), sums.ravel()), 1)
    c0 = int((counts.astype(object) ** 2).sum())
    row = counts.sum(axis=1).astype(object)
    p_tot = int((row**2).sum())
    c1, rem = divmod(p_tot - c0, q - 1)
    if rem:
        raise ArithmeticError("fourth-moment coefficient failed to collapse")
    return q * (c0 - c1) - 1


def kloosterman_fourth_moment_closed_form(q: int) -> int:
    """2q^3 - 3q^2 - 3q - 1, the classical fourth-moment evaluation."""
    return 2 * q**3 - 3 * q**2 - 3 * q - 1


# ---------------------------------------------------------------------------
# bilinear forms
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class BilinearResult:
    value: complex
    bound_ratio: float


def bilinear_form(K: TraceFunction, alpha: CoefficientSequence,
                  beta: CoefficientSequence) -> BilinearResult:
    """B = sum_{m,n} alpha_m beta_n K(mn mod q) plus its ratio against
    ||alpha|| ||beta|| (MN)^(1/2) (1/M + sqrt(q) log q / N)^(1/2)."""
    mod = _require_prime(K)
    q = mod.q
    M, N = len(alpha.values), len(beta.values)
    if alpha.offset + M > q or beta.offset + N > q:
        raise InvalidArgumentError("coefficient ranges must stay below q")
    m = alpha.indices
    n = beta.indices
    grid = K.values[(m[:, None] * n[None, :]) % q]
    value = complex(alpha.values @ grid @ beta.values)
    scale = (alpha.l2() * beta.l2() * math.sqrt(M * N)
             * math.sqrt(1.0 / M + math.sqrt(q) * math.log(q) / N))
    return BilinearResult(value, abs(value) / scale)


# ---------------------------------------------------------------------------
# sums over primes and the Heath-Brown identity
# ---------------------------------------------------------------------------

def prime_sum(K: TraceFunction, X: int, tables: ArithmeticTables,
              V: Optional[SmoothBump] = None) -> complex:
    """sum_{p <= X} K(p mod q), or the V-smoothed variant sum_p K(p) V(p/X)."""
    if X > tables.limit:
        raise InvalidArgumentError(f"X={X} beyond sieve limit {tables.limit}")
    ps = tables.primes[: tables.prime_count(X)] if V is None else tables.primes
    vals = K.values[ps % K.q]
    if V is None:
        return complex(vals.sum())
    return complex((vals * V(ps / X)).sum())


def prime_sum_cancellation(K: TraceFunction, X: int, tables: ArithmeticTables) -> float:
    """|sum_{p <= X} K(p)| / pi(X), the empirical cancellation ratio."""
    count = tables.prime_count(X)
    return abs(prime_sum(K, X, tables)) / count


def heath_brown_check(n: int, J: int, X: int, tables: ArithmeticTables) -> dict:
    """Exact decomposition of Lambda(n): the J-term alternating sum of
    Mobius-truncated convolutions, valid for n < 2X with Z = X^(1/J).

    Returns lhs = Lambda(n), the reconstructed rhs, and their difference.
    """
    if n >= 2 * X:
        raise InvalidArgumentError("identity requires n < 2X")
    if n > HEATH_BROWN_CEILING:
        raise CapacityError(f"n={n} beyond combinatorial guard")
    if n > tables.limit:
        raise InvalidArgumentError("n beyond sieve limit")
    Z = X ** (1.0 / J) + 1e-9
    rhs = 0.0
    for j in range(1, J + 1):
        inner = _hb_inner(n, j, Z, tables)
        rhs -= (-1) ** j * math.comb(J, j) * inner
    lhs = float(tables.vmangoldt[n])
    return {"n": n, "lhs": lhs, "rhs": rhs, "delta": abs(lhs - rhs)}


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _hb_inner(n: int, j: int, Z: float, tables: ArithmeticTables) -> float:
    """sum over m_1..m_j <= Z, m_1..m_j n_1..n_j = n of mu(m_1)..mu(m_j) log n_1."""
    mu = tables.mu

    def mob_tuples(m: int, depth: int) -> int:
        # number of ordered factorizations of m into `depth` factors <= Z,
        # weighted by the product of their Mobius values
        if depth == 0:
            return 1 if m == 1 else 0
        total = 0
        for d in _divisors(m):
            if d <= Z and mu[d] != 0:
                total += int(mu[d]) * mob_tuples(m // d, depth - 1)
        return total

    def log_tuples(m: int, depth: int) -> float:
        # sum over ordered factorizations m = n_1 ... n_depth of log n_1
        if depth == 0:
            return 0.0
        if depth == 1:
            return math.log(m)
        total = 0.0
        for d in _divisors(m):
            total += math.log(d) * _ordered_factorizations(m // d, depth - 1)
        return total

    total = 0.0
    for m in _divisors(n):
        w = mob_tuples(m, j)
        if w:
            total += w * log_tuples(n // m, j)
    return total


def _ordered_factorizations(m: int, depth: int) -> int:
    if depth == 1:
        return 1
    return sum(_ordered_factorizations(m // d, depth - 1) for d in _divisors(m))


def heath_brown_max_error(J: int, X: int, tables: ArithmeticTables) -> float:
    """max over all n < 2X of |Lambda(n) - rhs|, via sieve convolutions.

    w_j = (mu restricted below Z) convolved j times, c_j = log (*) d_{j-1};
    rhs = -sum_j (-1)^j C(J,j) (w_j * c_j).  O(X log X) per level.
    """
    limit = 2 * X - 1
    if limit > tables.limit:
        raise InvalidArgumentError("sieve tables too small for 2X-1")
    Z = X ** (1.0 / J) + 1e-9
    size = limit + 1

    def dirichlet(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(size, dtype=np.float64)
        for d in range(1, size):
            ad = a[d]
            if ad:
                out[d::d] += ad * b[1 : (limit // d) + 1]
        return out

    w = np.zeros(size, dtype=np.float64)
    zcap = int(Z)
    w[1 : zcap + 1] = tables.mu[1 : zcap + 1]
    ones = np.ones(size, dtype=np.float64)
    ones[0] = 0.0
    logs = np.zeros(size, dtype=np.float64)
    logs[1:] = np.log(np.arange(1, size))

    rhs = np.zeros(size, dtype=np.float64)
    w_j = None
    d_prev = None  # ordered factorizations into j-1 parts
    for j in range(1, J + 1):
        w_j = w.copy() if w_j is None else dirichlet(w_j, w)
        if j == 1:
            c_j = logs.copy()
            d_prev = ones.copy()
        else:
            c_j = dirichlet(logs, d_prev)
            d_prev = dirichlet(d_prev, ones)
        rhs -= (-1) ** j * math.comb(J, j) * dirichlet(w_j, c_j)
    lhs = tables.vmangoldt[: size]
    return float(np.abs(lhs[1:] - rhs[1:]).max())


# ---------------------------------------------------------------------------
# divisor functions in arithmetic progressions
# ---------------------------------------------------------------------------

def divisor_in_ap(k: int, X: int, q: int, a: int,
                  tables: ArithmeticTables) -> DiscrepancyReport:
    """E(d_k; q, a) = sum_{n <= X, n = a (q)} d_k(n)
    - (1/phi(q)) sum_{n <= X, (n,q)=1} d_k(n), for prime q."""
    if k not in (2, 3):
        raise InvalidArgumentError("only d_2 and d_3 are tabulated")
    if X > tables.limit:
        raise InvalidArgumentError("X beyond sieve limit")
    if a % q == 0:
        raise InvalidArgumentError("gcd(a, q) must be 1")
    d = tables.d2 if k == 2 else tables.d3
    n = np.arange(1, X + 1)
    dn = d[1 : X + 1].astype(np.float64)
    prog = float(dn[(n % q) == (a % q)].sum())
    coprime = float(dn[(n % q) != 0].sum()) / (q - 1)
    return DiscrepancyReport(k=k, X=X, q=q, a=a % q,
                             progression_sum=prog, coprime_average=coprime)


# ---------------------------------------------------------------------------
# smoothed product sums and the q-van der Corput sum
# ---------------------------------------------------------------------------

def smoothed_product_sum(K: TraceFunction, a: int, Ns: Sequence[float],
                         V: SmoothBump) -> complex:
    """sum over (n_1..n_d) of K(a * n_1...n_d mod q) * prod V(n_i/N_i)."""
    dims = len(Ns)
    if dims not in (2, 3):
        raise InvalidArgumentError("dims must be 2 or 3")
    if np.prod([max(n, 1.0) for n in Ns]) > PRODUCT_SUM_CEILING:
        raise CapacityError("product support exceeds cost ceiling")
    q = K.q
    supports = [V.support_integers(N) for N in Ns]
    weights = [V(s / N) for s, N in zip(supports, Ns)]
    if any(len(s) == 0 for s in supports):
        return 0.0 + 0.0j
    total = 0.0 + 0.0j
    if dims == 2:
        n2 = supports[1]
        w2 = weights[1]
        for n1, w1 in zip(supports[0], weights[0]):
            idx = (a * n1 % q) * n2 % q
            total += w1 * (w2 * K.values[idx]).sum()
        return complex(total)
    n3 = supports[2]
    w3 = weights[2]
    for n1, w1 in zip(supports[0], weights[0]):
        a1 = a * n1 % q
        for n2, w2 in zip(supports[1], weights[1]):
            idx = (a1 * n2 % q) * n3 % q
            total += w1 * w2 * (w3 * K.values[idx]).sum()
    return complex(total)


@dataclass(eq=False)
class VdcResult:
    value: complex
    bound_ratio: float
    p: int
    q: int
    N: float


def vdc_sum(Kp: TraceFunction, Kq: TraceFunction, N: float, V: SmoothBump) -> VdcResult:
    """S = sum_n Kp(n mod p) Kq(n mod q) V(n/N) for the bimodular product,
    with bound_ratio = |S| / (N^(1/2) (p + q^(1/2))^(1/2))."""
    p, q = Kp.q, Kq.q
    if 2 * N >= p * q:
        raise InvalidArgumentError("need 2N < pq")
    ns = V.support_integers(N)
    S = complex((Kp.values[ns % p] * Kq.values[ns % q] * V(ns / N)).sum())
    scale = math.sqrt(N) * math.sqrt(p + math.sqrt(q))
    return VdcResult(S, abs(S) / scale, p, q, N)


# ---------------------------------------------------------------------------
# Burgess complete sums
# ---------------------------------------------------------------------------

def tuple_exponents(b: ShiftTuple, q: int) -> dict[int, int]:
    """Multiplicity of each shift mod q in the fraction prod(X+b_i)/prod(X+b_{l+i})."""
    exps: dict[int, int] = {}
    for v in b.left:
        exps[v % q] = exps.get(v % q, 0) + 1
    for v in b.right:
        exps[v % q] = exps.get(v % q, 0) - 1
    return {v: e for v, e in exps.items() if e != 0}


def classify_tuple(b: ShiftTuple, q: PrimeModulus, m: int) -> bool:
    """True when the tuple is good for the character of index m: the shift
    fraction is neither constant nor an ord(chi)-th power, so the complete
    sum obeys the square-root bound."""
    order = (q.q - 1) // math.gcd(m % (q.q - 1), q.q - 1)
    exps = tuple_exponents(b, q.q)
    if not exps:
        return False  # constant fraction
    return any(e % order != 0 for e in exps.values())


def burgess_complete_sum(q: PrimeModulus, m: int, b: ShiftTuple) -> complex:
    """sum_{r in F_q} chi_m(F_b(r)) with F_b = prod(X+b_i)/prod(X+b_{l+i}).

    Terms where any factor of the written fraction vanishes contribute 0,
    even when numerator and denominator factors would cancel.
    """
    if m % (q.q - 1) == 0:
        raise InvalidArgumentError("character index must be nonzero")
    Q = q.q
    r = np.arange(Q, dtype=np.int64)
    dead = np.zeros(Q, dtype=bool)
    for v in b.entries:
        dead |= (r + v) % Q == 0
    log_sum = np.zeros(Q, dtype=np.int64)
    for v, e in tuple_exponents(b, Q).items():
        pts = (r + v) % Q
        log_sum += e * q.dlog[np.where(pts == 0, 1, pts)]
    vals = np.exp(2j * np.pi * (m % (Q - 1)) * (log_sum % (Q - 1)) / (Q - 1))
    vals[dead] = 0.0
    return complex(vals.sum())


def burgess_sweep(q: PrimeModulus, m: int, l: int, lo: int, hi: int,
                  chunk: int = 4096):
    """Exhaustive (good/bad, |sum|) classification over all tuples in
    [lo, hi]^(2l).  Yields (tuple, good, |sum|) lazily in lexicographic
    order; dlog batching keeps it vectorized over r."""
    Q = q.q
    order = (Q - 1) // math.gcd(m % (Q - 1), Q - 1)
    shifts = np.arange(lo, hi + 1, dtype=np.int64)
    width = len(shifts)
    # dlog[(r + t) mod q] and zero positions, per shift value
    r = np.arange(Q, dtype=np.int64)
    pts = (r[None, :] + shifts[:, None]) % Q
    zero_mask = pts == 0
    dl = q.dlog[np.where(zero_mask, 1, pts)]
    total = width ** (2 * l)
    for flat_start in range(0, total, chunk):
        count = min(chunk, total - flat_start)
        flat = np.arange(flat_start, flat_start + count)
        digits = np.empty((count, 2 * l), dtype=np.int64)
        rem = flat.copy()
        for pos in range(2 * l - 1, -1, -1):
            digits[:, pos] = rem % width
            rem //= width
        sign = np.ones(2 * l, dtype=np.int64)
        sign[l:] = -1
        log_sum = np.einsum("cd,cdr->cr", np.broadcast_to(sign, (count, 2 * l)),
                            dl[digits], optimize=True)
        dead_r = zero_mask[digits].any(axis=1)  # (count, Q)
        vals = np.exp(2j * np.pi * (m % (Q - 1)) * (log_sum % (Q - 1)) / (Q - 1))
        vals[dead_r] = 0.0
        sums = np.abs(vals.sum(axis=1))
        for row in range(count):
            entries = tuple(int(shifts[d]) for d in digits[row])
            tup = ShiftTuple(entries, l, (lo, hi))
            exps: dict[int, int] = {}
            for v in entries[:l]:
                exps[v % Q] = exps.get(v % Q, 0) + 1
            for v in entries[l:]:
                exps[v % Q] = exps.get(v % Q, 0) - 1
            exps = {v: e for v, e in exps.items() if e}
            good = bool(exps) and any(e % order for e in exps.values())
            yield tup, good, float(sums[row])


# ---------------------------------------------------------------------------
# +ab-shift sums
# ---------------------------------------------------------------------------

def shift_sums(K: TraceFunction, r: int, b: ShiftTuple) -> dict:
    """The one-variable product K(r,b) = prod K(r+b_i) conj(K(r+b_{i+l}))
    and its completed companion R(r,b) = sum_s K(sr, s*b)."""
    mod = _require_prime(K)
    q = mod.q
    kbig = 1.0 + 0.0j
    for bi in b.left:
        kbig *= K.values[(r + bi) % q]
    for bi in b.right:
        kbig *= np.conj(K.values[(r + bi) % q])
    s = np.arange(q, dtype=np.int64)
    acc = np.ones(q, dtype=np.complex128)
    for bi in b.left:
        acc *= K.values[s * ((r + bi) % q) % q]
    for bi in b.right:
        acc *= np.conj(K.values[s * ((r + bi) % q) % q])
    return {"Kbig": complex(kbig), "Rbig": complex(acc.sum())}


def shift_completion_candidates(K: TraceFunction, r: int, b: ShiftTuple,
                                kl2_values: np.ndarray) -> dict:
    """For K = e_q(xbar + x): compares R(r,b) against sqrt(q) Kl_2(A*B)
    and sqrt(q) Kl_2(A/B), where A = sum(1/(r+b_i) - 1/(r+b_{i+l})) and
    B = sum(b_i - b_{i+l}); reports which candidate matches."""
    mod = _require_prime(K)
    q = mod.q
    inv = mod.inverse_table
    A = 0
    for bi in b.left:
        A += int(inv[(r + bi) % q])
    for bi in b.right:
        A -= int(inv[(r + bi) % q])
    A %= q
    B = (sum(b.left) - sum(b.right)) % q
    rbig = shift_sums(K, r, b)["Rbig"]
    out = {"Rbig": rbig, "A": A, "B": B}
    if A == 0 or B == 0:
        out["degenerate"] = True
        return out
    prod_c = math.sqrt(q) * kl2_values[A * B % q]
    ratio_c = math.sqrt(q) * kl2_values[A * int(inv[B]) % q]
    out["err_product"] = abs(rbig - prod_c)
    out["err_ratio"] = abs(rbig - ratio_c)
    out["matching"] = "product" if out["err_product"] <= out["err_ratio"] else "ratio"
    return out


def type2_complete_sum(K: TraceFunction, b: ShiftTuple) -> complex:
    """sum_r |R(r,b)|^2 - q * sum_r |K(r,b)|^2, the complete sum whose
    square-root cancellation drives the type-II +ab-shift bound."""
    mod = _require_prime(K)
    q = mod.q
    r = np.arange(q, dtype=np.int64)
    s = np.arange(q, dtype=np.int64)
    kbig = np.ones(q, dtype=np.complex128)
    for bi in b.left:
        kbig *= K.values[(r + bi) % q]
    for bi in b.right:
        kbig *= np.conj(K.values[(r + bi) % q])
    # R over all r at once: (q, q) grid of s*(r+b_i)
    rb_sum = np.zeros(q, dtype=np.float64)
    acc = np.ones((q, q), dtype=np.complex128)
    for bi in b.left:
        acc *= K.values[s[None, :] * ((r[:, None] + bi) % q) % q]
    for bi in b.right:
        acc *= np.conj(K.values[s[None, :] * ((r[:, None] + bi) % q) % q])
    rbig = acc.sum(axis=1)
    return complex((np.abs(rbig) ** 2).sum() - q * (np.abs(kbig) ** 2).sum())


def ab_shift_sum(K: TraceFunction, alpha: CoefficientSequence, N: float,
                 V: SmoothBump, l: int = 2) -> dict:
    """B_V(K, alpha, N) = sum_m alpha_m sum_n V(n/N) K(mn mod q), with the
    report-only ratio against MN (N^2 M / q^(1+1/l))^(-1/2l)."""
    mod = _require_prime(K)
    q = mod.q
    M = len(alpha.values)
    if M * N >= q:
        raise InvalidArgumentError("need MN < q")
    ns = V.support_integers(N)
    w = V(ns / N)
    total = 0.0 + 0.0j
    for m, am in zip(alpha.indices, alpha.values):
        total += am * (w * K.values[(m % q) * ns % q]).sum()
    trivial = M * N
    target = trivial * (N * N * M / q ** (1.0 + 1.0 / l)) ** (-1.0 / (2 * l))
    return {"value": complex(total), "trivial": trivial,
            "ratio_vs_trivial": abs(total) / trivial,
            "ratio_vs_shift_bound": abs(total) / target, "l": l}
