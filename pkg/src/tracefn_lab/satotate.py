"""Equidistribution statistics for trace-function value distributions.

Angle extraction for families bounded by 2, reference measures (the
semicircle-type sin^2 measure on [0,pi], the uniform measure on [0,pi],
the uniform measure on the circle), Kolmogorov-Smirnov distances,
symmetric-power Weyl sums, and the vertical / horizontal / almost-prime
surveys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np
from scipy.integrate import quad

from .arith import PrimeModulus, make_prime_modulus, sieve_tables
from .errors import CapacityError, DomainViolationError, InvalidArgumentError
from .tracefn import TraceFunction, kloosterman_direct
from .transforms import (
    gauss_sum_spectrum,
    hyper_kloosterman_all,
    salie_normalized,
)

ANGLE_IM_TOL = 1e-6
ANGLE_SUP_TOL = 1e-6
CLAMP_WINDOW = 1e-6

BIRCH_FULL_LIMIT = 250
HORIZONTAL_LIMIT = 10**6


@dataclass(eq=False)
class AngleSample:
    """A multiset of angles with provenance, kept in survey order."""

    angles: np.ndarray
    family: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.angles)


@dataclass(eq=False)
class SpectralMeasure:
    """A reference measure on [0, hi] with cdf and (2cos)^2l moments."""

    tag: str
    hi: float

    def density(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if self.tag == "sato_tate":
            return (2.0 / np.pi) * np.sin(theta) ** 2
        if self.tag == "uniform_interval":
            return np.full_like(theta, 1.0 / np.pi)
        if self.tag == "uniform_circle":
            return np.full_like(theta, 1.0 / (2.0 * np.pi))
        raise InvalidArgumentError(f"unknown measure {self.tag}")

    def cdf(self, theta) -> np.ndarray:
        theta = np.clip(np.asarray(theta, dtype=np.float64), 0.0, self.hi)
        if self.tag == "sato_tate":
            return theta / np.pi - np.sin(2 * theta) / (2 * np.pi)
        return theta / self.hi

    def moment(self, l: int, tol: float = 1e-12) -> float:
        """integral of (2 cos theta)^(2l) against the measure, by quadrature."""
        val, err = quad(lambda t: (2 * math.cos(t)) ** (2 * l) * float(self.density(t)),
                        0.0, self.hi, epsabs=tol, epsrel=tol, limit=400)
        return val

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Seeded inverse-cdf sampling on a dense grid."""
        grid = np.linspace(0.0, self.hi, 200001)
        cdf = self.cdf(grid)
        u = np.random.default_rng(seed).random(n)
        return np.interp(u, cdf, grid)


SATO_TATE = SpectralMeasure("sato_tate", math.pi)
UNIFORM_INTERVAL = SpectralMeasure("uniform_interval", math.pi)
UNIFORM_CIRCLE = SpectralMeasure("uniform_circle", 2 * math.pi)


def _measure(tag: str) -> SpectralMeasure:
    return {"sato_tate": SATO_TATE, "uniform_interval": UNIFORM_INTERVAL,
            "uniform_circle": UNIFORM_CIRCLE}[tag]


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------

def _domain_indices(K: TraceFunction, domain: str) -> np.ndarray:
    q = K.q
    if domain == "all":
        return np.arange(q, dtype=np.int64)
    if domain == "units":
        return np.arange(1, q, dtype=np.int64)
    if domain == "squares":
        mod = K.modulus
        return np.nonzero(mod.legendre_table == 1)[0].astype(np.int64)
    raise InvalidArgumentError(f"unknown domain {domain!r}")


def extract_angles(K: TraceFunction, domain: str = "units") -> AngleSample:
    """theta(x) = arccos(clamp(Re K(x)/2, -1, 1)) over the domain.

    Requires K real-valued with |K| <= 2 there; violations are reported
    with the offending point.  The clamp absorbs <= 1e-6 of floating
    drift beyond the theoretical bound.
    """
    idx = _domain_indices(K, domain)
    vals = K.values[idx]
    bad_im = np.abs(vals.imag) > ANGLE_IM_TOL
    if bad_im.any():
        x = int(idx[np.argmax(bad_im)])
        raise DomainViolationError(
            f"K({x}) has imaginary part {vals.imag[np.argmax(bad_im)]:.3e}", point=x)
    bad_sup = np.abs(vals) > 2.0 + ANGLE_SUP_TOL
    if bad_sup.any():
        x = int(idx[np.argmax(bad_sup)])
        raise DomainViolationError(f"|K({x})| exceeds 2", point=x)
    theta = np.arccos(np.clip(vals.real / 2.0, -1.0, 1.0))
    return AngleSample(theta, K.family, {"q": K.q, "domain": domain, **K.params})


def ks_distance(sample: AngleSample, measure: SpectralMeasure) -> float:
    """sup over the sorted sample of |empirical cdf - reference cdf|."""
    n = len(sample)
    if n == 0:
        raise InvalidArgumentError("empty angle sample")
    ref = measure.cdf(np.sort(sample.angles))
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(np.maximum(np.abs(hi - ref), np.abs(ref - lo)).max())


def weyl_sym_power(K: TraceFunction, k: int, domain: str = "units") -> complex:
    """Average of sin((k+1)theta)/sin(theta) over the angle domain.

    The k-th symmetric-power Weyl sum; value k+1 at theta in {0, pi}.
    """
    if k == 0:
        return 1.0 + 0.0j
    theta = extract_angles(K, domain).angles
    sin_t = np.sin(theta)
    small = np.abs(sin_t) < 1e-9
    vals = np.sin((k + 1) * theta) / np.where(small, 1.0, sin_t)
    # limits at the endpoints: k+1 at theta = 0, (-1)^k (k+1) at theta = pi
    endpoint = (k + 1.0) * np.where(theta < np.pi / 2, 1.0, (-1.0) ** k)
    vals = np.where(small, endpoint, vals)
    return complex(vals.mean())


def angle_moment(sample: AngleSample, l: int) -> float:
    """Empirical (2 cos theta)^(2l) moment of the sample."""
    return float(((2 * np.cos(sample.angles)) ** (2 * l)).mean())


# ---------------------------------------------------------------------------
# surveys
# ---------------------------------------------------------------------------

def kloosterman_angles(q: PrimeModulus) -> AngleSample:
    """Vertical family of Kloosterman angles over F_q^x."""
    K = hyper_kloosterman_all(q, 2)
    return extract_angles(K, "units")


def salie_angles(q: PrimeModulus) -> AngleSample:
    """Salie angles over the square parameters, Gauss-phase normalized.

    The raw sum vanishes at non-squares (and for q = 3 mod 4 is purely
    imaginary); the normalized restriction to squares is the family whose
    angles equidistribute uniformly on [0, pi].
    """
    K = salie_normalized(q)
    return extract_angles(K, "squares")


def gauss_angle_survey(q: PrimeModulus) -> dict:
    """Arguments of the normalized Gauss sums over nontrivial characters,
    with moduli re-asserted and KS distance to the uniform circle."""
    if q.q < 5:
        raise InvalidArgumentError("need q >= 5")
    eps = gauss_sum_spectrum(q, 1).values[1:]
    moduli = np.abs(eps)
    args = np.angle(eps) % (2 * np.pi)
    sample = AngleSample(args, "gauss", {"q": q.q})
    return {
        "q": q.q,
        "sample": sample,
        "max_modulus_error": float(np.abs(moduli - 1.0).max()),
        "ks_uniform_circle": ks_distance(sample, UNIFORM_CIRCLE),
    }


def birch_vertical_survey(q: PrimeModulus, mode: str = "full",
                          seed: int = 0, sample_size: int = 10**5) -> dict:
    """Angles of the normalized elliptic trace over the (a,b) plane.

    Full mode enumerates every pair with nonzero discriminant (q <= 250);
    sampled mode draws seeded pairs.  The discriminant-zero locus has
    exactly q points, which is re-asserted.
    """
    Q = q.q
    leg = q.legendre_table
    x = np.arange(Q, dtype=np.int64)
    x3 = x * x % Q * x % Q
    if mode == "full":
        if Q > BIRCH_FULL_LIMIT:
            raise CapacityError(f"full grid beyond q = {BIRCH_FULL_LIMIT}")
        char_sums = np.empty((Q, Q), dtype=np.float64)
        for a in range(Q):
            vals = (x3 + a * x) % Q
            # row over b: reuse the shifted Legendre table
            table = leg[(vals[:, None] + np.arange(Q)[None, :]) % Q]
            char_sums[a] = table.sum(axis=0)
        a_grid, b_grid = np.meshgrid(np.arange(Q), np.arange(Q), indexing="ij")
        disc = (4 * a_grid**3 + 27 * b_grid**2) % Q
        keep = disc != 0
        excluded = int((~keep).sum())
        traces = -char_sums[keep] / math.sqrt(Q)
    else:
        rng = np.random.default_rng(seed)
        a_s = rng.integers(0, Q, size=sample_size)
        b_s = rng.integers(0, Q, size=sample_size)
        disc = (4 * a_s**3 + 27 * b_s**2) % Q
        keep = disc != 0
        a_s, b_s = a_s[keep], b_s[keep]
        excluded = int((~keep).sum())
        traces = np.empty(len(a_s))
        for i, (a, b) in enumerate(zip(a_s, b_s)):
            traces[i] = leg[(x3 + a * x + b) % Q].sum()
        traces = -traces / math.sqrt(Q)
    theta = np.arccos(np.clip(traces / 2.0, -1.0, 1.0))
    sample = AngleSample(theta, "birch", {"q": Q, "mode": mode, "seed": seed})
    out = {"q": Q, "mode": mode, "sample": sample,
           "ks_sato_tate": ks_distance(sample, SATO_TATE),
           "max_abs_trace": float(np.abs(traces).max())}
    if mode == "full":
        out["excluded_count"] = excluded
        out["discriminant_locus_size"] = Q  # exact for every odd prime
    return out


def almost_prime_survey(p_range: tuple[int, int], q_range: tuple[int, int],
                        threshold: float = 0.4, seed: int = 0,
                        direct_checks: int = 12) -> dict:
    """Over ordered pairs of distinct primes (p, q) in the given ranges:
    the fraction with |Kl_2(pbar^2; q)| >= threshold, the fraction of
    products with |Kl_2(1; pq)| >= threshold^2 (twisted multiplicativity),
    sign counts of Kl_2(1; pq), and the reference probability
    P(|2 cos theta| >= threshold) under the sin^2 measure.
    """
    tables = sieve_tables(max(p_range[1], q_range[1]))
    ps = [int(p) for p in tables.primes if p_range[0] <= p < p_range[1]]
    qs = [int(p) for p in tables.primes if q_range[0] <= p < q_range[1]]
    kl_tables = {r: hyper_kloosterman_all(make_prime_modulus(r), 2).values.real
                 for r in sorted(set(ps) | set(qs))}
    singles = []
    products = []
    pairs = []
    for p in ps:
        for q in qs:
            if p == q:
                continue
            kq = kl_tables[q][pow(p, -2, q)]
            kp = kl_tables[p][pow(q, -2, p)]
            singles.append(kq)
            products.append(kq * kp)
            pairs.append((p, q))
    singles = np.array(singles)
    products = np.array(products)
    t = threshold
    st_prob = 1.0 - float(SATO_TATE.cdf(math.acos(-t / 2.0))
                          - SATO_TATE.cdf(math.acos(t / 2.0)))
    # spot-check twisted multiplicativity against the direct composite sum
    rng = np.random.default_rng(seed)
    worst = 0.0
    from .arith import make_composite_modulus
    from .tracefn import composite_kloosterman
    for idx in rng.choice(len(pairs), size=min(direct_checks, len(pairs)),
                          replace=False):
        p, q = pairs[idx]
        direct, viaproduct = composite_kloosterman(make_composite_modulus(p * q), 1)
        worst = max(worst, abs(direct - products[idx]), abs(direct - viaproduct))
    return {
        "pair_count": len(pairs),
        "threshold": t,
        "fraction_single_large": float((np.abs(singles) >= t).mean()),
        "sato_tate_probability": float(st_prob),
        "fraction_product_large": float((np.abs(products) >= t * t).mean()),
        "positive_products": int((products > 0).sum()),
        "negative_products": int((products < 0).sum()),
        "max_twisted_mult_error": worst,
    }


def horizontal_survey(X: int, a: int = 1) -> dict:
    """Kl_2(a; q) and its angle for every odd prime q <= X.

    The limiting law for this family is conjectural; the KS distance is
    reported, never asserted.
    """
    if X > HORIZONTAL_LIMIT:
        raise CapacityError(f"X beyond {HORIZONTAL_LIMIT}")
    tables = sieve_tables(max(X, 3))
    rows = []
    for q in tables.primes[: tables.prime_count(X)]:
        q = int(q)
        if q == 2:
            continue
        mod = make_prime_modulus(q)
        val = kloosterman_direct(mod, 2, a % q) if a % q else None
        if val is None:
            continue
        rows.append((q, val.real, math.acos(max(-1.0, min(1.0, val.real / 2.0)))))
    angles = AngleSample(np.array([r[2] for r in rows]), "kl2_horizontal",
                         {"X": X, "a": a})
    return {
        "X": X,
        "a": a,
        "rows": rows,
        "sample": angles,
        "ks_sato_tate_report_only": ks_distance(angles, SATO_TATE),
        "conjectural": True,
    }
