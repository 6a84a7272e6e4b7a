"""Experiment suites: the shared engine behind the service and the CLI.

Each suite returns a plain report dict with a ``checks`` list; a check
records the statistic, the bound it is held against, the named classical
bound it instantiates, and pass/fail.  Suites are deterministic given
their parameters (the seed is part of the report).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from . import calibration
from .arith import (
    RationalFunctionModQ,
    make_composite_modulus,
    make_prime_modulus,
    sieve_tables,
)
from .errors import InvalidArgumentError
from .satotate import (
    SATO_TATE,
    UNIFORM_INTERVAL,
    AngleSample,
    almost_prime_survey,
    angle_moment,
    birch_vertical_survey,
    gauss_angle_survey,
    horizontal_survey,
    kloosterman_angles,
    ks_distance,
    salie_angles,
    weyl_sym_power,
)
from .sums import (
    BUMP,
    CoefficientSequence,
    ShiftTuple,
    ab_shift_sum,
    autocorrelation_spectrum,
    bilinear_form,
    burgess_sweep,
    divisor_in_ap,
    interval_refinement_ratio,
    heath_brown_check,
    heath_brown_max_error,
    is_paired_tuple,
    khan_ngo_sum,
    kloosterman_fourth_moment_closed_form,
    kloosterman_fourth_moment_oracle,
    moment,
    poisson_dual_sum,
    prime_sum_cancellation,
    pv_ratio,
    shift_completion_candidates,
    smoothed_sum,
    type2_complete_sum,
    vdc_sum,
)
from .tracefn import (
    TraceFunction,
    additive_phase,
    all_ones,
    composite_kloosterman,
    dirac,
    inverse_phase,
    kloosterman_direct,
    legendre_family,
    mult_translate,
)
from .transforms import (
    fourier,
    gauss_sum,
    gauss_sum_spectrum,
    hyper_kloosterman_all,
    mellin,
    mellin_inverse,
    mult_convolution,
    salie_normalized,
    voronoi_transform,
)

DEFAULT_SEED = 0x5EEDF00D

IDENTITY_TOL = 1e-8
ORTHOGONALITY_LIMIT = 503
GAUSS_GRID = (5, 13, 17, 101, 251, 503, 1009, 2003)
FOURIER_GRID = (5, 13, 101, 503, 1009, 2003)
POISSON_GRID = (101, 1009, 2003)
TWISTED_MULT_LIMIT = 30000
WEIL_LIMIT = 10**4
DELIGNE_LIMIT = 2003


def worker_count(requested: Optional[int] = None) -> int:
    """--threads flag if given, else TRACEFN_LAB_THREADS, else 1."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("TRACEFN_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map; results are gathered in item order so thread
    count never changes output."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class Suite:
    """Accumulates named checks and report data."""

    def __init__(self, command: str, params: dict, seed: int = DEFAULT_SEED):
        self.report = {"command": command, "params": params, "seed": seed,
                       "checks": [], "data": {}}

    def check(self, name: str, value: float, bound: float, *, kind: str = "max",
              reference: str = "", detail: Optional[dict] = None) -> bool:
        ok = value <= bound if kind == "max" else value >= bound
        entry = {"name": name, "value": float(value), "bound": float(bound),
                 "kind": kind, "passed": bool(ok), "reference": reference}
        if detail:
            entry["detail"] = detail
        self.report["checks"].append(entry)
        return ok

    def done(self) -> dict:
        self.report["status"] = (
            "pass" if all(c["passed"] for c in self.report["checks"]) else "fail")
        self.report["failures"] = [c["name"] for c in self.report["checks"]
                                   if not c["passed"]]
        return self.report


def primes_up_to(limit: int) -> list[int]:
    return [int(p) for p in sieve_tables(max(limit, 3)).primes if 3 <= p <= limit]


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def run_identities(q: int, seed: int = DEFAULT_SEED, *, deep: bool = False,
                   threads: Optional[int] = None) -> dict:
    """Every exact-identity suite at modulus q, each to 1e-8.

    deep=True additionally runs the large sweeps (orthogonality over all
    primes <= 503, Gauss/Fourier grids, the odd squarefree c <= 3e4
    twisted multiplicativity sweep, the n < 2e4 von Mangoldt
    decomposition): that is the acceptance configuration.
    """
    suite = Suite("identities", {"q": q, "deep": deep}, seed)
    mod = make_prime_modulus(q)
    rng = np.random.default_rng(seed)

    # character orthogonality: the transform of the constant family is
    # concentrated at the trivial character / frequency
    def orthogonality_defect(p: int) -> float:
        m = make_prime_modulus(p)
        ones = all_ones(m)
        f = fourier(ones, -1).values
        delta = np.abs(f - math.sqrt(p) * dirac(m, 0).values).max()
        mel = mellin(ones).values
        expected = np.zeros(p - 1, dtype=np.complex128)
        expected[0] = math.sqrt(p - 1)
        return max(float(delta), float(np.abs(mel - expected).max()))

    targets = primes_up_to(ORTHOGONALITY_LIMIT) if deep else [q]
    worst = max(_parallel_map(orthogonality_defect, targets,
                              worker_count(threads)))
    suite.check("orthogonality", worst, IDENTITY_TOL,
                reference="character orthogonality")

    # Gauss sums: unit modulus and the twist law eps(a) = conj(chi)(a) eps(1)
    def gauss_defect(p: int) -> tuple[float, float]:
        import scipy.fft as _fft

        m = make_prime_modulus(p)
        eps1 = gauss_sum_spectrum(m, 1).values
        mod_err = float(np.abs(np.abs(eps1[1:]) - 1.0).max())
        phases = m.e_q_table[np.outer(np.arange(1, p), m.pow_table) % p]
        # row a-1 transformed over the power index: eps_chi_m(a) for all m
        all_eps = _fft.ifft(phases, axis=1) * (p - 1) / math.sqrt(p)
        chi_bar = np.exp(-2j * np.pi
                         * np.outer(m.dlog[1:p], np.arange(p - 1)) / (p - 1))
        twist_err = float(np.abs(all_eps - chi_bar * eps1[None, :]).max())
        return mod_err, twist_err

    gauss_targets = [p for p in GAUSS_GRID if deep or p == q] or [q]
    results = _parallel_map(gauss_defect, gauss_targets, worker_count(threads))
    suite.check("gauss_unit_modulus", max(r[0] for r in results), IDENTITY_TOL,
                reference="Gauss sum modulus 1")
    suite.check("gauss_twist_law", max(r[1] for r in results), IDENTITY_TOL,
                reference="Gauss sum change of variable")
    eps_quad = [gauss_sum(make_prime_modulus(p), (p - 1) // 2, 1)
                for p in (5, 13, 17)]
    suite.check("quadratic_gauss_value", max(abs(e - 1) for e in eps_quad),
                IDENTITY_TOL, reference="quadratic Gauss sum, q = 1 mod 4")

    # Fourier involution and Plancherel on seeded random inputs
    def fourier_defect(p: int) -> float:
        m = make_prime_modulus(p)
        worst = 0.0
        local = np.random.default_rng(seed + p)
        for _ in range(5):
            vals = local.normal(size=p) + 1j * local.normal(size=p)
            K = TraceFunction(m, vals, "random")
            double = fourier(fourier(K, -1), -1).values
            target = vals[(-np.arange(p)) % p]
            worst = max(worst, float(np.abs(double - target).max()))
            worst = max(worst, abs((np.abs(fourier(K, -1).values) ** 2).sum()
                                   - (np.abs(vals) ** 2).sum()))
        return worst

    fourier_targets = [p for p in FOURIER_GRID if deep or p == q] or [q]
    worst = max(_parallel_map(fourier_defect, fourier_targets,
                              worker_count(threads)))
    suite.check("fourier_involution_plancherel", worst, IDENTITY_TOL,
                reference="Fourier involution / Plancherel")

    # psi * psi = Kl_2 and the convolution pipeline against the direct sum
    kl2 = hyper_kloosterman_all(mod, 2)
    psi = additive_phase(mod, RationalFunctionModQ((0, 1), q=q))
    conv = mult_convolution(psi, psi)
    suite.check("convolution_klooster", float(np.abs(conv.values - kl2.values).max()),
                IDENTITY_TOL, reference="Kl_2 as convolution square")
    worst = 0.0
    for p in primes_up_to(101) if deep else [min(q, 101)]:
        m = make_prime_modulus(p)
        for k in (2, 3, 4):
            table = hyper_kloosterman_all(m, k)
            points = np.random.default_rng(seed + 13 * p + k).integers(1, p, 10)
            for a in points:
                worst = max(worst, abs(table.values[a]
                                       - kloosterman_direct(m, k, int(a))))
    suite.check("hyper_klooster_direct", worst, IDENTITY_TOL,
                reference="hyper-Kloosterman convolution vs direct sum")
    # the Fourier step between consecutive hyper-Kloosterman ranks
    worst = 0.0
    for k in (2, 3, 4):
        kk = hyper_kloosterman_all(mod, k)
        nxt = hyper_kloosterman_all(mod, k + 1)
        x = np.arange(1, q)
        eq = mod.e_q_table
        for a in np.random.default_rng(seed + k).integers(1, q, 8):
            pred = (kk.values[x] * eq[int(a) * mod.inverse_table[x] % q]).sum()
            worst = max(worst, abs(pred / math.sqrt(q) - nxt.values[a]))
    suite.check("klooster_fourier_recursion", worst, IDENTITY_TOL,
                reference="rank recursion via Fourier transform")

    # twisted multiplicativity
    if deep:
        worst = _twisted_mult_sweep(TWISTED_MULT_LIMIT, threads=worker_count(threads))
    else:
        worst = 0.0
        for c in (15, 105, 1155) + ((3 * q,) if q > 5 else ()):
            cm = make_composite_modulus(c)
            for a in (1, 2):
                direct, factored = composite_kloosterman(cm, a)
                worst = max(worst, abs(direct - factored))
    suite.check("twisted_multiplicativity", worst, IDENTITY_TOL,
                reference="twisted multiplicativity")

    # Voronoi image of the Dirac function, on n in F_q^x (unit a only)
    worst = 0.0
    n = np.arange(1, q)
    for a in sorted({x % q for x in (1, 2, 5)} - {0}):
        vor = voronoi_transform(dirac(mod, a))
        pred = kl2.values[a * n % q] / math.sqrt(q)
        worst = max(worst, float(np.abs(vor.values[1:] - pred).max()))
    suite.check("voronoi_dirac", worst, IDENTITY_TOL,
                reference="Voronoi image of a Dirac function")

    # Mellin inversion, Parseval, and the eps^2 proportionality
    vals = rng.normal(size=q) + 1j * rng.normal(size=q)
    K = TraceFunction(mod, vals, "random")
    spec = mellin(K)
    recon = mellin_inverse(mod, spec)
    err_inv = float(np.abs(recon.values[1:] - K.values[1:]).max())
    err_par = abs((np.abs(spec.values) ** 2).sum()
                  - (np.abs(K.values[1:]) ** 2).sum())
    suite.check("mellin_inversion", err_inv, IDENTITY_TOL,
                reference="Mellin inversion")
    suite.check("mellin_parseval", err_par, IDENTITY_TOL,
                reference="Mellin Parseval")
    vor = voronoi_transform(K)
    mv = mellin(vor).values
    eps = gauss_sum_spectrum(mod, 1).values
    mk = spec.values
    ratios = []
    for m in range(1, q - 1):
        denom = eps[m] * mk[(-m) % (q - 1)]
        if abs(denom) > 1e-6:
            ratios.append(abs(mv[m] / denom))
    spread = max(ratios) - min(ratios) if ratios else 0.0
    suite.check("voronoi_mellin_proportionality", spread, IDENTITY_TOL,
                reference="Voronoi-Mellin proportionality",
                detail={"modulus": float(np.mean(ratios))})

    # Poisson dual-sum identity
    worst_kl2 = 0.0
    worst_general = 0.0
    targets = POISSON_GRID if deep else (q,)
    for p in targets:
        m = make_prime_modulus(p)
        kl = hyper_kloosterman_all(m, 2)
        families = [kl, legendre_family(m), inverse_phase(m), salie_normalized(m)]
        for N in (p / 20, p / 5, 50.0 if p == 101 else p / 10):
            lhs = smoothed_sum(kl, BUMP, N)
            worst_kl2 = max(worst_kl2, abs(lhs - poisson_dual_sum(kl, BUMP, N,
                                                                  sign=+1)))
            for fam in families:
                lhs = smoothed_sum(fam, BUMP, N)
                worst_general = max(worst_general,
                                    abs(lhs - poisson_dual_sum(fam, BUMP, N,
                                                               sign=-1)))
    suite.check("poisson_plus_sign", worst_kl2, IDENTITY_TOL,
                reference="Poisson dual sum, +1 kernel")
    suite.check("poisson_all_families", worst_general, IDENTITY_TOL,
                reference="Poisson dual sum")

    # Heath-Brown decomposition of von Mangoldt
    if deep:
        tables = sieve_tables(2 * 10**4)
        err = heath_brown_max_error(3, 10**4, tables)
        suite.check("heath_brown_full", err, IDENTITY_TOL,
                    reference="von Mangoldt decomposition")
        err2 = heath_brown_max_error(2, 10**3, tables)
        suite.check("heath_brown_j2", err2, IDENTITY_TOL,
                    reference="von Mangoldt decomposition")
    else:
        tables = sieve_tables(2000)
        worst = max(heath_brown_check(n, 2, 1000, tables)["delta"]
                    for n in (1, 4, 12, 30, 97, 360, 1997))
        suite.check("heath_brown_spot", worst, IDENTITY_TOL,
                    reference="von Mangoldt decomposition")

    # Kloosterman fourth moment: combinatorial oracle, then closed form
    worst = 0
    for p in (13, 101):
        oracle = kloosterman_fourth_moment_oracle(p)
        worst = max(worst, abs(oracle - kloosterman_fourth_moment_closed_form(p)))
    suite.check("fourth_moment_oracle", float(worst), 0.0,
                reference="Kloosterman fourth moment, exact count")
    p = 1009
    m4 = moment(hyper_kloosterman_all(make_prime_modulus(p), 2), 2)
    rel = abs(m4 * p**3 - kloosterman_fourth_moment_closed_form(p)) \
        / kloosterman_fourth_moment_closed_form(p)
    suite.check("fourth_moment_closed_form", rel, 1e-6,
                reference="Kloosterman fourth moment closed form")

    return suite.done()


def _twisted_mult_sweep(limit: int, threads: int = 1, amax: int = 2) -> float:
    """max over odd squarefree c <= limit, a in {1..amax} of the defect
    |direct Kl_2(a;c) - product over p|c|.

    Prime factors of composite c are at most limit/3, so their Kl_2
    tables are prefilled once and shared; prime c compares the direct
    unit sum against the single-point oracle instead.
    """
    from .arith import construct_prime_modulus

    tables = sieve_tables(limit)
    mu = tables.mu
    kl_cache = {p: hyper_kloosterman_all(make_prime_modulus(p), 2).values
                for p in primes_up_to(limit // 3)}
    cs = [c for c in range(3, limit + 1, 2) if mu[c] != 0]

    def defect(c: int) -> float:
        cm = make_composite_modulus(c)
        # conjugate symmetry x <-> c-x: the unit sum is twice the real
        # part of the half-range sum, so invert only units below c/2
        units = cm.units()
        half = units[: len(units) // 2]
        # method A inverse: Euler/Carmichael power, no factor structure
        inv = _vector_modinv(half, cm)
        single = len(cm.factors) == 1
        if single:
            # single-factor case: the product side is the direct point
            # oracle, whose inverse comes from the discrete-log table
            mod_c = (make_prime_modulus(c) if c <= limit // 3
                     else construct_prime_modulus(c))
        worst = 0.0
        for a in range(1, amax + 1):
            if any(a % p == 0 for p in cm.factors):
                continue
            phases = (inv + a * half) % c
            direct = 2.0 * np.exp(2j * np.pi * phases / c).sum().real \
                / math.sqrt(c)
            if single:
                prod = kloosterman_direct(mod_c, 2, a)
            else:
                prod = 1.0 + 0.0j
                for p in cm.factors:
                    prod *= kl_cache[p][a * cm.cofactor_inverses[p] ** 2 % p]
            worst = max(worst, abs(direct - prod))
        return worst

    results = _parallel_map(defect, cs, threads)
    return max(results)


def _vector_modinv(units: np.ndarray, cm) -> np.ndarray:
    from .arith import vector_modpow

    return vector_modpow(units, cm.carmichael - 1, cm.c)


# ---------------------------------------------------------------------------
# bound suites
# ---------------------------------------------------------------------------

def run_bounds(q: int, families: Sequence[str] = ("kl2", "legendre", "inverse_phase"),
               seed: int = DEFAULT_SEED, *, deep: bool = False,
               threads: Optional[int] = None) -> dict:
    """Weil/Deligne sup-norm sweeps plus completion-method ratio suites."""
    suite = Suite("bounds", {"q": q, "families": list(families), "deep": deep}, seed)

    def weil_defect(p: int) -> float:
        table = hyper_kloosterman_all(make_prime_modulus(p), 2)
        return float(np.abs(table.values[1:]).max()) - 2.0

    targets = primes_up_to(WEIL_LIMIT) if deep else [q]
    worst = max(_parallel_map(weil_defect, targets, worker_count(threads)))
    suite.check("weil_bound_kl2", worst, 1e-9, reference="Weil bound")

    def deligne_defect(p: int) -> float:
        m = make_prime_modulus(p)
        worst = 0.0
        for k in range(3, 7):
            table = hyper_kloosterman_all(m, k)
            worst = max(worst, float(np.abs(table.values[1:]).max()) - k)
        return worst

    targets = primes_up_to(DELIGNE_LIMIT) if deep else [q]
    worst = max(_parallel_map(deligne_defect, targets, worker_count(threads)))
    suite.check("deligne_bound_klk", worst, 1e-9, reference="Deligne bound")

    kl2_imag = float(np.abs(
        hyper_kloosterman_all(make_prime_modulus(q), 2).values.imag).max())
    suite.check("kl2_real", kl2_imag, 1e-9, reference="Kl_2 is real")

    grid = calibration.grid("pv_kl2") if deep else [q]
    fam_builders = {
        "kl2": lambda m: hyper_kloosterman_all(m, 2),
        "legendre": legendre_family,
        "inverse_phase": inverse_phase,
    }
    for fam in families:
        build = fam_builders[fam]
        suite_name = f"pv_{fam}"
        ratios = _parallel_map(lambda p: pv_ratio(build(make_prime_modulus(p))),
                               [p for p in grid if p <= 3000],
                               worker_count(threads))
        suite.check(suite_name, max(ratios), calibration.threshold(suite_name),
                    reference="Polya-Vinogradov bound")
    ratios = _parallel_map(
        lambda p: interval_refinement_ratio(hyper_kloosterman_all(make_prime_modulus(p), 2),
                               50, seed),
        calibration.grid("interval_refinement_kl2") if deep else [q], worker_count(threads))
    suite.check("interval_refinement_kl2", max(ratios), calibration.threshold("interval_refinement_kl2"),
                reference="Polya-Vinogradov range refinement")

    # quasi-orthogonality of multiplicative translates
    grid = calibration.grid("quasi_orthogonality_kl2") if deep else [q]
    worst, floor = 0.0, 1.0
    for p in grid:
        m = make_prime_modulus(p)
        spectrum = autocorrelation_spectrum(hyper_kloosterman_all(m, 2))
        offdiag = np.abs(np.delete(spectrum[1:], 0))  # a != 0, 1
        worst = max(worst, float(offdiag.max()) * math.sqrt(p))
        floor = min(floor, float(spectrum[1].real))
    suite.check("quasi_orthogonality_kl2", worst,
                calibration.threshold("quasi_orthogonality_kl2"),
                reference="quasi-orthogonality")
    suite.check("self_correlation_kl2", floor,
                calibration.threshold("self_correlation_kl2"), kind="min",
                reference="quasi-orthogonality diagonal")
    return suite.done()


# ---------------------------------------------------------------------------
# equidistribution suites
# ---------------------------------------------------------------------------

def _ks_threshold(suite_name: str, q: int) -> float:
    """Frozen threshold at the declared grid; below the grid the KS scale
    grows like 1/sqrt(sample), so the bound is widened by sqrt(q_grid/q)."""
    t = calibration.threshold(suite_name)
    gmin = min(calibration.grid(suite_name))
    return t if q >= gmin else t * math.sqrt(gmin / q)


def run_satotate(family: str, q_grid: Sequence[int], seed: int = DEFAULT_SEED,
                 threads: Optional[int] = None) -> dict:
    """Angle surveys with KS statistics and moment cross-checks.

    KS thresholds are the frozen values at their declared calibration
    grids, widened by the 1/sqrt(sample-size) scale for smaller moduli.
    """
    suite = Suite("satotate", {"family": family, "q_grid": list(q_grid)}, seed)
    rows = []
    for q in q_grid:
        mod = make_prime_modulus(q)
        params = None
        if family == "kl2":
            sample = kloosterman_angles(mod)
            params = np.arange(1, q)
            ks = ks_distance(sample, SATO_TATE)
            suite.check(f"ks_kl2_q{q}", ks, _ks_threshold("ks_kl2", q),
                        reference="vertical equidistribution, sin^2 law")
            K2 = hyper_kloosterman_all(mod, 2)
            for l, cl in ((1, 1.0), (2, 2.0), (3, 5.0)):
                err = abs(moment(K2, l) - cl)
                suite.check(f"moment_2l{l}_q{q}", err, 10.0**l / math.sqrt(q),
                            reference="moment method, sin^2 multiplicities")
            for k in range(1, 7):
                w = abs(weyl_sym_power(K2, k))
                suite.check(f"weyl_k{k}_q{q}", w,
                            calibration.threshold("weyl_kl2") / math.sqrt(q),
                            reference="Weyl equidistribution criterion")
        elif family == "salie":
            sample = salie_angles(mod)
            params = np.nonzero(mod.legendre_table == 1)[0]
            ks = ks_distance(sample, UNIFORM_INTERVAL)
            suite.check(f"ks_salie_q{q}", ks, _ks_threshold("ks_salie", q),
                        reference="Salie angles, uniform law")
            err = abs(angle_moment(sample, 1) - 2.0)
            suite.check(f"salie_m2_q{q}", err,
                        calibration.threshold("weyl_salie_m2") / math.sqrt(q),
                        reference="central binomial moments, uniform measure")
        elif family == "birch":
            if q <= 250:
                survey = birch_vertical_survey(mod, "full")
                suite.check(f"ks_birch_full_q{q}", survey["ks_sato_tate"],
                            _ks_threshold("ks_birch_full", q),
                            reference="vertical elliptic-family sin^2 law")
                suite.check(f"birch_disc_locus_q{q}",
                            abs(survey["excluded_count"] - q), 0.0,
                            reference="discriminant locus point count")
                sample = survey["sample"]
            else:
                from .tracefn import birch_family

                K = birch_family(mod, RationalFunctionModQ((0, 1), q=q),
                                 RationalFunctionModQ((1,), q=q))
                keep = np.nonzero(
                    (4 * np.arange(q, dtype=np.int64)**3 + 27) % q != 0)[0]
                theta = np.arccos(np.clip(K.values[keep].real / 2, -1, 1))
                sample = AngleSample(theta, "birch", {"q": q, "a": "T", "b": 1})
                params = keep
                suite.check(f"ks_birch_family_q{q}", ks_distance(sample, SATO_TATE),
                            _ks_threshold("ks_birch_family", q),
                            reference="one-parameter elliptic sin^2 law")
        elif family == "gauss":
            survey = gauss_angle_survey(mod)
            params = np.arange(1, q - 1)
            suite.check(f"gauss_modulus_q{q}", survey["max_modulus_error"], 1e-8,
                        reference="Gauss sum modulus 1")
            if q >= 100:
                suite.check(f"ks_gauss_q{q}", survey["ks_uniform_circle"],
                            _ks_threshold("ks_gauss", q),
                            reference="Gauss-sum argument equidistribution")
            sample = survey["sample"]
        else:
            raise InvalidArgumentError(f"unknown family {family!r}")
        if params is None:
            # surveys without a scalar parameter use the survey row index
            params = np.arange(len(sample.angles))
        for p, theta in zip(params, sample.angles):
            rows.append({"q": q, "family": family, "parameter": int(p),
                         "value": 2 * math.cos(float(theta)),
                         "theta": float(theta)})
    suite.report["data"]["rows"] = rows
    return suite.done()


# ---------------------------------------------------------------------------
# composite-modulus, Burgess and +ab-shift suites
# ---------------------------------------------------------------------------

def run_vdc(pairs: Sequence[tuple[int, int]], seed: int = DEFAULT_SEED,
            N_grid: Optional[Sequence[float]] = None,
            threads: Optional[int] = None) -> dict:
    """van der Corput ratio over (p, q) pairs; default N = (pq)^(2/3)."""
    suite = Suite("vdc", {"pairs": [list(p) for p in pairs],
                          "N_grid": list(N_grid) if N_grid else None}, seed)
    rows = []
    worst = 0.0
    for p, q in pairs:
        mp, mq = make_prime_modulus(p), make_prime_modulus(q)
        Kp = mult_translate(hyper_kloosterman_all(mp, 2), pow(q, -2, p))
        Kq = mult_translate(hyper_kloosterman_all(mq, 2), pow(p, -2, q))
        lengths = N_grid or [float(int((p * q) ** (2.0 / 3.0)))]
        for N in lengths:
            res = vdc_sum(Kp, Kq, N, BUMP)
            c16 = abs(res.value) / (math.sqrt(N) * (p * q) ** (1.0 / 6.0))
            rows.append({"p": p, "q": q, "N": N, "S": res.value,
                         "bound_ratio": res.bound_ratio, "c_sixth_ratio": c16})
            worst = max(worst, res.bound_ratio)
    suite.check("vdc_bound_ratio", worst, calibration.threshold("vdc"),
                reference="van der Corput bimodular bound")
    suite.report["data"]["rows"] = rows
    return suite.done()


def run_burgess(q: int, l: int = 2, B: int = 10, m: Optional[int] = None,
                box_lo: int = 1, seed: int = DEFAULT_SEED,
                threads: Optional[int] = None) -> dict:
    """Exhaustive complete-sum sweep over shift tuples in [box_lo, 2B]^(2l)."""
    mod = make_prime_modulus(q)
    m = m if m is not None else (q - 1) // 2
    suite = Suite("burgess", {"q": q, "l": l, "B": B, "m": m, "box_lo": box_lo}, seed)
    weil_scale = (2 * l - 1) * math.sqrt(q)
    worst_good = 0.0
    bad_count = 0
    good_count = 0
    violations = 0
    for tup, good, s in burgess_sweep(mod, m, l, box_lo, 2 * B):
        if good:
            good_count += 1
            worst_good = max(worst_good, s)
            if s > weil_scale + 1e-6:
                violations += 1
        else:
            bad_count += 1
    suite.check("burgess_good_weil", worst_good / math.sqrt(q),
                calibration.threshold("burgess_good_weil"),
                reference="Weil bound for shifted-fraction character sums",
                detail={"good": good_count, "bad": bad_count})
    suite.check("burgess_good_violations", float(violations), 0.0,
                reference="good/bad tuple classification")
    suite.report["data"].update({"tuples": good_count + bad_count,
                                 "good": good_count, "bad": bad_count,
                                 "max_good_sum": worst_good,
                                 "weil_scale": weil_scale})
    return suite.done()


def run_abshift(q: int, family: str = "inv_plus_x", M: int = 10, N: float = 100.0,
                l: int = 2, seed: int = DEFAULT_SEED,
                threads: Optional[int] = None) -> dict:
    """Type-I +ab-shift survey: B_V(K, alpha, N) plus the completed sums

    K(r,b), R(r,b), the Kloosterman completion adjudication, and the
    type-II complete sum at sampled good tuples.
    """
    mod = make_prime_modulus(q)
    suite = Suite("abshift", {"q": q, "family": family, "M": M, "N": N, "l": l},
                  seed)
    if family == "inv_plus_x":
        # e_q(xbar + x) = e_q((1 + x^2)/x)
        K = additive_phase(mod, RationalFunctionModQ((1, 0, 1), (0, 1), q=q))
    elif family == "kl3":
        K = hyper_kloosterman_all(mod, 3)
    else:
        raise InvalidArgumentError(f"unknown family {family!r}")
    alpha = CoefficientSequence.random_signs(M, seed)
    res = ab_shift_sum(K, alpha, N, BUMP, l)
    suite.report["data"]["type1"] = res

    rng = np.random.default_rng(seed)
    kl2 = hyper_kloosterman_all(mod, 2).values
    rows = []
    matches = {"product": 0, "ratio": 0}
    worst_t2 = 0.0
    diag_min = float("inf")
    n_tuples = 40
    for _ in range(n_tuples):
        entries = tuple(int(b) for b in rng.integers(10, 20, size=2 * l))
        tup = ShiftTuple.of(entries)
        lefts, rights = sorted(tup.left), sorted(tup.right)
        good = lefts != rights and (sum(tup.left) - sum(tup.right)) % q != 0
        if family == "inv_plus_x" and good:
            r = int(rng.integers(1, q))
            cand = shift_completion_candidates(K, r, tup, kl2)
            if "matching" in cand:
                matches[cand["matching"]] += 1
                rows.append({"r": r, "b": entries,
                             "err_product": cand["err_product"],
                             "err_ratio": cand["err_ratio"]})
        if good:
            t2 = abs(type2_complete_sum(K, tup))
            worst_t2 = max(worst_t2, t2 / q**1.5)
        else:
            diag = ShiftTuple.of(tup.left + tup.left)
            from .sums import shift_sums

            r_val = shift_sums(K, int(rng.integers(1, q)), diag)["Rbig"]
            diag_min = min(diag_min, r_val.real)
    if family == "inv_plus_x":
        suite.check("completion_is_product_form", float(matches["ratio"]), 0.0,
                    reference="Kloosterman completion of the shifted phase",
                    detail=matches)
        suite.report["data"]["completion_matches"] = matches
    if diag_min != float("inf"):
        suite.check("diagonal_positivity", diag_min, -1e-9, kind="min",
                    reference="diagonal completed sums are nonnegative")
    suite.check("type2_complete", worst_t2, calibration.threshold("type2_complete"),
                reference="type-II complete sum cancellation")
    suite.report["data"]["rows"] = rows
    return suite.done()


def run_khan_ngo(q: int = 499, lmax: int = 8, seed: int = DEFAULT_SEED) -> dict:
    """4-fold Kloosterman product sums over all tuples in [1, lmax]^4."""
    mod = make_prime_modulus(q)
    suite = Suite("khan_ngo", {"q": q, "lmax": lmax}, seed)
    K = hyper_kloosterman_all(mod, 2)
    worst_unpaired = 0.0
    min_paired = float("inf")
    for l1 in range(1, lmax + 1):
        for l2 in range(1, lmax + 1):
            for l3 in range(1, lmax + 1):
                for l4 in range(1, lmax + 1):
                    ells = (l1, l2, l3, l4)
                    s = khan_ngo_sum(K, ells)
                    if is_paired_tuple(ells):
                        min_paired = min(min_paired, s.real)
                    else:
                        worst_unpaired = max(worst_unpaired, abs(s))
    suite.check("khan_ngo_unpaired", worst_unpaired / math.sqrt(q),
                calibration.threshold("khan_ngo"),
                reference="sums of products of Kloosterman sums")
    suite.check("khan_ngo_paired_floor", min_paired / q,
                calibration.threshold("khan_ngo_paired_floor"), kind="min",
                reference="diagonal dominance of paired tuples")
    return suite.done()


# ---------------------------------------------------------------------------
# arithmetic-progression and prime suites
# ---------------------------------------------------------------------------

def run_dap(k: int, X: int, q: int, a: int, seed: int = DEFAULT_SEED) -> dict:
    suite = Suite("dap", {"k": k, "X": X, "q": q, "a": a}, seed)
    tables = sieve_tables(X)
    rep = divisor_in_ap(k, X, q, a, tables)
    recomputed = rep.progression_sum - rep.coprime_average
    suite.check("discrepancy_recompute", abs(recomputed - rep.discrepancy), 1e-9,
                reference="discrepancy bookkeeping")
    # the saving over X/q is asymptotic in X; at desk scale the ratio
    # fluctuates around 1 (and depends strongly on the residue class), so
    # it is reported, never asserted
    suite.report["data"]["report"] = {
        "progression_sum": rep.progression_sum,
        "coprime_average": rep.coprime_average,
        "discrepancy": rep.discrepancy,
        "reference_scale": rep.reference_scale,
        "ratio": rep.ratio,
        "ratio_times_logX": rep.ratio * math.log(X),
    }
    return suite.done()


def run_primesum(q: int, X: Optional[int] = None, family: str = "kl2",
                 seed: int = DEFAULT_SEED) -> dict:
    suite = Suite("primesum", {"q": q, "X": X or q, "family": family}, seed)
    X = X or q
    tables = sieve_tables(X)
    mod = make_prime_modulus(q)
    if family == "kl2":
        K = hyper_kloosterman_all(mod, 2)
    elif family == "inverse_phase":
        K = inverse_phase(mod)
    else:
        raise InvalidArgumentError(f"unknown family {family!r}")
    ratio = prime_sum_cancellation(K, X, tables)
    suite.check("prime_cancellation", ratio,
                calibration.threshold("prime_sum_cancellation"),
                reference="trace functions against primes")
    suite.report["data"]["ratio"] = ratio
    return suite.done()


def run_monotone_primesum(seed: int = DEFAULT_SEED) -> dict:
    """Cancellation improves from the small modulus to the large one."""
    suite = Suite("primesum_monotone", {"pairs": [[101, 4001]]}, seed)
    small = run_primesum(101, seed=seed)["data"]["ratio"]
    large = run_primesum(4001, seed=seed)["data"]["ratio"]
    suite.check("monotone_cancellation", large, small,
                reference="asymptotic cancellation, desk-scale check",
                detail={"q101": small, "q4001": large})
    return suite.done()


def run_horizontal(X: int, a: int = 1, seed: int = DEFAULT_SEED) -> dict:
    """Fixed-parameter Kloosterman angles over varying prime moduli.

    The limiting law is conjectural, so the KS distance is report-only by
    construction; rows carry (q, kl2, theta) for CSV emission.
    """
    suite = Suite("horizontal", {"X": X, "a": a}, seed)
    survey = horizontal_survey(X, a)
    suite.report["data"]["rows"] = [
        {"q": q, "kl2": v, "theta": t} for q, v, t in survey["rows"]]
    suite.report["data"]["ks_sato_tate_report_only"] = \
        survey["ks_sato_tate_report_only"]
    suite.report["data"]["conjectural"] = True
    suite.check("sample_size", float(len(survey["rows"])), 1.0, kind="min",
                reference="survey bookkeeping")
    return suite.done()


# ---------------------------------------------------------------------------
# calibrate mode
# ---------------------------------------------------------------------------

def run_calibrate(suites: Sequence[str], seed: int = DEFAULT_SEED,
                  threads: Optional[int] = None) -> dict:
    """Recompute observed maxima over the declared grids and propose
    frozen thresholds (2x observed).  Returns a manifest-shaped dict; the
    caller decides where to write it."""
    manifest = {"rule": calibration.load_manifest()["rule"], "suites": {}}
    current = calibration.load_manifest()["suites"]
    observations: dict[str, float] = {}
    for name in suites:
        if name not in current:
            raise InvalidArgumentError(f"unknown calibration suite {name!r}")
        entry = dict(current[name])
        observed = _observe(name, entry, seed, threads)
        entry["observed"] = observed
        entry["proposed_threshold"] = calibration.propose(observed)
        manifest["suites"][name] = entry
        observations[name] = observed
    return manifest


def _observe(name: str, entry: dict, seed: int, threads: Optional[int]) -> float:
    g = entry.get("grid", [])
    if name.startswith("pv_"):
        builders = {"pv_kl2": lambda m: hyper_kloosterman_all(m, 2),
                    "pv_legendre": legendre_family,
                    "pv_inverse_phase": inverse_phase}
        return max(pv_ratio(builders[name](make_prime_modulus(p))) for p in g)
    if name == "interval_refinement_kl2":
        return max(interval_refinement_ratio(hyper_kloosterman_all(make_prime_modulus(p), 2),
                                entry.get("samples", 50), seed) for p in g)
    if name == "quasi_orthogonality_kl2":
        worst = 0.0
        for p in g:
            spec = autocorrelation_spectrum(
                hyper_kloosterman_all(make_prime_modulus(p), 2))
            worst = max(worst, float(np.abs(np.delete(spec[1:], 0)).max())
                        * math.sqrt(p))
        return worst
    if name == "ks_kl2":
        return max(ks_distance(kloosterman_angles(make_prime_modulus(p)),
                               SATO_TATE) for p in g)
    if name == "ks_salie":
        return max(ks_distance(salie_angles(make_prime_modulus(p)),
                               UNIFORM_INTERVAL) for p in g)
    if name == "ks_gauss":
        return max(gauss_angle_survey(make_prime_modulus(p))["ks_uniform_circle"]
                   for p in g)
    if name == "ks_birch_full":
        return max(birch_vertical_survey(make_prime_modulus(p), "full")
                   ["ks_sato_tate"] for p in g)
    if name == "vdc":
        worst = 0.0
        for p, q in g:
            rep = run_vdc([(p, q)], seed)
            worst = max(worst, rep["checks"][0]["value"])
        return worst
    if name == "khan_ngo":
        rep = run_khan_ngo(g[0] if g else 499)
        return rep["checks"][0]["value"]
    if name == "bilinear_kl2":
        p = g[0]
        mod = make_prime_modulus(p)
        K = hyper_kloosterman_all(mod, 2)
        M = entry.get("shape", {}).get("M", 31)
        alpha = CoefficientSequence.random_signs(M, seed)
        beta = CoefficientSequence.random_signs(M, seed + 1)
        return bilinear_form(K, alpha, beta).bound_ratio
    if name == "prime_sum_cancellation":
        return max(run_primesum(p, seed=seed)["data"]["ratio"] for p in g)
    if name == "self_correlation_kl2":
        floor = 1.0
        for p in g:
            spec = autocorrelation_spectrum(
                hyper_kloosterman_all(make_prime_modulus(p), 2))
            floor = min(floor, float(spec[1].real))
        return floor
    if name == "moments_kl2":
        worst = 0.0
        for p in g:
            K = hyper_kloosterman_all(make_prime_modulus(p), 2)
            for l, cl in ((1, 1.0), (2, 2.0), (3, 5.0)):
                worst = max(worst, abs(moment(K, l) - cl) * math.sqrt(p)
                            / 10.0 ** (l - 1))
        return worst
    if name == "ks_birch_family":
        worst = 0.0
        for p in g:
            rep = run_satotate("birch", [p], seed)
            worst = max(worst, max(c["value"] for c in rep["checks"]
                                   if c["name"].startswith("ks_birch")))
        return worst
    if name == "weyl_kl2":
        worst = 0.0
        for p in g:
            K = hyper_kloosterman_all(make_prime_modulus(p), 2)
            for k in entry.get("orders", range(1, 7)):
                worst = max(worst, abs(weyl_sym_power(K, k)) * math.sqrt(p))
        return worst
    if name == "weyl_salie_m2":
        return max(abs(angle_moment(salie_angles(make_prime_modulus(p)), 1) - 2.0)
                   * math.sqrt(p) for p in g)
    if name == "khan_ngo_paired_floor":
        rep = run_khan_ngo(g[0] if g else 499)
        return rep["checks"][1]["value"]
    if name == "type2_complete":
        rep = run_abshift(g[0], M=5, N=12.0, seed=seed)
        return next(c["value"] for c in rep["checks"]
                    if c["name"] == "type2_complete")
    if name == "burgess_good_weil":
        rep = run_burgess(g[0], seed=seed)
        return next(c["value"] for c in rep["checks"]
                    if c["name"] == "burgess_good_weil")
    if name == "almost_prime_fraction":
        lo, hi = g[0]
        rep = almost_prime_survey((lo, hi), (lo, hi), seed=seed)
        return abs(rep["fraction_single_large"] - rep["sato_tate_probability"])
    raise InvalidArgumentError(f"no observer for calibration suite {name!r}")
