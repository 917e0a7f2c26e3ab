"""The acceptance suite: every exit criterion at its pinned tolerance.

Each check returns a :class:`CheckResult`; the CLI ``verify`` subcommand
prints one line per criterion and exits nonzero when any fails.  Checks
are implemented exactly as stated.  Three targets are known to be
unattainable as written (see the detail strings and the repository notes):
the quadrature target at (4, 1, 1) is a divergent integral, the 10%
desk-scale windows exclude the true finite-p values, and the stated ratio
limit law is the complex-Gaussian one while the sampled statistic follows
the real-Gaussian law.  Those checks report their honest failure together
with the supplementary computation that verifies the underlying substance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import ks_2samp

from . import divergences, extremal, fisher, jacobi, moments
from .ensembles import Spectrum, corner_batch, spectrum_batch
from .harness import RunConfig, run_experiment
from .mc import merge_estimates, sample_stream
from .params import EnsembleParams


@dataclass(frozen=True)
class CheckResult:
    criterion: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.criterion}: {self.detail}"


# --- criterion 1 -----------------------------------------------------------

def check_route_identity(samples: int = 1000) -> CheckResult:
    """Gradient vs spectral integrand on corner draws, rel diff < 1e-8."""
    worst = 0.0
    for (n, p, q) in [(50, 5, 3), (100, 10, 4), (200, 8, 8)]:
        params = EnsembleParams(n, p, q)
        rng = sample_stream(20240 + n, 0)
        z = corner_batch(params, rng, samples)
        lam = spectrum_batch(z)
        for i in range(samples):
            g = fisher.integrand_gradient(z[i], params)
            s = fisher.integrand_spectral(Spectrum(lam[i]), params)
            worst = max(worst, abs(g - s) / max(abs(s), 1e-14))
    return CheckResult(
        "1 route identity",
        worst < 1e-8,
        f"max rel diff over 3x{samples} corner draws = {worst:.3e} (< 1e-8)",
    )


# --- criterion 2 -----------------------------------------------------------

def _corner_density_1d(n: int):
    """Normalized density of sqrt(n) * (corner entry) for p = q = 1."""
    c = (n - 3) / 2.0
    half = math.sqrt(n)
    norm, _ = quad(lambda z: (1.0 - z * z / n) ** c, -half, half)
    return lambda z: (1.0 - z * z / n) ** c / norm, half, c


def fisher_quadrature_1d(params: EnsembleParams) -> float:
    """Quadrature of (1/4) integral (z - 2 c z/(n - z^2))^2 f(z) dz, p=q=1.

    The integrand behaves like (1 - z^2/n)^{c - 2} at the support edge, so
    the integral is finite only for c = 0 or c > 1, i.e. n = 3 or n > 6
    at p = q = 1.  Divergent targets return +inf rather than a garbage
    quadrature value.
    """
    if params.p != 1 or params.q != 1:
        raise ValueError("the 1-d quadrature oracle requires p = q = 1")
    n = params.n
    f, half, c = _corner_density_1d(n)
    if not (c == 0.0 or c > 1.0):
        return math.inf
    val, _ = quad(lambda z: 0.25 * (z - 2 * c * z / (n - z * z)) ** 2 * f(z),
                  -half, half, limit=200)
    return val


def check_exact_small_case_3_1_1(n_samples: int = 10 ** 6) -> CheckResult:
    params = EnsembleParams(3, 1, 1)
    est = fisher.estimate_fisher(params, n_samples, seed=7)
    dev = abs(est.mean - 0.25)
    ok = dev <= 5 * est.stderr
    return CheckResult(
        "2a fisher(3,1,1) = 1/4",
        ok,
        f"mean {est.mean:.6f} +- {est.stderr:.6f}, target 0.25, "
        f"|dev| = {dev / est.stderr:.2f} stderr (<= 5)",
    )


def check_quadrature_case_4_1_1(n_samples: int = 10 ** 6) -> CheckResult:
    params = EnsembleParams(4, 1, 1)
    oracle = fisher_quadrature_1d(params)
    est = fisher.estimate_fisher(params, n_samples, seed=11)
    if math.isinf(oracle):
        # the smallest scalar case with finite integrand variance is
        # n = 10 ((1 - lambda)^{-4} must be integrable); use n = 12
        supp = EnsembleParams(12, 1, 1)
        q12 = fisher_quadrature_1d(supp)
        e12 = fisher.estimate_fisher(supp, n_samples, seed=11)
        z12 = abs(e12.mean - q12) / e12.stderr
        return CheckResult(
            "2b fisher(4,1,1) vs quadrature",
            False,
            "target integral is divergent: the edge exponent c - 2 = -3/2 "
            "is not integrable, so the information is +inf and the sample "
            f"mean (here {est.mean:.3f} +- {est.stderr:.3f}) grows like "
            f"N^(1/3); supplementary finite-variance case (12,1,1): "
            f"quadrature {q12:.6f}, MC {e12.mean:.6f} +- {e12.stderr:.6f} "
            f"({z12:.2f} stderr)",
        )
    dev = abs(est.mean - oracle)
    return CheckResult(
        "2b fisher(4,1,1) vs quadrature",
        dev <= 5 * est.stderr,
        f"mean {est.mean:.6f} +- {est.stderr:.6f}, quadrature {oracle:.6f}",
    )


# --- criterion 3 -----------------------------------------------------------

def check_desk_scale(point: tuple[int, int, int],
                     n_samples: int = 10 ** 6) -> CheckResult:
    n, p, q = point
    params = EnsembleParams(n, p, q)
    est = fisher.estimate_fisher(params, n_samples, seed=13)
    asym = fisher.fisher_asymptotic(params)
    rel = abs(est.mean - asym) / asym
    return CheckResult(
        f"3 desk-scale ratio at {point}",
        rel < 0.10,
        f"estimate {est.mean:.6e} +- {est.stderr:.1e}, leading term "
        f"{asym:.6e}, |rel dev| = {rel:.4f} (target < 0.10); the exact "
        f"finite-p value sits {100 * rel:.1f}% above the leading term",
    )


def check_desk_scale_trend(n_samples: int = 4 * 10 ** 6) -> CheckResult:
    p, q = 10, 5
    ratios = {}
    for n in (2000, 4000):
        params = EnsembleParams(n, p, q)
        est = fisher.estimate_fisher(params, n_samples, seed=17)
        ratios[n] = est.mean / fisher.fisher_asymptotic(params)
    ok = abs(ratios[4000] - 1.0) < abs(ratios[2000] - 1.0)
    return CheckResult(
        "3 ratio moves toward 1 as n doubles",
        ok,
        f"ratio(2000,10,5) = {ratios[2000]:.5f}, ratio(4000,10,5) = "
        f"{ratios[4000]:.5f}",
    )


# --- criterion 4 -----------------------------------------------------------

def check_resolvent_expansions(n_samples: int = 10 ** 6) -> CheckResult:
    params = EnsembleParams(2000, 40, 10)
    exp1 = moments.resolvent_expansion(params, 1)
    exp2 = moments.resolvent_expansion(params, 2)

    def t_kernel(rng, count):
        c, cp = jacobi.sample_chain_batch(params, rng, count)
        t1, t2 = jacobi.resolvent_traces_batch(c, cp)
        return np.stack([t1, t2], axis=1), 0

    # run both traces off the same chains by folding a 2-column kernel
    from .mc import BLOCK_SIZE
    n_blocks = (n_samples + BLOCK_SIZE - 1) // BLOCK_SIZE
    sums = np.zeros(2)
    sq = np.zeros(2)
    total = 0
    for b in range(n_blocks):
        count = min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)
        vals, _ = t_kernel(sample_stream(19, b), count)
        sums += vals.sum(axis=0)
        sq += (vals * vals).sum(axis=0)
        total += count
    mean = sums / total
    stderr = np.sqrt((sq / total - mean ** 2) / total)
    ok1 = abs(mean[0] - exp1.value) <= 5 * stderr[0] + exp1.remainder_budget
    ok2 = abs(mean[1] - exp2.value) <= 5 * stderr[1] + exp2.remainder_budget
    detail = (f"T1 mc {mean[0]:.6f} vs expansion {exp1.value:.6f} "
              f"(5se+budget {5 * stderr[0] + exp1.remainder_budget:.2e}); "
              f"T2 mc {mean[1]:.6f} vs {exp2.value:.6f} "
              f"(5se+budget {5 * stderr[1] + exp2.remainder_budget:.2e})")
    return CheckResult("4 trace expansions at (2000,40,10)", ok1 and ok2,
                       detail)


def check_q1_beta_oracle(n_samples: int = 10 ** 6) -> CheckResult:
    msgs = []
    ok = True
    for (n, p) in [(10, 2), (50, 7)]:
        params = EnsembleParams(n, p, 1)
        alpha, beta = (n - p) / 2.0, p / 2.0
        exact1 = moments.beta_inverse_moment(alpha, beta, 1)
        exact2 = moments.beta_inverse_moment(alpha, beta, 2)

        def kernel(rng, count):
            c, cp = jacobi.sample_chain_batch(params, rng, count)
            t1, t2 = jacobi.resolvent_traces_batch(c, cp)
            return np.stack([t1, t2], axis=1), 0

        from .mc import BLOCK_SIZE
        n_blocks = (n_samples + BLOCK_SIZE - 1) // BLOCK_SIZE
        sums = np.zeros(2)
        sq = np.zeros(2)
        total = 0
        for b in range(n_blocks):
            count = min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)
            vals, _ = kernel(sample_stream(23, b), count)
            sums += vals.sum(axis=0)
            sq += (vals * vals).sum(axis=0)
            total += count
        mean = sums / total
        stderr = np.sqrt((sq / total - mean ** 2) / total)
        z1 = abs(mean[0] - exact1) / stderr[0]
        z2 = abs(mean[1] - exact2) / stderr[1]
        ok = ok and z1 <= 5 and z2 <= 5
        msgs.append(f"({n},{p},1): k=1 {z1:.2f}se, k=2 {z2:.2f}se")
    return CheckResult("4 q=1 exact beta oracle", ok, "; ".join(msgs))


# --- criterion 5 -----------------------------------------------------------

def check_sampler_agreement(n_samples: int = 2000) -> CheckResult:
    params = EnsembleParams(100, 8, 5)
    rng = sample_stream(29, 0)
    lam = spectrum_batch(corner_batch(params, rng, n_samples))
    corner_stat = (1.0 / (1.0 - lam)).sum(axis=1)
    c, cp = jacobi.sample_chain_batch(params, sample_stream(29, 1), n_samples)
    jac_stat, _ = jacobi.resolvent_traces_batch(c, cp)
    res = ks_2samp(corner_stat, jac_stat)
    return CheckResult(
        "5 sampler agreement (100,8,5)",
        res.pvalue > 0.01,
        f"two-sample KS stat {res.statistic:.4f}, p-value {res.pvalue:.4f} "
        "(> 0.01)",
    )


# --- criterion 6 -----------------------------------------------------------

def kl_quadrature_1d(params: EnsembleParams) -> float:
    """Quadrature of f log(f/g) for p = q = 1."""
    if params.p != 1 or params.q != 1:
        raise ValueError("the 1-d quadrature oracle requires p = q = 1")
    f, half, _ = _corner_density_1d(params.n)

    def integrand(z):
        fz = f(z)
        gz = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        return fz * math.log(fz / gz)

    val, _ = quad(integrand, -half, half, limit=200)
    return val


def check_kl_small_case(n_samples: int = 10 ** 6) -> CheckResult:
    params = EnsembleParams(3, 1, 1)
    oracle = kl_quadrature_1d(params)
    est = divergences.estimate_kl(params, n_samples, seed=31)
    z = abs(est.mean - oracle) / est.stderr
    return CheckResult(
        "6 KL(3,1,1) vs quadrature",
        z <= 5,
        f"mean {est.mean:.6f} +- {est.stderr:.6f}, quadrature {oracle:.6f} "
        f"({z:.2f} stderr)",
    )


def check_lsi_grid(n_samples: int = 10 ** 6) -> CheckResult:
    msgs = []
    ok = True
    for (n, p, q) in [(200, 5, 3), (500, 8, 4), (2000, 10, 5)]:
        params = EnsembleParams(n, p, q)
        kl = divergences.estimate_kl(params, n_samples, seed=37)
        fi = fisher.estimate_fisher(params, n_samples, seed=37)
        report = divergences.check_lsi(kl, fi)
        ok = ok and report.holds
        msgs.append(f"({n},{p},{q}): 2KL {2 * kl.mean:.3e} <= I "
                    f"{fi.mean:.3e} {'ok' if report.holds else 'VIOLATED'}")
    return CheckResult("6 log-Sobolev 2KL <= I", ok, "; ".join(msgs))


def check_importance_identity(n_samples: int = 10 ** 5) -> CheckResult:
    params = EnsembleParams(50, 3, 2)
    est = divergences.estimate_importance(params, n_samples, seed=41)
    z = abs(est.mean - 1.0) / est.stderr
    return CheckResult(
        "6 importance identity E[g/f] = 1",
        z <= 5,
        f"mean {est.mean:.6f} +- {est.stderr:.6f} ({z:.2f} stderr from 1)",
    )


# --- criterion 7 -----------------------------------------------------------

def check_extremal_slln(draws: int = 200) -> CheckResult:
    params = EnsembleParams(1_000_000, 400, 200)
    rng = sample_stream(43, 0)
    lo, hi = extremal.extremal_batch(params, rng, draws)
    n, p, q = params.as_tuple()
    sq = math.sqrt(p * q)
    mx = ((n * hi - p) / sq).mean()
    mn = ((n * lo - p) / sq).mean()
    lim_max, lim_min = extremal.slln_limits(q / p)
    rel_max = abs(mx - lim_max) / abs(lim_max)
    rel_min = abs(mn - lim_min) / abs(lim_min)
    ok = rel_max < 0.10 and rel_min < 0.10
    return CheckResult(
        "7 extremal SLLN at (1e6,400,200)",
        ok,
        f"max mean {mx:.5f} vs {lim_max:.5f} ({100 * rel_max:.2f}%); "
        f"min mean {mn:.5f} vs {lim_min:.5f} ({100 * rel_min:.2f}%) "
        "(min limit is sqrt(gamma) - 2, magnitude 1.29289: the stated "
        "positive value has the wrong orientation for (n lambda_min - p))",
    )


# --- criterion 8 -----------------------------------------------------------

def check_ratio_law(draws: int = 2000) -> CheckResult:
    params = EnsembleParams(100_000, 30, 30)
    rng = sample_stream(47, 0)
    lo, hi = extremal.extremal_batch(params, rng, draws)
    ratio = np.sqrt(hi / lo) / params.q
    ks_stated = extremal.ks_statistic(ratio, extremal.ratio_law_cdf)
    ks_real = extremal.ks_statistic(ratio, extremal.gaussian_condition_cdf)
    return CheckResult(
        "8 ratio law (soft) at p=q=30",
        ks_stated < 0.1,
        f"KS vs exp(-4/x^2) = {ks_stated:.4f} (target < 0.1; the two "
        f"candidate laws differ by sup distance 0.244 and the sampled "
        f"statistic follows the real-Gaussian condition law: KS vs "
        f"exp(-2/x - 2/x^2) = {ks_real:.4f})",
    )


# --- criterion 9 -----------------------------------------------------------

def check_reproducibility() -> CheckResult:
    config = RunConfig(experiment="fisher", grid=((100, 5, 3),),
                       samples=20000, seed=53, output_dir=None)
    dicts = []
    for w in (1, 2, 8):
        d = run_experiment(config, workers=w, write=False)[0].as_flat_dict()
        d.pop("wall_time")
        dicts.append(d)
    identical = dicts[0] == dicts[1] == dicts[2]
    return CheckResult(
        "9 worker-count reproducibility",
        identical,
        f"records identical across 1/2/8 workers: {identical} "
        f"(mean {dicts[0]['mean']!r})",
    )


def check_merge_associativity() -> CheckResult:
    from .mc import BLOCK_SIZE, MCEstimate

    params = EnsembleParams(50, 4, 2)
    n_samples, seed = 40000, 59
    full = fisher.estimate_fisher(params, n_samples, seed)
    kernel = fisher._jacobi_kernel(params)

    n_blocks = (n_samples + BLOCK_SIZE - 1) // BLOCK_SIZE
    split = n_blocks // 2
    halves = []
    for blocks in (range(0, split), range(split, n_blocks)):
        acc = MCEstimate.empty(seed=seed, provenance=full.provenance)
        for b in blocks:
            count = min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)
            vals, flagged = kernel(sample_stream(seed, b), count)
            blk = MCEstimate(float(vals.mean()),
                             float(vals.std(ddof=1) / math.sqrt(vals.size)),
                             int(vals.size), seed, flagged, full.provenance)
            acc = merge_estimates(acc, blk)
        halves.append(acc)
    merged = merge_estimates(halves[0], halves[1])
    merged_rev = merge_estimates(halves[1], halves[0])
    rel_mean = abs(merged.mean - full.mean) / abs(full.mean)
    rel_comm = abs(merged.mean - merged_rev.mean) / abs(full.mean)
    rel_se = abs(merged.stderr - full.stderr) / full.stderr
    ok = rel_mean < 1e-12 and rel_comm < 1e-12 and rel_se < 1e-9
    return CheckResult(
        "9 merge associativity",
        ok,
        f"halves-vs-single rel {rel_mean:.2e} (<1e-12), commutation "
        f"rel {rel_comm:.2e}, stderr rel {rel_se:.2e}",
    )


def check_haar_orthogonality() -> CheckResult:
    params = EnsembleParams(50, 50, 50)
    rng = sample_stream(61, 0)
    worst = 0.0
    for _ in range(5):
        frame = corner_batch(params, rng, 1)[0]
        dev = np.abs(frame.T @ frame - np.eye(50)).max()
        worst = max(worst, float(dev))
    return CheckResult(
        "9 Haar frame orthogonality n=q=50",
        worst < 1e-12,
        f"max |Q'Q - I| over 5 draws = {worst:.2e} (< 1e-12)",
    )


def run_all(verbose: bool = True) -> list[CheckResult]:
    """Run every acceptance criterion, printing one line per check."""
    checks = [
        check_route_identity,
        check_exact_small_case_3_1_1,
        check_quadrature_case_4_1_1,
        lambda: check_desk_scale((2000, 10, 5)),
        lambda: check_desk_scale((5000, 12, 6)),
        check_desk_scale_trend,
        check_resolvent_expansions,
        check_q1_beta_oracle,
        check_sampler_agreement,
        check_kl_small_case,
        check_lsi_grid,
        check_importance_identity,
        check_extremal_slln,
        check_ratio_law,
        check_reproducibility,
        check_merge_associativity,
        check_haar_orthogonality,
    ]
    results = []
    for fn in checks:
        res = fn()
        results.append(res)
        if verbose:
            print(res.line(), flush=True)
    return results
