"""Distribution fitting and goodness-of-fit for limit-belief samples.

Beta maximum likelihood via Newton iterations on the two score equations
(method-of-moments start, coordinate bisection fallback), a normal fit for
comparison, Kolmogorov-Smirnov statistics against both fitted CDFs, and a
per-alpha sweep report checking that fitted means track alpha and that the
concentration a+b stays level across alpha.

The special functions carry their own accuracy contracts: digamma and
trigamma by upward recurrence to x >= 6 plus the de Moivre asymptotic
series (absolute error below 1e-10), the regularized incomplete beta by
Lentz-style continued fraction with the usual symmetry switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

import numpy as np

EULER_GAMMA = 0.5772156649015328606

# Samples are clamped into the open interval before taking logs: finite
# horizons can emit exact 0/1 even though the limiting law never does.
SAMPLE_EPS = 1e-9

_GRAD_TOL = 1e-9
_MAX_ITER = 200
_HESSIAN_COND_LIMIT = 1e12


class FitError(ValueError):
    """Sample is unusable for the requested fit (too small or degenerate)."""


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function for x > 0.

    Recur upward via psi(x) = psi(x+1) - 1/x until x >= 6, then evaluate
    the asymptotic series through the 1/x^10 term.
    """
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    tail = inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0)))
    )
    return acc + math.log(x) - 0.5 * inv - tail


def trigamma(x: float) -> float:
    """Derivative of digamma for x > 0; same shift-then-series scheme."""
    if not x > 0:
        raise ValueError(f"trigamma requires x > 0, got {x}")
    acc = 0.0
    while x < 6.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv2 * inv * (
        1.0 / 6.0
        - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))
    )
    return acc + inv + 0.5 * inv2 + series


def log_beta_fn(a: float, b: float) -> float:
    """log of the beta function via log-gamma."""
    if not (a > 0 and b > 0):
        raise ValueError(f"log_beta_fn requires a, b > 0, got a={a}, b={b}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 500):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF at x.

    Continued fraction with the symmetry switch at x > (a+1)/(a+b+2), where
    I_x(a,b) = 1 - I_{1-x}(b,a) keeps the fraction fast-converging.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"incomplete beta requires a, b > 0, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"incomplete beta requires x in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - log_beta_fn(a, b)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def normal_cdf(x: float, mu: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError(f"normal_cdf requires sigma > 0, got {sigma}")
    return 0.5 * (1.0 + math.erf((x - mu) / (sigma * math.sqrt(2.0))))


def ks_statistic(samples, cdf: Callable[[float], float]) -> float:
    """Kolmogorov-Smirnov statistic: sup |empirical CDF - cdf| at the sample.

    Both one-sided gaps are taken at every sample point, which is where the
    supremum of the difference against a continuous CDF is attained.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.shape[0]
    if n == 0:
        raise ValueError("ks_statistic requires at least one sample")
    f = np.array([cdf(float(v)) for v in xs])
    grid = np.arange(n + 1) / n
    d_plus = float((grid[1:] - f).max())
    d_minus = float((f - grid[:-1]).max())
    return max(d_plus, d_minus, 0.0)


class NormalFit(NamedTuple):
    mu: float
    sigma: float

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0.0


def fit_normal(samples) -> NormalFit:
    """Sample mean and maximum-likelihood (1/n) standard deviation."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.shape[0] < 2:
        raise FitError(f"normal fit needs at least 2 samples, got {arr.shape[0]}")
    return NormalFit(mu=float(arr.mean()), sigma=float(arr.std()))


@dataclass
class BetaFit:
    a: float
    b: float
    log_likelihood: float
    iterations: int
    converged: bool

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


def _clamp(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64)
    return np.clip(arr, SAMPLE_EPS, 1.0 - SAMPLE_EPS)


def beta_log_likelihood(samples, a: float, b: float) -> float:
    """Total Beta(a, b) log density over the (clamped) sample."""
    arr = _clamp(samples)
    n = arr.shape[0]
    s1 = float(np.log(arr).mean())
    s2 = float(np.log(1.0 - arr).mean())
    return n * ((a - 1.0) * s1 + (b - 1.0) * s2 - log_beta_fn(a, b))


def _moment_start(arr: np.ndarray) -> tuple[float, float]:
    m = float(arr.mean())
    v = float(arr.var())
    if v <= 0:
        raise FitError("sample variance is zero; cannot start a beta fit")
    c = m * (1.0 - m) / v - 1.0
    if c <= 0:
        # variance at or above the Bernoulli bound: start from the U-shape
        return 0.5, 0.5
    return max(m * c, 1e-6), max((1.0 - m) * c, 1e-6)


def _bisect_root(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of a strictly decreasing f with f(lo) > 0 > f(hi)."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _coordinate_solve(s: float, other: float) -> float:
    """Solve s - digamma(p) + digamma(p + other) = 0 for p > 0.

    The left side is strictly decreasing in p (trigamma is decreasing), so a
    bracketed bisection always lands on the unique root.
    """

    def score(p: float) -> float:
        return s - digamma(p) + digamma(p + other)

    lo, hi = 1e-8, 1.0
    while score(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            return hi
    while score(lo) < 0:
        lo *= 0.5
        if lo < 1e-300:
            return lo
    return _bisect_root(score, lo, hi)


def fit_beta_mle(samples) -> BetaFit:
    """Maximum-likelihood Beta(a, b) fit by Newton on the score equations.

    Requires at least 10 samples, clamped into [SAMPLE_EPS, 1-SAMPLE_EPS]
    and not all identical. Starts from the method of moments; each Newton
    step backtracks to keep (a, b) positive and the likelihood from falling.
    When the 2x2 trigamma Hessian is ill-conditioned the step falls back to
    coordinate-wise bisection on the score. Convergence means the per-sample
    score gradient has infinity-norm below 1e-9; hitting the iteration cap
    returns converged=False rather than raising.
    """
    arr = _clamp(samples)
    n = arr.shape[0]
    if n < 10:
        raise FitError(f"beta fit needs at least 10 samples, got {n}")
    if np.all(arr == arr[0]):
        raise FitError("all samples identical; beta fit is degenerate")

    s1 = float(np.log(arr).mean())
    s2 = float(np.log(1.0 - arr).mean())
    a, b = _moment_start(arr)

    def loglik(aa: float, bb: float) -> float:
        return n * ((aa - 1.0) * s1 + (bb - 1.0) * s2 - log_beta_fn(aa, bb))

    current = loglik(a, b)
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        psi_ab = digamma(a + b)
        ga = s1 - digamma(a) + psi_ab
        gb = s2 - digamma(b) + psi_ab
        if max(abs(ga), abs(gb)) < _GRAD_TOL:
            converged = True
            break

        tri_ab = trigamma(a + b)
        haa = tri_ab - trigamma(a)
        hbb = tri_ab - trigamma(b)
        hab = tri_ab
        det = haa * hbb - hab * hab
        trace = abs(haa) + abs(hbb)
        ill = det <= 0 or trace * trace > _HESSIAN_COND_LIMIT * abs(det)

        if ill:
            a = _coordinate_solve(s1, b)
            b = _coordinate_solve(s2, a)
            current = loglik(a, b)
            continue

        da = -(hbb * ga - hab * gb) / det
        db = -(haa * gb - hab * ga) / det
        scale = 1.0
        for _ in range(60):
            na, nb = a + scale * da, b + scale * db
            if na > 0 and nb > 0:
                candidate = loglik(na, nb)
                if candidate >= current - 1e-12:
                    a, b, current = na, nb, candidate
                    break
            scale *= 0.5
        else:
            a = _coordinate_solve(s1, b)
            b = _coordinate_solve(s2, a)
            current = loglik(a, b)

    return BetaFit(a=a, b=b, log_likelihood=current, iterations=iterations, converged=converged)


def score_gradient(samples, a: float, b: float) -> tuple[float, float]:
    """Per-sample beta score gradient at (a, b); near zero at the MLE."""
    arr = _clamp(samples)
    s1 = float(np.log(arr).mean())
    s2 = float(np.log(1.0 - arr).mean())
    psi_ab = digamma(a + b)
    return s1 - digamma(a) + psi_ab, s2 - digamma(b) + psi_ab


@dataclass
class GofReport:
    """Beta-vs-normal comparison on one sample: KS, log-likelihood, AIC."""

    ks_beta: float
    ks_normal: float
    loglik_beta: float
    loglik_normal: float
    aic_beta: float
    aic_normal: float


def normal_log_likelihood(samples, mu: float, sigma: float) -> float:
    arr = np.asarray(samples, dtype=np.float64)
    if sigma <= 0:
        raise FitError("normal log-likelihood needs sigma > 0")
    n = arr.shape[0]
    return float(-0.5 * n * math.log(2.0 * math.pi) - n * math.log(sigma)
                 - 0.5 * ((arr - mu) ** 2).sum() / (sigma * sigma))


def goodness_of_fit(samples, beta: BetaFit, normal: NormalFit) -> GofReport:
    """KS statistics, log-likelihoods and AICs for both fitted candidates."""
    arr = _clamp(samples)
    if normal.degenerate:
        raise FitError("normal fit is degenerate; goodness of fit undefined")
    ks_b = ks_statistic(arr, lambda x: regularized_incomplete_beta(x, beta.a, beta.b))
    ks_n = ks_statistic(arr, lambda x: normal_cdf(x, normal.mu, normal.sigma))
    ll_b = beta_log_likelihood(arr, beta.a, beta.b)
    ll_n = normal_log_likelihood(arr, normal.mu, normal.sigma)
    return GofReport(
        ks_beta=ks_b,
        ks_normal=ks_n,
        loglik_beta=ll_b,
        loglik_normal=ll_n,
        aic_beta=4.0 - 2.0 * ll_b,
        aic_normal=4.0 - 2.0 * ll_n,
    )


@dataclass
class SweepRow:
    alpha: float
    a: float
    b: float
    a_plus_b: float
    empirical_mean: float


@dataclass
class SweepReport:
    """Per-alpha beta fits plus the two cross-level diagnostics.

    max_mean_error is max |empirical mean - alpha|; ab_rel_spread is the
    relative spread (max - min) / mean of a+b across alpha levels, the
    quantity expected to stay small if the concentration does not depend
    on alpha.
    """

    rows: list[SweepRow]
    max_mean_error: float
    ab_rel_spread: float


def alpha_sweep_report(sweeps: Mapping[float, np.ndarray], min_samples: int = 500) -> SweepReport:
    """Fit each alpha level and summarize the cross-level behavior.

    Requires at least two levels with min_samples samples each.
    """
    if len(sweeps) < 2:
        raise ValueError(f"need at least 2 alpha levels, got {len(sweeps)}")
    rows: list[SweepRow] = []
    for alpha in sorted(sweeps):
        arr = np.asarray(sweeps[alpha], dtype=np.float64)
        if arr.shape[0] < min_samples:
            raise ValueError(
                f"alpha={alpha}: need at least {min_samples} samples, got {arr.shape[0]}"
            )
        fit = fit_beta_mle(arr)
        rows.append(SweepRow(
            alpha=float(alpha),
            a=fit.a,
            b=fit.b,
            a_plus_b=fit.a + fit.b,
            empirical_mean=float(arr.mean()),
        ))
    totals = np.array([r.a_plus_b for r in rows])
    return SweepReport(
        rows=rows,
        max_mean_error=max(abs(r.empirical_mean - r.alpha) for r in rows),
        ab_rel_spread=float((totals.max() - totals.min()) / totals.mean()),
    )
