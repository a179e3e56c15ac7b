"""Statistical machinery: rank tests, proportion tests, correlations, bootstrap.

Distribution tails are computed internally (regularized incomplete gamma
for chi-squared, regularized incomplete beta for Student t, stdlib
NormalDist for the normal), so the package carries no stats dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from statistics import NormalDist
from typing import Sequence

import numpy as np

# Largest pooled sample for which the rank-sum null is enumerated exactly;
# beyond it the tie-corrected normal approximation is used.
EXACT_ENUMERATION_MAX = 12

_STD_NORMAL = NormalDist()


@dataclass
class StatResult:
    statistic: float
    p_value: float
    effect: float
    method: str

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "effect": self.effect, "method": self.method}


# ---------------------------------------------------------------------------
# Internal special functions.

def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _norm_ppf(p: float) -> float:
    return _STD_NORMAL.inv_cdf(p)


def _gammainc_upper(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x), s > 0, x >= 0.

    Series expansion below the s+1 crossover, Lentz continued fraction
    above it; both converge to ~1e-15 here.
    """
    if x < 0 or s <= 0:
        raise ValueError("gammainc domain")
    if x == 0:
        return 1.0
    lg = math.lgamma(s)
    if x < s + 1.0:
        # lower series: P(s,x) = x^s e^-x / Gamma(s) * sum x^n / (s)_{n+1}
        term = 1.0 / s
        total = term
        k = s
        for _ in range(1000):
            k += 1.0
            term *= x / k
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        p = total * math.exp(s * math.log(x) - x - lg)
        return max(0.0, min(1.0, 1.0 - p))
    # continued fraction for Q(s,x) (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    q = h * math.exp(s * math.log(x) - x - lg)
    return max(0.0, min(1.0, q))


def chi2_sf(x: float, df: float) -> float:
    """Chi-squared survival function P(X > x) with df degrees of freedom."""
    if x <= 0:
        return 1.0
    return _gammainc_upper(df / 2.0, x / 2.0)


def _betacf(a: float, b: float, x: float) -> float:
    # continued fraction for the incomplete beta (Lentz)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 1000):
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
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Student t survival function P(T > t)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0:
        return 0.5
    x = df / (df + t * t)
    p = 0.5 * betainc_reg(df / 2.0, 0.5, x)
    return p if t > 0 else 1.0 - p


# ---------------------------------------------------------------------------
# Rank-sum test.

def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _hodges_lehmann(a: Sequence[float], b: Sequence[float]) -> float:
    diffs = (np.asarray(a, dtype=float)[:, None]
             - np.asarray(b, dtype=float)[None, :])
    return float(np.median(diffs))


def wilcoxon_ranksum(a: Sequence[float], b: Sequence[float]) -> StatResult:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) test with midrank ties.

    The null distribution is enumerated exactly for pooled sizes up to
    EXACT_ENUMERATION_MAX; larger samples use the normal approximation
    with tie and continuity corrections.  The effect is the
    Hodges-Lehmann median of pairwise differences a_i - b_j (so
    swapping the arguments negates it).
    """
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be non-empty")
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    # doubled ranks are integers even with midrank ties, so the exact
    # path compares integers only
    ranks2 = [round(2.0 * r) for r in ranks]
    r1x2 = sum(ranks2[:n1])
    u1x2 = r1x2 - n1 * (n1 + 1)          # 2*U1
    mux2 = n1 * n2                        # 2*mean(U)
    d_obs = abs(u1x2 - mux2)
    effect = _hodges_lehmann(a, b)

    n = n1 + n2
    if n <= EXACT_ENUMERATION_MAX:
        hits = 0
        total = 0
        base = n1 * (n1 + 1)
        for combo in combinations(range(n), n1):
            u2 = sum(ranks2[i] for i in combo) - base
            if abs(u2 - mux2) >= d_obs:
                hits += 1
            total += 1
        return StatResult(statistic=u1x2 / 2.0, p_value=hits / total,
                          effect=effect, method="ranksum-exact")

    # tie-corrected normal approximation
    counts: dict[float, int] = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    tie_sum = sum(t ** 3 - t for t in counts.values())
    var_u = n1 * n2 / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)))
    if var_u <= 0:
        return StatResult(statistic=u1x2 / 2.0, p_value=1.0,
                          effect=effect, method="ranksum-normal")
    z = max(0.0, d_obs / 2.0 - 0.5) / math.sqrt(var_u)
    p = min(1.0, 2.0 * _norm_sf(z))
    return StatResult(statistic=u1x2 / 2.0, p_value=p,
                      effect=effect, method="ranksum-normal")


# ---------------------------------------------------------------------------
# Proportion test.

def proportion_test(k1: int, n1: int, k2: int, n2: int) -> StatResult:
    """Chi-squared test (Yates continuity correction) on two proportions.

    Effect is k1/n1 - k2/n2.  Degenerate tables (a zero column margin)
    report p = 1: both samples agree perfectly on the all-or-nothing
    outcome.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("sample sizes must be >= 1")
    if not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise ValueError("successes must lie within sample sizes")
    a, b = k1, n1 - k1
    c, d = k2, n2 - k2
    n = n1 + n2
    effect = k1 / n1 - k2 / n2
    col1, col2 = a + c, b + d
    if col1 == 0 or col2 == 0:
        return StatResult(statistic=0.0, p_value=1.0, effect=effect,
                          method="chi2-yates")
    diff = abs(a * d - b * c) - n / 2.0
    if diff < 0:
        diff = 0.0
    stat = n * diff * diff / (n1 * n2 * col1 * col2)
    return StatResult(statistic=stat, p_value=chi2_sf(stat, 1.0),
                      effect=effect, method="chi2-yates")


# ---------------------------------------------------------------------------
# Correlations.

def _residualize(v: np.ndarray, design: np.ndarray) -> np.ndarray:
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    return v - design @ coef


def partial_pearson(x: Sequence[float], y: Sequence[float],
                    controls: Sequence[Sequence[float]] = ()) -> StatResult:
    """Pearson correlation of x and y after projecting out `controls`.

    With no controls this is the plain Pearson correlation.  p-value is
    the two-sided t-test on n - 2 - #controls degrees of freedom.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ctrl = [np.asarray(c, dtype=float) for c in controls]
    n = len(x)
    k = len(ctrl)
    if len(y) != n or any(len(c) != n for c in ctrl):
        raise ValueError("all vectors must have equal length")
    if n < 3 + k:
        raise ValueError(f"need at least {3 + k} points, got {n}")
    design = np.column_stack([np.ones(n)] + ctrl)
    rx = _residualize(x, design)
    ry = _residualize(y, design)
    sx = math.sqrt(float(rx @ rx))
    sy = math.sqrt(float(ry @ ry))
    # residuals that are zero up to round-off (constant input, or a control
    # explaining the variable exactly) make the correlation undefined
    nx = math.sqrt(float((x - x.mean()) @ (x - x.mean())))
    ny = math.sqrt(float((y - y.mean()) @ (y - y.mean())))
    if sx <= 1e-10 * nx or sy <= 1e-10 * ny or nx == 0.0 or ny == 0.0:
        raise ValueError("zero variance")
    r = float(rx @ ry) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    df = n - 2 - k
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = abs(r) * math.sqrt(df / (1.0 - r * r))
        p = min(1.0, 2.0 * t_sf(t, df))
    method = "partial-pearson" if k else "pearson"
    return StatResult(statistic=r, p_value=p, effect=r, method=method)


def pearson(x: Sequence[float], y: Sequence[float]) -> StatResult:
    return partial_pearson(x, y, ())


def spearman(x: Sequence[float], y: Sequence[float]) -> StatResult:
    """Spearman rank correlation: Pearson on midranks."""
    res = partial_pearson(_midranks(list(x)), _midranks(list(y)), ())
    res.method = "spearman"
    return res


# ---------------------------------------------------------------------------
# Wilson score interval.

def wilson_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n, n >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    z = _norm_ppf(0.5 + level / 2.0)
    z2 = z * z
    center = (k + z2 / 2.0) / (n + z2)
    half = z * math.sqrt(k * (n - k) / n + z2 / 4.0) / (n + z2)
    # the bound is exact at the boundaries; avoid one-ulp float slippage
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return (lo, hi)


# ---------------------------------------------------------------------------
# Bootstrap over dialogue sets.

@dataclass
class BootstrapSummary:
    centroid: tuple[float, float]   # (mean B_F, mean B_M)
    sd: tuple[float, float]
    n_samples: int
    sample_size: int
    seed: int
    samples: np.ndarray | None = None  # (n_samples, 2) array of (B_F, B_M)

    def to_dict(self) -> dict:
        return {"centroid": list(self.centroid), "sd": list(self.sd),
                "n_samples": self.n_samples, "sample_size": self.sample_size,
                "seed": self.seed}


def bootstrap_score_centroids(ds, sample_size: int = 225,
                              n_samples: int = 200, seed: int = 0,
                              keep_samples: bool = True) -> BootstrapSummary:
    """Bechdel-score centroid of repeated disjoint partitions of `ds`.

    Each pass shuffles the dialogues and splits them into disjoint
    subsets of `sample_size` (the trailing remainder is discarded);
    passes repeat until `n_samples` subsets have been scored.  Returns
    the bivariate mean and per-axis sample standard deviation of the
    (B_F, B_M) points.  Deterministic for a fixed seed.
    """
    from .metrics import DialogueSet, bechdel_scores

    n = len(ds)
    if n < sample_size:
        raise ValueError(f"need at least sample_size={sample_size} dialogues, got {n}")
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    rng = np.random.default_rng(seed)
    dialogues = ds.dialogues if isinstance(ds, DialogueSet) else tuple(ds)
    per_pass = n // sample_size
    points = np.empty((n_samples, 2), dtype=float)
    got = 0
    while got < n_samples:
        perm = rng.permutation(n)
        for i in range(per_pass):
            if got >= n_samples:
                break
            idx = perm[i * sample_size:(i + 1) * sample_size]
            sub = DialogueSet(dialogues[j] for j in idx)
            b_f, b_m = bechdel_scores(sub)
            points[got] = (b_f, b_m)
            got += 1
    mean = points.mean(axis=0)
    sd = points.std(axis=0, ddof=1) if n_samples > 1 else np.zeros(2)
    return BootstrapSummary(centroid=(float(mean[0]), float(mean[1])),
                            sd=(float(sd[0]), float(sd[1])),
                            n_samples=n_samples, sample_size=sample_size,
                            seed=seed,
                            samples=points if keep_samples else None)
