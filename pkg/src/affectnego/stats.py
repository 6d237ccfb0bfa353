"""Two-sample statistics for condition comparisons: Mann-Whitney U with an
exact permutation distribution for small products n1*n2 (tie-aware, via a
rank-sum counting recursion over all subsets) and a tie-corrected,
continuity-corrected normal approximation otherwise; Hedges' g with the
small-sample correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

EXACT_LIMIT = 400  # exact permutation p whenever n1*n2 <= this


class StatsError(ValueError):
    """Raised on degenerate statistical inputs."""


@dataclass(frozen=True)
class MannWhitneyResult:
    U: float
    p: float
    method: str  # "exact" | "normal"


def midranks(values: Sequence[float]) -> list[float]:
    """Fractional ranks (1-based); ties share the mean of their rank span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _exact_rank_sum_distribution(rank2: list[int], n1: int) -> dict[int, int]:
    """Count, over all size-n1 subsets of the pooled doubled ranks, how many
    reach each doubled rank sum. Exact integer arithmetic throughout."""
    dp: list[dict[int, int]] = [dict() for _ in range(n1 + 1)]
    dp[0][0] = 1
    for r in rank2:
        for k in range(min(n1 - 1, len(rank2)), -1, -1):
            if k + 1 > n1:
                continue
            src = dp[k]
            if not src:
                continue
            dst = dp[k + 1]
            for s, c in src.items():
                dst[s + r] = dst.get(s + r, 0) + c
    return dp[n1]


def mann_whitney_u(a: Sequence[float], b: Sequence[float],
                   alternative: str = "two-sided") -> MannWhitneyResult:
    """Rank-sum U for sample a (ties counted half) and its p-value.

    "greater" tests the alternative that a is shifted above b. The exact
    permutation distribution is used when n1*n2 <= 400; above that, a normal
    approximation with tie-corrected variance and continuity correction.
    """
    if alternative not in ("two-sided", "greater"):
        raise StatsError(f"unsupported alternative: {alternative}")
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise StatsError("both samples must be non-empty")
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    r1 = sum(ranks[:n1])
    u = r1 - n1 * (n1 + 1) / 2.0

    if n1 * n2 <= EXACT_LIMIT:
        rank2 = [round(2.0 * r) for r in ranks]
        dist = _exact_rank_sum_distribution(rank2, n1)
        total = math.comb(n1 + n2, n1)
        # doubled U so everything stays an integer
        obs2 = round(2.0 * r1) - n1 * (n1 + 1)
        mu2 = n1 * n2
        offset = n1 * (n1 + 1)
        if alternative == "greater":
            count = sum(c for s, c in dist.items() if s - offset >= obs2)
        else:
            dev = abs(obs2 - mu2)
            count = sum(c for s, c in dist.items() if abs(s - offset - mu2) >= dev)
        return MannWhitneyResult(U=u, p=count / total, method="exact")

    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_sum = 0.0
    i = 0
    sorted_pool = sorted(pooled)
    while i < n:
        j = i
        while j + 1 < n and sorted_pool[j + 1] == sorted_pool[i]:
            j += 1
        t = j - i + 1
        tie_sum += t ** 3 - t
        i = j + 1
    var = (n1 * n2 / 12.0) * ((n + 1) - tie_sum / (n * (n - 1)))
    if var <= 0.0:
        return MannWhitneyResult(U=u, p=1.0, method="normal")
    sd = math.sqrt(var)
    if alternative == "greater":
        z = (u - mu - 0.5) / sd
        p = _norm_sf(z)
    else:
        z = max(0.0, abs(u - mu) - 0.5) / sd
        p = min(1.0, 2.0 * _norm_sf(z))
    return MannWhitneyResult(U=u, p=p, method="normal")


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def hedges_g(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardized mean difference (a - b)/s_pooled with the small-sample
    correction J = 1 - 3/(4*df - 1)."""
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise StatsError("each sample needs at least 2 observations")
    mean_a = sum(a) / n1
    mean_b = sum(b) / n2
    ss_a = sum((x - mean_a) ** 2 for x in a)
    ss_b = sum((x - mean_b) ** 2 for x in b)
    df = n1 + n2 - 2
    pooled_var = (ss_a + ss_b) / df
    if pooled_var <= 0.0:
        raise StatsError("zero pooled variance")
    d = (mean_a - mean_b) / math.sqrt(pooled_var)
    correction = 1.0 - 3.0 / (4.0 * df - 1.0)
    return correction * d
