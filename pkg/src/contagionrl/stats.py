"""Evaluation statistics: Mann-Whitney U, Bonferroni, bootstrap CIs.

Episode durations are heavily tied integers (many sit at the time cap),
so the U test handles ties throughout: midranks for the statistic, a
tie-corrected variance plus continuity correction in the normal
approximation, and a tie-aware permutation-null in the exact branch.
Small comparisons (pooled n <= 16) are evaluated exactly; the cutoff
keeps exact enumeration cheap while covering every small-sample case
a desk run produces.

Confidence intervals follow the per-seed protocol: the percentile
bootstrap resamples per-seed means, not pooled episodes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .episodes import EpisodeRecord, EpisodeSummary

EXACT_MAX_POOLED_N = 16


@dataclass
class SampleSet:
    """Labeled outcome values grouped by seed."""

    label: str
    values: np.ndarray
    seeds: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.seeds = np.asarray(self.seeds)
        if self.values.size == 0:
            raise ValueError(f"sample set {self.label!r} is empty")
        if self.values.shape != self.seeds.shape:
            raise ValueError("values and seeds must align")

    def per_seed_means(self) -> np.ndarray:
        return np.array([self.values[self.seeds == s].mean()
                         for s in sorted(set(self.seeds.tolist()))])


@dataclass
class TestResult:
    u_statistic: float  # U for the first sample
    p_two_sided: float
    p_one_sided: float
    p_one_sided_corrected: float
    winner: str | None
    method: str
    degenerate: bool = False


def _midranks(pooled: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); ties share the mean of their ranks."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled))
    sorted_vals = pooled[order]
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _exact_tail_probs(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """(p_greater, p_less, u_a) by enumerating every group assignment.

    U is tracked in half-units (2U is an integer when ties hit midranks),
    so tail comparisons are exact integer arithmetic.
    """
    pooled = np.concatenate([a, b])
    n = len(pooled)
    n_a = len(a)
    # pair_score[i, j] = 2 if pooled[i] > pooled[j], 1 if tied, else 0
    gt = (pooled[:, None] > pooled[None, :]).astype(np.int64)
    eq = (pooled[:, None] == pooled[None, :]).astype(np.int64)
    pair_score = 2 * gt + eq
    all_idx = np.arange(n)
    u2_obs = int(pair_score[np.ix_(all_idx[:n_a], all_idx[n_a:])].sum())

    n_ge = n_le = total = 0
    for combo in itertools.combinations(range(n), n_a):
        group_a = np.array(combo)
        mask = np.ones(n, dtype=bool)
        mask[group_a] = False
        u2 = int(pair_score[np.ix_(group_a, all_idx[mask])].sum())
        n_ge += u2 >= u2_obs
        n_le += u2 <= u2_obs
        total += 1
    return n_ge / total, n_le / total, u2_obs / 2.0


def _approx_tail_probs(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float, bool]:
    """(p_greater, p_less, u_a, degenerate) via the corrected normal."""
    pooled = np.concatenate([a, b])
    n_a, n_b, n = len(a), len(b), len(pooled)
    ranks = _midranks(pooled)
    u_a = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)
    mu = n_a * n_b / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts.astype(float) ** 3 - tie_counts))
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 1.0, 1.0, u_a, True
    sd = math.sqrt(var)
    # Continuity correction: shift the tail boundary half a unit toward the mean.
    p_greater = _normal_sf((u_a - mu - 0.5) / sd)
    p_less = _normal_sf((mu - u_a - 0.5) / sd)
    return p_greater, p_less, u_a, False


def mann_whitney_u(a, b, alternative: str = "two-sided", method: str = "auto",
                   labels: tuple[str, str] = ("a", "b"),
                   n_comparisons: int = 1, alpha: float = 0.05) -> TestResult:
    """Mann-Whitney U test with tie handling and both p-value flavors.

    ``alternative`` picks the one-sided hypothesis: ``greater`` / ``less``
    test the first sample's direction; ``two-sided`` reports the
    one-sided p for the observed direction (the side with the larger
    rank sum).  The corrected p applies a Bonferroni factor of
    ``n_comparisons``; ``winner`` names the favored side when the
    corrected one-sided p clears ``alpha``, else None.
    """
    if isinstance(a, SampleSet):
        labels = (a.label, labels[1])
        a = a.values
    if isinstance(b, SampleSet):
        labels = (labels[0], b.label)
        b = b.values
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative: {alternative!r}")

    if method == "auto":
        method = "exact" if a.size + b.size <= EXACT_MAX_POOLED_N else "normal_approx"
    if method == "exact":
        p_greater, p_less, u_a = _exact_tail_probs(a, b)
        degenerate = np.all(np.concatenate([a, b]) == a[0])
    elif method == "normal_approx":
        p_greater, p_less, u_a, degenerate = _approx_tail_probs(a, b)
    else:
        raise ValueError(f"unknown method: {method!r}")

    p_two = min(1.0, 2.0 * min(p_greater, p_less))
    if alternative == "greater":
        p_one, favored = p_greater, labels[0]
    elif alternative == "less":
        p_one, favored = p_less, labels[1]
    else:
        # Observed direction: larger rank sum <=> larger U for that side.
        if u_a >= a.size * b.size / 2.0:
            p_one, favored = p_greater, labels[0]
        else:
            p_one, favored = p_less, labels[1]

    p_corrected = bonferroni(p_one, n_comparisons)
    winner = favored if (not degenerate and p_corrected < alpha) else None
    return TestResult(u_statistic=u_a, p_two_sided=p_two, p_one_sided=p_one,
                      p_one_sided_corrected=p_corrected, winner=winner,
                      method=method, degenerate=bool(degenerate))


def bonferroni(p: float, m: int) -> float:
    """Multiply by the comparison count and clamp to 1."""
    if m < 1:
        raise ValueError(f"comparison count must be >= 1, got {m}")
    return min(1.0, p * m)


def bootstrap_ci(per_seed_means, n_resamples: int = 10_000,
                 level: float = 0.95,
                 rng: np.random.Generator | int | None = None) -> tuple[float, float]:
    """Percentile bootstrap CI for the mean of the per-seed means."""
    means = np.asarray(per_seed_means, dtype=float)
    if means.size == 0:
        raise ValueError("need at least one per-seed mean")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    idx = gen.integers(0, means.size, size=(n_resamples, means.size))
    stat = means[idx].mean(axis=1)
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(stat, [tail, 100.0 - tail])
    return float(lo), float(hi)


def episode_metrics(record: EpisodeRecord) -> EpisodeSummary:
    """Summary metrics recomputed from a record's per-step log.

    Duration counts steps survived: infection at step t scores t - 1.
    The infection rate divides total new human infections by the number
    of executed steps (0 for an empty episode).
    """
    steps = record.steps
    n_steps = len(steps)
    if n_steps == 0:
        return EpisodeSummary(duration=0, truncated=False, cumulative_reward=0.0,
                              total_infections=0, infections_per_step=0.0)
    infected = steps[-1].agent_infected
    duration = n_steps - 1 if infected else n_steps
    total_infections = sum(s.new_infections for s in steps)
    return EpisodeSummary(
        duration=duration,
        truncated=steps[-1].truncated,
        cumulative_reward=float(sum(s.reward for s in steps)),
        total_infections=total_infections,
        infections_per_step=total_infections / n_steps,
    )
