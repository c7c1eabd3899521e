"""Localization effectiveness metrics and paired statistical comparison."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from killrefine.errors import AllDifferencesZero, ValidationError
from killrefine.killdata import GroundTruth
from killrefine.suspicion import SuspiciousnessReport

EXACT_MAX_N = 25
ZERO_DROP_WARN_FRACTION = 0.10


@dataclass(frozen=True)
class VersionResult:
    report: SuspiciousnessReport
    ground_truth: GroundTruth
    version: str = ""

    @property
    def candidate_count(self) -> int:
        return len(self.report.ranking)


def _fault_ranks(result: VersionResult):
    return [r.rank for r in result.report.ranking if r.statement in result.ground_truth]


def top_n(result: VersionResult, n: int) -> bool:
    """True if any faulty statement sits at rank <= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return any(rank <= n for rank in _fault_ranks(result))


def average_precision(result: VersionResult) -> float:
    if len(result.ground_truth) == 0:
        raise ValidationError("ground truth is empty")
    hits = 0
    total = 0.0
    for i, r in enumerate(result.report.ranking, start=1):
        if r.statement in result.ground_truth:
            hits += 1
            total += hits / i
    return total / len(result.ground_truth)


def exam_rank(result: VersionResult):
    """Average-tie rank of the best faulty statement, or None when no fault is ranked."""
    faults = [r for r in result.report.ranking if r.statement in result.ground_truth]
    if not faults:
        return None
    best = max(r.score for r in faults)
    scores = [r.score for r in result.report.ranking]
    m = sum(1 for s in scores if s > best)
    n = sum(1 for s in scores if s == best)
    return ((m + 1) + (m + n)) / 2


def exam_score(result: VersionResult) -> float:
    if len(result.ground_truth) == 0:
        raise ValidationError("ground truth is empty")
    rank = exam_rank(result)
    if rank is None:
        return 1.0
    return rank / result.candidate_count


# ---------------------------------------------------------------- statistics


class Alternative(str, enum.Enum):
    TWO_SIDED = "two-sided"
    LESS = "less"
    GREATER = "greater"


class Magnitude(str, enum.Enum):
    NEGLIGIBLE = "negligible"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_tails(doubled_ranks: np.ndarray, t_doubled: int):
    """P(T+ <= t) and P(T+ >= t) under random signs, by convolution over doubled ranks."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    denom = 2.0 ** len(doubled_ranks)
    return float(counts[:t_doubled + 1].sum() / denom), float(counts[t_doubled:].sum() / denom)


def _normal_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences
    p_two_sided: float
    p_less: float
    p_greater: float
    n_used: int
    n_zero: int
    exact: bool

    def p(self, alternative) -> float:
        alternative = Alternative(alternative)
        return {Alternative.TWO_SIDED: self.p_two_sided, Alternative.LESS: self.p_less,
                Alternative.GREATER: self.p_greater}[alternative]


def wilcoxon_test(xs, ys, exact=None) -> WilcoxonResult:
    """Paired signed-rank test of xs against ys, all three alternatives at once.

    Zero differences are dropped. Exact null distribution for n <= 25,
    otherwise a normal approximation with tie and continuity corrections.
    LESS is the alternative that xs tends to be smaller than ys.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) == 0:
        raise ValidationError("wilcoxon needs two equal-length non-empty samples")
    d = x - y
    nonzero = d[d != 0]
    n = len(nonzero)
    n_zero = len(d) - n
    if n == 0:
        raise AllDifferencesZero("all paired differences are zero")
    if n_zero > ZERO_DROP_WARN_FRACTION * len(d):
        warnings.warn(f"wilcoxon: dropped {n_zero} of {len(d)} zero differences", stacklevel=2)
    # snap magnitudes so that e.g. 0.03 - 0.01 and 0.02 tie
    magnitudes = np.array([float(f"{v:.12g}") for v in np.abs(nonzero)])
    ranks = _average_ranks(magnitudes)
    t_plus = float(ranks[nonzero > 0].sum())
    if exact is None:
        exact = n <= EXACT_MAX_N
    if exact:
        doubled = np.rint(2 * ranks).astype(np.int64)
        p_less, p_greater = _exact_tails(doubled, int(round(2 * t_plus)))
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
        sd = math.sqrt(var)
        p_less = _normal_cdf((t_plus - mean + 0.5) / sd)
        p_greater = 1.0 - _normal_cdf((t_plus - mean - 0.5) / sd)
    p_two = min(1.0, 2.0 * min(p_less, p_greater))
    return WilcoxonResult(t_plus, p_two, min(1.0, p_less), min(1.0, p_greater), n, n_zero, bool(exact))


def wilcoxon_signed_rank(xs, ys, alternative=Alternative.TWO_SIDED) -> float:
    return wilcoxon_test(xs, ys).p(alternative)


def magnitude(delta: float) -> Magnitude:
    a = abs(delta)
    if a >= 0.474:
        return Magnitude.LARGE
    if a >= 0.33:
        return Magnitude.MEDIUM
    if a >= 0.147:
        return Magnitude.SMALL
    return Magnitude.NEGLIGIBLE


def cliffs_delta(xs, ys):
    """Return ``(delta, magnitude)``; delta = P(x > y) - P(x < y) over all pairs."""
    x = np.asarray(xs, dtype=float)
    y = np.sort(np.asarray(ys, dtype=float))
    if len(x) == 0 or len(y) == 0:
        raise ValidationError("cliffs_delta needs two non-empty samples")
    # per x: count of y strictly below minus count strictly above
    below = np.searchsorted(y, x, side="left")
    above = len(y) - np.searchsorted(y, x, side="right")
    delta = int(below.sum() - above.sum()) / (len(x) * len(y))
    return delta, magnitude(delta)


@dataclass(frozen=True)
class StatTestResult:
    p_two_sided: float
    p_less: float
    p_greater: float
    cliffs_delta: float
    magnitude: Magnitude
    n_pairs: int = 0
    n_zero_dropped: int = 0

    def to_dict(self) -> dict:
        return {
            "p_two_sided": self.p_two_sided,
            "p_less": self.p_less,
            "p_greater": self.p_greater,
            "cliffs_delta": self.cliffs_delta,
            "magnitude": self.magnitude.value,
            "n_pairs": self.n_pairs,
            "n_zero_dropped": self.n_zero_dropped,
        }


def compare(xs, ys) -> StatTestResult:
    """Wilcoxon (three forms) plus Cliff's delta of xs against ys."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            w = wilcoxon_test(xs, ys)
            p2, pl, pg, nz = w.p_two_sided, w.p_less, w.p_greater, w.n_zero
        except AllDifferencesZero:
            p2 = pl = pg = 1.0
            nz = len(xs)
    delta, mag = cliffs_delta(xs, ys)
    return StatTestResult(p2, pl, pg, delta, mag, len(xs), nz)


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class EvaluationReport:
    top1: int
    top3: int
    top5: int
    map_value: float
    exam_scores: tuple
    details: tuple = field(default=())
    variant: str = ""
    formula: str = ""

    @property
    def versions(self) -> int:
        return len(self.exam_scores)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "formula": self.formula,
            "versions": self.versions,
            "top1": self.top1,
            "top3": self.top3,
            "top5": self.top5,
            "map": self.map_value,
            "exam_scores": list(self.exam_scores),
            "details": [dict(d) for d in self.details],
        }


def evaluate(results) -> EvaluationReport:
    results = list(results)
    if not results:
        raise ValidationError("nothing to evaluate")
    details = []
    for res in results:
        rank = exam_rank(res)
        details.append({
            "version": res.version,
            "candidates": res.candidate_count,
            "best_fault_rank": rank,
            "top1": top_n(res, 1),
            "top3": top_n(res, 3),
            "top5": top_n(res, 5),
            "ap": average_precision(res),
            "exam": exam_score(res),
        })
    first = results[0].report
    return EvaluationReport(
        top1=sum(d["top1"] for d in details),
        top3=sum(d["top3"] for d in details),
        top5=sum(d["top5"] for d in details),
        map_value=sum(d["ap"] for d in details) / len(details),
        exam_scores=tuple(d["exam"] for d in details),
        details=tuple(details),
        variant=first.variant.value,
        formula=first.formula.name,
    )


def exam_curve(exam_scores, steps: int = 100):
    """Cumulative fraction of versions localized at each EXAM threshold on an even grid."""
    scores = np.sort(np.asarray(exam_scores, dtype=float))
    thresholds = np.linspace(0.0, 1.0, steps + 1)
    counts = np.searchsorted(scores, thresholds + 1e-12, side="right")
    return [(float(t), float(c) / len(scores)) for t, c in zip(thresholds, counts)]
