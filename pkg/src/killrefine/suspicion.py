"""Kill statistics, suspiciousness formulas, statement ranking.

Three pipelines are provided:

* ``Variant.FULL``          enhanced {0,1,2} matrix -> denoise -> fuzzy statistics
* ``Variant.DENOISE_ONLY``  boolean weak-kill matrix -> denoise -> fuzzy statistics
* ``Variant.METALLAXIS``    boolean weak-kill matrix -> classical integer statistics
"""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from killrefine.denoise import DenoiseConfig, RefinedKillMatrix, refine
from killrefine.enhance import BooleanKillMatrix, build_enhanced_matrix, build_weak_matrix
from killrefine.errors import EmptyScores
from killrefine.killdata import Dataset, MutantMeta

# Scores are snapped to this many significant digits before ranking so that
# floating-point noise from the transforms cannot reorder genuine ties.
SCORE_DIGITS = 12


class Formula(str, enum.Enum):
    DSTAR = "dstar"
    GP13 = "gp13"
    JACCARD = "jaccard"
    OCHIAI = "ochiai"
    OP2 = "op2"
    TARANTULA = "tarantula"


@dataclass(frozen=True)
class FormulaKind:
    formula: Formula
    dstar_exponent: int = 2

    def __post_init__(self):
        object.__setattr__(self, "formula", Formula(self.formula))
        if self.dstar_exponent < 1:
            raise ValueError("dstar_exponent must be a positive integer")

    @property
    def name(self) -> str:
        return self.formula.value

    @classmethod
    def all(cls, dstar_exponent=2):
        return [cls(f, dstar_exponent) for f in Formula]


class Variant(str, enum.Enum):
    FULL = "full"
    DENOISE_ONLY = "denoise-only"
    METALLAXIS = "metallaxis"


VariantKind = Variant


@dataclass(frozen=True)
class KillStatistics:
    """Per-mutant counts; arrays for fuzzy statistics are float, classical are int."""

    a_kf: np.ndarray
    a_kp: np.ndarray
    a_nf: np.ndarray
    a_np: np.ndarray

    def __len__(self):
        return len(self.a_kf)

    def row(self, i):
        return (self.a_kf[i], self.a_kp[i], self.a_nf[i], self.a_np[i])


FuzzyKillStatistics = KillStatistics


def fuzzy_statistics(refined: RefinedKillMatrix) -> KillStatistics:
    m = np.asarray(refined.cells, dtype=float)
    fails = np.asarray(refined.fail_vector, dtype=float)
    passes = 1.0 - fails
    return KillStatistics(m @ fails, m @ passes, (1.0 - m) @ fails, (1.0 - m) @ passes)


def classical_statistics(matrix: BooleanKillMatrix) -> KillStatistics:
    k = np.asarray(matrix.cells, dtype=np.int64)
    fails = np.asarray(matrix.fail_vector, dtype=np.int64)
    passes = 1 - fails
    return KillStatistics(k @ fails, k @ passes, (1 - k) @ fails, (1 - k) @ passes)


def _div(num, den):
    return num / den if den != 0 else 0.0


def mutant_suspiciousness(stats, formula: FormulaKind) -> float:
    """Score one mutant from ``(a_kf, a_kp, a_nf, a_np)``.

    Any fraction whose denominator is zero contributes 0.
    """
    kf, kp, nf, np_ = (float(x) for x in stats)
    f = formula.formula
    if f is Formula.JACCARD:
        return _div(kf, kf + nf + kp)
    if f is Formula.TARANTULA:
        fail_ratio = _div(kf, kf + nf)
        pass_ratio = _div(kp, kp + np_)
        return _div(fail_ratio, fail_ratio + pass_ratio)
    if f is Formula.OCHIAI:
        return _div(kf, math.sqrt((kf + nf) * (kf + kp)))
    if f is Formula.OP2:
        return kf - _div(kp, kp + np_ + 1)
    if f is Formula.DSTAR:
        return _div(kf**formula.dstar_exponent, kp + nf)
    if f is Formula.GP13:
        return kf + _div(kf, 2 * kp + np_)
    raise ValueError(f"unknown formula {f!r}")


def score_mutants(stats: KillStatistics, rows, formula: FormulaKind) -> dict:
    return {mid: mutant_suspiciousness(stats.row(i), formula) for i, mid in enumerate(rows)}


def statement_suspiciousness(mutant_scores: dict, mutants) -> dict:
    """Max over each statement's mutants. ``mutants`` maps id -> MutantMeta or is an iterable of MutantMeta."""
    if not isinstance(mutants, dict):
        mutants = {m.mutant_id: m for m in mutants}
    out = {}
    for mid, score in mutant_scores.items():
        stmt = mutants[mid].statement
        if stmt not in out or score > out[stmt]:
            out[stmt] = score
    return out


@dataclass(frozen=True)
class RankedStatement:
    file: str
    line: int
    score: float
    rank: int

    @property
    def statement(self):
        return (self.file, self.line)


@dataclass(frozen=True)
class SuspiciousnessReport:
    ranking: tuple
    formula: FormulaKind
    variant: Variant
    cutoff_d0: Optional[float] = None

    def __len__(self):
        return len(self.ranking)

    def statements(self):
        return [r.statement for r in self.ranking]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "formula": self.formula.name,
            "cutoff_d0": self.cutoff_d0,
            "ranking": [{"file": r.file, "line": r.line, "score": r.score, "rank": r.rank}
                        for r in self.ranking],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SuspiciousnessReport":
        ranking = tuple(RankedStatement(str(r["file"]), int(r["line"]), float(r["score"]), int(r["rank"]))
                        for r in data["ranking"])
        return cls(ranking, FormulaKind(data["formula"]), Variant(data["variant"]), data.get("cutoff_d0"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "file", "line", "score"])
        for r in self.ranking:
            w.writerow([r.rank, r.file, r.line, repr(r.score)])
        return buf.getvalue()


def _snap(score: float) -> float:
    if score == 0 or not math.isfinite(score):
        return float(score) + 0.0  # folds -0.0
    return float(f"{score:.{SCORE_DIGITS}g}")


def rank_statements(scores: dict, formula: FormulaKind, variant: Variant,
                    cutoff_d0: Optional[float] = None) -> SuspiciousnessReport:
    """Sort by descending score, ties broken by (file, line)."""
    if not scores:
        raise EmptyScores("no statements to rank")
    snapped = [((f, int(n)), _snap(s)) for (f, n), s in scores.items()]
    snapped.sort(key=lambda item: (-item[1], item[0]))
    ranking = tuple(RankedStatement(f, n, s, i) for i, ((f, n), s) in enumerate(snapped, start=1))
    return SuspiciousnessReport(ranking, formula, Variant(variant), cutoff_d0)


def variant_statistics(dataset: Dataset, variant: Variant, config: DenoiseConfig, timings=None):
    """Build the variant's kill statistics; returns ``(row ids, stats)``."""
    variant = Variant(variant)
    t0 = time.perf_counter()
    if variant is Variant.FULL:
        matrix = build_enhanced_matrix(dataset)
    else:
        matrix = build_weak_matrix(dataset)
    t1 = time.perf_counter()
    if variant is Variant.METALLAXIS:
        stats = classical_statistics(matrix)
    else:
        stats = fuzzy_statistics(refine(matrix, config))
    t2 = time.perf_counter()
    if timings is not None:
        timings["matrix_build"] = timings.get("matrix_build", 0.0) + (t1 - t0)
        timings["refine"] = timings.get("refine", 0.0) + (t2 - t1)
    return matrix.rows, stats


def localize_many(dataset: Dataset, variant: Variant, formulas, config: DenoiseConfig = DenoiseConfig(),
                  timings=None) -> list:
    """One report per formula, sharing a single matrix build and refinement."""
    variant = Variant(variant)
    rows, stats = variant_statistics(dataset, variant, config, timings)
    cutoff = None if variant is Variant.METALLAXIS else config.cutoff_d0
    reports = []
    t0 = time.perf_counter()
    for formula in formulas:
        mutant_scores = score_mutants(stats, rows, formula)
        stmt_scores = statement_suspiciousness(mutant_scores, dataset.mutants)
        reports.append(rank_statements(stmt_scores, formula, variant, cutoff))
    if timings is not None:
        timings["suspiciousness"] = timings.get("suspiciousness", 0.0) + (time.perf_counter() - t0)
    return reports


def localize(dataset: Dataset, variant: Variant, formula: FormulaKind,
             config: DenoiseConfig = DenoiseConfig(), timings=None) -> SuspiciousnessReport:
    return localize_many(dataset, variant, [formula], config, timings)[0]
