"""Weak/strong kill classification and kill-matrix construction."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from killrefine.errors import MalformedRow
from killrefine.killdata import Dataset, ExecutionRecord, Outcome, TestMeta, order_axes, write_tsv


class KillClass(enum.IntEnum):
    SURVIVE = 0
    WEAK = 1
    STRONG = 2


def _normalize(outcome: Outcome, signature: str):
    # abnormal terminations count as failures with a fixed signature
    if outcome is Outcome.TIMEOUT:
        return Outcome.FAIL, "TIMEOUT"
    if outcome is Outcome.CRASH:
        return Outcome.FAIL, "CRASH"
    return outcome, signature or ""


def classify_kill(record: Optional[ExecutionRecord], test: TestMeta) -> KillClass:
    """Classify one mutant run against the original run of ``test``.

    STRONG when the pass/fail outcome changed, WEAK when only the error
    signature changed, SURVIVE otherwise (including a missing record).
    """
    if record is None:
        return KillClass.SURVIVE
    outcome, signature = _normalize(record.outcome, record.error_signature)
    if outcome is not test.original_outcome:
        return KillClass.STRONG
    if signature != (test.original_error_signature or ""):
        return KillClass.WEAK
    return KillClass.SURVIVE


@dataclass(frozen=True)
class KillMatrix:
    """Ordered mutant x test matrix. ``fail_vector`` may be None for dumps read back from disk."""

    rows: tuple
    cols: tuple
    cells: np.ndarray
    fail_vector: Optional[np.ndarray] = None

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"cells shape {cells.shape} does not match axes "
                             f"({len(self.rows)}, {len(self.cols)})")
        cells.setflags(write=False)
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "cells", cells)
        if self.fail_vector is not None:
            fv = np.asarray(self.fail_vector, dtype=np.int8)
            if fv.shape != (len(self.cols),):
                raise ValueError("fail_vector is not aligned with columns")
            fv.setflags(write=False)
            object.__setattr__(self, "fail_vector", fv)

    @property
    def shape(self):
        return self.cells.shape


class BooleanKillMatrix(KillMatrix):
    pass


class EnhancedKillMatrix(KillMatrix):
    pass


def _classify_all(dataset: Dataset):
    rows, cols = order_axes(dataset)
    row_at = {m: i for i, m in enumerate(rows)}
    col_at = {t: j for j, t in enumerate(cols)}
    cells = np.zeros((len(rows), len(cols)), dtype=np.int8)
    for rec in dataset.executions:
        cells[row_at[rec.mutant_id], col_at[rec.test_id]] = classify_kill(rec, dataset.test(rec.test_id))
    fails = np.array([dataset.test(t).failing for t in cols], dtype=np.int8)
    return rows, cols, cells, fails


def build_enhanced_matrix(dataset: Dataset) -> EnhancedKillMatrix:
    """Cells over {0, 1, 2}: survive, weak kill, strong kill."""
    rows, cols, cells, fails = _classify_all(dataset)
    return EnhancedKillMatrix(rows, cols, cells, fails)


def build_weak_matrix(dataset: Dataset) -> BooleanKillMatrix:
    """Boolean weak-kill matrix; a strong kill is also a weak kill."""
    rows, cols, cells, fails = _classify_all(dataset)
    return BooleanKillMatrix(rows, cols, (cells >= KillClass.WEAK).astype(np.int8), fails)


# ---------------------------------------------------------------- dumps


def _format_cell(value, real):
    if real:
        return f"{float(value):.9g}"
    return str(int(value))


def write_matrix_tsv(matrix: KillMatrix, path) -> Path:
    """Dense dump: header ``mutant_id`` + test ids, one row per mutant."""
    real = np.issubdtype(matrix.cells.dtype, np.floating)
    rows = ([mid] + [_format_cell(v, real) for v in row] for mid, row in zip(matrix.rows, matrix.cells))
    write_tsv(path, ("mutant_id",) + tuple(matrix.cols), rows)
    return Path(path)


def read_matrix_tsv(path, kind=EnhancedKillMatrix) -> KillMatrix:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh if ln.strip()]
    if not lines:
        raise MalformedRow(path, 1, "empty matrix file")
    header = lines[0].split("\t")
    if header[0] != "mutant_id":
        raise MalformedRow(path, 1, "first header cell must be mutant_id")
    cols = header[1:]
    rows, values = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(header):
            raise MalformedRow(path, lineno, f"expected {len(header)} fields, got {len(cells)}")
        try:
            values.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise MalformedRow(path, lineno, str(exc)) from None
        rows.append(cells[0])
    cells = np.array(values, dtype=float).reshape(len(rows), len(cols))
    if np.all(cells == np.round(cells)):
        cells = cells.astype(np.int8)
    return kind(rows, cols, cells)
