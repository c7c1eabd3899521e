"""Domain model and TSV ingestion for mutants, tests, execution records and faults.

A dataset directory holds four tab-separated files, each with a header row::

    mutants.tsv     mutant_id  file_path  line_number  operator
    tests.tsv       test_id  suite  name  original_outcome  original_error_signature
    executions.tsv  mutant_id  test_id  outcome  error_signature
    faults.tsv      file_path  line_number            (optional)

A (mutant, test) pair with no execution row behaves exactly like the
original program on that test.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from killrefine.errors import DanglingReference, DuplicateId, MalformedRow, MissingFile

MUTANTS_FILE = "mutants.tsv"
TESTS_FILE = "tests.tsv"
EXECUTIONS_FILE = "executions.tsv"
FAULTS_FILE = "faults.tsv"

MUTANT_HEADER = ("mutant_id", "file_path", "line_number", "operator")
TEST_HEADER = ("test_id", "suite", "name", "original_outcome", "original_error_signature")
EXECUTION_HEADER = ("mutant_id", "test_id", "outcome", "error_signature")
FAULT_HEADER = ("file_path", "line_number")

Statement = tuple  # (file_path, line_number)


class Outcome(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    TIMEOUT = "TIMEOUT"
    CRASH = "CRASH"


@dataclass(frozen=True)
class MutantMeta:
    mutant_id: str
    file_path: str
    line_number: int
    operator: str = ""

    def __post_init__(self):
        if self.line_number < 1:
            raise ValueError(f"mutant {self.mutant_id}: line_number must be >= 1")

    @property
    def statement(self) -> Statement:
        return (self.file_path, self.line_number)


@dataclass(frozen=True)
class TestMeta:
    __test__ = False  # keep pytest from collecting this class

    test_id: str
    suite: str
    name: str
    original_outcome: Outcome
    original_error_signature: str = ""

    def __post_init__(self):
        if self.original_outcome not in (Outcome.PASS, Outcome.FAIL):
            raise ValueError(f"test {self.test_id}: original outcome must be PASS or FAIL")
        if self.original_outcome is Outcome.PASS and self.original_error_signature:
            raise ValueError(f"test {self.test_id}: passing test cannot carry an error signature")

    @property
    def failing(self) -> bool:
        return self.original_outcome is Outcome.FAIL


@dataclass(frozen=True)
class ExecutionRecord:
    mutant_id: str
    test_id: str
    outcome: Outcome
    error_signature: str = ""


@dataclass(frozen=True)
class GroundTruth:
    faulty_statements: frozenset

    @classmethod
    def of(cls, statements: Iterable[Statement]) -> "GroundTruth":
        return cls(frozenset((str(f), int(n)) for f, n in statements))

    def __contains__(self, statement) -> bool:
        return statement in self.faulty_statements

    def __len__(self) -> int:
        return len(self.faulty_statements)


@dataclass(frozen=True)
class Dataset:
    mutants: tuple
    tests: tuple
    executions: tuple
    ground_truth: Optional[GroundTruth] = None
    _mutant_index: dict = field(default=None, repr=False, compare=False)
    _test_index: dict = field(default=None, repr=False, compare=False)
    _record_index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mutants", tuple(self.mutants))
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "executions", tuple(self.executions))
        mutant_index = {}
        for m in self.mutants:
            if m.mutant_id in mutant_index:
                raise DuplicateId(f"duplicate mutant_id {m.mutant_id!r}")
            mutant_index[m.mutant_id] = m
        test_index = {}
        for t in self.tests:
            if t.test_id in test_index:
                raise DuplicateId(f"duplicate test_id {t.test_id!r}")
            test_index[t.test_id] = t
        record_index = {}
        for r in self.executions:
            if r.mutant_id not in mutant_index:
                raise DanglingReference(f"execution references unknown mutant_id {r.mutant_id!r}")
            if r.test_id not in test_index:
                raise DanglingReference(f"execution references unknown test_id {r.test_id!r}")
            key = (r.mutant_id, r.test_id)
            if key in record_index:
                raise DuplicateId(f"duplicate execution record for {key}")
            record_index[key] = r
        object.__setattr__(self, "_mutant_index", mutant_index)
        object.__setattr__(self, "_test_index", test_index)
        object.__setattr__(self, "_record_index", record_index)

    def mutant(self, mutant_id: str) -> MutantMeta:
        return self._mutant_index[mutant_id]

    def test(self, test_id: str) -> TestMeta:
        return self._test_index[test_id]

    def record(self, mutant_id: str, test_id: str) -> Optional[ExecutionRecord]:
        return self._record_index.get((mutant_id, test_id))


def order_axes(dataset: Dataset):
    """Return ``(mutant_ids, test_ids)`` in signal order.

    Mutants sort by source position, tests group by suite and sort by name
    within a suite. Ids break the remaining ties.
    """
    mutants = sorted(dataset.mutants, key=lambda m: (m.file_path, m.line_number, m.mutant_id))
    tests = sorted(dataset.tests, key=lambda t: (t.suite, t.name, t.test_id))
    return [m.mutant_id for m in mutants], [t.test_id for t in tests]


# ---------------------------------------------------------------- reading


def _read_rows(path: Path, header: tuple):
    """Yield ``(line_number, fields)`` for each data row of a TSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRow(path, 1, "missing header row")
    got = tuple(c.rstrip("\r") for c in lines[0].split("\t"))
    if got != header:
        raise MalformedRow(path, 1, f"expected header {'/'.join(header)}, got {'/'.join(got)}")
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        cells = line.split("\t")
        # trailing optional column may be dropped by some exporters
        if len(cells) == len(header) - 1 and header[-1].endswith("signature"):
            cells.append("")
        if len(cells) != len(header):
            raise MalformedRow(path, lineno, f"expected {len(header)} fields, got {len(cells)}")
        yield lineno, cells


def _parse_line_number(path, lineno, text):
    try:
        value = int(text)
    except ValueError:
        raise MalformedRow(path, lineno, f"line_number {text!r} is not an integer") from None
    if value < 1:
        raise MalformedRow(path, lineno, f"line_number must be >= 1, got {value}")
    return value


def _parse_outcome(path, lineno, text, allowed):
    try:
        outcome = Outcome(text)
    except ValueError:
        outcome = None
    if outcome not in allowed:
        names = "|".join(o.value for o in allowed)
        raise MalformedRow(path, lineno, f"outcome {text!r} not in {names}")
    return outcome


def read_mutants(path) -> list:
    path = Path(path)
    out = []
    for lineno, (mid, fpath, line, op) in _read_rows(path, MUTANT_HEADER):
        if not mid:
            raise MalformedRow(path, lineno, "empty mutant_id")
        out.append(MutantMeta(mid, fpath, _parse_line_number(path, lineno, line), op))
    return out


def read_tests(path) -> list:
    path = Path(path)
    out = []
    for lineno, (tid, suite, name, outcome, sig) in _read_rows(path, TEST_HEADER):
        if not tid:
            raise MalformedRow(path, lineno, "empty test_id")
        outcome = _parse_outcome(path, lineno, outcome, (Outcome.PASS, Outcome.FAIL))
        if outcome is Outcome.PASS and sig:
            raise MalformedRow(path, lineno, "passing test has an error signature")
        out.append(TestMeta(tid, suite, name, outcome, sig))
    return out


def read_executions(path) -> list:
    path = Path(path)
    out = []
    for lineno, (mid, tid, outcome, sig) in _read_rows(path, EXECUTION_HEADER):
        out.append(ExecutionRecord(mid, tid, _parse_outcome(path, lineno, outcome, tuple(Outcome)), sig))
    return out


def read_faults(path) -> GroundTruth:
    path = Path(path)
    rows = []
    for lineno, (fpath, line) in _read_rows(path, FAULT_HEADER):
        rows.append((fpath, _parse_line_number(path, lineno, line)))
    return GroundTruth.of(rows)


def load_dataset(directory_path) -> Dataset:
    """Load and validate a dataset directory."""
    root = Path(directory_path)
    if not root.is_dir():
        raise MissingFile(f"{root}: not a directory")
    for name in (MUTANTS_FILE, TESTS_FILE, EXECUTIONS_FILE):
        if not (root / name).is_file():
            raise MissingFile(f"{root / name}: file not found")
    mutants = read_mutants(root / MUTANTS_FILE)
    tests = read_tests(root / TESTS_FILE)
    executions = read_executions(root / EXECUTIONS_FILE)
    truth = read_faults(root / FAULTS_FILE) if (root / FAULTS_FILE).is_file() else None
    return Dataset(mutants, tests, executions, truth)


# ---------------------------------------------------------------- writing


def _check_cell(value: str):
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"field {value!r} contains a tab or newline")
    return value


def write_tsv(path, header, rows):
    """Write rows atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_check_cell(str(c)) for c in row) + "\n")
    os.replace(tmp, path)


def write_dataset(dataset: Dataset, directory_path) -> Path:
    root = Path(directory_path)
    root.mkdir(parents=True, exist_ok=True)
    write_tsv(root / MUTANTS_FILE, MUTANT_HEADER,
              ((m.mutant_id, m.file_path, m.line_number, m.operator) for m in dataset.mutants))
    write_tsv(root / TESTS_FILE, TEST_HEADER,
              ((t.test_id, t.suite, t.name, t.original_outcome.value, t.original_error_signature)
               for t in dataset.tests))
    write_tsv(root / EXECUTIONS_FILE, EXECUTION_HEADER,
              ((r.mutant_id, r.test_id, r.outcome.value, r.error_signature) for r in dataset.executions))
    if dataset.ground_truth is not None:
        write_tsv(root / FAULTS_FILE, FAULT_HEADER, sorted(dataset.ground_truth.faulty_statements))
    return root
