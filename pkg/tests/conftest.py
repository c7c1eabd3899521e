from pathlib import Path

import pytest

from killrefine.killdata import write_tsv

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_dataset_files(root: Path, mutants, tests, executions, faults=None):
    """Write raw rows (tuples of strings/ints) as a dataset directory."""
    root.mkdir(parents=True, exist_ok=True)
    write_tsv(root / "mutants.tsv", ("mutant_id", "file_path", "line_number", "operator"), mutants)
    write_tsv(root / "tests.tsv",
              ("test_id", "suite", "name", "original_outcome", "original_error_signature"), tests)
    write_tsv(root / "executions.tsv", ("mutant_id", "test_id", "outcome", "error_signature"), executions)
    if faults is not None:
        write_tsv(root / "faults.tsv", ("file_path", "line_number"), faults)
    return root


SMALL_MUTANTS = [
    ("m1", "a.java", 5, "AOR"),
    ("m2", "a.java", 9, "ROR"),
    ("m3", "b.java", 1, "LVR"),
]
SMALL_TESTS = [
    ("t1", "SuiteA", "testOne", "FAIL", "AssertionError"),
    ("t2", "SuiteA", "testTwo", "PASS", ""),
]
SMALL_EXECUTIONS = [
    ("m1", "t1", "PASS", ""),
    ("m1", "t2", "PASS", "NPE"),
    ("m2", "t1", "FAIL", "AssertionError"),
    ("m2", "t2", "FAIL", "AssertionError"),
    ("m3", "t1", "TIMEOUT", ""),
    ("m3", "t2", "PASS", ""),
]


@pytest.fixture
def small_dir(tmp_path):
    return write_dataset_files(tmp_path / "small", SMALL_MUTANTS, SMALL_TESTS, SMALL_EXECUTIONS,
                               [("a.java", 5)])
