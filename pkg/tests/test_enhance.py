import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import classify_by_hand
from killrefine.enhance import (
    KillClass,
    build_enhanced_matrix,
    build_weak_matrix,
    classify_kill,
    read_matrix_tsv,
    write_matrix_tsv,
)
from killrefine.killdata import Dataset, ExecutionRecord, MutantMeta, Outcome, TestMeta, load_dataset

FAILING = TestMeta("t", "S", "t", Outcome.FAIL, "E1")
PASSING = TestMeta("t", "S", "t", Outcome.PASS, "")


def rec(outcome, sig=""):
    return ExecutionRecord("m", "t", Outcome(outcome), sig)


def test_pass_to_fail_is_strong():
    assert classify_kill(rec("FAIL", "boom"), PASSING) is KillClass.STRONG


def test_same_failure_different_message_is_weak():
    assert classify_kill(rec("FAIL", "E2"), FAILING) is KillClass.WEAK


def test_identical_pass_survives():
    assert classify_kill(rec("PASS"), PASSING) is KillClass.SURVIVE


def test_identical_failure_survives():
    assert classify_kill(rec("FAIL", "E1"), FAILING) is KillClass.SURVIVE


def test_absent_record_survives():
    assert classify_kill(None, FAILING) is KillClass.SURVIVE


def test_fail_to_pass_is_strong():
    assert classify_kill(rec("PASS"), FAILING) is KillClass.STRONG


@pytest.mark.parametrize("outcome, test, expected", [
    ("TIMEOUT", PASSING, KillClass.STRONG),
    ("CRASH", PASSING, KillClass.STRONG),
    ("TIMEOUT", FAILING, KillClass.WEAK),
    ("CRASH", TestMeta("t", "S", "t", Outcome.FAIL, "CRASH"), KillClass.SURVIVE),
])
def test_abnormal_terminations(outcome, test, expected):
    assert classify_kill(rec(outcome), test) is expected


@given(st.sampled_from(["PASS", "FAIL"]), st.sampled_from(["", "E1", "E2", "TIMEOUT"]),
       st.sampled_from(list(Outcome)), st.sampled_from(["", "E1", "E2", "CRASH"]))
def test_classify_matches_definitions(orig, orig_sig, outcome, sig):
    if orig == "PASS":
        orig_sig = ""
    test = TestMeta("t", "S", "t", Outcome(orig), orig_sig)
    got = classify_kill(ExecutionRecord("m", "t", outcome, sig), test)
    assert int(got) == classify_by_hand(orig, orig_sig, outcome.value, sig)


def test_small_dataset_matrices(small_dir):
    ds = load_dataset(small_dir)
    enhanced = build_enhanced_matrix(ds)
    assert enhanced.rows == ("m1", "m2", "m3")
    assert enhanced.cols == ("t1", "t2")
    np.testing.assert_array_equal(enhanced.cells, [[2, 1], [0, 2], [1, 0]])
    np.testing.assert_array_equal(enhanced.fail_vector, [1, 0])
    weak = build_weak_matrix(ds)
    np.testing.assert_array_equal(weak.cells, [[1, 1], [0, 1], [1, 0]])


def _two_by_two(records):
    mutants = [MutantMeta("m1", "a", 1), MutantMeta("m2", "a", 2)]
    tests = [TestMeta("t1", "S", "a", Outcome.PASS), TestMeta("t2", "S", "b", Outcome.FAIL, "E")]
    return Dataset(mutants, tests, records)


def test_enhanced_example_rows():
    ds = _two_by_two([ExecutionRecord("m1", "t1", Outcome.FAIL, "x"),
                      ExecutionRecord("m1", "t2", Outcome.FAIL, "other")])
    np.testing.assert_array_equal(build_enhanced_matrix(ds).cells, [[2, 1], [0, 0]])


def test_all_survive_gives_zero_weak_matrix():
    assert not build_weak_matrix(_two_by_two([])).cells.any()


def test_single_strong_record():
    ds = _two_by_two([ExecutionRecord("m2", "t2", Outcome.PASS, "")])
    np.testing.assert_array_equal(build_weak_matrix(ds).cells, [[0, 0], [0, 1]])


def test_all_strong_dataset():
    ds = _two_by_two([ExecutionRecord(m, "t1", Outcome.FAIL, "x") for m in ("m1", "m2")]
                     + [ExecutionRecord(m, "t2", Outcome.PASS, "") for m in ("m1", "m2")])
    assert (build_enhanced_matrix(ds).cells == 2).all()


def _random_dataset(rng, n_mut=6, n_test=5):
    mutants = [MutantMeta(f"m{i}", rng.choice("ab"), rng.randint(1, 9)) for i in range(n_mut)]
    tests = []
    for j in range(n_test):
        fail = rng.random() < 0.4
        tests.append(TestMeta(f"t{j}", rng.choice(["S1", "S2"]), f"n{rng.randint(0, 9)}",
                              Outcome.FAIL if fail else Outcome.PASS, "E1" if fail else ""))
    records = []
    for m in mutants:
        for t in tests:
            if rng.random() < 0.7:
                records.append(ExecutionRecord(m.mutant_id, t.test_id, rng.choice(list(Outcome)),
                                               rng.choice(["", "E1", "E2"])))
    return Dataset(mutants, tests, records)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_containment_and_order_independence(seed):
    rng = random.Random(seed)
    ds = _random_dataset(rng)
    enhanced = build_enhanced_matrix(ds)
    weak = build_weak_matrix(ds)
    np.testing.assert_array_equal(enhanced.cells >= 1, weak.cells == 1)
    shuffled = list(ds.executions)
    rng.shuffle(shuffled)
    again = build_enhanced_matrix(Dataset(ds.mutants, ds.tests, shuffled))
    np.testing.assert_array_equal(again.cells, enhanced.cells)
    assert again.rows == enhanced.rows and again.cols == enhanced.cols


def test_matrix_dump_round_trip(tmp_path, small_dir):
    enhanced = build_enhanced_matrix(load_dataset(small_dir))
    path = write_matrix_tsv(enhanced, tmp_path / "m.tsv")
    assert path.read_text().splitlines()[0] == "mutant_id\tt1\tt2"
    assert path.read_text().splitlines()[1] == "m1\t2\t1"
    back = read_matrix_tsv(path)
    np.testing.assert_array_equal(back.cells, enhanced.cells)
    assert back.rows == enhanced.rows and back.cols == enhanced.cols
