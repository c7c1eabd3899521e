"""Seeded synthetic fault scenarios.

Each scenario is one synthetic source file whose line ``i`` is statement
``i``. Failing tests kill mutants of faulty statements with ``p_detect``
and everything else with ``p_couple``; statements within
``locality_span`` lines of a fault fall off linearly between the two and
share the fault's random draws per test (both for the kill and for its
upgrade), so their kill rows are correlated. Passing tests kill with
``p_pass_kill``. Every kill becomes a strong kill with
``p_strong_given_weak``. Finally each (mutant, failing
test) weak-kill bit flips with ``p_flip``; a flipped-on bit is a weak-only
kill.

Tests are laid out in suites of ``SUITE_SIZE``; the failing tests form one
contiguous block in that order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

import numpy as np

from killrefine.errors import InvalidParams
from killrefine.killdata import Dataset, ExecutionRecord, GroundTruth, MutantMeta, Outcome, TestMeta

SYNTH_FILE = "src/Synthetic.java"
SUITE_SIZE = 10
OPERATORS = ("AOR", "ROR", "COR", "LVR", "STD")


@dataclass(frozen=True)
class ScenarioParams:
    n_statements: int = 100
    mutants_per_statement: int = 3
    n_failing_tests: int = 5
    n_passing_tests: int = 45
    n_faulty_statements: int = 1
    p_detect: float = 0.9
    p_couple: float = 0.05
    p_flip: float = 0.10
    p_strong_given_weak: float = 0.7
    p_pass_kill: float = 0.02
    locality_span: int = 2

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_statements < 2:
            raise InvalidParams("n_statements must be >= 2")
        for name in ("mutants_per_statement", "n_failing_tests", "n_passing_tests", "n_faulty_statements"):
            if getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be >= 1")
        if self.n_faulty_statements >= self.n_statements:
            raise InvalidParams("n_faulty_statements must be < n_statements")
        for name in ("p_detect", "p_couple", "p_flip", "p_strong_given_weak", "p_pass_kill"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1], got {p}")
        if self.locality_span < 0:
            raise InvalidParams("locality_span must be >= 0")

    def digest(self) -> bytes:
        canon = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).digest()

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioParams":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise InvalidParams(f"unknown scenario parameters: {', '.join(sorted(unknown))}")
        kwargs = {}
        for key, value in data.items():
            try:
                kwargs[key] = int(value) if known[key] == "int" else float(value)
            except ValueError:
                raise InvalidParams(f"{key}: cannot parse {value!r}") from None
        return cls(**kwargs)


@dataclass(frozen=True)
class Scenario:
    dataset: Dataset
    seed: int
    params: ScenarioParams

    @property
    def name(self) -> str:
        return f"scenario-{self.seed:06d}"


def _rng(params: ScenarioParams, seed: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise InvalidParams(f"seed must be a 64-bit unsigned integer, got {seed}")
    words = np.frombuffer(params.digest()[:16], dtype="<u4").tolist()
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, *words])))


def _kill_probabilities(params: ScenarioParams, faults):
    """Per statement (0-based): detection probability and the fault it is tied to (-1 for none)."""
    prob = np.full(params.n_statements, params.p_couple)
    owner = np.full(params.n_statements, -1)
    span = params.locality_span
    for k, f in enumerate(faults):
        for s in range(max(0, f - span), min(params.n_statements, f + span + 1)):
            d = abs(s - f)
            p = params.p_detect + (params.p_couple - params.p_detect) * d / (span + 1)
            if owner[s] < 0 or p > prob[s]:
                prob[s] = p
                owner[s] = k
    return prob, owner


def generate_scenario(params: ScenarioParams, seed: int) -> Scenario:
    params.validate()
    rng = _rng(params, seed)
    n_stmt, per = params.n_statements, params.mutants_per_statement
    n_fail, n_pass = params.n_failing_tests, params.n_passing_tests
    n_tests = n_fail + n_pass
    n_mut = n_stmt * per

    faults = np.sort(rng.choice(n_stmt, size=params.n_faulty_statements, replace=False))
    fail_start = int(rng.integers(0, n_tests - n_fail + 1))
    failing = np.zeros(n_tests, dtype=bool)
    failing[fail_start:fail_start + n_fail] = True

    tests = []
    for pos in range(n_tests):
        tid = f"t{pos:04d}"
        suite = f"Suite{pos // SUITE_SIZE:03d}"
        if failing[pos]:
            tests.append(TestMeta(tid, suite, f"test{pos:04d}", Outcome.FAIL, f"E-{tid}"))
        else:
            tests.append(TestMeta(tid, suite, f"test{pos:04d}", Outcome.PASS, ""))

    stmt_of = np.repeat(np.arange(n_stmt), per)
    ops = rng.integers(0, len(OPERATORS), size=n_mut)
    mutants = [MutantMeta(f"m{i:06d}", SYNTH_FILE, int(stmt_of[i]) + 1, OPERATORS[ops[i]])
               for i in range(n_mut)]

    # weak kills by failing tests: shared draws near faults, independent elsewhere
    prob, owner = _kill_probabilities(params, faults)
    shared = rng.random((len(faults), n_tests))
    own = rng.random((n_mut, n_tests))
    mut_owner = owner[stmt_of]
    draws = np.where(mut_owner[:, None] >= 0, shared[np.maximum(mut_owner, 0)], own)
    weak = np.zeros((n_mut, n_tests), dtype=bool)
    weak[:, failing] = (draws < prob[stmt_of][:, None])[:, failing]
    weak[:, ~failing] = (rng.random((n_mut, n_pass)) < params.p_pass_kill)

    # propagation to the outcome is shared inside a fault's window, like detection
    up = np.where(mut_owner[:, None] >= 0, rng.random((len(faults), n_tests))[np.maximum(mut_owner, 0)],
                  rng.random((n_mut, n_tests)))
    strong = weak & (up < params.p_strong_given_weak)

    flips = (rng.random((n_mut, n_tests)) < params.p_flip) & failing[None, :]
    flipped_on = flips & ~weak
    weak = weak ^ flips
    strong &= weak
    strong &= ~flipped_on

    sig_words = rng.integers(0, 2**32, size=(n_mut, n_tests), dtype=np.uint64)
    abnormal = rng.random((n_mut, n_tests))

    records = []
    for i, j in zip(*np.nonzero(weak)):
        test = tests[j]
        mid = mutants[i].mutant_id
        hexsig = f"{int(sig_words[i, j]):08x}"
        if strong[i, j]:
            if test.failing:
                records.append(ExecutionRecord(mid, test.test_id, Outcome.PASS, ""))
            elif abnormal[i, j] < 0.05:
                records.append(ExecutionRecord(mid, test.test_id, Outcome.TIMEOUT, ""))
            elif abnormal[i, j] < 0.10:
                records.append(ExecutionRecord(mid, test.test_id, Outcome.CRASH, ""))
            else:
                records.append(ExecutionRecord(mid, test.test_id, Outcome.FAIL, f"S{hexsig}"))
        else:
            records.append(ExecutionRecord(mid, test.test_id, test.original_outcome, f"W{hexsig}"))

    truth = GroundTruth.of((SYNTH_FILE, int(f) + 1) for f in faults)
    return Scenario(Dataset(mutants, tests, records, truth), seed, params)


def generate_ensemble(params: ScenarioParams, base_seed: int, count: int) -> list:
    if count < 1:
        raise InvalidParams("count must be >= 1")
    params.validate()
    return [generate_scenario(params, base_seed + k) for k in range(count)]
