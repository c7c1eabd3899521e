"""Command-line interface.

Subcommands::

    build     dataset directory -> weak and enhanced matrix dumps
    refine    matrix dump or dataset directory -> refined matrix dump
    localize  dataset directory -> suspiciousness report(s), JSON + CSV
    evaluate  per-version reports + ground truth -> metrics, EXAM curves, comparisons
    simulate  scenario parameters -> synthetic dataset directories
    pipeline  simulate -> localize -> evaluate

Exit status is 0 on success, 1 on invalid input and 2 on internal errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import itertools
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from killrefine import plotting
from killrefine.denoise import DenoiseConfig, MaskKind, refine
from killrefine.enhance import (
    EnhancedKillMatrix,
    build_enhanced_matrix,
    build_weak_matrix,
    read_matrix_tsv,
    write_matrix_tsv,
)
from killrefine.errors import MissingFile, ValidationError
from killrefine.killdata import FAULTS_FILE, load_dataset, read_faults, write_dataset
from killrefine.metrics import VersionResult, compare, evaluate, exam_curve
from killrefine.suspicion import Formula, FormulaKind, SuspiciousnessReport, Variant, localize_many
from killrefine.synth import ScenarioParams, generate_scenario

VARIANT_ORDER = [Variant.FULL, Variant.DENOISE_ONLY, Variant.METALLAXIS]

DEFAULTS = {
    "variant": None,
    "formula": "ochiai",
    "cutoff": 0.3,
    "mask": "ideal",
    "seed": 0,
    "count": 1,
    "dstar_exponent": 2,
    "jobs": 1,
    "timings": False,
    "plots": True,
}


@dataclass
class PipelineConfig:
    command: str
    input: Optional[Path] = None
    output: Optional[Path] = None
    truth: Optional[Path] = None
    variants: list = field(default_factory=list)
    formulas: list = field(default_factory=list)
    denoise: DenoiseConfig = DenoiseConfig()
    seed: int = 0
    count: int = 1
    params: ScenarioParams = ScenarioParams()
    comparisons: list = field(default_factory=list)
    jobs: int = 1
    timings: bool = False
    plots: bool = True


# ---------------------------------------------------------------- config


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``[section]`` lines are ignored."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"{path}: config file not found")
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {value!r}")


def _parse_variants(value, command):
    if value is None or value == "all":
        return list(VARIANT_ORDER) if command in ("pipeline", "evaluate") else [Variant.FULL]
    try:
        return [Variant(v.strip()) for v in str(value).split(",")]
    except ValueError:
        raise ValidationError(f"unknown variant {value!r}") from None


def _parse_formulas(value, dstar_exponent):
    if value == "all":
        return FormulaKind.all(dstar_exponent)
    try:
        return [FormulaKind(Formula(f.strip()), dstar_exponent) for f in str(value).split(",")]
    except ValueError:
        raise ValidationError(f"unknown formula {value!r}") from None


def _parse_pair(text):
    try:
        a, b = text.split(":")
        return Variant(a.strip()), Variant(b.strip())
    except ValueError:
        raise ValidationError(f"comparison must look like full:metallaxis, got {text!r}") from None


def resolve_config(args) -> PipelineConfig:
    """Merge built-in defaults, the config file, then explicit flags."""
    file_cfg = read_config_file(args.config) if args.config else {}
    scenario_keys = {f.name for f in dataclasses.fields(ScenarioParams)}
    scenario = {k: v for k, v in file_cfg.items() if k in scenario_keys}
    option_keys = set(DEFAULTS) | {"input", "output", "truth", "compare"}
    unknown = set(file_cfg) - scenario_keys - option_keys
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(name):
        value = getattr(args, name, None)
        if value is not None:
            return value
        if name in file_cfg:
            return file_cfg[name]
        return DEFAULTS.get(name)

    for item in args.param or []:
        if "=" not in item:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        scenario[k.strip()] = v.strip()

    try:
        dstar_exponent = int(pick("dstar_exponent"))
        denoise = DenoiseConfig(float(pick("cutoff")), MaskKind(str(pick("mask")).lower()))
        seed, count, jobs = int(pick("seed")), int(pick("count")), int(pick("jobs"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if count < 1 or jobs < 1:
        raise ValidationError("--count and --jobs must be >= 1")

    compare_spec = getattr(args, "compare", None) or (
        [s for s in file_cfg.get("compare", "").split(",") if s.strip()])
    path = lambda v: Path(v) if v is not None else None  # noqa: E731
    return PipelineConfig(
        command=args.command,
        input=path(pick("input")),
        output=path(pick("output")),
        truth=path(pick("truth")),
        variants=_parse_variants(pick("variant"), args.command),
        formulas=_parse_formulas(pick("formula"), dstar_exponent),
        denoise=denoise,
        seed=seed,
        count=count,
        params=ScenarioParams.from_dict(scenario),
        comparisons=[_parse_pair(p) for p in compare_spec],
        jobs=jobs,
        timings=_as_bool(pick("timings")),
        plots=_as_bool(pick("plots")),
    )


# ---------------------------------------------------------------- output helpers


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def write_json(path, obj):
    return write_text(path, json.dumps(obj, indent=2) + "\n")


def report_stem(variant: Variant, formula: FormulaKind) -> str:
    return f"report-{variant.value}-{formula.name}"


def _require(path: Optional[Path], flag: str) -> Path:
    if path is None:
        raise ValidationError(f"{flag} is required")
    return path


def _add_timings(total, part):
    for k, v in part.items():
        total[k] = total.get(k, 0.0) + v


def _print_timings(timings, out=None):
    out = out or sys.stderr
    for stage in ("matrix_build", "refine", "suspiciousness"):
        if stage in timings:
            print(f"timing {stage}: {timings[stage]:.6f} s", file=out)


# ---------------------------------------------------------------- commands


def cmd_build(cfg: PipelineConfig) -> int:
    dataset = load_dataset(_require(cfg.input, "--input"))
    out = _require(cfg.output, "--output")
    out.mkdir(parents=True, exist_ok=True)
    weak = build_weak_matrix(dataset)
    enhanced = build_enhanced_matrix(dataset)
    write_matrix_tsv(weak, out / "weak_matrix.tsv")
    write_matrix_tsv(enhanced, out / "enhanced_matrix.tsv")
    print(f"wrote {len(weak.rows)}x{len(weak.cols)} matrices to {out}")
    return 0


def cmd_refine(cfg: PipelineConfig) -> int:
    src = _require(cfg.input, "--input")
    if src.is_dir():
        dataset = load_dataset(src)
        matrix = build_enhanced_matrix(dataset) if cfg.variants[0] is Variant.FULL else build_weak_matrix(dataset)
    elif src.is_file():
        matrix = read_matrix_tsv(src, EnhancedKillMatrix)
    else:
        raise MissingFile(f"{src}: not found")
    out = _require(cfg.output, "--output")
    if out.suffix != ".tsv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "refined_matrix.tsv"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    refined = refine(matrix, cfg.denoise)
    elapsed = time.perf_counter() - t0
    write_matrix_tsv(refined, out)
    if cfg.plots:
        plotting.plot_matrices([("input", matrix.cells), ("refined", refined.cells)],
                               out.with_suffix(".png"))
    if cfg.timings:
        _print_timings({"refine": elapsed})
    print(f"wrote {out}")
    return 0


def write_reports(reports, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        stem = report_stem(rep.variant, rep.formula)
        write_json(out_dir / f"{stem}.json", rep.to_dict())
        write_text(out_dir / f"{stem}.csv", rep.to_csv())


def localize_dataset(dataset, cfg: PipelineConfig, timings=None):
    reports = []
    for variant in cfg.variants:
        reports.extend(localize_many(dataset, variant, cfg.formulas, cfg.denoise, timings))
    return reports


def cmd_localize(cfg: PipelineConfig) -> int:
    dataset = load_dataset(_require(cfg.input, "--input"))
    out = _require(cfg.output, "--output")
    timings = {}
    reports = localize_dataset(dataset, cfg, timings)
    write_reports(reports, out)
    if cfg.timings:
        _print_timings(timings)
    print(f"wrote {len(reports)} report(s) to {out}")
    return 0


def _version_dirs(root: Path, marker) -> dict:
    if not root.is_dir():
        raise MissingFile(f"{root}: not a directory")
    return {d.name: d for d in sorted(root.iterdir()) if d.is_dir() and marker(d)}


def _read_report(path: Path) -> SuspiciousnessReport:
    try:
        return SuspiciousnessReport.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed report ({exc})") from None


def evaluate_tree(reports_root: Path, truth_root: Path, out: Path, comparisons, plots=True) -> dict:
    """Evaluate every (variant, formula) found under ``reports_root``; returns the summary."""
    report_dirs = _version_dirs(reports_root, lambda d: any(d.glob("report-*.json")))
    truth_dirs = _version_dirs(truth_root, lambda d: (d / FAULTS_FILE).is_file())
    if not report_dirs:
        raise ValidationError(f"{reports_root}: no version directories with report-*.json files")
    if set(report_dirs) != set(truth_dirs):
        missing_truth = sorted(set(report_dirs) - set(truth_dirs))
        missing_reports = sorted(set(truth_dirs) - set(report_dirs))
        raise ValidationError(
            f"{len(report_dirs)} report version(s) vs {len(truth_dirs)} ground-truth version(s); "
            f"without faults.tsv: {missing_truth[:5]}, without reports: {missing_reports[:5]}")

    grouped = {}
    expected = None
    for version, d in report_dirs.items():
        truth = read_faults(truth_dirs[version] / FAULTS_FILE)
        if len(truth) == 0:
            raise ValidationError(f"{truth_dirs[version] / FAULTS_FILE}: no faulty statements")
        names = sorted(p.name for p in d.glob("report-*.json"))
        if expected is None:
            expected = names
        elif names != expected:
            raise ValidationError(f"{d}: report set {names} differs from {expected}")
        for p in sorted(d.glob("report-*.json")):
            rep = _read_report(p)
            grouped.setdefault((rep.variant, rep.formula.name), []).append(VersionResult(rep, truth, version))

    out.mkdir(parents=True, exist_ok=True)
    evaluations = {}
    summary_rows = []
    for (variant, formula) in sorted(grouped, key=lambda k: (k[1], VARIANT_ORDER.index(k[0]))):
        ev = evaluate(grouped[(variant, formula)])
        evaluations[(variant, formula)] = ev
        tag = f"{variant.value}-{formula}"
        write_json(out / f"evaluation-{tag}.json", ev.to_dict())
        curve = exam_curve(ev.exam_scores)
        write_text(out / f"exam-curve-{tag}.csv",
                   "exam_threshold,fraction_of_faults_localized\n"
                   + "".join(f"{t:.2f},{frac!r}\n" for t, frac in curve))
        mean_exam = sum(ev.exam_scores) / len(ev.exam_scores)
        summary_rows.append((variant.value, formula, ev.versions, ev.top1, ev.top3, ev.top5, ev.map_value, mean_exam))

    write_text(out / "summary.csv",
               "variant,formula,versions,top1,top3,top5,map,mean_exam\n"
               + "".join(",".join(str(c) if not isinstance(c, float) else repr(c) for c in row) + "\n"
                         for row in summary_rows))

    formulas = sorted({f for _, f in evaluations})
    present = [v for v in VARIANT_ORDER if any((v, f) in evaluations for f in formulas)]
    pairs = comparisons or list(itertools.combinations(present, 2))
    stats = []
    for formula in formulas:
        for a, b in pairs:
            if (a, formula) not in evaluations or (b, formula) not in evaluations:
                if comparisons:
                    raise ValidationError(f"comparison {a.value}:{b.value} needs reports for both variants")
                continue
            res = compare(evaluations[(a, formula)].exam_scores, evaluations[(b, formula)].exam_scores)
            stats.append({"formula": formula, "a": a.value, "b": b.value, **res.to_dict()})
    write_json(out / "comparisons.json", stats)

    if plots:
        for formula in formulas:
            curves = {v.value: exam_curve(evaluations[(v, formula)].exam_scores)
                      for v in VARIANT_ORDER if (v, formula) in evaluations}
            plotting.plot_exam_curves(curves, out / f"exam-curve-{formula}.png", title=f"EXAM ({formula})")

    return {"evaluations": evaluations, "comparisons": stats}


def _print_summary(result, out=None):
    out = out or sys.stdout
    for (variant, formula), ev in result["evaluations"].items():
        print(f"{variant.value:13s} {formula:10s} top1={ev.top1} top3={ev.top3} top5={ev.top5} "
              f"map={ev.map_value:.4f} versions={ev.versions}", file=out)
    for s in result["comparisons"]:
        print(f"{s['formula']:10s} {s['a']} vs {s['b']}: p(two-sided)={s['p_two_sided']:.3g} "
              f"p(less)={s['p_less']:.3g} p(greater)={s['p_greater']:.3g} "
              f"delta={s['cliffs_delta']:.4f} ({s['magnitude']})", file=out)


def cmd_evaluate(cfg: PipelineConfig) -> int:
    reports_root = _require(cfg.input, "--input")
    result = evaluate_tree(reports_root, cfg.truth or reports_root, _require(cfg.output, "--output"),
                           cfg.comparisons, cfg.plots)
    _print_summary(result)
    return 0


def _simulate_one(params: ScenarioParams, seed: int, out: Path):
    scenario = generate_scenario(params, seed)
    d = write_dataset(scenario.dataset, out / scenario.name)
    write_json(d / "params.json", {"seed": seed, "params": dataclasses.asdict(params)})
    return scenario


def cmd_simulate(cfg: PipelineConfig) -> int:
    out = _require(cfg.output, "--output")
    seeds = range(cfg.seed, cfg.seed + cfg.count)
    _map(cfg.jobs, _simulate_one, [(cfg.params, s, out) for s in seeds])
    print(f"wrote {cfg.count} scenario(s) to {out}")
    return 0


def _pipeline_one(cfg: PipelineConfig, seed: int, scen_root: Path, rep_root: Path):
    scenario = _simulate_one(cfg.params, seed, scen_root)
    timings = {}
    write_reports(localize_dataset(scenario.dataset, cfg, timings), rep_root / scenario.name)
    return timings


def cmd_pipeline(cfg: PipelineConfig) -> int:
    out = _require(cfg.output, "--output")
    scen_root, rep_root = out / "scenarios", out / "reports"
    seeds = range(cfg.seed, cfg.seed + cfg.count)
    timings = {}
    for part in _map(cfg.jobs, _pipeline_one, [(cfg, s, scen_root, rep_root) for s in seeds]):
        _add_timings(timings, part)
    result = evaluate_tree(rep_root, scen_root, out / "evaluation", cfg.comparisons, cfg.plots)
    _print_summary(result)
    if cfg.timings:
        _print_timings(timings)
    return 0


def _star(job):
    fn, args = job
    return fn(*args)


def _map(jobs, fn, arglists):
    """Run ``fn(*args)`` for each arglist, in order; parallel across processes when jobs > 1."""
    if jobs <= 1 or len(arglists) <= 1:
        return [fn(*a) for a in arglists]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_star, [(fn, a) for a in arglists]))


COMMANDS = {
    "build": cmd_build,
    "refine": cmd_refine,
    "localize": cmd_localize,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "pipeline": cmd_pipeline,
}


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    # usage mistakes are invalid input, not internal errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", help="dataset directory, matrix TSV, or reports root")
    common.add_argument("--output", help="output directory (or .tsv file for refine)")
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("--variant", help="full | denoise-only | metallaxis (comma list or 'all')")
    common.add_argument("--formula", help="dstar | gp13 | jaccard | ochiai | op2 | tarantula | all")
    common.add_argument("--cutoff", type=float, help="low-pass cutoff D0 in (0, 1] (default 0.3)")
    common.add_argument("--mask", choices=[m.value for m in MaskKind], help="mask shape (default ideal)")
    common.add_argument("--dstar-exponent", dest="dstar_exponent", type=int, help="D* exponent (default 2)")
    common.add_argument("--seed", type=int, help="first scenario seed (default 0)")
    common.add_argument("--count", type=int, help="number of scenarios (default 1)")
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="scenario parameter override, repeatable")
    common.add_argument("--truth", help="ground-truth root for evaluate (default: --input)")
    common.add_argument("--compare", action="append", metavar="A:B",
                        help="variant pair to test, e.g. full:metallaxis (repeatable)")
    common.add_argument("--jobs", type=int, help="worker processes for ensembles (default 1)")
    common.add_argument("--timings", action="store_const", const=True, default=None,
                        help="print per-stage wall time to stderr")
    common.add_argument("--no-plots", dest="plots", action="store_const", const=False, default=None,
                        help="skip PNG figures")

    parser = _Parser(prog="killrefine", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=_first_line(fn, name))
    return parser


def _first_line(fn, name):
    for line in __doc__.splitlines():
        if line.strip().startswith(name + " "):
            return line.strip()[len(name):].strip()
    return name


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, NotADirectoryError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
