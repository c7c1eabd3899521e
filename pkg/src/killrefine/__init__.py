"""Kill-matrix refinement and mutation-based fault localization."""

from killrefine.killdata import (
    Dataset,
    ExecutionRecord,
    GroundTruth,
    MutantMeta,
    Outcome,
    TestMeta,
    load_dataset,
    order_axes,
    write_dataset,
)
from killrefine.enhance import (
    BooleanKillMatrix,
    EnhancedKillMatrix,
    KillClass,
    build_enhanced_matrix,
    build_weak_matrix,
    classify_kill,
)
from killrefine.denoise import (
    DenoiseConfig,
    MaskKind,
    RefinedKillMatrix,
    dft2,
    idft2,
    lowpass_mask,
    minmax_normalize,
    refine,
)
from killrefine.suspicion import (
    Formula,
    FormulaKind,
    SuspiciousnessReport,
    Variant,
    classical_statistics,
    fuzzy_statistics,
    localize,
    mutant_suspiciousness,
    rank_statements,
    statement_suspiciousness,
)
from killrefine.metrics import (
    Alternative,
    EvaluationReport,
    VersionResult,
    average_precision,
    cliffs_delta,
    compare,
    evaluate,
    exam_score,
    top_n,
    wilcoxon_signed_rank,
)
from killrefine.synth import ScenarioParams, generate_ensemble, generate_scenario

__version__ = "0.1.0"
