"""Detect software doping and individual unfairness in black-box systems.

The package is organized bottom-up: timed mixed-IO traces and distances,
a quantitative temporal logic with trace-set quantifiers, cleanness
contracts and their exhaustive oracles, Monte-Carlo falsification, the
emissions workbench, the fairness monitor, and an HTTP oversight service.
"""

from .traces import (
    INF,
    MASK_IN,
    MASK_OUT,
    QUIESCENCE,
    DataError,
    DistanceFn,
    EqConfig,
    GeneralizedTimedTrace,
    MixedIn,
    MixedOut,
    PairIO,
    eq_measure,
    ext_neg,
    ext_sub,
    in_symbol,
    load_trace_csv,
    mixed_in_distance,
    mixed_out_distance,
    out_symbol,
    project_inputs,
    project_outputs,
    save_trace_csv,
    trace,
)
from .logic import (
    TOP,
    And,
    CompositeTrace,
    EvalResult,
    Formula,
    HyperFormula,
    Not,
    StdMember,
    Threshold,
    Top,
    Until,
    conjunction,
    disjunction,
    eval_bool,
    eval_quant,
    evaluate,
    finally_,
    globally,
    hyper_eval_bool,
    hyper_eval_quant,
    implies,
    make_threshold,
    or_,
    register_threshold_family,
    weak_until,
)
from .contracts import (
    FairnessContract,
    FuncContext,
    LoadedContract,
    PiecewiseLinear,
    RobustContext,
    contract_document,
    load_contract,
    save_contract,
)
from .cleanness import (
    PSI_KINDS,
    CleannessVerdict,
    CleannessViolation,
    ComposedTrace,
    DeterministicContract,
    DetVerdict,
    DetViolation,
    build_phi_u_fun,
    build_phi_u_rob,
    build_psi,
    oracle_func_clean,
    oracle_func_clean_det,
    oracle_robustly_clean,
    satisfies_phi,
    self_compose,
)
from .falsify import (
    Adaptation,
    FalsificationOutcome,
    FalsifierConfig,
    RestrictedInputSpace,
    SearchError,
    SurrogateReport,
    SurrogateRound,
    falsify,
    membership,
    merge_restarts,
    propose_profile,
    surrogate_loop,
)
from .emissions import (
    CycleEmissions,
    EmissionContext,
    NoDataError,
    NoxPredictor,
    RestrictionError,
    TripRecording,
    UndefinedRateError,
    accelerations,
    cycle_emissions,
    falsify_emissions,
    load_cycle,
    load_trip_dir,
    load_trips,
    nedc_robustness,
    standard_context,
    standard_cycle,
    synthetic_cycle,
    write_profile_plot,
)
from .fairness import (
    HR_VARIANTS,
    JOHN,
    REFERENCE_BOUND,
    SYNCLAIR,
    SYNTHIA,
    FairnessScoreTriple,
    FairnessVerdict,
    LipschitzReport,
    LipschitzSpec,
    MonitoringError,
    TableSystem,
    fairness_aware,
    fairness_monitor,
    fairness_score,
    fairness_score_min,
    hr_contract,
    hr_reference_system,
    lipschitz_check,
    load_table_system,
    table_proposal,
    vector_proposal,
)
from .oversight import (
    AuditEntry,
    CaseRecord,
    ConflictError,
    OversightService,
    UnknownCaseError,
    ValidationFailure,
    create_app,
)

__all__ = [name for name in dir() if not name.startswith("_")]
