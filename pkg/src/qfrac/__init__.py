"""Estimate the fraction of k-bit inputs that satisfy a condition by
measuring the ancilla of a simulated oracle circuit."""

__version__ = "0.1.0"

from .estimator import (
    EstimateResult,
    SamplingPlan,
    aggregate,
    confidence_interval,
    estimate_fraction,
    plan_shots,
)
from .experiment import (
    ClassicalSampler,
    ComparisonReport,
    ExperimentConfig,
    QuantumSampler,
    compare_methods,
    run_classical_baseline,
    run_experiment,
    sweep_width,
)
from .predicate import (
    OracleTable,
    PredicateAst,
    PredicateError,
    PredicateSyntaxError,
    PredicateTypeError,
    build_oracle_table,
    eval_predicate,
    exact_fraction,
    parse_predicate,
    pretty_print,
)
from .simulator import (
    PostOracleSummary,
    RegisterSpec,
    StateVector,
    analytic_p1,
    apply_oracle,
    measure_y,
    prepare_uniform,
    run_shot,
)

__all__ = [
    "ClassicalSampler",
    "ComparisonReport",
    "EstimateResult",
    "ExperimentConfig",
    "OracleTable",
    "PostOracleSummary",
    "PredicateAst",
    "PredicateError",
    "PredicateSyntaxError",
    "PredicateTypeError",
    "QuantumSampler",
    "RegisterSpec",
    "SamplingPlan",
    "StateVector",
    "aggregate",
    "analytic_p1",
    "apply_oracle",
    "build_oracle_table",
    "compare_methods",
    "confidence_interval",
    "estimate_fraction",
    "eval_predicate",
    "exact_fraction",
    "measure_y",
    "parse_predicate",
    "plan_shots",
    "prepare_uniform",
    "pretty_print",
    "run_classical_baseline",
    "run_experiment",
    "run_shot",
    "sweep_width",
]
