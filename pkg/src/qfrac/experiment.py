"""End-to-end runs: quantum sampling, the classical baseline, and width sweeps.

The two samplers follow the scikit-learn estimator protocol: hyperparameters
go to ``__init__``, ``fit`` takes the condition (text, parsed predicate or
oracle table) and leaves fitted attributes with a trailing underscore.
"""
from __future__ import annotations

import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import rng
from ._validation import (
    check_choice,
    check_open_unit,
    check_positive_int,
    check_seed,
    check_width,
)
from .estimator import (
    CI_METHODS,
    EstimateResult,
    SamplingPlan,
    from_counts,
    hoeffding_epsilon,
    plan_shots,
)
from .predicate import (
    OracleTable,
    PredicateAst,
    build_oracle_table,
    eval_many,
    exact_fraction,
    parse_predicate,
)
from .simulator import RegisterSpec, analytic_p1, run_shot

MODES = ("statevector", "analytic")
THREADS_ENV = "QFRAC_THREADS"
SWEEP_DELTA = 1e-6

# minimum shots per worker before threading is worth the overhead
_MIN_CHUNK = 64


def resolve_n_jobs(n_jobs: Optional[int] = None) -> int:
    """Worker count: explicit value, else ``$QFRAC_THREADS``, else CPU count."""
    if n_jobs is not None:
        return check_positive_int(n_jobs, "n_jobs")
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def resolve_plan(shots=None, epsilon=None, delta=None) -> SamplingPlan:
    if shots is not None:
        if epsilon is not None or delta is not None:
            raise ValueError("give either shots or (epsilon, delta), not both")
        return SamplingPlan(check_positive_int(shots, "shots"))
    if epsilon is None or delta is None:
        raise ValueError("a shot count or both epsilon and delta are required")
    return plan_shots(epsilon, delta)


def _chunks(total: int, n_jobs: int) -> list[tuple[int, int]]:
    n = max(1, min(n_jobs, total // _MIN_CHUNK))
    edges = np.linspace(0, total, n + 1).astype(int)
    return [(int(a), int(b - a)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_chunks(fn, total: int, n_jobs: int) -> np.ndarray:
    # Draws depend only on the shot index, so the split cannot change results.
    chunks = _chunks(total, n_jobs)
    if len(chunks) == 1:
        return fn(*chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda c: fn(*c), chunks))
    return np.concatenate(parts)


def sample_quantum(
    table: OracleTable, shots: int, seed: int, mode: str = "statevector", n_jobs: int = 1
) -> np.ndarray:
    """Outcome bits of ``shots`` independent repetitions (uint8 array)."""
    check_choice(mode, "mode", MODES)
    spec = RegisterSpec(table.width)
    p1 = analytic_p1(table).a_sq

    def block(start: int, count: int) -> np.ndarray:
        u = rng.uniforms(seed, rng.QUANTUM_STREAM, start, count)
        if mode == "analytic":
            return (u < p1).astype(np.uint8)
        return np.fromiter((run_shot(spec, table, float(r)) for r in u), dtype=np.uint8, count=count)

    return _map_chunks(block, shots, n_jobs if mode == "statevector" else 1)


def sample_classical(source, width: int, shots: int, seed: int) -> np.ndarray:
    """Draw x uniformly from the register range and test the condition."""
    xs = rng.top_bits(rng.words(seed, rng.CLASSICAL_STREAM, 0, shots), width)
    if isinstance(source, OracleTable):
        return source.bits[xs.astype(np.intp)].astype(np.uint8)
    return eval_many(source, xs).astype(np.uint8)


class _SamplerMixin:
    def _check_common(self):
        check_seed(self.seed)
        check_open_unit(self.alpha, "alpha")
        check_choice(self.ci_method.replace("-", "_"), "ci_method", CI_METHODS)
        self.plan_ = resolve_plan(self.shots, self.epsilon, self.delta)

    def _coerce_input(self, X):
        """Return ``(predicate or None, width)`` for the fit input."""
        if isinstance(X, str):
            if self.width is None:
                raise ValueError("width is required when fitting on predicate text")
            t0 = time.perf_counter()
            ast = parse_predicate(X, self.width)
            self.timings_["parse"] = time.perf_counter() - t0
            return ast, ast.width
        if isinstance(X, PredicateAst):
            return X, X.width
        if isinstance(X, OracleTable):
            return None, X.width
        raise TypeError(
            f"expected predicate text, PredicateAst or OracleTable, got {type(X).__name__}"
        )

    def _table(self, X, ast) -> OracleTable:
        if isinstance(X, OracleTable):
            return X
        t0 = time.perf_counter()
        table = build_oracle_table(ast)
        self.timings_["oracle"] = time.perf_counter() - t0
        return table

    def _finish(self, outcomes: np.ndarray, exact_f):
        self.outcomes_ = outcomes
        self.result_ = from_counts(
            int(np.count_nonzero(outcomes)),
            int(outcomes.size),
            self.alpha,
            self.ci_method,
            self.seed,
            exact_f,
        )
        self.f_hat_ = self.result_.f_hat
        self.confidence_interval_ = (self.result_.ci_low, self.result_.ci_high)
        return self

    @property
    def hoeffding_epsilon_(self) -> float:
        """Additive error bound at ``delta`` (or 1e-6 for a fixed shot count)."""
        check_is_fitted(self, "result_")
        delta = self.plan_.delta if self.plan_.delta is not None else SWEEP_DELTA
        return hoeffding_epsilon(self.plan_.shots, delta)


class QuantumSampler(_SamplerMixin, BaseEstimator):
    """Estimate the solution fraction by repeatedly measuring the ancilla.

    Each shot prepares the uniform superposition, applies the oracle and
    measures the ancilla. With ``mode="analytic"`` the statevector is skipped
    and the same per-shot draws are thresholded against S / 2**k directly.

    Parameters
    ----------
    width : int, optional
        Register width k; needed only when fitting on predicate text.
    shots : int, optional
        Number of repetitions P. Mutually exclusive with epsilon/delta.
    epsilon, delta : float, optional
        Accuracy target; P is then chosen by the Hoeffding bound.
    seed : int
        Unsigned 64-bit seed.
    alpha : float
        Confidence interval level is ``1 - alpha``.
    ci_method : {"wilson", "clopper_pearson"}
    mode : {"statevector", "analytic"}
    verify : bool
        Attach the brute-force fraction to the result.
    n_jobs : int, optional
        Worker threads; defaults to ``$QFRAC_THREADS`` or the CPU count.

    Attributes
    ----------
    oracle_table_ : OracleTable
    plan_ : SamplingPlan
    outcomes_ : ndarray of uint8
    result_ : EstimateResult
    f_hat_ : float
    confidence_interval_ : tuple of float
    timings_ : dict
        Wall-clock seconds per phase.
    """

    def __init__(
        self,
        width=None,
        shots=None,
        epsilon=None,
        delta=None,
        seed=0,
        alpha=0.05,
        ci_method="wilson",
        mode="statevector",
        verify=False,
        n_jobs=None,
    ):
        self.width = width
        self.shots = shots
        self.epsilon = epsilon
        self.delta = delta
        self.seed = seed
        self.alpha = alpha
        self.ci_method = ci_method
        self.mode = mode
        self.verify = verify
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self.timings_ = {}
        self._check_common()
        check_choice(self.mode, "mode", MODES)
        n_jobs = resolve_n_jobs(self.n_jobs)
        ast, _ = self._coerce_input(X)
        self.oracle_table_ = self._table(X, ast)
        t0 = time.perf_counter()
        outcomes = sample_quantum(self.oracle_table_, self.plan_.shots, self.seed, self.mode, n_jobs)
        self.timings_["sampling"] = time.perf_counter() - t0
        exact_f = exact_fraction(self.oracle_table_) if self.verify else None
        return self._finish(outcomes, exact_f)


class ClassicalSampler(_SamplerMixin, BaseEstimator):
    """Baseline: test the condition on x drawn uniformly at random.

    Takes the same parameters as :class:`QuantumSampler` minus ``mode`` and
    ``n_jobs``. The oracle table is only built when ``verify`` is set or the
    input already is a table.
    """

    def __init__(
        self,
        width=None,
        shots=None,
        epsilon=None,
        delta=None,
        seed=0,
        alpha=0.05,
        ci_method="wilson",
        verify=False,
    ):
        self.width = width
        self.shots = shots
        self.epsilon = epsilon
        self.delta = delta
        self.seed = seed
        self.alpha = alpha
        self.ci_method = ci_method
        self.verify = verify

    def fit(self, X, y=None):
        self.timings_ = {}
        self._check_common()
        ast, width = self._coerce_input(X)
        source = X if isinstance(X, OracleTable) else ast
        t0 = time.perf_counter()
        outcomes = sample_classical(source, width, self.plan_.shots, self.seed)
        self.timings_["sampling"] = time.perf_counter() - t0
        exact_f = None
        if self.verify:
            self.oracle_table_ = self._table(X, ast)
            exact_f = exact_fraction(self.oracle_table_)
        return self._finish(outcomes, exact_f)


# -- functional entry points -----------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    predicate_text: str
    width: int
    shots: Optional[int] = None
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    seed: int = 0
    ci_method: str = "wilson"
    alpha: float = 0.05
    verify: bool = False
    mode: str = "statevector"
    n_jobs: Optional[int] = None

    def __post_init__(self):
        check_width(self.width)
        check_seed(self.seed)
        check_choice(self.mode, "mode", MODES)
        object.__setattr__(self, "ci_method", self.ci_method.replace("-", "_"))
        check_choice(self.ci_method, "ci_method", CI_METHODS)
        resolve_plan(self.shots, self.epsilon, self.delta)

    @property
    def plan(self) -> SamplingPlan:
        return resolve_plan(self.shots, self.epsilon, self.delta)

    def sampler_params(self) -> dict:
        return dict(
            width=self.width,
            shots=self.shots,
            epsilon=self.epsilon,
            delta=self.delta,
            seed=self.seed,
            alpha=self.alpha,
            ci_method=self.ci_method,
            verify=self.verify,
        )


def quantum_sampler(config: ExperimentConfig) -> QuantumSampler:
    return QuantumSampler(mode=config.mode, n_jobs=config.n_jobs, **config.sampler_params())


def classical_sampler(config: ExperimentConfig) -> ClassicalSampler:
    return ClassicalSampler(**config.sampler_params())


def run_experiment(config: ExperimentConfig) -> EstimateResult:
    return quantum_sampler(config).fit(config.predicate_text).result_


def run_classical_baseline(config: ExperimentConfig) -> EstimateResult:
    return classical_sampler(config).fit(config.predicate_text).result_


@dataclass(frozen=True)
class ComparisonReport:
    quantum: EstimateResult
    classical: EstimateResult
    abs_difference: float
    ci_overlap: bool
    exact_f: Optional[Fraction] = None

    def to_dict(self) -> dict:
        return {
            "quantum": self.quantum.to_dict(),
            "classical": self.classical.to_dict(),
            "abs_difference": self.abs_difference,
            "ci_overlap": self.ci_overlap,
            "exact_f": None if self.exact_f is None else str(self.exact_f),
        }


def compare_methods(config: ExperimentConfig, timings: Optional[dict] = None) -> ComparisonReport:
    """Run both estimators on the same condition with independent seeds.

    The classical path uses a seed derived from ``config.seed``.
    """
    q = quantum_sampler(config).fit(config.predicate_text)
    classical_config = replace(config, seed=rng.derive_seed(config.seed, rng.CLASSICAL_STREAM))
    c = classical_sampler(classical_config).fit(config.predicate_text)
    if timings is not None:
        timings.update({f"quantum_{k}": v for k, v in q.timings_.items()})
        timings.update({f"classical_{k}": v for k, v in c.timings_.items()})
    qr, cr = q.result_, c.result_
    return ComparisonReport(
        quantum=qr,
        classical=cr,
        abs_difference=abs(float(Fraction(qr.ones, qr.shots) - Fraction(cr.ones, cr.shots))),
        ci_overlap=bool(qr.ci_low <= cr.ci_high and cr.ci_low <= qr.ci_high),
        exact_f=qr.exact_f,
    )


# -- width sweeps ------------------------------------------------------------------

FAMILIES = {
    "quarter": "x < (1 << ({k} - 2))",
    "half": "x < (1 << ({k} - 1))",
    "quarter-scattered": "(x & 3) == 0",
    "all": "0 == 0",
    "none": "0 == 1",
}


class TemplateError(ValueError):
    pass


_PLACEHOLDER = re.compile(r"\{([^{}]*)\}")


def instantiate_template(template: str, width: int) -> str:
    """Substitute ``{k}`` in a template, or expand a named family."""
    template = FAMILIES.get(template, template)

    def sub(m):
        if m.group(1) != "k":
            raise TemplateError(f"unknown placeholder {{{m.group(1)}}} in template")
        return str(width)

    text = _PLACEHOLDER.sub(sub, template)
    if "{" in text or "}" in text:
        raise TemplateError(f"unbalanced braces in template {template!r}")
    return text


@dataclass(frozen=True)
class SweepRow:
    width: int
    predicate: str
    result: EstimateResult
    exact_f: Fraction
    abs_error: float
    hoeffding_bound: float
    wall_clock_s: float = field(compare=False)

    def to_dict(self) -> dict:
        return {
            "k": self.width,
            "predicate": self.predicate,
            "f_hat": self.result.f_hat,
            "ones": self.result.ones,
            "shots": self.result.shots,
            "ci_low": self.result.ci_low,
            "ci_high": self.result.ci_high,
            "exact_f": str(self.exact_f),
            "abs_error": self.abs_error,
            "hoeffding_bound": self.hoeffding_bound,
            "wall_clock_s": self.wall_clock_s,
        }


def sweep_width(
    template: str,
    widths: Sequence[int],
    shots: int,
    seed: int = 0,
    *,
    mode: str = "statevector",
    alpha: float = 0.05,
    ci_method: str = "wilson",
    delta: float = SWEEP_DELTA,
    n_jobs: Optional[int] = None,
) -> list[SweepRow]:
    """Repeat the same experiment at several register widths.

    The template must describe the same exact fraction at every width; the
    Hoeffding bound column depends only on ``shots`` and ``delta``.
    """
    widths = [check_width(k) for k in widths]
    if not widths:
        raise ValueError("at least one width is required")
    check_open_unit(delta, "delta")
    bound = hoeffding_epsilon(check_positive_int(shots, "shots"), delta)
    prepared = []
    for k in widths:
        t0 = time.perf_counter()
        text = instantiate_template(template, k)
        table = build_oracle_table(parse_predicate(text, k))
        prepared.append((k, text, table, time.perf_counter() - t0))
    fractions = {exact_fraction(table) for _, _, table, _ in prepared}
    if len(fractions) > 1:
        raise TemplateError(
            "template does not give a constant fraction across widths: "
            + ", ".join(f"k={k}: {exact_fraction(t)}" for k, _, t, _ in prepared)
        )
    rows = []
    for k, text, table, build_time in prepared:
        sampler = QuantumSampler(
            shots=shots, seed=seed, alpha=alpha, ci_method=ci_method,
            mode=mode, verify=True, n_jobs=n_jobs,
        )
        t0 = time.perf_counter()
        result = sampler.fit(table).result_
        elapsed = build_time + time.perf_counter() - t0
        rows.append(
            SweepRow(
                width=k,
                predicate=text,
                result=result,
                exact_f=result.exact_f,
                abs_error=result.abs_error,
                hoeffding_bound=bound,
                wall_clock_s=elapsed,
            )
        )
    return rows
