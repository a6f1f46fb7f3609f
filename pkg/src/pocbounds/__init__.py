"""Bounds on probabilities of causation with multivalued treatment and effect.

Derive lower/upper bounds for conjunctions of counterfactual statements
Y_{x_j} = y_i, optionally joint with or conditioned on observed events, from
experimental P(y_i | do(x_j)) and observational P(x_j, y_i) tables. An exact
LP over response types serves as the tightness oracle, and a seeded
simulation study measures bound quality on random models.
"""

from .frechet import (
    EmptySequence,
    InfeasibleInterval,
    Interval,
    frechet_lower,
    frechet_upper,
    intersect,
    make_interval,
)
from .model import (
    DataError,
    Dataset,
    ExperimentalDistribution,
    ObservationalDistribution,
    ProblemSpace,
    ShapeMismatch,
    ValidationReport,
    Violation,
    ZeroGrandTotal,
    ZeroRowTotal,
    dataset_from_counts,
    dataset_from_json,
    dataset_from_probs,
    load_dataset,
    validate,
)
from .queryir import (
    CanonicalQuery,
    CounterfactualTerm,
    IndexOutOfRange,
    Query,
    QuerySyntaxError,
    UnsupportedQuery,
    canonicalize,
    format_query,
    parse_query,
    validate_indices,
)
from .engine import (
    BoundResult,
    BoundTrace,
    NotBinary,
    ZeroEvidenceProbability,
    bound,
    tian_pearl,
)
from .oracle import BudgetExceeded, Infeasible, dump_lp, feasible, tight_bounds
from .simgen import (
    SimulationRecord,
    SimulationSummary,
    export_csv,
    generate_sample,
    run_simulation,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "BoundTrace",
    "BudgetExceeded",
    "CanonicalQuery",
    "CounterfactualTerm",
    "DataError",
    "Dataset",
    "EmptySequence",
    "ExperimentalDistribution",
    "IndexOutOfRange",
    "Infeasible",
    "InfeasibleInterval",
    "Interval",
    "NotBinary",
    "ObservationalDistribution",
    "ProblemSpace",
    "Query",
    "QuerySyntaxError",
    "ShapeMismatch",
    "SimulationRecord",
    "SimulationSummary",
    "UnsupportedQuery",
    "ValidationReport",
    "Violation",
    "ZeroEvidenceProbability",
    "ZeroGrandTotal",
    "ZeroRowTotal",
    "bound",
    "canonicalize",
    "dataset_from_counts",
    "dataset_from_json",
    "dataset_from_probs",
    "dump_lp",
    "export_csv",
    "feasible",
    "format_query",
    "frechet_lower",
    "frechet_upper",
    "generate_sample",
    "intersect",
    "load_dataset",
    "make_interval",
    "parse_query",
    "run_simulation",
    "tian_pearl",
    "tight_bounds",
    "validate",
    "validate_indices",
    "write_csv",
]
