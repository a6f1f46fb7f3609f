"""Problem space, experimental/observational distributions, and consistency checks.

Everything is indexed 1-based in the public API (treatment j in 1..m, outcome
i in 1..n) to match the query notation; the first matrix index is always the
treatment. Distributions carry both a float matrix and the exact rational
values they came from, so the LP oracle can pose exactly-feasible constraints
while the engine works in floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

# Ingested counts are exact, so their sums must be exact; hand-typed
# probability files get slack.
EPS_SUM_COUNTS = 1e-9
EPS_SUM_PROBS = 1e-6
EPS_CONS_COUNTS = 1e-9
EPS_CONS_PROBS = 1e-6

# Denominator cap when recovering rationals from user-supplied floats.
_FLOAT_DENOMINATOR_LIMIT = 10**9


class DataError(ValueError):
    """Invalid dataset content."""


class ShapeMismatch(DataError):
    pass


class ZeroRowTotal(DataError):
    pass


class ZeroGrandTotal(DataError):
    pass


@dataclass(frozen=True, slots=True)
class ProblemSpace:
    """m treatment values x_1..x_m and n outcome values y_1..y_n."""

    m: int
    n: int
    treatment_labels: tuple[str, ...] | None = None
    outcome_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise DataError(f"need at least two values per axis, got m={self.m}, n={self.n}")
        for labels, count, axis in (
            (self.treatment_labels, self.m, "treatment"),
            (self.outcome_labels, self.n, "outcome"),
        ):
            if labels is None:
                continue
            if len(labels) != count:
                raise DataError(f"{axis} labels: expected {count}, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise DataError(f"{axis} labels must be unique")


@dataclass(frozen=True, slots=True)
class Violation:
    """One failed check; j/i are 0 when the check is not cell-specific."""

    j: int
    i: int
    kind: str  # lower | upper | rowSum | totalSum
    magnitude: float


@dataclass(frozen=True, slots=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    @classmethod
    def from_violations(cls, violations: Sequence[Violation]) -> "ValidationReport":
        vs = tuple(violations)
        return cls(ok=not vs, violations=vs)


def _freeze(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class ExperimentalDistribution:
    """P(y_i | do(x_j)) as an m x n matrix; every row sums to 1."""

    p: np.ndarray
    exact: tuple[tuple[Fraction, ...], ...]

    def p_do(self, j: int, i: int) -> float:
        return float(self.p[j - 1, i - 1])

    def exact_do(self, j: int, i: int) -> Fraction:
        return self.exact[j - 1][i - 1]


@dataclass(frozen=True)
class ObservationalDistribution:
    """Joint P(x_j, y_i) as an m x n matrix summing to 1; marginals derived."""

    p: np.ndarray
    exact: tuple[tuple[Fraction, ...], ...]

    def p_joint(self, j: int, i: int) -> float:
        return float(self.p[j - 1, i - 1])

    def p_x(self, j: int) -> float:
        return float(self.exact_x(j))

    def p_y(self, i: int) -> float:
        return float(self.exact_y(i))

    def exact_joint(self, j: int, i: int) -> Fraction:
        return self.exact[j - 1][i - 1]

    def exact_x(self, j: int) -> Fraction:
        return sum(self.exact[j - 1], Fraction(0))

    def exact_y(self, i: int) -> Fraction:
        return sum((row[i - 1] for row in self.exact), Fraction(0))


@dataclass(frozen=True)
class Dataset:
    """A pair of experimental and observational distributions plus its report."""

    space: ProblemSpace
    exp: ExperimentalDistribution
    obs: ObservationalDistribution
    validation: ValidationReport
    eps_cons: float = EPS_CONS_COUNTS

    # Accessor shorthands; the engine reads these in every formula.
    def p_do(self, j: int, i: int) -> float:
        return self.exp.p_do(j, i)

    def p_joint(self, j: int, i: int) -> float:
        return self.obs.p_joint(j, i)

    def p_x(self, j: int) -> float:
        return self.obs.p_x(j)

    def p_y(self, i: int) -> float:
        return self.obs.p_y(i)


def _check_shape(matrix: Sequence[Sequence], space: ProblemSpace | None, what: str):
    rows = len(matrix)
    if rows == 0:
        raise ShapeMismatch(f"{what}: empty matrix")
    cols = {len(row) for row in matrix}
    if len(cols) != 1:
        raise ShapeMismatch(f"{what}: ragged rows {sorted(cols)}")
    n = cols.pop()
    if space is not None and (rows, n) != (space.m, space.n):
        raise ShapeMismatch(f"{what}: expected {space.m}x{space.n}, got {rows}x{n}")
    return rows, n


def _check_counts(counts: Sequence[Sequence], what: str):
    for row in counts:
        for c in row:
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)) or c < 0:
                raise DataError(f"{what} must be nonnegative integers, got {c!r}")


def _check_probs(probs: Sequence[Sequence], what: str):
    for row in probs:
        for v in row:
            if not (-EPS_SUM_PROBS <= float(v) <= 1.0 + EPS_SUM_PROBS):
                raise DataError(f"{what} must lie in [0,1], got {v!r}")


def _exp_exact_from_counts(counts) -> list[list[Fraction]]:
    out = []
    for j, row in enumerate(counts, start=1):
        total = sum(int(c) for c in row)
        if total <= 0:
            raise ZeroRowTotal(f"experimental row for x{j} has zero total")
        out.append([Fraction(int(c), total) for c in row])
    return out


def _obs_exact_from_counts(counts) -> list[list[Fraction]]:
    grand = sum(int(c) for row in counts for c in row)
    if grand <= 0:
        raise ZeroGrandTotal("observational counts have zero grand total")
    return [[Fraction(int(c), grand) for c in row] for row in counts]


def _lift(v: float) -> Fraction:
    return Fraction(max(0.0, float(v))).limit_denominator(_FLOAT_DENOMINATOR_LIMIT)


def _exp_exact_from_probs(probs) -> list[list[Fraction]]:
    out = []
    for j, row in enumerate(probs, start=1):
        frs = [_lift(v) for v in row]
        total = sum(frs, Fraction(0))
        if abs(float(total) - 1.0) > EPS_SUM_PROBS:
            raise DataError(f"experimental row for x{j} sums to {float(total)}, expected 1")
        # Renormalize exactly so downstream equality constraints are feasible.
        out.append([v / total for v in frs])
    return out


def _obs_exact_from_probs(probs) -> list[list[Fraction]]:
    frs = [[_lift(v) for v in row] for row in probs]
    grand = sum((v for row in frs for v in row), Fraction(0))
    if abs(float(grand) - 1.0) > EPS_SUM_PROBS:
        raise DataError(f"observational table sums to {float(grand)}, expected 1")
    return [[v / grand for v in row] for row in frs]


def _build_report(
    exp_exact: Sequence[Sequence[Fraction]],
    obs_exact: Sequence[Sequence[Fraction]],
    eps_sum: float,
    eps_cons: float,
) -> ValidationReport:
    m = len(exp_exact)
    n = len(exp_exact[0])
    violations: list[Violation] = []
    for j in range(1, m + 1):
        row_sum = float(sum(exp_exact[j - 1], Fraction(0)))
        if abs(row_sum - 1.0) > eps_sum:
            violations.append(Violation(j, 0, "rowSum", abs(row_sum - 1.0)))
    total = float(sum((v for row in obs_exact for v in row), Fraction(0)))
    if abs(total - 1.0) > eps_sum:
        violations.append(Violation(0, 0, "totalSum", abs(total - 1.0)))
    for j in range(1, m + 1):
        p_x = float(sum(obs_exact[j - 1], Fraction(0)))
        for i in range(1, n + 1):
            p_do = float(exp_exact[j - 1][i - 1])
            p_xy = float(obs_exact[j - 1][i - 1])
            # Consistency: P(x_j, y_i) <= P(y_i | do(x_j)) <= P(x_j, y_i) + 1 - P(x_j)
            if p_xy - p_do > eps_cons:
                violations.append(Violation(j, i, "lower", p_xy - p_do))
            if p_do - (p_xy + 1.0 - p_x) > eps_cons:
                violations.append(Violation(j, i, "upper", p_do - (p_xy + 1.0 - p_x)))
    return ValidationReport.from_violations(violations)


def validate(dataset: Dataset, eps_cons: float | None = None) -> ValidationReport:
    """Re-check sum and consistency constraints; report-only, never raises."""
    eps = dataset.eps_cons if eps_cons is None else eps_cons
    return _build_report(dataset.exp.exact, dataset.obs.exact, eps_sum=eps, eps_cons=eps)


def _assemble(
    exp_exact: list[list[Fraction]],
    obs_exact: list[list[Fraction]],
    space: ProblemSpace,
    eps_sum: float,
    eps_cons: float,
) -> Dataset:
    exp_p = _freeze(np.array([[float(v) for v in row] for row in exp_exact], dtype=float))
    obs_p = _freeze(np.array([[float(v) for v in row] for row in obs_exact], dtype=float))
    report = _build_report(exp_exact, obs_exact, eps_sum=eps_sum, eps_cons=eps_cons)
    return Dataset(
        space=space,
        exp=ExperimentalDistribution(exp_p, tuple(tuple(row) for row in exp_exact)),
        obs=ObservationalDistribution(obs_p, tuple(tuple(row) for row in obs_exact)),
        validation=report,
        eps_cons=eps_cons,
    )


def _make_space(m, n, space, treatment_labels, outcome_labels) -> ProblemSpace:
    if space is not None:
        return space
    return ProblemSpace(
        m,
        n,
        tuple(treatment_labels) if treatment_labels else None,
        tuple(outcome_labels) if outcome_labels else None,
    )


def dataset_from_counts(
    exp_counts: Sequence[Sequence[int]],
    obs_counts: Sequence[Sequence[int]],
    space: ProblemSpace | None = None,
    *,
    treatment_labels: Sequence[str] | None = None,
    outcome_labels: Sequence[str] | None = None,
) -> Dataset:
    """Build a Dataset from two count tables.

    Experimental rows are normalized per treatment arm; observational counts
    are normalized by the grand total. Probabilities are exact integer ratios
    converted to float once, so count tables reproduce to full precision
    regardless of parse order.
    """
    m, n = _check_shape(exp_counts, space, "experimental counts")
    m2, n2 = _check_shape(obs_counts, space, "observational counts")
    if (m, n) != (m2, n2):
        raise ShapeMismatch(f"experimental {m}x{n} vs observational {m2}x{n2}")
    _check_counts(exp_counts, "experimental counts")
    _check_counts(obs_counts, "observational counts")
    return _assemble(
        _exp_exact_from_counts(exp_counts),
        _obs_exact_from_counts(obs_counts),
        _make_space(m, n, space, treatment_labels, outcome_labels),
        EPS_SUM_COUNTS,
        EPS_CONS_COUNTS,
    )


def dataset_from_probs(
    exp_probs: Sequence[Sequence[float]],
    obs_probs: Sequence[Sequence[float]],
    space: ProblemSpace | None = None,
    *,
    treatment_labels: Sequence[str] | None = None,
    outcome_labels: Sequence[str] | None = None,
) -> Dataset:
    """Build a Dataset from probability tables (hand-typed tolerance).

    Each value is lifted to a rational and the rows/total renormalized
    exactly, so the sum constraints hold with equality downstream; tables off
    by more than EPS_SUM_PROBS are rejected instead.
    """
    m, n = _check_shape(exp_probs, space, "experimental probs")
    m2, n2 = _check_shape(obs_probs, space, "observational probs")
    if (m, n) != (m2, n2):
        raise ShapeMismatch(f"experimental {m}x{n} vs observational {m2}x{n2}")
    _check_probs(exp_probs, "experimental probabilities")
    _check_probs(obs_probs, "observational probabilities")
    exp_exact = _exp_exact_from_probs(exp_probs)
    for j, row in enumerate(exp_exact, start=1):
        if sum(row, Fraction(0)) == 0:
            raise ZeroRowTotal(f"experimental row for x{j} has zero total")
    obs_exact = _obs_exact_from_probs(obs_probs)
    if sum((v for row in obs_exact for v in row), Fraction(0)) == 0:
        raise ZeroGrandTotal("observational probabilities are all zero")
    return _assemble(
        exp_exact,
        obs_exact,
        _make_space(m, n, space, treatment_labels, outcome_labels),
        EPS_SUM_PROBS,
        EPS_CONS_PROBS,
    )


def dataset_from_json(doc: dict) -> Dataset:
    """Build a Dataset from the JSON schema.

    Required keys: "treatments" and "outcomes" (label lists), plus exactly
    one of "experimental_counts"/"experimental_probs" and exactly one of
    "observational_counts"/"observational_probs".
    """
    if not isinstance(doc, dict):
        raise DataError("dataset document must be a JSON object")
    for key in ("treatments", "outcomes"):
        if key not in doc or not isinstance(doc[key], list) or not all(
            isinstance(s, str) for s in doc[key]
        ):
            raise DataError(f'dataset needs a "{key}" list of strings')
    treatments = tuple(doc["treatments"])
    outcomes = tuple(doc["outcomes"])
    space = ProblemSpace(len(treatments), len(outcomes), treatments, outcomes)

    def pick(prefix: str):
        counts_key, probs_key = f"{prefix}_counts", f"{prefix}_probs"
        present = [k for k in (counts_key, probs_key) if k in doc]
        if len(present) != 1:
            raise DataError(f'need exactly one of "{counts_key}" or "{probs_key}"')
        return present[0].endswith("counts"), doc[present[0]]

    exp_is_counts, exp_val = pick("experimental")
    obs_is_counts, obs_val = pick("observational")
    _check_shape(exp_val, space, "experimental table")
    _check_shape(obs_val, space, "observational table")
    if exp_is_counts:
        _check_counts(exp_val, "experimental counts")
        exp_exact = _exp_exact_from_counts(exp_val)
    else:
        _check_probs(exp_val, "experimental probabilities")
        exp_exact = _exp_exact_from_probs(exp_val)
    if obs_is_counts:
        _check_counts(obs_val, "observational counts")
        obs_exact = _obs_exact_from_counts(obs_val)
    else:
        _check_probs(obs_val, "observational probabilities")
        obs_exact = _obs_exact_from_probs(obs_val)
    all_counts = exp_is_counts and obs_is_counts
    return _assemble(
        exp_exact,
        obs_exact,
        space,
        EPS_SUM_COUNTS if all_counts else EPS_SUM_PROBS,
        EPS_CONS_COUNTS if all_counts else EPS_CONS_PROBS,
    )


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
    return dataset_from_json(doc)
