"""Exact tight bounds by linear programming over response types.

A response type is a function from treatments to outcomes (one of n^m). The
LP variables q[t][j] carry the mass of response type t co-occurring with
observed treatment x_j, so both data sources become linear equality
constraints and any conjunctive query event is a 0/1 objective. Minimizing
and maximizing that objective over the feasible polytope gives the tight
identification interval, which is the ground truth the engine's closed-form
bounds are checked against.

Small programs are solved with an in-repo two-phase simplex over Fractions
(the oracle must not inherit float drift); larger ones fall back to HiGHS.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .frechet import Interval, make_interval
from .model import Dataset
from .queryir import (
    EXACT,
    STANDARD,
    ZERO,
    CanonicalQuery,
    Query,
    canonicalize,
    parse_query,
    validate_indices,
)
from .engine import ZeroEvidenceProbability

DEFAULT_VARIABLE_BUDGET = 4096
# Exact arithmetic up to this many variables; 3x3 spaces need 81.
DEFAULT_EXACT_LIMIT = 128

_MAX_PIVOTS = 50_000
# Dantzig pivoting is fast but can cycle; fall back to Bland's rule, which
# terminates, after this many pivots.
_DANTZIG_PIVOT_LIMIT = 500


class Infeasible(ValueError):
    """The data admit no joint response-type distribution."""


class BudgetExceeded(ValueError):
    pass


def response_types(m: int, n: int) -> list[tuple[int, ...]]:
    """All outcome assignments (t[0] for x_1, ..., t[m-1] for x_m), lexicographic."""
    return list(itertools.product(range(1, n + 1), repeat=m))


def _variable_count(dataset: Dataset) -> int:
    m, n = dataset.space.m, dataset.space.n
    return (n**m) * m


def _build_constraints(dataset: Dataset):
    """Equality system A q = b over exact rationals.

    Rows: total mass; one row per observational cell; one row per
    experimental cell. The redundancy among them is deliberate; the solver
    tolerates dependent rows.
    """
    m, n = dataset.space.m, dataset.space.n
    types = response_types(m, n)
    ncols = len(types) * m
    zero, one = Fraction(0), Fraction(1)

    def var(t_idx: int, j: int) -> int:
        return t_idx * m + (j - 1)

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []

    rows.append([one] * ncols)
    rhs.append(one)

    for j in range(1, m + 1):
        for i in range(1, n + 1):
            row = [zero] * ncols
            for t_idx, t in enumerate(types):
                if t[j - 1] == i:
                    row[var(t_idx, j)] = one
            rows.append(row)
            rhs.append(dataset.obs.exact_joint(j, i))

    for j in range(1, m + 1):
        for i in range(1, n + 1):
            row = [zero] * ncols
            for t_idx, t in enumerate(types):
                if t[j - 1] == i:
                    for jp in range(1, m + 1):
                        row[var(t_idx, jp)] = one
            rows.append(row)
            rhs.append(dataset.exp.exact_do(j, i))

    return types, rows, rhs


def _objective(dataset: Dataset, types, terms, ex, ey) -> list[Fraction]:
    """0/1 coefficients selecting the query event.

    A term y_i under x_j restricts to types with t(j) = i; evidence X = x_p
    restricts to the column j = p; evidence Y = y_q requires the actual
    outcome t(j) of the occupied column to be q.
    """
    m = dataset.space.m
    zero, one = Fraction(0), Fraction(1)
    coeffs = [zero] * (len(types) * m)
    for t_idx, t in enumerate(types):
        if any(t[term.treatment - 1] != term.outcome for term in terms):
            continue
        for j in range(1, m + 1):
            if ex is not None and j != ex:
                continue
            if ey is not None and t[j - 1] != ey:
                continue
            coeffs[t_idx * m + (j - 1)] = one
    return coeffs


# -- exact two-phase simplex ------------------------------------------------


def _pivot(rows, costrow, basis, r, e):
    piv = rows[r][e]
    rows[r] = [v / piv for v in rows[r]]
    for rr in range(len(rows)):
        if rr != r and rows[rr][e] != 0:
            factor = rows[rr][e]
            rows[rr] = [a - factor * b for a, b in zip(rows[rr], rows[r])]
    if costrow[e] != 0:
        factor = costrow[e]
        costrow[:] = [a - factor * b for a, b in zip(costrow, rows[r])]
    basis[r] = e


def _entering(costrow, ncols, use_bland):
    if use_bland:
        for j in range(ncols):
            if costrow[j] < 0:
                return j
        return None
    best, best_j = None, None
    for j in range(ncols):
        if costrow[j] < 0 and (best is None or costrow[j] < best):
            best, best_j = costrow[j], j
    return best_j


def _leaving(rows, basis, e):
    best_ratio, best_r = None, None
    for r, row in enumerate(rows):
        if row[e] > 0:
            ratio = row[-1] / row[e]
            if (
                best_ratio is None
                or ratio < best_ratio
                or (ratio == best_ratio and basis[r] < basis[best_r])
            ):
                best_ratio, best_r = ratio, r
    return best_r


def _run_pivots(rows, costrow, basis, ncols):
    for it in range(_MAX_PIVOTS):
        e = _entering(costrow, ncols, use_bland=it >= _DANTZIG_PIVOT_LIMIT)
        if e is None:
            return "optimal"
        r = _leaving(rows, basis, e)
        if r is None:
            return "unbounded"
        _pivot(rows, costrow, basis, r, e)
    raise RuntimeError("simplex did not terminate within the pivot limit")


def _solve_min_exact(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction]):
    """min c.q s.t. A q = b, q >= 0 in exact arithmetic.

    Returns (status, value); status is "optimal", "infeasible" or
    "unbounded".
    """
    nrows, ncols = len(A), len(c)
    rows = []
    for r in range(nrows):
        row = list(A[r])
        rhs = b[r]
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        rows.append(row + [Fraction(0)] * nrows + [rhs])
        rows[-1][ncols + r] = Fraction(1)
    basis = [ncols + r for r in range(nrows)]
    total = ncols + nrows

    # Phase 1: drive the artificial mass to zero.
    costrow = [Fraction(0)] * ncols + [Fraction(1)] * nrows + [Fraction(0)]
    for row in rows:
        costrow = [a - v for a, v in zip(costrow, row)]
    status = _run_pivots(rows, costrow, basis, total)
    if status != "optimal":
        return status, None
    if -costrow[-1] != 0:
        return "infeasible", None

    # Remove leftover artificials: pivot them out where possible, otherwise
    # the row is a dependent constraint and is dropped.
    drop = []
    for r in range(len(rows)):
        if basis[r] >= ncols:
            e = next((j for j in range(ncols) if rows[r][j] != 0), None)
            if e is None:
                drop.append(r)
            else:
                _pivot(rows, costrow, basis, r, e)
    for r in sorted(drop, reverse=True):
        del rows[r]
        del basis[r]

    # Phase 2 on the original columns.
    rows = [row[:ncols] + [row[-1]] for row in rows]
    costrow = list(c) + [Fraction(0)]
    for r, bcol in enumerate(basis):
        if costrow[bcol] != 0:
            factor = costrow[bcol]
            costrow = [a - factor * v for a, v in zip(costrow, rows[r])]
    status = _run_pivots(rows, costrow, basis, ncols)
    if status != "optimal":
        return status, None
    return "optimal", -costrow[-1]


def _solve_min_float(A, b, c):
    from scipy.optimize import linprog

    res = linprog(
        c=np.array([float(v) for v in c]),
        A_eq=np.array([[float(v) for v in row] for row in A]),
        b_eq=np.array([float(v) for v in b]),
        bounds=(0.0, None),
        method="highs",
    )
    if res.status == 2:
        return "infeasible", None
    if res.status == 3:
        return "unbounded", None
    if not res.success:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return "optimal", float(res.fun)


def _to_canonical(dataset: Dataset, query) -> CanonicalQuery:
    if isinstance(query, str):
        query = parse_query(query, dataset.space)
    if isinstance(query, Query):
        validate_indices(query, dataset.space)
        return canonicalize(query)
    if isinstance(query, CanonicalQuery):
        return query
    raise TypeError(f"unsupported query type {type(query)!r}")


def _exact_divisor(dataset: Dataset, ex, ey) -> Fraction:
    if ex is not None and ey is not None:
        return dataset.obs.exact_joint(ex, ey)
    if ex is not None:
        return dataset.obs.exact_x(ex)
    return dataset.obs.exact_y(ey)


def _divisor_label(ex, ey) -> str:
    if ex is not None and ey is not None:
        return f"P(x{ex},y{ey})"
    if ex is not None:
        return f"P(x{ex})"
    return f"P(y{ey})"


def tight_bounds(
    dataset: Dataset,
    query,
    *,
    variable_budget: int = DEFAULT_VARIABLE_BUDGET,
    exact_limit: int = DEFAULT_EXACT_LIMIT,
) -> Interval:
    """Tight [min, max] of the query probability over all compatible models.

    Conditional queries divide the joint LP bounds by the exact evidence
    probability, mirroring the engine's conditioning rule.
    """
    cq = _to_canonical(dataset, query)
    if cq.kind == ZERO:
        if cq.conditional:
            divisor = _exact_divisor(dataset, cq.divisor_x, cq.divisor_y)
            if divisor == 0:
                raise ZeroEvidenceProbability(_divisor_label(cq.divisor_x, cq.divisor_y), 0.0)
        return Interval(0.0, 0.0)

    nvars = _variable_count(dataset)
    if nvars > variable_budget:
        raise BudgetExceeded(f"{nvars} LP variables exceed the budget of {variable_budget}")
    types, A, b = _build_constraints(dataset)
    c = _objective(dataset, types, cq.terms, cq.evidence_x, cq.evidence_y)

    solve = _solve_min_exact if nvars <= exact_limit else _solve_min_float
    status_lo, vmin = solve(A, b, c)
    if status_lo == "infeasible":
        raise Infeasible(
            "experimental and observational data admit no joint response-type distribution"
        )
    status_hi, neg_vmax = solve(A, b, [-v for v in c])
    if status_lo != "optimal" or status_hi != "optimal":
        raise RuntimeError(f"unexpected LP status: min={status_lo}, max={status_hi}")
    vmax = -neg_vmax

    if cq.conditional:
        divisor = _exact_divisor(dataset, cq.divisor_x, cq.divisor_y)
        if divisor == 0:
            raise ZeroEvidenceProbability(_divisor_label(cq.divisor_x, cq.divisor_y), 0.0)
        vmin = vmin / divisor
        vmax = vmax / divisor
    return make_interval(float(vmin), float(vmax), "LP min", "LP max")


def feasible(
    dataset: Dataset,
    *,
    variable_budget: int = DEFAULT_VARIABLE_BUDGET,
    exact_limit: int = DEFAULT_EXACT_LIMIT,
) -> bool:
    """True iff the constraint system admits any joint distribution."""
    nvars = _variable_count(dataset)
    if nvars > variable_budget:
        raise BudgetExceeded(f"{nvars} LP variables exceed the budget of {variable_budget}")
    _, A, b = _build_constraints(dataset)
    zero = [Fraction(0)] * nvars
    solve = _solve_min_exact if nvars <= exact_limit else _solve_min_float
    status, _ = solve(A, b, zero)
    return status == "optimal"


def dump_lp(dataset: Dataset, query) -> str:
    """Plain-text standard form (variables, constraints, objective)."""
    cq = _to_canonical(dataset, query)
    m = dataset.space.m
    types, A, b = _build_constraints(dataset)
    if cq.kind == ZERO:
        c = [Fraction(0)] * (len(types) * m)
    else:
        c = _objective(dataset, types, cq.terms, cq.evidence_x, cq.evidence_y)

    def var_name(idx: int) -> str:
        t_idx, j = divmod(idx, m)
        return f"q[t{t_idx}][x{j + 1}]"

    lines = ["# variables: q[t][x_j] >= 0, response type t with observed treatment x_j"]
    for t_idx, t in enumerate(types):
        spelled = ", ".join(f"x{j + 1}->y{o}" for j, o in enumerate(t))
        lines.append(f"# t{t_idx}: {spelled}")
    lines.append("objective (min and max): " + (
        " + ".join(var_name(i) for i, v in enumerate(c) if v != 0) or "0"
    ))
    lines.append("subject to:")
    for row, rhs in zip(A, b):
        terms_txt = " + ".join(var_name(i) for i, v in enumerate(row) if v != 0)
        lines.append(f"  {terms_txt} = {rhs}")
    return "\n".join(lines)
