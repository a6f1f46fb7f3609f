"""Bound computation for probabilities of causation.

The evaluator walks a canonical query through eight theorem dispatchers:
four closed forms for a single counterfactual term (joint with an observed
outcome, an observed treatment, or both) and four recursive forms for
conjunctions of terms. Every theorem is a max over lower-bound candidates
against a min over upper-bound candidates; the recursion consumes the final
clamped bounds of its subqueries and is memoized per call on the canonical
subquery key.

Traces record every candidate value before clamping (lower-bound branches go
negative routinely), which branch won, and the child subquery traces.
Conditional queries trace the joint event; the result interval is the joint
interval divided by the evidence probability.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frechet import EPS_NUM, Interval, make_interval
from .model import Dataset
from .queryir import (
    EXACT,
    STANDARD,
    ZERO,
    CanonicalQuery,
    CounterfactualTerm,
    Query,
    UnsupportedQuery,
    canonicalize,
    parse_query,
    subquery_label,
    validate_indices,
)

# Distinct subqueries grow like 2^(k+2); keep k sane by default.
DEFAULT_MAX_TERMS = 8


class ZeroEvidenceProbability(ValueError):
    """Conditioning on evidence whose probability is (numerically) zero."""

    def __init__(self, label: str, value: float):
        self.label = label
        self.value = value
        super().__init__(f"evidence {label} has probability {value!r}; cannot condition on it")


class NotBinary(ValueError):
    """The Tian-Pearl special cases need m = n = 2."""


@dataclass(frozen=True)
class BoundTrace:
    """One derivation node: which theorem ran and which branches won.

    Candidate lists keep the raw branch values before clamping, so the
    arithmetic (including negative lower-bound candidates) stays visible.
    """

    query: str
    theorem: str  # T1..T8, Exact, Zero
    lower_branch: str
    upper_branch: str
    lo: float
    hi: float
    lower_candidates: tuple[tuple[str, float], ...]
    upper_candidates: tuple[tuple[str, float], ...]
    children: tuple["BoundTrace", ...]

    def to_json(self) -> dict:
        return {
            "query": self.query,
            "theorem": self.theorem,
            "lower_branch": self.lower_branch,
            "upper_branch": self.upper_branch,
            "lo": self.lo,
            "hi": self.hi,
            "children": [child.to_json() for child in self.children],
        }


@dataclass(frozen=True)
class BoundResult:
    interval: Interval
    trace: BoundTrace
    stats_evaluated: int


class _Evaluator:
    """Joint-event recursion over (terms, evidence_x, evidence_y) keys."""

    def __init__(self, dataset: Dataset, memoize: bool = True):
        self.ds = dataset
        self.memo: dict | None = {} if memoize else None
        self.seen: set = set()

    def eval(self, terms, ex, ey) -> tuple[Interval, BoundTrace]:
        key = (terms, ex, ey)
        if self.memo is not None:
            hit = self.memo.get(key)
            if hit is not None:
                return hit
        self.seen.add(key)
        result = self._dispatch(terms, ex, ey)
        if self.memo is not None:
            self.memo[key] = result
        return result

    def _dispatch(self, terms, ex, ey):
        if len(terms) == 1:
            term = terms[0]
            if ex is None and ey is None:
                return self._exact_point(term)
            if ex is None:
                if ey == term.outcome:
                    return self._t1(term)
                return self._t2(term, ey)
            if ey is None:
                return self._t3(term, ex)
            return self._t4(term, ex, ey)
        if ex is None and ey is None:
            return self._t5(terms)
        if ex is not None and ey is None:
            return self._t6(terms, ex)
        if ex is None:
            return self._t7(terms, ey)
        return self._t8(terms, ex, ey)

    def _node(self, terms, ex, ey, theorem, lower, upper, children):
        lo_label, lo_raw = max(lower, key=lambda cand: cand[1])
        hi_label, hi_raw = min(upper, key=lambda cand: cand[1])
        interval = make_interval(lo_raw, hi_raw, lo_label, hi_label)
        trace = BoundTrace(
            query=subquery_label(terms, ex, ey),
            theorem=theorem,
            lower_branch=lo_label,
            upper_branch=hi_label,
            lo=interval.lo,
            hi=interval.hi,
            lower_candidates=tuple(lower),
            upper_candidates=tuple(upper),
            children=tuple(children),
        )
        return interval, trace

    # -- single-term forms ------------------------------------------------

    def _exact_point(self, t):
        v = self.ds.p_do(t.treatment, t.outcome)
        label = f"P(y{t.outcome}_x{t.treatment})"
        return self._node((t,), None, None, "Exact", [(label, v)], [(label, v)], ())

    def _t1(self, t):
        # P(y_i under x_j, joint with observed Y = y_i)
        ds, j, i = self.ds, t.treatment, t.outcome
        lower = [
            (f"P(x{j},y{i})", ds.p_joint(j, i)),
            (f"P(y{i}_x{j})+P(y{i})-1", ds.p_do(j, i) + ds.p_y(i) - 1.0),
        ]
        upper = [
            (f"P(y{i}_x{j})", ds.p_do(j, i)),
            (f"P(y{i})", ds.p_y(i)),
        ]
        return self._node((t,), None, i, "T1", lower, upper, ())

    def _t2(self, t, q):
        # P(y_i under x_j, joint with observed Y = y_q), q != i
        ds, j, i = self.ds, t.treatment, t.outcome
        base = ds.p_do(j, i) - 1.0 + ds.p_x(j) - ds.p_joint(j, i)
        # Per-p clamp sits inside the sum, as the formula is printed.
        dual = sum(
            max(0.0, base + ds.p_joint(p, q))
            for p in range(1, ds.space.m + 1)
            if p != j
        )
        lower = [
            ("0", 0.0),
            (f"P(y{i}_x{j})+P(y{q})-1", ds.p_do(j, i) + ds.p_y(q) - 1.0),
            ("sum_p", dual),
        ]
        upper = [
            (f"P(y{i}_x{j})-P(x{j},y{i})", ds.p_do(j, i) - ds.p_joint(j, i)),
            (f"P(y{q})-P(x{j},y{q})", ds.p_y(q) - ds.p_joint(j, q)),
        ]
        return self._node((t,), None, q, "T2", lower, upper, ())

    def _t3(self, t, p):
        # P(y_i under x_j, joint with observed X = x_p), p != j
        ds, j, i = self.ds, t.treatment, t.outcome
        lower = [
            ("0", 0.0),
            (
                f"P(y{i}_x{j})-P(x{j},y{i})-1+P(x{j})+P(x{p})",
                ds.p_do(j, i) - ds.p_joint(j, i) - 1.0 + ds.p_x(j) + ds.p_x(p),
            ),
        ]
        upper = [
            (f"P(y{i}_x{j})-P(x{j},y{i})", ds.p_do(j, i) - ds.p_joint(j, i)),
            (f"P(x{p})", ds.p_x(p)),
        ]
        return self._node((t,), p, None, "T3", lower, upper, ())

    def _t4(self, t, p, q):
        # P(y_i under x_j, joint with observed X = x_p and Y = y_q), p != j
        ds, j, i = self.ds, t.treatment, t.outcome
        lower = [
            ("0", 0.0),
            (
                f"P(y{i}_x{j})+P(x{p},y{q})-1+P(x{j})-P(x{j},y{i})",
                ds.p_do(j, i) + ds.p_joint(p, q) - 1.0 + ds.p_x(j) - ds.p_joint(j, i),
            ),
        ]
        upper = [
            (f"P(y{i}_x{j})-P(x{j},y{i})", ds.p_do(j, i) - ds.p_joint(j, i)),
            (f"P(x{p},y{q})", ds.p_joint(p, q)),
        ]
        return self._node((t,), p, q, "T4", lower, upper, ())

    # -- multi-term forms --------------------------------------------------

    @staticmethod
    def _term_label(t):
        return f"y{t.outcome}_x{t.treatment}"

    def _subsets(self, terms):
        """(held-out term, remaining terms, P of held-out term) triples."""
        for idx, t in enumerate(terms):
            rest = terms[:idx] + terms[idx + 1 :]
            yield t, rest, self.ds.p_do(t.treatment, t.outcome)

    def _t5(self, terms):
        ds, k = self.ds, len(terms)
        pes = [ds.p_do(t.treatment, t.outcome) for t in terms]
        children = []
        lower = [("0", 0.0), ("frechet", sum(pes) - (k - 1))]
        upper = [(f"P({self._term_label(t)})", pe) for t, pe in zip(terms, pes)]
        loo_lower, loo_upper = [], []
        for t, rest, pe in self._subsets(terms):
            sub_iv, sub_tr = self.eval(rest, None, None)
            children.append(sub_tr)
            loo_lower.append((f"loo({self._term_label(t)})", sub_iv.lo + pe - 1.0))
            loo_upper.append((f"loo({self._term_label(t)})", sub_iv.hi))
        # Law of total probability over X: each summand pins one treatment
        # arm, collapsing a matching term into evidence.
        dec_lo = dec_hi = 0.0
        by_treatment = {t.treatment: t for t in terms}
        for p in range(1, ds.space.m + 1):
            match = by_treatment.get(p)
            if match is not None:
                rest = tuple(t for t in terms if t.treatment != p)
                sub_iv, sub_tr = self.eval(rest, p, match.outcome)
            else:
                sub_iv, sub_tr = self.eval(terms, p, None)
            children.append(sub_tr)
            dec_lo += sub_iv.lo
            dec_hi += sub_iv.hi
        lower += loo_lower + [("decomp", dec_lo)]
        upper += loo_upper + [("decomp", dec_hi)]
        return self._node(terms, None, None, "T5", lower, upper, children)

    def _t6(self, terms, p):
        ds, k = self.ds, len(terms)
        pes = [ds.p_do(t.treatment, t.outcome) for t in terms]
        p_x = ds.p_x(p)
        children = []
        lower = [("0", 0.0), ("frechet", sum(pes) + p_x - k)]
        upper = [(f"P({self._term_label(t)})", pe) for t, pe in zip(terms, pes)]
        upper.append((f"P(x{p})", p_x))
        loo_lower, loo_upper, pair_upper = [], [], []
        for t, rest, _ in self._subsets(terms):
            sub_iv, sub_tr = self.eval(rest, None, None)
            pair_iv, pair_tr = self.eval((t,), p, None)
            children += [sub_tr, pair_tr]
            loo_lower.append((f"loo({self._term_label(t)})", sub_iv.lo + pair_iv.lo - 1.0))
            loo_upper.append((f"loo({self._term_label(t)})", sub_iv.hi))
            pair_upper.append((f"pair({self._term_label(t)})", pair_iv.hi))
        lower += loo_lower
        upper += loo_upper + pair_upper
        return self._node(terms, p, None, "T6", lower, upper, children)

    def _t7(self, terms, q):
        ds, k = self.ds, len(terms)
        pes = [ds.p_do(t.treatment, t.outcome) for t in terms]
        p_y = ds.p_y(q)
        children = []
        lower = [("0", 0.0), ("frechet", sum(pes) + p_y - k)]
        upper = [(f"P({self._term_label(t)})", pe) for t, pe in zip(terms, pes)]
        upper.append((f"P(y{q})", p_y))
        loo_lower, loo_upper, pair_upper = [], [], []
        for t, rest, _ in self._subsets(terms):
            sub_iv, sub_tr = self.eval(rest, None, None)
            pair_iv, pair_tr = self.eval((t,), None, q)
            children += [sub_tr, pair_tr]
            loo_lower.append((f"loo({self._term_label(t)})", sub_iv.lo + pair_iv.lo - 1.0))
            loo_upper.append((f"loo({self._term_label(t)})", sub_iv.hi))
            pair_upper.append((f"pair({self._term_label(t)})", pair_iv.hi))
        # Decomposition over X: an arm matching a term contributes only when
        # the term's outcome equals the observed y_q; otherwise the summand
        # event is impossible (the arm's world is the actual one) and adds 0.
        dec_lo = dec_hi = 0.0
        by_treatment = {t.treatment: t for t in terms}
        for p in range(1, ds.space.m + 1):
            match = by_treatment.get(p)
            if match is not None:
                if match.outcome != q:
                    continue
                rest = tuple(t for t in terms if t.treatment != p)
                sub_iv, sub_tr = self.eval(rest, p, q)
            else:
                sub_iv, sub_tr = self.eval(terms, p, q)
            children.append(sub_tr)
            dec_lo += sub_iv.lo
            dec_hi += sub_iv.hi
        lower += loo_lower + [("decomp", dec_lo)]
        upper += loo_upper + pair_upper + [("decomp", dec_hi)]
        return self._node(terms, None, q, "T7", lower, upper, children)

    def _t8(self, terms, p, q):
        ds, k = self.ds, len(terms)
        pes = [ds.p_do(t.treatment, t.outcome) for t in terms]
        p_xy = ds.p_joint(p, q)
        children = []
        lower = [("0", 0.0), ("frechet", sum(pes) + p_xy - k)]
        upper = [(f"P({self._term_label(t)})", pe) for t, pe in zip(terms, pes)]
        upper.append((f"P(x{p},y{q})", p_xy))
        loo_lower, loo_upper, pair_upper = [], [], []
        for t, rest, _ in self._subsets(terms):
            sub_iv, sub_tr = self.eval(rest, None, None)
            pair_iv, pair_tr = self.eval((t,), p, q)
            children += [sub_tr, pair_tr]
            loo_lower.append((f"loo({self._term_label(t)})", sub_iv.lo + pair_iv.lo - 1.0))
            loo_upper.append((f"loo({self._term_label(t)})", sub_iv.hi))
            pair_upper.append((f"pair({self._term_label(t)})", pair_iv.hi))
        lower += loo_lower
        upper += loo_upper + pair_upper
        return self._node(terms, p, q, "T8", lower, upper, children)


def _evidence_label(ex, ey) -> str:
    if ex is not None and ey is not None:
        return f"P(x{ex},y{ey})"
    if ex is not None:
        return f"P(x{ex})"
    return f"P(y{ey})"


def _evidence_prob(dataset: Dataset, ex, ey) -> float:
    if ex is not None and ey is not None:
        return dataset.p_joint(ex, ey)
    if ex is not None:
        return dataset.p_x(ex)
    return dataset.p_y(ey)


def _divide_by_evidence(dataset: Dataset, interval: Interval, cq: CanonicalQuery) -> Interval:
    divisor = _evidence_prob(dataset, cq.divisor_x, cq.divisor_y)
    if divisor < EPS_NUM:
        raise ZeroEvidenceProbability(_evidence_label(cq.divisor_x, cq.divisor_y), divisor)
    return interval.scaled_by(divisor)


def bound(
    dataset: Dataset,
    query: Query | str,
    *,
    memoize: bool = True,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> BoundResult:
    """Bound a probability of causation on a dataset.

    Accepts a query object or query text. Zero queries give [0, 0]; queries
    that reduce to observational content give a point interval; everything
    else runs the theorem recursion. Conditional queries divide the joint
    interval by the evidence probability and raise ZeroEvidenceProbability
    when that probability vanishes.
    """
    if isinstance(query, str):
        query = parse_query(query, dataset.space)
    else:
        validate_indices(query, dataset.space)
    cq = canonicalize(query)

    if cq.kind == ZERO:
        interval = Interval(0.0, 0.0)
        if cq.conditional:
            interval = _divide_by_evidence(dataset, interval, cq)
        trace = BoundTrace(
            query="P(impossible event)",
            theorem="Zero",
            lower_branch="0",
            upper_branch="0",
            lo=0.0,
            hi=0.0,
            lower_candidates=(("0", 0.0),),
            upper_candidates=(("0", 0.0),),
            children=(),
        )
        return BoundResult(interval, trace, 1)

    if cq.kind == EXACT:
        label = _evidence_label(cq.evidence_x, cq.evidence_y)
        v = _evidence_prob(dataset, cq.evidence_x, cq.evidence_y)
        interval = make_interval(v, v)
        if cq.conditional:
            interval = _divide_by_evidence(dataset, interval, cq)
        trace = BoundTrace(
            query=label,
            theorem="Exact",
            lower_branch=label,
            upper_branch=label,
            lo=v,
            hi=v,
            lower_candidates=((label, v),),
            upper_candidates=((label, v),),
            children=(),
        )
        return BoundResult(interval, trace, 1)

    if len(cq.terms) > max_terms:
        raise UnsupportedQuery(
            f"{len(cq.terms)} counterfactual terms exceed the limit of {max_terms}; "
            "the recursion grows like 2^(k+2)"
        )
    evaluator = _Evaluator(dataset, memoize=memoize)
    interval, trace = evaluator.eval(cq.terms, cq.evidence_x, cq.evidence_y)
    if cq.conditional:
        interval = _divide_by_evidence(dataset, interval, cq)
    return BoundResult(interval, trace, len(evaluator.seen))


def tian_pearl(dataset: Dataset, kind: str) -> Interval:
    """The binary tight bounds for PNS, PN, or PS (m = n = 2).

    Convention: x = x1 (treated), x' = x2, y = y1, y' = y2. PS comes from the
    PN bounds by exchanging x with x' and y with y'.
    """
    if dataset.space.m != 2 or dataset.space.n != 2:
        raise NotBinary(f"need m = n = 2, got m={dataset.space.m}, n={dataset.space.n}")
    what = kind.upper()
    p_do, p_joint = dataset.p_do, dataset.p_joint
    y_x, y_xp = p_do(1, 1), p_do(2, 1)
    yp_x, yp_xp = p_do(1, 2), p_do(2, 2)
    xy, xyp = p_joint(1, 1), p_joint(1, 2)
    xpy, xpyp = p_joint(2, 1), p_joint(2, 2)
    y, yp = dataset.p_y(1), dataset.p_y(2)
    if what == "PNS":
        lo = max(0.0, y_x - y_xp, y - y_xp, y_x - y)
        hi = min(y_x, yp_xp, xy + xpyp, y_x - y_xp + xyp + xpy)
        return make_interval(lo, hi, "PNS lower", "PNS upper")
    if what == "PN":
        if xy < EPS_NUM:
            raise ZeroEvidenceProbability("P(x1,y1)", xy)
        lo = max(0.0, (y - y_xp) / xy)
        hi = min(1.0, (yp_xp - xpyp) / xy)
        return make_interval(lo, hi, "PN lower", "PN upper")
    if what == "PS":
        if xpyp < EPS_NUM:
            raise ZeroEvidenceProbability("P(x2,y2)", xpyp)
        lo = max(0.0, (yp - yp_x) / xpyp)
        hi = min(1.0, (y_x - xy) / xpyp)
        return make_interval(lo, hi, "PS lower", "PS upper")
    raise ValueError(f"unknown kind {kind!r}; expected PNS, PN or PS")
