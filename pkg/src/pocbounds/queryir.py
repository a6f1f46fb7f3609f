"""Query syntax, parser, and canonicalization.

Grammar (whitespace insignificant, indices 1-based):

    query  := "P(" events ( "|" events )? ")"
    events := event ("," event)*
    event  := OUTCOME "_" TREATMENT | TREATMENT | OUTCOME
    TREATMENT := "x" INT
    OUTCOME   := "y" INT

A query is a conjunction of counterfactual terms y_i under do(x_j), plus at
most one bare treatment event and at most one bare outcome event (the
observed evidence). The bar marks conditioning; evidence events may sit on
either side of it, and conditioning always divides by the probability of all
evidence present. Counterfactual terms may only appear left of the bar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import ProblemSpace

ZERO = "zero"
EXACT = "exact"
STANDARD = "standard"


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class IndexOutOfRange(ValueError):
    pass


class UnsupportedQuery(ValueError):
    pass


@dataclass(frozen=True, slots=True, order=True)
class CounterfactualTerm:
    """The event: Y would be y_{outcome} had X been x_{treatment}."""

    treatment: int
    outcome: int


@dataclass(frozen=True)
class Query:
    terms: tuple[CounterfactualTerm, ...]
    evidence_x: int | None = None
    evidence_y: int | None = None
    conditional: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise UnsupportedQuery("a query needs at least one counterfactual term")
        if self.conditional and self.evidence_x is None and self.evidence_y is None:
            raise UnsupportedQuery("conditional queries need observed evidence")


@dataclass(frozen=True)
class CanonicalQuery:
    """Normal form the engine dispatches on.

    kind "zero": the event is impossible. kind "exact": the event reduced to
    observational content (a joint cell or marginal given by evidence_x /
    evidence_y). kind "standard": terms with strictly increasing distinct
    treatments and evidence_x outside them, matching the theorem
    preconditions literally.

    The divisor fields keep the original evidence of a conditional query;
    absorption can grow the event's evidence (P(y1_x3 | x3) has event
    evidence (x3, y1) but still divides by P(x3) only).
    """

    kind: str
    terms: tuple[CounterfactualTerm, ...] = ()
    evidence_x: int | None = None
    evidence_y: int | None = None
    conditional: bool = False
    divisor_x: int | None = None
    divisor_y: int | None = None


_EVENT_RE = re.compile(r"y(\d+)_x(\d+)|x(\d+)|y(\d+)")


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse_query(text: str, space: ProblemSpace) -> Query:
    """Parse the textual grammar and validate indices against the space."""
    if not text or not text.strip():
        raise QuerySyntaxError("empty query", 0)
    pos = _skip_ws(text, 0)
    if pos >= len(text) or text[pos] != "P":
        raise QuerySyntaxError("expected 'P'", pos)
    pos = _skip_ws(text, pos + 1)
    if pos >= len(text) or text[pos] != "(":
        raise QuerySyntaxError("expected '('", pos)
    pos = _skip_ws(text, pos + 1)

    terms: list[CounterfactualTerm] = []
    bare_x: list[int] = []
    bare_y: list[int] = []
    seen_bar = False
    expect_event = True
    while True:
        if pos >= len(text):
            raise QuerySyntaxError("unterminated query, expected ')'", pos)
        ch = text[pos]
        if ch == ")":
            if expect_event:
                raise QuerySyntaxError("expected an event before ')'", pos)
            pos += 1
            break
        if ch == ",":
            if expect_event:
                raise QuerySyntaxError("unexpected ','", pos)
            expect_event = True
            pos = _skip_ws(text, pos + 1)
            continue
        if ch == "|":
            if expect_event or seen_bar:
                raise QuerySyntaxError("unexpected '|'", pos)
            seen_bar = True
            expect_event = True
            pos = _skip_ws(text, pos + 1)
            continue
        if not expect_event:
            raise QuerySyntaxError("expected ',', '|' or ')'", pos)
        match = _EVENT_RE.match(text, pos)
        if match is None:
            raise QuerySyntaxError("expected an event like y1_x2, x2 or y1", pos)
        yo, xt, bx, by = match.groups()
        if yo is not None:
            if seen_bar:
                raise UnsupportedQuery(
                    "cannot condition on a counterfactual term "
                    f"(y{yo}_x{xt} appears right of '|')"
                )
            terms.append(_checked_term(int(xt), int(yo), space, pos))
        elif bx is not None:
            bare_x.append(_checked_treatment(int(bx), space, pos))
        else:
            bare_y.append(_checked_outcome(int(by), space, pos))
        expect_event = False
        pos = _skip_ws(text, match.end())

    tail = _skip_ws(text, pos)
    if tail != len(text):
        raise QuerySyntaxError("trailing input after ')'", tail)

    if len(bare_x) > 1:
        raise UnsupportedQuery("at most one bare treatment event is allowed")
    if len(bare_y) > 1:
        raise UnsupportedQuery("at most one bare outcome event is allowed")
    if not terms:
        raise UnsupportedQuery("a query needs at least one counterfactual term")
    if seen_bar and not bare_x and not bare_y:
        raise UnsupportedQuery("conditional queries need observed evidence")
    return Query(
        terms=tuple(terms),
        evidence_x=bare_x[0] if bare_x else None,
        evidence_y=bare_y[0] if bare_y else None,
        conditional=seen_bar,
    )


def _checked_treatment(j: int, space: ProblemSpace, pos: int) -> int:
    if not 1 <= j <= space.m:
        raise IndexOutOfRange(f"x{j} out of range (m={space.m}, at position {pos})")
    return j


def _checked_outcome(i: int, space: ProblemSpace, pos: int) -> int:
    if not 1 <= i <= space.n:
        raise IndexOutOfRange(f"y{i} out of range (n={space.n}, at position {pos})")
    return i


def _checked_term(j: int, i: int, space: ProblemSpace, pos: int) -> CounterfactualTerm:
    return CounterfactualTerm(_checked_treatment(j, space, pos), _checked_outcome(i, space, pos))


def validate_indices(query: Query, space: ProblemSpace) -> None:
    """Check a programmatically built query against a problem space."""
    for t in query.terms:
        if not 1 <= t.treatment <= space.m:
            raise IndexOutOfRange(f"x{t.treatment} out of range (m={space.m})")
        if not 1 <= t.outcome <= space.n:
            raise IndexOutOfRange(f"y{t.outcome} out of range (n={space.n})")
    if query.evidence_x is not None and not 1 <= query.evidence_x <= space.m:
        raise IndexOutOfRange(f"x{query.evidence_x} out of range (m={space.m})")
    if query.evidence_y is not None and not 1 <= query.evidence_y <= space.n:
        raise IndexOutOfRange(f"y{query.evidence_y} out of range (n={space.n})")


def canonicalize(query: Query) -> CanonicalQuery:
    """Normalize a query before the engine sees it.

    Duplicate terms are merged; two terms assigning different outcomes to the
    same treatment make the event impossible; a term whose treatment equals
    the evidence treatment is absorbed into observational evidence by the
    consistency rule (or kills the event if the evidence outcome disagrees);
    remaining terms are sorted by treatment.
    """
    divisor_x = query.evidence_x if query.conditional else None
    divisor_y = query.evidence_y if query.conditional else None

    def zero() -> CanonicalQuery:
        return CanonicalQuery(
            ZERO,
            conditional=query.conditional,
            divisor_x=divisor_x,
            divisor_y=divisor_y,
        )

    by_treatment: dict[int, CounterfactualTerm] = {}
    for t in query.terms:
        kept = by_treatment.setdefault(t.treatment, t)
        if kept.outcome != t.outcome:
            # Y under do(x_j) is a single value; it cannot be two outcomes.
            return zero()
    ex = query.evidence_x
    ey = query.evidence_y
    if ex is not None and ex in by_treatment:
        absorbed = by_treatment.pop(ex)
        if ey is not None and ey != absorbed.outcome:
            # Evidence X = x_j makes the term's world the actual one, so the
            # observed outcome must match the term's outcome.
            return zero()
        ey = absorbed.outcome
    remaining = tuple(sorted(by_treatment.values()))
    if not remaining:
        return CanonicalQuery(
            EXACT,
            evidence_x=ex,
            evidence_y=ey,
            conditional=query.conditional,
            divisor_x=divisor_x,
            divisor_y=divisor_y,
        )
    return CanonicalQuery(
        STANDARD,
        terms=remaining,
        evidence_x=ex,
        evidence_y=ey,
        conditional=query.conditional,
        divisor_x=divisor_x,
        divisor_y=divisor_y,
    )


def _event_text(terms, evidence_x, evidence_y) -> str:
    parts = [f"y{t.outcome}_x{t.treatment}" for t in terms]
    if evidence_x is not None:
        parts.append(f"x{evidence_x}")
    if evidence_y is not None:
        parts.append(f"y{evidence_y}")
    return ", ".join(parts)


def format_query(query: Query) -> str:
    """Render a query in the grammar; parse(format(q)) canonicalizes like q."""
    body = _event_text(query.terms, None, None)
    evidence = _event_text((), query.evidence_x, query.evidence_y)
    if query.conditional:
        return f"P({body} | {evidence})"
    if evidence:
        return f"P({body}, {evidence})"
    return f"P({body})"


def subquery_label(terms, evidence_x=None, evidence_y=None) -> str:
    """Joint-form label for trace nodes."""
    return f"P({_event_text(terms, evidence_x, evidence_y)})"
