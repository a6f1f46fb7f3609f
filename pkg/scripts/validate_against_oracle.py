#!/usr/bin/env python3
"""Stress the closed-form bounds against the LP oracle on random models.

For each random (dataset, query) pair the LP-tight interval must sit inside
the closed-form interval. The report shows the worst containment slack seen,
how often the closed forms are tight, and average interval widths, broken
down by query shape.
"""

import argparse
import itertools
import random
import time
from collections import defaultdict
from dataclasses import dataclass

from pocbounds.engine import bound
from pocbounds.model import dataset_from_counts
from pocbounds.oracle import tight_bounds
from pocbounds.queryir import CounterfactualTerm, Query, format_query

SIZES = [(2, 2), (2, 3), (3, 2), (3, 3)]
VARIANTS = ["plain", "x", "y", "xy"]


@dataclass
class Config:
    cases: int = 400
    seed: int = 0
    tight_eps: float = 1e-9


@dataclass
class Bucket:
    cases: int = 0
    tight: int = 0
    engine_width: float = 0.0
    lp_width: float = 0.0


def random_dataset(rng: random.Random, m: int, n: int):
    """Counts realized by random response-type masses: feasible by construction."""
    types = list(itertools.product(range(1, n + 1), repeat=m))
    masses = [[rng.randrange(0, 7) for _ in range(m)] for _ in types]
    if sum(map(sum, masses)) == 0:
        masses[0][0] = 1
    obs = [[0] * n for _ in range(m)]
    exp = [[0] * n for _ in range(m)]
    for t, row in zip(types, masses):
        for col, w in enumerate(row):
            obs[col][t[col] - 1] += w
            for j in range(m):
                exp[j][t[j] - 1] += w
    return dataset_from_counts(exp, obs)


def random_query(rng: random.Random, m: int, n: int, variant: str) -> Query:
    k = rng.randrange(1, min(3, m) + 1)
    js = rng.sample(range(1, m + 1), k)
    terms = tuple(CounterfactualTerm(j, rng.randrange(1, n + 1)) for j in sorted(js))
    kwargs = {}
    if variant in ("x", "xy"):
        kwargs["evidence_x"] = rng.randrange(1, m + 1)
    if variant in ("y", "xy"):
        kwargs["evidence_y"] = rng.randrange(1, n + 1)
    return Query(terms=terms, **kwargs)


def parse_args() -> Config:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args()
    return Config(cases=ns.cases, seed=ns.seed)


def main() -> int:
    cfg = parse_args()
    rng = random.Random(cfg.seed)
    worst_slack = float("inf")
    worst_case = None
    buckets: dict[str, Bucket] = defaultdict(Bucket)
    start = time.perf_counter()

    for idx in range(cfg.cases):
        m, n = SIZES[idx % len(SIZES)]
        variant = VARIANTS[(idx // len(SIZES)) % len(VARIANTS)]
        ds = random_dataset(rng, m, n)
        q = random_query(rng, m, n, variant)
        eng = bound(ds, q).interval
        lp = tight_bounds(ds, q)

        slack = min(lp.lo - eng.lo, eng.hi - lp.hi)
        if slack < worst_slack:
            worst_slack, worst_case = slack, (m, n, q)
        key = f"{m}x{n} k={len(q.terms)} {variant}"
        b = buckets[key]
        b.cases += 1
        b.tight += int(abs(eng.lo - lp.lo) <= cfg.tight_eps and abs(eng.hi - lp.hi) <= cfg.tight_eps)
        b.engine_width += eng.width
        b.lp_width += lp.width

    elapsed = time.perf_counter() - start
    print(f"cases:       {cfg.cases} (seed {cfg.seed}, {elapsed:.1f}s)")
    print(f"worst slack: {worst_slack:.3e}  (negative would mean the LP escaped)")
    if worst_case:
        m, n, q = worst_case
        print(f"             at {m}x{n}, query {format_query(q)}")
    print(f"containment: {'OK' if worst_slack >= -1e-9 else 'VIOLATED'}")
    print()
    print(f"{'bucket':22s} {'cases':>5s} {'tight':>5s} {'avg engine width':>17s} {'avg LP width':>13s}")
    for key in sorted(buckets):
        b = buckets[key]
        print(
            f"{key:22s} {b.cases:5d} {b.tight:5d} "
            f"{b.engine_width / b.cases:17.4f} {b.lp_width / b.cases:13.4f}"
        )
    return 0 if worst_slack >= -1e-9 else 1


if __name__ == "__main__":
    raise SystemExit(main())
