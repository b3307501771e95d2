"""Greedy input-domain branching for tightening certified bounds.

A bounding callback maps a box to a certified (lo, hi) enclosure of some
scalar quantity.  Starting from the root box, the branch whose certified
bounds are furthest from an empirical Monte-Carlo anchor is repeatedly
bisected along every non-degenerate coordinate, children are re-bounded, and
after the branching budget is spent the global enclosure is the min/max over
all remaining leaves.
"""

from __future__ import annotations

import heapq
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .linbounds import Box

DEGENERATE_WIDTH = 1e-12


def domain_split(box: Box) -> List[Box]:
    """Bisect every non-degenerate coordinate at its midpoint, producing
    2^(number of wide coordinates) children."""
    halves = []
    for lo, hi in zip(box.lower, box.upper):
        if hi - lo > DEGENERATE_WIDTH:
            mid = 0.5 * (lo + hi)
            halves.append([(lo, mid), (mid, hi)])
        else:
            halves.append([(lo, hi)])
    children = []
    for combo in itertools.product(*halves):
        lower = np.array([c[0] for c in combo])
        upper = np.array([c[1] for c in combo])
        children.append(Box(lower, upper))
    return children


def mc_sample(
    fn: Callable[[np.ndarray], np.ndarray],
    box: Box,
    rng: np.random.Generator,
    n: int,
    batch: int = 200_000,
) -> Tuple[float, float]:
    """Empirical (min, max) of a batched scalar function over n uniform samples."""
    if n <= 0:
        raise ValueError(f"sample count must be positive, got {n}")
    lo = np.inf
    hi = -np.inf
    remaining = n
    while remaining > 0:
        m = min(batch, remaining)
        vals = np.asarray(fn(box.sample(rng, m)), dtype=np.float64)
        if vals.shape != (m,):
            raise ValueError(f"sampling callback returned shape {vals.shape}, expected ({m},)")
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
        remaining -= m
    return lo, hi


@dataclass
class BranchReport:
    """Outcome of a greedy branching run."""

    lo: float
    hi: float
    anchor_lo: float
    anchor_hi: float
    n_processed: int
    n_leaves: int


def greedy_branch(
    bound_fn: Callable[[Box], Tuple[float, float]],
    box: Box,
    n_branches: int,
    sample_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    n_samples: int = 4096,
    rng: Optional[np.random.Generator] = None,
    threads: int = 0,
    dump_path: Optional[str] = None,
) -> BranchReport:
    """Refine certified bounds with up to n_branches greedy bisections.

    The branch with the largest anchor gap -- max(anchor_lo - lo, hi -
    anchor_hi) against a one-off Monte-Carlo anchor on the root box -- is
    split first.  Branches whose every side is below the degenerate width are
    never requeued.  With threads > 0 the children of one split are bounded
    in a thread pool.
    """
    if n_branches < 0:
        raise ValueError(f"branch budget must be non-negative, got {n_branches}")
    rng = rng if rng is not None else np.random.default_rng(0)

    root_lo, root_hi = bound_fn(box)
    if sample_fn is not None:
        anchor_lo, anchor_hi = mc_sample(sample_fn, box, rng, n_samples)
    else:
        anchor_lo, anchor_hi = root_lo, root_hi

    def gap(lo: float, hi: float) -> float:
        return max(anchor_lo - lo, hi - anchor_hi)

    dump = open(dump_path, "w") if dump_path else None

    def record(b: Box, lo: float, hi: float, kind: str) -> None:
        if dump is not None:
            dump.write(json.dumps({
                "kind": kind,
                "lower": b.lower.tolist(),
                "upper": b.upper.tolist(),
                "lo": lo,
                "hi": hi,
            }) + "\n")

    counter = itertools.count()
    heap: list = []
    leaves: List[Tuple[float, float]] = []

    def push(b: Box, lo: float, hi: float) -> None:
        if np.all(b.width() <= DEGENERATE_WIDTH):
            leaves.append((lo, hi))
        else:
            heapq.heappush(heap, (-gap(lo, hi), next(counter), b, lo, hi))

    record(box, root_lo, root_hi, "root")
    push(box, root_lo, root_hi)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 0 else None
    processed = 0
    try:
        for _ in range(n_branches):
            if not heap:
                break
            _, _, parent, p_lo, p_hi = heapq.heappop(heap)
            children = domain_split(parent)
            if pool is not None:
                results = list(pool.map(bound_fn, children))
            else:
                results = [bound_fn(c) for c in children]
            for child, (lo, hi) in zip(children, results):
                # the parent's enclosure also holds on the sub-box, so
                # intersecting keeps refinement monotone
                lo, hi = max(lo, p_lo), min(hi, p_hi)
                hi = max(hi, lo)
                record(child, lo, hi, "leaf")
                push(child, lo, hi)
            processed += 1
    finally:
        if pool is not None:
            pool.shutdown()
        if dump is not None:
            dump.close()

    leaves.extend((lo, hi) for _, _, _, lo, hi in heap)
    final_lo = min(lo for lo, _ in leaves)
    final_hi = max(hi for _, hi in leaves)
    return BranchReport(final_lo, final_hi, anchor_lo, anchor_hi, processed, len(leaves))
