"""Search for optimal atom maps by growing alternating cycles.

Transition states of balanced reactions decompose into closed walks whose
edges alternate between +1 (bond formed or order raised) and -1 (bond
broken or lowered).  The solver exploits that: it grows such walks over
candidate vertex pairs within a weight-change budget k, and hands every
closed candidate to the completion step, which either extends it to a
full map or rejects it.  Iterative deepening over k finds the minimum
cost, and collecting all candidates at the first productive depth
enumerates every optimal map up to equivalence.

Two search modes exist.  The elementary mode grows one simple cycle with
exact unit steps; it covers single-cycle homovalent mechanisms.  The
general mode also allows vertex revisits (weights moving by more than
one), loop edges (lone pair and charge bookkeeping), and sealing a
closed walk early to start another one, which yields disconnected
transition states.

Walks are generated canonically: a walk starts at its smallest vertex
with a formation step, and later walks start at strictly larger seeds.
Since signs alternate, a closed walk admits exactly one such traversal
unless it revisits its seed; the rare duplicates from seed revisits are
merged by the solver before completion.

A closed alternating walk moves every vertex's weighted degree by net
zero: interior visits enter and leave with opposite signs, the seed
collects the opening +1 and the closing -1, and a loop's two step slots
cancel against its neighbors.  Maps built here therefore preserve the
weighted degree of every vertex, and the search only ever pairs
vertices of equal weighted degree.  On inputs whose degrees vary, that
filter carries most of the pruning.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .molgraph import CHARGE, RADICAL, weighted_degree
from .mapping import (
    AtomMap,
    ReactionInstance,
    complete_partial,
    equivalent,
)


class SearchTimeout(Exception):
    """Internal signal: the configured deadline passed mid-search."""


@dataclass
class SolveOptions:
    max_cost: int = 10
    connected_only: bool = False
    elementary_only: bool = False
    timeout_ms: Optional[int] = None


@dataclass(frozen=True)
class MechanismTrace:
    """Signed steps of a candidate, grouped into the walks that made it.

    paths[t] is a tuple of ((u, v), sign) entries; signs alternate
    starting at +1 within each walk.  Summing signs per edge over all
    walks reproduces the transition state exactly.
    """

    paths: tuple[tuple[tuple[tuple[int, int], int], ...], ...]

    def edge_sums(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for path in self.paths:
            for (u, v), sign in path:
                out[(u, v)] = out.get((u, v), 0) + sign
        return {e: w for e, w in out.items() if w != 0}


@dataclass(frozen=True)
class Solution:
    status: str  # found | exhausted | timeout
    min_cost: Optional[int]
    maps: tuple[AtomMap, ...]
    traces: tuple[MechanismTrace, ...]


def weight_along_path(
    edge: tuple[int, int], paths: Sequence[Sequence[int]]
) -> int:
    """Net signed weight assigned to an edge by the given vertex walks.

    Each walk alternates +1, -1, ... from its first step; the edge's
    occurrences are summed over every walk.  Closed walks carry their
    seed twice, as first and last entry.
    """
    a, b = edge
    if a > b:
        a, b = b, a
    total = 0
    for path in paths:
        sign = 1
        for t in range(len(path) - 1):
            u, v = path[t], path[t + 1]
            if u > v:
                u, v = v, u
            if (u, v) == (a, b):
                total += sign
            sign = -sign
    return total


class SearchState:
    """Mutable state of one depth-first search over alternating walks.

    psi is the partial map as a dense array (-1 unset) with its inverse;
    paths holds the vertex walks built so far, the last one current; k
    is the remaining weight-change budget and sigma the sign of the next
    step.

    One admissible counter drives pruning.  wp accumulates the net
    change per edge and pend sums |w1 + wp - w2| over fully mapped
    pairs: the steps the search still owes on pairs it can already see.
    Each step settles exactly one unit, so pend can never exceed k.
    """

    __slots__ = ("psi", "inv", "paths", "k", "sigma", "wp", "pend")

    def __init__(self, n: int, k: int):
        self.psi = [-1] * n
        self.inv = [-1] * n
        self.paths: list[list[int]] = []
        self.k = k
        self.sigma = 1
        self.wp: dict[tuple[int, int], int] = {}
        self.pend = 0


class _Ctx:
    """Preprocessed instance data shared by all nodes of one search."""

    __slots__ = (
        "inst",
        "n",
        "w1",
        "w2",
        "adj1",
        "adj2",
        "mates1",
        "mates2",
        "d1",
        "d2",
        "specials",
        "feasible",
        "deadline",
        "ticks",
    )

    def __init__(self, inst: ReactionInstance, deadline: Optional[float]):
        self.inst = inst
        n = inst.n
        self.n = n
        self.d1 = [weighted_degree(inst.g1, v) for v in range(n)]
        self.d2 = [weighted_degree(inst.g2, v) for v in range(n)]
        # a vertex only ever maps to a mate of the same label and the
        # same weighted degree; closed alternating walks preserve both
        self.mates1 = [
            tuple(
                i
                for i in range(n)
                if inst.elabels1[i] == inst.elabels2[q]
                and self.d1[i] == self.d2[q]
            )
            for q in range(n)
        ]
        self.mates2 = [
            tuple(
                q
                for q in range(n)
                if inst.elabels2[q] == inst.elabels1[i]
                and self.d2[q] == self.d1[i]
            )
            for i in range(n)
        ]
        # dense weight tables, loops on the diagonal
        self.w1 = [[0] * n for _ in range(n)]
        self.w2 = [[0] * n for _ in range(n)]
        for (u, v), (_, w) in inst.g1.edges.items():
            self.w1[u][v] = w
            self.w1[v][u] = w
        for (u, v), (_, w) in inst.g2.edges.items():
            self.w2[u][v] = w
            self.w2[v][u] = w
        self.adj1 = [
            tuple(sorted((u, w) for u, w in inst.g1.neighbors(v).items() if u != v))
            for v in range(n)
        ]
        self.adj2 = [
            tuple(sorted((u, w) for u, w in inst.g2.neighbors(v).items() if u != v))
            for v in range(n)
        ]
        # Charge maps to Charge and Radical to Radical in every map;
        # pinning them up front lets steps treat their edges as revisits.
        # A degree mismatch there means no map preserves all weighted
        # degrees, so the search has nothing to find.
        self.feasible = True
        specials = []
        for lbl in (CHARGE, RADICAL):
            s1 = [v for v in range(n) if inst.g1.label(v) == lbl]
            s2 = [v for v in range(n) if inst.g2.label(v) == lbl]
            if s1 and s2:
                specials.append((s1[0], s2[0]))
                if self.d1[s1[0]] != self.d2[s2[0]]:
                    self.feasible = False
        self.specials = tuple(specials)
        self.deadline = deadline
        self.ticks = 0

    def tick(self) -> None:
        self.ticks += 1
        if self.deadline is not None and not self.ticks % 256:
            if time.monotonic() > self.deadline:
                raise SearchTimeout


def _context_mismatch(ctx: _Ctx, st: SearchState, i: int, p: int) -> int:
    """Pending-weight increase from newly mapping i to p.

    Sums |w1 - w2| over pairs of i with already mapped vertices,
    including the loop pair: the number of future steps this mapping
    commits the search to spend.  Pairs untouched on both sides carry
    no term, and no edge of an unmapped vertex can hold accumulated
    change, so the sum is exact.
    """
    psi = st.psi
    w2p = ctx.w2[p]
    acc = abs(ctx.w1[i][i] - w2p[p])
    seen = 0
    for u, w in ctx.adj1[i]:
        pu = psi[u]
        if pu >= 0:
            acc += abs(w - w2p[pu])
            seen |= 1 << u
    inv = st.inv
    w1i = ctx.w1[i]
    for q, w in ctx.adj2[p]:
        u = inv[q]
        if u >= 0 and not seen >> u & 1:
            acc += abs(w1i[u] - w)
    return acc


def _emit(st: SearchState, out: list) -> None:
    partial = {i: p for i, p in enumerate(st.psi) if p >= 0}
    wp = {e: w for e, w in st.wp.items() if w != 0}
    trace_paths = []
    for path in st.paths:
        steps = []
        sign = 1
        for t in range(len(path) - 1):
            u, v = path[t], path[t + 1]
            if u > v:
                u, v = v, u
            steps.append(((u, v), sign))
            sign = -sign
        trace_paths.append(tuple(steps))
    out.append((partial, wp, MechanismTrace(paths=tuple(trace_paths))))


def _candidates(
    ctx: _Ctx, st: SearchState, seed: int, elementary: bool
) -> list[tuple[int, int, bool]]:
    """Admissible (i, p, fresh) steps from the current head, sorted.

    A formation step raises pair {head, i} toward the image weight of
    {psi(head), p}, so p must sit on a product edge at psi(head); a
    cleavage step lowers an existing educt edge at the head.  Fresh
    vertices stay above the seed and pair only with same-degree mates;
    revisits come from the current walk or the pinned specials, guarded
    so no edge takes both signs.  With two budget units left, only
    steps that leave an admissible closing edge back to the seed
    survive.
    """
    path = st.paths[-1]
    h = path[-1]
    ph = st.psi[h]
    psi = st.psi
    inv = st.inv
    w1h = ctx.w1[h]
    w2h = ctx.w2[ph]
    closing = st.k == 2
    pseed = psi[seed]
    out: list[tuple[int, int, bool]] = []

    if st.sigma > 0:
        for q, w2 in ctx.adj2[ph]:
            if inv[q] >= 0:
                continue
            limit = w2 - 1
            for i in ctx.mates1[q]:
                if i <= seed or psi[i] >= 0 or w1h[i] > limit:
                    continue
                if elementary and w1h[i] != limit:
                    continue
                if closing:
                    gap = ctx.w1[i][seed] - 1 - ctx.w2[q][pseed]
                    if (gap != 0) if elementary else (gap < 0):
                        continue
                out.append((i, q, True))
    else:
        for i, w1 in ctx.adj1[h]:
            if psi[i] >= 0 or i <= seed:
                continue
            floor = w1 - 1
            for q in ctx.mates2[i]:
                if inv[q] >= 0 or w2h[q] > floor:
                    continue
                if elementary and w2h[q] != floor:
                    continue
                out.append((i, q, True))

    if not elementary:
        cands = dict.fromkeys(path)
        for s1, _ in ctx.specials:
            cands[s1] = None
        for i in cands:
            p = psi[i]
            if p < 0:
                continue
            e = (h, i) if h <= i else (i, h)
            wp = st.wp.get(e, 0)
            if st.sigma > 0:
                if wp < 0 or w1h[i] + wp + 1 > w2h[p]:
                    continue
            else:
                if wp > 0 or w1h[i] + wp - 1 < w2h[p]:
                    continue
            if closing and i != seed:
                ec = (i, seed) if i <= seed else (seed, i)
                wpc = st.wp.get(ec, 0)
                if wpc > 0 or ctx.w1[i][seed] + wpc - 1 < ctx.w2[p][pseed]:
                    continue
            out.append((i, p, False))

    out.sort()
    return out


def _run(
    ctx: _Ctx,
    st: SearchState,
    seed: int,
    elementary: bool,
    connected: bool,
    out: list,
) -> None:
    """Extend the current walk by one step, exploring all branches."""
    ctx.tick()
    path = st.paths[-1]

    if st.k == 1:
        # only the step closing the walk at its seed remains
        h = path[-1]
        e = (h, seed) if h <= seed else (seed, h)
        wp = st.wp.get(e, 0)
        if wp > 0:
            return
        gap = ctx.w1[h][seed] + wp - 1 - ctx.w2[st.psi[h]][st.psi[seed]]
        if (gap != 0) if elementary else (gap < 0):
            return
        st.wp[e] = wp - 1
        st.pend -= 1
        path.append(seed)
        _emit(st, out)
        path.pop()
        st.pend += 1
        if wp:
            st.wp[e] = wp
        else:
            del st.wp[e]
        return

    for i, p, fresh in _candidates(ctx, st, seed, elementary):
        h = path[-1]
        e = (h, i) if h <= i else (i, h)
        if fresh:
            st.psi[i] = p
            st.inv[p] = i
            added = _context_mismatch(ctx, st, i, p)
            st.pend += added
        wp_old = st.wp.get(e, 0)
        st.wp[e] = wp_old + st.sigma
        st.pend -= 1
        st.k -= 1
        path.append(i)
        st.sigma = -st.sigma

        if st.pend <= st.k:
            at_odd = len(path) % 2 == 0
            if i == seed and not at_odd and not elementary:
                # the walk just closed: seal it (finish or reseed on a
                # strictly larger vertex), or pass through and continue
                if st.k == 0:
                    _emit(st, out)
                elif st.k >= 4:
                    if not connected:
                        _reseed(ctx, st, seed, out)
                    _run(ctx, st, seed, elementary, connected, out)
            elif st.k >= (1 if at_odd else 2):
                # an odd-position head can close in one step, an
                # even-position one needs at least two
                _run(ctx, st, seed, elementary, connected, out)

        st.sigma = -st.sigma
        path.pop()
        st.k += 1
        st.pend += 1
        if wp_old:
            st.wp[e] = wp_old
        else:
            del st.wp[e]
        if fresh:
            st.pend -= added
            st.psi[i] = -1
            st.inv[p] = -1


def _reseed(ctx: _Ctx, st: SearchState, prev_seed: int, out: list) -> None:
    """Seal the current walk and open a new one on a larger seed."""
    saved_sigma = st.sigma
    for j in range(prev_seed + 1, ctx.n):
        if st.psi[j] >= 0:
            continue
        for q in ctx.mates2[j]:
            if st.inv[q] >= 0:
                continue
            st.psi[j] = q
            st.inv[q] = j
            added = _context_mismatch(ctx, st, j, q)
            st.pend += added
            st.paths.append([j])
            st.sigma = 1
            if st.pend <= st.k:
                _run(ctx, st, j, False, False, out)
            st.paths.pop()
            st.sigma = saved_sigma
            st.pend -= added
            st.psi[j] = -1
            st.inv[q] = -1


def _search(
    inst: ReactionInstance,
    k: int,
    elementary: bool,
    connected: bool = False,
    deadline: Optional[float] = None,
) -> list[tuple[dict, dict, MechanismTrace]]:
    if k < 2 or k % 2:
        raise ValueError(f"budget must be even and at least 2, got {k}")
    ctx = _Ctx(inst, deadline)
    if not ctx.feasible:
        return []
    st = SearchState(inst.n, k)
    for s1, s2 in ctx.specials:
        st.psi[s1] = s2
        st.inv[s2] = s1
    out: list[tuple[dict, dict, MechanismTrace]] = []
    for i in range(ctx.n):
        if st.psi[i] >= 0:
            continue
        for p in ctx.mates2[i]:
            if st.inv[p] >= 0:
                continue
            st.psi[i] = p
            st.inv[p] = i
            added = _context_mismatch(ctx, st, i, p)
            st.pend += added
            st.paths.append([i])
            st.sigma = 1
            if st.pend <= st.k:
                _run(ctx, st, i, elementary, connected, out)
            st.paths.pop()
            st.pend -= added
            st.psi[i] = -1
            st.inv[p] = -1
    return out


def search_elementary(
    inst: ReactionInstance, k: int
) -> Iterator[tuple[dict, MechanismTrace]]:
    """Stream candidates whose transition state is one simple k-cycle.

    Steps change a pair's weight by exactly one, vertices never repeat,
    and the cycle closes back at its seed.  k must be even; a budget of
    2 never yields because the closing step would reuse the opening
    edge with the opposite sign.  Charge, radical, and lone pair
    changes never appear here: they need loop or revisit steps.
    """
    for partial, _, trace in _search(inst, k, elementary=True):
        yield partial, trace


def search_general(
    inst: ReactionInstance, k: int
) -> Iterator[tuple[dict, MechanismTrace]]:
    """Stream candidates allowing revisits, loops, and multiple walks.

    Generalizes the elementary search with inequality steps under a
    per-edge sign guard (an edge never takes both signs), closed-walk
    sealing, and reseeding at strictly larger vertices for disconnected
    transition states.
    """
    for partial, _, trace in _search(inst, k, elementary=False):
        yield partial, trace


def solve(
    inst: ReactionInstance, options: Optional[SolveOptions] = None
) -> Solution:
    """Minimum-cost maps by iterative deepening over the change budget.

    Budget 0 is a plain isomorphism check; even budgets follow until
    candidates complete.  Every distinct candidate is completed exactly
    once, completions are deduplicated by overlay equivalence, and the
    first productive budget defines the answer.  An exhausted bound and
    a timeout are distinct non-answers, reported in the status field.
    """
    opts = options or SolveOptions()
    deadline = None
    if opts.timeout_ms is not None:
        deadline = time.monotonic() + opts.timeout_ms / 1000.0

    am = complete_partial(inst, {}, {})
    if am is not None:
        return Solution(
            status="found",
            min_cost=0,
            maps=(am,),
            traces=(MechanismTrace(paths=()),),
        )

    try:
        for level in range(2, opts.max_cost + 1, 2):
            candidates = _search(
                inst,
                level,
                elementary=opts.elementary_only,
                connected=opts.connected_only,
                deadline=deadline,
            )
            seen: set = set()
            maps: list[AtomMap] = []
            traces: list[MechanismTrace] = []
            for partial, wp, trace in candidates:
                if deadline is not None and time.monotonic() > deadline:
                    raise SearchTimeout
                endpoints = set()
                for u, v in wp:
                    endpoints.add(u)
                    endpoints.add(v)
                key = (
                    tuple(sorted(wp.items())),
                    tuple((u, partial[u]) for u in sorted(endpoints)),
                )
                if key in seen:
                    continue
                seen.add(key)
                full = complete_partial(inst, partial, wp)
                if full is None:
                    continue
                if not any(equivalent(inst, full.psi, m.psi) for m in maps):
                    maps.append(full)
                    traces.append(trace)
            if maps:
                return Solution(
                    status="found",
                    min_cost=level,
                    maps=tuple(maps),
                    traces=tuple(traces),
                )
    except SearchTimeout:
        return Solution(status="timeout", min_cost=None, maps=(), traces=())

    return Solution(status="exhausted", min_cost=None, maps=(), traces=())
