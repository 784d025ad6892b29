"""Mass-balanced candidate reactions over a molecule pool.

A reaction that conserves atoms and charge pairs two multisets of
molecules with identical atom histograms.  With at most two molecules
per side, all balanced candidates fall out of one sorted pass over the
pairwise histogram sums, which is what generate_2to2 does.  The
transition-state filter then keeps the candidates that admit a short
chemically valid atom map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .cyclesearch import SolveOptions, solve
from .mapping import ReactionInstance
from .molgraph import MoleculeGraph


@dataclass(frozen=True)
class AtomHistogram:
    """Element counts plus total charge and radical electron count.

    elements is sorted by symbol, so equal content means equal value and
    the dataclass hash can serve as a grouping key directly.
    """

    elements: tuple[tuple[str, int], ...] = ()
    charge: int = 0
    radicals: int = 0

    @classmethod
    def from_graph(cls, g: MoleculeGraph) -> "AtomHistogram":
        counts: dict[str, int] = {}
        for v, lab in enumerate(g.labels):
            if not g.is_special(v):
                counts[lab] = counts.get(lab, 0) + 1
        charge = 0
        if g.charge_vertex is not None:
            charge = sum(g.neighbors(g.charge_vertex).values())
        radicals = 0
        if g.radical_vertex is not None:
            radicals = sum(g.neighbors(g.radical_vertex).values())
        return cls(tuple(sorted(counts.items())), charge, radicals)

    def __add__(self, other: "AtomHistogram") -> "AtomHistogram":
        counts = dict(self.elements)
        for sym, n in other.elements:
            counts[sym] = counts.get(sym, 0) + n
        return AtomHistogram(tuple(sorted(counts.items())),
                             self.charge + other.charge,
                             self.radicals + other.radicals)

    def key(self) -> tuple:
        """Total order: element items, then charge, then radicals."""
        return (self.elements, self.charge, self.radicals)

    def formula(self) -> str:
        """Compact text form, e.g. C3H3O3-1 for pyruvate."""
        syms = dict(self.elements)
        parts = []
        for sym in ("C", "H"):
            if sym in syms:
                n = syms.pop(sym)
                parts.append(sym if n == 1 else f"{sym}{n}")
        for sym in sorted(syms):
            n = syms[sym]
            parts.append(sym if n == 1 else f"{sym}{n}")
        base = "".join(parts) or "0"
        if self.charge:
            base += f"{'+' if self.charge > 0 else '-'}{abs(self.charge)}"
        if self.radicals:
            base += f"*{self.radicals}"
        return base


def histogram(g: MoleculeGraph) -> AtomHistogram:
    return AtomHistogram.from_graph(g)


@dataclass(frozen=True)
class CandidatePair:
    """Two distinct molecule multisets with the same atom histogram.

    Sides are sorted index tuples of length 1 or 2; the pair itself is
    oriented so left < right, making each candidate unique.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]
    histogram: AtomHistogram


class _CountedKey:
    """Sort key wrapper that counts order comparisons."""

    __slots__ = ("key", "box")

    def __init__(self, key, box):
        self.key = key
        self.box = box

    def __lt__(self, other):
        self.box[0] += 1
        return self.key < other.key


def generate_2to2(
    molecules: Sequence[MoleculeGraph],
    *,
    cancel_spectators: bool = False,
    meter: Optional[dict] = None,
) -> list[CandidatePair]:
    """All balanced candidates with at most two molecules per side.

    Builds every multiset of one or two pool indices (repeats allowed),
    sorts the multisets by histogram, and pairs up the members of each
    equal-histogram run.  The molecule list is expected to be free of
    isomorphic duplicates; nothing here checks that.

    With cancel_spectators, a molecule present on both sides is struck
    from both; candidates whose sides cancel away completely are
    dropped, and cancellation collapses some candidates onto others, so
    the output can shrink in both ways.

    When meter is given, meter["comparisons"] receives the number of
    order comparisons spent sorting, the dominant term of the
    generator's cost.
    """
    hists = [AtomHistogram.from_graph(g) for g in molecules]
    n = len(hists)

    entries: list[tuple[AtomHistogram, tuple[int, ...]]] = []
    for i in range(n):
        entries.append((hists[i], (i,)))
    for i in range(n):
        for j in range(i, n):
            entries.append((hists[i] + hists[j], (i, j)))

    box = [0]
    entries.sort(key=lambda e: _CountedKey((e[0].key(), e[1]), box))
    if meter is not None:
        meter["comparisons"] = box[0]

    out: list[CandidatePair] = []
    seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    start = 0
    while start < len(entries):
        stop = start + 1
        hist = entries[start][0]
        while stop < len(entries) and entries[stop][0] == hist:
            stop += 1
        run = [entries[t][1] for t in range(start, stop)]
        for a in range(len(run)):
            for b in range(a + 1, len(run)):
                left, right = run[a], run[b]
                if cancel_spectators:
                    left, right = _cancel(left, right)
                    if not left or not right:
                        continue
                    # cancellation can reproduce a pair from another run
                    if (left, right) in seen:
                        continue
                    seen.add((left, right))
                out.append(CandidatePair(left, right, hist))
        start = stop

    if cancel_spectators:
        # cancellation can move a candidate out of its run's histogram
        out = [
            CandidatePair(c.left, c.right, _multiset_hist(hists, c.left))
            for c in out
        ]
        out.sort(key=lambda c: (c.histogram.key(), c.left, c.right))
    return out


def _cancel(left: tuple[int, ...], right: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ls, rs = list(left), list(right)
    for x in list(ls):
        if x in rs:
            ls.remove(x)
            rs.remove(x)
    a, b = tuple(ls), tuple(rs)
    return (a, b) if a <= b else (b, a)


def _multiset_hist(hists: Sequence[AtomHistogram], ids: tuple[int, ...]) -> AtomHistogram:
    total = AtomHistogram()
    for i in ids:
        total = total + hists[i]
    return total


@dataclass(frozen=True)
class FilterRecord:
    candidate: CandidatePair
    status: str  # pass | fail | timeout
    min_cost: Optional[int]
    classes: int


def filter_by_ts_length(
    molecules: Sequence[MoleculeGraph],
    candidates: Iterable[CandidatePair],
    k_max: int,
    *,
    budget_ms: Optional[int] = None,
    connected_only: bool = False,
    elementary_only: bool = False,
) -> Iterator[FilterRecord]:
    """Keep candidates whose cheapest atom map costs at most k_max.

    Each candidate is solved independently under its own time budget,
    so one hard instance cannot stall the stream; a budget overrun is
    reported as its own status rather than as a failure.
    """
    if k_max < 0 or k_max % 2:
        raise ValueError(f"k_max must be even and nonnegative, got {k_max}")
    opts = SolveOptions(
        max_cost=k_max,
        connected_only=connected_only,
        elementary_only=elementary_only,
        timeout_ms=budget_ms,
    )
    for cand in candidates:
        inst = ReactionInstance(
            [molecules[i] for i in cand.left],
            [molecules[j] for j in cand.right],
        )
        sol = solve(inst, opts)
        status = {"found": "pass", "exhausted": "fail", "timeout": "timeout"}[sol.status]
        yield FilterRecord(
            candidate=cand,
            status=status,
            min_cost=sol.min_cost if sol.status == "found" else None,
            classes=len(sol.maps),
        )


@dataclass(frozen=True)
class StatsReport:
    """Isomer-set size distribution and participation frequencies.

    isomer_sizes: (size of an equal-formula group, number of groups).
    participation: (reactions a molecule appears in, number of such
    molecules).  Both sorted ascending by the first component.
    """

    isomer_sizes: tuple[tuple[int, int], ...]
    participation: tuple[tuple[int, int], ...]


def dataset_stats(
    molecules: Sequence[MoleculeGraph],
    reactions: Iterable[tuple[Sequence[int], Sequence[int]]] = (),
) -> StatsReport:
    """Appendix-style dataset summary.

    Isomer sets group molecules by full histogram (elements, charge,
    radicals).  Participation counts each molecule once per reaction it
    appears in, regardless of side or multiplicity; molecules in no
    reaction land in the zero bucket.
    """
    groups: dict[tuple, int] = {}
    for g in molecules:
        k = AtomHistogram.from_graph(g).key()
        groups[k] = groups.get(k, 0) + 1
    size_counts: dict[int, int] = {}
    for size in groups.values():
        size_counts[size] = size_counts.get(size, 0) + 1

    appearances = [0] * len(molecules)
    for educts, products in reactions:
        for i in set(educts) | set(products):
            appearances[i] += 1
    freq_counts: dict[int, int] = {}
    for c in appearances:
        freq_counts[c] = freq_counts.get(c, 0) + 1

    return StatsReport(
        isomer_sizes=tuple(sorted(size_counts.items())),
        participation=tuple(sorted(freq_counts.items())),
    )
