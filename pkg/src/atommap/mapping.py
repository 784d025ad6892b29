"""Core mapping semantics: reaction instances, map costs, transition states.

A reaction instance freezes both sides of a balanced reaction into two
molecule graphs over a shared vertex universe.  An atom map is a
label-preserving bijection between the sides; its cost counts the total
bond-order change it implies.  The transition state records the signed
changes, which always decompose into closed walks that alternate between
bond formation and bond cleavage.  That decomposition, together with the
equivalence notion for maps (overlay-graph isomorphism) and the
completion step for partial maps, is what the cycle search builds on.

A slow exhaustive minimizer lives at the bottom of the module.  It shares
nothing with the search except these definitions and serves as the
reference answer in tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import networkx as nx

from .molgraph import (
    AROMATIC,
    CHARGE,
    RADICAL,
    MoleculeGraph,
    disjoint_union,
    weighted_degree,
)

EPS = "eps"  # sentinel for "no edge on this side" in overlay labels


class BalanceError(ValueError):
    """The two sides cannot form a valid instance."""


def _effective_label(g: MoleculeGraph, v: int) -> str:
    # Aromatic hubs of different weighted degree are distinct for mapping
    # purposes: the zero-flux premise needs degree to follow the label.
    lbl = g.label(v)
    if lbl == AROMATIC:
        return f"{AROMATIC}#{weighted_degree(g, v)}"
    return lbl


def _pad_specials(
    g1: MoleculeGraph, g2: MoleculeGraph
) -> tuple[MoleculeGraph, MoleculeGraph, int, int]:
    """Append bookkeeping vertices so both sides expose the same specials.

    A side lacking a Charge (or Radical) vertex gets a bare one whenever
    the other side carries it.  Aromatic hubs are matched by weighted
    degree: a hub with no partner on the other side is mirrored there by
    an isolated hub holding a loop of half its degree, which is how a
    localized Kekule structure faces a delocalized one.

    Returns the padded graphs and the number of vertices added per side.
    """

    def aromatic_degrees(g: MoleculeGraph) -> list[int]:
        return sorted(
            weighted_degree(g, v) for v in range(g.n) if g.label(v) == AROMATIC
        )

    add1: list[tuple[str, int]] = []  # (label, loop_weight); loop 0 = none
    add2: list[tuple[str, int]] = []
    for special in (CHARGE, RADICAL):
        has1 = any(g1.label(v) == special for v in range(g1.n))
        has2 = any(g2.label(v) == special for v in range(g2.n))
        if has1 and not has2:
            add2.append((special, 0))
        elif has2 and not has1:
            add1.append((special, 0))

    d1 = aromatic_degrees(g1)
    d2 = aromatic_degrees(g2)
    if d1 != d2:
        rem1, rem2 = list(d1), list(d2)
        for d in list(rem1):
            if d in rem2:
                rem1.remove(d)
                rem2.remove(d)
        # rem1: hub degrees only side 1 has; mirror them on side 2.
        for d in rem1 + rem2:
            if d <= 0 or d % 2:
                raise BalanceError(
                    f"aromatic system of weighted degree {d} has no partner "
                    "and cannot be mirrored by a loop vertex"
                )
        add2.extend((AROMATIC, d // 2) for d in rem1)
        add1.extend((AROMATIC, d // 2) for d in rem2)

    def extend(g: MoleculeGraph, extra: list[tuple[str, int]]) -> MoleculeGraph:
        if not extra:
            return g
        labels = list(g.labels) + [lbl for lbl, _ in extra]
        edges = {(u, v): (el, w) for (u, v), (el, w) in g.edges.items()}
        for k, (_, loop) in enumerate(extra):
            if loop:
                v = g.n + k
                edges[(v, v)] = ("plain", loop)
        return MoleculeGraph(labels, edges)

    return extend(g1, add1), extend(g2, add2), len(add1), len(add2)


class ReactionInstance:
    """Both sides of a balanced reaction over a shared vertex index space.

    g1/g2 are the disjoint unions of the educt/product molecules, each
    expanded by its stoichiometric count and padded so special vertices
    pair up.  Construction fails unless the sides balance: equal size,
    equal label multisets, equal total charge and radical count, and a
    single weighted degree per label (the valence convention the cycle
    decomposition rests on).
    """

    __slots__ = (
        "g1",
        "g2",
        "provenance1",
        "provenance2",
        "elabels1",
        "elabels2",
        "identifier",
        "label_degree_uniform",
        "_classes",
    )

    def __init__(
        self,
        educts: Sequence[MoleculeGraph],
        products: Sequence[MoleculeGraph],
        identifier: str = "",
    ):
        if not educts or not products:
            raise BalanceError("need at least one molecule on each side")
        g1, prov1 = disjoint_union(educts)
        g2, prov2 = disjoint_union(products)
        g1, g2, pad1, pad2 = _pad_specials(g1, g2)

        self.g1 = g1
        self.g2 = g2
        self.identifier = identifier
        # vertex -> (molecule index, local vertex); padding has no origin
        self.provenance1 = self._provenance(g1, prov1, pad1)
        self.provenance2 = self._provenance(g2, prov2, pad2)
        self.elabels1 = tuple(_effective_label(g1, v) for v in range(g1.n))
        self.elabels2 = tuple(_effective_label(g2, v) for v in range(g2.n))
        self._validate()
        classes: dict[str, tuple[list[int], list[int]]] = {}
        for v, lbl in enumerate(self.elabels1):
            classes.setdefault(lbl, ([], []))[0].append(v)
        for v, lbl in enumerate(self.elabels2):
            classes.setdefault(lbl, ([], []))[1].append(v)
        self._classes = classes

    @staticmethod
    def _provenance(
        g: MoleculeGraph,
        prov: Mapping[tuple[int, int], int],
        padded: int,
    ) -> tuple[Optional[tuple[int, int]], ...]:
        table: list[Optional[tuple[int, int]]] = [None] * g.n
        for (mol, local), global_v in prov.items():
            table[global_v] = (mol, local)
        return tuple(table)

    @classmethod
    def from_document(cls, doc) -> "ReactionInstance":
        """Build from a parsed reaction document, expanding counts."""
        educts = [g for g, count in doc.educts for _ in range(count)]
        products = [g for g, count in doc.products for _ in range(count)]
        return cls(educts, products, identifier=doc.identifier)

    def _validate(self) -> None:
        if self.g1.n != self.g2.n:
            raise BalanceError(
                f"vertex counts differ: {self.g1.n} educt vs {self.g2.n} product"
            )
        m1 = sorted(self.elabels1)
        m2 = sorted(self.elabels2)
        if m1 != m2:
            diff = set(m1).symmetric_difference(m2) or {"multiplicities"}
            raise BalanceError(f"label multisets differ near {sorted(diff)}")
        for special in (CHARGE, RADICAL):
            t1 = sum(
                weighted_degree(self.g1, v)
                for v in range(self.g1.n)
                if self.g1.label(v) == special
            )
            t2 = sum(
                weighted_degree(self.g2, v)
                for v in range(self.g2.n)
                if self.g2.label(v) == special
            )
            if t1 != t2:
                kind = "charge" if special == CHARGE else "radical count"
                raise BalanceError(f"total {kind} differs: {t1} vs {t2}")
        # Under the valence convention every label has one weighted degree
        # and zero flux holds for every bijection.  Skeleton-style inputs
        # break that; maps the search produces still satisfy zero flux,
        # but bijections that pair unlike degrees exist and are never
        # generated.  The flag records which regime an instance is in.
        degree_of: dict[str, int] = {}
        uniform = True
        for g, elabels in ((self.g1, self.elabels1), (self.g2, self.elabels2)):
            for v in range(g.n):
                lbl = elabels[v]
                if lbl in (CHARGE, RADICAL):
                    continue  # their degree is the balanced total
                d = weighted_degree(g, v)
                if degree_of.setdefault(lbl, d) != d:
                    uniform = False
        self.label_degree_uniform = uniform

    @property
    def n(self) -> int:
        return self.g1.n

    def label_classes(self) -> Mapping[str, tuple[list[int], list[int]]]:
        """Effective label -> (educt vertices, product vertices)."""
        return self._classes

    def vertex_name(self, side: int, v: int) -> str:
        """Stable human-readable vertex name, e.g. 'e0:3' or 'p*:Charge'."""
        prefix = "e" if side == 1 else "p"
        prov = self.provenance1[v] if side == 1 else self.provenance2[v]
        g = self.g1 if side == 1 else self.g2
        if prov is None:
            return f"{prefix}*:{g.label(v)}"
        mol, local = prov
        return f"{prefix}{mol}:{local}"


@dataclass(frozen=True)
class AtomMap:
    """A label-preserving bijection educt->product with its cached cost."""

    psi: tuple[int, ...]
    cost: int

    @staticmethod
    def from_psi(inst: ReactionInstance, psi: Iterable[int]) -> "AtomMap":
        p = tuple(psi)
        _check_bijection(inst, p)
        return AtomMap(psi=p, cost=cost(inst, p))


def _check_bijection(inst: ReactionInstance, psi: Sequence[int]) -> None:
    if len(psi) != inst.n or sorted(psi) != list(range(inst.n)):
        raise ValueError("psi is not a bijection on the vertex range")
    for v, p in enumerate(psi):
        if inst.elabels1[v] != inst.elabels2[p]:
            raise ValueError(
                f"psi violates labels at {v}: "
                f"{inst.elabels1[v]} vs {inst.elabels2[p]}"
            )


def _change_items(inst: ReactionInstance, psi: Sequence[int]):
    """Yield ((u, v), delta) for every pair whose weight changes.

    Iterates the union of both edge supports; absent edges count as
    weight zero, so the full pair universe never needs materializing.
    """
    g1, g2 = inst.g1, inst.g2
    seen: set[tuple[int, int]] = set()
    for (u, v), (_, w1) in g1.edges.items():
        w2 = g2.weight(psi[u], psi[v])
        seen.add((u, v))
        if w1 != w2:
            yield (u, v), w2 - w1
    inv = [0] * inst.n
    for v, p in enumerate(psi):
        inv[p] = v
    for (a, b), (_, w2) in g2.edges.items():
        u, v = inv[a], inv[b]
        if u > v:
            u, v = v, u
        if (u, v) in seen:
            continue
        # no educt edge here, so the change is the full product weight
        yield (u, v), w2


def cost(inst: ReactionInstance, psi: Sequence[int]) -> int:
    """Total absolute bond-order change induced by psi."""
    _check_bijection(inst, psi)
    return sum(abs(d) for _, d in _change_items(inst, psi))


@dataclass(frozen=True)
class TransitionState:
    """Signed weight changes of a map: pair -> w2(psi(e)) - w1(e) != 0."""

    edges: Mapping[tuple[int, int], int]

    @property
    def vertices(self) -> tuple[int, ...]:
        vs: set[int] = set()
        for u, v in self.edges:
            vs.add(u)
            vs.add(v)
        return tuple(sorted(vs))

    @property
    def total_change(self) -> int:
        return sum(abs(d) for d in self.edges.values())

    def flux(self, v: int) -> int:
        # loops contribute twice, like any degree count here
        total = 0
        for (a, b), d in self.edges.items():
            if a == v:
                total += d
            if b == v:
                total += d
        return total

    def is_connected(self) -> bool:
        vs = self.vertices
        if not vs:
            return True
        adj: dict[int, list[int]] = {v: [] for v in vs}
        for a, b in self.edges:
            if a != b:
                adj[a].append(b)
                adj[b].append(a)
        stack = [vs[0]]
        seen = {vs[0]}
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(vs)


def transition_state(inst: ReactionInstance, psi: Sequence[int]) -> TransitionState:
    _check_bijection(inst, psi)
    return TransitionState(edges=dict(_change_items(inst, psi)))


@dataclass(frozen=True)
class CycleDecomposition:
    """Closed walks whose alternating +1/-1 edges sum back to the changes.

    Each walk is an even-length vertex tuple (v0, v1, ..., v_{2k-1});
    the edge (v_i, v_{i+1 mod 2k}) carries sign (-1)^i, so walks start
    with a formation step.  Walks may revisit vertices; splitting them
    any further is not always possible without breaking alternation.
    """

    cycles: tuple[tuple[int, ...], ...]

    def signed_edge_sums(self) -> dict[tuple[int, int], int]:
        sums: dict[tuple[int, int], int] = {}
        for walk in self.cycles:
            k = len(walk)
            for i in range(k):
                u, v = walk[i], walk[(i + 1) % k]
                if u > v:
                    u, v = v, u
                sums[(u, v)] = sums.get((u, v), 0) + (1 if i % 2 == 0 else -1)
        return {e: s for e, s in sums.items() if s != 0}


class FluxError(ValueError):
    """A vertex of the transition state has nonzero net change."""

    def __init__(self, vertex: int, flux: int):
        super().__init__(f"vertex {vertex} has net change {flux}, expected 0")
        self.vertex = vertex
        self.flux = flux


def _canonical_walk(walk: list[int]) -> tuple[int, ...]:
    """Pick the least presentation among rotations keeping alternation.

    Even rotations keep the +1 step first; reading the walk backwards
    from an odd position does too (the closing -1 step becomes the
    opening +1 step).  Taking the minimum over both families makes the
    decomposition independent of where the peel happened to start.
    """
    k = len(walk)
    best: Optional[tuple[int, ...]] = None
    for start in range(0, k, 2):
        cand = tuple(walk[(start + i) % k] for i in range(k))
        if best is None or cand < best:
            best = cand
    rev = walk[::-1]
    for start in range(0, k, 2):
        cand = tuple(rev[(start + i) % k] for i in range(k))
        if cand < best:
            best = cand
    assert best is not None
    return best


def _split_walk(walk: list[int]) -> list[list[int]]:
    """Split a closed alternating walk at revisits of even separation."""
    k = len(walk)
    pos: dict[int, int] = {}
    for i, v in enumerate(walk):
        j = pos.get(v)
        if j is not None and (i - j) % 2 == 0:
            inner = walk[j:i]
            if j % 2:
                # slice starts mid-alternation; rotate so the first
                # step is a formation again
                inner = inner[1:] + inner[:1]
            outer = walk[:j] + walk[i:]
            return _split_walk(inner) + _split_walk(outer)
        if j is None:
            pos[v] = i
    return [walk]


def decompose_cycles(ts: TransitionState) -> CycleDecomposition:
    """Peel the transition state into alternating closed walks.

    Constructive: take the least vertex with a positive residual edge,
    walk formation and cleavage steps in alternation (always through the
    least admissible neighbor), and close when the start vertex is hit
    after a cleavage step.  Zero flux at every vertex guarantees each
    step exists; total residual change strictly drops per walk.
    """
    residual = dict(ts.edges)
    for v in ts.vertices:
        f = ts.flux(v)
        if f != 0:
            raise FluxError(v, f)

    def admissible(v: int, sign: int) -> Optional[int]:
        best = None
        for (a, b), w in residual.items():
            if sign * w <= 0:
                continue
            if a == v:
                other = b
            elif b == v:
                other = a
            else:
                continue
            if best is None or other < best:
                best = other
        return best

    walks: list[list[int]] = []
    while residual:
        start = None
        for (a, b), w in residual.items():
            if w > 0:
                c = min(a, b)
                if start is None or c < start:
                    start = c
        if start is None:
            # only negative residuals with zero flux cannot happen
            e, w = next(iter(residual.items()))
            raise FluxError(e[0], w)
        walk = [start]
        sign = 1
        cur = start
        while True:
            nxt = admissible(cur, sign)
            if nxt is None:
                raise FluxError(cur, sign)
            key = (cur, nxt) if cur <= nxt else (nxt, cur)
            residual[key] -= sign
            if residual[key] == 0:
                del residual[key]
            cur = nxt
            if sign < 0 and cur == start:
                break
            walk.append(cur)
            sign = -sign
        walks.extend(_split_walk(walk))

    cycles = tuple(sorted(_canonical_walk(w) for w in walks))
    return CycleDecomposition(cycles=cycles)


def equivalence_graph(inst: ReactionInstance, psi: Sequence[int]) -> nx.Graph:
    """Overlay of both sides under psi, with paired weight labels.

    Nodes live on the educt index space.  A node records its label and
    the loop weights seen on each side; an edge exists wherever either
    side has one and records the weight pair, with a sentinel for the
    side missing it.  Two maps are interchangeable exactly when their
    overlays are isomorphic.
    """
    g1, g2 = inst.g1, inst.g2
    h = nx.Graph()
    for v in range(inst.n):
        l1 = g1.loop_weight(v)
        l2 = g2.loop_weight(psi[v])
        h.add_node(
            v,
            pl=(
                inst.elabels1[v],
                l1 if l1 else EPS,
                l2 if l2 else EPS,
            ),
        )
    for (u, v), d in _change_items(inst, psi):
        if u == v:
            continue
        w1 = g1.weight(u, v)
        w2 = g2.weight(psi[u], psi[v])
        h.add_edge(u, v, pw=(w1 if w1 else EPS, w2 if w2 else EPS))
    for (u, v), (_, w1) in g1.edges.items():
        if u != v and not h.has_edge(u, v):
            h.add_edge(u, v, pw=(w1, w1))
    return h


def _overlay_profile(h: nx.Graph) -> tuple:
    nodes = sorted(str(d["pl"]) for _, d in h.nodes(data=True))
    edges = sorted(str(d["pw"]) for _, _, d in h.edges(data=True))
    return tuple(nodes), tuple(edges)


def equivalent(
    inst: ReactionInstance, psi: Sequence[int], phi: Sequence[int]
) -> bool:
    """True when the two maps induce isomorphic overlay graphs."""
    if tuple(psi) == tuple(phi):
        return True
    ha = equivalence_graph(inst, psi)
    hb = equivalence_graph(inst, phi)
    if _overlay_profile(ha) != _overlay_profile(hb):
        return False
    matcher = nx.algorithms.isomorphism.GraphMatcher(
        ha,
        hb,
        node_match=lambda a, b: a["pl"] == b["pl"],
        edge_match=lambda a, b: a["pw"] == b["pw"],
    )
    return matcher.is_isomorphic()


def _residual_nx(
    g: MoleculeGraph,
    elabels: Sequence[str],
    skip: set[tuple[int, int]],
    loop_delta: Mapping[int, int],
    pins: Mapping[int, int],
) -> nx.Graph:
    h = nx.Graph()
    for v in range(g.n):
        loop = 0 if v in loop_delta else g.loop_weight(v)
        h.add_node(v, lbl=elabels[v], loop=loop, pin=pins.get(v, -1))
    for (u, v), (_, w) in g.edges.items():
        if u == v or (u, v) in skip:
            continue
        h.add_edge(u, v, w=w)
    return h


def complete_partial(
    inst: ReactionInstance,
    partial: Mapping[int, int],
    path_weights: Mapping[tuple[int, int], int],
    diagnostics: Optional[list[str]] = None,
) -> Optional[AtomMap]:
    """Extend a candidate reaction center to a full map, if one exists.

    The candidate maps the changed vertices and claims a signed change
    per touched pair.  Each claim is checked against the actual weight
    difference; the claimed pairs are then removed from both graphs,
    the mapped vertices pinned to their images, and the remainder handed
    to the isomorphism matcher.  Any completion found is as good as any
    other, so the first one is returned.
    """
    g1, g2 = inst.g1, inst.g2
    skip1: set[tuple[int, int]] = set()
    skip2: set[tuple[int, int]] = set()
    loops1: dict[int, int] = {}
    loops2: dict[int, int] = {}
    for (u, v), w_p in path_weights.items():
        if w_p == 0:
            continue
        if u not in partial or v not in partial:
            raise ValueError(f"changed pair ({u}, {v}) not fully mapped")
        pu, pv = partial[u], partial[v]
        actual = g2.weight(pu, pv) - g1.weight(u, v)
        if actual != w_p:
            if diagnostics is not None:
                diagnostics.append(
                    f"pair ({u}, {v}): accumulated change {w_p} "
                    f"but the graphs differ by {actual}"
                )
            return None
        if u == v:
            loops1[u] = w_p
            loops2[pu] = w_p
        else:
            skip1.add((u, v) if u <= v else (v, u))
            skip2.add((pu, pv) if pu <= pv else (pv, pu))

    pins1 = {u: k for k, u in enumerate(sorted(partial))}
    pins2 = {partial[u]: k for k, u in enumerate(sorted(partial))}
    h1 = _residual_nx(g1, inst.elabels1, skip1, loops1, pins1)
    h2 = _residual_nx(g2, inst.elabels2, skip2, loops2, pins2)

    matcher = nx.algorithms.isomorphism.GraphMatcher(
        h1,
        h2,
        node_match=lambda a, b: (
            a["lbl"] == b["lbl"] and a["loop"] == b["loop"] and a["pin"] == b["pin"]
        ),
        edge_match=lambda a, b: a["w"] == b["w"],
    )
    for iso in matcher.isomorphisms_iter():
        psi = tuple(iso[v] for v in range(inst.n))
        return AtomMap.from_psi(inst, psi)
    if diagnostics is not None:
        diagnostics.append("residual graphs are not isomorphic")
    return None


def brute_force_min_cost(
    inst: ReactionInstance, limit: int = 12
) -> tuple[Optional[int], list[AtomMap]]:
    """Exhaustive minimum over all label-preserving bijections.

    Walks the educt vertices in index order, trying every same-label
    image, accumulating the cost of pairs whose endpoints are both
    placed.  Branches strictly above the best known cost are cut, which
    never loses a tie.  Returns the minimum and one representative map
    per equivalence class; (None, []) when no bijection exists at all.
    """
    n = inst.n
    if n > limit:
        raise ValueError(f"instance has {n} vertices, oracle limit is {limit}")
    for lbl, (left, right) in inst.label_classes().items():
        if len(left) != len(right):
            return None, []

    g1, g2 = inst.g1, inst.g2
    psi = [-1] * n
    taken = [False] * n
    inv = [-1] * n
    best = [None]  # type: list[Optional[int]]
    found: list[tuple[int, tuple[int, ...]]] = []

    candidates = [
        sorted(inst.label_classes()[inst.elabels1[v]][1]) for v in range(n)
    ]

    def placed_cost(v: int, p: int) -> int:
        # new cost terms: pairs (u, v) with u already placed, plus the loop
        acc = 0
        seen: set[int] = set()
        for u, w1 in g1.neighbors(v).items():
            if u == v:
                continue
            if psi[u] >= 0:
                seen.add(u)
                acc += abs(g2.weight(psi[u], p) - w1)
        for q, w2 in g2.neighbors(p).items():
            if q == p:
                continue
            u = inv[q]
            if u >= 0 and u not in seen:
                acc += abs(w2 - g1.weight(u, v))
        acc += abs(g2.loop_weight(p) - g1.loop_weight(v))
        return acc

    def rec(v: int, acc: int) -> None:
        if v == n:
            if best[0] is None or acc < best[0]:
                best[0] = acc
                found[:] = [(acc, tuple(psi))]
            elif acc == best[0]:
                found.append((acc, tuple(psi)))
            return
        for p in candidates[v]:
            if taken[p]:
                continue
            step = placed_cost(v, p)
            if best[0] is not None and acc + step > best[0]:
                continue
            psi[v] = p
            taken[p] = True
            inv[p] = v
            rec(v + 1, acc + step)
            psi[v] = -1
            taken[p] = False
            inv[p] = -1

    rec(0, 0)
    if best[0] is None:
        return None, []

    min_cost = best[0]
    maps = [m for c, m in found if c == min_cost]
    if min_cost == 0:
        # all zero-cost maps overlay to the educt graph itself
        return 0, [AtomMap(psi=maps[0], cost=0)]

    # dedup: equal reaction center and placement there means equivalent
    by_center: dict[tuple, tuple[int, ...]] = {}
    for m in maps:
        ts = transition_state(inst, m)
        center = tuple(sorted(ts.edges.items()))
        placement = tuple((v, m[v]) for v in ts.vertices)
        by_center.setdefault((center, placement), m)

    reps: list[AtomMap] = []
    for m in by_center.values():
        am = AtomMap(psi=m, cost=min_cost)
        if not any(equivalent(inst, am.psi, r.psi) for r in reps):
            reps.append(am)
    return min_cost, reps
