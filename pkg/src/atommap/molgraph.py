"""Molecule graphs: labeled, edge-weighted undirected graphs with loops.

Vertices are atoms plus up to three kinds of special vertices:

- one ``Charge`` vertex whose incident edge weights are the formal charges
  of the atoms they touch (negative weights allowed),
- one ``Radical`` vertex whose edge weights count unpaired electrons,
- any number of ``Aromatic`` vertices, one per aromatic complex, whose
  edge weights are the pi electrons each ring atom contributes.

Plain bonds carry weight 1..3, lone pairs are loops on the owning atom,
and aromatic ring bonds carry weight 1 under a distinct edge label.  With
loops counted twice, the weighted degree of an atom equals its group
valence electron count, which is what makes transition states of
label-preserving maps decompose into alternating cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

CHARGE = "Charge"
RADICAL = "Radical"
AROMATIC = "Aromatic"
SPECIAL_LABELS = frozenset({CHARGE, RADICAL, AROMATIC})

BOND_PLAIN = "plain"
BOND_AROMATIC = "aromatic"

# Canonical element symbols. Special labels are reserved and disjoint.
ELEMENTS = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni "
    "Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I "
    "Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt "
    "Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu".split()
)


class MoleculeGraphError(ValueError):
    """Raised when a graph violates the molecule-graph invariants."""


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class MoleculeGraph:
    """Immutable molecule graph.

    Parameters
    ----------
    labels:
        Vertex labels by dense 0-based index: canonical element symbols or
        one of the reserved special labels.
    edges:
        Map from unordered vertex pair to ``(edge label, weight)``. Loops
        are keyed ``(v, v)``. Pairs are normalized to ``u <= v``.
    """

    labels: tuple[str, ...]
    edges: Mapping[tuple[int, int], tuple[str, int]]
    charge_vertex: Optional[int] = field(init=False, default=None)
    radical_vertex: Optional[int] = field(init=False, default=None)
    aromatic_vertices: tuple[int, ...] = field(init=False, default=())

    def __init__(self, labels: Iterable[str], edges: Mapping[tuple[int, int], tuple[str, int]]):
        object.__setattr__(self, "labels", tuple(labels))
        norm: dict[tuple[int, int], tuple[str, int]] = {}
        for (u, v), (lab, w) in edges.items():
            key = _norm_edge(u, v)
            if key in norm and norm[key] != (lab, int(w)):
                raise MoleculeGraphError(f"conflicting duplicate edge {key}")
            norm[key] = (lab, int(w))
        object.__setattr__(self, "edges", MappingProxyType(norm))
        self._validate()
        adj: list[dict[int, int]] = [dict() for _ in self.labels]
        for (u, v), (_lab, w) in norm.items():
            adj[u][v] = w
            adj[v][u] = w
        object.__setattr__(self, "_adj", tuple(MappingProxyType(d) for d in adj))

    def _validate(self) -> None:
        n = len(self.labels)
        charge = radical = None
        aromatics = []
        for i, lab in enumerate(self.labels):
            if lab == CHARGE:
                if charge is not None:
                    raise MoleculeGraphError("more than one Charge vertex")
                charge = i
            elif lab == RADICAL:
                if radical is not None:
                    raise MoleculeGraphError("more than one Radical vertex")
                radical = i
            elif lab == AROMATIC:
                aromatics.append(i)
            elif lab not in ELEMENTS:
                raise MoleculeGraphError(f"unknown vertex label {lab!r} at index {i}")
        object.__setattr__(self, "charge_vertex", charge)
        object.__setattr__(self, "radical_vertex", radical)
        object.__setattr__(self, "aromatic_vertices", tuple(aromatics))

        for (u, v), (lab, w) in self.edges.items():
            if not (0 <= u < n and 0 <= v < n):
                raise MoleculeGraphError(f"edge {(u, v)} out of range")
            if lab not in (BOND_PLAIN, BOND_AROMATIC):
                raise MoleculeGraphError(f"unknown edge label {lab!r} on {(u, v)}")
            lu, lv = self.labels[u], self.labels[v]
            u_special = lu in SPECIAL_LABELS
            v_special = lv in SPECIAL_LABELS
            if u == v:
                # loop = lone pairs on an atom, or the padding loop that
                # carries an aromatic complex's pi electrons
                if u_special and lu != AROMATIC:
                    raise MoleculeGraphError(f"loop on special vertex {u} ({lu})")
                if w < 1:
                    raise MoleculeGraphError(f"loop weight {w} < 1 at vertex {u}")
                continue
            if u_special and v_special:
                raise MoleculeGraphError(f"edge {(u, v)} joins two special vertices")
            if lu == CHARGE or lv == CHARGE:
                if w == 0:
                    raise MoleculeGraphError(f"zero-weight charge edge {(u, v)}")
            elif lu == RADICAL or lv == RADICAL:
                if w < 1:
                    raise MoleculeGraphError(f"radical edge {(u, v)} weight {w} < 1")
            elif lu == AROMATIC or lv == AROMATIC:
                if w < 1:
                    raise MoleculeGraphError(f"aromatic edge {(u, v)} weight {w} < 1")
            else:
                bond_range = (1,) if lab == BOND_AROMATIC else (1, 2, 3)
                if w not in bond_range:
                    raise MoleculeGraphError(f"bond {(u, v)} weight {w} outside {bond_range}")

    # -- basic accessors ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def label(self, v: int) -> str:
        return self.labels[v]

    def is_special(self, v: int) -> bool:
        return self.labels[v] in SPECIAL_LABELS

    def weight(self, u: int, v: int) -> int:
        """Weight over the full edge universe: 0 for absent pairs."""
        ent = self.edges.get(_norm_edge(u, v))
        return ent[1] if ent is not None else 0

    def edge_label(self, u: int, v: int) -> Optional[str]:
        ent = self.edges.get(_norm_edge(u, v))
        return ent[0] if ent is not None else None

    def neighbors(self, v: int) -> Mapping[int, int]:
        """Adjacent vertex -> weight map; contains ``v`` itself when a loop exists."""
        return self._adj[v]

    def loop_weight(self, v: int) -> int:
        return self._adj[v].get(v, 0)


def weighted_degree(g: MoleculeGraph, v: int) -> int:
    """Sum of incident edge weights with loops counted twice.

    For an atom built by the group-valence convention this equals the
    element's valence electron count, independent of its bonding pattern.
    """
    if not (0 <= v < g.n):
        raise IndexError(f"vertex index {v} out of range for graph of size {g.n}")
    total = 0
    for u, w in g.neighbors(v).items():
        total += 2 * w if u == v else w
    return total


def disjoint_union(gs: Iterable[MoleculeGraph]) -> tuple[MoleculeGraph, dict[tuple[int, int], int]]:
    """Disjoint union with Charge and Radical vertices merged across inputs.

    Returns the union graph and a provenance map from
    ``(input index, local vertex)`` to the global vertex index.  Aromatic
    vertices are kept separate (one per complex); the single merged Charge
    vertex collects every charge edge, likewise Radical.
    """
    gs = list(gs)
    if not gs:
        raise ValueError("disjoint_union of an empty list")
    labels: list[str] = []
    edges: dict[tuple[int, int], tuple[str, int]] = {}
    prov: dict[tuple[int, int], int] = {}
    charge_at: Optional[int] = None
    radical_at: Optional[int] = None
    for gi, g in enumerate(gs):
        local: dict[int, int] = {}
        for v, lab in enumerate(g.labels):
            if lab == CHARGE and charge_at is not None:
                local[v] = charge_at
            elif lab == RADICAL and radical_at is not None:
                local[v] = radical_at
            else:
                local[v] = len(labels)
                labels.append(lab)
                if lab == CHARGE:
                    charge_at = local[v]
                elif lab == RADICAL:
                    radical_at = local[v]
            prov[(gi, v)] = local[v]
        for (u, v), (lab, w) in g.edges.items():
            edges[_norm_edge(local[u], local[v])] = (lab, w)
    return MoleculeGraph(labels, edges), prov


def to_networkx(g: MoleculeGraph) -> nx.Graph:
    """Translate to networkx for isomorphism work.

    Loops become vertex attributes (``loop`` weight) rather than self
    edges: the VF2 matcher in networkx does not compare self-loop edge
    data, and a per-vertex attribute is an exact encoding because each
    vertex has at most one loop.
    """
    h = nx.Graph()
    for v, lab in enumerate(g.labels):
        h.add_node(v, label=lab, loop=g.loop_weight(v))
    for (u, v), (lab, w) in g.edges.items():
        if u != v:
            h.add_edge(u, v, label=lab, weight=w)
    return h


def _node_match(a: dict, b: dict) -> bool:
    return a["label"] == b["label"] and a["loop"] == b["loop"]


def _edge_match(a: dict, b: dict) -> bool:
    return a["label"] == b["label"] and a["weight"] == b["weight"]


def are_isomorphic(g1: MoleculeGraph, g2: MoleculeGraph) -> Optional[dict[int, int]]:
    """Label-, edge-label- and weight-preserving isomorphism, or None.

    Returns one bijection as a dict from ``g1`` indices to ``g2`` indices.
    """
    if g1.n != g2.n:
        return None
    if sorted(g1.labels) != sorted(g2.labels):
        return None
    m = GraphMatcher(to_networkx(g1), to_networkx(g2), node_match=_node_match, edge_match=_edge_match)
    if m.is_isomorphic():
        return dict(m.mapping)
    return None
