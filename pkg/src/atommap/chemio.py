"""Parsing and serialization of molecules and reaction documents.

Input molecules arrive either as a restricted SMILES dialect or as
explicit atom/bond lists in JSON.  Parsing derives everything the graph
model needs from chemically conventional notation: implicit hydrogens
become explicit H vertices, lone pairs become loops via the group-valence
electron rule, formal charges attach to a Charge vertex, and aromatic
rings become Aromatic vertices per complex.

The derivation rule is chosen so that for every atom the weighted degree
(loops twice, charge edges included) equals the element's group valence
electron count.  Weighted degree is then a pure function of the vertex
label, which is the premise for transition states of label-preserving
maps to decompose into alternating cycles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import jsonschema

from .molgraph import (
    AROMATIC,
    BOND_AROMATIC,
    BOND_PLAIN,
    CHARGE,
    ELEMENTS,
    RADICAL,
    MoleculeGraph,
)

# Electrons an unbonded neutral atom brings to the table.
GROUP_VALENCE = {
    "H": 1, "B": 3, "C": 4, "N": 5, "O": 6, "P": 5,
    "S": 6, "F": 7, "Cl": 7, "Br": 7, "I": 7,
}

# Standard bonding valences used for implicit hydrogen expansion.
STD_VALENCE = {
    "H": 1, "B": 3, "C": 4, "N": 3, "O": 2, "P": 3,
    "S": 2, "F": 1, "Cl": 1, "Br": 1, "I": 1,
}

# Pi electrons a ring atom contributes to its aromatic complex.
PI_CONTRIB = {"C": 1, "N": 1, "O": 2, "S": 2}

AROMATIC_SYMBOLS = {"c": "C", "n": "N", "o": "O", "s": "S"}
# Two-character organic-subset symbols must be matched first.
ORGANIC_SYMBOLS = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I", "H")


class SmilesError(ValueError):
    """Syntax or feature error in a SMILES string, with byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ValenceError(ValueError):
    """Electron bookkeeping failed for an atom."""

    def __init__(self, message: str, atom: int):
        super().__init__(f"{message} (atom {atom})")
        self.atom = atom


class DocumentError(ValueError):
    """Reaction document violates the schema or references bad data."""


@dataclass(frozen=True)
class ReactionDocument:
    """Educt and product molecule lists with multiplicities."""

    educts: tuple[tuple[MoleculeGraph, int], ...]
    products: tuple[tuple[MoleculeGraph, int], ...]
    identifier: Optional[str] = None


@dataclass
class _Atom:
    element: str
    charge: int = 0
    radicals: int = 0
    aromatic: bool = False
    expand_h: bool = False  # organic-subset SMILES atoms get implicit H
    lone_pairs: Optional[int] = None  # explicit override


def _implicit_hydrogens(atom: _Atom, bond_sum: int) -> int:
    if not atom.expand_h:
        return 0
    std = STD_VALENCE[atom.element]
    if atom.aromatic:
        bond_sum += PI_CONTRIB[atom.element]
    return max(0, std - bond_sum)


def _merge_components(n: int, links: list[tuple[int, int]]) -> dict[int, int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in links:
        parent[find(a)] = find(b)
    return {i: find(i) for i in range(n)}


def _assemble(atoms: list[_Atom], bonds: dict[tuple[int, int], tuple[str, int]],
              ring_complexes: Optional[list[list[int]]] = None) -> MoleculeGraph:
    """Common back end: expand H, derive loops and special vertices."""
    n_heavy = len(atoms)
    edges: dict[tuple[int, int], tuple[str, int]] = dict(bonds)

    bond_sum = [0] * n_heavy
    for (a, b), (_lab, w) in bonds.items():
        bond_sum[a] += w
        bond_sum[b] += w

    # aromatic complexes: explicit ring lists (merged when overlapping) or
    # connected components of aromatic-labeled bonds
    if ring_complexes is None:
        aro_bonds = [(a, b) for (a, b), (lab, _w) in bonds.items() if lab == BOND_AROMATIC]
        roots = _merge_components(n_heavy, aro_bonds)
        degree = [0] * n_heavy
        for a, b in aro_bonds:
            degree[a] += 1
            degree[b] += 1
        groups: dict[int, list[int]] = {}
        for i, atom in enumerate(atoms):
            if atom.aromatic:
                if degree[i] < 2:
                    raise ValenceError("aromatic atom must lie on a ring", i)
                groups.setdefault(roots[i], []).append(i)
        complexes = [sorted(v) for _k, v in sorted(groups.items())]
    else:
        links = [(ring[0], a) for ring in ring_complexes for a in ring[1:]]
        roots = _merge_components(n_heavy, links)
        groups = {}
        for ring in ring_complexes:
            for a in ring:
                members = groups.setdefault(roots[a], [])
                if a not in members:
                    members.append(a)
        complexes = [sorted(v) for _k, v in sorted(groups.items())]

    for ring in complexes:
        for a in ring:
            if atoms[a].element not in PI_CONTRIB:
                raise ValenceError(
                    f"no aromatic model for element {atoms[a].element}", a)

    # explicit hydrogens
    labels = [a.element for a in atoms]
    for i, atom in enumerate(atoms):
        if atom.element not in ELEMENTS:
            raise DocumentError(f"unknown element {atom.element!r}")
        for _ in range(_implicit_hydrogens(atom, bond_sum[i])):
            h_idx = len(labels)
            labels.append("H")
            edges[(i, h_idx)] = (BOND_PLAIN, 1)
            bond_sum[i] += 1

    # aromatic vertices and their pi edges
    aromatic_pi = [0] * n_heavy
    for ring in complexes:
        av = len(labels)
        labels.append(AROMATIC)
        for a in ring:
            pi = PI_CONTRIB[atoms[a].element]
            edges[(a, av)] = (BOND_PLAIN, pi)
            aromatic_pi[a] = pi

    # charge and radical vertices
    charged = [(i, a.charge) for i, a in enumerate(atoms) if a.charge]
    if charged:
        cv = len(labels)
        labels.append(CHARGE)
        for i, q in charged:
            edges[(i, cv)] = (BOND_PLAIN, q)
    radic = [(i, a.radicals) for i, a in enumerate(atoms) if a.radicals]
    if radic:
        rv = len(labels)
        labels.append(RADICAL)
        for i, r in radic:
            edges[(i, rv)] = (BOND_PLAIN, r)

    # lone pairs: remaining electrons must pair up
    for i, atom in enumerate(atoms):
        if atom.lone_pairs is not None:
            pairs = atom.lone_pairs
        else:
            gv = GROUP_VALENCE.get(atom.element)
            if gv is None:
                raise ValenceError(
                    f"cannot derive lone pairs for {atom.element}; give lonePairs explicitly", i)
            lone = gv - atom.charge - atom.radicals - bond_sum[i] - aromatic_pi[i]
            if lone < 0:
                raise ValenceError(
                    f"valence violation: {atom.element} overbonded by {-lone} electrons", i)
            if lone % 2:
                raise ValenceError(
                    f"valence violation: {atom.element} left with an unpaired electron "
                    "(declare radicals explicitly)", i)
            pairs = lone // 2
        if pairs:
            edges[(i, i)] = (BOND_PLAIN, pairs)

    return MoleculeGraph(labels, edges)


def parse_smiles_subset(text: str) -> MoleculeGraph:
    """Parse the documented SMILES subset into a MoleculeGraph.

    Supported: organic-subset atoms B C N O P S F Cl Br I H, bracket atoms
    with a charge such as ``[O-]`` or ``[N+2]``, bond symbols ``-`` ``=``
    ``#``, ring-closure digits, branches, and lowercase aromatic atoms
    c n o s.  Everything else is rejected with its byte offset.
    """
    atoms: list[_Atom] = []
    bonds: dict[tuple[int, int], tuple[str, int]] = {}
    ring_open: dict[str, tuple[int, Optional[int], int]] = {}
    stack: list[int] = []
    prev: Optional[int] = None
    pending: Optional[int] = None  # explicit bond order for next attachment
    pending_pos = 0

    def add_bond(a: int, b: int, order: Optional[int], pos: int) -> None:
        if a == b:
            raise SmilesError("bond joins an atom to itself", pos)
        key = (a, b) if a < b else (b, a)
        if key in bonds:
            raise SmilesError("duplicate bond", pos)
        if order is None:
            if atoms[a].aromatic and atoms[b].aromatic:
                bonds[key] = (BOND_AROMATIC, 1)
            else:
                bonds[key] = (BOND_PLAIN, 1)
        else:
            bonds[key] = (BOND_PLAIN, order)

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "-=#":
            if pending is not None:
                raise SmilesError("two bond symbols in a row", i)
            pending = {"-": 1, "=": 2, "#": 3}[ch]
            pending_pos = i
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise SmilesError("branch before any atom", i)
            if pending is not None:
                raise SmilesError("bond symbol before branch open", i)
            stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise SmilesError("unmatched branch close", i)
            if pending is not None:
                raise SmilesError("dangling bond symbol before branch close", i)
            prev = stack.pop()
            i += 1
            continue
        if ch.isdigit():
            if prev is None:
                raise SmilesError("ring closure before any atom", i)
            if ch in ring_open:
                a, o_order, o_pos = ring_open.pop(ch)
                order = pending if pending is not None else o_order
                if pending is not None and o_order is not None and pending != o_order:
                    raise SmilesError("ring bond order mismatch", i)
                if a == prev:
                    raise SmilesError("ring closure to the same atom", i)
                add_bond(a, prev, order, i)
            else:
                ring_open[ch] = (prev, pending, i)
            pending = None
            i += 1
            continue
        if ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise SmilesError("unterminated bracket atom", i)
            body = text[i + 1:j]
            k = 0
            if k < len(body) and body[k].isdigit():
                raise SmilesError("isotopes are not supported", i + 1)
            sym = ""
            if k < len(body) and body[k].isupper():
                sym = body[k]
                k += 1
                if k < len(body) and body[k].islower() and sym + body[k] in GROUP_VALENCE:
                    sym += body[k]
                    k += 1
            if sym not in GROUP_VALENCE:
                raise SmilesError(f"unsupported bracket element {body!r}", i + 1)
            charge = 0
            if k < len(body) and body[k] in "+-":
                sign = 1 if body[k] == "+" else -1
                k += 1
                mag = 1
                if k < len(body) and body[k].isdigit():
                    mag = int(body[k])
                    k += 1
                charge = sign * mag
            if k != len(body):
                raise SmilesError(f"unsupported bracket content {body!r}", i + 1 + k)
            idx = len(atoms)
            atoms.append(_Atom(sym, charge=charge))
            if prev is not None:
                add_bond(prev, idx, pending, pending_pos if pending is not None else i)
            pending = None
            prev = idx
            i = j + 1
            continue
        if ch in AROMATIC_SYMBOLS:
            idx = len(atoms)
            atoms.append(_Atom(AROMATIC_SYMBOLS[ch], aromatic=True, expand_h=True))
            if prev is not None:
                add_bond(prev, idx, pending, pending_pos if pending is not None else i)
            pending = None
            prev = idx
            i += 1
            continue
        matched = None
        for sym in ORGANIC_SYMBOLS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched is not None:
            idx = len(atoms)
            atoms.append(_Atom(matched, expand_h=True))
            if prev is not None:
                add_bond(prev, idx, pending, pending_pos if pending is not None else i)
            pending = None
            prev = idx
            i += len(matched)
            continue
        if ch in "/\\@*%.":
            raise SmilesError(f"unsupported SMILES feature {ch!r}", i)
        raise SmilesError(f"unexpected character {ch!r}", i)

    if pending is not None:
        raise SmilesError("dangling bond symbol", pending_pos)
    if stack:
        raise SmilesError("unclosed branch", n)
    if ring_open:
        digit, (_a, _o, pos) = sorted(ring_open.items())[0]
        raise SmilesError(f"unclosed ring bond {digit}", pos)
    if not atoms:
        raise SmilesError("empty SMILES", 0)
    return _assemble(atoms, bonds)


def _molspec_to_graph(spec: dict) -> MoleculeGraph:
    if "smiles" in spec:
        return parse_smiles_subset(spec["smiles"])
    # explicit atom lists are complete: no implicit hydrogens; lonePairs,
    # when present, override the group-valence derivation
    atoms = [
        _Atom(
            a["element"],
            charge=a.get("charge", 0),
            radicals=a.get("radicals", 0),
            lone_pairs=a.get("lonePairs"),
        )
        for a in spec["atoms"]
    ]
    bonds: dict[tuple[int, int], tuple[str, int]] = {}
    for b in spec.get("bonds", []):
        u, v, order = b["a"], b["b"], b["order"]
        if not (0 <= u < len(atoms) and 0 <= v < len(atoms)):
            raise DocumentError(f"bond {b} references a missing atom")
        if u == v:
            raise DocumentError("bonds must join distinct atoms")
        key = (u, v) if u < v else (v, u)
        if key in bonds:
            raise DocumentError(f"duplicate bond {key}")
        if b.get("aromatic", False):
            if order != 1:
                raise DocumentError("aromatic ring bonds must have order 1")
            bonds[key] = (BOND_AROMATIC, 1)
        else:
            bonds[key] = (BOND_PLAIN, order)
    rings = spec.get("aromaticRings")
    if rings is not None:
        for ring in rings:
            if len(ring) < 3:
                raise DocumentError("aromatic rings need at least 3 atoms")
            for a in ring:
                if not (0 <= a < len(atoms)):
                    raise DocumentError("aromaticRings references a missing atom")
    elif any(lab == BOND_AROMATIC for lab, _w in bonds.values()):
        raise DocumentError("aromatic bonds require an aromaticRings list")
    return _assemble(atoms, bonds, ring_complexes=rings)


_SCHEMA_CACHE: dict[str, dict] = {}


def load_schema(name: str) -> dict:
    """Load a shipped JSON schema by file name (cached)."""
    if name not in _SCHEMA_CACHE:
        with resources.files("atommap.schemas").joinpath(name).open("r") as fh:
            _SCHEMA_CACHE[name] = json.load(fh)
    return _SCHEMA_CACHE[name]


def parse_reaction_json(text: str) -> ReactionDocument:
    """Parse a reaction document; schema violations raise DocumentError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, load_schema("reaction.schema.json"))
    except jsonschema.ValidationError as exc:
        raise DocumentError(f"schema violation: {exc.message}") from exc
    educts = tuple(
        (_molspec_to_graph(m), m.get("count", 1)) for m in data["educts"]
    )
    products = tuple(
        (_molspec_to_graph(m), m.get("count", 1)) for m in data["products"]
    )
    return ReactionDocument(educts, products, data.get("id"))


def parse_molecules_json(text: str) -> list[MoleculeGraph]:
    """Parse a molecule-pool file: {"molecules": [MolSpec, ...]}."""
    return parse_molecule_pool(text)[0]


def parse_molecule_pool(
    text: str,
) -> tuple[list[MoleculeGraph], list[tuple[tuple[int, ...], tuple[int, ...]]]]:
    """Molecule pool plus its optional reaction index pairs.

    Reactions reference molecules by pool index; out-of-range indices
    are a document error even though the schema cannot express that.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, load_schema("molecules.schema.json"))
    except jsonschema.ValidationError as exc:
        raise DocumentError(f"schema violation: {exc.message}") from exc
    molecules = [_molspec_to_graph(m) for m in data["molecules"]]
    reactions: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    for r in data.get("reactions", []):
        ids = tuple(r["educts"]) + tuple(r["products"])
        bad = [i for i in ids if i >= len(molecules)]
        if bad:
            raise DocumentError(f"reaction references missing molecule {bad[0]}")
        reactions.append((tuple(r["educts"]), tuple(r["products"])))
    return molecules, reactions


def molecule_to_molspec(g: MoleculeGraph) -> dict:
    """Explicit atom/bond MolSpec for a molecule graph."""
    atom_idx: dict[int, int] = {}
    atoms: list[dict] = []
    charge_of: dict[int, int] = {}
    radicals_of: dict[int, int] = {}
    if g.charge_vertex is not None:
        for u, w in g.neighbors(g.charge_vertex).items():
            charge_of[u] = w
    if g.radical_vertex is not None:
        for u, w in g.neighbors(g.radical_vertex).items():
            radicals_of[u] = w
    for v, lab in enumerate(g.labels):
        if g.is_special(v):
            continue
        atom_idx[v] = len(atoms)
        entry: dict = {"element": lab, "lonePairs": g.loop_weight(v)}
        if charge_of.get(v):
            entry["charge"] = charge_of[v]
        if radicals_of.get(v):
            entry["radicals"] = radicals_of[v]
        atoms.append(entry)
    bonds = []
    for (u, v), (lab, w) in sorted(g.edges.items()):
        if u == v or g.is_special(u) or g.is_special(v):
            continue
        entry = {"a": atom_idx[u], "b": atom_idx[v], "order": w}
        if lab == BOND_AROMATIC:
            entry["aromatic"] = True
        bonds.append(entry)
    spec: dict = {"atoms": atoms, "bonds": bonds}
    rings = []
    for av in g.aromatic_vertices:
        members = sorted(atom_idx[u] for u in g.neighbors(av) if u != av)
        if g.loop_weight(av):
            raise ValueError("aromatic padding vertices are not serializable")
        rings.append(members)
    if rings:
        spec["aromaticRings"] = rings
    return spec


def serialize_reaction(doc: ReactionDocument) -> str:
    """Canonical JSON; re-parsing yields per-molecule isomorphic graphs."""
    def side(mols: tuple[tuple[MoleculeGraph, int], ...]) -> list[dict]:
        out = []
        for g, count in mols:
            spec = molecule_to_molspec(g)
            if count != 1:
                spec["count"] = count
            out.append(spec)
        return out

    data: dict = {"educts": side(doc.educts), "products": side(doc.products)}
    if doc.identifier is not None:
        data["id"] = doc.identifier
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def side_histogram(mols: tuple[tuple[MoleculeGraph, int], ...]) -> tuple[dict[str, int], int]:
    """Atom-label multiset (with multiplicity) and total charge of one side."""
    counts: dict[str, int] = {}
    charge = 0
    for g, mult in mols:
        for v, lab in enumerate(g.labels):
            if not g.is_special(v):
                counts[lab] = counts.get(lab, 0) + mult
        if g.charge_vertex is not None:
            charge += mult * sum(g.neighbors(g.charge_vertex).values())
    return counts, charge


def is_balanced(doc: ReactionDocument) -> bool:
    """Equal non-special label multisets and equal total charge."""
    return side_histogram(doc.educts) == side_histogram(doc.products)
