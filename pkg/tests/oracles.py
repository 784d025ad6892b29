"""Reference instruments shared by the test suite.

Everything here is deliberately naive: independent enumerations and
generators that the package's fast paths are measured against.  Nothing
in src/ imports this module.
"""

from __future__ import annotations

import random
from collections import Counter
from typing import Optional

from atommap.mapping import ReactionInstance, brute_force_min_cost
from atommap.molgraph import MoleculeGraph
from atommap.netcomp import AtomHistogram

# bonding capacity and lone pairs per element, group-valence convention
VALENCE = {
    "H": (1, 0), "C": (4, 0), "N": (3, 1), "O": (2, 2),
    "P": (3, 1), "S": (2, 2), "F": (1, 3), "Cl": (1, 3),
}


def edges(*items):
    out = {}
    for u, v, w in items:
        a, b = (u, v) if u <= v else (v, u)
        out[(a, b)] = ("plain", w)
    return out


def random_symbols(rng: random.Random, max_atoms: int) -> list[str]:
    """Atom multiset with even stub parity and oracle-sized label classes."""
    while True:
        n_heavy = rng.randrange(1, 5)
        syms = [rng.choice("CCNO") for _ in range(n_heavy)]
        room = max_atoms - n_heavy
        capacity = sum(VALENCE[s][0] for s in syms)
        n_h = rng.randrange(0, min(room, capacity) + 1)
        syms += ["H"] * n_h
        if sum(VALENCE[s][0] for s in syms) % 2:
            if len(syms) >= max_atoms:
                continue
            syms.append("H")
        if max(Counter(syms).values()) > 6:
            continue  # keep the factorial oracle cheap
        return syms


def random_bonding(
    rng: random.Random, symbols: list[str], tries: int = 60
) -> Optional[MoleculeGraph]:
    """Random valence-saturated bonding via stub pairing, or None.

    Every atom ends with its full bond capacity used, so the weighted
    degree of each vertex is determined by its element.  The result may
    be disconnected; a side of a reaction is a union of molecules
    anyway.
    """
    for _ in range(tries):
        stubs = [i for i, s in enumerate(symbols)
                 for _ in range(VALENCE[s][0])]
        rng.shuffle(stubs)
        orders: dict[tuple[int, int], int] = {}
        ok = True
        for a, b in zip(stubs[::2], stubs[1::2]):
            if a == b:
                ok = False
                break
            e = (a, b) if a < b else (b, a)
            orders[e] = orders.get(e, 0) + 1
            if orders[e] > 3:
                ok = False
                break
        if not ok:
            continue
        emap = {e: ("plain", w) for e, w in orders.items()}
        for i, s in enumerate(symbols):
            lp = VALENCE[s][1]
            if lp:
                emap[(i, i)] = ("plain", lp)
        return MoleculeGraph(list(symbols), emap)
    return None


def random_swap(
    rng: random.Random, g: MoleculeGraph, tries: int = 40
) -> Optional[MoleculeGraph]:
    """One degree-preserving bond rewrite: -1 on two bonds, +1 crosswise."""
    bonds = [(e, w) for e, (_, w) in g.edges.items() if e[0] != e[1]]
    if len(bonds) < 2:
        return None

    def order(u, v):
        e = (u, v) if u < v else (v, u)
        lw = g.edges.get(e)
        return lw[1] if lw else 0

    for _ in range(tries):
        (a, b), _ = bonds[rng.randrange(len(bonds))]
        (c, d), _ = bonds[rng.randrange(len(bonds))]
        if len({a, b, c, d}) < 4:
            continue
        if rng.random() < 0.5:
            c, d = d, c
        if order(a, c) >= 3 or order(b, d) >= 3:
            continue
        new = {e: lw for e, lw in g.edges.items()}

        def bump(u, v, delta):
            e = (u, v) if u < v else (v, u)
            w = (new.get(e) or ("plain", 0))[1] + delta
            if w:
                new[e] = ("plain", w)
            else:
                new.pop(e, None)

        bump(a, b, -1)
        bump(c, d, -1)
        bump(a, c, 1)
        bump(b, d, 1)
        return MoleculeGraph(list(g.labels), new)
    return None


def random_instance(rng: random.Random, max_atoms: int = 10, cost_cap: int = 8):
    """One balanced valence-saturated instance with its oracle verdict.

    Returns (instance, oracle_min_cost, oracle_class_maps).  Products
    are either a few bond rewrites away from the educts or a fully
    independent rebonding; instances whose optimum exceeds cost_cap are
    redrawn so the deepening solver stays cheap.
    """
    while True:
        syms = random_symbols(rng, max_atoms)
        g1 = random_bonding(rng, syms)
        if g1 is None:
            continue
        if rng.random() < 0.6:
            g2: Optional[MoleculeGraph] = g1
            for _ in range(rng.randrange(1, 3)):
                g2 = random_swap(rng, g2)
                if g2 is None:
                    break
            if g2 is None:
                continue
        else:
            g2 = random_bonding(rng, syms)
            if g2 is None:
                continue
        inst = ReactionInstance([g1], [g2])
        min_cost, classes = brute_force_min_cost(inst)
        if min_cost > cost_cap:
            continue
        return inst, min_cost, classes


def make_corpus(seed: int, count: int, max_atoms: int = 10, cost_cap: int = 8):
    rng = random.Random(seed)
    return [random_instance(rng, max_atoms, cost_cap) for _ in range(count)]


def same_classes(inst, maps_a, maps_b) -> bool:
    """Bijective matching of two map lists up to overlay equivalence."""
    from atommap.mapping import equivalent

    if len(maps_a) != len(maps_b):
        return False
    used: set[int] = set()
    for a in maps_a:
        hit = next(
            (k for k, b in enumerate(maps_b)
             if k not in used and equivalent(inst, a.psi, b.psi)),
            None,
        )
        if hit is None:
            return False
        used.add(hit)
    return True


def naive_2to2(molecules) -> set:
    """O(n^4) candidate enumeration from the definition."""
    hists = [AtomHistogram.from_graph(g) for g in molecules]
    n = len(molecules)
    multis = [(i,) for i in range(n)]
    multis += [(i, j) for i in range(n) for j in range(i, n)]

    def hsum(ms):
        total = AtomHistogram()
        for i in ms:
            total = total + hists[i]
        return total

    sums = [hsum(ms) for ms in multis]
    out = set()
    for a in range(len(multis)):
        for b in range(a + 1, len(multis)):
            if sums[a] == sums[b]:
                out.add(tuple(sorted((multis[a], multis[b]))))
    return out


# --- fixed instances from the figures ---

def da_skeleton() -> ReactionInstance:
    """Hydrogen-stripped Diels-Alder: butadiene + ethene -> cyclohexene.

    The product is numbered so the published map is literally
    psi = (2, 3, 4, 5, 0, 1) on this encoding.
    """
    buta = MoleculeGraph(["C"] * 4, edges((0, 1, 2), (1, 2, 1), (2, 3, 2)))
    ethe = MoleculeGraph(["C"] * 2, edges((0, 1, 2)))
    chex = MoleculeGraph(
        ["C"] * 6,
        edges((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 2), (4, 5, 1), (0, 5, 1)),
    )
    return ReactionInstance([buta, ethe], [chex])


DA_FIGURE_PSI = (2, 3, 4, 5, 0, 1)


def da_document() -> str:
    return (
        '{"id": "diels-alder", '
        '"educts": [{"smiles": "C=CC=C"}, {"smiles": "C=C"}], '
        '"products": [{"smiles": "C1=CCCCC1"}]}'
    )


def stork_instance() -> ReactionInstance:
    """Stork enamine cyclisation, heavy atoms encoded from the figure.

    An enamine-like polyene chain closes two carbocycles while the
    terminal C=O opens to C-O(H): eight unit bond changes in one
    connected transition state.
    """
    labels = ["C"] * 14 + ["O", "O", "C", "H"]
    chain = [
        (16, 1, 1), (0, 1, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (6, 7, 1),
        (7, 8, 1), (8, 9, 1), (10, 11, 1), (11, 12, 1), (12, 13, 1),
        (13, 15, 1), (13, 14, 2),
    ]
    educt = chain + [(1, 2, 2), (5, 6, 2), (9, 10, 2), (15, 17, 1)]
    product = chain + [
        (1, 2, 1), (5, 6, 1), (9, 10, 1), (1, 6, 1), (5, 10, 1),
        (9, 15, 1), (2, 17, 1),
    ]

    def graph(es):
        return MoleculeGraph(labels, {(min(u, v), max(u, v)): ("plain", w)
                                      for u, v, w in es})

    return ReactionInstance([graph(educt)], [graph(product)])


STORK_TS = {
    (1, 2): -1, (1, 6): 1, (2, 17): 1, (5, 6): -1,
    (5, 10): 1, (9, 10): -1, (9, 15): 1, (15, 17): -1,
}
