import random

from atommap.chemio import parse_smiles_subset
from atommap.molgraph import MoleculeGraph
from atommap.netcomp import (
    AtomHistogram,
    CandidatePair,
    dataset_stats,
    filter_by_ts_length,
    generate_2to2,
    histogram,
)


def edges(*items):
    out = {}
    for u, v, w in items:
        a, b = (u, v) if u <= v else (v, u)
        out[(a, b)] = ("plain", w)
    return out


# pyruvate histogram straight from SMILES
pyr = parse_smiles_subset("CC(=O)C(=O)[O-]")
h = histogram(pyr)
assert dict(h.elements) == {"C": 3, "H": 3, "O": 3}, h
assert h.charge == -1 and h.radicals == 0
assert h.formula() == "C3H3O3-1", h.formula()

water = parse_smiles_subset("O")
hw = histogram(water)
assert dict(hw.elements) == {"H": 2, "O": 1} and hw.charge == 0
assert hw.formula() == "H2O", hw.formula()

# additivity
assert (h + hw).elements == AtomHistogram(
    (("C", 3), ("H", 5), ("O", 4)), -1, 0).elements
print("histograms ok", flush=True)


def mol(syms):
    return MoleculeGraph(list(syms), {})


def naive_2to2(mols):
    hists = [histogram(g) for g in mols]
    n = len(mols)
    multis = [(i,) for i in range(n)]
    multis += [(i, j) for i in range(n) for j in range(i, n)]

    def hsum(ms):
        total = AtomHistogram()
        for i in ms:
            total = total + hists[i]
        return total

    out = set()
    for a in range(len(multis)):
        for b in range(a + 1, len(multis)):
            if multis[a] == multis[b]:
                continue
            if hsum(multis[a]) == hsum(multis[b]):
                left, right = sorted((multis[a], multis[b]))
                out.add((left, right))
    return out


rng = random.Random(7)
for trial in range(12):
    pool = []
    seen = set()
    for _ in range(rng.randrange(4, 31)):
        syms = tuple(sorted(
            rng.choice("CHON") for _ in range(rng.randrange(1, 6))))
        # keep the pool free of "isomorphic" duplicates (same formula is
        # fine, identical edgeless graphs are not)
        if syms in seen:
            continue
        seen.add(syms)
        pool.append(mol(syms))
    meter = {}
    got = generate_2to2(pool, meter=meter)
    want = naive_2to2(pool)
    gotset = {(c.left, c.right) for c in got}
    assert gotset == want, (trial, len(gotset), len(want))
    assert len(got) == len(gotset)
    # determinism
    again = generate_2to2(pool)
    assert got == again
    assert meter.get("comparisons", 0) > 0
print("naive oracle equivalence ok", flush=True)

# wait, edgeless graphs with equal formulas ARE isomorphic; the pool is
# only a histogram exercise here, the solver never sees it

# comparison meter growth
sizes = [10, 20, 40]
counts = []
for n in sizes:
    pool = [mol(tuple(rng.choice("CHONSP") for _ in range(rng.randrange(1, 7))))
            for _ in range(n)]
    meter = {}
    generate_2to2(pool, meter=meter)
    counts.append(meter["comparisons"])
print("comparisons on sizes", sizes, "->", counts, flush=True)

# spectator cancellation: A and B share a formula, C rides along
a = mol(("C", "C", "O"))
b = mol(("C", "O", "C"))
c = mol(("N",))
plain = generate_2to2([a, b, c])
plainset = {(x.left, x.right) for x in plain}
assert ((0,), (1,)) in plainset
assert ((0, 2), (1, 2)) in plainset
canceled = generate_2to2([a, b, c], cancel_spectators=True)
cancelset = {(x.left, x.right) for x in canceled}
assert ((0,), (1,)) in cancelset
assert ((0, 2), (1, 2)) not in cancelset
assert len(canceled) < len(plain)
print("cancellation ok", flush=True)

# transition-state filter on the Diels-Alder skeleton pool
buta = MoleculeGraph(["C", "C", "C", "C"], edges((0, 1, 2), (1, 2, 1), (2, 3, 2)))
ethe = MoleculeGraph(["C", "C"], edges((0, 1, 2)))
chex = MoleculeGraph(
    ["C", "C", "C", "C", "C", "C"],
    edges((0, 1, 1), (1, 2, 1), (2, 3, 2), (3, 4, 1), (4, 5, 1), (0, 5, 1)),
)
pool = [buta, ethe, chex]
cands = generate_2to2(pool)
assert {(c_.left, c_.right) for c_ in cands} == {
    ((0,), (1, 1)), ((0, 1), (2,)), ((0, 0), (1, 2))}, cands
da = next(c_ for c_ in cands if (c_.left, c_.right) == ((0, 1), (2,)))

rec4 = {r.candidate.left: r for r in filter_by_ts_length(pool, cands, 4)}
rec6 = {r.candidate.left: r for r in filter_by_ts_length(pool, cands, 6)}
assert rec4[(0, 1)].status == "fail"
assert rec6[(0, 1)].status == "pass" and rec6[(0, 1)].min_cost == 6
assert rec6[(0, 1)].classes == 1
assert rec6[(0,)].status == "fail"  # degree multisets differ, no map
assert rec6[(0, 0)].status == "fail"
passes = lambda recs: sum(1 for r in recs.values() if r.status == "pass")
assert passes(rec4) <= passes(rec6)
print("filter ok", flush=True)

# dataset stats with a planted isomer family
fam = [mol(("C", "C", "H")) for _ in range(5)]
rest = [mol(("O",)), mol(("N",)), mol(("O", "H"))]
mols = fam + rest
reactions = [((0, 5), (1, 6)), ((0,), (2,)), ((5,), (6,))]
rep = dataset_stats(mols, reactions)
assert dict(rep.isomer_sizes) == {5: 1, 1: 3}, rep.isomer_sizes
# molecule 0 in two reactions, 1/2/5/6 in some, rest in none
part = dict(rep.participation)
assert part[2] == 3, rep.participation  # molecules 0, 5, 6 in two reactions
assert part[1] == 2, rep.participation  # molecules 1, 2 in one
assert part[0] == 3, rep.participation  # molecules 3, 4, 7 in none
print("stats:", rep, flush=True)

print("NETCOMP SMOKE OK", flush=True)
