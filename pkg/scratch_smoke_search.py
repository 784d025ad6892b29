import time

from atommap.molgraph import MoleculeGraph
from atommap.mapping import (
    ReactionInstance,
    brute_force_min_cost,
    transition_state,
    decompose_cycles,
    equivalent,
    cost,
)
from atommap.cyclesearch import (
    SolveOptions,
    search_elementary,
    search_general,
    solve,
    weight_along_path,
)


def edges(*items):
    # items: (u, v, weight) bond or loop
    out = {}
    for u, v, w in items:
        a, b = (u, v) if u <= v else (v, u)
        out[(a, b)] = ("plain", w)
    return out


# --- H2 + O -> H2O ---
h2 = MoleculeGraph(["H", "H"], edges((0, 1, 1)))
o = MoleculeGraph(["O"], edges((0, 0, 3)))
h2o = MoleculeGraph(["H", "H", "O"], edges((0, 2, 1), (1, 2, 1), (2, 2, 2)))
inst = ReactionInstance([h2, o], [h2o])
t0 = time.perf_counter()
sol = solve(inst)
t1 = time.perf_counter()
print("H2+O->H2O:", sol.status, sol.min_cost, "classes:", len(sol.maps), f"{t1-t0:.3f}s")
assert sol.status == "found" and sol.min_cost == 4, sol
bmin, bmaps = brute_force_min_cost(inst)
print("  brute:", bmin, "classes:", len(bmaps))
assert bmin == 4 and len(bmaps) == len(sol.maps)
tr = sol.traces[0]
ts = transition_state(inst, sol.maps[0].psi)
print("  trace:", tr.paths)
print("  ts:", dict(ts.edges))
assert tr.edge_sums() == dict(ts.edges), (tr.edge_sums(), dict(ts.edges))
# weight_along_path consistency: rebuild vertex walks from trace
walks = []
for p in tr.paths:
    w = [p[0][0][0]]
    # reconstruct walk vertices from step edges
    cur = w[0]
    for (u, v), s in p:
        cur = v if u == cur else u
        w.append(cur)
    walks.append(w)
for e, wv in ts.edges.items():
    assert weight_along_path(e, walks) == wv, (e, wv, walks)
print("  walk replay ok:", walks)

# --- identity CH4 -> CH4 ---
ch4 = MoleculeGraph(["C", "H", "H", "H", "H"], edges((0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)))
inst0 = ReactionInstance([ch4], [ch4])
sol0 = solve(inst0)
print("CH4 identity:", sol0.status, sol0.min_cost, "classes:", len(sol0.maps))
assert sol0.min_cost == 0 and len(sol0.maps) == 1

# --- C2H6 -> C2H2 + 2 H2 (revisit case) ---
c2h6 = MoleculeGraph(
    ["C", "C", "H", "H", "H", "H", "H", "H"],
    edges((0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (1, 5, 1), (1, 6, 1), (1, 7, 1)),
)
c2h2 = MoleculeGraph(["C", "C", "H", "H"], edges((0, 1, 3), (0, 2, 1), (1, 3, 1)))
h2b = MoleculeGraph(["H", "H"], edges((0, 1, 1)))
inst8 = ReactionInstance([c2h6], [c2h2, h2b, h2b])
t0 = time.perf_counter()
sol8 = solve(inst8)
t1 = time.perf_counter()
print("C2H6->C2H2+2H2:", sol8.status, sol8.min_cost, "classes:", len(sol8.maps), f"{t1-t0:.3f}s")
assert sol8.min_cost == 8, sol8
t0 = time.perf_counter()
bmin8, bmaps8 = brute_force_min_cost(inst8)
t1 = time.perf_counter()
print("  brute:", bmin8, "classes:", len(bmaps8), f"{t1-t0:.3f}s")
assert bmin8 == 8 and len(bmaps8) == len(sol8.maps), (bmin8, len(bmaps8), len(sol8.maps))

# --- HCl + NH3 -> Cl- + NH4+ (charge case) ---
hcl = MoleculeGraph(["Cl", "H"], edges((0, 0, 3), (0, 1, 1)))
nh3 = MoleculeGraph(["N", "H", "H", "H"], edges((0, 0, 1), (0, 1, 1), (0, 2, 1), (0, 3, 1)))
clm = MoleculeGraph(["Cl", "Charge"], edges((0, 0, 4), (0, 1, -1)))
nh4p = MoleculeGraph(
    ["N", "H", "H", "H", "H", "Charge"],
    edges((0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (0, 5, 1)),
)
instq = ReactionInstance([hcl, nh3], [clm, nh4p])
t0 = time.perf_counter()
solq = solve(instq)
t1 = time.perf_counter()
print("HCl+NH3->Cl-+NH4+:", solq.status, solq.min_cost, "classes:", len(solq.maps), f"{t1-t0:.3f}s")
bminq, bmapsq = brute_force_min_cost(instq)
print("  brute:", bminq, "classes:", len(bmapsq))
assert solq.min_cost == bminq, (solq.min_cost, bminq)
assert len(solq.maps) == len(bmapsq)
print("  trace:", solq.traces[0].paths)

# --- Diels-Alder skeleton ---
buta = MoleculeGraph(["C", "C", "C", "C"], edges((0, 1, 2), (1, 2, 1), (2, 3, 2)))
ethe = MoleculeGraph(["C", "C"], edges((0, 1, 2)))
chex = MoleculeGraph(
    ["C", "C", "C", "C", "C", "C"],
    edges((0, 1, 2), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (5, 0, 1)),
)
instda = ReactionInstance([buta, ethe], [chex])
t0 = time.perf_counter()
solda = solve(instda)
t1 = time.perf_counter()
print("DA skeleton:", solda.status, solda.min_cost, "classes:", len(solda.maps), f"{t1-t0:.3f}s")
assert solda.min_cost == 6, solda
assert len(solda.maps) == 1, len(solda.maps)
fig_psi = (5, 0, 1, 2, 3, 4)
assert any(equivalent(instda, m.psi, fig_psi) for m in solda.maps)
tsda = transition_state(instda, solda.maps[0].psi)
cyc = decompose_cycles(tsda)
print("  cycles:", cyc.cycles)
assert len(cyc.cycles) == 1 and len(cyc.cycles[0]) == 6
# the elementary stream at k=6 contains a candidate completing to the figure map
found = False
for partial, trace in search_elementary(instda, 6):
    if all(fig_psi[i] == p for i, p in partial.items()):
        found = True
        break
print("  elementary contains figure candidate:", found)
assert found
# literal brute force admits cheaper flux-violating maps on this skeleton input
bminda, _ = brute_force_min_cost(instda)
print("  literal brute min (flux-violating allowed):", bminda)
assert bminda == 4

print("ALL SMOKE OK")
