import time

from atommap.molgraph import MoleculeGraph
from atommap.mapping import ReactionInstance, transition_state
from atommap.cyclesearch import SolveOptions, _search, solve

# vertex order: 0..13 = c0..c13, 14 = o14, 15 = o15, 16 = c18, 17 = h37
LABELS = ["C"] * 14 + ["O", "O", "C", "H"]

CHAIN = [
    (16, 1, 1),  # c18-c1
    (0, 1, 1),   # c0-c1
    (2, 3, 1),
    (3, 4, 1),
    (4, 5, 1),
    (6, 7, 1),
    (7, 8, 1),
    (8, 9, 1),
    (10, 11, 1),
    (11, 12, 1),
    (12, 13, 1),
    (13, 15, 1),  # c13-o15
    (13, 14, 2),  # c13=o14
]

EDUCT = CHAIN + [
    (1, 2, 2),   # c1=c2
    (5, 6, 2),   # c5=c6
    (9, 10, 2),  # c9=c10
    (15, 17, 1),  # o15-h37
]

PRODUCT = CHAIN + [
    (1, 2, 1),
    (5, 6, 1),
    (9, 10, 1),
    (1, 6, 1),   # formed
    (5, 10, 1),  # formed
    (9, 15, 1),  # formed
    (2, 17, 1),  # c2-h37 formed
]


def mk(edge_list):
    edges = {}
    for u, v, w in edge_list:
        a, b = (u, v) if u <= v else (v, u)
        edges[(a, b)] = ("plain", w)
    return MoleculeGraph(list(LABELS), edges)


educt = mk(EDUCT)
product = mk(PRODUCT)
inst = ReactionInstance([educt], [product])
print("n =", inst.n)

for level in (2, 4, 6):
    t0 = time.perf_counter()
    cands = _search(inst, level, elementary=False)
    t1 = time.perf_counter()
    print(f"level {level}: {len(cands)} candidates, {t1-t0:.2f}s")

t0 = time.perf_counter()
cands8 = _search(inst, 8, elementary=False)
t1 = time.perf_counter()
print(f"level 8: {len(cands8)} candidates, {t1-t0:.2f}s")

t0 = time.perf_counter()
sol = solve(inst)
t1 = time.perf_counter()
print("solve:", sol.status, sol.min_cost, "classes:", len(sol.maps), f"{t1-t0:.2f}s")
identity = tuple(range(inst.n))
if sol.maps:
    ts = transition_state(inst, sol.maps[0].psi)
    print("ts edges:", sorted(ts.edges.items()))
    print("connected:", ts.is_connected())
    print("identity among maps:", any(m.psi == identity for m in sol.maps))
