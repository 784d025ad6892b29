import sys
import time

sys.path.insert(0, "src")

from atommap.molgraph import MoleculeGraph
from atommap.mapping import ReactionInstance, transition_state
from atommap.cyclesearch import SearchTimeout, SolveOptions, _search, solve

LABELS = ["C"] * 14 + ["O", "O", "C", "H"]

CHAIN = [
    (16, 1, 1),
    (0, 1, 1),
    (2, 3, 1),
    (3, 4, 1),
    (4, 5, 1),
    (6, 7, 1),
    (7, 8, 1),
    (8, 9, 1),
    (10, 11, 1),
    (11, 12, 1),
    (12, 13, 1),
    (13, 15, 1),
    (13, 14, 2),
]
EDUCT = CHAIN + [(1, 2, 2), (5, 6, 2), (9, 10, 2), (15, 17, 1)]
PRODUCT = CHAIN + [
    (1, 2, 1),
    (5, 6, 1),
    (9, 10, 1),
    (1, 6, 1),
    (5, 10, 1),
    (9, 15, 1),
    (2, 17, 1),
]


def graph(edges):
    emap = {(u, v): ("plain", w) for u, v, w in edges}
    return MoleculeGraph(LABELS, emap)


inst = ReactionInstance([graph(EDUCT)], [graph(PRODUCT)], identifier="stork")
print("n =", inst.n, flush=True)

for level in (2, 4, 6, 8):
    t0 = time.monotonic()
    try:
        cands = _search(inst, level, elementary=False,
                        deadline=time.monotonic() + 60.0)
        dt = time.monotonic() - t0
        print(f"level {level}: {len(cands)} candidates in {dt:.2f}s",
              flush=True)
    except SearchTimeout:
        dt = time.monotonic() - t0
        print(f"level {level}: TIMEOUT after {dt:.2f}s", flush=True)

t0 = time.monotonic()
sol = solve(inst, SolveOptions(max_cost=10, timeout_ms=120000))
dt = time.monotonic() - t0
print(f"solve: status={sol.status} min_cost={sol.min_cost} "
      f"classes={len(sol.maps)} in {dt:.2f}s", flush=True)

if sol.maps:
    ident = [m for m in sol.maps if m.psi == tuple(range(inst.n))]
    print("identity among maps:", bool(ident), flush=True)
    for m in sol.maps[:4]:
        ts = transition_state(inst, m.psi)
        print("  cost", m.cost, "connected", ts.is_connected(),
              "edges", dict(sorted(ts.edges.items())), flush=True)
