"""End-to-end acceptance gates.

One test per criterion (criterion 4 and 7 split into named parts); the
terminal summary prints a PASS/FAIL line for each, wired up in conftest.
"""

import math
import random
import time

import pytest

from atommap.cyclesearch import SolveOptions, solve
from atommap.ilp import build_ilp2, build_ilp4, enumerate_optima, solve_exact
from atommap.mapping import (
    ReactionInstance,
    decompose_cycles,
    equivalent,
    transition_state,
)
from atommap.molgraph import MoleculeGraph
from atommap.netcomp import AtomHistogram, filter_by_ts_length, generate_2to2

import oracles
from oracles import DA_FIGURE_PSI, STORK_TS, da_skeleton, edges, stork_instance


@pytest.fixture(scope="session")
def small_results(corpus_small):
    """Every solver's verdict on each small instance, computed once."""
    out = []
    for inst, mc, omaps in corpus_small:
        alt = solve(inst, SolveOptions(max_cost=8))
        model2 = build_ilp2(inst)
        s2 = solve_exact(model2)
        s4 = solve_exact(build_ilp4(inst))
        e2 = enumerate_optima(inst, model2)
        out.append((inst, mc, omaps, alt, s2, s4, e2))
    return out


def test_criterion_1_matches_oracle(corpus_solved):
    assert len(corpus_solved) >= 500
    for inst, mc, omaps, sol in corpus_solved:
        assert sol.status == "found"
        assert sol.min_cost == mc
        assert oracles.same_classes(inst, sol.maps, omaps)


def test_criterion_2_solvers_agree(small_results):
    assert len(small_results) >= 100
    for inst, mc, omaps, alt, s2, s4, e2 in small_results:
        assert alt.status == "found" and alt.min_cost == mc
        # on fully hydrogenated inputs every bijection conserves
        # electrons vertexwise, so the balance rows add no padding
        assert s2.status == "optimal" and s2.objective == 2 * mc
        assert s4.status == "optimal" and s4.objective == mc
        assert e2.status == "complete" and e2.objective == 2 * mc
        assert oracles.same_classes(inst, e2.maps, alt.maps)
    # the quadruple model enumerates the same classes (slower, sampled)
    for inst, mc, omaps, alt, s2, s4, e2 in small_results[::6]:
        e4 = enumerate_optima(inst, build_ilp4(inst))
        assert e4.objective == mc
        assert oracles.same_classes(inst, e4.maps, alt.maps)


def _check_map_properties(inst, psi):
    ts = transition_state(inst, psi)
    for v in ts.vertices:
        assert ts.flux(v) == 0
    degree: dict[int, int] = {}
    for (u, v), d in ts.edges.items():
        degree[u] = degree.get(u, 0) + abs(d)
        degree[v] = degree.get(v, 0) + abs(d)  # loops land twice, as required
    assert all(dv % 2 == 0 for dv in degree.values())
    dec = decompose_cycles(ts)
    assert dec.signed_edge_sums() == dict(ts.edges)
    for walk in dec.cycles:
        assert len(walk) % 2 == 0  # alternation must close


def test_criterion_3_cycle_structure(corpus_solved, small_results):
    checked = 0
    for inst, _, _, sol in corpus_solved:
        for am in sol.maps:
            _check_map_properties(inst, am.psi)
            checked += 1
    for inst, _, _, alt, _, _, e2 in small_results:
        for am in e2.maps:
            _check_map_properties(inst, am.psi)
            checked += 1
    assert checked >= 500


def test_criterion_4a_diels_alder():
    inst = da_skeleton()
    sol = solve(inst)
    assert sol.status == "found"
    assert sol.min_cost == 6
    assert len(sol.maps) == 1
    assert equivalent(inst, sol.maps[0].psi, DA_FIGURE_PSI)

    ts = transition_state(inst, sol.maps[0].psi)
    dec = decompose_cycles(ts)
    assert len(dec.cycles) == 1
    assert len(dec.cycles[0]) == 6
    assert set(dec.cycles[0]) == set(range(6))

    # the same class is already reachable as one simple alternating cycle
    strict = solve(inst, SolveOptions(elementary_only=True))
    assert strict.min_cost == 6
    assert oracles.same_classes(inst, strict.maps, sol.maps)


def test_criterion_4b_stork_cyclisation():
    inst = stork_instance()
    t0 = time.monotonic()
    sol = solve(inst)
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    assert sol.status == "found"
    assert sol.min_cost == 8
    assert len(sol.maps) == 1
    ts = transition_state(inst, sol.maps[0].psi)
    assert dict(ts.edges) == STORK_TS
    assert ts.is_connected()

    t0 = time.monotonic()
    conn = solve(inst, SolveOptions(connected_only=True))
    assert time.monotonic() - t0 < 60.0
    assert conn.min_cost == 8
    assert oracles.same_classes(inst, conn.maps, sol.maps)


def _chain(n):
    g = MoleculeGraph(["C"] * n, edges(*[(i, i + 1, 1) for i in range(n - 1)]))
    return ReactionInstance([g], [g])


def test_criterion_5_model_sizes():
    for n in range(4, 21, 2):
        inst = _chain(n)
        pairs = n * n
        model = build_ilp2(inst)
        assert len(model.rows) == 2 * n + n + 2 * pairs
        assert model.stats()["by_kind"]["binary"] == pairs

    # the quadruple model grows with the square of the pair count
    sizes = []
    for n in (4, 8, 12, 16):
        inst = _chain(n)
        pairs = n * n
        rows = len(build_ilp4(inst).rows)
        assert rows >= pairs * pairs // 8
        sizes.append((pairs, rows))
    (p0, r0), (p1, r1) = sizes[0], sizes[-1]
    growth = math.log(r1 / r0) / math.log(p1 / p0)
    assert growth >= 2.0


def _carrier_pool(rng, n):
    return [
        MoleculeGraph(
            [rng.choice("CHNO") for _ in range(rng.randrange(1, 5))], {}
        )
        for _ in range(n)
    ]


def test_criterion_6_generator_oracle_and_growth():
    rng = random.Random(606)
    for _ in range(50):
        pool = _carrier_pool(rng, rng.randrange(2, 41))
        got = {(c.left, c.right) for c in generate_2to2(pool)}
        assert got == oracles.naive_2to2(pool)

    counts = []
    ladder = (40, 80, 160, 320)
    for n in ladder:
        meter: dict = {}
        generate_2to2(_carrier_pool(rng, n), meter=meter)
        counts.append(meter["comparisons"])
    exponent = math.log(counts[-1] / counts[0]) / math.log(ladder[-1] / ladder[0])
    assert exponent < 2.3


def _mixed_pool():
    buta = MoleculeGraph(["C"] * 4, edges((0, 1, 2), (1, 2, 1), (2, 3, 2)))
    ethe = MoleculeGraph(["C"] * 2, edges((0, 1, 2)))
    chex = MoleculeGraph(
        ["C"] * 6,
        edges((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 2), (4, 5, 1), (0, 5, 1)),
    )
    h2 = MoleculeGraph(["H", "H"], edges((0, 1, 1)))
    o2 = MoleculeGraph(["O", "O"], edges((0, 1, 2), (0, 0, 2), (1, 1, 2)))
    water = MoleculeGraph(["O", "H", "H"],
                          edges((0, 1, 1), (0, 2, 1), (0, 0, 2)))
    h2o2 = MoleculeGraph(
        ["O", "O", "H", "H"],
        edges((0, 1, 1), (0, 2, 1), (1, 3, 1), (0, 0, 2), (1, 1, 2)),
    )
    return [buta, ethe, chex, h2, o2, water, h2o2]


def test_criterion_7a_pass_rate_monotone():
    pool = _mixed_pool()
    cands = generate_2to2(pool)
    assert len(cands) >= 5
    passes = {}
    for k in (4, 6, 8):
        recs = list(filter_by_ts_length(pool, cands, k))
        assert len(recs) == len(cands)
        passes[k] = {
            (r.candidate.left, r.candidate.right)
            for r in recs if r.status == "pass"
        }
    assert passes[4] <= passes[6] <= passes[8]
    # the ring closure needs six changes, so the step up to 6 is strict
    assert len(passes[4]) < len(passes[6])
    assert 0 < len(passes[4])
    assert len(passes[8]) < len(cands)


def _metabolite_symbols(rng):
    # element counts drawn independently, so formula sums spread out
    # instead of piling onto the composition average
    ranges = {"C": 11, "N": 8, "O": 8, "P": 4, "S": 4}
    while True:
        counts = {s: rng.randrange(0, hi) for s, hi in ranges.items()}
        syms = [s for s, c in counts.items() for _ in range(c)]
        if len(syms) < 2:
            continue
        syms += ["H"] * rng.randrange(0, 13)
        if sum(oracles.VALENCE[s][0] for s in syms) % 2:
            syms.append("H")
        return syms


def test_criterion_7b_pipeline_completes():
    rng = random.Random(707)
    mols = _mixed_pool()[3:]  # known recombiners guarantee some passes
    seen = {AtomHistogram.from_graph(g).key() for g in mols}
    while len(mols) < 200:
        g = oracles.random_bonding(rng, _metabolite_symbols(rng))
        if g is None:
            continue
        key = AtomHistogram.from_graph(g).key()
        if key in seen:
            continue
        seen.add(key)
        mols.append(g)

    cands = generate_2to2(mols)
    assert len(cands) > 100
    recs = list(filter_by_ts_length(mols, cands, 8, budget_ms=100))
    assert len(recs) == len(cands)
    assert all(r.status in ("pass", "fail", "timeout") for r in recs)
    assert any(r.status == "pass" for r in recs)
