"""Atom-atom mapping of balanced reactions and reaction candidate generation.

The package is organized around an edge-weighted molecule graph model in
which bond orders, lone pairs, charges, radicals and aromatic systems are
all expressed as integer edge weights.  On top of it sit:

- ``mapping``: cost/transition-state semantics of atom-atom maps, their
  decomposition into alternating cycles, equivalence, and a brute-force
  reference solver,
- ``cyclesearch``: the production search-tree solver enumerating optimal
  maps by iterative deepening over alternating cycles,
- ``ilp``: integer-programming formulations of the same problem with an
  LP-format exporter and a small exact solver,
- ``netcomp``: mass-balanced 2-to-2 reaction candidate generation and
  dataset statistics for network completion,
- ``chemio``: SMILES-subset and JSON parsing/serialization,
- ``cli``: the ``atommap`` command line tool.
"""

from .molgraph import MoleculeGraph, disjoint_union, are_isomorphic, weighted_degree
from .mapping import (
    AtomMap,
    BalanceError,
    FluxError,
    ReactionInstance,
    TransitionState,
    brute_force_min_cost,
    cost,
    decompose_cycles,
    equivalent,
    transition_state,
)
from .cyclesearch import (
    MechanismTrace,
    Solution,
    SolveOptions,
    search_elementary,
    search_general,
    solve,
)
from .ilp import (
    IlpModel,
    build_ilp2,
    build_ilp4,
    enumerate_optima,
    export_lp,
    parse_lp,
    solve_exact,
)
from .netcomp import (
    AtomHistogram,
    CandidatePair,
    dataset_stats,
    filter_by_ts_length,
    generate_2to2,
    histogram,
)

__all__ = [
    "MoleculeGraph",
    "disjoint_union",
    "are_isomorphic",
    "weighted_degree",
    "AtomMap",
    "BalanceError",
    "FluxError",
    "ReactionInstance",
    "TransitionState",
    "brute_force_min_cost",
    "cost",
    "decompose_cycles",
    "equivalent",
    "transition_state",
    "MechanismTrace",
    "Solution",
    "SolveOptions",
    "search_elementary",
    "search_general",
    "solve",
    "IlpModel",
    "build_ilp2",
    "build_ilp4",
    "enumerate_optima",
    "export_lp",
    "parse_lp",
    "solve_exact",
    "AtomHistogram",
    "CandidatePair",
    "dataset_stats",
    "filter_by_ts_length",
    "generate_2to2",
    "histogram",
]

__version__ = "0.1.0"
