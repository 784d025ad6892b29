"""Command-line surface for mapping reactions and screening candidates.

Four subcommands: `map` solves one reaction document for its optimal
atom maps, `candidates` enumerates and filters balanced 2-to-2 reaction
candidates over a molecule pool, `stats` summarizes a dataset, and
`export-lp` writes a reaction's integer program as LP text for external
solvers.

Exit codes: 0 success, 2 unreadable or invalid input, 3 unbalanced
reaction, 4 cost bound exhausted without a map, 5 time budget hit.
Identical invocations produce identical bytes; the only randomness is
candidate sampling, which sits behind --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from random import Random
from typing import Optional, Sequence

import jsonschema

from .chemio import (
    DocumentError,
    SmilesError,
    ValenceError,
    load_schema,
    parse_molecule_pool,
    parse_reaction_json,
)
from .cyclesearch import MechanismTrace, SolveOptions, solve
from .ilp import build_ilp2, build_ilp4, enumerate_optima, export_lp
from .mapping import (
    BalanceError,
    FluxError,
    ReactionInstance,
    decompose_cycles,
    transition_state,
)
from .netcomp import dataset_stats, filter_by_ts_length, generate_2to2

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNBALANCED = 3
EXIT_EXHAUSTED = 4
EXIT_TIMEOUT = 5


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_path: Optional[str]
    solver: str
    max_cost: int
    connected: bool
    elementary: bool
    timeout_ms: Optional[int]
    jobs: int
    seed: int
    fmt: str
    k_max: int = 8
    sample: Optional[int] = None
    cancel_spectators: bool = False
    model: str = "ilp2"


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("input", help="input file, or - for stdin")
    shared.add_argument("-o", "--output", default=None,
                        help="output file (default: stdout)")
    shared.add_argument("--solver", choices=("altcyc", "ilp-internal"),
                        default="altcyc",
                        help="map solver: alternating-cycle search or the "
                             "internal ILP branch and bound")
    shared.add_argument("--max-cost", type=int, default=10,
                        help="largest total bond change to consider")
    shared.add_argument("--connected", action="store_true",
                        help="restrict to connected transition states")
    shared.add_argument("--elementary", action="store_true",
                        help="restrict to a single simple cycle")
    shared.add_argument("--timeout-ms", type=int, default=None,
                        help="time budget (per candidate for `candidates`)")
    shared.add_argument("--jobs", type=int, default=1,
                        help="parallel workers across independent instances")
    shared.add_argument("--seed", type=int, default=0,
                        help="seed for any sampling")
    shared.add_argument("--format", dest="fmt", default="json",
                        choices=("json", "text", "lp", "mechanism"))

    parser = argparse.ArgumentParser(
        prog="atommap",
        description="Chemically valid atom maps and balanced reaction "
                    "candidates over molecule graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("map", parents=[shared],
                   help="optimal atom maps of one reaction document")
    p_cand = sub.add_parser("candidates", parents=[shared],
                            help="balanced 2-to-2 candidates over a pool, "
                                 "filtered by transition-state length")
    p_cand.add_argument("--k-max", type=int, default=8,
                        help="pass threshold on the minimum map cost (even)")
    p_cand.add_argument("--sample", type=int, default=None,
                        help="solve only a seeded random sample this large")
    p_cand.add_argument("--cancel-spectators", action="store_true",
                        help="strike molecules present on both sides")
    sub.add_parser("stats", parents=[shared],
                   help="isomer-set and participation distributions")
    p_exp = sub.add_parser("export-lp", parents=[shared],
                           help="write the reaction's ILP as LP text")
    p_exp.add_argument("--model", choices=("ilp2", "ilp4"), default="ilp2")
    return parser


_FORMATS = {
    "map": ("json", "text", "mechanism"),
    "candidates": ("json", "text"),
    "stats": ("json", "text"),
    "export-lp": ("lp",),
}


def _config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    fmt = args.fmt
    if args.command == "export-lp" and fmt == "json":
        fmt = "lp"  # the only format this command has
    if fmt not in _FORMATS[args.command]:
        parser.error(f"format {fmt!r} is not available for {args.command}")
    if args.command == "candidates" and (args.k_max < 0 or args.k_max % 2):
        parser.error("--k-max must be even and nonnegative")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    return RunConfig(
        command=args.command,
        input_path=args.input,
        output_path=args.output,
        solver=args.solver,
        max_cost=args.max_cost,
        connected=args.connected,
        elementary=args.elementary,
        timeout_ms=args.timeout_ms,
        jobs=args.jobs,
        seed=args.seed,
        fmt=fmt,
        k_max=getattr(args, "k_max", 8),
        sample=getattr(args, "sample", None),
        cancel_spectators=getattr(args, "cancel_spectators", False),
        model=getattr(args, "model", "ilp2"),
    )


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_output(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if text and not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(parser, args)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)

    try:
        text = _read_input(cfg.input_path)
    except OSError as exc:
        print(f"error: cannot read {cfg.input_path}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if cfg.command == "map":
            return cmd_map(cfg, text)
        if cfg.command == "candidates":
            return cmd_candidates(cfg, text)
        if cfg.command == "stats":
            return cmd_stats(cfg, text)
        return cmd_export_lp(cfg, text)
    except (DocumentError, SmilesError, ValenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BalanceError as exc:
        print(f"error: unbalanced reaction: {exc}", file=sys.stderr)
        return EXIT_UNBALANCED


def _mechanism_json(inst: ReactionInstance, trace: MechanismTrace) -> list:
    name = lambda v: inst.vertex_name(1, v)
    return [
        [{"u": name(u), "v": name(v), "sign": sign} for (u, v), sign in path]
        for path in trace.paths
    ]


def _walk_steps(walk: tuple[int, ...]) -> list[tuple[tuple[int, int], int]]:
    # closed alternating walk -> signed steps, formation first
    steps = []
    for t in range(len(walk)):
        u, v = walk[t], walk[(t + 1) % len(walk)]
        steps.append(((u, v), 1 if t % 2 == 0 else -1))
    return steps


def _class_entry(
    inst: ReactionInstance,
    psi: Sequence[int],
    trace: Optional[MechanismTrace],
) -> dict:
    name = lambda v: inst.vertex_name(1, v)
    ts = transition_state(inst, psi)
    entry: dict = {
        "map": [[name(i), inst.vertex_name(2, psi[i])] for i in range(inst.n)],
        "transitionState": [
            {"u": name(u), "v": name(v), "delta": d}
            for (u, v), d in sorted(ts.edges.items())
        ],
    }
    try:
        cycles = decompose_cycles(ts).cycles
    except FluxError:
        cycles = None  # a solver was allowed to violate zero flux
    if cycles is not None:
        entry["cycles"] = [[name(v) for v in walk] for walk in cycles]
    if trace is not None and trace.paths:
        entry["mechanism"] = _mechanism_json(inst, trace)
    elif trace is None and cycles:
        # no recorded walk order; present the canonical decomposition
        steps = [_walk_steps(w) for w in cycles]
        entry["mechanism"] = _mechanism_json(inst, MechanismTrace(tuple(
            tuple(s) for s in steps)))
    return entry


def _render_map_text(payload: dict, mechanism_only: bool) -> str:
    lines: list[str] = []
    if not mechanism_only:
        head = f"status={payload['status']} solver={payload['solver']}"
        if payload.get("id"):
            head = f"id={payload['id']} " + head
        if "minCost" in payload:
            head += f" minCost={payload['minCost']}"
        head += f" maxCost={payload['maxCost']}"
        lines.append(head)
    classes = payload.get("classes", [])
    for idx, cls in enumerate(classes, start=1):
        if not mechanism_only:
            lines.append(f"class {idx} of {len(classes)}:")
            pairs = " ".join(f"{a}->{b}" for a, b in cls["map"])
            lines.append(f"  map: {pairs}")
            ts = " ".join(
                f"{e['u']}~{e['v']}{e['delta']:+d}"
                for e in cls["transitionState"]
            )
            lines.append(f"  transition state: {ts or '(none)'}")
            for walk in cls.get("cycles", []):
                lines.append("  cycle: " + " ".join(walk))
        for widx, path in enumerate(cls.get("mechanism", []), start=1):
            arrows = " ".join(
                f"{'+' if s['sign'] > 0 else '-'}({s['u']},{s['v']})"
                for s in path
            )
            lines.append(f"  class {idx} walk {widx}: {arrows}"
                         if mechanism_only else f"  walk {widx}: {arrows}")
    return "\n".join(lines) + "\n"


def cmd_map(cfg: RunConfig, text: str) -> int:
    doc = parse_reaction_json(text)
    inst = ReactionInstance.from_document(doc)

    if cfg.solver == "altcyc":
        sol = solve(inst, SolveOptions(
            max_cost=cfg.max_cost,
            connected_only=cfg.connected,
            elementary_only=cfg.elementary,
            timeout_ms=cfg.timeout_ms,
        ))
        status, min_cost = sol.status, sol.min_cost
        entries = [
            _class_entry(inst, am.psi, trace)
            for am, trace in zip(sol.maps, sol.traces)
        ]
    else:
        enum = enumerate_optima(inst, build_ilp2(inst),
                                time_limit_ms=cfg.timeout_ms)
        if enum.status == "timeout" and not enum.maps:
            status, min_cost = "timeout", None
        else:
            # the model objective doubles the cost
            min_cost = enum.objective // 2 if enum.objective is not None else None
            if min_cost is not None and min_cost > cfg.max_cost:
                status, min_cost = "exhausted", None
            else:
                status = "timeout" if enum.status == "timeout" else "found"
        entries = (
            [_class_entry(inst, am.psi, None) for am in enum.maps]
            if status != "exhausted" else []
        )

    payload: dict = {
        "id": inst.identifier if inst.identifier else None,
        "status": status,
        "maxCost": cfg.max_cost,
        "solver": cfg.solver,
        "atoms": {
            "educt": [inst.vertex_name(1, v) for v in range(inst.n)],
            "product": [inst.vertex_name(2, v) for v in range(inst.n)],
        },
        "classes": entries,
    }
    if min_cost is not None:
        payload["minCost"] = min_cost
    jsonschema.validate(payload, load_schema("mapresult.schema.json"))

    if cfg.fmt == "json":
        out = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        out = _render_map_text(payload, mechanism_only=cfg.fmt == "mechanism")
    _write_output(cfg.output_path, out)

    if status == "found":
        return EXIT_OK
    return EXIT_TIMEOUT if status == "timeout" else EXIT_EXHAUSTED


def cmd_candidates(cfg: RunConfig, text: str) -> int:
    molecules, _ = parse_molecule_pool(text)
    candidates = generate_2to2(molecules,
                               cancel_spectators=cfg.cancel_spectators)
    if cfg.sample is not None and cfg.sample < len(candidates):
        rng = Random(cfg.seed)
        picked = sorted(rng.sample(range(len(candidates)), cfg.sample))
        candidates = [candidates[i] for i in picked]

    def run_one(cand):
        return next(filter_by_ts_length(
            molecules, [cand], cfg.k_max,
            budget_ms=cfg.timeout_ms,
            connected_only=cfg.connected,
            elementary_only=cfg.elementary,
        ))

    if cfg.jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(run_one, candidates))
    else:
        records = list(filter_by_ts_length(
            molecules, candidates, cfg.k_max,
            budget_ms=cfg.timeout_ms,
            connected_only=cfg.connected,
            elementary_only=cfg.elementary,
        ))

    schema = load_schema("candidate.schema.json")
    lines = []
    for rec in records:
        cand = rec.candidate
        row: dict = {
            "leftIds": list(cand.left),
            "rightIds": list(cand.right),
            "formula": cand.histogram.formula(),
            "status": rec.status,
        }
        if rec.min_cost is not None:
            row["minCost"] = rec.min_cost
        if rec.classes:
            row["classes"] = rec.classes
        jsonschema.validate(row, schema)
        if cfg.fmt == "json":
            lines.append(json.dumps(row, sort_keys=True))
        else:
            extra = ""
            if rec.min_cost is not None:
                extra = f" cost={rec.min_cost} classes={rec.classes}"
            lines.append(f"{rec.status:7s} {list(cand.left)} -> "
                         f"{list(cand.right)} {cand.histogram.formula()}{extra}")
    _write_output(cfg.output_path, "\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def cmd_stats(cfg: RunConfig, text: str) -> int:
    molecules, reactions = parse_molecule_pool(text)
    report = dataset_stats(molecules, reactions)
    if cfg.fmt == "json":
        out = json.dumps({
            "isomerSetSizes": [list(x) for x in report.isomer_sizes],
            "participation": [list(x) for x in report.participation],
        }, indent=2, sort_keys=True) + "\n"
    else:
        rows = ["table,key,count"]
        rows += [f"isomer_set_size,{k},{c}" for k, c in report.isomer_sizes]
        rows += [f"participation,{k},{c}" for k, c in report.participation]
        out = "\n".join(rows) + "\n"
    _write_output(cfg.output_path, out)
    return EXIT_OK


def cmd_export_lp(cfg: RunConfig, text: str) -> int:
    doc = parse_reaction_json(text)
    inst = ReactionInstance.from_document(doc)
    model = build_ilp2(inst) if cfg.model == "ilp2" else build_ilp4(inst)
    _write_output(cfg.output_path, export_lp(model))
    return EXIT_OK
