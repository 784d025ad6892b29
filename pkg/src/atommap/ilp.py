"""Integer linear programs for minimum-cost atom maps.

Two model builders share one variable convention: a binary m_{i}_{p} per
label-compatible vertex pair, omitted entirely for incompatible pairs.

build_ilp2 aggregates weight changes per educt vertex with integer
variables cp/cm bounded from below by big-M rows, the Kaufmann-Broeckx
linearization of the quadratic assignment objective.  Its row count is
linear in the number of pairs.  Per-vertex balance rows tie positive to
negative change sums; on valence-complete inputs that is the zero-flux
identity and the objective equals exactly twice the map cost.  On
stripped-down inputs whose bijections can violate zero flux, balance
slack pads such assignments upward, so the model optimum may exceed
twice the literal minimum (it then agrees with the cheapest zero-flux
map instead).

build_ilp4 is the naive baseline: one AND variable per pair of pairs
with split change variables, objective equal to the cost directly, and
a row count quadratic in the number of pairs.  It exists to be measured
against, not to be fast.

solve_exact is a small exact branch-and-bound over the m variables that
reads everything it needs back out of the model rows, so a model parsed
from LP text solves the same as a freshly built one.  Returned optima
are checked against every row before being reported.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .mapping import AtomMap, ReactionInstance, equivalent, transition_state
from .molgraph import MoleculeGraph


@dataclass(frozen=True)
class IlpVariable:
    name: str
    kind: str  # binary | integer (nonnegative)
    obj: int


@dataclass(frozen=True)
class IlpRow:
    name: str
    terms: tuple[tuple[str, int], ...]
    sense: str  # <= | >= | =
    rhs: int


@dataclass
class IlpModel:
    """Sparse minimization model plus builder metadata.

    Variables and rows carry the whole model; meta only accelerates the
    internal solver and is excluded from equality, so a parsed export
    compares equal to its source.
    """

    variables: list[IlpVariable]
    rows: list[IlpRow]
    sense: str = "min"
    meta: dict = field(default_factory=dict, compare=False)

    def stats(self) -> dict:
        kinds: dict[str, int] = {}
        for v in self.variables:
            kinds[v.kind] = kinds.get(v.kind, 0) + 1
        return {
            "variables": len(self.variables),
            "by_kind": kinds,
            "rows": len(self.rows),
            "nonzeros": sum(len(r.terms) for r in self.rows),
        }

    def copy(self) -> "IlpModel":
        return IlpModel(
            variables=list(self.variables),
            rows=list(self.rows),
            sense=self.sense,
            meta=dict(self.meta),
        )


def _compatible_pairs(inst: ReactionInstance) -> list[tuple[int, int]]:
    pairs = []
    for i in range(inst.n):
        for p in range(inst.n):
            if inst.elabels1[i] == inst.elabels2[p]:
                pairs.append((i, p))
    return pairs


def _weight_table(g: MoleculeGraph, n: int) -> list[list[int]]:
    w = [[0] * n for _ in range(n)]
    for (u, v), (_, wt) in g.edges.items():
        w[u][v] = wt
        w[v][u] = wt
    return w


def _big_m(inst: ReactionInstance) -> int:
    """Largest positive plus largest negative weighted degree.

    The big-M rows must go slack whenever m_ip = 0.  Their right-hand
    sums are bounded by the positive incident weight at one vertex plus
    the negated negative incident weight at another, so this M always
    suffices.  Without negative charge edges it reduces to the largest
    weighted degree.
    """
    pos = 0
    neg = 0
    for g in (inst.g1, inst.g2):
        for v in range(g.n):
            p = sum(max(w, 0) * (2 if u == v else 1) for u, w in g.neighbors(v).items())
            m = sum(max(-w, 0) * (2 if u == v else 1) for u, w in g.neighbors(v).items())
            pos = max(pos, p)
            neg = max(neg, m)
    return pos + neg


def build_ilp2(inst: ReactionInstance) -> IlpModel:
    """Kaufmann-Broeckx model: 3n + 2*#pairs rows, objective = 2*cost.

    For each compatible pair, cp_i_p (cm_i_p) is forced up to the sum of
    positive (negative) changes of edges at i when psi(i) = p, via

        cp_ip >= (m_ip - 1)*M + sum over (j,q) of m_jq * max(0, delta)

    The loop term (j, q) = (i, p) enters with coefficient 2: a loop has
    one vertex, every other edge is seen from both endpoints, and only
    the doubled convention makes the objective a uniform 2*cost.
    """
    n = inst.n
    pairs = _compatible_pairs(inst)
    w1 = _weight_table(inst.g1, n)
    w2 = _weight_table(inst.g2, n)
    big_m = _big_m(inst)

    variables = [IlpVariable(f"m_{i}_{p}", "binary", 0) for i, p in pairs]
    variables += [IlpVariable(f"cp_{i}_{p}", "integer", 1) for i, p in pairs]
    variables += [IlpVariable(f"cm_{i}_{p}", "integer", 1) for i, p in pairs]

    by_i: dict[int, list[int]] = {}
    by_p: dict[int, list[int]] = {}
    for i, p in pairs:
        by_i.setdefault(i, []).append(p)
        by_p.setdefault(p, []).append(i)

    rows: list[IlpRow] = []
    for i in range(n):
        rows.append(IlpRow(
            f"asg1_{i}",
            tuple((f"m_{i}_{p}", 1) for p in by_i.get(i, [])),
            "=", 1,
        ))
    for p in range(n):
        rows.append(IlpRow(
            f"asg2_{p}",
            tuple((f"m_{i}_{p}", 1) for i in by_p.get(p, [])),
            "=", 1,
        ))
    for i in range(n):
        terms = [(f"cp_{i}_{p}", 1) for p in by_i.get(i, [])]
        terms += [(f"cm_{i}_{p}", -1) for p in by_i.get(i, [])]
        rows.append(IlpRow(f"bal_{i}", tuple(terms), "=", 0))

    for i, p in pairs:
        for sign, tag in ((1, "bp"), (-1, "bm")):
            # sign +1 collects w2-w1 excesses, -1 the deficits
            terms = [(f"c{'p' if sign > 0 else 'm'}_{i}_{p}", 1)]
            m_ip_coef = -big_m
            for j, q in pairs:
                delta = max(0, sign * (w2[p][q] - w1[i][j]))
                if (j, q) == (i, p):
                    m_ip_coef -= 2 * delta
                elif delta:
                    terms.append((f"m_{j}_{q}", -delta))
            if m_ip_coef:
                terms.insert(1, (f"m_{i}_{p}", m_ip_coef))
            rows.append(IlpRow(f"{tag}_{i}_{p}", tuple(terms), ">=", -big_m))

    meta = {"kind": "ilp2", "n": n, "pairs": pairs, "big_m": big_m}
    return IlpModel(variables=variables, rows=rows, meta=meta)


def build_ilp4(inst: ReactionInstance) -> IlpModel:
    """Naive product-linearized model, objective = cost directly.

    One binary y per pair of pairs realizes m_ip AND m_jq through the
    three standard rows; an integer split zp - zm = delta * y prices the
    weight change of mapping educt pair {i,j} onto {p,q}.  All
    compatible quadruples are materialized, changed or not, which is
    what makes the row count grow quadratically in the pair count.
    """
    n = inst.n
    pairs = _compatible_pairs(inst)
    w1 = _weight_table(inst.g1, n)
    w2 = _weight_table(inst.g2, n)

    by_i: dict[int, list[int]] = {}
    by_p: dict[int, list[int]] = {}
    for i, p in pairs:
        by_i.setdefault(i, []).append(p)
        by_p.setdefault(p, []).append(i)

    quads: list[tuple[int, int, int, int]] = []
    for i in range(n):
        for p in by_i.get(i, []):
            quads.append((i, i, p, p))
    for i in range(n):
        for j in range(i + 1, n):
            for p in by_i.get(i, []):
                for q in by_i.get(j, []):
                    if p != q:
                        quads.append((i, j, p, q))

    variables = [IlpVariable(f"m_{i}_{p}", "binary", 0) for i, p in pairs]
    variables += [IlpVariable(f"y_{i}_{j}_{p}_{q}", "binary", 0)
                  for i, j, p, q in quads]
    variables += [IlpVariable(f"zp_{i}_{j}_{p}_{q}", "integer", 1)
                  for i, j, p, q in quads]
    variables += [IlpVariable(f"zm_{i}_{j}_{p}_{q}", "integer", 1)
                  for i, j, p, q in quads]

    rows: list[IlpRow] = []
    for i in range(n):
        rows.append(IlpRow(
            f"asg1_{i}",
            tuple((f"m_{i}_{p}", 1) for p in by_i.get(i, [])),
            "=", 1,
        ))
    for p in range(n):
        rows.append(IlpRow(
            f"asg2_{p}",
            tuple((f"m_{i}_{p}", 1) for i in by_p.get(p, [])),
            "=", 1,
        ))
    for i, j, p, q in quads:
        y = f"y_{i}_{j}_{p}_{q}"
        delta = w2[p][q] - w1[i][j]
        rows.append(IlpRow(f"and1_{i}_{j}_{p}_{q}",
                           ((y, 1), (f"m_{i}_{p}", -1)), "<=", 0))
        rows.append(IlpRow(f"and2_{i}_{j}_{p}_{q}",
                           ((y, 1), (f"m_{j}_{q}", -1)), "<=", 0))
        rows.append(IlpRow(f"and3_{i}_{j}_{p}_{q}",
                           ((y, 1), (f"m_{i}_{p}", -1), (f"m_{j}_{q}", -1)),
                           ">=", -1))
        link = [(f"zp_{i}_{j}_{p}_{q}", 1), (f"zm_{i}_{j}_{p}_{q}", -1)]
        if delta:
            link.append((y, -delta))
        rows.append(IlpRow(f"link_{i}_{j}_{p}_{q}", tuple(link), "=", 0))

    meta = {"kind": "ilp4", "n": n, "pairs": pairs, "quads": quads}
    return IlpModel(variables=variables, rows=rows, meta=meta)


def _format_terms(terms: Sequence[tuple[str, int]]) -> str:
    parts: list[str] = []
    for name, coef in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        if not parts:
            parts.append(body if coef > 0 else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0 __zero__"


def export_lp(model: IlpModel) -> str:
    """Serialize to CPLEX LP text, deterministically.

    Long rows are wrapped so no line approaches the classic 255-column
    limit.  Integer variables get explicit nonnegative bounds, binaries
    live in their own section.
    """
    def wrap(line: str, indent: str = "   ") -> list[str]:
        out = []
        while len(line) > 200:
            cut = line.rfind(" ", 0, 200)
            if cut <= 0:
                break
            out.append(line[:cut])
            line = indent + line[cut + 1:]
        out.append(line)
        return out

    lines = ["\\ atommap model"]
    lines.append("Minimize")
    obj_terms = [(v.name, v.obj) for v in model.variables if v.obj]
    lines += wrap(" obj: " + _format_terms(obj_terms))
    lines.append("Subject To")
    for row in model.rows:
        op = {"<=": "<=", ">=": ">=", "=": "="}[row.sense]
        lines += wrap(f" {row.name}: {_format_terms(row.terms)} {op} {row.rhs}")
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == "integer":
            lines.append(f" 0 <= {v.name}")
    generals = [v.name for v in model.variables if v.kind == "integer"]
    if generals:
        lines.append("Generals")
        for chunk in range(0, len(generals), 8):
            lines.append(" " + " ".join(generals[chunk:chunk + 8]))
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    if binaries:
        lines.append("Binaries")
        for chunk in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[chunk:chunk + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpParseError(ValueError):
    pass


def _parse_expr(tokens: list[str], where: str) -> list[tuple[str, int]]:
    terms: list[tuple[str, int]] = []
    sign = 1
    coef: Optional[int] = None
    for tok in tokens:
        if tok == "+":
            sign, coef = 1, None
        elif tok == "-":
            sign, coef = -1, None
        elif tok.lstrip("+-").isdigit():
            if coef is not None:
                raise LpParseError(f"two coefficients in a row in {where}")
            coef = int(tok)
        else:
            terms.append((tok, sign * (1 if coef is None else coef)))
            sign, coef = 1, None
    if coef is not None:
        raise LpParseError(f"dangling coefficient in {where}")
    return [(n, c) for n, c in terms if n != "__zero__"]


def parse_lp(text: str) -> IlpModel:
    """Parse the export_lp dialect back into a model.

    Only the subset export_lp emits is understood; the round trip
    parse_lp(export_lp(m)) == m holds for every built model.
    """
    section = None
    obj_tokens: list[str] = []
    row_chunks: list[tuple[str, list[str]]] = []
    bounds: list[str] = []
    generals: list[str] = []
    binaries: list[str] = []
    pending: Optional[list[str]] = None

    for raw in text.splitlines():
        line = raw.split("\\")[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().lower()
        if head == "maximize":
            raise LpParseError("only minimization models are supported")
        if head in ("minimize", "subject to", "bounds",
                    "generals", "binaries", "end"):
            section = head
            pending = None
            continue
        body = line.strip()
        cont = raw.startswith("   ") or raw.startswith("\t")
        if section == "minimize":
            if ":" in body:
                body = body.split(":", 1)[1]
            obj_tokens += body.split()
        elif section == "subject to":
            if ":" in body and not cont:
                name, rest = body.split(":", 1)
                pending = rest.split()
                row_chunks.append((name.strip(), pending))
            elif pending is not None:
                pending += body.split()
            else:
                raise LpParseError(f"constraint without a name: {body!r}")
        elif section == "bounds":
            bounds.append(body)
        elif section == "generals":
            generals += body.split()
        elif section == "binaries":
            binaries += body.split()
        elif section is None:
            raise LpParseError(f"content before any section: {body!r}")

    obj = dict(_parse_expr(obj_tokens, "objective"))

    rows: list[IlpRow] = []
    for name, tokens in row_chunks:
        op_at = next((k for k, t in enumerate(tokens) if t in ("<=", ">=", "=")), None)
        if op_at is None:
            raise LpParseError(f"row {name} has no comparator")
        lhs = _parse_expr(tokens[:op_at], name)
        rhs_tokens = tokens[op_at + 1:]
        if len(rhs_tokens) != 1:
            raise LpParseError(f"row {name} right side is not a constant")
        rows.append(IlpRow(name, tuple(lhs), tokens[op_at], int(rhs_tokens[0])))

    for b in bounds:
        toks = b.split()
        if len(toks) != 3 or toks[0] != "0" or toks[1] != "<=":
            raise LpParseError(f"unsupported bound {b!r}")

    # builders list binaries before integers, sections preserve that
    ordered: list[str] = []
    seen = set()
    for name in binaries + generals:
        if name not in seen:
            seen.add(name)
            ordered.append(name)
    binset = set(binaries)
    variables = [
        IlpVariable(n, "binary" if n in binset else "integer", obj.get(n, 0))
        for n in ordered
    ]
    kind = "ilp4" if any(n.startswith("y_") for n in binset) else "ilp2"
    return IlpModel(variables=variables, rows=rows, meta={"kind": kind})


@dataclass
class IlpOptions:
    time_limit_ms: Optional[int] = None
    # accept the first leaf at exactly this objective (used for re-solves
    # at a known optimum, where nothing better can exist)
    stop_at: Optional[int] = None


@dataclass(frozen=True)
class IlpSolution:
    status: str  # optimal | infeasible | timeout
    objective: Optional[int]
    psi: Optional[tuple[int, ...]]
    values: dict


class _Shape:
    """Model structure recovered from rows: pairs, deltas, cuts.

    Reading the tables out of the rows instead of trusting meta keeps
    one code path for built and parsed models.
    """

    def __init__(self, model: IlpModel):
        self.model = model
        self.pairs = []
        for v in model.variables:
            if v.name.startswith("m_"):
                _, i, p = v.name.split("_")
                self.pairs.append((int(i), int(p)))
        if not self.pairs:
            raise ValueError("model has no m variables")
        self.n1 = max(i for i, _ in self.pairs) + 1
        self.n2 = max(p for _, p in self.pairs) + 1
        self.kind = model.meta.get("kind") or (
            "ilp4" if any(v.name.startswith("y_") for v in model.variables)
            else "ilp2"
        )
        self.compat: dict[int, list[int]] = {}
        for i, p in self.pairs:
            self.compat.setdefault(i, []).append(p)

        # coefficient tables keyed by pair, read back from the rows
        self.dplus: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
        self.dminus: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
        self.delta: dict[tuple[int, int, int, int], int] = {}
        self.cuts: list[tuple[frozenset, int]] = []
        for row in model.rows:
            tag = row.name.split("_", 1)[0]
            if tag in ("bp", "bm"):
                _, i, p = row.name.split("_")
                i, p = int(i), int(p)
                big_m = -row.rhs
                table: dict[tuple[int, int], int] = {}
                for name, coef in row.terms:
                    if not name.startswith("m_"):
                        continue
                    _, j, q = name.split("_")
                    j, q = int(j), int(q)
                    if (j, q) == (i, p):
                        loop = -coef - big_m
                        if loop:
                            table[(j, q)] = loop
                    elif coef:
                        table[(j, q)] = -coef
                (self.dplus if tag == "bp" else self.dminus)[(i, p)] = table
            elif tag == "link":
                _, i, j, p, q = row.name.split("_")
                coef = next((c for n, c in row.terms if n.startswith("y_")), 0)
                self.delta[(int(i), int(j), int(p), int(q))] = -coef
            elif tag == "cut":
                members = set()
                for name, coef in row.terms:
                    if coef != 1 or not name.startswith("m_"):
                        raise ValueError(f"unsupported cut row {row.name}")
                    _, i, p = name.split("_")
                    members.add((int(i), int(p)))
                self.cuts.append((frozenset(members), row.rhs))


def _leaf_values(shape: _Shape, psi: list[int]) -> dict:
    """Variable assignment certifying psi, minimal in the objective."""
    values: dict[str, int] = {v.name: 0 for v in shape.model.variables}
    chosen = {(i, psi[i]) for i in range(shape.n1)}
    for i, p in chosen:
        values[f"m_{i}_{p}"] = 1
    if shape.kind == "ilp2":
        for i in range(shape.n1):
            p = psi[i]
            pos = sum(shape.dplus[(i, p)].get((j, psi[j]), 0)
                      for j in range(shape.n1))
            neg = sum(shape.dminus[(i, p)].get((j, psi[j]), 0)
                      for j in range(shape.n1))
            peak = max(pos, neg)
            values[f"cp_{i}_{p}"] = peak
            values[f"cm_{i}_{p}"] = peak
    else:
        for (i, j, p, q), delta in shape.delta.items():
            if (i, p) in chosen and (j, q) in chosen:
                values[f"y_{i}_{j}_{p}_{q}"] = 1
                values[f"zp_{i}_{j}_{p}_{q}"] = max(0, delta)
                values[f"zm_{i}_{j}_{p}_{q}"] = max(0, -delta)
        # AND rows force y to 1 on every chosen quadruple, including the
        # changeless ones handled above; nothing else needs lifting
    return values


def _assert_feasible(model: IlpModel, values: dict) -> None:
    for row in model.rows:
        lhs = sum(values[name] * coef for name, coef in row.terms)
        ok = (lhs <= row.rhs if row.sense == "<="
              else lhs >= row.rhs if row.sense == ">="
              else lhs == row.rhs)
        if not ok:
            raise AssertionError(
                f"row {row.name} violated: {lhs} {row.sense} {row.rhs}")


def solve_exact(model: IlpModel, options: Optional[IlpOptions] = None) -> IlpSolution:
    """Exact depth-first branch and bound over the assignment variables.

    Educt vertices are fixed in ascending order of compatibility-class
    size, so forced vertices go first.  The bound is the objective
    accumulated over fully decided pairs, admissible because change
    contributions are nonnegative and grow monotonically with the fixed
    set.  Deterministic for a fixed model and options.
    """
    opts = options or IlpOptions()
    deadline = None
    if opts.time_limit_ms is not None:
        deadline = time.monotonic() + opts.time_limit_ms / 1000.0
    shape = _Shape(model)
    n = shape.n1
    if shape.n2 != n:
        return IlpSolution("infeasible", None, None, {})

    order = sorted(range(n), key=lambda i: (len(shape.compat.get(i, [])), i))
    ilp2 = shape.kind == "ilp2"

    psi = [-1] * n
    used = [False] * shape.n2
    pos = [0] * n
    neg = [0] * n
    cut_acc = [0] * len(shape.cuts)
    cut_of: dict[tuple[int, int], list[int]] = {}
    for ci, (members, _) in enumerate(shape.cuts):
        for pair in members:
            cut_of.setdefault(pair, []).append(ci)

    best_obj: Optional[int] = None
    best_psi: Optional[list[int]] = None
    state = {"ticks": 0, "timeout": False, "stop": False}

    def rec(depth: int, bound: int) -> None:
        if state["stop"] or state["timeout"]:
            return
        state["ticks"] += 1
        if deadline is not None and not state["ticks"] % 512:
            if time.monotonic() > deadline:
                state["timeout"] = True
                return
        nonlocal best_obj, best_psi
        if depth == n:
            if best_obj is None or bound < best_obj:
                best_obj = bound
                best_psi = psi[:]
                if opts.stop_at is not None and bound <= opts.stop_at:
                    state["stop"] = True
            return
        i = order[depth]
        for p in shape.compat.get(i, []):
            if used[p]:
                continue
            blocked = False
            touched_cuts = []
            for ci in cut_of.get((i, p), []):
                cut_acc[ci] += 1
                touched_cuts.append(ci)
                if cut_acc[ci] > shape.cuts[ci][1]:
                    blocked = True
            if not blocked:
                psi[i] = p
                used[p] = True
                if ilp2:
                    gain = 0
                    deltas = []
                    tp = shape.dplus[(i, p)]
                    tm = shape.dminus[(i, p)]
                    for j in order[:depth + 1]:
                        q = psi[j]
                        dp1 = tp.get((j, q), 0)
                        dm1 = tm.get((j, q), 0)
                        if j == i:
                            gain -= 2 * max(pos[i], neg[i])
                            pos[i] += dp1
                            neg[i] += dm1
                            gain += 2 * max(pos[i], neg[i])
                            deltas.append((i, dp1, dm1))
                            continue
                        # contribution of the new pair to both endpoints
                        dp2 = shape.dplus[(j, q)].get((i, p), 0)
                        dm2 = shape.dminus[(j, q)].get((i, p), 0)
                        gain -= 2 * max(pos[i], neg[i]) + 2 * max(pos[j], neg[j])
                        pos[i] += dp1
                        neg[i] += dm1
                        pos[j] += dp2
                        neg[j] += dm2
                        gain += 2 * max(pos[i], neg[i]) + 2 * max(pos[j], neg[j])
                        deltas.append((i, dp1, dm1))
                        deltas.append((j, dp2, dm2))
                else:
                    gain = 0
                    for j in order[:depth + 1]:
                        key = (i, j, p, psi[j]) if i <= j else (j, i, psi[j], p)
                        gain += abs(shape.delta.get(key, 0))

                nb = bound + gain
                limit = best_obj if opts.stop_at is None else min(
                    x for x in (best_obj, opts.stop_at + 1) if x is not None)
                if limit is None or nb < limit:
                    rec(depth + 1, nb)
                if ilp2:
                    for j, dp1, dm1 in deltas:
                        pos[j] -= dp1
                        neg[j] -= dm1
                psi[i] = -1
                used[p] = False
            for ci in touched_cuts:
                cut_acc[ci] -= 1
            if state["stop"] or state["timeout"]:
                return

    rec(0, 0)

    if state["timeout"] and best_obj is None:
        return IlpSolution("timeout", None, None, {})
    if best_obj is None:
        return IlpSolution("infeasible", None, None, {})
    values = _leaf_values(shape, best_psi)
    _assert_feasible(model, values)
    status = "timeout" if state["timeout"] else "optimal"
    return IlpSolution(status, best_obj,
                       tuple(best_psi) if best_psi else None, values)


@dataclass(frozen=True)
class IlpEnumeration:
    status: str  # complete | timeout
    objective: Optional[int]
    maps: tuple[AtomMap, ...]


def enumerate_optima(
    inst: ReactionInstance,
    model: IlpModel,
    time_limit_ms: Optional[int] = None,
) -> IlpEnumeration:
    """All nonequivalent optimal maps of the model via exclusion cuts.

    After each optimum, the pairs covering its transition-state vertices
    are banned from co-occurring and the model is re-solved at the same
    objective until that becomes infeasible.  Any completion of the same
    partial map is equivalent, so each cut loses no distinct class;
    symmetric bystanders can still produce equivalent maps from distinct
    partials, hence the final filter.
    """
    deadline = None
    if time_limit_ms is not None:
        deadline = time.monotonic() + time_limit_ms / 1000.0

    def remaining_ms() -> Optional[int]:
        if deadline is None:
            return None
        return max(1, int((deadline - time.monotonic()) * 1000))

    work = model.copy()
    sol = solve_exact(work, IlpOptions(time_limit_ms=remaining_ms()))
    if sol.status != "optimal":
        return IlpEnumeration(sol.status if sol.status == "timeout" else "complete",
                              None, ())
    target = sol.objective
    raw: list[AtomMap] = []
    ncuts = 0
    while sol.status == "optimal" and sol.objective == target:
        am = AtomMap.from_psi(inst, sol.psi)
        raw.append(am)
        ts = transition_state(inst, am.psi)
        span = ts.vertices
        if not span:
            break  # cost 0: all completions of the empty partial map agree
        terms = tuple((f"m_{i}_{am.psi[i]}", 1) for i in sorted(span))
        work.rows.append(IlpRow(f"cut_{ncuts}", terms, "<=", len(span) - 1))
        ncuts += 1
        sol = solve_exact(work, IlpOptions(time_limit_ms=remaining_ms(),
                                           stop_at=target))
    status = "timeout" if sol.status == "timeout" else "complete"

    kept: list[AtomMap] = []
    for am in raw:
        if not any(equivalent(inst, am.psi, k.psi) for k in kept):
            kept.append(am)
    return IlpEnumeration(status, target, tuple(kept))
