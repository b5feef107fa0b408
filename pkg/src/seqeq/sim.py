"""Three-valued (0/1/x) cycle simulation, signatures, and trace replay.

Values are encoded dual-rail and lane-packed: each net carries a pair
of machine-word-free Python ints ``(d, x)`` over N parallel runs, where
lane bit x=1 means unknown and d is the definite value (canonically 0
under x).  And/not follow Kleene logic: 0 annihilates, 1 is neutral,
everything else is unknown.  Unknown is pessimistic here; the formal
engines resolve the same sources exactly.

The trace file format is the tool's counterexample exchange format:

    cycles N
    @k
    in <name> <0|1|x>
    reg <name> <0|1>
    out <spec-name>=<v> <imp-name>=<v> [MISMATCH]

``reg`` lines appear at cycle 0 and pin initial register values (the
engine's symbolic choices, or cut-point states for single-cycle
combinational counterexamples).  Tied inputs use the spec-side name;
side-local inputs are prefixed ``spec:`` / ``imp:``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from seqeq import netlist as nl
from seqeq.netlist import Init, Netlist

V0, V1, VX = 0, 1, 2
_VAL_TEXT = {V0: "0", V1: "1", VX: "x"}
_TEXT_VAL = {"0": V0, "1": V1, "x": VX, "X": VX}


class SimError(Exception):
    pass


class MissingInput(SimError):
    def __init__(self, name, cycle):
        self.name, self.cycle = name, cycle
        super().__init__(f"no value for input {name} at cycle {cycle}")


class TraceTooShort(SimError):
    pass


class UnmappedOutput(SimError):
    pass


# -- evaluation kernels --------------------------------------------------


def eval_kleene(net: Netlist, d: list[int], x: list[int], mask: int) -> None:
    """Evaluate the combinational core in place over lane-packed values.

    ``d[v]``/``x[v]`` must be pre-filled for inputs and registers;
    var 0 is the constant (d=x=0).
    """
    defs = net.and_defs
    for v in net.topo_ands():
        a, b = defs[v]
        av = a >> 1
        da, xa = d[av], x[av]
        if a & 1:
            da = ~(da | xa) & mask
        bv = b >> 1
        db, xb = d[bv], x[bv]
        if b & 1:
            db = ~(db | xb) & mask
        is1 = da & db
        is0 = (~(da | xa) | ~(db | xb)) & mask
        d[v] = is1
        x[v] = ~(is1 | is0) & mask


def eval_two_valued(net: Netlist, vals: list[int], mask: int) -> None:
    """Two-valued lane-packed evaluation (no x), same contract as above."""
    defs = net.and_defs
    for v in net.topo_ands():
        a, b = defs[v]
        la = vals[a >> 1]
        if a & 1:
            la = ~la & mask
        lb = vals[b >> 1]
        if b & 1:
            lb = ~lb & mask
        vals[v] = la & lb


def lit_value(d: list[int], x: list[int], lit: int, mask: int) -> tuple[int, int]:
    v = lit >> 1
    dv, xv = d[v], x[v]
    if lit & 1:
        dv = ~(dv | xv) & mask
    return dv, xv


# -- waveforms -----------------------------------------------------------


@dataclass
class Waveform:
    """Per-cycle values of every net, packed per cycle as (D, X) ints
    indexed by var."""

    net: Netlist
    cycles: int
    vals: list[tuple[int, int]]

    def value_lit(self, lit: int, cycle: int) -> int:
        D, X = self.vals[cycle]
        v = lit >> 1
        if (X >> v) & 1:
            return VX
        bit = (D >> v) & 1
        return bit ^ (lit & 1)

    def value(self, name: str, cycle: int) -> int:
        return self.value_lit(self.net.lookup(name), cycle)


def _norm(v) -> int:
    if isinstance(v, str):
        try:
            return _TEXT_VAL[v]
        except KeyError:
            raise SimError(f"bad value {v!r}") from None
    if v in (V0, V1, VX):
        return v
    raise SimError(f"bad value {v!r}")


def simulate(net: Netlist, input_seq, init_override: dict[str, int] | None = None) -> Waveform:
    """Run the netlist for len(input_seq) cycles.

    ``input_seq`` is one dict per cycle mapping every primary input name
    (black-box outputs included) to 0/1/x.  ``init_override`` pins
    initial register values by name, taking precedence over declared
    inits (unknown for uninitialized registers otherwise).
    """
    n = net.n_vars
    d = [0] * n
    x = [0] * n
    over = init_override or {}
    for r in net.registers:
        v = _norm(over[r.name]) if r.name in over else (
            VX if r.init == Init.UNINIT else (V1 if r.init == Init.ONE else V0))
        d[r.var] = 1 if v == V1 else 0
        x[r.var] = 1 if v == VX else 0

    vals: list[tuple[int, int]] = []
    for cycle, ins in enumerate(input_seq):
        for name, var in net.inputs:
            if name not in ins:
                raise MissingInput(name, cycle)
            v = _norm(ins[name])
            d[var] = 1 if v == V1 else 0
            x[var] = 1 if v == VX else 0
        eval_kleene(net, d, x, 1)
        D = 0
        X = 0
        for v in range(n):
            D |= d[v] << v
            X |= x[v] << v
        vals.append((D, X))
        nxt = [lit_value(d, x, r.next_lit, 1) for r in net.registers]
        for r, (dv, xv) in zip(net.registers, nxt):
            d[r.var] = dv
            x[r.var] = xv
    return Waveform(net, len(vals), vals)


# -- signatures ------------------------------------------------------------


@dataclass
class SignatureTable:
    """Per-var sampled simulation values over R seeded random runs at a
    fixed cycle, with unknowns recorded in a second lane."""

    runs: int
    depth: int
    seed: int
    d: list[int]
    x: list[int]

    def of_lit(self, lit: int) -> tuple[int, int]:
        mask = (1 << self.runs) - 1
        return lit_value(self.d, self.x, lit, mask)

    def canonical(self, lit: int) -> tuple[bool, int, int]:
        """Signature normalized so lane 0's definite value is 0; returns
        (inverted, d, x) enabling matching up to complement."""
        dv, xv = self.of_lit(lit)
        if dv & 1:
            ndv, nxv = self.of_lit(nl.lit_not(lit))
            return True, ndv, nxv
        return False, dv, xv


def random_signatures(net: Netlist, runs: int = 64, depth: int = 0,
                      seed: int = 0) -> SignatureTable:
    """Simulate R random runs in parallel and sample every net at
    cycle ``depth``; deterministic for a given seed."""
    assert runs >= 1
    rng = random.Random(seed)
    mask = (1 << runs) - 1
    n = net.n_vars
    d = [0] * n
    x = [0] * n
    for r in net.registers:
        if r.init == Init.UNINIT:
            x[r.var] = mask
        elif r.init == Init.ONE:
            d[r.var] = mask
    for t in range(depth + 1):
        for _, var in net.inputs:
            d[var] = rng.getrandbits(runs)
            x[var] = 0
        eval_kleene(net, d, x, mask)
        if t == depth:
            break
        nxt = [lit_value(d, x, r.next_lit, mask) for r in net.registers]
        for r, (dv, xv) in zip(net.registers, nxt):
            d[r.var] = dv
            x[r.var] = xv
    return SignatureTable(runs, depth, seed, d, x)


# -- traces ------------------------------------------------------------------


@dataclass
class Trace:
    cycles: int
    inputs: list[dict[str, int]]
    regs: dict[str, int] = field(default_factory=dict)
    # claimed comparisons: cycle -> [(spec name, value, imp name, value, mismatch)]
    outs: dict[int, list[tuple[str, int, str, int, bool]]] = field(default_factory=dict)
    mismatch: tuple[int, str, str] | None = None

    def to_text(self) -> str:
        lines = [f"cycles {self.cycles}"]
        for k in range(self.cycles):
            lines.append(f"@{k}")
            for name in sorted(self.inputs[k]):
                lines.append(f"in {name} {_VAL_TEXT[self.inputs[k][name]]}")
            if k == 0:
                for name in sorted(self.regs):
                    lines.append(f"reg {name} {_VAL_TEXT[self.regs[name]]}")
            for sname, sv, iname, iv, bad in self.outs.get(k, ()):
                tail = " MISMATCH" if bad else ""
                lines.append(f"out {sname}={_VAL_TEXT[sv]} {iname}={_VAL_TEXT[iv]}{tail}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Trace":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("cycles "):
            raise SimError("trace: missing 'cycles N' header")
        cycles = int(lines[0].split()[1])
        t = Trace(cycles, [dict() for _ in range(cycles)])
        k = -1
        for ln in lines[1:]:
            if ln.startswith("@"):
                k = int(ln[1:])
                if not (0 <= k < cycles):
                    raise SimError(f"trace: cycle {k} out of range")
                continue
            parts = ln.split()
            if parts[0] == "in":
                t.inputs[k][parts[1]] = _norm(parts[2])
            elif parts[0] == "reg":
                t.regs[parts[1]] = _norm(parts[2])
            elif parts[0] == "out":
                bad = parts[-1] == "MISMATCH"
                body = parts[1:-1] if bad else parts[1:]
                sname, sv = body[0].rsplit("=", 1)
                iname, iv = body[1].rsplit("=", 1)
                t.outs.setdefault(k, []).append(
                    (sname, _norm(sv), iname, _norm(iv), bad))
                if bad and t.mismatch is None:
                    t.mismatch = (k, sname, iname)
            else:
                raise SimError(f"trace: bad line {ln!r}")
        return t


@dataclass
class ReplayReport:
    first_mismatch: tuple[int, str, str, int, int] | None
    compared_cycles: int
    agrees_with_claim: bool | None  # None when the trace made no claim

    @property
    def mismatch(self) -> bool:
        return self.first_mismatch is not None


def _side_inputs(net: Netlist, side: str, tied_names: dict[str, str],
                 trace: Trace) -> list[dict[str, int]]:
    seq = []
    for k in range(trace.cycles):
        row = {}
        cyc = trace.inputs[k]
        for name, _ in net.inputs:
            if name in tied_names:
                key = tied_names[name]
            else:
                key = f"{side}:{name}"
            if key not in cyc:
                raise MissingInput(key, k)
            row[name] = cyc[key]
        seq.append(row)
    return seq


def replay(spec: Netlist, imp: Netlist, mapping, trace: Trace) -> ReplayReport:
    """Re-simulate both designs under a trace and report the first cycle
    and output pair where the aligned, qualified outputs differ.

    ``mapping`` provides input_pairs, output_pairs (with latencies),
    qualifier text, and unobserved-input markings (see the mapper).
    Symbolic choices embedded in the trace (``reg`` lines, x-source
    inputs) are taken as concrete values.
    """
    spec_tied = {s: s for s, _ in mapping.input_pairs}
    imp_tied = {i: s for s, i in mapping.input_pairs}
    sseq = _side_inputs(spec, "spec", spec_tied, trace)
    iseq = _side_inputs(imp, "imp", imp_tied, trace)

    sreg = {n[len("spec:"):]: v for n, v in trace.regs.items() if n.startswith("spec:")}
    ireg = {n[len("imp:"):]: v for n, v in trace.regs.items() if n.startswith("imp:")}
    wspec = simulate(spec, sseq, sreg)
    wimp = simulate(imp, iseq, ireg)

    pair_names = {(p.spec, p.imp) for p in mapping.output_pairs}
    for rows in trace.outs.values():
        for sname, _, iname, _, _ in rows:
            if (sname, iname) not in pair_names:
                raise UnmappedOutput(f"{sname} / {iname}")

    qual = None
    if mapping.qualifier:
        from seqeq.snl.elaborate import build_expr

        b = nl.Builder()
        env = {}
        for base, bitnames in nl.group_vectors(s for s, _ in mapping.input_pairs).items():
            env[base] = [b.add_input(n) for n in bitnames]
        qlit = build_expr(b, mapping.qualifier, env, "qualifier")
        b.add_output("$q", qlit)
        qnet = b.finish()
        qseq = []
        for k in range(trace.cycles):
            row = {}
            for name, _ in qnet.inputs:
                if name not in trace.inputs[k]:
                    raise MissingInput(name, k)
                row[name] = trace.inputs[k][name]
            qseq.append(row)
        qual = simulate(qnet, qseq)

    if not mapping.output_pairs:
        raise UnmappedOutput("mapping has no output pairs")
    first = None
    compared = 0
    for t in range(trace.cycles):
        if qual is not None and qual.value("$q", t) != V1:
            continue
        for pair in mapping.output_pairs:
            ls, li = pair.latency
            maxlat = max(ls, li)
            if t < maxlat:
                continue
            vs = wspec.value(pair.spec, t - maxlat + ls)
            vi = wimp.value(pair.imp, t - maxlat + li)
            compared += 1
            if vs != vi and first is None:
                first = (t, pair.spec, pair.imp, vs, vi)
        if first is not None:
            break
    max_needed = max(max(p.latency) for p in mapping.output_pairs)
    if trace.cycles <= max_needed and trace.mismatch is not None:
        raise TraceTooShort(f"{trace.cycles} cycles, first comparison at {max_needed}")

    agrees = None
    if trace.mismatch is not None:
        k, sname, iname = trace.mismatch
        agrees = bool(first) and first[0] == k and (first[1], first[2]) == (sname, iname)
    return ReplayReport(first, compared, agrees)
