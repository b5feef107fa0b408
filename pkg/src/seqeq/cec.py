"""Combinational equivalence: miter construction and SAT sweeping.

Applies only to state-matching comparisons: every register on both
sides must be in a mapped pair, or the miter cannot be cut and the
sequential engine is the right tool (UnmappedState says so).  Paired
registers become shared pseudo-inputs, and the miter exposes one XOR
bit per output pair plus one per paired next-state function, so an
all-zero miter is exactly combinational equivalence under the cut.

Sweeping groups internal nodes by simulation signature and proves or
refutes candidate equivalences fanin-first; proven merges become
equality clauses that make the final per-output checks near-trivial.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from seqeq import netlist as nl
from seqeq import sim
from seqeq.netlist import Builder, Netlist, group_vectors, import_cone, mklit
from seqeq.sat import FREE_INIT, SAT, UNKNOWN, UNSAT, Solver, Unroller
from seqeq.sec import _expr_lit
from seqeq.task import (EquivalenceTask, OutputReport, Status, TaskError,
                        Verdict)


class UnmappedState(TaskError):
    """A register is not in the mapping: use the sequential engine."""


@dataclass
class Miter:
    net: Netlist  # purely combinational: registers are cut
    out_bits: list[tuple[str, str, str]]    # (net name, spec out, imp out)
    next_bits: list[tuple[str, str, str]]   # (net name, spec reg, imp reg)
    constraint_names: list[str]
    cut_regs: list[tuple[str, str, str]]    # (input name, spec reg, imp reg)


def build_miter(task: EquivalenceTask) -> Miter:
    """Tie inputs, cut mapped register pairs into shared pseudo-inputs,
    and XOR each output pair and each next-state pair."""
    m = task.mapping
    spec, imp = task.spec, task.imp
    for p in m.output_pairs:
        if p.latency != (0, 0):
            raise TaskError(f"latency {p.latency} on {p.spec}: combinational "
                            "comparison is same-cycle only")
    spec_regs = {r.name: r for r in spec.registers}
    imp_regs = {r.name: r for r in imp.registers}
    paired_spec = {p.spec for p in m.reg_pairs}
    paired_imp = {p.imp for p in m.reg_pairs}
    for name in spec_regs:
        if name not in paired_spec:
            raise UnmappedState(f"spec register {name} is unmapped")
    for name in imp_regs:
        if name not in paired_imp:
            raise UnmappedState(f"imp register {name} is unmapped")

    b = Builder()
    spec_inputs = {n: v for n, v in spec.inputs}
    imp_inputs = {n: v for n, v in imp.inputs}
    spec_sub: dict[int, int] = {}
    imp_sub: dict[int, int] = {}
    tied: dict[str, int] = {}
    for s, i in m.input_pairs:
        lit = b.add_input(s)
        tied[s] = lit
        spec_sub[spec_inputs[s]] = lit
        imp_sub[imp_inputs[i]] = lit
    for side, inputs, sub, net in (("spec", spec_inputs, spec_sub, spec),
                                   ("imp", imp_inputs, imp_sub, imp)):
        for n, v in inputs.items():
            if v not in sub:
                if (side, n) not in m.unobserved_inputs:
                    raise TaskError(f"{side} input {n} is neither mapped nor "
                                    "marked unobserved")
                sub[v] = b.add_input(f"{side}:{n}")
        for bb in net.blackboxes:
            for n, v in bb.outputs:
                if v not in sub:
                    sub[v] = b.add_input(f"{side}:{n}")

    cut_regs = []
    for p in m.reg_pairs:
        lit = b.add_input(f"cut:{p.spec}")
        cut_regs.append((f"cut:{p.spec}", p.spec, p.imp))
        spec_sub[spec_regs[p.spec].var] = lit
        imp_sub[imp_regs[p.imp].var] = lit

    for side, net, sub in (("spec", spec, spec_sub), ("imp", imp, imp_sub)):
        roots = [lit for _, lit in net.outputs]
        roots += [r.next_lit for r in net.registers]
        roots += [lit for bb in net.blackboxes for _, lit in bb.inputs]
        sub = import_cone(b, net, sub, roots)
        for n, lit in net.names.items():
            if (lit >> 1) in sub:
                b.alias(f"{side}:{n}", sub[lit >> 1] ^ (lit & 1))
        if side == "spec":
            spec_sub = sub
        else:
            imp_sub = sub

    def name_lit(side_sub, net, name):
        lit = net.lookup(name)
        return side_sub[lit >> 1] ^ (lit & 1)

    out_bits = []
    for p in m.output_pairs:
        x = b.xor_(name_lit(spec_sub, spec, p.spec), name_lit(imp_sub, imp, p.imp))
        name = f"$miter.o.{p.spec}"
        b.set_name(name, x)
        b.add_output(name, x)
        out_bits.append((name, p.spec, p.imp))
    next_bits = []
    for p in m.reg_pairs:
        sx = spec_regs[p.spec].next_lit
        ix = imp_regs[p.imp].next_lit
        x = b.xor_(spec_sub[sx >> 1] ^ (sx & 1), imp_sub[ix >> 1] ^ (ix & 1))
        name = f"$miter.n.{p.spec}"
        b.set_name(name, x)
        b.add_output(name, x)
        next_bits.append((name, p.spec, p.imp))

    env = {base: [tied[n] for n in bits]
           for base, bits in group_vectors(tied).items()}

    def state_lookup(name: str):
        lit = b.names.get(name)
        return None if lit is None else [lit]

    constraint_names = []
    for idx, text in enumerate(task.constraints):
        lit, _ = _expr_lit(b, text, env, state_lookup, "constraint")
        name = f"$constr.{idx}"
        b.set_name(name, lit)
        constraint_names.append(name)

    return Miter(b.finish(), out_bits, next_bits, constraint_names, cut_regs)


def check_cec(task: EquivalenceTask, sweep_log: list | None = None) -> Verdict:
    """SAT sweeping, then one final check per compared bit.

    A NOT_EQUIVALENT verdict carries a single-cycle trace whose ``reg``
    lines pin the cut-point state.  An unsatisfiable constraint set
    yields VACUOUS, never EQUIVALENT.  ``sweep_log`` (when given)
    collects (lit_a, lit_b) pairs for every merge, for auditing.
    """
    t0 = time.monotonic()
    miter = build_miter(task)
    net = miter.net
    solver = Solver(seed=None)
    un = Unroller(solver, net, FREE_INIT)
    un.add_frame()
    for cname in miter.constraint_names:
        solver.add_clause([un.lit(net.lookup(cname), 0)])
    res = solver.solve([], task.budgets.conflicts)
    if res.status == UNSAT:
        return Verdict(Status.VACUOUS, reason="constraints are unsatisfiable",
                       wall_time=time.monotonic() - t0)
    if res.status == UNKNOWN:
        return Verdict(Status.INCONCLUSIVE, reason="conflict budget exhausted",
                       wall_time=time.monotonic() - t0)

    budget_hit = _sweep(net, un, solver, task, sweep_log)

    per_output: list[OutputReport] = []
    trace = None
    reason = ""
    failed_pair = None
    for kind, bits in (("out", miter.out_bits), ("next", miter.next_bits)):
        for name, sname, iname in bits:
            lit = net.lookup(name)
            if lit == nl.FALSE:
                result = "proved"
            else:
                r = solver.solve([un.lit(lit, 0)], task.budgets.conflicts)
                if r.status == UNSAT:
                    result = "proved"
                elif r.status == UNKNOWN:
                    budget_hit = True
                    result = "unknown"
                else:
                    result = "failed"
                    if trace is None:
                        trace = _cut_trace(miter, un, r.model)
                        failed_pair = (kind, sname, iname)
                        if kind == "next":
                            reason = (f"next-state functions differ for "
                                      f"register pair {sname}/{iname}")
            if kind == "out":
                per_output.append(OutputReport(sname, iname, (0, 0), result))
    if trace is not None:
        return Verdict(Status.NOT_EQUIVALENT, trace=trace, per_output=per_output,
                       reason=reason, wall_time=time.monotonic() - t0)
    if budget_hit or any(o.result == "unknown" for o in per_output):
        return Verdict(Status.INCONCLUSIVE, per_output=per_output,
                       reason="conflict budget exhausted",
                       wall_time=time.monotonic() - t0)
    return Verdict(Status.EQUIVALENT, per_output=per_output, induction_k=None,
                   wall_time=time.monotonic() - t0)


def _sweep(net: Netlist, un: Unroller, solver: Solver, task: EquivalenceTask,
           sweep_log: list | None) -> bool:
    """Merge signature-equal internal nodes that SAT proves equivalent
    (under the constraints), fanin-first, as equality clauses."""
    sigs = sim.random_signatures(net, runs=256, depth=0,
                                 seed=task.budgets.seed)
    classes: dict[tuple[int, int], list[int]] = {}
    mask = (1 << 256) - 1
    # seed the constant class so contradictions merge to 0
    classes[(0, 0)] = [nl.FALSE]
    budget_hit = False
    budget = min(task.budgets.conflicts, task.budgets.lemma_conflicts)
    for v in net.topo_ands():
        inv, d, x = sigs.canonical(mklit(v))
        lit = mklit(v, inv)
        key = (d, x)
        reps = classes.setdefault(key, [])
        merged = False
        for rep in reps:
            a = un.lit(lit, 0)
            blit = un.lit(rep, 0)
            r1 = solver.solve([a, -blit], budget)
            if r1.status == UNKNOWN:
                budget_hit = True
                continue
            if r1.status == SAT:
                continue
            r2 = solver.solve([-a, blit], budget)
            if r2.status == UNKNOWN:
                budget_hit = True
                continue
            if r2.status == SAT:
                continue
            solver.add_clause([-a, blit])
            solver.add_clause([a, -blit])
            if sweep_log is not None:
                sweep_log.append((lit, rep))
            merged = True
            break
        if not merged:
            reps.append(lit)
    return budget_hit


def _cut_trace(miter: Miter, un: Unroller, model) -> sim.Trace:
    net = miter.net
    cut_names = {name for name, _, _ in miter.cut_regs}

    def val(name, var):
        e = un.lit(mklit(var), 0)
        return int(model[abs(e)] if e > 0 else not model[abs(e)])

    inputs = {}
    cuts = {}
    for n, v in net.inputs:
        if n in cut_names:
            cuts[n] = val(n, v)
        else:
            inputs[n] = val(n, v)
    regs = {}
    for name, sname, iname in miter.cut_regs:
        regs[f"spec:{sname}"] = cuts[name]
        regs[f"imp:{iname}"] = cuts[name]

    wave = sim.simulate(net, [dict(inputs, **cuts)])
    outs = []
    mismatch = None
    for name, sname, iname in miter.out_bits:
        vs = wave.value(f"spec:{sname}", 0)
        vi = wave.value(f"imp:{iname}", 0)
        bad = vs != vi
        outs.append((sname, vs, iname, vi, bad))
        if bad and mismatch is None:
            mismatch = (0, sname, iname)
    return sim.Trace(1, [inputs], regs, {0: outs}, mismatch)
