"""Sequential equivalence: product machine, BMC falsification, and
k-induction proof with helper lemmas, constraints, latency alignment,
and case splitting.

The product machine runs SPEC and IMP in lockstep over tied inputs.
Output pairs with unequal declared latencies get a delay line of
|l_imp - l_spec| registers on the lower-latency side, and a warm-up
counter masks comparisons before cycle max(l_spec, l_imp).  Each miter
bit is the aligned XOR gated by the warm-up counter and the optional
compare qualifier; the single bad output is their OR.  Constraints are
assumed at every frame, helper lemmas (XNOR of proven point pairs) in
induction step frames.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from seqeq import netlist as nl
from seqeq import sim
from seqeq.mapper import Mapping, OutputPair, RegPair, Tag
from seqeq.netlist import (Builder, Init, Netlist, cone_of_influence,
                           group_vectors, import_cone, lit_not, mklit)
from seqeq.sat import (CONSTRAIN_INIT, FREE_INIT, SAT, UNKNOWN, UNSAT,
                       Solver, Unroller)
from seqeq.snl.elaborate import ExprEval, WidthMismatch
from seqeq.snl.parser import parse_expr_text
from seqeq.task import (Budgets, EquivalenceTask, OutputReport, Status,
                        TaskError, Verdict)


class LatencyMismatchUnspecified(TaskError):
    pass


class IncompleteSplit(TaskError):
    def __init__(self, witness: dict[str, int]):
        self.witness = witness
        pretty = ", ".join(f"{k}={v}" for k, v in sorted(witness.items()))
        super().__init__(f"case split does not cover: {pretty}")


@dataclass
class ProductMachine:
    net: Netlist
    out_pairs: list[OutputPair]
    miter_names: list[str]           # one per output pair, same order
    constraint_names: list[str]
    qualifier_name: str | None
    point_names: dict[tuple[str, str], str]  # helper point pair -> xnor net
    cand_names: dict[tuple[str, str], str]   # register pair -> xnor net
    tied_names: list[str]
    free_names: list[tuple[str, str]]        # (side, original name)
    uninit_regs: list[str]                   # product register names free at t=0
    state_constraints: list[str] = field(default_factory=list)
    max_latency: int = 0
    bad_name: str = "$bad"


def _import_side(b: Builder, net: Netlist, side: str, input_lits: dict[int, int]):
    """Copy one design into the product builder; returns (sub, regmap)."""
    sub = dict(input_lits)
    regmap = {}
    for r in net.registers:
        sub[r.var] = regmap[r.var] = b.add_register(f"{side}:{r.name}", r.init)
    roots = [lit for _, lit in net.outputs]
    roots += [r.next_lit for r in net.registers]
    roots += [lit for bb in net.blackboxes for _, lit in bb.inputs]
    sub = import_cone(b, net, sub, roots)
    for r in net.registers:
        b.set_next(regmap[r.var], sub[r.next_lit >> 1] ^ (r.next_lit & 1))
    for n, lit in net.names.items():
        if (lit >> 1) in sub:
            b.alias(f"{side}:{n}", sub[lit >> 1] ^ (lit & 1))
    return sub


def _expr_lit(b: Builder, text: str, env: dict[str, list[int]],
              extra_lookup=None, what: str = "expression") -> tuple[int, bool]:
    """Elaborate an expression; returns (lit, used_non_input_nets)."""
    e = parse_expr_text(text)
    used_state = [False]

    def lookup_bits(name):
        if name in env:
            return env[name]
        if extra_lookup is not None:
            bits = extra_lookup(name)
            if bits is not None:
                used_state[0] = True
                return bits
        return None

    def lookup_width(name, lsb=False):
        bits = lookup_bits(name)
        if bits is None:
            return None if not lsb else 0
        return 0 if lsb else len(bits)

    ev = ExprEval(b, lookup_bits, lookup_width)
    bits = ev.bits(e, None)
    if len(bits) != 1:
        raise WidthMismatch(f"{what} {text!r} has width {len(bits)}, expected 1")
    return bits[0], used_state[0]


def build_product(task: EquivalenceTask,
                  extra_points: list[tuple[str, str]] = ()) -> ProductMachine:
    """Construct the product machine for a task.

    ``extra_points`` adds XNOR nets for additional point pairs (used by
    the lemma provers) without changing the bad output.
    """
    m = task.mapping
    spec, imp = task.spec, task.imp
    b = Builder()

    tied_spec: dict[str, int] = {}
    spec_inputs = {n: v for n, v in spec.inputs}
    imp_inputs = {n: v for n, v in imp.inputs}
    spec_in_lits: dict[int, int] = {}
    imp_in_lits: dict[int, int] = {}
    for s, i in m.input_pairs:
        if s not in spec_inputs:
            raise TaskError(f"mapped input {s} is not a spec input")
        if i not in imp_inputs:
            raise TaskError(f"mapped input {i} is not an imp input")
        lit = b.add_input(s)
        tied_spec[s] = lit
        spec_in_lits[spec_inputs[s]] = lit
        imp_in_lits[imp_inputs[i]] = lit
    free_names: list[tuple[str, str]] = []
    for side, net, lits, inputs in (("spec", spec, spec_in_lits, spec_inputs),
                                    ("imp", imp, imp_in_lits, imp_inputs)):
        for n, v in inputs.items():
            if v in lits:
                continue
            if (side, n) not in m.unobserved_inputs:
                raise TaskError(
                    f"{side} input {n} is neither mapped nor marked unobserved")
            lits[v] = b.add_input(f"{side}:{n}")
            free_names.append((side, n))
        for bb in net.blackboxes:
            for n, v in bb.outputs:
                if v not in lits:
                    lits[v] = b.add_input(f"{side}:{n}")
                    free_names.append((side, n))

    _import_side(b, spec, "spec", spec_in_lits)
    _import_side(b, imp, "imp", imp_in_lits)

    def plookup(name: str) -> int:
        try:
            return b.names[name]
        except KeyError:
            raise TaskError(f"net {name} not found in the product") from None

    # per-pair latency alignment and the warm-up chain
    if not m.output_pairs:
        raise TaskError("mapping has no output pairs")
    maxlat = max(max(p.latency) for p in m.output_pairs)
    valid_chain = [nl.TRUE]
    for k in range(1, maxlat + 1):
        r = b.add_register(f"$valid.{k}", Init.ZERO)
        b.set_next(r, valid_chain[k - 1])
        valid_chain.append(r)

    env = {base: [tied_spec[n] for n in bits]
           for base, bits in group_vectors(tied_spec).items()}

    def state_lookup(name: str):
        lit = b.names.get(name)
        if lit is None:
            return None
        return [lit]

    qual_lit = nl.TRUE
    qual_name = None
    if m.qualifier:
        qual_lit, used_state = _expr_lit(b, m.qualifier, env, None, "qualifier")
        qual_name = "$q"
        b.set_name("$q", qual_lit)

    state_constraints = []
    constraint_names = []
    for idx, text in enumerate(task.constraints):
        lit, used_state = _expr_lit(b, text, env, state_lookup, "constraint")
        name = f"$constr.{idx}"
        b.set_name(name, lit)
        constraint_names.append(name)
        if used_state:
            state_constraints.append(text)

    miter_names = []
    for p in m.output_pairs:
        ls, li = p.latency
        s_lit = plookup(f"spec:{p.spec}")
        i_lit = plookup(f"imp:{p.imp}")
        if ls < li:
            for j in range(li - ls):
                r = b.add_register(f"$dly.{p.spec}.{j}", Init.ZERO)
                b.set_next(r, s_lit)
                s_lit = r
        elif li < ls:
            for j in range(ls - li):
                r = b.add_register(f"$dly.{p.imp}.{j}", Init.ZERO)
                b.set_next(r, i_lit)
                i_lit = r
        bit = b.xor_(s_lit, i_lit)
        bit = b.and_(bit, valid_chain[max(ls, li)])
        bit = b.and_(bit, qual_lit)
        name = f"$miter.{p.spec}"
        b.set_name(name, bit)
        miter_names.append(name)
    bad = b.or_many(b.names[n] for n in miter_names)
    b.set_name("$bad", bad)
    b.add_output("$bad", bad)

    point_names: dict[tuple[str, str], str] = {}
    for idx, (s, i) in enumerate(list(task.helpers) + list(extra_points)):
        if (s, i) in point_names:
            continue
        x = b.xnor_(plookup(f"spec:{s}"), plookup(f"imp:{i}"))
        name = f"$eq.pt.{idx}"
        b.set_name(name, x)
        point_names[(s, i)] = name
    cand_names: dict[tuple[str, str], str] = {}
    for rp in m.reg_pairs:
        x = b.xnor_(plookup(f"spec:{rp.spec}"), plookup(f"imp:{rp.imp}"))
        name = f"$eq.reg.{rp.spec}"
        b.set_name(name, x)
        cand_names[(rp.spec, rp.imp)] = name

    prod = b.finish()
    uninit = [r.name for r in prod.registers if r.init == Init.UNINIT]
    return ProductMachine(
        net=prod,
        out_pairs=list(m.output_pairs),
        miter_names=miter_names,
        constraint_names=constraint_names,
        qualifier_name=qual_name,
        point_names=point_names,
        cand_names=cand_names,
        tied_names=[s for s, _ in m.input_pairs],
        free_names=free_names,
        uninit_regs=uninit,
        state_constraints=state_constraints,
        max_latency=maxlat,
    )


# -- obligations and the incremental engine --------------------------------


@dataclass
class _Obligation:
    net: Netlist
    bad_lit: int
    assume_lits: list[int]  # held 1 every frame
    step_lits: list[int]    # held 1 in induction step frames only
    miter_lits: list[tuple[str, int]] = field(default_factory=list)


def _make_obligation(product: ProductMachine, target: str,
                     step_names: list[str], invert_target: bool) -> _Obligation:
    targets = [target] + product.constraint_names + list(step_names)
    if target == product.bad_name:
        targets += product.miter_names
    cone = cone_of_influence(product.net, targets)
    bad = cone.lookup(target)
    if invert_target:
        bad = lit_not(bad)
    return _Obligation(
        net=cone,
        bad_lit=bad,
        assume_lits=[cone.lookup(n) for n in product.constraint_names],
        step_lits=[cone.lookup(n) for n in step_names],
        miter_lits=([(n, cone.lookup(n)) for n in product.miter_names]
                    if target == product.bad_name else []),
    )


class _Runner:
    """Paired incremental solvers: one unrolling from the initial states
    for BMC, one from free states for induction steps."""

    def __init__(self, ob: _Obligation, budgets: Budgets):
        self.ob = ob
        self.budgets = budgets
        self.bmc_solver = Solver(seed=None)
        self.bmc = Unroller(self.bmc_solver, ob.net, CONSTRAIN_INIT)
        self.step_solver = Solver(seed=None)
        self.step = Unroller(self.step_solver, ob.net, FREE_INIT)
        self._sp_pairs: set[tuple[int, int]] = set()
        self.budget_hit = False

    def _extend(self, unroller, solver, upto: int, with_step: bool):
        while len(unroller.map) <= upto:
            f = unroller.add_frame()
            for l in self.ob.assume_lits:
                solver.add_clause([unroller.lit(l, f)])
            if with_step:
                for l in self.ob.step_lits:
                    solver.add_clause([unroller.lit(l, f)])

    def bmc_check(self, k: int):
        self._extend(self.bmc, self.bmc_solver, k, False)
        res = self.bmc_solver.solve([self.bmc.lit(self.ob.bad_lit, k)],
                                    self.budgets.conflicts)
        if res.status == UNKNOWN:
            self.budget_hit = True
        return res

    def step_check(self, k: int, target_lit: int | None = None, budget=None):
        """k bad-free frames (0..k-1) imply a bad-free frame k."""
        self._extend(self.step, self.step_solver, k, True)
        bad = self.ob.bad_lit if target_lit is None else target_lit
        assumptions = [-self.step.lit(self.ob.bad_lit, j) for j in range(k)]
        assumptions.append(self.step.lit(bad, k))
        res = self.step_solver.solve(assumptions,
                                     budget or self.budgets.conflicts)
        if res.status == UNKNOWN:
            self.budget_hit = True
        return res

    def add_simple_path(self, upto: int):
        """No two step frames may share a register state."""
        regs = self.ob.net.registers
        if not regs:
            return
        self._extend(self.step, self.step_solver, upto, True)
        s = self.step_solver
        for i in range(upto + 1):
            for j in range(i + 1, upto + 1):
                if (i, j) in self._sp_pairs:
                    continue
                self._sp_pairs.add((i, j))
                diffs = []
                for r in regs:
                    a = self.step.lit(mklit(r.var), i)
                    c = self.step.lit(mklit(r.var), j)
                    d = s.new_var()
                    s.add_clause([-d, a, c])
                    s.add_clause([-d, -a, -c])
                    s.add_clause([d, -a, c])
                    s.add_clause([d, a, -c])
                    diffs.append(d)
                s.add_clause(diffs)


def _decode_trace(product: ProductMachine, ob: _Obligation,
                  runner: _Runner, frame: int, model) -> sim.Trace:
    """Turn a BMC model at ``frame`` into a replayable trace with the
    claimed aligned comparisons."""
    cone_inputs = {n for n, _ in ob.net.inputs}
    cone_regs = {r.name for r in ob.net.registers}

    def val(net_lit, k):
        e = runner.bmc.lit(net_lit, k)
        v = model[abs(e)]
        return int(v if e > 0 else not v)

    cone_in_vars = dict(ob.net.inputs)
    cone_reg_vars = {r.name: r.var for r in ob.net.registers}
    inputs = []
    for k in range(frame + 1):
        row = {}
        for n, _ in product.net.inputs:
            if n in cone_inputs:
                row[n] = val(mklit(cone_in_vars[n]), k)
            else:
                row[n] = 0
        inputs.append(row)
    regs = {}
    for r in product.net.registers:
        if r.init != Init.UNINIT:
            continue
        if r.name in cone_regs:
            regs[r.name] = val(mklit(cone_reg_vars[r.name]), 0)
        else:
            regs[r.name] = 0

    wave = sim.simulate(product.net, inputs, regs)
    outs: dict[int, list] = {}
    mismatch = None
    for t in range(frame + 1):
        if product.qualifier_name is not None and \
                wave.value(product.qualifier_name, t) != sim.V1:
            continue
        for p in product.out_pairs:
            ls, li = p.latency
            maxlat = max(ls, li)
            if t < maxlat:
                continue
            vs = wave.value(f"spec:{p.spec}", t - maxlat + ls)
            vi = wave.value(f"imp:{p.imp}", t - maxlat + li)
            bad = vs != vi
            outs.setdefault(t, []).append((p.spec, vs, p.imp, vi, bad))
            if bad and mismatch is None:
                mismatch = (t, p.spec, p.imp)
    trace = sim.Trace(frame + 1, inputs, regs, outs, mismatch)
    return trace


# -- vacuity ------------------------------------------------------------------


def _vacuity(product: ProductMachine, budgets: Budgets) -> str | None:
    """A reason string when the constraints (or qualifier) admit no
    behavior at all; None when the task is meaningful."""
    if not product.constraint_names and product.qualifier_name is None:
        return None
    targets = list(product.constraint_names)
    if product.qualifier_name is not None:
        targets.append(product.qualifier_name)
    cone = cone_of_influence(product.net, targets)
    solver = Solver(seed=None)
    un = Unroller(solver, cone, FREE_INIT)
    un.add_frame()
    assume = [un.lit(cone.lookup(n), 0) for n in product.constraint_names]
    if assume:
        res = solver.solve(assume, budgets.conflicts)
        if res.status == UNSAT:
            return "constraints are unsatisfiable"
    if product.qualifier_name is not None:
        res = solver.solve(
            assume + [un.lit(cone.lookup(product.qualifier_name), 0)],
            budgets.conflicts)
        if res.status == UNSAT:
            return "compare qualifier is never true under the constraints"
    return None


# -- lemma proving (register pairs and helper points) -----------------------


@dataclass
class PointResult:
    spec: str
    imp: str
    proven: bool
    k: int | None = None
    falsified_cycle: int | None = None
    reason: str = ""


def _prove_point(product: ProductMachine, xnor_name: str,
                 proven_names: list[str], budgets: Budgets) -> PointResult:
    ob = _make_obligation(product, xnor_name, proven_names, invert_target=True)
    runner = _Runner(ob, budgets)
    for d in range(0, max(budgets.lemma_bmc, budgets.lemma_k) + 1):
        if d <= budgets.lemma_bmc:
            res = runner.bmc_check(d)
            if res.status == SAT:
                return PointResult("", "", False, falsified_cycle=d,
                                   reason=f"differs at cycle {d}")
        if 1 <= d <= budgets.lemma_k:
            res = runner.step_check(d, budget=budgets.lemma_conflicts)
            if res.status == UNSAT:
                return PointResult("", "", True, k=d)
    reason = "budget exhausted" if runner.budget_hit else \
        f"not inductive up to k={budgets.lemma_k}"
    return PointResult("", "", False, reason=reason)


def _prove_points_waves(product: ProductMachine,
                        points: list[tuple[tuple[str, str], str]],
                        budgets: Budgets, jobs: int
                        ) -> tuple[list[tuple[str, str]], dict]:
    """Prove point-pair XNOR invariants in waves; each wave may assume
    everything proven in earlier waves.  Returns (proven pair list in
    proof order, results per pair)."""
    results: dict[tuple[str, str], PointResult] = {}
    proven: list[tuple[str, str]] = []
    proven_names: list[str] = []
    pending = list(points)
    while pending:
        def attempt(item):
            (pair, name) = item
            r = _prove_point(product, name, list(proven_names), budgets)
            r.spec, r.imp = pair
            return (pair, name, r)

        if jobs > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                outcomes = list(ex.map(attempt, pending))
        else:
            outcomes = [attempt(it) for it in pending]
        newly = []
        still = []
        for pair, name, r in outcomes:
            results[pair] = r
            if r.proven:
                newly.append((pair, name))
            elif r.falsified_cycle is None:
                still.append((pair, name))  # retry with more lemmas
        for pair, name in newly:
            proven.append(pair)
            proven_names.append(name)
        if not newly:
            break
        pending = still
    return proven, results


def prove_helpers(task: EquivalenceTask,
                  candidate_points: list[tuple[str, str]] | None = None
                  ) -> tuple[list[tuple[str, str]], dict]:
    """Prove candidate (spec net, imp net) equalities on cone-reduced
    sub-products; proven ones can be assumed in downstream induction
    steps.  Unprovable candidates are discarded with a reason."""
    points = list(candidate_points if candidate_points is not None
                  else task.helpers)
    if not points:
        return [], {}
    t = EquivalenceTask(task.spec, task.imp, task.mapping, task.constraints,
                        helpers=points, budgets=task.budgets)
    product = build_product(t)
    items = [(p, product.point_names[p]) for p in points if p in product.point_names]
    return _prove_points_waves(product, items, task.budgets, task.budgets.jobs)


def refine_mapping_impl(task: EquivalenceTask) -> Mapping:
    m = task.mapping
    cands = sorted((p for p in m.reg_pairs if p.tag == Tag.CANDIDATE),
                   key=lambda p: p.spec)
    if not cands:
        return m
    product = build_product(task)
    items = [((p.spec, p.imp), product.cand_names[(p.spec, p.imp)]) for p in cands]
    proven, results = _prove_points_waves(product, items, task.budgets,
                                          task.budgets.jobs)
    for p in cands:
        r = results.get((p.spec, p.imp))
        if r is None:
            continue
        if r.proven:
            p.tag = Tag.PROVEN
            p.note = f"k={r.k}"
        elif r.falsified_cycle is not None:
            p.tag = Tag.DROPPED
            p.note = f"differs at cycle {r.falsified_cycle}"
        elif r.reason == "budget exhausted":
            p.note = "budget exhausted; left candidate"
        else:
            p.tag = Tag.DROPPED
            p.note = "no differing trace constructed (induction failure)"
    return m


# -- the public engines -------------------------------------------------------


def _final_runner(task: EquivalenceTask, proven_points: list[tuple[str, str]]
                  ) -> tuple[ProductMachine, _Runner, list[tuple[str, str]]]:
    assumed = [(p.spec, p.imp) for p in task.mapping.proven_pairs()]
    points = list(dict.fromkeys(list(proven_points) + assumed))
    t = EquivalenceTask(task.spec, task.imp, task.mapping, task.constraints,
                        helpers=points, budgets=task.budgets)
    product = build_product(t)
    step_names = [product.point_names[p] for p in points
                  if p in product.point_names]
    ob = _make_obligation(product, product.bad_name, step_names,
                          invert_target=False)
    return product, _Runner(ob, task.budgets), points


def bmc(task: EquivalenceTask, max_depth: int | None = None) -> Verdict:
    """Bounded falsification: frames 0..max_depth from the initial
    states; the first satisfiable frame yields a counterexample."""
    t0 = time.monotonic()
    depth = task.budgets.bmc_depth if max_depth is None else max_depth
    product, runner, _ = _final_runner(task, [])
    vac = _vacuity(product, task.budgets)
    if vac:
        return Verdict(Status.VACUOUS, reason=vac, wall_time=time.monotonic() - t0)
    for d in range(depth + 1):
        res = runner.bmc_check(d)
        if res.status == SAT:
            trace = _decode_trace(product, runner.ob, runner, d, res.model)
            return Verdict(Status.NOT_EQUIVALENT, trace=trace, bmc_depth=d,
                           per_output=_per_output(product, trace),
                           wall_time=time.monotonic() - t0)
        if res.status == UNKNOWN:
            return Verdict(Status.INCONCLUSIVE, bmc_depth=d - 1,
                           reason="conflict budget exhausted",
                           wall_time=time.monotonic() - t0)
    return Verdict(Status.INCONCLUSIVE, bmc_depth=depth,
                   reason="no counterexample within the bound",
                   wall_time=time.monotonic() - t0)


def _per_output(product: ProductMachine, trace: sim.Trace | None,
                proved: bool = False) -> list[OutputReport]:
    out = []
    bad_pair = trace.mismatch[1:] if trace and trace.mismatch else None
    for p in product.out_pairs:
        if proved:
            r = "proved"
        elif bad_pair == (p.spec, p.imp):
            r = "failed"
        else:
            r = "unknown"
        out.append(OutputReport(p.spec, p.imp, p.latency, r))
    return out


def k_induction(task: EquivalenceTask, k_max: int | None = None,
                proven_points: list[tuple[str, str]] = ()) -> Verdict:
    """Interleaved base/step search: for growing k, check the base case
    by BMC and whether k clean, constraint- and helper-satisfying free
    frames force a clean frame k; adds pairwise state distinctness as a
    last resort before giving up."""
    t0 = time.monotonic()
    kmax = task.budgets.k_max if k_max is None else k_max
    depth = max(task.budgets.bmc_depth, kmax)
    product, runner, points = _final_runner(task, list(proven_points))
    vac = _vacuity(product, task.budgets)
    if vac:
        return Verdict(Status.VACUOUS, reason=vac, wall_time=time.monotonic() - t0)
    reached_bmc = -1
    for d in range(depth + 1):
        if d <= task.budgets.bmc_depth:
            res = runner.bmc_check(d)
            if res.status == SAT:
                trace = _decode_trace(product, runner.ob, runner, d, res.model)
                return Verdict(Status.NOT_EQUIVALENT, trace=trace, bmc_depth=d,
                               per_output=_per_output(product, trace),
                               wall_time=time.monotonic() - t0)
            if res.status == UNKNOWN:
                break
            reached_bmc = d
        if 1 <= d <= kmax and reached_bmc >= d - 1:
            res = runner.step_check(d)
            if res.status == UNSAT:
                return Verdict(Status.EQUIVALENT, induction_k=d,
                               helpers_used=points,
                               per_output=_per_output(product, None, True),
                               wall_time=time.monotonic() - t0)
    if kmax >= 1 and reached_bmc >= kmax - 1 and not runner.budget_hit:
        runner.add_simple_path(kmax)
        res = runner.step_check(kmax)
        if res.status == UNSAT:
            return Verdict(Status.EQUIVALENT, induction_k=kmax,
                           helpers_used=points,
                           per_output=_per_output(product, None, True),
                           reason="simple-path strengthening",
                           wall_time=time.monotonic() - t0)
    hardest = _hardest_outputs(product, runner, min(kmax, max(1, reached_bmc)))
    return Verdict(Status.INCONCLUSIVE, bmc_depth=reached_bmc, induction_k=kmax,
                   hardest=hardest,
                   reason=("conflict budget exhausted" if runner.budget_hit
                           else "not k-inductive within the bound"),
                   wall_time=time.monotonic() - t0)


def _hardest_outputs(product: ProductMachine, runner: _Runner, k: int) -> list[str]:
    if k < 1:
        return [p.spec for p in product.out_pairs]
    hardest = []
    for (name, lit), p in zip(runner.ob.miter_lits, product.out_pairs):
        res = runner.step_check(k, target_lit=lit, budget=2000)
        if res.status != UNSAT:
            hardest.append(p.spec)
    return hardest


def case_split(task: EquivalenceTask, cases: dict[str, str] | None = None) -> Verdict:
    """Check completeness of the case predicates, then run one sub-task
    per case with the predicate held as a constraint every cycle."""
    t0 = time.monotonic()
    cases = dict(cases if cases is not None else task.cases)
    if not cases:
        raise TaskError("case split with no cases")
    base = EquivalenceTask(task.spec, task.imp, task.mapping, task.constraints,
                           task.helpers, {}, task.budgets, task.refine)
    product = build_product(base)

    # completeness: constraints and no case predicate true is unsatisfiable
    bb = Builder()
    env = {}
    tied = {}
    for name, _ in product.net.inputs:
        if name in product.tied_names:
            tied[name] = bb.add_input(name)
    env = {basename: [tied[n] for n in bits]
           for basename, bits in group_vectors(tied).items()}
    none_lit = nl.TRUE
    for cname in sorted(cases):
        lit, _ = _expr_lit(bb, cases[cname], env, None, f"case {cname}")
        none_lit = bb.and_(none_lit, lit_not(lit))
    constrs = []
    for text in task.constraints:
        lit, _ = _expr_lit(bb, text, env, None, "constraint")
        constrs.append(lit)
    bb.add_output("$none", none_lit)
    cnet = bb.finish()
    solver = Solver(seed=None)
    un = Unroller(solver, cnet, FREE_INIT)
    un.add_frame()
    res = solver.solve([un.lit(cnet.lookup("$none"), 0)]
                       + [un.lit(l, 0) for l in constrs],
                       task.budgets.conflicts)
    if res.status == SAT:
        witness = {}
        for n, v in cnet.inputs:
            e = un.lit(mklit(v), 0)
            witness[n] = int(res.model[abs(e)] if e > 0 else not res.model[abs(e)])
        raise IncompleteSplit(witness)

    def run_case(item):
        cname, pred = item
        sub = EquivalenceTask(task.spec, task.imp, task.mapping,
                              task.constraints + [pred], task.helpers, {},
                              task.budgets, task.refine,
                              name=f"{task.name}:{cname}")
        return cname, check_sec(sub)

    items = sorted(cases.items())
    if task.budgets.jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=task.budgets.jobs) as ex:
            sub_verdicts = dict(ex.map(run_case, items))
    else:
        sub_verdicts = dict(run_case(it) for it in items)

    statuses = [sub_verdicts[c].status for c, _ in items]
    for cname, _ in items:
        v = sub_verdicts[cname]
        if v.status == Status.NOT_EQUIVALENT:
            return Verdict(Status.NOT_EQUIVALENT, trace=v.trace,
                           bmc_depth=v.bmc_depth, cases=sub_verdicts,
                           per_output=v.per_output,
                           reason=f"case {cname} falsified",
                           wall_time=time.monotonic() - t0)
    if all(s == Status.VACUOUS for s in statuses):
        return Verdict(Status.VACUOUS, cases=sub_verdicts,
                       reason="every case is vacuous",
                       wall_time=time.monotonic() - t0)
    if all(s in (Status.EQUIVALENT, Status.VACUOUS) for s in statuses):
        k = max((sub_verdicts[c].induction_k or 0 for c, _ in items), default=None)
        return Verdict(Status.EQUIVALENT, induction_k=k, cases=sub_verdicts,
                       reason="all cases proved; split is complete",
                       wall_time=time.monotonic() - t0)
    return Verdict(Status.INCONCLUSIVE, cases=sub_verdicts,
                   reason="some case is inconclusive",
                   wall_time=time.monotonic() - t0)


def check_sec(task: EquivalenceTask) -> Verdict:
    """The full pipeline: vacuity, case splits, mapping refinement,
    helper proving, then interleaved BMC and k-induction."""
    t0 = time.monotonic()
    if task.cases:
        return case_split(task)
    proven_points: list[tuple[str, str]] = []
    if task.refine:
        refine_mapping_impl(task)
    if task.helpers:
        proven, _ = prove_helpers(task)
        proven_points.extend(proven)
    v = k_induction(task, proven_points=proven_points)
    v.wall_time = time.monotonic() - t0
    return v
