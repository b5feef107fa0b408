"""Embedded CDCL solver and circuit-to-CNF time-frame unrolling.

The solver is incremental through assumptions only: clauses and
variables may be added between solves, never removed.  Verdicts are the
contract; models are not canonical (decision heuristics may change).
Setting the SEQEQ_SOLVER_SEED environment variable perturbs decision
ordering for flakiness hunting.

Literals are DIMACS-style signed ints.  ``solve`` returns SAT with a
total model, UNSAT with a subset of the assumptions sufficient for
unsatisfiability, or UNKNOWN when the conflict budget runs out.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field

from seqeq.netlist import Init, Netlist

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

_UNDEF = 0
_TRUE = 1
_FALSE = 2


@dataclass
class SolveResult:
    status: str
    model: list[bool] | None = None   # 1-based: model[v] for var v
    core: frozenset[int] | None = None

    def __bool__(self):
        return self.status == SAT


def _luby(i: int) -> int:
    k = 1
    while (1 << (k + 1)) <= i + 1:
        k += 1
    if (1 << (k + 1)) == i + 2:
        return 1 << k
    return _luby(i - (1 << k) + 1)


class Solver:
    """Conflict-driven clause learning with two watched literals,
    first-UIP learning, activity decisions, phase saving, and Luby
    restarts."""

    def __init__(self, seed: int | None = None):
        if seed is None:
            env = os.environ.get("SEQEQ_SOLVER_SEED")
            seed = int(env) if env else 0
        self._rng = random.Random(seed) if seed else None
        self.n_vars = 0
        self.clauses: list[list[int]] = []      # for export; includes learnt
        self.n_input_clauses = 0
        self._watches: dict[int, list] = {}
        self._assign = [0]    # var -> _UNDEF/_TRUE/_FALSE
        self._level = [0]
        self._reason: list[list[int] | None] = [None]
        self._phase = [False]
        self._activity = [0.0]
        self._trail: list[int] = []
        self._trail_lim: list[int] = []
        self._qhead = 0
        self._var_inc = 1.0
        self._heap: list[int] = []
        self._heap_pos = [-1]
        self._ok = True
        self.stats_conflicts = 0
        self.stats_decisions = 0
        self.stats_propagations = 0

    # -- variables and clauses

    def new_var(self) -> int:
        self.n_vars += 1
        self._assign.append(_UNDEF)
        self._level.append(0)
        self._reason.append(None)
        self._phase.append(False)
        self._activity.append(0.0)
        self._heap_pos.append(-1)
        self._watches[self.n_vars] = []
        self._watches[-self.n_vars] = []
        self._heap_insert(self.n_vars)
        return self.n_vars

    def value(self, lit: int) -> int:
        v = self._assign[abs(lit)]
        if v == _UNDEF:
            return _UNDEF
        return v if lit > 0 else (_TRUE if v == _FALSE else _FALSE)

    def add_clause(self, lits) -> bool:
        """Returns False once the formula is unconditionally unsatisfiable."""
        if not self._ok:
            return False
        self._backtrack(0)
        c = []
        for l in lits:
            assert l != 0 and abs(l) <= self.n_vars
            if self.value(l) == _TRUE or -l in c:
                return True  # satisfied or tautological at level 0
            if self.value(l) == _FALSE or l in c:
                continue
            c.append(l)
        self.clauses.append(list(lits))
        self.n_input_clauses += 1
        if not c:
            self._ok = False
            return False
        if len(c) == 1:
            self._enqueue(c[0], None)
            if self._propagate() is not None:
                self._ok = False
                return False
            return True
        self._attach(c)
        return True

    def _attach(self, c: list[int]):
        self._watches[-c[0]].append(c)
        self._watches[-c[1]].append(c)

    # -- trail

    def _enqueue(self, lit: int, reason):
        v = abs(lit)
        self._assign[v] = _TRUE if lit > 0 else _FALSE
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(lit)

    def _backtrack(self, level: int):
        if len(self._trail_lim) <= level:
            return
        bound = self._trail_lim[level]
        for i in range(len(self._trail) - 1, bound - 1, -1):
            lit = self._trail[i]
            v = abs(lit)
            self._phase[v] = lit > 0
            self._assign[v] = _UNDEF
            self._reason[v] = None
            if self._heap_pos[v] < 0:
                self._heap_insert(v)
        del self._trail[bound:]
        del self._trail_lim[level:]
        self._qhead = len(self._trail)

    # -- propagation

    def _propagate(self) -> list[int] | None:
        while self._qhead < len(self._trail):
            p = self._trail[self._qhead]
            self._qhead += 1
            self.stats_propagations += 1
            ws = self._watches[p]  # clauses watching -p (keyed by the true lit)
            i = j = 0
            n = len(ws)
            assign = self._assign
            while i < n:
                c = ws[i]
                i += 1
                # make the false literal c[1]
                if c[0] == -p:
                    c[0], c[1] = c[1], -p
                first = c[0]
                fv = assign[abs(first)]
                if fv != _UNDEF and (fv == _TRUE) == (first > 0):
                    ws[j] = c
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    av = assign[abs(lk)]
                    if av == _UNDEF or (av == _TRUE) == (lk > 0):
                        c[1], c[k] = lk, c[1]
                        self._watches[-lk].append(c)
                        found = True
                        break
                if found:
                    continue
                ws[j] = c
                j += 1
                if fv != _UNDEF:  # first is false too: conflict
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self._qhead = len(self._trail)
                    return c
                self._enqueue(first, c)
            del ws[j:]
        return None

    # -- conflict analysis

    def _bump(self, v: int):
        self._activity[v] += self._var_inc
        if self._activity[v] > 1e100:
            for u in range(1, self.n_vars + 1):
                self._activity[u] *= 1e-100
            self._var_inc *= 1e-100
        if self._heap_pos[v] >= 0:
            self._heap_up(self._heap_pos[v])

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        """First-UIP learning with cheap local minimization."""
        seen = bytearray(self.n_vars + 1)
        learnt = [0]
        counter = 0
        idx = len(self._trail) - 1
        cur_level = len(self._trail_lim)
        c = confl
        skip_head = False  # reason clauses carry their asserting literal first
        while True:
            for q in (c[1:] if skip_head else c):
                v = abs(q)
                if not seen[v] and self._level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self._level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self._trail[idx])]:
                idx -= 1
            plit = self._trail[idx]
            v = abs(plit)
            seen[v] = 0
            counter -= 1
            idx -= 1
            if counter <= 0:
                learnt[0] = -plit
                break
            c = self._reason[v]
            skip_head = True
        # local minimization: drop literals whose whole reason is already covered
        out = [learnt[0]]
        for q in learnt[1:]:
            r = self._reason[abs(q)]
            if r is None or any(not seen_ok(abs(l), seen, self._level)
                                for l in r[1:]):
                out.append(q)
        learnt = out
        if len(learnt) == 1:
            return learnt, 0
        # find the second-highest level and place it at position 1
        max_i = 1
        for i in range(2, len(learnt)):
            if self._level[abs(learnt[i])] > self._level[abs(learnt[max_i])]:
                max_i = i
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, self._level[abs(learnt[1])]

    # -- heap (max-activity)

    def _heap_insert(self, v: int):
        self._heap.append(v)
        self._heap_pos[v] = len(self._heap) - 1
        self._heap_up(len(self._heap) - 1)

    def _heap_up(self, i: int):
        h, pos, act = self._heap, self._heap_pos, self._activity
        v = h[i]
        a = act[v]
        while i > 0:
            parent = (i - 1) >> 1
            if act[h[parent]] >= a:
                break
            h[i] = h[parent]
            pos[h[i]] = i
            i = parent
        h[i] = v
        pos[v] = i

    def _heap_pop(self) -> int | None:
        h, pos, act = self._heap, self._heap_pos, self._activity
        while h:
            v = h[0]
            last = h.pop()
            pos[v] = -1
            if h:
                h[0] = last
                pos[last] = 0
                # sift down
                i = 0
                n = len(h)
                while True:
                    l = 2 * i + 1
                    r = l + 1
                    big = i
                    if l < n and act[h[l]] > act[h[big]]:
                        big = l
                    if r < n and act[h[r]] > act[h[big]]:
                        big = r
                    if big == i:
                        break
                    h[i], h[big] = h[big], h[i]
                    pos[h[i]] = i
                    pos[h[big]] = big
                    i = big
            if self._assign[v] == _UNDEF:
                return v
        return None

    # -- main search

    def solve(self, assumptions=(), budget: int | None = None) -> SolveResult:
        """Budget is a conflict limit; UNKNOWN (not an error) when spent."""
        if not self._ok:
            return SolveResult(UNSAT, core=frozenset())
        assumptions = list(assumptions)
        self._backtrack(0)
        if self._propagate() is not None:
            self._ok = False
            return SolveResult(UNSAT, core=frozenset())
        conflicts = 0
        restart_n = 0
        next_restart = 100 * _luby(restart_n + 1)
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                self.stats_conflicts += 1
                if len(self._trail_lim) == 0:
                    self._ok = False
                    return SolveResult(UNSAT, core=frozenset())
                if budget is not None and conflicts >= budget:
                    self._backtrack(0)
                    return SolveResult(UNKNOWN)
                learnt, bt_level = self._analyze(confl)
                self._backtrack(bt_level)
                self.clauses.append(learnt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                self._var_inc /= 0.95
                if conflicts >= next_restart:
                    restart_n += 1
                    next_restart = conflicts + 100 * _luby(restart_n + 1)
                    self._backtrack(0)
                continue
            # decisions: assumptions first, then activity order
            dl = len(self._trail_lim)
            if dl < len(assumptions):
                p = assumptions[dl]
                v = self.value(p)
                if v == _TRUE:
                    self._trail_lim.append(len(self._trail))
                    continue
                if v == _FALSE:
                    core = self._analyze_final(p)
                    self._backtrack(0)
                    return SolveResult(UNSAT, core=core)
                self._trail_lim.append(len(self._trail))
                self._enqueue(p, None)
                continue
            v = self._heap_pop()
            if self._rng is not None and v is not None and self._rng.random() < 0.02:
                free = [u for u in range(1, self.n_vars + 1) if self._assign[u] == _UNDEF]
                if free:
                    v = self._rng.choice(free)
            if v is None:
                model = [False] * (self.n_vars + 1)
                for u in range(1, self.n_vars + 1):
                    model[u] = self._assign[u] == _TRUE
                self._backtrack(0)
                return SolveResult(SAT, model=model)
            self.stats_decisions += 1
            self._trail_lim.append(len(self._trail))
            self._enqueue(v if self._phase[v] else -v, None)

    def _analyze_final(self, p: int) -> frozenset[int]:
        """Assumptions sufficient to force p false."""
        core = {p}
        seen = bytearray(self.n_vars + 1)
        seen[abs(p)] = 1
        for i in range(len(self._trail) - 1, -1, -1):
            q = self._trail[i]
            v = abs(q)
            if not seen[v]:
                continue
            r = self._reason[v]
            if r is None:
                if self._level[v] > 0:
                    core.add(q)
            else:
                for l in r:
                    if abs(l) != v:
                        seen[abs(l)] = 1
            seen[v] = 0
        return frozenset(core)


def seen_ok(v: int, seen: bytearray, level: list[int]) -> bool:
    return bool(seen[v]) or level[v] == 0


# -- CNF containers and export --------------------------------------------


@dataclass
class CnfInstance:
    """A standalone clause container with the same growth interface as
    Solver, used for export and cross-checking."""

    n_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    assumptions: list[int] = field(default_factory=list)

    def new_var(self) -> int:
        self.n_vars += 1
        return self.n_vars

    def add_clause(self, lits) -> bool:
        self.clauses.append(list(lits))
        return True

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(map(str, c)) + " 0")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_dimacs(text: str) -> "CnfInstance":
        inst = CnfInstance()
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("c"):
                continue
            if ln.startswith("p"):
                inst.n_vars = int(ln.split()[2])
                continue
            lits = [int(t) for t in ln.split()]
            assert lits[-1] == 0
            inst.clauses.append(lits[:-1])
        return inst

    def solve(self, assumptions=(), budget=None, seed=None) -> SolveResult:
        s = Solver(seed=seed)
        for _ in range(self.n_vars):
            s.new_var()
        for c in self.clauses:
            if not s.add_clause(c):
                return SolveResult(UNSAT, core=frozenset())
        return s.solve(list(self.assumptions) + list(assumptions), budget)


def export_dimacs(instance: CnfInstance, path: str) -> None:
    with open(path, "w") as f:
        f.write(instance.to_dimacs())


# -- time-frame unrolling ---------------------------------------------------


class FrameMap:
    """Per-frame map from netlist var to signed CNF literal.  A register's
    state literal at frame k+1 is its next-state literal at frame k."""

    def __init__(self):
        self.frames: list[dict[int, int]] = []

    def lit(self, net_lit: int, frame: int) -> int:
        e = self.frames[frame][net_lit >> 1]
        return -e if net_lit & 1 else e

    def __len__(self):
        return len(self.frames)


CONSTRAIN_INIT = "constrain"
FREE_INIT = "free"


class Unroller:
    """Tseitin-encodes successive time frames of a netlist into a clause
    sink (a Solver or CnfInstance).

    CONSTRAIN_INIT fixes frame-0 registers to their init values
    (uninitialized ones stay free: one choice for the whole trace);
    FREE_INIT leaves all frame-0 registers unconstrained, as induction
    steps need.
    """

    def __init__(self, sink, net: Netlist, init_handling: str = CONSTRAIN_INIT):
        assert init_handling in (CONSTRAIN_INIT, FREE_INIT)
        self.sink = sink
        self.net = net
        self.init_handling = init_handling
        self.map = FrameMap()
        self.true_lit = sink.new_var()
        sink.add_clause([self.true_lit])
        self._topo = net.topo_ands()
        self._defs = net.and_defs

    def lit(self, net_lit: int, frame: int) -> int:
        return self.map.lit(net_lit, frame)

    def add_frame(self) -> int:
        sink = self.sink
        k = len(self.map.frames)
        fm: dict[int, int] = {0: -self.true_lit}
        for _, v in self.net.inputs:
            fm[v] = sink.new_var()
        for bb in self.net.blackboxes:
            for _, v in bb.outputs:
                fm[v] = sink.new_var()
        if k == 0:
            for r in self.net.registers:
                rv = sink.new_var()
                fm[r.var] = rv
                if self.init_handling == CONSTRAIN_INIT and r.init != Init.UNINIT:
                    sink.add_clause([rv if r.init == Init.ONE else -rv])
        else:
            prev = self.map.frames[k - 1]
            for r in self.net.registers:
                e = prev[r.next_lit >> 1]
                fm[r.var] = -e if r.next_lit & 1 else e
        for v in self._topo:
            a, b = self._defs[v]
            ea = fm[a >> 1]
            la = -ea if a & 1 else ea
            eb = fm[b >> 1]
            lb = -eb if b & 1 else eb
            z = sink.new_var()
            fm[v] = z
            sink.add_clause([-z, la])
            sink.add_clause([-z, lb])
            sink.add_clause([z, -la, -lb])
        self.map.frames.append(fm)
        return k


def unroll(net: Netlist, frames: int, init_handling: str = CONSTRAIN_INIT
           ) -> tuple[CnfInstance, FrameMap]:
    """CNF whose models are exactly the length-``frames`` executions of
    the netlist under the chosen init handling."""
    assert frames >= 1
    inst = CnfInstance()
    u = Unroller(inst, net, init_handling)
    for _ in range(frames):
        u.add_frame()
    return inst, u.map


def decode_model(net: Netlist, fmap: FrameMap, model: list[bool]):
    """Extract (input sequence, initial register values) from a model."""
    def val(net_lit, frame):
        e = fmap.lit(net_lit, frame)
        v = model[abs(e)]
        return int(v if e > 0 else not v)

    inputs = []
    for k in range(len(fmap.frames)):
        row = {}
        for n, v in net.inputs:
            row[n] = val(v << 1, k)
        for bb in net.blackboxes:
            for n, v in bb.outputs:
                row[n] = val(v << 1, k)
        inputs.append(row)
    regs0 = {r.name: val(r.var << 1, 0) for r in net.registers}
    return inputs, regs0
