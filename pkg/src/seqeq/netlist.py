"""Bit-level and-inverter netlist shared by every engine.

A netlist is a sequential circuit over single-bit nets: an acyclic
and-inverter core, registers that latch a next-state literal on every
step, primary inputs and outputs, plus optional black-box instances
whose outputs are free inputs and whose inputs are observation points.

Literals encode a net reference with an inversion flag: ``lit = 2 * var
+ inv``.  Variable 0 is reserved for the constant, so ``FALSE == 0``
and ``TRUE == 1``.  Everything downstream (simulation, CNF encoding,
miters, product machines) speaks this literal language.

Netlists are immutable once built; transforms return new netlists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


FALSE = 0
TRUE = 1

# var kinds, used by the lazy kind table
K_CONST = 0
K_INPUT = 1
K_REG = 2
K_AND = 3


def mklit(var: int, inv: int = 0) -> int:
    return (var << 1) | inv


def lit_var(lit: int) -> int:
    return lit >> 1


def lit_inv(lit: int) -> int:
    return lit & 1


def lit_not(lit: int) -> int:
    return lit ^ 1


class Init(Enum):
    ZERO = 0
    ONE = 1
    UNINIT = 2  # no reset value: free at time 0


class NetlistError(Exception):
    pass


class CombinationalCycle(NetlistError):
    def __init__(self, path):
        self.path = list(path)
        super().__init__(f"combinational cycle through {' -> '.join(map(str, self.path))}")


class DanglingRef(NetlistError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"dangling reference: {name}")


class DuplicateName(NetlistError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate net name: {name}")


class UnknownNet(NetlistError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown net: {name}")


class NoSuchInstance(NetlistError):
    def __init__(self, prefix):
        self.prefix = prefix
        super().__init__(f"no instance matches prefix: {prefix}")


@dataclass(frozen=True)
class Register:
    name: str
    var: int
    next_lit: int
    init: Init


@dataclass(frozen=True)
class BlackBoxInstance:
    """Interface record of a boxed instance.

    ``inputs`` are (name, lit) observation points driven by surviving
    logic; ``outputs`` are (name, var) free primary inputs.
    """

    name: str
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class InstanceInfo:
    """Elaborated-instance boundary, kept so instances can be boxed later.

    ``out_anchors`` maps each output port bit name to the dedicated
    anchor var inserted at elaboration; anchors are what make deleting
    the instance well defined on a hash-consed graph.
    """

    path: str
    module: str
    in_bits: tuple[tuple[str, int], ...]   # (bit name, driving lit)
    out_bits: tuple[tuple[str, int], ...]  # (bit name, anchor var)


@dataclass
class Netlist:
    n_vars: int
    inputs: list[tuple[str, int]]
    outputs: list[tuple[str, int]]
    ands: list[tuple[int, int, int]]  # (var, left lit, right lit)
    registers: list[Register]
    blackboxes: list[BlackBoxInstance] = field(default_factory=list)
    names: dict[str, int] = field(default_factory=dict)
    hierarchy: dict[str, InstanceInfo] = field(default_factory=dict)

    def __post_init__(self):
        self._kinds = None
        self._and_defs = None
        self._topo = None
        self._reg_by_var = None

    # -- derived tables ------------------------------------------------

    @property
    def kinds(self) -> bytearray:
        if self._kinds is None:
            k = bytearray(self.n_vars)  # K_CONST == 0 everywhere it stays unset
            for _, v in self.inputs:
                k[v] = K_INPUT
            for r in self.registers:
                k[r.var] = K_REG
            for bb in self.blackboxes:
                for _, v in bb.outputs:
                    k[v] = K_INPUT
            for v, _, _ in self.ands:
                k[v] = K_AND
            self._kinds = k
        return self._kinds

    @property
    def and_defs(self) -> dict[int, tuple[int, int]]:
        if self._and_defs is None:
            self._and_defs = {v: (a, b) for v, a, b in self.ands}
        return self._and_defs

    @property
    def reg_by_var(self) -> dict[int, Register]:
        if self._reg_by_var is None:
            self._reg_by_var = {r.var: r for r in self.registers}
        return self._reg_by_var

    def topo_ands(self) -> list[int]:
        """AND vars in dependency order; raises CombinationalCycle."""
        if self._topo is not None:
            return self._topo
        defs = self.and_defs
        order: list[int] = []
        state = bytearray(self.n_vars)  # 0 new, 1 on stack, 2 done
        for root in defs:
            if state[root]:
                continue
            stack = [root]
            while stack:
                v = stack[-1]
                if state[v] == 0:
                    state[v] = 1
                    for op in defs[v]:
                        w = op >> 1
                        if w in defs:
                            if state[w] == 1:
                                path = self._cycle_path(w, defs)
                                raise CombinationalCycle(path)
                            if state[w] == 0:
                                stack.append(w)
                elif state[v] == 1:
                    state[v] = 2
                    order.append(v)
                    stack.pop()
                else:
                    stack.pop()
        self._topo = order
        return order

    def _cycle_path(self, start: int, defs) -> list[int]:
        # walk one cycle for the error message
        path = [start]
        v = start
        while True:
            for op in defs[v]:
                w = op >> 1
                if w in defs:
                    v = w
                    break
            else:
                break
            if v == start or len(path) > len(defs):
                break
            path.append(v)
        return path + [start]

    # -- queries ---------------------------------------------------------

    def lookup(self, name: str) -> int:
        try:
            return self.names[name]
        except KeyError:
            raise UnknownNet(name) from None

    def n_ands(self) -> int:
        return len(self.ands)

    def input_vector_env(self) -> dict[str, list[str]]:
        return group_vectors(n for n, _ in self.inputs)

    def dump(self) -> str:
        """Line-oriented debug text, one node per line, for diffing."""

        def fmt(lit: int) -> str:
            return ("!" if lit & 1 else "") + str(lit >> 1)

        lines = []
        for n, v in self.inputs:
            lines.append(f"{v} = INPUT {n}")
        for r in self.registers:
            lines.append(f"{r.var} = REG {r.name} init={r.init.name} next={fmt(r.next_lit)}")
        for v, a, b in self.ands:
            lines.append(f"{v} = AND {fmt(a)} {fmt(b)}")
        for n, lit in self.outputs:
            lines.append(f"OUTPUT {n} = {fmt(lit)}")
        return "\n".join(lines) + "\n"


def group_vectors(names) -> dict[str, list[str]]:
    """Group bit names ``base[i]`` back into ordered vectors.

    Scalars map to a single-entry list of their own name.  Gaps in the
    index range disqualify the group and its bits are kept as scalars.
    """
    vec: dict[str, dict[int, str]] = {}
    scalars: list[str] = []
    for n in names:
        if n.endswith("]") and "[" in n:
            base, _, idx = n[:-1].rpartition("[")
            if idx.isdigit():
                vec.setdefault(base, {})[int(idx)] = n
                continue
        scalars.append(n)
    env: dict[str, list[str]] = {n: [n] for n in scalars}
    for base, bits in vec.items():
        if sorted(bits) == list(range(len(bits))) and base not in env:
            env[base] = [bits[i] for i in range(len(bits))]
        else:
            for n in bits.values():
                env[n] = [n]
    return env


class Builder:
    """Constructs netlists with structural hashing and constant folding.

    Folds applied by ``and_``: x&x -> x, x&!x -> 0, x&1 -> x, x&0 -> 0;
    operand order is canonicalized, identical nodes are shared.
    Anything built through a Builder is acyclic by construction.
    """

    def __init__(self):
        self.n_vars = 1  # var 0 = constant
        self.inputs: list[tuple[str, int]] = []
        self.outputs: list[tuple[str, int]] = []
        self.ands: list[tuple[int, int, int]] = []
        self.registers: list[Register] = []
        self.blackboxes: list[BlackBoxInstance] = []
        self.names: dict[str, int] = {}
        self._strash: dict[tuple[int, int], int] = {}
        self._next: dict[int, int | None] = {}  # reg var -> next lit
        self._reg_init: dict[int, Init] = {}
        self._reg_order: list[tuple[str, int]] = []

    def _new_var(self) -> int:
        v = self.n_vars
        self.n_vars += 1
        return v

    def add_input(self, name: str) -> int:
        v = self._new_var()
        self.inputs.append((name, v))
        self.set_name(name, mklit(v))
        return mklit(v)

    def add_register(self, name: str, init: Init) -> int:
        v = self._new_var()
        self._next[v] = None
        self._reg_init[v] = init
        self._reg_order.append((name, v))
        self.set_name(name, mklit(v))
        return mklit(v)

    def set_next(self, reg_lit: int, next_lit: int) -> None:
        v = lit_var(reg_lit)
        assert v in self._next, "set_next on a non-register"
        self._next[v] = next_lit

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == FALSE or a == lit_not(b):
            return FALSE
        if a == TRUE or a == b:
            return b
        key = (a, b)
        v = self._strash.get(key)
        if v is None:
            v = self._new_var()
            self._strash[key] = v
            self.ands.append((v, a, b))
        return mklit(v)

    def anchor(self, lit: int) -> int:
        """A dedicated pass-through node (x & 1) that is never shared.

        Used at instance output boundaries so the value can later be cut
        without touching unrelated logic that happens to compute the
        same function.
        """
        v = self._new_var()
        self.ands.append((v, TRUE, lit) if TRUE < lit else (v, lit, TRUE))
        return mklit(v)

    # convenience gates
    def not_(self, a: int) -> int:
        return lit_not(a)

    def or_(self, a: int, b: int) -> int:
        return lit_not(self.and_(lit_not(a), lit_not(b)))

    def xor_(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, lit_not(b)), self.and_(lit_not(a), b))

    def xnor_(self, a: int, b: int) -> int:
        return lit_not(self.xor_(a, b))

    def mux(self, sel: int, then_lit: int, else_lit: int) -> int:
        return self.or_(self.and_(sel, then_lit), self.and_(lit_not(sel), else_lit))

    def and_many(self, lits) -> int:
        acc = TRUE
        for l in lits:
            acc = self.and_(acc, l)
        return acc

    def or_many(self, lits) -> int:
        acc = FALSE
        for l in lits:
            acc = self.or_(acc, l)
        return acc

    def add_output(self, name: str, lit: int) -> None:
        self.outputs.append((name, lit))
        if name not in self.names:
            self.set_name(name, lit)

    def set_name(self, name: str, lit: int) -> None:
        if name in self.names:
            raise DuplicateName(name)
        self.names[name] = lit

    def alias(self, name: str, lit: int) -> None:
        """Name a net, tolerating an identical existing binding."""
        if self.names.get(name, lit) != lit:
            raise DuplicateName(name)
        self.names[name] = lit

    def finish(self, hierarchy: dict[str, InstanceInfo] | None = None) -> Netlist:
        for (name, v) in self._reg_order:
            nxt = self._next[v]
            if nxt is None:
                raise DanglingRef(f"register {name} has no next-state")
            self.registers.append(Register(name, v, nxt, self._reg_init[v]))
        return Netlist(
            n_vars=self.n_vars,
            inputs=self.inputs,
            outputs=self.outputs,
            ands=self.ands,
            registers=self.registers,
            blackboxes=self.blackboxes,
            names=self.names,
            hierarchy=dict(hierarchy or {}),
        )


def validate(netlist: Netlist) -> None:
    """Check structural invariants; raises a NetlistError naming the offender."""
    seen: set[str] = set()
    for name, _ in list(netlist.inputs) + [(r.name, r.var) for r in netlist.registers]:
        if name in seen:
            raise DuplicateName(name)
        seen.add(name)

    defined = netlist.kinds

    def check_lit(lit: int, who: str):
        v = lit >> 1
        if v <= 0:
            if v < 0:
                raise DanglingRef(who)
            return
        if v >= netlist.n_vars or (defined[v] == K_CONST and v != 0):
            raise DanglingRef(who)

    for v, a, b in netlist.ands:
        check_lit(a, f"and {v} left operand")
        check_lit(b, f"and {v} right operand")
    for r in netlist.registers:
        check_lit(r.next_lit, f"register {r.name} next")
    for n, lit in netlist.outputs:
        check_lit(lit, f"output {n}")
    for bb in netlist.blackboxes:
        for n, lit in bb.inputs:
            check_lit(lit, f"blackbox {bb.name} input {n}")
    for n, lit in netlist.names.items():
        check_lit(lit, f"name {n}")
    netlist.topo_ands()  # raises CombinationalCycle


def import_cone(dst: Builder, src: Netlist, var_sub: dict[int, int], roots) -> dict[int, int]:
    """Copy the AND cone of ``roots`` from src into dst.

    ``var_sub`` must already map every non-AND leaf var (inputs,
    registers, black-box outputs) that the cone reaches; AND nodes are
    rebuilt through dst (so they re-fold and re-share).  Returns the
    completed var->lit map.
    """
    defs = src.and_defs
    sub = dict(var_sub)
    sub[0] = FALSE

    for root in roots:
        stack = [lit_var(root)]
        while stack:
            v = stack[-1]
            if v in sub:
                stack.pop()
                continue
            if v not in defs:
                raise DanglingRef(f"var {v} (unmapped leaf)")
            a, b = defs[v]
            pending = [w for w in (a >> 1, b >> 1) if w not in sub]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            la = sub[a >> 1] ^ (a & 1)
            lb = sub[b >> 1] ^ (b & 1)
            sub[v] = dst.and_(la, lb)
    return sub


def _tr(sub: dict[int, int], lit: int) -> int:
    return sub[lit >> 1] ^ (lit & 1)


def structural_hash(netlist: Netlist) -> Netlist:
    """Rebuild with hash-consing and constant folding; semantics preserved.

    Hierarchy metadata does not survive (anchors fold away), so box
    instances before hashing.
    """
    b = Builder()
    sub: dict[int, int] = {}
    for n, v in netlist.inputs:
        sub[v] = b.add_input(n)
    regs = {}
    for r in netlist.registers:
        sub[r.var] = regs[r.var] = b.add_register(r.name, r.init)
    for bb in netlist.blackboxes:
        for n, v in bb.outputs:
            sub[v] = b.add_input(n)

    roots = [lit for _, lit in netlist.outputs]
    roots += [r.next_lit for r in netlist.registers]
    roots += [lit for bb in netlist.blackboxes for _, lit in bb.inputs]
    sub = import_cone(b, netlist, sub, roots)

    for r in netlist.registers:
        b.set_next(regs[r.var], _tr(sub, r.next_lit))
    for n, lit in netlist.outputs:
        b.outputs.append((n, _tr(sub, lit)))
    for bb in netlist.blackboxes:
        b.blackboxes.append(BlackBoxInstance(
            bb.name,
            tuple((n, _tr(sub, lit)) for n, lit in bb.inputs),
            tuple((n, lit_var(sub[v])) for n, v in bb.outputs),
        ))
    for n, lit in netlist.names.items():
        if (lit >> 1) in sub:
            b.alias(n, _tr(sub, lit))
    return b.finish()


def cone_of_influence(netlist: Netlist, targets: list[str]) -> Netlist:
    """Sub-netlist of everything transitively feeding the target nets.

    Registers in the cone bring their next-state logic along; inputs of
    the cone stay primary inputs; outputs of the result are exactly the
    targets, in the given order.
    """
    target_lits = [netlist.lookup(t) for t in targets]
    defs = netlist.and_defs
    regs = netlist.reg_by_var
    keep: set[int] = {0}
    work = [lit >> 1 for lit in target_lits]
    while work:
        v = work.pop()
        if v in keep:
            continue
        keep.add(v)
        if v in defs:
            a, bb = defs[v]
            work.append(a >> 1)
            work.append(bb >> 1)
        elif v in regs:
            work.append(regs[v].next_lit >> 1)

    b = Builder()
    sub: dict[int, int] = {}
    for n, v in netlist.inputs:
        if v in keep:
            sub[v] = b.add_input(n)
    new_regs = {}
    for r in netlist.registers:
        if r.var in keep:
            sub[r.var] = new_regs[r.var] = b.add_register(r.name, r.init)
    kept_boxes = []
    for bb in netlist.blackboxes:
        if any(v in keep for _, v in bb.outputs):
            outs = []
            for n, v in bb.outputs:
                if v not in sub:
                    sub[v] = b.add_input(n)
                outs.append((n, lit_var(sub[v])))
            kept_boxes.append((bb, outs))

    roots = list(target_lits) + [regs[v].next_lit for v in new_regs]
    sub = import_cone(b, netlist, sub, roots)
    for v, new_lit in new_regs.items():
        b.set_next(new_lit, _tr(sub, regs[v].next_lit))
    for t, lit in zip(targets, target_lits):
        b.outputs.append((t, _tr(sub, lit)))
    for bb, outs in kept_boxes:
        ins = tuple((n, _tr(sub, lit)) for n, lit in bb.inputs if (lit >> 1) in sub)
        b.blackboxes.append(BlackBoxInstance(bb.name, ins, tuple(outs)))
    for n, lit in netlist.names.items():
        if (lit >> 1) in sub:
            b.alias(n, _tr(sub, lit))
    return b.finish()


def black_box(netlist: Netlist, prefixes: list[str]) -> Netlist:
    """Delete the logic of the named instances, rewiring their boundary.

    Each boxed instance's output port bits become fresh free primary
    inputs (same net names) and its input port bits become auxiliary
    observed outputs.  Prefix "" (or the sole top) boxes the whole
    design, leaving only I/O shells.  Requires elaboration hierarchy
    metadata; apply before structural hashing.
    """
    whole = any(p == "" for p in prefixes)
    hit_paths: set[str] = set()
    for p in prefixes:
        if p == "":
            continue
        hits = {path for path in netlist.hierarchy if path.startswith(p)}
        if not hits:
            raise NoSuchInstance(p)
        hit_paths |= hits
    # box at maximal boundaries; instances nested inside a boxed one vanish with it
    boxed = [netlist.hierarchy[p] for p in sorted(hit_paths)
             if not any(p != q and p.startswith(q + ".") for q in hit_paths)]

    if whole:
        b = Builder()
        for n, v in netlist.inputs:
            b.add_input(n)
        for n, _ in netlist.outputs:
            lit = b.names.get(n)
            if lit is None:
                lit = b.add_input(n)
            b.outputs.append((n, lit))
        return b.finish()

    b = Builder()
    sub: dict[int, int] = {}
    for n, v in netlist.inputs:
        sub[v] = b.add_input(n)
    # boxed output anchors become free inputs
    box_inputs: dict[int, str] = {}
    for info in boxed:
        for bit_name, anchor_var in info.out_bits:
            box_inputs[anchor_var] = bit_name
    for anchor_var, bit_name in box_inputs.items():
        sub[anchor_var] = b.add_input(bit_name)

    reg_keep = {}
    # keep every register whose cone survives: compute reach from the new roots
    obs_roots = [lit for info in boxed for _, lit in info.in_bits]
    out_roots = [lit for _, lit in netlist.outputs]
    defs = netlist.and_defs
    regs = netlist.reg_by_var
    keep: set[int] = {0} | set(sub)
    work = [l >> 1 for l in out_roots + obs_roots]
    while work:
        v = work.pop()
        if v in keep:
            continue
        keep.add(v)
        if v in box_inputs:
            continue
        if v in defs:
            a, c = defs[v]
            work.append(a >> 1)
            work.append(c >> 1)
        elif v in regs:
            work.append(regs[v].next_lit >> 1)
    for r in netlist.registers:
        if r.var in keep:
            sub[r.var] = reg_keep[r.var] = b.add_register(r.name, r.init)

    roots = out_roots + obs_roots + [regs[v].next_lit for v in reg_keep]
    sub = import_cone(b, netlist, sub, roots)
    for v, new_lit in reg_keep.items():
        b.set_next(new_lit, _tr(sub, regs[v].next_lit))
    for n, lit in netlist.outputs:
        b.outputs.append((n, _tr(sub, lit)))
    boxed_paths = [info.path for info in boxed]
    for info in boxed:
        ins = tuple((n, _tr(sub, lit)) for n, lit in info.in_bits)
        outs = tuple((n, lit_var(sub[anchor])) for n, anchor in info.out_bits)
        for n, lit in ins:
            b.outputs.append((n, lit))
        b.blackboxes.append(BlackBoxInstance(info.path, ins, outs))
    for n, lit in netlist.names.items():
        if (lit >> 1) in sub and n not in b.names:
            b.alias(n, _tr(sub, lit))
    del boxed_paths
    # anchors of surviving instances re-fold in the rebuild, so hierarchy
    # does not survive: box everything that needs boxing in one call.
    return b.finish()
