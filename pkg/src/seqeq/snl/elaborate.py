"""Elaboration: SNL modules -> flat bit-level netlist.

Parameters become compile-time constants (they may size vectors and
select conditional item blocks), hierarchy is flattened with "." joined
names, word-level operators are bit-blasted, and unknown-value sources
are resolved according to an XPolicy:

* an uninitialized register bit becomes a free initial-state bit
  (fixed for the whole trace) under SYMBOLIC, or the given constant;
* an x constant digit or an undriven net bit becomes a fresh free
  primary input, re-sampled every cycle, under SYMBOLIC.

Each instance output port bit gets a dedicated pass-through node so
the instance can later be black-boxed even on the hash-consed graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from seqeq import netlist as nl
from seqeq.snl import ast
from seqeq.snl.parser import parse_expr_text


class ElabError(Exception):
    pass


class UnknownParameter(ElabError):
    pass


class UnknownModule(ElabError):
    pass


class RecursiveInstantiation(ElabError):
    pass


class MultipleDrivers(ElabError):
    pass


class ZeroWidth(ElabError):
    pass


class WidthMismatch(ElabError):
    pass


class UndrivenNet(ElabError):
    pass


class XMode(Enum):
    ZERO = "zero"
    ONE = "one"
    SYMBOLIC = "symbolic"


@dataclass(frozen=True)
class XPolicy:
    """How unknown-value sources are resolved, independently for the
    register class (uninitialized flops) and the literal class
    (x constants and undriven nets)."""

    regs: XMode = XMode.SYMBOLIC
    literals: XMode = XMode.SYMBOLIC

    @staticmethod
    def uniform(mode: XMode) -> "XPolicy":
        return XPolicy(mode, mode)

    @staticmethod
    def parse(text: str) -> "XPolicy":
        parts = [p.strip() for p in text.split(",")]
        try:
            modes = [XMode(p) for p in parts]
        except ValueError:
            raise ElabError(f"bad xpolicy {text!r}: use zero|one|symbolic"
                            " or a regs,literals pair") from None
        if len(modes) == 1:
            return XPolicy.uniform(modes[0])
        if len(modes) == 2:
            return XPolicy(modes[0], modes[1])
        raise ElabError(f"bad xpolicy {text!r}")


@dataclass(frozen=True)
class XSource:
    kind: str   # uninit-reg | x-literal | undriven
    name: str   # register bit, synthesized input, or net bit name
    where: str  # "line:col" of the declaration or constant


class ExprEval:
    """Bit-blasting expression evaluator over a pluggable name scope.

    ``lookup_bits(name)`` returns the net's literals (LSB first) or
    None; ``lookup_width(name)`` its width without forcing evaluation;
    ``lookup_const(name)`` a parameter value or None; ``xbit(c, i)``
    supplies the literal for x digit i of constant c.
    """

    def __init__(self, builder: nl.Builder, lookup_bits, lookup_width,
                 lookup_const=None, xbit=None):
        self.b = builder
        self.lookup_bits = lookup_bits
        self.lookup_width = lookup_width
        self.lookup_const = lookup_const or (lambda name: None)
        self.xbit = xbit or self._no_x

    @staticmethod
    def _no_x(c: ast.Const, i: int) -> int:
        raise ElabError(f"line {c.line}:{c.col}: x digit not allowed here")

    def _err(self, e, msg, cls=WidthMismatch):
        raise cls(f"line {e.line}:{e.col}: {msg}")

    # -- constant contexts

    def const_eval(self, e: ast.Expr) -> int:
        if isinstance(e, ast.Const):
            if e.width is None:
                return e.value
            if e.has_x():
                self._err(e, "x digit in a constant context", ElabError)
            return sum(b << i for i, b in enumerate(e.bits))
        if isinstance(e, ast.Ident):
            v = self.lookup_const(e.name)
            if v is None:
                self._err(e, f"{e.name} is not a compile-time constant",
                          UnknownParameter)
            return v
        if isinstance(e, ast.Unary):
            self._err(e, "~ not supported in constant contexts", ElabError)
        if isinstance(e, ast.Binary):
            l = self.const_eval(e.left)
            r = self.const_eval(e.right)
            op = e.op
            if op == "+":
                return l + r
            if op == "-":
                return l - r
            if op == "*":
                return l * r
            if op == "&":
                return l & r
            if op == "|":
                return l | r
            if op == "^":
                return l ^ r
            if op == "==":
                return int(l == r)
            if op == "!=":
                return int(l != r)
        if isinstance(e, ast.Ternary):
            return (self.const_eval(e.then_e) if self.const_eval(e.cond)
                    else self.const_eval(e.else_e))
        self._err(e, "not a constant expression", ElabError)

    # -- width inference

    def width_of(self, e: ast.Expr) -> int | None:
        if isinstance(e, ast.Const):
            return e.width
        if isinstance(e, ast.Ident):
            if self.lookup_const(e.name) is not None:
                return None  # parameter: elastic like an unsized constant
            w = self.lookup_width(e.name)
            if w is None:
                self._err(e, f"unknown identifier {e.name}", ElabError)
            return w
        if isinstance(e, ast.Index):
            return 1
        if isinstance(e, ast.Slice):
            return self.const_eval(e.msb) - self.const_eval(e.lsb) + 1
        if isinstance(e, ast.Concat):
            total = 0
            for p in e.parts:
                w = self.width_of(p)
                if w is None:
                    self._err(p, "unsized constant inside a concatenation")
                total += w
            return total
        if isinstance(e, ast.Unary):
            return self.width_of(e.operand)
        if isinstance(e, ast.Binary):
            if e.op in ("==", "!="):
                return 1
            if e.op in ("+", "-", "*"):
                self._err(e, f"operator {e.op} is only valid in constant contexts")
            wl = self.width_of(e.left)
            wr = self.width_of(e.right)
            if wl is not None and wr is not None and wl != wr:
                self._err(e, f"width mismatch: {wl} vs {wr}")
            return wl if wl is not None else wr
        if isinstance(e, ast.Ternary):
            wl = self.width_of(e.then_e)
            wr = self.width_of(e.else_e)
            if wl is not None and wr is not None and wl != wr:
                self._err(e, f"arm width mismatch: {wl} vs {wr}")
            return wl if wl is not None else wr
        raise TypeError(e)

    # -- bit evaluation

    def bits(self, e: ast.Expr, want: int | None = None) -> list[int]:
        b = self.b
        if isinstance(e, ast.Const) or (isinstance(e, ast.Ident)
                                        and self.lookup_const(e.name) is not None):
            if isinstance(e, ast.Ident):
                value, width, has_x, cbits = self.lookup_const(e.name), None, False, None
            else:
                value, width, has_x, cbits = e.value, e.width, e.has_x(), e.bits
            if width is None:
                if want is None:
                    self._err(e, "cannot infer the width of an unsized constant")
                if value < 0 or value >> want:
                    self._err(e, f"constant {value} does not fit in {want} bits")
                return [nl.TRUE if (value >> i) & 1 else nl.FALSE for i in range(want)]
            if want is not None and want != width:
                self._err(e, f"width mismatch: {width} vs expected {want}")
            out = []
            for i, bit in enumerate(cbits):
                if bit == 2:
                    out.append(self.xbit(e, i))
                else:
                    out.append(nl.TRUE if bit else nl.FALSE)
            return out
        if isinstance(e, ast.Ident):
            lits = self.lookup_bits(e.name)
            if lits is None:
                self._err(e, f"unknown identifier {e.name}", ElabError)
            if want is not None and want != len(lits):
                self._err(e, f"{e.name} has width {len(lits)}, expected {want}")
            return list(lits)
        if isinstance(e, ast.Index):
            if want is not None and want != 1:
                self._err(e, f"bit-select has width 1, expected {want}")
            return [self._select(e.name, self.const_eval(e.index), e)]
        if isinstance(e, ast.Slice):
            msb = self.const_eval(e.msb)
            lsb = self.const_eval(e.lsb)
            if msb < lsb:
                self._err(e, f"reversed slice [{msb}:{lsb}]")
            w = msb - lsb + 1
            if want is not None and want != w:
                self._err(e, f"slice has width {w}, expected {want}")
            return [self._select(e.name, i, e) for i in range(lsb, msb + 1)]
        if isinstance(e, ast.Concat):
            w = self.width_of(e)
            if want is not None and want != w:
                self._err(e, f"concatenation has width {w}, expected {want}")
            out: list[int] = []
            for p in reversed(e.parts):  # last written part is least significant
                out += self.bits(p, self.width_of(p))
            return out
        if isinstance(e, ast.Unary):
            return [nl.lit_not(x) for x in self.bits(e.operand, want)]
        if isinstance(e, ast.Binary):
            if e.op in ("==", "!="):
                if want is not None and want != 1:
                    self._err(e, f"comparison has width 1, expected {want}")
                w = self.width_of(e.left)
                if w is None:
                    w = self.width_of(e.right)
                if w is None:
                    self._err(e, "cannot infer comparison width")
                lbits = self.bits(e.left, w)
                rbits = self.bits(e.right, w)
                eq = b.and_many(b.xnor_(x, y) for x, y in zip(lbits, rbits))
                return [eq if e.op == "==" else nl.lit_not(eq)]
            if e.op in ("+", "-", "*"):
                self._err(e, f"operator {e.op} is only valid in constant contexts")
            w = want if want is not None else self.width_of(e)
            if w is None:
                self._err(e, "cannot infer operand width")
            lbits = self.bits(e.left, w)
            rbits = self.bits(e.right, w)
            op = {"&": b.and_, "|": b.or_, "^": b.xor_}[e.op]
            return [op(x, y) for x, y in zip(lbits, rbits)]
        if isinstance(e, ast.Ternary):
            cond = self.bits(e.cond, 1)[0]
            w = want if want is not None else self.width_of(e)
            if w is None:
                self._err(e, "cannot infer the width of the mux arms")
            t = self.bits(e.then_e, w)
            f = self.bits(e.else_e, w)
            return [b.mux(cond, x, y) for x, y in zip(t, f)]
        raise TypeError(e)

    def _select(self, name: str, idx: int, e) -> int:
        lits = self.lookup_bits(name)
        if lits is None:
            self._err(e, f"unknown identifier {name}", ElabError)
        lsb = self.lookup_width(name, lsb=True)
        pos = idx - lsb
        if pos < 0 or pos >= len(lits):
            self._err(e, f"index {idx} outside {name}[{lsb + len(lits) - 1}:{lsb}]")
        return lits[pos]


class _Net:
    """A declared net: bit slots plus kind (wire | reg | in | out)."""

    __slots__ = ("name", "kind", "lsb", "bits", "loc")


class _Bit:
    __slots__ = ("name", "lit", "driver", "state", "anchor", "loc")

    def __init__(self, name, loc):
        self.name = name
        self.lit = None
        self.driver = None  # () -> lit
        self.state = 0      # 0 fresh, 1 resolving, 2 done
        self.anchor = None
        self.loc = loc


class _Scope:
    def __init__(self, prefix: str, module: ast.Module, env: dict[str, int]):
        self.prefix = prefix
        self.module = module
        self.env = env
        self.nets: dict[str, _Net] = {}
        self.reg_next: dict[str, tuple[ast.RegUpdate, int]] = {}
        self.x_counter = 0

    def full(self, local: str) -> str:
        return self.prefix + local


class _Elab:
    def __init__(self, modules: list[ast.Module], xpolicy: XPolicy,
                 allow_undriven: bool):
        self.mods: dict[str, ast.Module] = {}
        for m in modules:
            if m.name in self.mods:
                raise ElabError(f"module {m.name} defined twice")
            self.mods[m.name] = m
        self.policy = xpolicy
        self.allow_undriven = allow_undriven
        self.b = nl.Builder()
        self.scopes: list[_Scope] = []
        self.hierarchy: dict[str, nl.InstanceInfo] = {}
        self.x_sources: list[XSource] = []
        # (path, module name, [(bit name, bit)] ins, [(bit name, bit)] outs)
        self._pending_instances: list[tuple] = []

    # -- scope helpers

    def evaluator(self, scope: _Scope) -> ExprEval:
        def lookup_bits(name):
            net = scope.nets.get(name)
            if net is None:
                return None
            return [self._resolve(bit) for bit in net.bits]

        def lookup_width(name, lsb=False):
            net = scope.nets.get(name)
            if net is None:
                return None if not lsb else 0
            return net.lsb if lsb else len(net.bits)

        def xbit(c: ast.Const, i: int) -> int:
            return self._x_literal(scope, c, i)

        return ExprEval(self.b, lookup_bits, lookup_width,
                        lambda n: scope.env.get(n), xbit)

    def _x_literal(self, scope: _Scope, c: ast.Const, i: int) -> int:
        name = f"{scope.prefix}$x{scope.x_counter}"
        scope.x_counter += 1
        self.x_sources.append(XSource("x-literal", name, f"{c.line}:{c.col}"))
        mode = self.policy.literals
        if mode == XMode.ZERO:
            return nl.FALSE
        if mode == XMode.ONE:
            return nl.TRUE
        return self.b.add_input(name)

    def _undriven(self, bit: _Bit) -> int:
        if not self.allow_undriven:
            raise UndrivenNet(f"net {bit.name} has no driver"
                              " (pass allow_undriven to treat it as an x source)")
        self.x_sources.append(XSource("undriven", bit.name,
                                      f"{bit.loc[0]}:{bit.loc[1]}"))
        mode = self.policy.literals
        if mode == XMode.ZERO:
            return nl.FALSE
        if mode == XMode.ONE:
            return nl.TRUE
        return self.b.add_input(bit.name)

    def _resolve(self, bit: _Bit) -> int:
        if bit.state == 2:
            return bit.lit
        if bit.state == 1:
            raise nl.CombinationalCycle([bit.name])
        bit.state = 1
        if bit.driver is None:
            bit.lit = self._undriven(bit)
        else:
            bit.lit = bit.driver()
        bit.state = 2
        return bit.lit

    # -- declaration pass

    def declare_net(self, scope: _Scope, name: str, kind: str,
                    msb_e, lsb_e, loc, ev: ExprEval) -> _Net:
        if name in scope.nets:
            raise nl.DuplicateName(scope.full(name))
        if msb_e is None:
            lsb, width, ranged = 0, 1, False
        else:
            msb = ev.const_eval(msb_e)
            lsb = ev.const_eval(lsb_e)
            width = msb - lsb + 1
            ranged = True
            if width <= 0:
                raise ZeroWidth(f"net {scope.full(name)} has width {width}")
        net = _Net()
        net.name = scope.full(name)
        net.kind = kind
        net.lsb = lsb
        net.loc = loc
        if ranged:
            net.bits = [_Bit(f"{net.name}[{lsb + i}]", loc) for i in range(width)]
        else:
            net.bits = [_Bit(net.name, loc)]
        scope.nets[name] = net
        return net

    def instantiate(self, module: ast.Module, prefix: str,
                    env: dict[str, int], stack: tuple[str, ...]) -> _Scope:
        if module.name in stack:
            raise RecursiveInstantiation(" -> ".join(stack + (module.name,)))
        scope = _Scope(prefix, module, env)
        self.scopes.append(scope)
        ev = self.evaluator(scope)
        for p in module.ports:
            self.declare_net(scope, p.name, "in" if p.direction == "input" else "out",
                             p.msb, p.lsb, (p.line, p.col), ev)
        self._do_items(scope, module.items, ev, stack + (module.name,))
        return scope

    def _do_items(self, scope: _Scope, items, ev: ExprEval, stack):
        for item in items:
            if isinstance(item, ast.WireDecl):
                self.declare_net(scope, item.name, "wire", item.msb, item.lsb,
                                 (item.line, item.col), ev)
            elif isinstance(item, ast.RegDecl):
                self._do_reg(scope, item, ev)
            elif isinstance(item, ast.Assign):
                self._do_assign(scope, item, ev)
            elif isinstance(item, ast.RegUpdate):
                if item.name not in scope.nets or scope.nets[item.name].kind != "reg":
                    raise ElabError(f"line {item.line}:{item.col}: "
                                    f"{item.name} is not a register")
                if item.name in scope.reg_next:
                    raise MultipleDrivers(f"register {scope.full(item.name)} "
                                          "has two updates")
                scope.reg_next[item.name] = (item, 0)
            elif isinstance(item, ast.Instance):
                self._do_instance(scope, item, ev, stack)
            elif isinstance(item, ast.IfItem):
                chosen = item.then_items if ev.const_eval(item.cond) else item.else_items
                self._do_items(scope, chosen, ev, stack)
            else:
                raise TypeError(item)

    def _do_reg(self, scope: _Scope, item: ast.RegDecl, ev: ExprEval):
        net = self.declare_net(scope, item.name, "reg", item.msb, item.lsb,
                               (item.line, item.col), ev)
        width = len(net.bits)
        if item.init is None:
            init_bits = [2] * width
        elif item.init.width is None:
            v = item.init.value
            if v >> width:
                raise WidthMismatch(f"init {v} does not fit register "
                                    f"{net.name} of width {width}")
            init_bits = [(v >> i) & 1 for i in range(width)]
        else:
            if item.init.width != width:
                raise WidthMismatch(f"init width {item.init.width} vs register "
                                    f"{net.name} width {width}")
            init_bits = list(item.init.bits)
        for bit, ib in zip(net.bits, init_bits):
            if ib == 2:
                self.x_sources.append(XSource(
                    "uninit-reg", bit.name, f"{item.line}:{item.col}"))
                mode = self.policy.regs
                init = (nl.Init.ZERO if mode == XMode.ZERO
                        else nl.Init.ONE if mode == XMode.ONE
                        else nl.Init.UNINIT)
            else:
                init = nl.Init.ONE if ib else nl.Init.ZERO
            bit.lit = self.b.add_register(bit.name, init)
            bit.state = 2

    def _lvalue_bits(self, scope: _Scope, target, ev: ExprEval) -> list[_Bit]:
        if isinstance(target, ast.Concat):
            out: list[_Bit] = []
            for p in reversed(target.parts):
                out += self._lvalue_bits(scope, p, ev)
            return out
        if isinstance(target, (ast.Ident, ast.Index, ast.Slice)):
            net = scope.nets.get(target.name)
            if net is None:
                raise ElabError(f"line {target.line}:{target.col}: "
                                f"unknown net {target.name}")
            if net.kind not in ("wire", "out"):
                raise MultipleDrivers(
                    f"line {target.line}:{target.col}: cannot assign to "
                    f"{net.kind} net {net.name}")
            if isinstance(target, ast.Ident):
                return list(net.bits)
            if isinstance(target, ast.Index):
                pos = ev.const_eval(target.index) - net.lsb
                if pos < 0 or pos >= len(net.bits):
                    raise WidthMismatch(f"line {target.line}:{target.col}: "
                                        f"index outside {net.name}")
                return [net.bits[pos]]
            msb = ev.const_eval(target.msb) - net.lsb
            lsb = ev.const_eval(target.lsb) - net.lsb
            if lsb < 0 or msb >= len(net.bits) or msb < lsb:
                raise WidthMismatch(f"line {target.line}:{target.col}: "
                                    f"slice outside {net.name}")
            return net.bits[lsb:msb + 1]
        raise ElabError(f"line {target.line}:{target.col}: not assignable")

    def _do_assign(self, scope: _Scope, item: ast.Assign, ev: ExprEval):
        bits = self._lvalue_bits(scope, item.target, ev)
        want = len(bits)
        memo: dict[str, list[int]] = {}

        def value():
            if "v" not in memo:
                memo["v"] = ev.bits(item.expr, want)
            return memo["v"]

        for i, bit in enumerate(bits):
            if bit.driver is not None or bit.lit is not None:
                raise MultipleDrivers(f"net bit {bit.name} driven twice "
                                      f"(line {item.line}:{item.col})")
            bit.driver = (lambda i=i: value()[i])

    def _do_instance(self, scope: _Scope, item: ast.Instance, ev: ExprEval, stack):
        child_mod = self.mods.get(item.module)
        if child_mod is None:
            raise UnknownModule(f"line {item.line}:{item.col}: "
                                f"unknown module {item.module}")
        declared = dict(child_mod.params)
        env: dict[str, int] = {}
        for pname, default in child_mod.params:
            env[pname] = ExprEval(self.b, lambda n: None, lambda n, lsb=False: None,
                                  lambda n: env.get(n)).const_eval(default)
        for pname, oexpr in item.overrides:
            if pname not in declared:
                raise UnknownParameter(f"line {item.line}:{item.col}: "
                                       f"{item.module} has no parameter {pname}")
            env[pname] = ev.const_eval(oexpr)

        path = scope.prefix + item.name
        if path in self.hierarchy:
            raise nl.DuplicateName(path)
        child = self.instantiate(child_mod, path + ".", env, stack)
        cev = self.evaluator(child)

        ports = child_mod.ports
        conns: dict[str, ast.Expr] = {}
        if any(p is None for p, _ in item.conns):
            if not all(p is None for p, _ in item.conns):
                raise ElabError(f"line {item.line}:{item.col}: "
                                "mixed positional and named connections")
            if len(item.conns) != len(ports):
                raise ElabError(f"line {item.line}:{item.col}: {item.module} has "
                                f"{len(ports)} ports, {len(item.conns)} connected")
            conns = {p.name: e for p, (_, e) in zip(ports, item.conns)}
        else:
            for pname, e in item.conns:
                if pname in conns:
                    raise ElabError(f"line {item.line}:{item.col}: "
                                    f"port {pname} connected twice")
                conns[pname] = e
        port_names = {p.name for p in ports}
        for pname in conns:
            if pname not in port_names:
                raise ElabError(f"line {item.line}:{item.col}: "
                                f"{item.module} has no port {pname}")

        in_bits: list[tuple[str, _Bit]] = []
        out_bits: list[tuple[str, _Bit]] = []
        for p in ports:
            if p.name not in conns:
                raise ElabError(f"line {item.line}:{item.col}: "
                                f"port {p.name} not connected")
            cexpr = conns[p.name]
            cnet = child.nets[p.name]
            width = len(cnet.bits)
            if p.direction == "input":
                memo: dict[str, list[int]] = {}

                def value(cexpr=cexpr, width=width, memo=memo):
                    if "v" not in memo:
                        memo["v"] = ev.bits(cexpr, width)
                    return memo["v"]

                for i, bit in enumerate(cnet.bits):
                    if bit.driver is not None:
                        raise MultipleDrivers(f"net bit {bit.name} driven twice")
                    bit.driver = (lambda i=i, value=value: value()[i])
                    in_bits.append((bit.name, bit))
            else:
                tbits = self._lvalue_bits(scope, cexpr, ev)
                if len(tbits) != width:
                    raise WidthMismatch(
                        f"line {item.line}:{item.col}: port {p.name} has width "
                        f"{width}, connection has {len(tbits)}")
                for tbit, cbit in zip(tbits, cnet.bits):
                    if tbit.driver is not None or tbit.lit is not None:
                        raise MultipleDrivers(f"net bit {tbit.name} driven twice")
                    tbit.driver = (lambda cbit=cbit: self._anchored(cbit))
                    out_bits.append((cbit.name, cbit))
        self._pending_instances.append((path, item.module, in_bits, out_bits))

    def _anchored(self, bit: _Bit) -> int:
        if bit.anchor is None:
            bit.anchor = self.b.anchor(self._resolve(bit))
        return bit.anchor

    # -- final resolution

    def run(self, top: ast.Module, params: dict[str, int] | None) -> nl.Netlist:
        env: dict[str, int] = {}
        declared = [n for n, _ in top.params]
        for pname, default in top.params:
            env[pname] = ExprEval(self.b, lambda n: None, lambda n, lsb=False: None,
                                  lambda n: env.get(n)).const_eval(default)
        for pname, val in (params or {}).items():
            if pname not in declared:
                raise UnknownParameter(f"top module {top.name} has no "
                                       f"parameter {pname}")
            env[pname] = int(val)

        scope = _Scope("", top, env)
        self.scopes.append(scope)
        ev = self.evaluator(scope)
        for p in top.ports:
            net = self.declare_net(scope, p.name, "in" if p.direction == "input"
                                   else "out", p.msb, p.lsb, (p.line, p.col), ev)
            if p.direction == "input":
                for bit in net.bits:
                    bit.lit = self.b.add_input(bit.name)
                    bit.state = 2
        self._do_items(scope, top.items, ev, (top.name,))

        # resolve every declared bit in declaration order
        for sc in self.scopes:
            for net in sc.nets.values():
                for bit in net.bits:
                    self._resolve(bit)
        # register next-state expressions
        for sc in self.scopes:
            scev = self.evaluator(sc)
            for rname, (item, _) in sorted(sc.reg_next.items()):
                net = sc.nets[rname]
                bits = scev.bits(item.expr, len(net.bits))
                for bit, nxt in zip(net.bits, bits):
                    self.b.set_next(bit.lit, nxt)
            for rname, net in sc.nets.items():
                if net.kind == "reg" and rname not in sc.reg_next:
                    raise ElabError(f"register {net.name} has no update")
        # anchors for instance boundaries
        for path, modname, in_bits, out_bits in self._pending_instances:
            info = nl.InstanceInfo(
                path, modname,
                tuple((n, self._resolve(bit)) for n, bit in in_bits),
                tuple((n, nl.lit_var(self._anchored(bit))) for n, bit in out_bits),
            )
            self.hierarchy[path] = info

        for p in top.ports:
            if p.direction == "output":
                for bit in scope.nets[p.name].bits:
                    self.b.add_output(bit.name, bit.lit)
        for sc in self.scopes:
            for net in sc.nets.values():
                for bit in net.bits:
                    self.b.alias(bit.name, bit.lit)
        n = self.b.finish(self.hierarchy)
        nl.validate(n)
        return n


def elaborate(modules: list[ast.Module], top: str,
              params: dict[str, int] | None = None,
              xpolicy: XPolicy | None = None,
              allow_undriven: bool = False) -> nl.Netlist:
    """Flatten and bit-blast ``top``; see the module docstring for the rules."""
    table = {m.name: m for m in modules}
    if top not in table:
        raise UnknownModule(f"no module named {top}")
    el = _Elab(modules, xpolicy or XPolicy(), allow_undriven)
    return el.run(table[top], params)


def list_x_sources(modules: list[ast.Module], top: str,
                   params: dict[str, int] | None = None) -> list[XSource]:
    """Every uninitialized register bit, x constant digit, and undriven
    net bit in the elaborated design, with source positions."""
    table = {m.name: m for m in modules}
    if top not in table:
        raise UnknownModule(f"no module named {top}")
    el = _Elab(modules, XPolicy.uniform(XMode.SYMBOLIC), allow_undriven=True)
    el.run(table[top], params)
    return el.x_sources


def build_expr(builder: nl.Builder, text: str,
               env: dict[str, list[int]], what: str = "expression") -> int:
    """Elaborate a bare SNL expression over named bit vectors to one literal.

    Used for constraints, compare qualifiers, and case predicates; the
    result must be 1 bit wide and x digits are rejected.
    """
    e = parse_expr_text(text)
    ev = ExprEval(builder,
                  lambda n: env.get(n),
                  lambda n, lsb=False: (0 if lsb else
                                        (len(env[n]) if n in env else None)))
    bits = ev.bits(e, None)
    if len(bits) != 1:
        raise WidthMismatch(f"{what} {text!r} has width {len(bits)}, expected 1")
    return bits[0]
