"""AST for the SNL hardware description subset, plus a source printer.

Source positions are carried on every node but excluded from equality,
so printing and re-parsing yields an AST equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def _pos():
    return field(default=0, compare=False, repr=False)


# -- expressions -------------------------------------------------------


@dataclass
class Const:
    width: int | None            # None: unsized decimal
    bits: tuple[int, ...] | None  # LSB-first, 0 / 1 / 2 (= x); sized only
    value: int | None            # unsized only
    line: int = _pos()
    col: int = _pos()

    @staticmethod
    def unsized(value: int) -> "Const":
        return Const(None, None, value)

    @staticmethod
    def sized(width: int, value: int) -> "Const":
        return Const(width, tuple((value >> i) & 1 for i in range(width)), None)

    def has_x(self) -> bool:
        return self.bits is not None and 2 in self.bits


@dataclass
class Ident:
    name: str
    line: int = _pos()
    col: int = _pos()


@dataclass
class Index:
    name: str
    index: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass
class Slice:
    name: str
    msb: "Expr"
    lsb: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass
class Concat:
    parts: list["Expr"]  # MSB part first, as written
    line: int = _pos()
    col: int = _pos()


@dataclass
class Unary:
    op: str  # ~
    operand: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass
class Binary:
    op: str  # & | ^ == !=
    left: "Expr"
    right: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass
class Ternary:
    cond: "Expr"
    then_e: "Expr"
    else_e: "Expr"
    line: int = _pos()
    col: int = _pos()


Expr = Const | Ident | Index | Slice | Concat | Unary | Binary | Ternary


# -- module items ------------------------------------------------------


@dataclass
class PortDecl:
    direction: str  # input | output
    name: str
    msb: Expr | None
    lsb: Expr | None
    line: int = _pos()
    col: int = _pos()


@dataclass
class WireDecl:
    name: str
    msb: Expr | None
    lsb: Expr | None
    line: int = _pos()
    col: int = _pos()


@dataclass
class RegDecl:
    name: str
    msb: Expr | None
    lsb: Expr | None
    init: Const | None  # None: uninit
    line: int = _pos()
    col: int = _pos()


@dataclass
class Assign:
    target: Expr  # Ident | Index | Slice | Concat of those
    expr: Expr
    line: int = _pos()
    col: int = _pos()


@dataclass
class RegUpdate:
    name: str
    expr: Expr
    line: int = _pos()
    col: int = _pos()


@dataclass
class Instance:
    module: str
    name: str
    overrides: list[tuple[str, Expr]]
    conns: list[tuple[str | None, Expr]]  # port name (None = positional), expr
    line: int = _pos()
    col: int = _pos()


@dataclass
class IfItem:
    cond: Expr
    then_items: list["Item"]
    else_items: list["Item"]
    line: int = _pos()
    col: int = _pos()


Item = WireDecl | Assign | RegDecl | RegUpdate | Instance | IfItem


@dataclass
class Module:
    name: str
    params: list[tuple[str, Expr]]
    ports: list[PortDecl]
    items: list[Item]
    line: int = _pos()
    col: int = _pos()


# -- printer -----------------------------------------------------------

_PREC = {"?:": 0, "|": 1, "^": 2, "&": 3, "==": 4, "!=": 4, "+": 5, "-": 5, "*": 6}


def expr_to_source(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Const):
        if e.width is None:
            return str(e.value)
        digits = "".join("01x"[b] for b in reversed(e.bits))
        return f"{e.width}'b{digits}"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{expr_to_source(e.index)}]"
    if isinstance(e, Slice):
        return f"{e.name}[{expr_to_source(e.msb)}:{expr_to_source(e.lsb)}]"
    if isinstance(e, Concat):
        return "{" + ", ".join(expr_to_source(p) for p in e.parts) + "}"
    if isinstance(e, Unary):
        return "~" + expr_to_source(e.operand, 7)
    if isinstance(e, Binary):
        p = _PREC[e.op]
        s = f"{expr_to_source(e.left, p)} {e.op} {expr_to_source(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, Ternary):
        s = (f"{expr_to_source(e.cond, 1)} ? {expr_to_source(e.then_e)}"
             f" : {expr_to_source(e.else_e)}")
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not an expression: {e!r}")


def _range_to_source(msb, lsb) -> str:
    if msb is None:
        return ""
    return f"[{expr_to_source(msb)}:{expr_to_source(lsb)}] "


def _item_to_source(item: Item, indent: str) -> list[str]:
    if isinstance(item, WireDecl):
        return [f"{indent}wire {_range_to_source(item.msb, item.lsb)}{item.name};"]
    if isinstance(item, Assign):
        return [f"{indent}assign {expr_to_source(item.target)} = {expr_to_source(item.expr)};"]
    if isinstance(item, RegDecl):
        init = "uninit" if item.init is None else expr_to_source(item.init)
        return [f"{indent}reg {_range_to_source(item.msb, item.lsb)}{item.name} init {init};"]
    if isinstance(item, RegUpdate):
        return [f"{indent}always {item.name} <= {expr_to_source(item.expr)};"]
    if isinstance(item, Instance):
        ov = ""
        if item.overrides:
            ov = " #(" + ", ".join(f".{n}({expr_to_source(e)})" for n, e in item.overrides) + ")"
        conns = ", ".join(
            expr_to_source(e) if p is None else f".{p}({expr_to_source(e)})"
            for p, e in item.conns)
        return [f"{indent}{item.module}{ov} {item.name}({conns});"]
    if isinstance(item, IfItem):
        lines = [f"{indent}if ({expr_to_source(item.cond)})"]
        for it in item.then_items:
            lines += _item_to_source(it, indent + "  ")
        if item.else_items:
            lines.append(f"{indent}else")
            for it in item.else_items:
                lines += _item_to_source(it, indent + "  ")
        lines.append(f"{indent}endif")
        return lines
    raise TypeError(f"not an item: {item!r}")


def to_source(modules: list[Module]) -> str:
    """Render modules back to SNL text (canonical formatting)."""
    out: list[str] = []
    for m in modules:
        head = f"module {m.name}"
        if m.params:
            head += " #(" + ", ".join(
                f"param {n} = {expr_to_source(e)}" for n, e in m.params) + ")"
        ports = ", ".join(
            f"{p.direction} {_range_to_source(p.msb, p.lsb)}{p.name}" for p in m.ports)
        out.append(f"{head}({ports});")
        for item in m.items:
            out += _item_to_source(item, "  ")
        out.append("endmodule")
        out.append("")
    return "\n".join(out)
