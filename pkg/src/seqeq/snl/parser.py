"""Hand-written lexer and recursive-descent parser for SNL.

Binding strength, weakest first: ?: then | then ^ then & then == / !=
then unary ~.  Concatenation, indexing, slicing, parentheses, constants
and identifiers are primaries.  Comments run from // to end of line.
"""

from __future__ import annotations

import re

from seqeq.snl import ast


class ParseError(Exception):
    def __init__(self, line: int, col: int, expected: str, got: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.got = got
        what = f"expected {expected}"
        if got:
            what += f", got {got}"
        super().__init__(f"line {line}:{col}: {what}")


class DuplicatePort(ParseError):
    def __init__(self, line, col, name):
        self.name = name
        Exception.__init__(self, f"line {line}:{col}: duplicate port {name}")
        self.line, self.col, self.expected, self.got = line, col, "unique port name", name


KEYWORDS = {
    "module", "endmodule", "input", "output", "wire", "reg", "init",
    "uninit", "assign", "always", "if", "else", "endif", "param",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<sized>\d+'[bB][01xX_]+|\d+'[dD][0-9_]+)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|==|!=|[()\[\]{};,.#=?:|&^~+\-*])
    """,
    re.VERBOSE,
)


def tokenize(text: str):
    """Yields (kind, value, line, col); kind in {sized,num,id,kw,op,eof}."""
    line, col, pos = 1, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(line, col, "a token", repr(text[pos]))
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(val)
        else:
            if kind == "id" and val in KEYWORDS:
                kind = "kw"
            yield (kind, val, line, col)
            col += len(val)
        pos = m.end()
    yield ("eof", "", line, col)


def _parse_sized_const(text: str, line: int, col: int) -> ast.Const:
    width_s, _, rest = text.partition("'")
    base = rest[0].lower()
    digits = rest[1:].replace("_", "")
    width = int(width_s)
    if width <= 0:
        raise ParseError(line, col, "a positive constant width", width_s)
    if base == "d":
        value = int(digits)
        if value >> width:
            raise ParseError(line, col, f"a value fitting {width} bits", digits)
        bits = tuple((value >> i) & 1 for i in range(width))
    else:
        if len(digits) != width:
            raise ParseError(line, col, f"{width} binary digits", digits)
        bits = tuple(2 if c in "xX" else int(c) for c in reversed(digits))
    return ast.Const(width, bits, None, line, col)


class Parser:
    def __init__(self, text: str):
        self.toks = list(tokenize(text))
        self.i = 0

    # -- token helpers

    def peek(self):
        return self.toks[self.i]

    def at(self, kind, val=None):
        k, v, _, _ = self.toks[self.i]
        return k == kind and (val is None or v == val)

    def take(self, kind, val=None):
        k, v, line, col = self.toks[self.i]
        if k != kind or (val is not None and v != val):
            raise ParseError(line, col, val or kind, v or "end of input")
        self.i += 1
        return v, line, col

    def take_id(self):
        return self.take("id")

    # -- grammar

    def parse_modules(self) -> list[ast.Module]:
        mods = []
        while not self.at("eof"):
            mods.append(self.parse_module())
        return mods

    def parse_module(self) -> ast.Module:
        _, line, col = self.take("kw", "module")
        name, _, _ = self.take_id()
        params: list[tuple[str, ast.Expr]] = []
        if self.at("op", "#"):
            self.take("op", "#")
            self.take("op", "(")
            while True:
                self.take("kw", "param")
                pname, _, _ = self.take_id()
                self.take("op", "=")
                params.append((pname, self.parse_expr()))
                if not self.at("op", ","):
                    break
                self.take("op", ",")
            self.take("op", ")")
        self.take("op", "(")
        ports: list[ast.PortDecl] = []
        seen_ports: set[str] = set()
        if not self.at("op", ")"):
            while True:
                ports.append(self._parse_port(seen_ports))
                if not self.at("op", ","):
                    break
                self.take("op", ",")
        self.take("op", ")")
        self.take("op", ";")
        items = self._parse_items(("endmodule",))
        self.take("kw", "endmodule")
        return ast.Module(name, params, ports, items, line, col)

    def _parse_port(self, seen: set[str]) -> ast.PortDecl:
        k, v, line, col = self.peek()
        if not (k == "kw" and v in ("input", "output")):
            raise ParseError(line, col, "input or output", v)
        self.i += 1
        msb, lsb = self._parse_range_opt()
        name, nline, ncol = self.take_id()
        if name in seen:
            raise DuplicatePort(nline, ncol, name)
        seen.add(name)
        return ast.PortDecl(v, name, msb, lsb, line, col)

    def _parse_range_opt(self):
        if self.at("op", "["):
            self.take("op", "[")
            msb = self.parse_expr()
            self.take("op", ":")
            lsb = self.parse_expr()
            self.take("op", "]")
            return msb, lsb
        return None, None

    def _parse_items(self, stop_kws) -> list[ast.Item]:
        items = []
        while True:
            k, v, _, _ = self.peek()
            if k == "kw" and v in stop_kws or k == "eof":
                return items
            items.append(self._parse_item())

    def _parse_item(self) -> ast.Item:
        k, v, line, col = self.peek()
        if k == "kw" and v == "wire":
            self.i += 1
            msb, lsb = self._parse_range_opt()
            name, _, _ = self.take_id()
            self.take("op", ";")
            return ast.WireDecl(name, msb, lsb, line, col)
        if k == "kw" and v == "assign":
            self.i += 1
            target = self._parse_lvalue()
            self.take("op", "=")
            expr = self.parse_expr()
            self.take("op", ";")
            return ast.Assign(target, expr, line, col)
        if k == "kw" and v == "reg":
            self.i += 1
            msb, lsb = self._parse_range_opt()
            name, _, _ = self.take_id()
            self.take("kw", "init")
            if self.at("kw", "uninit"):
                self.take("kw", "uninit")
                init = None
            else:
                init = self._parse_const()
            self.take("op", ";")
            return ast.RegDecl(name, msb, lsb, init, line, col)
        if k == "kw" and v == "always":
            self.i += 1
            name, _, _ = self.take_id()
            self.take("op", "<=")
            expr = self.parse_expr()
            self.take("op", ";")
            return ast.RegUpdate(name, expr, line, col)
        if k == "kw" and v == "if":
            self.i += 1
            self.take("op", "(")
            cond = self.parse_expr()
            self.take("op", ")")
            then_items = self._parse_items(("else", "endif"))
            else_items: list[ast.Item] = []
            if self.at("kw", "else"):
                self.take("kw", "else")
                else_items = self._parse_items(("endif",))
            self.take("kw", "endif")
            return ast.IfItem(cond, then_items, else_items, line, col)
        if k == "id":
            return self._parse_instance()
        raise ParseError(line, col, "an item (wire/assign/reg/always/if/instance)", v)

    def _parse_instance(self) -> ast.Instance:
        module, line, col = self.take_id()
        overrides: list[tuple[str, ast.Expr]] = []
        if self.at("op", "#"):
            self.take("op", "#")
            self.take("op", "(")
            while True:
                if self.at("op", "."):
                    self.take("op", ".")
                    pname, _, _ = self.take_id()
                    self.take("op", "(")
                    overrides.append((pname, self.parse_expr()))
                    self.take("op", ")")
                else:
                    pname, _, _ = self.take_id()
                    self.take("op", "=")
                    overrides.append((pname, self.parse_expr()))
                if not self.at("op", ","):
                    break
                self.take("op", ",")
            self.take("op", ")")
        name, _, _ = self.take_id()
        self.take("op", "(")
        conns: list[tuple[str | None, ast.Expr]] = []
        if not self.at("op", ")"):
            while True:
                if self.at("op", "."):
                    self.take("op", ".")
                    pname, _, _ = self.take_id()
                    self.take("op", "(")
                    conns.append((pname, self.parse_expr()))
                    self.take("op", ")")
                else:
                    conns.append((None, self.parse_expr()))
                if not self.at("op", ","):
                    break
                self.take("op", ",")
        self.take("op", ")")
        self.take("op", ";")
        return ast.Instance(module, name, overrides, conns, line, col)

    def _parse_lvalue(self) -> ast.Expr:
        k, v, line, col = self.peek()
        if k == "op" and v == "{":
            self.take("op", "{")
            parts = [self._parse_lvalue()]
            while self.at("op", ","):
                self.take("op", ",")
                parts.append(self._parse_lvalue())
            self.take("op", "}")
            return ast.Concat(parts, line, col)
        name, line, col = self.take_id()
        return self._maybe_select(name, line, col)

    def _maybe_select(self, name, line, col) -> ast.Expr:
        if self.at("op", "["):
            self.take("op", "[")
            first = self.parse_expr()
            if self.at("op", ":"):
                self.take("op", ":")
                lsb = self.parse_expr()
                self.take("op", "]")
                return ast.Slice(name, first, lsb, line, col)
            self.take("op", "]")
            return ast.Index(name, first, line, col)
        return ast.Ident(name, line, col)

    def _parse_const(self) -> ast.Const:
        k, v, line, col = self.peek()
        if k == "sized":
            self.i += 1
            return _parse_sized_const(v, line, col)
        if k == "num":
            self.i += 1
            return ast.Const(None, None, int(v), line, col)
        raise ParseError(line, col, "a constant", v)

    # expression precedence: ternary < | < ^ < & < ==/!= < ~ < primary

    def parse_expr(self) -> ast.Expr:
        cond = self._parse_or()
        if self.at("op", "?"):
            _, line, col = self.take("op", "?")
            then_e = self.parse_expr()
            self.take("op", ":")
            else_e = self.parse_expr()
            return ast.Ternary(cond, then_e, else_e, line, col)
        return cond

    def _parse_or(self) -> ast.Expr:
        e = self._parse_xor()
        while self.at("op", "|"):
            _, line, col = self.take("op", "|")
            e = ast.Binary("|", e, self._parse_xor(), line, col)
        return e

    def _parse_xor(self) -> ast.Expr:
        e = self._parse_and()
        while self.at("op", "^"):
            _, line, col = self.take("op", "^")
            e = ast.Binary("^", e, self._parse_and(), line, col)
        return e

    def _parse_and(self) -> ast.Expr:
        e = self._parse_eq()
        while self.at("op", "&"):
            _, line, col = self.take("op", "&")
            e = ast.Binary("&", e, self._parse_eq(), line, col)
        return e

    def _parse_eq(self) -> ast.Expr:
        e = self._parse_add()
        while self.at("op", "==") or self.at("op", "!="):
            op, line, col = self.take("op")
            e = ast.Binary(op, e, self._parse_add(), line, col)
        return e

    # + - * exist for constant contexts (parameter math, ranges); the
    # elaborator rejects them on signals

    def _parse_add(self) -> ast.Expr:
        e = self._parse_mul()
        while self.at("op", "+") or self.at("op", "-"):
            op, line, col = self.take("op")
            e = ast.Binary(op, e, self._parse_mul(), line, col)
        return e

    def _parse_mul(self) -> ast.Expr:
        e = self._parse_unary()
        while self.at("op", "*"):
            op, line, col = self.take("op")
            e = ast.Binary(op, e, self._parse_unary(), line, col)
        return e

    def _parse_unary(self) -> ast.Expr:
        if self.at("op", "~"):
            _, line, col = self.take("op", "~")
            return ast.Unary("~", self._parse_unary(), line, col)
        return self._parse_primary()

    def _parse_primary(self) -> ast.Expr:
        k, v, line, col = self.peek()
        if k == "op" and v == "(":
            self.take("op", "(")
            e = self.parse_expr()
            self.take("op", ")")
            return e
        if k == "op" and v == "{":
            self.take("op", "{")
            parts = [self.parse_expr()]
            while self.at("op", ","):
                self.take("op", ",")
                parts.append(self.parse_expr())
            self.take("op", "}")
            return ast.Concat(parts, line, col)
        if k in ("sized", "num"):
            return self._parse_const()
        if k == "id":
            self.i += 1
            return self._maybe_select(v, line, col)
        raise ParseError(line, col, "an expression", v or "end of input")


def parse(text: str) -> list[ast.Module]:
    """Parse SNL source text into modules; raises ParseError with position."""
    p = Parser(text)
    return p.parse_modules()


def parse_expr_text(text: str) -> ast.Expr:
    """Parse a bare expression (constraints, qualifiers, case predicates)."""
    p = Parser(text)
    e = p.parse_expr()
    k, v, line, col = p.peek()
    if k != "eof":
        raise ParseError(line, col, "end of expression", v)
    return e
