"""SNL frontend: parser, AST, and elaboration to the bit-level netlist."""

from seqeq.snl.ast import (
    Assign, Binary, Concat, Const, Ident, IfItem, Index, Instance, Module,
    PortDecl, RegDecl, RegUpdate, Slice, Ternary, Unary, WireDecl, to_source,
)
from seqeq.snl.parser import ParseError, parse, parse_expr_text
from seqeq.snl.elaborate import (
    ElabError, MultipleDrivers, RecursiveInstantiation, UndrivenNet,
    UnknownModule, UnknownParameter, WidthMismatch, XMode, XPolicy, XSource,
    ZeroWidth, build_expr, elaborate, list_x_sources,
)

__all__ = [
    "Assign", "Binary", "Concat", "Const", "Ident", "IfItem", "Index",
    "Instance", "Module", "PortDecl", "RegDecl", "RegUpdate", "Slice",
    "Ternary", "Unary", "WireDecl", "to_source",
    "ParseError", "parse", "parse_expr_text",
    "ElabError", "MultipleDrivers", "RecursiveInstantiation", "UndrivenNet",
    "UnknownModule", "UnknownParameter", "WidthMismatch", "XMode", "XPolicy",
    "XSource", "ZeroWidth", "build_expr", "elaborate", "list_x_sources",
]
