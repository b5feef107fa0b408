"""SPEC/IMP correspondence: name and signature matching, plus iterative
refinement that keeps only register pairs the engines can prove invariant.

Register pairs are compared same-cycle; anything retimed is simply
dropped and the proof continues without it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from seqeq.netlist import Netlist
from seqeq.sim import SignatureTable


class MapError(Exception):
    pass


class AmbiguousRule(MapError):
    pass


class SignatureMismatchConfig(MapError):
    pass


class Tag(Enum):
    ASSUMED = "ASSUMED"
    CANDIDATE = "CANDIDATE"
    PROVEN = "PROVEN"
    DROPPED = "DROPPED"


@dataclass
class OutputPair:
    spec: str
    imp: str
    latency: tuple[int, int] = (0, 0)


@dataclass
class RegPair:
    spec: str
    imp: str
    tag: Tag = Tag.CANDIDATE
    note: str = ""


@dataclass
class Mapping:
    input_pairs: list[tuple[str, str]] = field(default_factory=list)
    output_pairs: list[OutputPair] = field(default_factory=list)
    reg_pairs: list[RegPair] = field(default_factory=list)
    qualifier: str | None = None
    unobserved_inputs: set[tuple[str, str]] = field(default_factory=set)  # (side, name)
    unobserved_outputs: set[tuple[str, str]] = field(default_factory=set)
    unmatched: dict[str, list[str]] = field(default_factory=dict)

    def reg_pair_names(self) -> set[str]:
        return {p.spec for p in self.reg_pairs} | {p.imp for p in self.reg_pairs}

    def proven_pairs(self) -> list[RegPair]:
        return [p for p in self.reg_pairs if p.tag in (Tag.PROVEN, Tag.ASSUMED)]


def _apply_rules(name: str, rules) -> str:
    for pat, repl in rules:
        name = re.sub(pat, repl, name)
    return name


def map_by_name(spec: Netlist, imp: Netlist, rename_rules=(),
                base: Mapping | None = None) -> Mapping:
    """Pair every input, output, and register whose (rule-transformed)
    spec name exists on the imp side; registers start as CANDIDATEs.

    ``rename_rules`` are ordered (pattern, replacement) regex
    substitutions applied to spec names before lookup.  Explicit pairs
    in ``base`` win and are never overridden.
    """
    m = base or Mapping()
    taken_spec = {s for s, _ in m.input_pairs} | {p.spec for p in m.output_pairs} \
        | {p.spec for p in m.reg_pairs}
    taken_imp = {i for _, i in m.input_pairs} | {p.imp for p in m.output_pairs} \
        | {p.imp for p in m.reg_pairs}

    def match(spec_names, imp_names, kind):
        imp_set = set(imp_names)
        found = []
        used_targets: dict[str, str] = {}
        missing = []
        for sname in spec_names:
            if sname in taken_spec:
                continue
            t = _apply_rules(sname, rename_rules)
            if t in used_targets:
                raise AmbiguousRule(
                    f"{kind} names {used_targets[t]} and {sname} both map to {t}")
            if t in imp_set and t not in taken_imp:
                used_targets[t] = sname
                found.append((sname, t))
            else:
                missing.append(sname)
        return found, missing

    spec_in = [n for n, _ in spec.inputs]
    imp_in = [n for n, _ in imp.inputs]
    pairs, miss_in = match(spec_in, imp_in, "input")
    m.input_pairs.extend(pairs)

    spec_out = [n for n, _ in spec.outputs]
    imp_out = [n for n, _ in imp.outputs]
    pairs, miss_out = match(spec_out, imp_out, "output")
    m.output_pairs.extend(OutputPair(s, i) for s, i in pairs)

    spec_regs = [r.name for r in spec.registers]
    imp_regs = [r.name for r in imp.registers]
    pairs, miss_regs = match(spec_regs, imp_regs, "register")
    m.reg_pairs.extend(RegPair(s, i) for s, i in pairs)

    paired_imp_in = {i for _, i in m.input_pairs}
    paired_imp_out = {p.imp for p in m.output_pairs}
    paired_imp_regs = {p.imp for p in m.reg_pairs}
    m.unmatched = {
        "spec_inputs": miss_in,
        "imp_inputs": [n for n in imp_in if n not in paired_imp_in],
        "spec_outputs": miss_out,
        "imp_outputs": [n for n in imp_out if n not in paired_imp_out],
        "spec_registers": miss_regs,
        "imp_registers": [n for n in imp_regs if n not in paired_imp_regs],
    }
    return m


def map_by_signature(spec: Netlist, imp: Netlist,
                     spec_sigs: SignatureTable, imp_sigs: SignatureTable,
                     mapping: Mapping) -> list[RegPair]:
    """Add CANDIDATE register pairs whose simulation signatures match
    uniquely on both sides; collisions stay unpaired.  Never overrides
    existing pairs.  Returns the pairs added."""
    for attr in ("runs", "depth", "seed"):
        if getattr(spec_sigs, attr) != getattr(imp_sigs, attr):
            raise SignatureMismatchConfig(
                f"signature {attr} differs: {getattr(spec_sigs, attr)}"
                f" vs {getattr(imp_sigs, attr)}")
    taken = mapping.reg_pair_names()

    def unique_by_sig(net, sigs, skip):
        groups: dict[tuple, list] = {}
        for r in net.registers:
            if r.name in skip:
                continue
            inv, d, x = sigs.canonical(r.var << 1)
            groups.setdefault((d, x), []).append((r.name, inv))
        return {sig: entries[0] for sig, entries in groups.items()
                if len(entries) == 1}

    spec_u = unique_by_sig(spec, spec_sigs, taken)
    imp_u = unique_by_sig(imp, imp_sigs, taken)
    added = []
    for sig in sorted(set(spec_u) & set(imp_u)):
        (sname, sinv) = spec_u[sig]
        (iname, iinv) = imp_u[sig]
        if sinv != iinv:
            continue  # complements, not equals
        pair = RegPair(sname, iname, Tag.CANDIDATE, "signature")
        mapping.reg_pairs.append(pair)
        added.append(pair)
    return added


def refine_mapping(task) -> Mapping:
    """Prove or drop CANDIDATE register pairs until no tag changes.

    Each pass tries to prove every remaining candidate always-equal on
    its cone-reduced sub-product (previously proven pairs assumed);
    concrete disproofs record the falsifying cycle, and candidates that
    survive to the fixpoint without either outcome are dropped with a
    no-trace note so they can be inspected.  PROVEN pairs become helper
    lemmas for the output proof.  Budget exhaustion leaves the remaining
    candidates untagged, reported in mapping.unmatched.
    """
    from seqeq import sec

    return sec.refine_mapping_impl(task)
