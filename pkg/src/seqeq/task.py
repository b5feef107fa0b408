"""Shared task description and verdict types for the checking engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from seqeq.netlist import Netlist
from seqeq.sim import Trace


class TaskError(Exception):
    pass


class Status(Enum):
    EQUIVALENT = "EQUIVALENT"
    NOT_EQUIVALENT = "NOT_EQUIVALENT"
    INCONCLUSIVE = "INCONCLUSIVE"
    VACUOUS = "VACUOUS"


@dataclass
class Budgets:
    bmc_depth: int = 50
    k_max: int = 20
    conflicts: int = 1_000_000
    jobs: int = 1
    seed: int = 0

    # sub-proof budgets for register-pair and helper-point lemmas
    lemma_bmc: int = 16
    lemma_k: int = 8
    lemma_conflicts: int = 50_000


@dataclass
class EquivalenceTask:
    """Everything one equivalence run needs: both designs, the
    correspondence, environment assumptions, and engine knobs."""

    spec: Netlist
    imp: Netlist
    mapping: "Mapping"
    constraints: list[str] = field(default_factory=list)
    helpers: list[tuple[str, str]] = field(default_factory=list)
    cases: dict[str, str] = field(default_factory=dict)
    budgets: Budgets = field(default_factory=Budgets)
    refine: bool = False
    name: str = ""


@dataclass
class OutputReport:
    spec: str
    imp: str
    latency: tuple[int, int]
    result: str  # proved | failed | unknown


@dataclass
class Verdict:
    status: Status
    trace: Trace | None = None
    induction_k: int | None = None
    bmc_depth: int | None = None
    helpers_used: list[tuple[str, str]] = field(default_factory=list)
    per_output: list[OutputReport] = field(default_factory=list)
    hardest: list[str] = field(default_factory=list)
    cases: dict[str, "Verdict"] | None = None
    reason: str = ""
    wall_time: float = 0.0

    def exit_code(self) -> int:
        if self.status == Status.EQUIVALENT:
            return 0
        if self.status == Status.NOT_EQUIVALENT:
            return 1
        return 2

    def headline(self) -> str:
        if self.status == Status.EQUIVALENT:
            k = f" (k={self.induction_k})" if self.induction_k is not None else ""
            return f"EQUIVALENT{k}"
        if self.status == Status.NOT_EQUIVALENT:
            at = ""
            if self.trace is not None and self.trace.mismatch:
                at = f" at cycle {self.trace.mismatch[0]}"
            return f"NOT_EQUIVALENT{at}"
        if self.status == Status.VACUOUS:
            return f"VACUOUS ({self.reason})" if self.reason else "VACUOUS"
        parts = []
        if self.bmc_depth is not None:
            parts.append(f"bmc depth {self.bmc_depth}")
        if self.induction_k is not None:
            parts.append(f"k {self.induction_k}")
        detail = ", ".join(parts)
        return f"INCONCLUSIVE ({detail})" if detail else "INCONCLUSIVE"
