"""
Generalized AND Gadget
Merges p sub-oracles into their conjunction (or disjunction) on one target,
using 2p-2 ancillas whose initial contents may be arbitrary.

Ancillas are numbered q1..q(2p-2) and the target qt. Sub-oracle O_i acts on
q_i. Steps 1..p-2 go up the ladder, step p-1 is the top, steps p..2p-3 come
down; the restore stage repeats steps 2..2p-4.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Sequence, Tuple

from core.circuit import Circuit, CircuitBuilder, Gate, Layout, QubitId, inp, tgt
from core.cnf import Clause
from core.errors import GandError
from core.lowering import EXACT, LoweringConfig, elementary_size

logger = logging.getLogger(__name__)

AND = "and"
OR = "or"


class OracleBuilder(ABC):
    """
    Emits gates mapping |target> to |target xor g(x)>.

    Every qubit other than the target that the emitted gates write must come
    from `scratch` and be returned to its initial value, whatever that was.
    """

    @abstractmethod
    def reads(self) -> FrozenSet[QubitId]:
        """Qubits read as controls; never usable as scratch"""

    @abstractmethod
    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        """Append the oracle's gates"""

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        """Elementary gate count of `emit` given the scratch available"""
        raise NotImplementedError(f"{type(self).__name__} has no size estimate")

    def workspace(self) -> FrozenSet[QubitId]:
        """Qubits the oracle manages itself, outside any scratch it is given"""
        return frozenset()

    def usable_scratch(self, target: QubitId, scratch: Sequence[QubitId]) -> List[QubitId]:
        blocked = set(self.reads()) | {target}
        usable = []
        for qubit in scratch:
            if qubit not in blocked:
                blocked.add(qubit)
                usable.append(qubit)
        return usable


class ClauseOracle(OracleBuilder):
    """
    target ^= (l1 or ... or lk), as an MCT on the negated literals then X.

    `phase_safe` marks a gadget written onto a clean qubit and later undone
    by the same gadget.
    """

    def __init__(self, clause: Clause, phase_safe: bool = False):
        self.clause = clause
        self.phase_safe = phase_safe
        self._reads = frozenset(inp(v - 1) for v in clause.variables)

    def reads(self) -> FrozenSet[QubitId]:
        return self._reads

    def gate(self, target: QubitId, helpers: Sequence[QubitId] = ()) -> Gate:
        controls = [inp(lit.variable - 1) for lit in self.clause.literals]
        polarity = [lit.negated for lit in self.clause.literals]
        return Gate.mct(controls, target, polarity, helpers=tuple(helpers), phase_safe=self.phase_safe)

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        helpers = self.usable_scratch(target, scratch)[:max(0, self.clause.width - 2)]
        builder.append(self.gate(target, helpers))
        builder.append(Gate.x(target))

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        gate = self.gate(tgt())
        return elementary_size(gate, total_qubits - gate.arity - 1, cfg) + 1


class VariableOracle(OracleBuilder):
    """target ^= x_i (or its negation)"""

    def __init__(self, variable: int, negated: bool = False):
        self.variable = variable
        self.negated = negated

    def reads(self) -> FrozenSet[QubitId]:
        return frozenset({inp(self.variable - 1)})

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        builder.append(Gate.cnot(inp(self.variable - 1), target, not self.negated))

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        return 1 if not self.negated else 3


class ConstantOracle(OracleBuilder):
    def __init__(self, value: bool):
        self.value = bool(value)

    def reads(self) -> FrozenSet[QubitId]:
        return frozenset()

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        if self.value:
            builder.append(Gate.x(target))

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        return int(self.value)


class NegatedOracle(OracleBuilder):
    """target ^= not g(x)"""

    def __init__(self, inner: OracleBuilder):
        self.inner = inner

    def reads(self) -> FrozenSet[QubitId]:
        return self.inner.reads()

    def workspace(self) -> FrozenSet[QubitId]:
        return self.inner.workspace()

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        self.inner.emit(builder, target, scratch)
        builder.append(Gate.x(target))

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        return self.inner.estimate_size(n_scratch, total_qubits, cfg) + 1


# schedule --------------------------------------------------------------------

@dataclass(frozen=True)
class StepOp:
    """One entry of the gadget schedule; role 0 is the target, i >= 1 is q_i"""

    stage: str
    label: str
    kind: str
    target: int
    controls: Tuple[int, ...] = ()

    @property
    def oracle(self) -> int:
        return self.target if self.kind == "oracle" else 0

    def render(self) -> str:
        def role(i: int) -> str:
            return "qt" if i == 0 else f"q{i}"

        if self.kind == "toffoli":
            controls = " ".join(role(c) for c in self.controls)
            return f"{self.stage} {self.label} toffoli {controls} -> {role(self.target)}"
        return f"{self.stage} {self.label} oracle O{self.target} -> {role(self.target)}"


def _ladder_step(stage: str, step: int, a: int, b: int, t: int) -> List[StepOp]:
    tof = StepOp(stage, f"{step}.1", "toffoli", t, (a, b))
    return [
        tof,
        StepOp(stage, f"{step}.2", "oracle", a),
        StepOp(stage, f"{step}.3", "toffoli", t, (a, b)),
    ]


def _top_step(stage: str, step: int, t: int) -> List[StepOp]:
    ops = []
    for j, oracle in enumerate((None, 2, None, 1, None, 2, None), start=1):
        if oracle is None:
            ops.append(StepOp(stage, f"{step}.{j}", "toffoli", t, (1, 2)))
        else:
            ops.append(StepOp(stage, f"{step}.{j}", "oracle", oracle))
    return ops


def _step(stage: str, p: int, step: int) -> List[StepOp]:
    if step <= p - 2:
        t = 0 if step == 1 else 2 * p - step
        return _ladder_step(stage, step, p + 1 - step, 2 * p - 1 - step, t)
    if step == p - 1:
        return _top_step(stage, step, 0 if p == 2 else p + 1)
    t = 0 if step == 2 * p - 3 else step + 2
    return _ladder_step(stage, step, step - p + 3, step + 1, t)


def gand_schedule(p: int) -> List[StepOp]:
    """Full gadget schedule for fan-in p"""
    if p < 2:
        raise GandError(f"GAND needs fan-in p >= 2, got {p}")
    ops: List[StepOp] = []
    for step in range(1, 2 * p - 2):
        ops.extend(_step("merge", p, step))
    if p == 2:
        ops.append(StepOp("restore", "1.8", "oracle", 1))
    for step in range(2, 2 * p - 3):
        ops.extend(_step("restore", p, step))
    return ops


def toffoli_count(p: int) -> int:
    return 4 if p == 2 else 8 * p - 12


def call_counts(p: int) -> Dict[int, int]:
    """How often each sub-oracle runs"""
    counts = {i: 0 for i in range(1, p + 1)}
    for op in gand_schedule(p):
        if op.kind == "oracle":
            counts[op.oracle] += 1
    return counts


@dataclass
class StepTrace:
    p: int
    entries: List[StepOp]

    def render(self) -> str:
        return "\n".join(entry.render() for entry in self.entries) + "\n"

    def stage(self, name: str) -> List[StepOp]:
        return [entry for entry in self.entries if entry.stage == name]


def trace_gand(p: int) -> StepTrace:
    return StepTrace(p, gand_schedule(p))


# construction ----------------------------------------------------------------

@dataclass(frozen=True)
class GandPlan:
    """Qubit assignment for one gadget instance"""

    p: int
    ancillas: Tuple[QubitId, ...]
    target: QubitId
    mode: str = AND
    extra_scratch: Tuple[QubitId, ...] = ()

    def __post_init__(self):
        if self.p < 2:
            raise GandError(f"GAND needs fan-in p >= 2, got {self.p}")
        if len(self.ancillas) != 2 * self.p - 2:
            raise GandError(f"Fan-in {self.p} needs {2 * self.p - 2} ancillas, got {len(self.ancillas)}")
        if self.mode not in (AND, OR):
            raise GandError(f"Unknown mode {self.mode!r}")
        reserved = list(self.ancillas) + [self.target]
        if len(set(reserved)) != len(reserved):
            raise GandError("GAND ancillas and target must be distinct")
        if set(self.extra_scratch) & set(reserved):
            raise GandError("Extra scratch overlaps the gadget qubits")

    def role(self, index: int) -> QubitId:
        return self.target if index == 0 else self.ancillas[index - 1]


def emit_gand(builder: CircuitBuilder, plan: GandPlan, oracles: Sequence[OracleBuilder]) -> None:
    """Append the gadget computing target ^= AND (or OR) of the oracles"""
    if len(oracles) != plan.p:
        raise GandError(f"Plan has fan-in {plan.p} but {len(oracles)} oracles were given")
    reserved = set(plan.ancillas) | {plan.target}
    for i, oracle in enumerate(oracles, start=1):
        clash = oracle.reads() & reserved
        if clash:
            raise GandError(f"Oracle O{i} reads gadget qubits {sorted(map(str, clash))}")
        if oracle.workspace() & reserved:
            raise GandError(f"Oracle O{i} keeps private qubits inside the gadget")
    if plan.mode == OR:
        oracles = [NegatedOracle(o) for o in oracles]

    pool = list(plan.ancillas) + [plan.target] + list(plan.extra_scratch)
    for op in gand_schedule(plan.p):
        if op.kind == "toffoli":
            a, b = (plan.role(c) for c in op.controls)
            builder.append(Gate.toffoli(a, b, plan.role(op.target)))
            continue
        own = plan.role(op.target)
        scratch = [q for q in pool if q != own]
        start = len(builder)
        oracles[op.oracle - 1].emit(builder, own, scratch)
        allowed = set(scratch) | {own} | oracles[op.oracle - 1].workspace()
        for gate in builder.gates_since(start):
            if gate.target not in allowed:
                raise GandError(f"Oracle O{op.oracle} wrote reserved qubit {gate.target}")
    if plan.mode == OR:
        builder.append(Gate.x(plan.target))


def build_gand(plan: GandPlan, oracles: Sequence[OracleBuilder], layout: Layout) -> Circuit:
    builder = CircuitBuilder(layout)
    emit_gand(builder, plan, oracles)
    return builder.build()


def build_gor(plan: GandPlan, oracles: Sequence[OracleBuilder], layout: Layout) -> Circuit:
    """Disjunction via X-conjugated sub-oracles and a final X on the target"""
    return build_gand(GandPlan(plan.p, plan.ancillas, plan.target, OR, plan.extra_scratch), oracles, layout)


def gand_estimate(p: int, sub_sizes: Sequence[int]) -> int:
    """Elementary size of a gadget from its sub-oracle sizes (exact Toffolis)"""
    counts = call_counts(p)
    return 15 * toffoli_count(p) + sum(counts[i + 1] * s for i, s in enumerate(sub_sizes))


class GandOracle(OracleBuilder):
    """Sub-oracles merged by one gadget, ancillas taken from the caller's scratch"""

    def __init__(self, subs: Sequence[OracleBuilder], mode: str = AND):
        if len(subs) < 2:
            raise GandError("A merged oracle needs at least two sub-oracles")
        self.subs = list(subs)
        self.mode = mode
        self._reads = frozenset().union(*(s.reads() for s in self.subs))
        self._workspace = frozenset().union(*(s.workspace() for s in self.subs))

    @property
    def p(self) -> int:
        return len(self.subs)

    def reads(self) -> FrozenSet[QubitId]:
        return self._reads

    def workspace(self) -> FrozenSet[QubitId]:
        return self._workspace

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        usable = self.usable_scratch(target, scratch)
        need = 2 * self.p - 2
        if len(usable) < need:
            raise GandError(f"Fan-in {self.p} needs {need} scratch qubits, only {len(usable)} usable")
        plan = GandPlan(self.p, tuple(usable[:need]), target, self.mode, tuple(usable[need:]))
        emit_gand(builder, plan, self.subs)

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        subs = [s.estimate_size(n_scratch, total_qubits, cfg) for s in self.subs]
        extra = 0 if self.mode == AND else sum(call_counts(self.p).values()) + 1
        return gand_estimate(self.p, subs) + extra
