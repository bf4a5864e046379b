"""
Depth-Oriented Oracle Synthesis
Splits the ancillas into copy memory, dirty GAND scratch and clean slots so
that innermost clause blocks are evaluated in parallel.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config.settings import Settings
from core.circuit import Circuit, CircuitBuilder, Gate, Layout, QubitId, inp, tgt
from core.cnf import Clause, CnfFormula
from core.errors import InfeasibleConfigError
from core.gand import AND, ClauseOracle, GandPlan, OracleBuilder, emit_gand
from core.synth_size import SizeOptions, balanced_partition, synth_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DepthOptions:
    outermost_clean: bool = True
    fallback: bool = True


def stage_count(width: int, ancillas: int) -> int:
    """S = max(ceil(k / log2 l), 1)"""
    return max(math.ceil(width / math.log2(ancillas)), 1)


@dataclass(frozen=True)
class RegisterPartition:
    """Ancillas split into copy memory, dirty scratch and clean slots"""

    stages: int
    mem: Tuple[QubitId, ...]
    dirty: Tuple[QubitId, ...]
    clean: Tuple[QubitId, ...]

    @property
    def pairs(self) -> int:
        """Clause pairs evaluated side by side in one innermost block"""
        return min(len(self.dirty) // 2, (len(self.clean) + 2) // 2)

    @property
    def block_capacity(self) -> int:
        return 2 * self.pairs

    @property
    def feasible(self) -> bool:
        return self.pairs >= 1


def partition_registers(ancillas: int, width: int) -> RegisterPartition:
    stages = stage_count(width, ancillas)
    n_mem = (stages - 1) * ancillas // (stages + 1)
    n_dirty = ancillas // (stages + 1)
    n_clean = ancillas - n_mem - n_dirty
    qubits = Layout(0, ancillas).ancillas()
    dirty = tuple(qubits[:n_dirty])
    clean = tuple(qubits[n_dirty:n_dirty + n_clean])
    mem = tuple(qubits[n_dirty + n_clean:])
    return RegisterPartition(stages, mem, dirty, clean)


def minimal_feasible_ancillas(width: int, limit: int = 100_000) -> int:
    for ancillas in range(Settings.MIN_ANCILLAS, limit):
        if partition_registers(ancillas, width).feasible:
            return ancillas
    raise InfeasibleConfigError(f"No feasible ancilla count below {limit} for width {width}")


@dataclass
class FanoutTable:
    """Copies per variable and the copy each parallel lane reads"""

    copies: Dict[int, int] = field(default_factory=dict)
    lane_copy: List[Dict[int, int]] = field(default_factory=list)

    @property
    def extra_qubits(self) -> int:
        return sum(t - 1 for t in self.copies.values())


def plan_fanout(lanes: Sequence[Sequence[Clause]], capacity: int) -> FanoutTable:
    """
    Give each variable one copy per lane reading it, within `capacity`
    extra qubits. Variables with the highest demand are served first.
    """
    demand: Dict[int, List[int]] = {}
    for j, lane in enumerate(lanes):
        for var in sorted({v for clause in lane for v in clause.variables}):
            demand.setdefault(var, []).append(j)

    table = FanoutTable(lane_copy=[{} for _ in lanes])
    remaining = max(0, capacity)
    for var in sorted(demand, key=lambda v: (-len(demand[v]), v)):
        copies = min(len(demand[var]), 1 + remaining)
        remaining -= copies - 1
        table.copies[var] = copies
        for i, lane in enumerate(demand[var]):
            table.lane_copy[lane][var] = i % copies
    if remaining == 0 and any(len(d) > table.copies[v] for v, d in demand.items()):
        logger.info("Copy memory exhausted; some lanes share a variable copy")
    return table


def _fanout_gates(source: QubitId, copies: Sequence[QubitId]) -> List[Gate]:
    """CNOT doubling tree writing `source` onto every clean copy"""
    gates = []
    have = [source]
    pending = list(copies)
    while pending:
        for qubit in list(have):
            if not pending:
                break
            fresh = pending.pop(0)
            gates.append(Gate.cnot(qubit, fresh))
            have.append(fresh)
    return gates


def _clause_gadget(clause: Clause, qubit_of: Callable[[int], QubitId], target: QubitId,
                   helpers: Sequence[QubitId], phase_safe: bool = False) -> List[Gate]:
    controls = [qubit_of(lit.variable) for lit in clause.literals]
    polarity = [lit.negated for lit in clause.literals]
    busy = set(controls) | {target}
    helpers = [q for q in dict.fromkeys(helpers) if q not in busy][:max(0, clause.width - 2)]
    gate = Gate.mct(controls, target, polarity, helpers=tuple(helpers), phase_safe=phase_safe)
    return [gate, Gate.x(target)]


def _pair_gadget(first: List[Gate], second: List[Gate], p1: QubitId, p2: QubitId,
                 slot: QubitId) -> List[Gate]:
    """slot ^= C1 and C2 with dirty p1, p2"""
    tof = Gate.toffoli(p1, p2, slot)
    return [tof] + first + [tof] + second + [tof] + first + [tof] + second


class InnermostBlockOracle(OracleBuilder):
    """Copy, clause, merge and reset stages over one block of clauses"""

    def __init__(self, clauses: Sequence[Clause], partition: RegisterPartition):
        self.clauses = list(clauses)
        self.partition = partition
        self._reads = frozenset(inp(v - 1) for c in self.clauses for v in c.variables)

    def reads(self):
        return self._reads

    def workspace(self):
        return frozenset(self.partition.mem + self.partition.clean)

    def stages(self, target: QubitId, scratch: Sequence[QubitId]) -> Dict[str, List[Gate]]:
        part = self.partition
        usable = self.usable_scratch(target, scratch)
        lanes = [self.clauses[i:i + 2] for i in range(0, len(self.clauses), 2)]
        if len(lanes) > part.pairs or 2 * (len(self.clauses) // 2) > len(usable):
            raise InfeasibleConfigError(
                f"Block of {len(self.clauses)} clauses exceeds {part.pairs} parallel pairs"
            )
        slots = list(part.clean[:len(lanes)])
        spare = list(part.clean[len(lanes):])
        # wide clauses take extra helpers from qubits no lane owns, one share per lane
        idle = usable[2 * len(lanes):] + spare
        share = max(0, max(c.width for c in self.clauses) - 4)
        owned = [idle[j * share:(j + 1) * share] for j in range(len(lanes))]

        fanout = plan_fanout(lanes, len(part.mem))
        mem = list(part.mem)
        copy_qubits: Dict[int, List[QubitId]] = {}
        copy_stage: List[Gate] = []
        for var in sorted(fanout.copies):
            extra = [mem.pop(0) for _ in range(fanout.copies[var] - 1)]
            copy_qubits[var] = [inp(var - 1)] + extra
            if extra:
                copy_stage += _fanout_gates(inp(var - 1), extra)

        clause_stage: List[Gate] = []
        for j, lane in enumerate(lanes):
            def qubit_of(var: int, j: int = j) -> QubitId:
                return copy_qubits[var][fanout.lane_copy[j][var]]

            slot = slots[j]
            if len(lane) == 1:
                helpers = usable[2 * j:2 * j + 2] + owned[j] + usable
                clause_stage += _clause_gadget(lane[0], qubit_of, slot, helpers, phase_safe=True)
                continue
            p1, p2 = usable[2 * j], usable[2 * j + 1]
            first = _clause_gadget(lane[0], qubit_of, p1, [p2, slot] + owned[j] + usable)
            second = _clause_gadget(lane[1], qubit_of, p2, [p1, slot] + owned[j] + usable)
            clause_stage += _pair_gadget(first, second, p1, p2, slot)

        merge_stage: List[Gate] = []
        if len(slots) == 1:
            merge_stage.append(Gate.cnot(slots[0], target))
        else:
            level, computed = list(slots), []
            while len(level) > 2:
                nxt = []
                for i in range(0, len(level) - 1, 2):
                    node = spare.pop(0)
                    computed.append(Gate.toffoli(level[i], level[i + 1], node, phase_safe=True))
                    nxt.append(node)
                if len(level) % 2:
                    nxt.append(level[-1])
                level = nxt
            merge_stage = computed + [Gate.toffoli(level[0], level[1], target)] + list(reversed(computed))

        reset_stage = list(reversed(clause_stage)) + list(reversed(copy_stage))
        return {'copy': copy_stage, 'clause': clause_stage, 'merge': merge_stage, 'reset': reset_stage}

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        if len(self.clauses) == 1:
            ClauseOracle(self.clauses[0]).emit(builder, target, scratch)
            return
        stages = self.stages(target, scratch)
        for name in ('copy', 'clause', 'merge', 'reset'):
            builder.extend(stages[name])


def innermost_block(clauses: Sequence[Clause], partition: RegisterPartition, num_vars: int,
                    target: Optional[QubitId] = None) -> Circuit:
    """One innermost block as a standalone circuit writing onto the oracle target"""
    ancillas = len(partition.mem) + len(partition.dirty) + len(partition.clean)
    layout = Layout(num_vars, ancillas)
    builder = CircuitBuilder(layout)
    InnermostBlockOracle(clauses, partition).emit(builder, target or tgt(), list(partition.dirty))
    return builder.build()


class DepthBlockOracle(OracleBuilder):
    """Clause range merged by GANDs over the dirty register down to innermost blocks"""

    def __init__(self, clauses: Sequence[Clause], partition: RegisterPartition):
        self.clauses = list(clauses)
        self.partition = partition
        self._reads = frozenset(inp(v - 1) for c in self.clauses for v in c.variables)

    def reads(self):
        return self._reads

    def workspace(self):
        return frozenset(self.partition.mem + self.partition.clean)

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        if len(self.clauses) <= self.partition.block_capacity:
            InnermostBlockOracle(self.clauses, self.partition).emit(builder, target, scratch)
            return
        usable = self.usable_scratch(target, scratch)
        fanin = min(len(usable) // 2 + 1, len(self.clauses))
        subs = [DepthBlockOracle(self.clauses[lo:hi], self.partition)
                for lo, hi in balanced_partition(0, len(self.clauses), fanin)]
        need = 2 * fanin - 2
        plan = GandPlan(fanin, tuple(usable[:need]), target, AND, tuple(usable[need:]))
        emit_gand(builder, plan, subs)


def synth_depth(formula: CnfFormula, ancillas: int, options: Optional[DepthOptions] = None,
                size_options: Optional[SizeOptions] = None) -> Circuit:
    """MCT-level oracle tuned for depth; falls back to size synthesis when the budget is too small"""
    options = options or DepthOptions()
    if ancillas < Settings.MIN_ANCILLAS:
        raise InfeasibleConfigError(f"Depth synthesis with {ancillas} ancillas", Settings.MIN_ANCILLAS)
    part = partition_registers(ancillas, formula.width)
    if not part.feasible:
        minimal = minimal_feasible_ancillas(formula.width)
        if not options.fallback:
            raise InfeasibleConfigError(
                f"Register partition for k={formula.width} with {ancillas} ancillas", minimal
            )
        logger.warning(
            f"Depth partition infeasible with {ancillas} ancillas (needs {minimal}); "
            f"using size synthesis"
        )
        return synth_size(formula, ancillas, size_options)

    logger.debug(
        f"Partition S={part.stages}: mem={len(part.mem)} dirty={len(part.dirty)} "
        f"clean={len(part.clean)} pairs={part.pairs}"
    )
    layout = Layout(formula.num_vars, ancillas)
    builder = CircuitBuilder(layout)
    target = tgt()
    dirty = list(part.dirty)
    clauses = list(formula.clauses)
    m = len(clauses)
    groups = min(len(dirty) // 2, m)

    if m <= part.block_capacity:
        InnermostBlockOracle(clauses, part).emit(builder, target, dirty)
    elif options.outermost_clean and groups >= 2:
        slices = []
        for j, (lo, hi) in enumerate(balanced_partition(0, m, groups)):
            start = len(builder)
            scratch = [q for q in dirty if q != dirty[j]] + [target]
            DepthBlockOracle(clauses[lo:hi], part).emit(builder, dirty[j], scratch)
            slices.append(list(builder.gates_since(start)))
        builder.append(Gate.mct(dirty[:groups], target, clean_helpers=tuple(dirty[groups:])))
        for gates in reversed(slices):
            builder.extend(reversed(gates))
    else:
        DepthBlockOracle(clauses, part).emit(builder, target, dirty)
    return builder.build()
