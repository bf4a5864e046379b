"""
Size-Oriented Oracle Synthesis
Recursive GAND merging of clause blocks under a fixed ancilla budget.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from config.settings import Settings
from core.circuit import Circuit, CircuitBuilder, Gate, Layout, QubitId, anc, inp, tgt
from core.cnf import Clause, CnfFormula
from core.errors import InfeasibleConfigError
from core.gand import (
    AND, ClauseOracle, GandPlan, OracleBuilder, call_counts, emit_gand, toffoli_count,
)
from core.lowering import EXACT, LoweringConfig, elementary_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SizeOptions:
    """Knobs of the size-oriented synthesizer"""

    outermost_clean: bool = True
    small_ancilla: bool = False
    reuse_inputs: bool = False
    gray_max_fanin: int = Settings.GRAY_MAX_FANIN
    lowering: LoweringConfig = EXACT


def balanced_partition(lo: int, hi: int, parts: int) -> List[Tuple[int, int]]:
    """Split [lo, hi) into `parts` contiguous ranges whose sizes differ by at most one"""
    count = hi - lo
    parts = max(1, min(parts, count))
    base, extra = divmod(count, parts)
    ranges = []
    start = lo
    for i in range(parts):
        end = start + base + (1 if i < extra else 0)
        ranges.append((start, end))
        start = end
    return ranges


def gray_toggles(r: int) -> List[int]:
    """Bit flipped at each step of a closed reflected Gray-code walk over r bits"""
    toggles = [((i & -i).bit_length() - 1) for i in range(1, 1 << r)]
    toggles.append(r - 1)
    return toggles


def emit_gray_merge(builder: CircuitBuilder, subs: Sequence[OracleBuilder],
                    slots: Sequence[QubitId], target: QubitId, rest: Sequence[QubitId]) -> None:
    """
    target ^= AND of the sub-oracles with dirty slots.

    An MCT over all slots fires before each toggle of a closed Gray-code walk;
    the XOR over every slot pattern leaves exactly the product of the
    sub-oracle values on the target.
    """
    r = len(subs)
    # least-toggled bits take the largest blocks
    by_bit = list(reversed(subs))
    pool = list(slots) + [target] + list(rest)
    for bit in gray_toggles(r):
        builder.append(Gate.mct(slots, target, helpers=tuple(rest[:max(0, r - 2)])))
        own = slots[bit]
        by_bit[bit].emit(builder, own, [q for q in pool if q != own])


class _Context:
    def __init__(self, formula: CnfFormula, layout: Layout, options: SizeOptions):
        self.formula = formula
        self.layout = layout
        self.options = options
        self.reads: Dict[Tuple[int, int], frozenset] = {}
        self.estimates: Dict[Tuple[int, int, int], Tuple[int, str, int]] = {}

    def block_reads(self, lo: int, hi: int) -> frozenset:
        key = (lo, hi)
        if key not in self.reads:
            variables = {v for c in self.formula.clauses[lo:hi] for v in c.variables}
            self.reads[key] = frozenset(inp(v - 1) for v in variables)
        return self.reads[key]

    def child_scratch(self, lo: int, hi: int, child: Tuple[int, int], scratch: int) -> int:
        if not self.options.reuse_inputs:
            return scratch
        return scratch + len(self.block_reads(lo, hi) - self.block_reads(*child))

    def clause_size(self, index: int) -> int:
        oracle = ClauseOracle(self.formula.clauses[index])
        return oracle.estimate_size(0, self.layout.total, self.options.lowering)

    def mct_size(self, r: int) -> int:
        gate = Gate.mct([anc(i) for i in range(r)], tgt())
        return elementary_size(gate, self.layout.total - r - 1, self.options.lowering)

    def plan(self, lo: int, hi: int, scratch: int) -> Tuple[int, str, int]:
        """(estimated size, merge kind, fan-in) of the cheapest merge for a block"""
        key = (lo, hi, scratch)
        cached = self.estimates.get(key)
        if cached is not None:
            return cached
        count = hi - lo
        if count == 1:
            result = (self.clause_size(lo), "clause", 1)
            self.estimates[key] = result
            return result
        if scratch < 2:
            raise InfeasibleConfigError(f"Block of {count} clauses has only {scratch} scratch qubits", 3)

        p = min(scratch // 2 + 1, count)
        parts = balanced_partition(lo, hi, p)
        calls = call_counts(p)
        size = 15 * toffoli_count(p) + sum(
            calls[i + 1] * self.plan(*part, self.child_scratch(lo, hi, part, scratch))[0]
            for i, part in enumerate(parts)
        )
        best = (size, "gand", p)

        if self.options.small_ancilla:
            for r in range(2, min(scratch, count, self.options.gray_max_fanin) + 1):
                parts = balanced_partition(lo, hi, r)
                toggles = gray_toggles(r)
                size = (1 << r) * self.mct_size(r)
                for bit in range(r):
                    part = parts[r - 1 - bit]
                    sub = self.plan(*part, self.child_scratch(lo, hi, part, scratch))[0]
                    size += toggles.count(bit) * sub
                if size < best[0]:
                    best = (size, "gray", r)
        self.estimates[key] = best
        return best


class BlockOracle(OracleBuilder):
    """Conjunction of the clause range [lo, hi), merged recursively"""

    def __init__(self, context: _Context, lo: int, hi: int, phase_safe: bool = False):
        self.context = context
        self.lo = lo
        self.hi = hi
        self.phase_safe = phase_safe

    def reads(self):
        return self.context.block_reads(self.lo, self.hi)

    def _lendable(self) -> List[QubitId]:
        """Inputs this block reads, lent to sub-blocks that leave them idle"""
        if not self.context.options.reuse_inputs:
            return []
        return sorted(self.reads(), key=lambda q: q.offset)

    def emit(self, builder: CircuitBuilder, target: QubitId, scratch: Sequence[QubitId]) -> None:
        context = self.context
        usable = self.usable_scratch(target, scratch)
        if self.hi - self.lo == 1:
            ClauseOracle(context.formula.clauses[self.lo], self.phase_safe).emit(builder, target, usable)
            return
        if context.options.small_ancilla:
            _, kind, fanin = context.plan(self.lo, self.hi, len(usable))
        else:
            if len(usable) < 2:
                raise InfeasibleConfigError(f"Block needs 2 scratch qubits, has {len(usable)}", 3)
            kind, fanin = "gand", min(len(usable) // 2 + 1, self.hi - self.lo)
        subs = [BlockOracle(context, lo, hi) for lo, hi in balanced_partition(self.lo, self.hi, fanin)]
        if kind == "gray":
            emit_gray_merge(builder, subs, usable[:fanin], target, usable[fanin:] + self._lendable())
            return
        need = 2 * fanin - 2
        plan = GandPlan(fanin, tuple(usable[:need]), target, AND,
                        tuple(usable[need:] + self._lendable()))
        emit_gand(builder, plan, subs)

    def estimate_size(self, n_scratch: int, total_qubits: int, cfg: LoweringConfig = EXACT) -> int:
        return self.context.plan(self.lo, self.hi, n_scratch)[0]


def synth_clause(clause: Clause, target: QubitId, helpers: Sequence[QubitId] = ()) -> List[Gate]:
    """Clause gadget: MCT on the negated literals, then X on the target"""
    oracle = ClauseOracle(clause)
    helpers = list(helpers)[:max(0, clause.width - 2)]
    return [oracle.gate(target, helpers), Gate.x(target)]


def synth_size(formula: CnfFormula, ancillas: int, options: Optional[SizeOptions] = None) -> Circuit:
    """MCT-level oracle for `formula` using `ancillas` ancilla qubits"""
    options = options or SizeOptions()
    if ancillas < Settings.MIN_ANCILLAS:
        raise InfeasibleConfigError(f"Size synthesis with {ancillas} ancillas", Settings.MIN_ANCILLAS)
    layout = Layout(formula.num_vars, ancillas)
    builder = CircuitBuilder(layout)
    context = _Context(formula, layout, options)
    target = tgt()
    ancs = layout.ancillas()
    # each block drops the inputs it reads from whatever it is offered
    lent = layout.inputs() if options.reuse_inputs else []
    m = formula.num_clauses
    groups = min(ancillas // 2, m)

    if options.outermost_clean and groups >= 2:
        ranges = balanced_partition(0, m, groups)
        logger.debug(f"Clean outermost level: {len(ranges)} groups, fan-in {ancillas // 2 + 1} below")
        slices = []
        for j, (lo, hi) in enumerate(ranges):
            start = len(builder)
            scratch = [q for q in ancs if q != ancs[j]] + [target] + lent
            BlockOracle(context, lo, hi, phase_safe=True).emit(builder, ancs[j], scratch)
            slices.append(list(builder.gates_since(start)))
        builder.append(Gate.mct(ancs[:groups], target, clean_helpers=tuple(ancs[groups:])))
        for gates in reversed(slices):
            builder.extend(reversed(gates))
    else:
        logger.debug(f"Dirty-tolerant synthesis of {m} clauses with {ancillas} ancillas")
        BlockOracle(context, 0, m).emit(builder, target, ancs + lent)
    return builder.build()


def synth_size_small_ancilla(formula: CnfFormula, ancillas: int,
                             options: Optional[SizeOptions] = None) -> Circuit:
    """Size synthesis allowing Gray-code merges wherever they are cheaper"""
    return synth_size(formula, ancillas, replace(options or SizeOptions(), small_ancilla=True))


def dirty_reuse_of_inputs(formula: CnfFormula, ancillas: int,
                          options: Optional[SizeOptions] = None) -> Circuit:
    """Size synthesis where blocks borrow the input qubits they do not read"""
    return synth_size(formula, ancillas, replace(options or SizeOptions(), reuse_inputs=True))
