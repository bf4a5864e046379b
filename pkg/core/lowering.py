"""
Circuit Lowering
MCT gates to Toffolis, Toffolis to one- and two-qubit elementary gates.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, List, Sequence

from core.circuit import (
    Circuit, CircuitLevel, Gate, GateKind, Layout, QubitId, anc, inp, tgt,
)
from core.errors import CircuitError, LoweringError

logger = logging.getLogger(__name__)


class ToffoliMode(Enum):
    EXACT = "exact"
    APPROXIMATE = "approx"


class MctStrategy(Enum):
    VCHAIN_DIRTY = "vchain"
    RECURSIVE = "recursive"
    AUTO = "auto"


@dataclass(frozen=True)
class LoweringConfig:
    """How each MCT and Toffoli site is expanded"""

    toffoli_mode: ToffoliMode = ToffoliMode.EXACT
    mct_strategy: MctStrategy = MctStrategy.AUTO

    def describe(self) -> dict:
        return {'toffoli_mode': self.toffoli_mode.value, 'mct_strategy': self.mct_strategy.value}


EXACT = LoweringConfig()
APPROXIMATE = LoweringConfig(ToffoliMode.APPROXIMATE)


def _take_free(gate: Gate, pool: Iterable[QubitId], limit: int) -> List[QubitId]:
    """Up to `limit` borrowable qubits: the gate's hints first, then the pool"""
    busy = set(gate.qubits)
    free: List[QubitId] = []
    for qubit in itertools.chain(gate.helpers, pool):
        if len(free) >= limit:
            break
        if qubit not in busy:
            busy.add(qubit)
            free.append(qubit)
    return free


def _dirty_vchain(controls: Sequence[QubitId], target: QubitId,
                  helpers: Sequence[QubitId], phase_safe: bool) -> List[Gate]:
    """4(a-2) Toffolis; helpers may hold anything and are restored"""
    a = len(controls)
    c, d = controls, helpers
    top = Gate.toffoli(d[a - 3], c[a - 1], target, phase_safe=phase_safe)
    down = [Gate.toffoli(c[j], d[j - 2], d[j - 1]) for j in range(a - 2, 1, -1)]
    up = list(reversed(down))
    base = Gate.toffoli(c[0], c[1], d[0])
    part_a = [top] + down + [base] + up + [top]
    part_b = down + [base] + up
    return part_a + part_b


def _clean_vchain(controls: Sequence[QubitId], target: QubitId,
                  helpers: Sequence[QubitId], phase_safe: bool) -> List[Gate]:
    """2(a-2)+1 Toffolis; helpers start and end in |0>"""
    a = len(controls)
    c, h = controls, helpers
    compute = [Gate.toffoli(c[0], c[1], h[0], phase_safe=True)]
    compute += [Gate.toffoli(h[j - 2], c[j], h[j - 1], phase_safe=True) for j in range(2, a - 1)]
    top = Gate.toffoli(h[a - 3], c[a - 1], target, phase_safe=phase_safe)
    return compute + [top] + list(reversed(compute))


def _expand_positive(controls: Sequence[QubitId], target: QubitId, gate: Gate,
                     pool: Sequence[QubitId], cfg: LoweringConfig) -> List[Gate]:
    a = len(controls)
    if a <= 2:
        return [Gate.mct(controls, target, phase_safe=gate.phase_safe)]

    busy = set(controls) | {target}
    clean = [q for q in gate.clean_helpers if q not in busy]
    strategy = cfg.mct_strategy
    if strategy is not MctStrategy.RECURSIVE:
        if len(clean) >= a - 2:
            return _clean_vchain(controls, target, clean[:a - 2], gate.phase_safe)
        if len(pool) >= a - 2:
            return _dirty_vchain(controls, target, pool[:a - 2], gate.phase_safe)
        if strategy is MctStrategy.VCHAIN_DIRTY:
            raise LoweringError(
                f"MCT of arity {a} needs {a - 2} dirty helpers, only {len(pool)} available"
            )
        logger.debug(f"Too few helpers for a V-chain on arity {a}; splitting recursively")

    if not pool:
        raise LoweringError(f"No borrowable qubit for MCT of arity {a} on {target}")
    borrowed = pool[0]
    rest = list(pool[1:])
    half = math.ceil(a / 2)
    first, second = list(controls[:half]), list(controls[half:])
    left = Gate.mct(first, borrowed)
    right = Gate.mct(second + [borrowed], target)
    left_gates = _expand_positive(first, borrowed, left, rest + second + [target], cfg)
    right_gates = _expand_positive(second + [borrowed], target, right, rest + first, cfg)
    return left_gates + right_gates + left_gates + right_gates


def _negation_frame(gate: Gate) -> List[Gate]:
    return [Gate.x(c) for c, positive in zip(gate.controls, gate.polarity) if not positive]


def expand_mct(gate: Gate, pool: Iterable[QubitId] = (), cfg: LoweringConfig = EXACT) -> List[Gate]:
    """Toffoli-level gates for one gate; non-MCT gates pass through unchanged"""
    if gate.kind is GateKind.PHASE1Q:
        raise CircuitError(f"Cannot lower {gate} to Toffoli level")
    if gate.kind is not GateKind.MCT:
        return [gate]
    free = _take_free(gate, pool, gate.arity)
    frame = _negation_frame(gate)
    body = _expand_positive(gate.controls, gate.target, gate, free, cfg)
    return frame + body + frame


def exact_toffoli(gate: Gate) -> List[Gate]:
    """Clifford+T form of a positive Toffoli: 6 CNOTs and 9 one-qubit gates"""
    a, b = gate.controls
    t = gate.target
    one, cx = Gate.one, Gate.cnot
    return [
        one('h', t), cx(a, t), one('t', a), one('tdg', t), cx(b, t), cx(b, a),
        one('tdg', a), one('t', t), cx(b, a), cx(a, t), one('tdg', t), cx(b, t),
        one('t', t), one('t', b), one('h', t),
    ]


def approximate_toffoli(gate: Gate) -> List[Gate]:
    """
    Relative-phase Toffoli: 3 CNOTs and 4 ry(+-pi/4).

    Differs from a Toffoli only by a -1 on |c1=1, c2=0, t=1>, so it is
    only allowed where c2 = 0 implies t = 0.
    """
    if not gate.phase_safe:
        raise LoweringError(f"Approximate Toffoli requested at non-phase-safe site {gate}")
    x, y = gate.controls
    t = gate.target
    one, cx = Gate.one, Gate.cnot
    return [
        one('ry_p4', t), cx(y, t), one('ry_p4', t), cx(x, t),
        one('ry_m4', t), cx(y, t), one('ry_m4', t),
    ]


def expand_toffoli(gate: Gate, cfg: LoweringConfig = EXACT) -> List[Gate]:
    """Elementary gates for one Toffoli-level gate"""
    if gate.kind is GateKind.MCT:
        raise CircuitError(f"Lower MCT gates first: {gate}")
    if gate.kind in (GateKind.X, GateKind.PHASE1Q):
        return [gate]
    frame = _negation_frame(gate)
    positive = Gate(gate.kind, gate.target, gate.controls, phase_safe=gate.phase_safe)
    if gate.kind is GateKind.CNOT:
        return frame + [positive] + frame
    if cfg.toffoli_mode is ToffoliMode.APPROXIMATE and gate.phase_safe:
        body = approximate_toffoli(positive)
    else:
        body = exact_toffoli(positive)
    return frame + body + frame


def iter_lower_mct(gates: Iterable[Gate], layout: Layout, cfg: LoweringConfig = EXACT) -> Iterator[Gate]:
    all_qubits = layout.qubits()
    for gate in gates:
        yield from expand_mct(gate, all_qubits, cfg)


def iter_lower_toffoli(gates: Iterable[Gate], cfg: LoweringConfig = EXACT) -> Iterator[Gate]:
    for gate in gates:
        yield from expand_toffoli(gate, cfg)


def lower_mct(circuit: Circuit, cfg: LoweringConfig = EXACT) -> Circuit:
    """MCT-level circuit to Toffoli level, borrowing idle qubits as helpers"""
    if circuit.level is not CircuitLevel.MCT:
        raise CircuitError(f"Expected an MCT-level circuit, got {circuit.level.name}")
    gates = tuple(iter_lower_mct(circuit.gates, circuit.layout, cfg))
    return Circuit(circuit.layout, gates, CircuitLevel.TOFFOLI)


def lower_toffoli(circuit: Circuit, cfg: LoweringConfig = EXACT) -> Circuit:
    """Toffoli-level circuit to elementary gates"""
    if circuit.level is not CircuitLevel.TOFFOLI:
        raise CircuitError(f"Expected a Toffoli-level circuit, got {circuit.level.name}")
    gates = tuple(iter_lower_toffoli(circuit.gates, cfg))
    return Circuit(circuit.layout, gates, CircuitLevel.ELEMENTARY)


def lower_to_elementary(circuit: Circuit, cfg: LoweringConfig = EXACT) -> Circuit:
    if circuit.level is CircuitLevel.MCT:
        circuit = lower_mct(circuit, cfg)
    if circuit.level is CircuitLevel.TOFFOLI:
        circuit = lower_toffoli(circuit, cfg)
    return circuit


@lru_cache(maxsize=4096)
def _mct_elementary_size(arity: int, negatives: int, n_free: int, n_clean: int,
                         phase_safe: bool, cfg: LoweringConfig) -> int:
    controls = tuple(inp(i) for i in range(arity))
    polarity = tuple(i >= negatives for i in range(arity))
    clean = tuple(anc(10_000 + i) for i in range(n_clean))
    gate = Gate.mct(controls, tgt(), polarity, clean_helpers=clean, phase_safe=phase_safe)
    pool = [anc(i) for i in range(n_free)]
    return sum(len(expand_toffoli(g, cfg)) for g in expand_mct(gate, pool, cfg))


def elementary_size(gate: Gate, n_free: int, cfg: LoweringConfig = EXACT) -> int:
    """Exact number of elementary gates `gate` expands into with `n_free` borrowable qubits"""
    if gate.kind is GateKind.MCT:
        negatives = sum(1 for p in gate.polarity if not p)
        busy = set(gate.qubits)
        n_clean = sum(1 for q in gate.clean_helpers if q not in busy)
        return _mct_elementary_size(gate.arity, negatives, n_free, n_clean, gate.phase_safe, cfg)
    return len(expand_toffoli(gate, cfg))
