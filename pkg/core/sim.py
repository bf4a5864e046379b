"""
Basis-State Simulator
Classical evaluation of reversible and elementary circuits on basis states.

Reversible gates act as bit updates. Elementary circuits are cut into runs
whose joint unitary is monomial (a permutation with phases that are powers
of exp(i*pi/4)); each run's table is computed once with numpy and cached.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import Settings
from core.circuit import DIAGONAL_PHASE, Circuit, Gate, GateKind, Layout, QubitId
from core.cnf import CnfFormula, evaluate_batch
from core.errors import SimulationError

logger = logging.getLogger(__name__)

_OMEGA = np.exp(1j * np.pi / 4)
_TOL = 1e-7

_ONE_QUBIT = {
    'h': np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    'ry_p4': np.array([[math.cos(math.pi / 8), -math.sin(math.pi / 8)],
                       [math.sin(math.pi / 8), math.cos(math.pi / 8)]], dtype=complex),
    'ry_m4': np.array([[math.cos(math.pi / 8), math.sin(math.pi / 8)],
                       [-math.sin(math.pi / 8), math.cos(math.pi / 8)]], dtype=complex),
}
for _name, _k in DIAGONAL_PHASE.items():
    _ONE_QUBIT[_name] = np.diag([1, _OMEGA ** _k]).astype(complex)


@dataclass(frozen=True)
class BasisState:
    """Computational basis state with a global phase exp(i*pi*phase/4)"""

    bits: Tuple[int, ...]
    phase: int = 0

    @property
    def sign(self) -> Optional[int]:
        """+1 or -1, or None when the phase is not real"""
        return {0: 1, 4: -1}.get(self.phase % 8)


# compiled operations ---------------------------------------------------------

@dataclass(frozen=True)
class _FlipOp:
    target: int
    controls: Tuple[int, ...]
    polarity: Tuple[bool, ...]


@dataclass(frozen=True)
class _PhaseOp:
    row: int
    k: int


@dataclass(frozen=True)
class _TableOp:
    rows: Tuple[int, ...]
    perm: np.ndarray
    phase: np.ndarray


def _gate_matrix(step: tuple, width: int) -> np.ndarray:
    kind, name, controls, polarity, t = step
    dim = 1 << width
    matrix = np.zeros((dim, dim), dtype=complex)
    if kind is GateKind.PHASE1Q:
        u = _ONE_QUBIT[name]
        for col in range(dim):
            bit = (col >> t) & 1
            for out_bit in (0, 1):
                row = (col & ~(1 << t)) | (out_bit << t)
                matrix[row, col] += u[out_bit, bit]
        return matrix
    for col in range(dim):
        fire = all(((col >> c) & 1) == int(p) for c, p in zip(controls, polarity))
        matrix[col ^ (1 << t) if fire else col, col] = 1
    return matrix


def _monomial_table(matrix: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    magnitudes = np.abs(matrix)
    perm = np.argmax(magnitudes, axis=0)
    cols = np.arange(matrix.shape[1])
    entries = matrix[perm, cols]
    if np.any(np.abs(np.abs(entries) - 1) > _TOL):
        return None
    k = np.rint(np.angle(entries) / (np.pi / 4)).astype(np.int64) % 8
    if np.any(np.abs(entries - _OMEGA ** k) > 1e-6):
        raise SimulationError("Monomial run carries a phase outside the eighth roots of unity")
    return perm.astype(np.int64), k


@lru_cache(maxsize=Settings.RUN_TABLE_CACHE_SIZE)
def _run_table(steps: Tuple[Tuple[int, tuple], ...]):
    """Joint matrix of a run given as (local width, gate signature) steps, and its table if monomial"""
    width, step = steps[-1]
    if len(steps) > 1:
        previous = _run_table(steps[:-1])[0]
    else:
        previous = np.eye(1, dtype=complex)
    while previous.shape[0] < (1 << width):
        previous = np.kron(np.eye(2, dtype=complex), previous)
    product = _gate_matrix(step, width) @ previous
    return product, _monomial_table(product)


def _signature(gate: Gate, pos: Dict[QubitId, int]) -> tuple:
    return (gate.kind, gate.name, tuple(pos[c] for c in gate.controls), gate.polarity, pos[gate.target])


def compile_ops(gates: Iterable[Gate], layout: Layout) -> Iterator[Union[_FlipOp, _PhaseOp, _TableOp]]:
    """Turn a gate stream into simulator operations"""
    local: List[QubitId] = []
    pos: Dict[QubitId, int] = {}
    steps: Tuple[Tuple[int, tuple], ...] = ()

    for gate in gates:
        opening = gate.kind is GateKind.PHASE1Q and gate.name not in DIAGONAL_PHASE
        if not local and not opening:
            if gate.kind is GateKind.PHASE1Q:
                yield _PhaseOp(layout.index(gate.target), DIAGONAL_PHASE[gate.name])
            else:
                yield _FlipOp(layout.index(gate.target),
                              tuple(layout.index(c) for c in gate.controls), gate.polarity)
            continue

        for qubit in gate.qubits:
            if qubit not in pos:
                pos[qubit] = len(local)
                local.append(qubit)
        if len(local) > Settings.MAX_SEGMENT_QUBITS:
            raise SimulationError(f"Non-permutation run spans more than {Settings.MAX_SEGMENT_QUBITS} qubits")
        steps = steps + ((len(local), _signature(gate, pos)),)
        _, table = _run_table(steps)
        if table is not None:
            yield _TableOp(tuple(layout.index(q) for q in local), table[0], table[1])
            local, pos, steps = [], {}, ()

    if local:
        raise SimulationError("Circuit ends inside a non-permutation run")


# batch simulation ------------------------------------------------------------

def _apply_batch(ops: Sequence, bits: np.ndarray, phase: np.ndarray):
    for op in ops:
        if isinstance(op, _FlipOp):
            if op.controls:
                mask = bits[op.controls[0]] == op.polarity[0]
                for c, p in zip(op.controls[1:], op.polarity[1:]):
                    mask &= bits[c] == p
                bits[op.target] ^= mask
            else:
                bits[op.target] ^= True
        elif isinstance(op, _PhaseOp):
            phase += op.k * bits[op.row]
        else:
            idx = np.zeros(bits.shape[1], dtype=np.int64)
            for j, row in enumerate(op.rows):
                idx |= bits[row].astype(np.int64) << j
            out = op.perm[idx]
            phase += op.phase[idx]
            for j, row in enumerate(op.rows):
                bits[row] = ((out >> j) & 1).astype(bool)
    phase %= 8


def simulate_batch(circuit: Circuit, bits: np.ndarray,
                   phase: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run many basis states at once.

    `bits` has one row per qubit (layout order) and one column per state.
    Returns new arrays; inputs are not modified.
    """
    bits = np.array(bits, dtype=bool)
    if bits.ndim != 2 or bits.shape[0] != circuit.layout.total:
        raise SimulationError(f"Expected {circuit.layout.total} qubit rows, got shape {bits.shape}")
    phase = np.zeros(bits.shape[1], dtype=np.int64) if phase is None else np.array(phase, dtype=np.int64)
    _apply_batch(list(compile_ops(circuit.gates, circuit.layout)), bits, phase)
    return bits, phase


def simulate(circuit: Circuit, state: BasisState) -> BasisState:
    """Reference single-state simulator, pure Python"""
    if len(state.bits) != circuit.layout.total:
        raise SimulationError(f"State has {len(state.bits)} bits, layout needs {circuit.layout.total}")
    bits = [int(b) & 1 for b in state.bits]
    phase = state.phase
    for op in compile_ops(circuit.gates, circuit.layout):
        if isinstance(op, _FlipOp):
            if all(bits[c] == int(p) for c, p in zip(op.controls, op.polarity)):
                bits[op.target] ^= 1
        elif isinstance(op, _PhaseOp):
            phase += op.k * bits[op.row]
        else:
            idx = sum(bits[row] << j for j, row in enumerate(op.rows))
            out = int(op.perm[idx])
            phase += int(op.phase[idx])
            for j, row in enumerate(op.rows):
                bits[row] = (out >> j) & 1
    return BasisState(tuple(bits), phase % 8)


# oracle verification ---------------------------------------------------------

@dataclass(frozen=True)
class Exhaustive:
    name = "exhaustive"


@dataclass(frozen=True)
class Sampled:
    count: int = Settings.SAMPLED_INPUTS
    name = "sampled"


@dataclass(frozen=True)
class CleanZero:
    trials = 1
    name = "clean"


@dataclass(frozen=True)
class RandomDirty:
    trials: int = Settings.DIRTY_TRIALS
    name = "dirty"


@dataclass
class VerificationReport:
    """Outcome of checking an oracle against its formula"""

    formula_id: str
    mode: str
    ancilla_policy: str
    checked: int = 0
    failures: int = 0
    sign_failures: int = 0
    ancilla_restoration_failures: int = 0
    examples: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.sign_failures == 0 and self.ancilla_restoration_failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'formula_id': self.formula_id,
            'mode': self.mode,
            'ancilla_policy': self.ancilla_policy,
            'checked': self.checked,
            'failures': self.failures,
            'sign_failures': self.sign_failures,
            'ancilla_restoration_failures': self.ancilla_restoration_failures,
            'passed': self.passed,
            'examples': self.examples,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def default_mode(n: int) -> Union[Exhaustive, Sampled]:
    return Exhaustive() if n <= Settings.EXHAUSTIVE_MAX_VARS else Sampled()


def _input_assignments(n: int, mode, rng: np.random.Generator) -> np.ndarray:
    if isinstance(mode, Exhaustive):
        if n > 24:
            raise SimulationError(f"Exhaustive verification over {n} variables is not tractable")
        values = np.arange(1 << n, dtype=np.int64)
        return ((values[:, None] >> np.arange(n)) & 1).astype(bool)
    return rng.integers(0, 2, size=(mode.count, n)).astype(bool)


def _check_chunk(ops: Sequence, layout: Layout, x: np.ndarray, c: np.ndarray,
                 ancillas: np.ndarray, expected: np.ndarray, offset: int,
                 max_examples: int) -> Dict[str, Any]:
    n, ell = layout.n_inputs, layout.n_ancillas
    size = x.shape[0]
    bits = np.zeros((layout.total, size), dtype=bool)
    bits[:n] = x.T
    bits[n:n + ell] = ancillas.T
    bits[n + ell] = c
    phase = np.zeros(size, dtype=np.int64)
    _apply_batch(ops, bits, phase)

    wrong = np.any(bits[:n] != x.T, axis=0) | (bits[n + ell] != (c ^ expected))
    dirty = np.any(bits[n:n + ell] != ancillas.T, axis=0) if ell else np.zeros(size, dtype=bool)
    signed = phase != 0
    bad = np.flatnonzero(wrong | dirty | signed)[:max_examples]
    examples = [{
        'index': int(offset + i),
        'input': ''.join('1' if b else '0' for b in x[i]),
        'target_in': int(c[i]),
        'expected': int(c[i] ^ expected[i]),
        'got': int(bits[n + ell, i]),
        'ancillas_restored': not bool(dirty[i]),
        'phase': int(phase[i]),
    } for i in bad]
    return {
        'checked': size,
        'failures': int(wrong.sum()),
        'ancilla': int(dirty.sum()),
        'sign': int(signed.sum()),
        'examples': examples,
    }


def verify_oracle(circuit: Circuit, formula: CnfFormula, mode=None, policy=None,
                  seed: Optional[int] = None, threads: Optional[int] = None,
                  formula_id: str = "formula",
                  max_examples: int = Settings.MAX_RECORDED_FAILURES) -> VerificationReport:
    """Check |x>|anc>|c> -> |x>|anc>|c xor f(x)> with sign +1 on every tested state"""
    layout = circuit.layout
    if layout.n_inputs != formula.num_vars or layout.n_targets < 1:
        raise SimulationError(f"Layout {layout} does not fit a formula over {formula.num_vars} variables")
    mode = mode or default_mode(formula.num_vars)
    policy = policy or CleanZero()
    seed = Settings.get_default_seed() if seed is None else seed
    rng = np.random.Generator(np.random.PCG64(seed))

    x = _input_assignments(formula.num_vars, mode, rng)
    f = evaluate_batch(formula, x)
    trials = policy.trials
    x = np.repeat(x, 2 * trials, axis=0)
    f = np.repeat(f, 2 * trials)
    c = np.tile(np.repeat(np.array([False, True]), trials), len(x) // (2 * trials))
    if isinstance(policy, RandomDirty):
        ancillas = rng.integers(0, 2, size=(len(x), layout.n_ancillas)).astype(bool)
    else:
        ancillas = np.zeros((len(x), layout.n_ancillas), dtype=bool)

    ops = list(compile_ops(circuit.gates, layout))
    chunk = Settings.SIM_CHUNK_SIZE
    starts = list(range(0, len(x), chunk))
    results: Dict[int, Dict[str, Any]] = {}
    workers = max(1, min(threads or Settings.MAX_THREADS, len(starts)))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(_check_chunk, ops, layout, x[s:s + chunk], c[s:s + chunk],
                            ancillas[s:s + chunk], f[s:s + chunk], s, max_examples): i
            for i, s in enumerate(starts)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()

    report = VerificationReport(formula_id, mode.name, policy.name)
    for i in sorted(results):
        part = results[i]
        report.checked += part['checked']
        report.failures += part['failures']
        report.ancilla_restoration_failures += part['ancilla']
        report.sign_failures += part['sign']
        room = max_examples - len(report.examples)
        report.examples.extend(part['examples'][:room])
    if not report.passed:
        logger.error(
            f"Verification of {formula_id} failed: {report.failures} wrong outputs, "
            f"{report.ancilla_restoration_failures} dirty ancillas, {report.sign_failures} sign errors"
        )
    return report
