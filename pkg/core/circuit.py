"""
Reversible Circuit IR
Qubits, gates, immutable circuits at three abstraction levels, and cost.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Any, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from core.errors import CircuitError

logger = logging.getLogger(__name__)


class Register(Enum):
    """Qubit register, valued by its OpenQASM name"""

    INPUT = "in"
    ANCILLA = "anc"
    TARGET = "tgt"


class QubitId(NamedTuple):
    """A qubit by register and offset within it"""

    register: Register
    offset: int

    def __str__(self) -> str:
        return f"{self.register.value}[{self.offset}]"


def inp(offset: int) -> QubitId:
    """Input qubit holding variable offset+1"""
    return QubitId(Register.INPUT, offset)


def anc(offset: int) -> QubitId:
    """Ancilla qubit"""
    return QubitId(Register.ANCILLA, offset)


def tgt(offset: int = 0) -> QubitId:
    """Oracle target qubit"""
    return QubitId(Register.TARGET, offset)


@dataclass(frozen=True)
class Layout:
    """Qubit registers of a circuit: inputs, ancillas, then targets"""

    n_inputs: int
    n_ancillas: int
    n_targets: int = 1

    def __post_init__(self):
        if min(self.n_inputs, self.n_ancillas, self.n_targets) < 0:
            raise CircuitError(f"Negative register size in {self}")

    @property
    def total(self) -> int:
        return self.n_inputs + self.n_ancillas + self.n_targets

    def size_of(self, register: Register) -> int:
        if register is Register.INPUT:
            return self.n_inputs
        if register is Register.ANCILLA:
            return self.n_ancillas
        return self.n_targets

    def contains(self, qubit: QubitId) -> bool:
        return 0 <= qubit.offset < self.size_of(qubit.register)

    def index(self, qubit: QubitId) -> int:
        """Flat position of a qubit"""
        if not self.contains(qubit):
            raise CircuitError(f"Qubit {qubit} outside layout {self}")
        if qubit.register is Register.INPUT:
            return qubit.offset
        if qubit.register is Register.ANCILLA:
            return self.n_inputs + qubit.offset
        return self.n_inputs + self.n_ancillas + qubit.offset

    def qubit(self, index: int) -> QubitId:
        if index < self.n_inputs:
            return inp(index)
        index -= self.n_inputs
        if index < self.n_ancillas:
            return anc(index)
        return tgt(index - self.n_ancillas)

    def inputs(self) -> List[QubitId]:
        return [inp(i) for i in range(self.n_inputs)]

    def ancillas(self) -> List[QubitId]:
        return [anc(i) for i in range(self.n_ancillas)]

    def targets(self) -> List[QubitId]:
        return [tgt(i) for i in range(self.n_targets)]

    def qubits(self) -> List[QubitId]:
        return self.inputs() + self.ancillas() + self.targets()


class GateKind(Enum):
    """Gate families; MCT covers three or more controls"""

    X = "x"
    CNOT = "cnot"
    TOFFOLI = "toffoli"
    MCT = "mct"
    PHASE1Q = "phase1q"


class CircuitLevel(IntEnum):
    """Abstraction level, ordered from elementary up to MCT"""

    ELEMENTARY = 0
    TOFFOLI = 1
    MCT = 2


# one-qubit elementary gates and their inverses
ONE_QUBIT_INVERSE = {
    'h': 'h',
    't': 'tdg',
    'tdg': 't',
    's': 'sdg',
    'sdg': 's',
    'z': 'z',
    'ry_p4': 'ry_m4',
    'ry_m4': 'ry_p4',
}

# diagonal gates: phase exponent (units of pi/4) applied to |1>
DIAGONAL_PHASE = {'t': 1, 'tdg': 7, 's': 2, 'sdg': 6, 'z': 4}

_ARITY = {GateKind.X: 0, GateKind.CNOT: 1, GateKind.TOFFOLI: 2, GateKind.PHASE1Q: 0}

_ADMITTED = {
    CircuitLevel.MCT: {GateKind.X, GateKind.CNOT, GateKind.TOFFOLI, GateKind.MCT},
    CircuitLevel.TOFFOLI: {GateKind.X, GateKind.CNOT, GateKind.TOFFOLI},
    CircuitLevel.ELEMENTARY: {GateKind.X, GateKind.CNOT, GateKind.PHASE1Q},
}


@dataclass(frozen=True, slots=True)
class Gate:
    """
    One gate. `polarity[i]` is True when control i fires on |1>.

    `helpers`, `clean_helpers` and `phase_safe` are lowering hints and take
    no part in equality.
    """

    kind: GateKind
    target: QubitId
    controls: Tuple[QubitId, ...] = ()
    polarity: Tuple[bool, ...] = ()
    name: Optional[str] = None
    phase_safe: bool = field(default=False, compare=False)
    helpers: Tuple[QubitId, ...] = field(default=(), compare=False)
    clean_helpers: Tuple[QubitId, ...] = field(default=(), compare=False)

    def __post_init__(self):
        controls = tuple(self.controls)
        object.__setattr__(self, 'controls', controls)
        if not self.polarity:
            object.__setattr__(self, 'polarity', (True,) * len(controls))
        else:
            object.__setattr__(self, 'polarity', tuple(bool(p) for p in self.polarity))
        if len(self.polarity) != len(controls):
            raise CircuitError(f"Polarity length {len(self.polarity)} != {len(controls)} controls")
        if self.target in controls or len(set(controls)) != len(controls):
            raise CircuitError(f"Qubit collision in {self.kind.value} gate on {self.target}")
        if self.kind is GateKind.MCT:
            if len(controls) < 3:
                raise CircuitError(f"MCT needs at least 3 controls, got {len(controls)}")
        elif len(controls) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind.value} takes {_ARITY[self.kind]} controls, got {len(controls)}")
        if self.kind is GateKind.PHASE1Q:
            if self.name not in ONE_QUBIT_INVERSE:
                raise CircuitError(f"Unknown one-qubit gate {self.name!r}")
        elif self.name is not None:
            raise CircuitError(f"Only one-qubit phase gates carry a name, got {self.name!r}")

    @classmethod
    def x(cls, target: QubitId) -> "Gate":
        return cls(GateKind.X, target)

    @classmethod
    def cnot(cls, control: QubitId, target: QubitId, positive: bool = True) -> "Gate":
        return cls(GateKind.CNOT, target, (control,), (positive,))

    @classmethod
    def toffoli(cls, c1: QubitId, c2: QubitId, target: QubitId,
                polarity: Sequence[bool] = (), phase_safe: bool = False) -> "Gate":
        return cls(GateKind.TOFFOLI, target, (c1, c2), tuple(polarity), phase_safe=phase_safe)

    @classmethod
    def one(cls, name: str, target: QubitId) -> "Gate":
        return cls(GateKind.PHASE1Q, target, name=name)

    @classmethod
    def mct(cls, controls: Sequence[QubitId], target: QubitId,
            polarity: Sequence[bool] = (), **hints: Any) -> "Gate":
        """Multi-controlled X; picks the narrowest gate kind for the arity"""
        arity = len(controls)
        if arity == 0:
            kind = GateKind.X
        elif arity == 1:
            kind = GateKind.CNOT
        elif arity == 2:
            kind = GateKind.TOFFOLI
        else:
            kind = GateKind.MCT
        if kind is not GateKind.MCT:
            hints.pop('helpers', None)
            hints.pop('clean_helpers', None)
        return cls(kind, target, tuple(controls), tuple(polarity), **hints)

    @property
    def arity(self) -> int:
        return len(self.controls)

    @property
    def qubits(self) -> Tuple[QubitId, ...]:
        return self.controls + (self.target,)

    @property
    def is_positive(self) -> bool:
        return all(self.polarity)

    def with_hints(self, **hints: Any) -> "Gate":
        """Copy with lowering hints replaced"""
        return replace(self, **hints)

    def inverse(self) -> "Gate":
        """X, CNOT, Toffoli and MCT are self-inverse; phase gates swap with their adjoint"""
        if self.kind is GateKind.PHASE1Q:
            return replace(self, name=ONE_QUBIT_INVERSE[self.name])
        return self

    def __str__(self) -> str:
        if self.kind is GateKind.PHASE1Q:
            return f"{self.name} {self.target}"
        ctrl = ",".join(f"{'' if p else '!'}{c}" for c, p in zip(self.controls, self.polarity))
        return f"{self.kind.value}({ctrl}) {self.target}" if ctrl else f"{self.kind.value} {self.target}"


def admits(level: CircuitLevel, gate: Gate) -> bool:
    """Whether a gate may appear in a circuit of the given level"""
    if gate.kind not in _ADMITTED[level]:
        return False
    return not (level is CircuitLevel.ELEMENTARY and not gate.is_positive)


def _check_gate(layout: Layout, level: CircuitLevel, gate: Gate):
    if not admits(level, gate):
        raise CircuitError(f"Gate {gate} not admitted at {level.name} level")
    for qubit in gate.qubits:
        if not layout.contains(qubit):
            raise CircuitError(f"Gate {gate} touches {qubit} outside {layout}")


@dataclass(frozen=True)
class Circuit:
    """Immutable gate sequence over a fixed layout"""

    layout: Layout
    gates: Tuple[Gate, ...] = ()
    level: CircuitLevel = CircuitLevel.MCT

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        for gate in self.gates:
            _check_gate(self.layout, self.level, gate)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def append(self, gate: Gate) -> "Circuit":
        """New circuit with one more gate"""
        _check_gate(self.layout, self.level, gate)
        return Circuit(self.layout, self.gates + (gate,), self.level)

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        """New circuit with the gates appended"""
        return Circuit(self.layout, self.gates + tuple(gates), self.level)

    def inverse(self) -> "Circuit":
        """Gates reversed and each inverted"""
        return Circuit(self.layout, tuple(g.inverse() for g in reversed(self.gates)), self.level)

    def compose(self, other: "Circuit") -> "Circuit":
        """self followed by other; the result takes the more abstract level"""
        if other.layout != self.layout:
            raise CircuitError(f"Layout mismatch: {self.layout} vs {other.layout}")
        return Circuit(self.layout, self.gates + other.gates, max(self.level, other.level))

    def layers(self) -> List[int]:
        """ASAP layer (1-based) of every gate"""
        return list(_asap_layers(self.gates, self.layout))

    def count(self, kind: GateKind) -> int:
        """Number of gates of one kind"""
        return sum(1 for gate in self.gates if gate.kind is kind)


class CircuitBuilder:
    """Mutable single-threaded gate accumulator producing a Circuit"""

    def __init__(self, layout: Layout, level: CircuitLevel = CircuitLevel.MCT):
        """Initialize builder"""
        self.layout = layout
        self.level = level
        self._gates: List[Gate] = []

    def __len__(self) -> int:
        return len(self._gates)

    def append(self, gate: Gate) -> "CircuitBuilder":
        _check_gate(self.layout, self.level, gate)
        self._gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "CircuitBuilder":
        for gate in gates:
            self.append(gate)
        return self

    def gates_since(self, position: int) -> Sequence[Gate]:
        return self._gates[position:]

    def build(self) -> Circuit:
        return Circuit(self.layout, tuple(self._gates), self.level)


@dataclass
class CostReport:
    """Gate count and depth of a circuit at one level"""

    size: int
    depth: int
    toffoli_count: int
    mct_calls: int
    ancillas_touched: int
    level: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'size': self.size,
            'depth': self.depth,
            'toffoli_count': self.toffoli_count,
            'mct_calls': self.mct_calls,
            'ancillas_touched': self.ancillas_touched,
            'level': self.level,
        }
        if self.metadata:
            data['metadata'] = self.metadata
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)


def _asap_layers(gates: Iterable[Gate], layout: Layout) -> Iterator[int]:
    front = [0] * layout.total
    for gate in gates:
        positions = [layout.index(q) for q in gate.qubits]
        layer = max(front[p] for p in positions) + 1
        for p in positions:
            front[p] = layer
        yield layer


def cost_of_gates(gates: Iterable[Gate], layout: Layout, level: CircuitLevel,
                  metadata: Optional[Dict[str, Any]] = None) -> CostReport:
    """Cost of a gate stream without materialising it"""
    size = depth = toffolis = mcts = 0
    touched = set()
    front = [0] * layout.total
    first_ancilla = layout.n_inputs
    last_ancilla = layout.n_inputs + layout.n_ancillas
    for gate in gates:
        size += 1
        if gate.kind is GateKind.TOFFOLI:
            toffolis += 1
        elif gate.kind is GateKind.MCT:
            mcts += 1
        positions = [layout.index(q) for q in gate.qubits]
        layer = max(front[p] for p in positions) + 1
        for p in positions:
            front[p] = layer
            if first_ancilla <= p < last_ancilla:
                touched.add(p)
        if layer > depth:
            depth = layer
    return CostReport(size, depth, toffolis, mcts, len(touched), level.name,
                      dict(metadata or {}))


def cost(circuit: Circuit) -> CostReport:
    """Size and greedy ASAP depth of a circuit at its own level"""
    return cost_of_gates(circuit.gates, circuit.layout, circuit.level)
