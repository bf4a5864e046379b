"""
OpenQASM 2.0 Output
Writes Toffoli-level and elementary circuits, and reads the same dialect back.
"""

import logging
import re
from typing import Dict, List, Optional, TextIO

from core.circuit import Circuit, CircuitLevel, Gate, GateKind, Layout, QubitId, Register
from core.errors import CircuitError

logger = logging.getLogger(__name__)

_NAMES = {
    'h': 'h', 't': 't', 'tdg': 'tdg', 's': 's', 'sdg': 'sdg', 'z': 'z',
    'ry_p4': 'ry(pi/4)', 'ry_m4': 'ry(-pi/4)',
}
_PARSED = {'h', 't', 'tdg', 's', 'sdg', 'z'}
_REGISTERS = {r.value: r for r in Register}
_GATE_LINE = re.compile(r"^([a-z]+)\s*(?:\(([^)]*)\))?\s+(.+)$")
_ARG = re.compile(r"^([A-Za-z_]\w*)\[(\d+)\]$")


def _gate_lines(gate: Gate) -> List[str]:
    if gate.kind is GateKind.PHASE1Q:
        return [f"{_NAMES[gate.name]} {gate.target};"]
    frame = [f"x {c};" for c, positive in zip(gate.controls, gate.polarity) if not positive]
    operands = ",".join(str(q) for q in gate.qubits)
    name = {GateKind.X: 'x', GateKind.CNOT: 'cx', GateKind.TOFFOLI: 'ccx'}[gate.kind]
    return frame + [f"{name} {operands};"] + frame


def emit_qasm(circuit: Circuit, sink: Optional[TextIO] = None) -> str:
    """OpenQASM 2.0 text; negative controls are written as X conjugation"""
    if circuit.level is CircuitLevel.MCT:
        raise CircuitError("Lower MCT gates before emitting QASM")
    layout = circuit.layout
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    for register in Register:
        size = layout.size_of(register)
        if size:
            lines.append(f"qreg {register.value}[{size}];")
    for gate in circuit.gates:
        lines.extend(_gate_lines(gate))
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def _qubit(token: str, sizes: Dict[Register, int], line_no: int) -> QubitId:
    match = _ARG.match(token.strip())
    if not match or match.group(1) not in _REGISTERS:
        raise CircuitError(f"Line {line_no}: bad operand {token!r}")
    register = _REGISTERS[match.group(1)]
    offset = int(match.group(2))
    if offset >= sizes.get(register, 0):
        raise CircuitError(f"Line {line_no}: {token.strip()} outside declared register")
    return QubitId(register, offset)


def parse_qasm(text: str) -> Circuit:
    """Read the dialect written by `emit_qasm`"""
    sizes: Dict[Register, int] = {}
    gates: List[Gate] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('//', 1)[0].strip()
        if not line or line.startswith('OPENQASM') or line.startswith('include'):
            continue
        if not line.endswith(';'):
            raise CircuitError(f"Line {line_no}: missing ';'")
        line = line[:-1].strip()
        if line.startswith('qreg'):
            match = re.match(r"^qreg\s+([A-Za-z_]\w*)\[(\d+)\]$", line)
            if not match or match.group(1) not in _REGISTERS:
                raise CircuitError(f"Line {line_no}: unsupported register {line!r}")
            sizes[_REGISTERS[match.group(1)]] = int(match.group(2))
            continue
        match = _GATE_LINE.match(line)
        if not match:
            raise CircuitError(f"Line {line_no}: cannot parse {line!r}")
        name, param, operands = match.groups()
        qubits = [_qubit(tok, sizes, line_no) for tok in operands.split(',')]
        if name == 'ry':
            angle = (param or '').replace(' ', '')
            if angle not in ('pi/4', '-pi/4'):
                raise CircuitError(f"Line {line_no}: unsupported angle {param!r}")
            gates.append(Gate.one('ry_p4' if angle == 'pi/4' else 'ry_m4', qubits[0]))
        elif name in _PARSED and len(qubits) == 1:
            gates.append(Gate.one(name, qubits[0]))
        elif name in ('x', 'cx', 'ccx'):
            gates.append(Gate.mct(qubits[:-1], qubits[-1]))
        else:
            raise CircuitError(f"Line {line_no}: unsupported gate {name!r}")

    layout = Layout(sizes.get(Register.INPUT, 0), sizes.get(Register.ANCILLA, 0),
                    sizes.get(Register.TARGET, 0))
    elementary = any(g.kind is GateKind.PHASE1Q for g in gates)
    return Circuit(layout, tuple(gates), CircuitLevel.ELEMENTARY if elementary else CircuitLevel.TOFFOLI)
