"""Tests for MCT and Toffoli lowering"""

import itertools

import numpy as np
import pytest

from core.circuit import Circuit, CircuitLevel, Gate, GateKind, Layout, anc, inp, tgt
from core.errors import LoweringError
from core.lowering import (
    APPROXIMATE, EXACT, LoweringConfig, MctStrategy, approximate_toffoli, elementary_size,
    exact_toffoli, expand_mct, expand_toffoli, lower_mct, lower_to_elementary,
)
from core.sim import BasisState, simulate, simulate_batch


def _toffoli_circuit(gates):
    return Circuit(Layout(3, 0, 0), tuple(gates), CircuitLevel.ELEMENTARY)


def test_exact_toffoli_shape():
    gates = exact_toffoli(Gate.toffoli(inp(0), inp(1), inp(2)))
    assert len(gates) == 15
    assert sum(g.kind is GateKind.CNOT for g in gates) == 6
    assert sum(g.name in ('t', 'tdg') for g in gates) == 7


def test_exact_toffoli_is_a_toffoli():
    circuit = _toffoli_circuit(exact_toffoli(Gate.toffoli(inp(0), inp(1), inp(2))))
    for x, y, t in itertools.product([0, 1], repeat=3):
        out = simulate(circuit, BasisState((x, y, t)))
        assert out.bits == (x, y, t ^ (x & y))
        assert out.phase == 0


def test_approximate_toffoli_has_one_relative_sign():
    gate = Gate.toffoli(inp(0), inp(1), inp(2), phase_safe=True)
    gates = approximate_toffoli(gate)
    assert len(gates) == 7
    assert sum(g.kind is GateKind.CNOT for g in gates) == 3
    circuit = _toffoli_circuit(gates)
    for x, y, t in itertools.product([0, 1], repeat=3):
        out = simulate(circuit, BasisState((x, y, t)))
        assert out.bits == (x, y, t ^ (x & y))
        assert out.sign == (-1 if (x, y, t) == (1, 0, 1) else 1)


def test_approximate_toffoli_refuses_unsafe_site():
    with pytest.raises(LoweringError):
        approximate_toffoli(Gate.toffoli(inp(0), inp(1), inp(2)))


def test_approximate_mode_keeps_exact_form_on_unsafe_sites():
    unsafe = Gate.toffoli(inp(0), inp(1), inp(2))
    safe = Gate.toffoli(inp(0), inp(1), inp(2), phase_safe=True)
    assert len(expand_toffoli(unsafe, APPROXIMATE)) == 15
    assert len(expand_toffoli(safe, APPROXIMATE)) == 7
    assert len(expand_toffoli(safe, EXACT)) == 15


def test_negative_controls_get_x_frame():
    gate = Gate.toffoli(inp(0), inp(1), inp(2), polarity=(False, True))
    gates = expand_toffoli(gate)
    assert gates[0] == Gate.x(inp(0)) and gates[-1] == Gate.x(inp(0))
    assert len(gates) == 17


def _run_all(circuit: Circuit):
    total = circuit.layout.total
    values = np.arange(1 << total, dtype=np.int64)
    bits = ((values[None, :] >> np.arange(total)[:, None]) & 1).astype(bool)
    out, phase = simulate_batch(circuit, bits)
    return bits, out, phase


def _assert_mct(circuit: Circuit, controls, target_row: int, polarity=None):
    bits, out, phase = _run_all(circuit)
    polarity = polarity or [True] * len(controls)
    fire = np.ones(bits.shape[1], dtype=bool)
    for row, positive in zip(controls, polarity):
        fire &= bits[row] == positive
    expected = bits.copy()
    expected[target_row] ^= fire
    assert np.array_equal(out, expected)
    assert not phase.any()


def test_dirty_vchain_counts_and_restores_helpers():
    layout = Layout(5, 3)
    gate = Gate.mct([inp(i) for i in range(5)], tgt())
    gates = expand_mct(gate, layout.ancillas())
    assert len(gates) == 4 * (5 - 2)
    assert all(g.kind is GateKind.TOFFOLI for g in gates)
    _assert_mct(Circuit(layout, tuple(gates), CircuitLevel.TOFFOLI), range(5), layout.index(tgt()))


def test_clean_vchain_counts():
    layout = Layout(5, 3)
    gate = Gate.mct([inp(i) for i in range(5)], tgt(), clean_helpers=(anc(0), anc(1), anc(2)))
    gates = expand_mct(gate, layout.ancillas())
    assert len(gates) == 2 * (5 - 2) + 1
    assert sum(g.phase_safe for g in gates) == 2 * (5 - 2)


def test_recursive_split_with_one_borrowed_qubit():
    layout = Layout(5, 1)
    gate = Gate.mct([inp(i) for i in range(5)], tgt(), polarity=(True, False, True, True, False))
    gates = expand_mct(gate, [anc(0)])
    assert all(g.kind in (GateKind.X, GateKind.CNOT, GateKind.TOFFOLI) for g in gates)
    circuit = Circuit(layout, tuple(gates), CircuitLevel.TOFFOLI)
    _assert_mct(circuit, range(5), layout.index(tgt()), [True, False, True, True, False])


def test_vchain_strategy_refuses_missing_helpers():
    cfg = LoweringConfig(mct_strategy=MctStrategy.VCHAIN_DIRTY)
    gate = Gate.mct([inp(i) for i in range(5)], tgt())
    with pytest.raises(LoweringError):
        expand_mct(gate, [anc(0)], cfg)


def test_no_borrowable_qubit():
    gate = Gate.mct([inp(i) for i in range(4)], tgt())
    with pytest.raises(LoweringError):
        expand_mct(gate, [])


def test_elementary_size_matches_expansion():
    layout = Layout(6, 4)
    gate = Gate.mct([inp(0), inp(2), inp(4), inp(5)], tgt(), polarity=(False, True, False, True))
    gates = [e for g in expand_mct(gate, layout.qubits()) for e in expand_toffoli(g)]
    n_free = layout.total - gate.arity - 1
    assert elementary_size(gate, n_free) == len(gates)


def test_lower_to_elementary_levels():
    layout = Layout(4, 2)
    mct = Circuit(layout, (
        Gate.mct([inp(0), inp(1), inp(2), inp(3)], tgt()),
        Gate.cnot(inp(0), anc(0)),
    ))
    toffoli = lower_mct(mct)
    assert toffoli.level is CircuitLevel.TOFFOLI
    assert toffoli.count(GateKind.MCT) == 0
    elementary = lower_to_elementary(mct)
    assert elementary.level is CircuitLevel.ELEMENTARY
    assert elementary.count(GateKind.TOFFOLI) == 0
    assert len(elementary) == 15 * toffoli.count(GateKind.TOFFOLI) + 1
