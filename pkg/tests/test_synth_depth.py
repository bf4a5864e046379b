"""Tests for the depth-oriented synthesizer"""

import logging
from collections import defaultdict

import pytest

from core.circuit import GateKind, cost, tgt
from core.cnf import Clause, CnfFormula
from core.errors import InfeasibleConfigError
from core.lowering import lower_to_elementary
from core.sim import Exhaustive, verify_oracle
from core.synth_depth import (
    DepthOptions, InnermostBlockOracle, innermost_block, minimal_feasible_ancillas,
    partition_registers, plan_fanout, stage_count, synth_depth,
)
from core.synth_size import synth_size


def _assert_verified(circuit, formula):
    report = verify_oracle(circuit, formula, Exhaustive(), seed=5, threads=1)
    assert report.passed, report.examples


def test_stage_count():
    assert stage_count(3, 6) == 2
    assert stage_count(3, 8) == 1
    assert stage_count(3, 20) == 1
    assert stage_count(4, 15) == 2


@pytest.mark.parametrize("ancillas, sizes, pairs", [
    (6, (2, 2, 2), 1),
    (7, (2, 2, 3), 1),
    (8, (0, 4, 4), 2),
    (12, (0, 6, 6), 3),
    (20, (0, 10, 10), 5),
])
def test_partition_registers(ancillas, sizes, pairs):
    part = partition_registers(ancillas, 3)
    assert (len(part.mem), len(part.dirty), len(part.clean)) == sizes
    assert part.pairs == pairs
    assert part.block_capacity == 2 * pairs
    assert len(set(part.mem + part.dirty + part.clean)) == ancillas


def test_minimal_feasible_ancillas():
    assert minimal_feasible_ancillas(3) == 6
    assert minimal_feasible_ancillas(2) == 4
    assert not partition_registers(5, 3).feasible


def test_plan_fanout_serves_shared_variables_first():
    lanes = [
        [Clause.of(1, 2, 3), Clause.of(-1, 4, 5)],
        [Clause.of(1, -2, 6), Clause.of(2, 3, 4)],
    ]
    table = plan_fanout(lanes, 1)
    assert table.copies[1] == 2
    assert all(table.copies[v] == 1 for v in range(2, 7))
    assert table.extra_qubits == 1
    assert table.lane_copy[0][1] == 0
    assert table.lane_copy[1][1] == 1


def test_infeasible_partition_without_fallback(random_formulas):
    with pytest.raises(InfeasibleConfigError) as info:
        synth_depth(random_formulas[0], 5, DepthOptions(fallback=False))
    assert info.value.minimal_ancillas == 6


def test_infeasible_partition_falls_back_to_size(random_formulas, caplog):
    formula = random_formulas[0]
    with caplog.at_level(logging.WARNING, logger="core.synth_depth"):
        circuit = synth_depth(formula, 5)
    assert circuit.gates == synth_size(formula, 5).gates
    assert "using size synthesis" in caplog.text


def test_budget_below_three_is_rejected(random_formulas):
    with pytest.raises(InfeasibleConfigError) as info:
        synth_depth(random_formulas[0], 2)
    assert info.value.minimal_ancillas == 3


@pytest.mark.parametrize("ancillas", [6, 7, 8, 12, 20])
def test_depth_oracle_is_correct(ancillas, random_formulas):
    for formula in random_formulas:
        _assert_verified(synth_depth(formula, ancillas), formula)


def test_depth_oracle_without_clean_outermost_level(random_formulas):
    formula = random_formulas[2]
    _assert_verified(synth_depth(formula, 8, DepthOptions(outermost_clean=False)), formula)


def test_innermost_block_computes_and_of_pair():
    clauses = (Clause.of(1, -2, 3), Clause.of(-1, 2, 4))
    part = partition_registers(6, 3)
    circuit = innermost_block(clauses, part, 4)
    _assert_verified(circuit, CnfFormula(4, clauses))


def test_innermost_block_with_copies():
    clauses = (
        Clause.of(1, 2, 3, 4), Clause.of(-1, 2, -3, 5),
        Clause.of(1, -2, 3, 5), Clause.of(-1, -4, -5, 3),
    )
    part = partition_registers(15, 4)
    assert len(part.mem) == 5 and part.pairs == 2
    stages = InnermostBlockOracle(clauses, part).stages(tgt(), list(part.dirty))
    assert stages['copy']
    assert stages['reset'] == list(reversed(stages['clause'])) + list(reversed(stages['copy']))
    _assert_verified(innermost_block(clauses, part, 5), CnfFormula(5, clauses))


def test_four_cnf_depth_oracle():
    formula = CnfFormula(5, (
        Clause.of(1, 2, 3, 4), Clause.of(-1, 2, -3, 5), Clause.of(1, -2, 3, 5),
        Clause.of(-1, -4, -5, 3), Clause.of(2, 3, -4, -5), Clause.of(-2, -3, 4, 1),
    ))
    _assert_verified(synth_depth(formula, 15), formula)


def _audit_layers(circuit):
    layers = circuit.layers()
    by_layer = defaultdict(list)
    for gate, layer in zip(circuit.gates, layers):
        by_layer[layer].append(set(gate.qubits))
    for layer, qubit_sets in by_layer.items():
        for i, first in enumerate(qubit_sets):
            for second in qubit_sets[i + 1:]:
                assert not first & second, f"layer {layer} reuses {first & second}"
    last = {}
    for gate, layer in zip(circuit.gates, layers):
        for qubit in gate.qubits:
            assert last.get(qubit, 0) < layer
            last[qubit] = layer
    assert max(layers) == cost(circuit).depth


@pytest.mark.parametrize("ancillas", [8, 12, 20])
def test_layers_never_share_a_qubit(ancillas, random_formulas):
    _audit_layers(synth_depth(random_formulas[1], ancillas))


def test_elementary_layers_never_share_a_qubit(random_formulas):
    _audit_layers(lower_to_elementary(synth_depth(random_formulas[2], 8)))


def test_wide_clause_lanes_keep_their_helpers_apart():
    clauses = (
        Clause.of(1, 2, 3, 4, 5), Clause.of(-1, 2, -3, 4, 6),
        Clause.of(1, -2, 3, -5, -6), Clause.of(-2, 3, -4, 5, 6),
    )
    part = partition_registers(32, 5)
    assert part.pairs >= 2
    stages = InnermostBlockOracle(clauses, part).stages(tgt(), list(part.dirty))
    lanes = [{part.dirty[0], part.dirty[1], part.clean[0]}, {part.dirty[2], part.dirty[3], part.clean[1]}]
    mcts = [gate for gate in stages['clause'] if gate.kind is GateKind.MCT]
    assert mcts
    for gate in mcts:
        mine = 0 if gate.target in lanes[0] else 1
        assert len(gate.helpers) == 3
        assert not set(gate.helpers) & lanes[1 - mine]
    _assert_verified(innermost_block(clauses, part, 6), CnfFormula(6, clauses))
