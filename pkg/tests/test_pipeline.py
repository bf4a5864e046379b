"""Tests for configuration, compilation and costing"""

import json

import pytest

from core.circuit import GateKind, cost
from core.cnf import random_kcnf
from core.errors import InfeasibleConfigError
from core.lowering import APPROXIMATE, lower_mct
from core.pipeline import SynthesisConfig, compile_oracle, measure, synthesize
from core.sim import Exhaustive, verify_oracle


def test_config_validation():
    with pytest.raises(InfeasibleConfigError):
        SynthesisConfig(2)
    with pytest.raises(ValueError):
        SynthesisConfig(6, mode="fast")
    with pytest.raises(ValueError):
        SynthesisConfig(6, variant="tiny")


@pytest.mark.parametrize("ancillas", [None, "many", 4.0, True])
def test_config_rejects_non_integer_budget(ancillas):
    with pytest.raises(ValueError, match="integer"):
        SynthesisConfig(ancillas)


def test_auto_variant_follows_budget():
    assert SynthesisConfig(4, variant="auto").small_ancilla
    assert not SynthesisConfig(40, variant="auto").small_ancilla
    assert SynthesisConfig(40, variant="small-ancilla").small_ancilla
    assert not SynthesisConfig(4).small_ancilla


def test_describe_carries_lowering():
    data = SynthesisConfig(6, lowering=APPROXIMATE).describe()
    assert data['toffoli_mode'] == 'approx'
    assert data['ancillas'] == 6
    assert data['mode'] == 'size'


@pytest.mark.parametrize("mode", ["size", "depth"])
def test_compiled_report_matches_elementary_circuit(mode, random_formulas):
    compiled = compile_oracle(random_formulas[0], SynthesisConfig(8, mode))
    report, elementary = compiled.report, compiled.elementary
    assert report.level == 'ELEMENTARY'
    assert report.size == len(elementary)
    assert report.depth == cost(elementary).depth
    assert report.toffoli_count == lower_mct(compiled.mct).count(GateKind.TOFFOLI)
    assert report.mct_calls == compiled.mct.count(GateKind.MCT)
    assert report.ancillas_touched <= 8
    assert report.metadata['mct_size'] == len(compiled.mct)


def test_report_serialises_fixed_fields(random_formulas):
    report = measure(synthesize(random_formulas[1], SynthesisConfig(6)))
    data = json.loads(report.to_json())
    for key in ('size', 'depth', 'toffoli_count', 'mct_calls', 'ancillas_touched', 'level'):
        assert key in data


def test_compile_without_materialising(random_formulas):
    compiled = compile_oracle(random_formulas[0], SynthesisConfig(6), materialize=False)
    assert compiled.elementary is None
    assert compiled.report.size > 0


def test_approximate_lowering_is_smaller_and_correct(random_formulas):
    formula = random_formulas[3]
    exact = compile_oracle(formula, SynthesisConfig(6))
    approx = compile_oracle(formula, SynthesisConfig(6, lowering=APPROXIMATE))
    assert approx.mct.gates == exact.mct.gates
    assert approx.report.size < exact.report.size
    report = verify_oracle(approx.elementary, formula, Exhaustive(), seed=3, threads=2)
    assert report.passed, report.examples


def test_depth_mode_falls_back_when_partition_is_infeasible(random_formulas):
    formula = random_formulas[0]
    depth = synthesize(formula, SynthesisConfig(4, "depth"))
    size = synthesize(formula, SynthesisConfig(4, "size"))
    assert depth.gates == size.gates
    with pytest.raises(InfeasibleConfigError):
        synthesize(formula, SynthesisConfig(4, "depth", depth_fallback=False))


@pytest.mark.parametrize("ancillas", [3, 5])
def test_depth_fallback_with_input_reuse(ancillas):
    formula = random_kcnf(7, 20, 3, 41)
    config = SynthesisConfig(ancillas, "depth", reuse_inputs=True)
    report = verify_oracle(synthesize(formula, config), formula, Exhaustive(), seed=3, threads=1)
    assert report.passed, report.examples
