"""Gate-by-gate golden traces of the GAND gadget"""

from pathlib import Path

import pytest

from core.errors import GandError
from core.gand import trace_gand

FIXTURES = Path(__file__).parent / "fixtures"


def test_p3_trace_matches_golden_file():
    golden = (FIXTURES / "gand_p3.trace").read_text(encoding='utf-8')
    assert trace_gand(3).render() == golden


def test_p3_stage_lengths():
    trace = trace_gand(3)
    assert len(trace.stage("merge")) == 13
    assert len(trace.stage("restore")) == 7
    assert [e.label for e in trace.stage("restore")] == [f"2.{j}" for j in range(1, 8)]


def test_p3_toffoli_tally():
    trace = trace_gand(3)
    assert sum(e.kind == "toffoli" for e in trace.entries) == 12


def test_p4_merge_stage_toffolis():
    merge = trace_gand(4).stage("merge")
    assert sum(e.kind == "toffoli" for e in merge) == 4 * 4 - 4


def test_p4_trace_labels_follow_step_scheme():
    trace = trace_gand(4)
    steps = [int(e.label.split(".")[0]) for e in trace.stage("merge")]
    assert steps == sorted(steps)
    assert set(steps) == {1, 2, 3, 4, 5}
    restore_steps = {int(e.label.split(".")[0]) for e in trace.stage("restore")}
    assert restore_steps == {2, 3, 4}


def test_trace_rejects_fan_in_below_two():
    with pytest.raises(GandError):
        trace_gand(1)
