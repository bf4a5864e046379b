"""Tests for the benchmark harness"""

import json
import math

import pytest

from config.settings import Settings
from core import bench
from core.bench import (
    SweepRow, SweepSpec, SweepTable, depth_exponent, ensemble, loglog_slope, reference_ladder,
    run_sweep, size_exponent,
)
from core.circuit import Circuit, Gate, Layout, tgt
from core.cnf import phase_transition_m
from core.errors import SweepSpecError
from utils.config_utils import ConfigUtils


def _spec(**overrides):
    values = dict(k=3, n_values=(6,), m=12, ladder=(3, 6), ensemble_size=3, seed=7)
    values.update(overrides)
    return SweepSpec(**values)


def test_reference_ladder():
    ladder = reference_ladder(170)
    assert ladder[0] == 27
    assert ladder[-1] == 339
    assert ladder == sorted(set(ladder))
    assert reference_ladder(1) == [3]


def test_exponents_and_slope():
    assert size_exponent(6) == pytest.approx(2.0)
    assert size_exponent(2) == pytest.approx(3.0)
    xs = [1, 2, 4, 8]
    assert loglog_slope(xs, [3 * x * x for x in xs]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        loglog_slope([1], [1])
    with pytest.raises(ValueError):
        loglog_slope([1, 2], [0, 1])


@pytest.mark.parametrize("overrides", [
    dict(ladder=(6, 3)),
    dict(ladder=(3, 24)),
    dict(ladder=()),
    dict(mode="fast"),
    dict(variant="tiny"),
    dict(n_values=(2,)),
    dict(ensemble_size=0),
    dict(k=6, m=None),
])
def test_spec_validation(overrides):
    with pytest.raises(SweepSpecError):
        _spec(**overrides)


def test_ensemble_is_seeded():
    spec = _spec()
    first, second = ensemble(spec, 6), ensemble(spec, 6)
    assert first == second
    assert len({f.clauses for f in first}) == 3
    assert ensemble(_spec(seed=8), 6) != first


def test_small_sweep_csv():
    table = run_sweep(_spec(), threads=2)
    lines = table.to_csv().splitlines()
    assert lines[0] == f"# seed=7 config_hash={table.spec.config_hash}"
    assert lines[1] == ",".join(Settings.CSV_COLUMNS)
    assert len(lines) == 4
    for line, ancillas in zip(lines[2:], (3, 6)):
        fields = line.split(",")
        assert fields[:5] == ['3', '6', '12', str(ancillas), 'size']
        assert fields[-1] == 'true'
        assert float(fields[5]) > 0
        assert len(fields[5].split(".")[1]) == 3


def test_sweep_is_deterministic():
    assert run_sweep(_spec(), threads=1).to_csv() == run_sweep(_spec(), threads=3).to_csv()


def test_more_ancillas_reduce_mean_size():
    table = run_sweep(_spec(verify=False, ladder=(3, 11)))
    xs, ys = table.series(6)
    assert xs == [3, 11]
    assert ys[1] < ys[0]
    assert table.rows[0].verified_label == "skipped"


def test_depth_sweep_marks_infeasible_rows(caplog):
    table = run_sweep(_spec(mode="depth"))
    infeasible, feasible = table.rows
    assert infeasible.status == "infeasible"
    assert infeasible.minimal_ancillas == 6
    assert infeasible.csv_values()[5:] == ['', '', '', '', 'infeasible']
    assert feasible.status == "ok"
    assert "requires ancillas >= 6" in caplog.text


def test_failed_verification_is_reported(monkeypatch):
    def broken(formula, config):
        return Circuit(Layout(formula.num_vars, config.ancillas), (Gate.x(tgt()),))

    monkeypatch.setattr(bench, "synthesize", broken)
    table = run_sweep(_spec(ladder=(3,)))
    row = table.rows[0]
    assert row.status == "failed"
    assert row.verified_label == "false"
    assert row.diagnostics['failed_members'] == [0, 1, 2]
    assert not row.diagnostics['first_report']['passed']


def test_json_rows_carry_extremes():
    data = json.loads(run_sweep(_spec(ladder=(6,))).to_json())
    assert data['seed'] == 7
    assert data['spec']['ladder'] == [6]
    row = data['rows'][0]
    assert row['min_size'] <= row['mean_size'] <= row['max_size']
    assert row['verified'] == 'true'


def test_xlsx_export(tmp_path):
    openpyxl = pytest.importorskip("openpyxl")
    table = run_sweep(_spec(ladder=(3,), ensemble_size=2))
    path = table.to_xlsx(tmp_path / "out" / "sweep.xlsx")
    workbook = openpyxl.load_workbook(path)
    sheet = workbook["sweep"]
    assert [cell.value for cell in sheet[1]] == Settings.CSV_COLUMNS
    assert sheet.max_row == 2
    meta = workbook["meta"]
    assert [meta.cell(1, 1).value, meta.cell(1, 2).value] == ['seed', 7]


def test_spec_from_config(tmp_path):
    config = ConfigUtils(tmp_path / "config.json")
    config.update({
        'sweep.n_values': [6], 'sweep.m': 12, 'sweep.ladder': [3, 6],
        'sweep.ensemble_size': 2, 'sweep.seed': 5,
    })
    spec = SweepSpec.from_config(config)
    assert spec.seed == 5
    assert spec.ladder == (3, 6)
    assert spec.ensemble_size == 2

    config.set('sweep.ladder', 'auto')
    spec = SweepSpec.from_config(config, ensemble_size=4)
    assert spec.ladder is None
    assert spec.ladder_for(6) == reference_ladder(12)
    assert spec.ensemble_size == 4


def test_config_hash_tracks_settings():
    assert _spec().config_hash == _spec().config_hash
    assert _spec().config_hash != _spec(ensemble_size=4).config_hash
    assert isinstance(SweepTable(_spec()).header(), str)


def test_reference_points_carry_published_means():
    assert Settings.get_reference_point(4, 80, 80) == {'mean_size': 391760.16, 'mean_depth': 59228.2}
    baseline = Settings.get_reference_point(4, 80, 1587)
    assert baseline['mean_size'] == 87333.2
    assert baseline['vchain_size'] == 103205.2
    assert Settings.get_reference_point(4, 800, 15887)['mean_depth'] == 21734.6
    assert Settings.get_reference_point(3, 40, 40) is None


def test_row_reports_ratio_to_reference():
    row = SweepRow(4, 80, 794, 80, "size", sizes=[391760, 783521], depths=[59228, 59228])
    data = row.to_dict()
    assert data['reference']['mean_size'] == 391760.16
    assert data['reference_ratio']['mean_size'] == pytest.approx(1.5, rel=1e-6)
    assert data['reference_ratio']['mean_depth'] == pytest.approx(1.0, rel=1e-4)
    assert 'reference' not in SweepRow(4, 80, 794, 81, "size", sizes=[1], depths=[1]).to_dict()


def _mean(spec, n, ancillas, metric="mean_size"):
    table = run_sweep(spec)
    row = next(r for r in table.rows if r.n == n and r.ancillas == ancillas)
    assert row.status == "ok"
    return getattr(row, metric)


@pytest.mark.slow
@pytest.mark.parametrize("n", [40, 80])
def test_eightfold_claim(n):
    m = phase_transition_m(n, 4)
    low, high = math.ceil(2 * math.sqrt(m)), 2 * m - 1
    spec = SweepSpec(k=4, n_values=(n,), ladder=(low, high), ensemble_size=4, seed=3, verify=False)
    table = run_sweep(spec)
    xs, ys = table.series(n)
    assert xs == [low, high]
    assert ys[0] <= 8 * ys[1]


@pytest.mark.slow
def test_size_scaling_exponent():
    ancillas = 16
    ms = [2 ** e for e in range(5, 11)]
    sizes = [
        _mean(SweepSpec(k=3, n_values=(64,), m=m, ladder=(ancillas,), ensemble_size=2, seed=5,
                        verify=False), 64, ancillas)
        for m in ms
    ]
    assert loglog_slope(ms, sizes) <= size_exponent(ancillas) + 0.1


@pytest.mark.slow
def test_depth_scaling_exponent():
    ancillas = 60
    ms = [2 ** e for e in range(5, 11)]
    depths = [
        _mean(SweepSpec(k=3, n_values=(64,), m=m, ladder=(ancillas,), mode="depth", ensemble_size=2,
                        seed=5, verify=False), 64, ancillas, "mean_depth")
        for m in ms
    ]
    assert loglog_slope(ms, depths) <= depth_exponent(ancillas, 3) + 0.1


@pytest.mark.slow
@pytest.mark.parametrize("n, ancillas, mode, metric", [
    (80, 80, "size", "mean_size"),
    (80, 1587, "size", "mean_size"),
    (80, 80, "depth", "mean_depth"),
    (800, 15887, "depth", "mean_depth"),
])
def test_published_means_within_tolerance(n, ancillas, mode, metric):
    spec = SweepSpec(k=4, n_values=(n,), ladder=(ancillas,), mode=mode, ensemble_size=2, seed=9,
                     verify=False)
    row = run_sweep(spec).rows[0]
    assert row.status == "ok"
    ratio = row.reference_ratios()[metric]
    assert 1 / Settings.REFERENCE_TOLERANCE <= ratio <= Settings.REFERENCE_TOLERANCE
