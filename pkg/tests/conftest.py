"""Shared fixtures for the test suite"""

import numpy as np
import pytest

from core.circuit import Circuit
from core.cnf import Clause, CnfFormula, random_kcnf
from core.sim import simulate_batch


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run acceptance-scale tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep user configuration and seed overrides out of the tests"""
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.delenv("SATORACLE_SEED", raising=False)


@pytest.fixture
def small_formula() -> CnfFormula:
    return CnfFormula(4, (
        Clause.of(1, -2, 3),
        Clause.of(-1, 2, 4),
        Clause.of(2, -3, -4),
        Clause.of(1, 3, 4),
        Clause.of(-1, -2, -4),
    ))


@pytest.fixture
def random_formulas():
    return [random_kcnf(6, 12, 3, seed) for seed in range(4)]


@pytest.fixture
def all_states_check():
    """
    Run every basis state of a small circuit and check
    |x>|a>|c> -> |x>|a>|c xor f(x)> with phase 0.
    """

    def check(circuit: Circuit, fn) -> None:
        layout = circuit.layout
        total = layout.total
        assert total <= 14, "too many qubits for an all-states check"
        values = np.arange(1 << total, dtype=np.int64)
        bits = ((values[None, :] >> np.arange(total)[:, None]) & 1).astype(bool)
        out, phase = simulate_batch(circuit, bits)
        n, ell = layout.n_inputs, layout.n_ancillas
        expected = np.array([bool(fn(tuple(int(b) for b in bits[:n, i]))) for i in range(bits.shape[1])])
        assert np.array_equal(out[:n + ell], bits[:n + ell])
        assert np.array_equal(out[n + ell], bits[n + ell] ^ expected)
        assert not phase.any()

    return check
