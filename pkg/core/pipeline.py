"""
Synthesis Pipeline
Chooses a synthesizer for a configuration, lowers the result and costs it.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, Optional

from config.settings import Settings
from core.circuit import Circuit, CircuitLevel, CostReport, Gate, GateKind, cost, cost_of_gates
from core.cnf import CnfFormula
from core.errors import InfeasibleConfigError
from core.lowering import EXACT, LoweringConfig, iter_lower_mct, iter_lower_toffoli, lower_to_elementary
from core.synth_depth import DepthOptions, synth_depth
from core.synth_size import SizeOptions, synth_size

logger = logging.getLogger(__name__)

MODES = ("size", "depth")
VARIANTS = ("default", "small-ancilla", "auto")


@dataclass(frozen=True)
class SynthesisConfig:
    """Ancilla budget, objective, lowering and ancilla assumptions for one oracle"""

    ancillas: int
    mode: str = "size"
    lowering: LoweringConfig = EXACT
    clean_ancillas: bool = True
    variant: str = "default"
    reuse_inputs: bool = False
    depth_fallback: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Unknown mode {self.mode!r}; expected one of {MODES}")
        if self.variant not in VARIANTS:
            raise ValueError(f"Unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if isinstance(self.ancillas, bool) or not isinstance(self.ancillas, int):
            raise ValueError(f"Ancilla budget must be an integer, got {self.ancillas!r}")
        if self.ancillas < Settings.MIN_ANCILLAS:
            raise InfeasibleConfigError(f"Ancilla budget {self.ancillas}", Settings.MIN_ANCILLAS)

    @property
    def small_ancilla(self) -> bool:
        if self.variant == "auto":
            return self.ancillas <= Settings.SMALL_ANCILLA_AUTO_THRESHOLD
        return self.variant == "small-ancilla"

    def size_options(self) -> SizeOptions:
        return SizeOptions(
            outermost_clean=self.clean_ancillas,
            small_ancilla=self.small_ancilla,
            reuse_inputs=self.reuse_inputs,
            lowering=self.lowering,
        )

    def describe(self) -> Dict[str, Any]:
        return {
            'ancillas': self.ancillas,
            'mode': self.mode,
            'variant': self.variant,
            'small_ancilla': self.small_ancilla,
            'clean_ancillas': self.clean_ancillas,
            'reuse_inputs': self.reuse_inputs,
            **self.lowering.describe(),
        }


@dataclass
class CompiledOracle:
    formula: CnfFormula
    config: SynthesisConfig
    mct: Circuit
    report: CostReport
    elementary: Optional[Circuit] = None


def synthesize(formula: CnfFormula, config: SynthesisConfig) -> Circuit:
    """MCT-level oracle for the configured objective"""
    if config.mode == "depth":
        options = DepthOptions(outermost_clean=config.clean_ancillas, fallback=config.depth_fallback)
        return synth_depth(formula, config.ancillas, options, config.size_options())
    return synth_size(formula, config.ancillas, config.size_options())


def _tally(gates: Iterable[Gate], counts: Dict[str, int]) -> Iterator[Gate]:
    for gate in gates:
        if gate.kind is GateKind.TOFFOLI:
            counts['toffoli'] += 1
        yield gate


def measure(circuit: Circuit, lowering: LoweringConfig = EXACT,
            metadata: Optional[Dict[str, Any]] = None) -> CostReport:
    """Elementary-level cost of an MCT-level circuit, streamed through both lowerings"""
    counts = {'toffoli': 0}
    stream = iter_lower_toffoli(_tally(iter_lower_mct(circuit.gates, circuit.layout, lowering), counts), lowering)
    report = cost_of_gates(stream, circuit.layout, CircuitLevel.ELEMENTARY, metadata)
    report.toffoli_count = counts['toffoli']
    report.mct_calls = circuit.count(GateKind.MCT)
    mct_cost = cost(circuit)
    report.metadata.setdefault('mct_size', mct_cost.size)
    report.metadata.setdefault('mct_depth', mct_cost.depth)
    return report


def compile_oracle(formula: CnfFormula, config: SynthesisConfig, materialize: bool = True) -> CompiledOracle:
    """Synthesize, lower and cost one oracle"""
    circuit = synthesize(formula, config)
    report = measure(circuit, config.lowering, config.describe())
    elementary = lower_to_elementary(circuit, config.lowering) if materialize else None
    return CompiledOracle(formula, config, circuit, report, elementary)
