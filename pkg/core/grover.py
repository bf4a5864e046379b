"""
Grover Resource Estimation
Analytic cost of a full Grover search built from a synthesized oracle.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

from config.settings import Settings
from core.circuit import CircuitLevel, Gate, Layout, cost_of_gates
from core.cnf import CnfFormula, derive_seed, random_kcnf
from core.errors import SatOracleError
from core.lowering import EXACT, LoweringConfig, expand_mct, iter_lower_mct, iter_lower_toffoli
from core.pipeline import SynthesisConfig, synthesize
from core.synth_depth import partition_registers

logger = logging.getLogger(__name__)


def grover_rounds(n: int) -> int:
    """floor(pi/4 * 2^(n/2)), the iteration count for a single marked item"""
    if n < 1:
        raise SatOracleError(f"Grover rounds need n >= 1, got n={n}")
    scale = math.sqrt(2) if n % 2 else 1.0
    return math.floor(math.ldexp(math.pi / 4 * scale, n // 2))


def diffusion_gates(layout: Layout, lowering: LoweringConfig = EXACT) -> Iterator[Gate]:
    """
    Elementary gates of the inversion about the mean on the input register.

    The (n-1)-controlled X on the last input is conjugated by H so that it
    acts as a controlled Z.
    """
    n = layout.n_inputs
    inputs = layout.inputs()
    last = inputs[-1]
    hadamards = [Gate.one('h', q) for q in inputs]
    flips = [Gate.x(q) for q in inputs]
    reflect = Gate.mct(inputs[:-1], last)
    core = iter_lower_toffoli(expand_mct(reflect, layout.qubits(), lowering), lowering)
    logger.debug(f"Diffusion over {n} inputs with a {reflect.arity}-control reflection")
    return itertools.chain(
        hadamards, flips, [Gate.one('h', last)], core, [Gate.one('h', last)], flips, hadamards,
    )


@dataclass
class GroverEstimate:
    """One-round and full-search cost; full figures are rounds times one round"""

    k: int
    n: int
    m: int
    ancillas: int
    mode: str
    synthesizer: str
    oracle_size: int
    oracle_depth: int
    diffusion_size: int
    one_round_size: int
    one_round_depth: int
    rounds: int
    seed: Optional[int] = None
    alternatives: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def full_round_size(self) -> int:
        return self.rounds * self.one_round_size

    @property
    def full_round_depth(self) -> int:
        return self.rounds * self.one_round_depth

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'k': self.k,
            'n': self.n,
            'm': self.m,
            'ancillas': self.ancillas,
            'mode': self.mode,
            'synthesizer': self.synthesizer,
            'oracle_size': self.oracle_size,
            'oracle_depth': self.oracle_depth,
            'diffusion_size': self.diffusion_size,
            'one_round_size': self.one_round_size,
            'one_round_depth': self.one_round_depth,
            'rounds': self.rounds,
            'full_round_size': self.full_round_size,
            'full_round_depth': self.full_round_depth,
            'seed': self.seed,
        }
        if self.alternatives:
            data['alternatives'] = self.alternatives
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _one_round(formula: CnfFormula, config: SynthesisConfig) -> Dict[str, int]:
    oracle = synthesize(formula, config)
    layout = oracle.layout
    lowering = config.lowering
    oracle_stream = iter_lower_toffoli(iter_lower_mct(oracle.gates, layout, lowering), lowering)
    oracle_cost = cost_of_gates(oracle_stream, layout, CircuitLevel.ELEMENTARY)
    diffusion_size = sum(1 for _ in diffusion_gates(layout, lowering))
    chained = itertools.chain(
        iter_lower_toffoli(iter_lower_mct(oracle.gates, layout, lowering), lowering),
        diffusion_gates(layout, lowering),
    )
    round_cost = cost_of_gates(chained, layout, CircuitLevel.ELEMENTARY)
    return {
        'oracle_size': oracle_cost.size,
        'oracle_depth': oracle_cost.depth,
        'diffusion_size': diffusion_size,
        'one_round_size': round_cost.size,
        'one_round_depth': round_cost.depth,
    }


def estimate_grover(k: int, n: int, m: int, ancillas: int, mode: str = "size",
                    lowering: LoweringConfig = EXACT, seed: Optional[int] = None,
                    formula: Optional[CnfFormula] = None,
                    config: Optional[SynthesisConfig] = None) -> GroverEstimate:
    """
    Resource estimate for Grover search on a representative formula.

    Without `formula` a random k-CNF is drawn from `seed`. In depth mode
    the size-oriented figures are attached as an alternative so both
    readings of a depth column are available.
    """
    rounds = grover_rounds(n)
    if formula is None:
        seed = Settings.get_default_seed() if seed is None else seed
        formula = random_kcnf(n, m, k, derive_seed(seed, k, n, m))
    elif formula.num_vars != n:
        raise SatOracleError(f"Supplied formula has {formula.num_vars} variables, expected {n}")

    config = config or SynthesisConfig(ancillas, mode, lowering)
    mode, ancillas, lowering = config.mode, config.ancillas, config.lowering
    synthesizer = mode
    if mode == "depth" and not partition_registers(ancillas, formula.width).feasible:
        synthesizer = "size-fallback"
    figures = _one_round(formula, config)
    estimate = GroverEstimate(
        k=k, n=n, m=formula.num_clauses, ancillas=ancillas, mode=mode,
        synthesizer=synthesizer, rounds=rounds, seed=seed, **figures,
    )
    if mode == "depth":
        alt_config = SynthesisConfig(ancillas, "size", lowering, config.clean_ancillas,
                                     config.variant, config.reuse_inputs)
        alt = _one_round(formula, alt_config)
        if (alt['one_round_size'], alt['one_round_depth']) != \
                (figures['one_round_size'], figures['one_round_depth']):
            estimate.alternatives.append({
                'synthesizer': 'size',
                **alt,
                'full_round_size': rounds * alt['one_round_size'],
                'full_round_depth': rounds * alt['one_round_depth'],
            })
    logger.info(
        f"Grover estimate k={k} n={n} m={estimate.m} ancillas={ancillas}: "
        f"one round {estimate.one_round_size} gates / depth {estimate.one_round_depth}, "
        f"{rounds} rounds"
    )
    return estimate
