"""
SAT Oracle Synthesizer - command line entry point
Compiles CNF formulas into ancilla-bounded oracle circuits, verifies them,
and runs cost sweeps and Grover resource estimates.
"""

import argparse
import logging
import sys
from typing import List, Optional

from config.settings import Settings
from core.bench import SweepSpec, run_sweep
from core.circuit import Circuit
from core.cnf import CnfFormula, emit_dimacs, parse_dimacs, phase_transition_m, random_kcnf
from core.errors import InfeasibleConfigError, SatOracleError
from core.grover import estimate_grover
from core.lowering import LoweringConfig, MctStrategy, ToffoliMode, lower_mct, lower_to_elementary
from core.pipeline import MODES, SynthesisConfig, measure, synthesize
from core.qasm import emit_qasm, parse_qasm
from core.sim import CleanZero, Exhaustive, RandomDirty, Sampled, verify_oracle
from utils.config_utils import ConfigUtils
from utils.file_utils import FileUtils

logger = logging.getLogger("satoracle")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class UsageError(SatOracleError):
    """Flag combination rejected before any work is done"""


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for all subcommands"""
    parser = argparse.ArgumentParser(
        prog="sat-oracle",
        description=f"{Settings.APP_NAME} v{Settings.APP_VERSION}",
    )
    parser.add_argument('--config', help="JSON configuration file (default: ~/.satoracle/config.json)")
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    parser.add_argument('-q', '--quiet', action='store_true', help="warnings and errors only")
    parser.add_argument('--threads', type=int, help="worker threads (default: available cores)")
    sub = parser.add_subparsers(dest='command', required=True)

    def synthesis_flags(p: argparse.ArgumentParser):
        p.add_argument('--ancillas', type=int, help="ancilla budget (>= 3)")
        p.add_argument('--mode', choices=MODES, help="optimisation objective")
        p.add_argument('--lower', choices=[m.value for m in ToffoliMode], help="Toffoli decomposition")
        p.add_argument('--variant', choices=['default', 'small-ancilla', 'auto'])
        p.add_argument('--dirty', action='store_true', help="treat every ancilla as dirty")
        p.add_argument('--reuse-inputs', action='store_true', help="borrow unread input qubits")

    synth = sub.add_parser('synth', help="compile a DIMACS formula to QASM")
    synth.add_argument('-i', '--input', default='-', help="DIMACS file or '-' for stdin")
    synthesis_flags(synth)
    synth.add_argument('-o', '--out', default='-', help="QASM output file or '-' for stdout")
    synth.add_argument('--report', help="JSON cost report file")
    synth.add_argument('--emit', choices=['toffoli', 'elementary'], default='elementary')
    synth.add_argument('--verify', action='store_true', help="check the circuit before writing it")
    synth.add_argument('--seed', type=int)

    verify = sub.add_parser('verify', help="check an oracle against its formula")
    verify.add_argument('-i', '--input', default='-', help="DIMACS file or '-' for stdin")
    verify.add_argument('-c', '--circuit', help="QASM circuit; synthesized internally when omitted")
    synthesis_flags(verify)
    verify.add_argument('--samples', type=int, help="random inputs instead of exhaustive checking")
    verify.add_argument('--ancilla-policy', choices=['clean', 'dirty'], default='clean')
    verify.add_argument('--report', help="JSON verification report file")
    verify.add_argument('--seed', type=int)

    bench = sub.add_parser('bench', help="run an ancilla sweep")
    bench.add_argument('-s', '--spec', help="JSON file with a 'sweep' section (default: --config)")
    bench.add_argument('-o', '--out', default='-', help="CSV output file or '-' for stdout")
    bench.add_argument('--json', help="JSON mirror of the table")
    bench.add_argument('--xlsx', help="Excel export of the table")
    bench.add_argument('--seed', type=int)
    bench.add_argument('--ensemble', type=int, help="override the ensemble size")
    bench.add_argument('--no-verify', action='store_true', help="skip per-member verification")

    grover = sub.add_parser('estimate-grover', help="Grover resource estimate")
    grover.add_argument('--k', type=int, required=True)
    grover.add_argument('--n', type=int, required=True)
    grover.add_argument('--m', type=int, help="clause count (default: phase transition)")
    grover.add_argument('--ancillas', type=int, required=True)
    grover.add_argument('--mode', choices=MODES, default='size')
    grover.add_argument('--lower', choices=[m.value for m in ToffoliMode])
    grover.add_argument('--seed', type=int)
    grover.add_argument('-i', '--input', help="DIMACS formula instead of a random one")
    grover.add_argument('-o', '--out', default='-', help="JSON output file or '-' for stdout")

    gen = sub.add_parser('gen', help="generate a random k-CNF in DIMACS")
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('--m', type=int, help="clause count (default: phase transition)")
    gen.add_argument('--k', type=int, default=3)
    gen.add_argument('--seed', type=int)
    gen.add_argument('-o', '--out', default='-', help="DIMACS output file or '-' for stdout")
    return parser


def setup_logging(verbose: bool, quiet: bool):
    """Log to standard error so data streams stay clean"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format=Settings.LOG_FORMAT, force=True)


def load_config(path: Optional[str]) -> ConfigUtils:
    config = ConfigUtils(path)
    status = config.validate_config()
    for warning in status['warnings']:
        logger.warning(f"Config: {warning}")
    if not status['valid']:
        raise UsageError("Invalid configuration: " + "; ".join(status['errors']))
    return config


def lowering_from(args: argparse.Namespace, config: ConfigUtils) -> LoweringConfig:
    mode = args.lower or config.get('lowering.toffoli_mode', 'exact')
    strategy = config.get('lowering.mct_strategy', 'auto')
    return LoweringConfig(ToffoliMode(mode), MctStrategy(strategy))


def synthesis_from(args: argparse.Namespace, config: ConfigUtils) -> SynthesisConfig:
    ancillas = args.ancillas if args.ancillas is not None else config.get('synthesis.ancillas')
    return SynthesisConfig(
        ancillas=ancillas,
        mode=args.mode or config.get('synthesis.mode', 'size'),
        lowering=lowering_from(args, config),
        clean_ancillas=not args.dirty and bool(config.get('synthesis.clean_ancillas', True)),
        variant=args.variant or config.get('synthesis.variant', 'default'),
        reuse_inputs=args.reuse_inputs or bool(config.get('synthesis.reuse_inputs', False)),
        depth_fallback=bool(config.get('synthesis.depth_fallback', True)),
    )


def dirty_tolerant(synthesis: SynthesisConfig) -> bool:
    """Depth synthesis always needs its clean slots"""
    return synthesis.mode == "size" and not synthesis.clean_ancillas


def read_formula(path: str) -> CnfFormula:
    return parse_dimacs(FileUtils.read_text(path))


def _policy(dirty: bool, config: ConfigUtils):
    if dirty:
        return RandomDirty(config.get('verification.dirty_trials', Settings.DIRTY_TRIALS))
    return CleanZero()


def _mode_for(formula: CnfFormula, samples: Optional[int], config: ConfigUtils):
    if samples:
        return Sampled(samples)
    if formula.num_vars <= config.get('verification.exhaustive_max_vars', Settings.EXHAUSTIVE_MAX_VARS):
        return Exhaustive()
    return Sampled(config.get('verification.samples', Settings.SAMPLED_INPUTS))


def cmd_synth(args: argparse.Namespace, config: ConfigUtils) -> int:
    formula = read_formula(args.input)
    synthesis = synthesis_from(args, config)
    logger.info(
        f"Synthesizing n={formula.num_vars} m={formula.num_clauses} k={formula.width} "
        f"with {synthesis.ancillas} ancillas ({synthesis.mode} mode)"
    )
    circuit = synthesize(formula, synthesis)
    report = measure(circuit, synthesis.lowering, synthesis.describe())
    if args.emit == 'toffoli':
        emitted = lower_mct(circuit, synthesis.lowering)
    else:
        emitted = lower_to_elementary(circuit, synthesis.lowering)

    if args.verify:
        result = verify_oracle(
            emitted, formula, _mode_for(formula, None, config),
            _policy(dirty_tolerant(synthesis), config), seed=args.seed, threads=args.threads,
            formula_id=str(args.input),
        )
        if not result.passed:
            logger.error("Self-check failed; nothing written")
            sys.stderr.write(result.to_json() + "\n")
            return EXIT_VERIFY_FAILED
        logger.info(f"Self-check passed on {result.checked} basis states")

    FileUtils.write_text(args.out, emit_qasm(emitted))
    if args.report:
        FileUtils.write_text(args.report, report.to_json() + "\n")
    logger.info(f"Elementary size {report.size}, depth {report.depth}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: ConfigUtils) -> int:
    formula = read_formula(args.input)
    if args.circuit:
        circuit: Circuit = parse_qasm(FileUtils.read_text(args.circuit))
        dirty = args.ancilla_policy == 'dirty'
    else:
        synthesis = synthesis_from(args, config)
        circuit = synthesize(formula, synthesis)
        dirty = args.ancilla_policy == 'dirty' or dirty_tolerant(synthesis)
    mode = _mode_for(formula, args.samples, config)
    result = verify_oracle(circuit, formula, mode, _policy(dirty, config), seed=args.seed,
                           threads=args.threads, formula_id=str(args.input))
    text = result.to_json() + "\n"
    if args.report:
        FileUtils.write_text(args.report, text)
    else:
        FileUtils.write_text('-', text)
    return EXIT_OK if result.passed else EXIT_VERIFY_FAILED


def cmd_bench(args: argparse.Namespace, config: ConfigUtils) -> int:
    source = load_config(args.spec) if args.spec else config
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.ensemble is not None:
        overrides['ensemble_size'] = args.ensemble
    if args.no_verify:
        overrides['verify'] = False
    spec = SweepSpec.from_config(source, **overrides)
    logger.info(f"Sweep k={spec.k} n={list(spec.n_values)} mode={spec.mode} hash={spec.config_hash}")

    def progress(percent: float, label: str):
        logger.info(f"[{percent:5.1f}%] {label}")

    table = run_sweep(spec, threads=args.threads, progress_callback=progress)
    FileUtils.write_text(args.out, table.to_csv())
    if args.json:
        FileUtils.write_text(args.json, table.to_json() + "\n")
    if args.xlsx:
        table.to_xlsx(args.xlsx)
    if any(row.status == "failed" for row in table.rows):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_estimate_grover(args: argparse.Namespace, config: ConfigUtils) -> int:
    formula = read_formula(args.input) if args.input else None
    m = args.m
    if m is None:
        m = formula.num_clauses if formula else phase_transition_m(args.n, args.k)
    estimate = estimate_grover(
        args.k, args.n, m, args.ancillas, args.mode, lowering_from(args, config),
        seed=args.seed, formula=formula,
    )
    FileUtils.write_text(args.out, estimate.to_json() + "\n")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, config: ConfigUtils) -> int:
    seed = Settings.get_default_seed() if args.seed is None else args.seed
    m = args.m if args.m is not None else phase_transition_m(args.n, args.k)
    formula = random_kcnf(args.n, m, args.k, seed)
    comments = [f"random {args.k}-CNF n={args.n} m={m} seed={seed}"]
    FileUtils.write_text(args.out, emit_dimacs(formula, comments))
    return EXIT_OK


COMMANDS = {
    'synth': cmd_synth,
    'verify': cmd_verify,
    'bench': cmd_bench,
    'estimate-grover': cmd_estimate_grover,
    'gen': cmd_gen,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    setup_logging(args.verbose, args.quiet)
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be at least 1")
        return EXIT_USAGE

    try:
        config = load_config(args.config)
        if args.threads is None:
            args.threads = config.get_performance_settings()['max_threads']
        return COMMANDS[args.command](args, config)
    except InfeasibleConfigError as e:
        logger.error(f"Infeasible configuration: {e}")
        return EXIT_INFEASIBLE
    except (SatOracleError, ValueError) as e:
        logger.error(f"Error: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"Error accessing file: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
