"""
Benchmark Harness
Cost sweeps over ancilla budgets on seeded random k-CNF ensembles.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import Settings
from core.cnf import CnfFormula, derive_seed, phase_transition_m, random_kcnf
from core.errors import InfeasibleConfigError, SweepSpecError
from core.lowering import EXACT, LoweringConfig, MctStrategy, ToffoliMode
from core.pipeline import MODES, VARIANTS, SynthesisConfig, measure, synthesize
from core.sim import CleanZero, default_mode, verify_oracle
from core.synth_depth import minimal_feasible_ancillas, partition_registers, stage_count
from utils.config_utils import ConfigUtils
from utils.file_utils import FileUtils

logger = logging.getLogger(__name__)


def reference_ladder(m: int, points: int = 8) -> List[int]:
    """Geometric ancilla ladder from ceil(2*sqrt(m)) up to 2m-1"""
    top = max(Settings.MIN_ANCILLAS, 2 * m - 1)
    bottom = min(top, max(Settings.MIN_ANCILLAS, math.ceil(2 * math.sqrt(m))))
    values = np.geomspace(bottom, top, num=max(points, 2))
    ladder = sorted({int(round(v)) for v in values} | {bottom, top})
    return ladder


def size_exponent(ancillas: int) -> float:
    """Growth exponent of oracle size in m at a fixed ancilla budget"""
    return 1 + math.log(4, ancillas // 2 + 1)


def depth_exponent(ancillas: int, width: int) -> float:
    """Growth exponent of oracle depth in m for a large ancilla budget"""
    return 1 + math.log(4, ancillas / stage_count(width, ancillas))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)"""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("Need at least two matching points for a slope")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("Log-log fit needs positive values")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep: formula shape, ensemble, ancilla ladder and synthesis settings"""

    k: int
    n_values: Tuple[int, ...]
    ladder: Optional[Tuple[int, ...]] = None
    mode: str = "size"
    ensemble_size: int = Settings.ENSEMBLE_SIZE
    seed: int = Settings.DEFAULT_SEED
    m: Optional[int] = None
    ratio: Optional[float] = None
    lowering: LoweringConfig = EXACT
    variant: str = "default"
    clean_ancillas: bool = True
    verify: bool = True
    ladder_points: int = 8

    def __post_init__(self):
        object.__setattr__(self, 'n_values', tuple(self.n_values))
        if self.ladder is not None:
            object.__setattr__(self, 'ladder', tuple(self.ladder))
        self.validate()

    def validate(self):
        if self.k < 1:
            raise SweepSpecError(f"k must be positive, got {self.k}")
        if not self.n_values or any(n < self.k for n in self.n_values):
            raise SweepSpecError(f"Every n must be at least k={self.k}, got {list(self.n_values)}")
        if self.mode not in MODES:
            raise SweepSpecError(f"Unknown mode {self.mode!r}")
        if self.variant not in VARIANTS:
            raise SweepSpecError(f"Unknown variant {self.variant!r}")
        if self.ensemble_size < 1:
            raise SweepSpecError(f"Ensemble size must be positive, got {self.ensemble_size}")
        if self.m is None and self.ratio is None and Settings.get_phase_transition_ratio(self.k) is None:
            raise SweepSpecError(f"No threshold ratio known for k={self.k}; give m or ratio")
        if self.ladder is not None:
            if not self.ladder:
                raise SweepSpecError("Ancilla ladder is empty")
            if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
                raise SweepSpecError(f"Ancilla ladder must be strictly increasing: {list(self.ladder)}")
            for n in self.n_values:
                m = self.clauses_for(n)
                if self.ladder[-1] > 2 * m - 1:
                    raise SweepSpecError(
                        f"Ladder top {self.ladder[-1]} exceeds 2m-1 = {2 * m - 1} for n={n}"
                    )

    def clauses_for(self, n: int) -> int:
        if self.m is not None:
            return self.m
        return phase_transition_m(n, self.k, self.ratio)

    def ladder_for(self, n: int) -> List[int]:
        if self.ladder is not None:
            return list(self.ladder)
        return reference_ladder(self.clauses_for(n), self.ladder_points)

    def synthesis_config(self, ancillas: int) -> SynthesisConfig:
        return SynthesisConfig(
            ancillas, self.mode, self.lowering, self.clean_ancillas, self.variant,
            depth_fallback=False,
        )

    def describe(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'n_values': list(self.n_values),
            'ladder': list(self.ladder) if self.ladder is not None else 'auto',
            'mode': self.mode,
            'ensemble_size': self.ensemble_size,
            'seed': self.seed,
            'm': self.m,
            'ratio': self.ratio,
            'variant': self.variant,
            'clean_ancillas': self.clean_ancillas,
            'verify': self.verify,
            **self.lowering.describe(),
            'version': Settings.APP_VERSION,
        }

    @property
    def config_hash(self) -> str:
        return FileUtils.get_config_hash(self.describe())

    @classmethod
    def from_config(cls, config: ConfigUtils, **overrides: Any) -> "SweepSpec":
        """Build a spec from the `sweep`, `synthesis` and `lowering` sections"""
        ladder = config.get('sweep.ladder')
        seed = config.get('sweep.seed')
        try:
            lowering = LoweringConfig(
                ToffoliMode(config.get('lowering.toffoli_mode', 'exact')),
                MctStrategy(config.get('lowering.mct_strategy', 'auto')),
            )
            values = dict(
                k=int(config.get('sweep.k', 3)),
                n_values=tuple(int(n) for n in config.get('sweep.n_values', [])),
                ladder=None if ladder in (None, 'auto') else tuple(int(a) for a in ladder),
                mode=config.get('sweep.mode', 'size'),
                ensemble_size=int(config.get('sweep.ensemble_size', Settings.ENSEMBLE_SIZE)),
                seed=Settings.get_default_seed() if seed is None else int(seed),
                m=config.get('sweep.m'),
                ratio=config.get('sweep.ratio'),
                lowering=lowering,
                variant=config.get('synthesis.variant', 'default'),
                clean_ancillas=bool(config.get('synthesis.clean_ancillas', True)),
                verify=bool(config.get('sweep.verify', True)),
                ladder_points=int(config.get('sweep.ladder_points', 8)),
            )
        except (TypeError, ValueError) as e:
            raise SweepSpecError(f"Invalid sweep configuration: {e}") from e
        values.update(overrides)
        return cls(**values)


@dataclass
class SweepRow:
    """Ensemble statistics for one (n, ancillas) point"""

    k: int
    n: int
    m: int
    ancillas: int
    mode: str
    sizes: List[int] = field(default_factory=list)
    depths: List[int] = field(default_factory=list)
    status: str = "ok"
    verified: Optional[bool] = None
    minimal_ancillas: Optional[int] = None
    diagnostics: Optional[Dict[str, Any]] = None

    def _stat(self, values: List[int], fn: Callable) -> Optional[float]:
        if self.status != "ok" or not values:
            return None
        return float(fn(np.asarray(values, dtype=float)))

    @property
    def mean_size(self) -> Optional[float]:
        return self._stat(self.sizes, np.mean)

    @property
    def mean_depth(self) -> Optional[float]:
        return self._stat(self.depths, np.mean)

    @property
    def std_size(self) -> Optional[float]:
        return self._stat(self.sizes, np.std)

    @property
    def std_depth(self) -> Optional[float]:
        return self._stat(self.depths, np.std)

    @property
    def verified_label(self) -> str:
        if self.status == "infeasible":
            return "infeasible"
        if self.verified is None:
            return "skipped"
        return "true" if self.verified else "false"

    def reference_ratios(self) -> Dict[str, float]:
        """Measured over published mean, for each metric both sides have"""
        reference = Settings.get_reference_point(self.k, self.n, self.ancillas) or {}
        measured = {'mean_size': self.mean_size, 'mean_depth': self.mean_depth}
        return {
            metric: measured[metric] / published
            for metric, published in reference.items()
            if metric in measured and measured[metric] is not None
        }

    def csv_values(self) -> List[Any]:
        def fmt(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.3f}"

        return [
            self.k, self.n, self.m, self.ancillas, self.mode,
            fmt(self.mean_size), fmt(self.mean_depth), fmt(self.std_size), fmt(self.std_depth),
            self.verified_label,
        ]

    def to_dict(self) -> Dict[str, Any]:
        ok = self.status == "ok" and self.sizes
        data = dict(zip(Settings.CSV_COLUMNS, [
            self.k, self.n, self.m, self.ancillas, self.mode,
            self.mean_size, self.mean_depth, self.std_size, self.std_depth, self.verified_label,
        ]))
        data.update({
            'status': self.status,
            'min_size': min(self.sizes) if ok else None,
            'max_size': max(self.sizes) if ok else None,
            'min_depth': min(self.depths) if ok else None,
            'max_depth': max(self.depths) if ok else None,
        })
        if self.minimal_ancillas is not None:
            data['minimal_ancillas'] = self.minimal_ancillas
        if self.diagnostics:
            data['diagnostics'] = self.diagnostics
        reference = Settings.get_reference_point(self.k, self.n, self.ancillas)
        if reference:
            data['reference'] = reference
            data['reference_ratio'] = self.reference_ratios()
        return data


@dataclass
class SweepTable:
    """Rows of a sweep in (n, ancillas) order, with the spec that produced them"""

    spec: SweepSpec
    rows: List[SweepRow] = field(default_factory=list)

    def header(self) -> str:
        return f"# seed={self.spec.seed} config_hash={self.spec.config_hash}"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(self.header() + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(Settings.CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_values())
        return buffer.getvalue()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.spec.seed,
            'config_hash': self.spec.config_hash,
            'spec': self.spec.describe(),
            'rows': [row.to_dict() for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_xlsx(self, path: Union[str, Path]) -> Path:
        """Write the table to an Excel workbook with a metadata sheet"""
        from openpyxl import Workbook
        from openpyxl.styles import Font

        workbook = Workbook()
        sheet = workbook.active
        sheet.title = "sweep"
        sheet.append(Settings.CSV_COLUMNS)
        for cell in sheet[1]:
            cell.font = Font(bold=True)
        for row in self.rows:
            data = row.to_dict()
            sheet.append([data[column] for column in Settings.CSV_COLUMNS])
        meta = workbook.create_sheet("meta")
        meta.append(['seed', self.spec.seed])
        meta.append(['config_hash', self.spec.config_hash])
        for key, value in self.spec.describe().items():
            meta.append([key, json.dumps(value) if isinstance(value, (list, dict)) else value])
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        workbook.save(target)
        return target

    def series(self, n: int, metric: str = "mean_size") -> Tuple[List[int], List[float]]:
        """(ancillas, metric) pairs of the feasible rows for one n"""
        points = [(row.ancillas, getattr(row, metric)) for row in self.rows
                  if row.n == n and row.status == "ok"]
        return [a for a, _ in points], [v for _, v in points]


def ensemble(spec: SweepSpec, n: int) -> List[CnfFormula]:
    """The seeded formulas shared by every ancilla budget at this n"""
    m = spec.clauses_for(n)
    return [random_kcnf(n, m, spec.k, derive_seed(spec.seed, spec.k, n, m, i))
            for i in range(spec.ensemble_size)]


def _member_cost(spec: SweepSpec, formula: CnfFormula, ancillas: int, index: int) -> Dict[str, Any]:
    config = spec.synthesis_config(ancillas)
    circuit = synthesize(formula, config)
    result: Dict[str, Any] = {'verified': None}
    if spec.verify:
        report = verify_oracle(
            circuit, formula, default_mode(formula.num_vars), CleanZero(),
            seed=derive_seed(spec.seed, index, ancillas), threads=1,
            formula_id=f"n{formula.num_vars}-i{index}-a{ancillas}", max_examples=3,
        )
        result['verified'] = report.passed
        if not report.passed:
            result['report'] = report.to_dict()
            return result
    report = measure(circuit, config.lowering)
    result['size'] = report.size
    result['depth'] = report.depth
    return result


def _infeasibility(spec: SweepSpec, ancillas: int) -> Optional[int]:
    """Minimal feasible budget if `ancillas` cannot be used, else None"""
    if ancillas < Settings.MIN_ANCILLAS:
        return Settings.MIN_ANCILLAS
    if spec.mode == "depth" and not partition_registers(ancillas, spec.k).feasible:
        return minimal_feasible_ancillas(spec.k)
    return None


def run_row(spec: SweepSpec, formulas: Sequence[CnfFormula], n: int, ancillas: int,
            threads: Optional[int] = None) -> SweepRow:
    """Synthesize, verify and cost every ensemble member at one ancilla budget"""
    row = SweepRow(spec.k, n, spec.clauses_for(n), ancillas, spec.mode)
    minimal = _infeasibility(spec, ancillas)
    if minimal is not None:
        row.status = "infeasible"
        row.minimal_ancillas = minimal
        logger.warning(f"n={n} ancillas={ancillas}: infeasible, requires ancillas >= {minimal}")
        return row

    results: Dict[int, Dict[str, Any]] = {}
    workers = max(1, threads or Settings.MAX_THREADS)
    chunk_size = Settings.CHUNK_SIZE * workers
    try:
        for start in range(0, len(formulas), chunk_size):
            chunk = range(start, min(start + chunk_size, len(formulas)))
            with ThreadPoolExecutor(max_workers=workers) as executor:
                future_to_index = {
                    executor.submit(_member_cost, spec, formulas[i], ancillas, i): i
                    for i in chunk
                }
                for future in as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()
    except InfeasibleConfigError as e:
        row.status = "infeasible"
        row.minimal_ancillas = e.minimal_ancillas
        logger.warning(f"n={n} ancillas={ancillas}: {e}")
        return row

    failed = [i for i in sorted(results) if results[i]['verified'] is False]
    if failed:
        row.status = "failed"
        row.verified = False
        row.diagnostics = {'failed_members': failed, 'first_report': results[failed[0]]['report']}
        logger.error(f"n={n} ancillas={ancillas}: {len(failed)} ensemble members failed verification")
        return row

    for i in sorted(results):
        row.sizes.append(results[i]['size'])
        row.depths.append(results[i]['depth'])
    row.verified = True if spec.verify else None
    logger.info(f"n={n} ancillas={ancillas}: mean size {row.mean_size:.1f}, mean depth {row.mean_depth:.1f}")
    return row


def run_sweep(spec: SweepSpec, threads: Optional[int] = None,
              progress_callback: Optional[Callable[[float, str], None]] = None) -> SweepTable:
    """One row per (n, ancillas), ordered by n then ancillas"""
    table = SweepTable(spec)
    points = [(n, a) for n in spec.n_values for a in spec.ladder_for(n)]
    formulas: Dict[int, List[CnfFormula]] = {}
    for done, (n, ancillas) in enumerate(points, start=1):
        if n not in formulas:
            formulas[n] = ensemble(spec, n)
        table.rows.append(run_row(spec, formulas[n], n, ancillas, threads))
        if progress_callback:
            progress_callback(done / len(points) * 100, f"n={n} ancillas={ancillas}")
    return table
