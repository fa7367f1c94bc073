# src/percolab/services/runner.py
import csv
import hashlib
import json
import logging
import math
import numbers
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from percolab.config.config import Config, get_config
from percolab.models.experiment import EXPANSION_TARGETS, ExperimentConfig, RunManifest
from percolab.models.geometry import EmbeddingPlan, RegionSpec
from percolab.models.results import ExpansionFit, summaries_to_dict
from percolab.services.continuum_stats import (decompose_boundary, gap_report,
                                               p_infinity_summary, sample_defect_diameter,
                                               sample_gap, sample_giant_fraction, sample_L1,
                                               sample_L1_binomial, sample_vx_extent,
                                               symmetry_report, xi, xi_symmetry_values)
from percolab.services.estimation import (clt_check, fit_expansion, summarize, survival_pairs,
                                          tail_decay_rate)
from percolab.services.lattice_percolation import (sample_cluster_density, sample_lattice_count,
                                                   sample_lattice_largest, sample_theta_indicator)
from percolab.services.point_process import derive_substream
from percolab.utils.errors import ConfigError, ReplicaInvariantError

logger = logging.getLogger(__name__)

SAMPLES_HEADER = ('experiment', 'dim', 'param', 'side', 'replica', 'value')

# (value, extras) for one replica
ReplicaDraw = Tuple[float, Dict[str, float]]


def replica_draw(experiment: str, dim: int, param: float, side, embed_factor: float,
                 master_seed: int, replica: int, tail_target: str = 'defect') -> ReplicaDraw:
    """
    Draw one replica on its own substream. Module level so worker processes can
    unpickle it; the result depends only on the arguments.
    """
    rng = derive_substream(master_seed, f"{experiment}:{side!r}", replica)
    if experiment == 'l1-poisson':
        return sample_L1(param, side, dim, rng), {}
    if experiment == 'l1-binomial':
        n = int(math.ceil(param * side ** dim))
        return sample_L1_binomial(n, param, dim, rng), {'points': n}
    if experiment == 'p-infinity':
        ratio, share = sample_giant_fraction(param, EmbeddingPlan.for_side(side, embed_factor),
                                             rng, dim)
        return ratio, {'giant_share': share}
    if experiment == 'xi-boundary':
        decomp = decompose_boundary(param, side, EmbeddingPlan.for_side(side, embed_factor),
                                    rng, dim)
        return xi(decomp, RegionSpec.full(dim, side)), {'components': decomp.component_count}
    if experiment == 'xi-symmetry':
        decomp = decompose_boundary(param, side, EmbeddingPlan.for_side(side, embed_factor),
                                    rng, dim)
        total, symmetric, additive = xi_symmetry_values(decomp)
        return total, {'corner_regions': symmetric, 'additive': int(additive)}
    if experiment == 'gap-l1-c1':
        l1, c1 = sample_gap(param, side, EmbeddingPlan.for_side(side, embed_factor), rng, dim)
        return l1 - c1, {'l1': l1, 'c1': c1}
    if experiment == 'tail' and tail_target == 'vx':
        return sample_vx_extent(param, side, dim, rng), {}
    if experiment == 'tail':
        return sample_defect_diameter(param, side, EmbeddingPlan.for_side(side, embed_factor),
                                      rng, dim), {}
    if experiment == 'lattice-h':
        return sample_lattice_largest(rng, dim, int(side), param), {}
    if experiment == 'lattice-count':
        return sample_lattice_count(rng, dim, int(side), param), {}
    if experiment == 'theta':
        return sample_theta_indicator(rng, dim, int(side), param, embed_factor), {}
    if experiment == 'kappa':
        return sample_cluster_density(rng, dim, int(side), param), {}
    raise ConfigError(f"Unknown experiment '{experiment}'", key='experiment')


def format_number(value) -> str:
    """Shortest round-trip text for floats, plain digits for integers"""
    if isinstance(value, numbers.Integral):
        return str(int(value))
    return repr(float(value))


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for block in iter(lambda: handle.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def write_json(path: Path, payload) -> None:
    with open(path, 'w', newline='\n') as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write('\n')


def fit_summary_file(summary_path, degree: int, sign: str) -> ExpansionFit:
    """Fit an expansion to the per-side rows of a summary.json"""
    path = Path(summary_path)
    if not path.is_file():
        raise ConfigError(f"Summary file not found: {path}", key='summary_path')
    with open(path) as handle:
        data = json.load(handle)
    rows = [row for row in data.get('sides', []) if 'stderr' in row]
    if not rows:
        raise ConfigError(f"Summary file {path} has no per-side statistics", key='summary_path')
    return fit_expansion([(row['side'], row['mean'], row['stderr']) for row in rows],
                         degree, sign)


def read_samples(samples_path, side: Optional[float] = None) -> Dict[float, List[float]]:
    """Values of a samples.csv grouped by side"""
    path = Path(samples_path)
    if not path.is_file():
        raise ConfigError(f"Samples file not found: {path}", key='samples')
    grouped = {}
    with open(path, newline='') as handle:
        for row in csv.DictReader(handle):
            row_side = float(row['side'])
            if side is not None and not math.isclose(row_side, side):
                continue
            grouped.setdefault(row_side, []).append(float(row['value']))
    return grouped


class ExperimentService:
    """Service for running replica experiments and writing their results"""

    def __init__(self, app_config: Optional[Config] = None):
        """Initialize experiment service"""
        self.app_config = app_config or get_config()

    def draw_side(self, config: ExperimentConfig, side) -> List[ReplicaDraw]:
        """
        All replicas at one side, in replica order
        Args:
            config: validated experiment configuration
            side: box side s (or lattice side n)
        Returns: list of (value, extras) indexed by replica
        """
        task = partial(replica_draw, config.sampling_experiment, config.dim, config.param, side,
                       config.embed_factor, config.master_seed, tail_target=config.tail_target)
        replicas = range(config.replicas)
        if config.workers <= 1 or config.replicas == 1:
            return [task(r) for r in replicas]
        chunksize = max(1, config.replicas // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(task, replicas, chunksize=chunksize))

    def run(self, config: ExperimentConfig) -> RunManifest:
        """
        Execute every replica of an experiment and write the output files
        Args:
            config: validated experiment configuration
        Returns: RunManifest describing the run
        """
        started = time.perf_counter()
        manifest = RunManifest(config=config.to_dict(),
                               toolkit_version=self.app_config.TOOLKIT_VERSION,
                               started_at=datetime.now(timezone.utc).isoformat())
        output_dir = Path(config.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        if config.experiment == 'fit' and config.summary_path:
            fit = fit_summary_file(config.summary_path, config.fit_degree, config.fit_sign)
            self._write(manifest, output_dir, 'fit.json', fit.to_dict())
            return self._finish(manifest, output_dir, started)

        logger.info(f"Running {config.experiment} ({config.sampling_experiment}) d={config.dim} "
                    f"param={config.param} sides={list(config.sides)} "
                    f"replicas={config.replicas} workers={config.workers}")
        draws = {}
        for side in config.sides:
            try:
                draws[side] = self.draw_side(config, side)
            except ReplicaInvariantError as e:
                logger.error(f"Invariant violated at side {side}: {str(e)}")
                raise
            logger.info(f"Finished side {side}: {config.replicas} replicas")

        samples_path = output_dir / 'samples.csv'
        self._write_samples(samples_path, config, draws)
        manifest.outputs['samples'] = samples_path.name
        manifest.samples_digest = file_digest(samples_path)

        values = {side: [v for v, _ in rows] for side, rows in draws.items()}
        summaries = {side: summarize(vals) if len(vals) >= 2 else None
                     for side, vals in values.items()}
        if config.sampling_experiment == 'p-infinity' and config.replicas >= 2:
            summaries = {side: p_infinity_summary(config.param, values[side],
                                                  [e['giant_share'] for _, e in draws[side]],
                                                  self.app_config.SUBCRITICAL_FRACTION)
                         for side in config.sides}
        summary = {'experiment': config.experiment, 'target': config.sampling_experiment,
                   'dim': config.dim, 'param': config.param,
                   'sides': summaries_to_dict(summaries)}
        self._write(manifest, output_dir, 'summary.json', summary)

        fit = self._expansion_fit(config, summaries)
        if fit is not None:
            self._write(manifest, output_dir, 'fit.json', fit.to_dict())
        clt = self._clt_reports(config, values)
        if clt:
            self._write(manifest, output_dir, 'clt.json', clt)
        if config.sampling_experiment == 'tail':
            self._write(manifest, output_dir, 'tail.json', self._tail_report(config, values))
        report = self._side_reports(config, draws)
        if report:
            self._write(manifest, output_dir, 'report.json', report)
        return self._finish(manifest, output_dir, started)

    def _expansion_fit(self, config: ExperimentConfig, summaries: Dict) -> Optional[ExpansionFit]:
        if config.sampling_experiment not in EXPANSION_TARGETS:
            return None
        points = [(float(side), s.mean, s.stderr) for side, s in summaries.items()
                  if s is not None and s.stderr > 0]
        explicit = config.experiment == 'fit'
        if len(points) < config.fit_degree + 2:
            if explicit:
                raise ConfigError(f"need {config.fit_degree + 2} sides with positive standard "
                                  f"error to fit, got {len(points)}", key='sides')
            return None
        try:
            return fit_expansion(points, config.fit_degree, config.fit_sign)
        except ValueError as e:
            if explicit:
                raise ConfigError(f"Error fitting expansion: {str(e)}", key='sides')
            logger.warning(f"Skipping expansion fit: {str(e)}")
            return None

    def _clt_reports(self, config: ExperimentConfig, values: Dict) -> List[Dict]:
        if config.experiment != 'clt' and config.sampling_experiment not in EXPANSION_TARGETS:
            return []
        reports = []
        for side, vals in values.items():
            try:
                report = clt_check(vals, float(side), config.clt_exponent)
            except ValueError as e:
                if config.experiment == 'clt':
                    logger.warning(f"CLT check skipped at side {side}: {str(e)}")
                continue
            entry = report.to_dict()
            entry['passes'] = report.ks_distance < self.app_config.KS_THRESHOLD
            reports.append(entry)
        return reports

    def _tail_report(self, config: ExperimentConfig, values: Dict) -> List[Dict]:
        reports = []
        for side, vals in values.items():
            pairs = survival_pairs(vals, config.thresholds)
            entry = {'side': side, 'survival': [list(p) for p in pairs]}
            try:
                entry['fit'] = tail_decay_rate(pairs, self.app_config.TAIL_MIN_R2).to_dict()
            except ValueError as e:
                entry['error'] = str(e)
                logger.warning(f"Tail fit skipped at side {side}: {str(e)}")
            reports.append(entry)
        return reports

    def _side_reports(self, config: ExperimentConfig, draws: Dict) -> List[Dict]:
        if config.replicas < 2:
            return []
        reports = []
        for side, rows in draws.items():
            if config.sampling_experiment == 'xi-symmetry':
                report = symmetry_report([v for v, _ in rows],
                                         [e['corner_regions'] for _, e in rows],
                                         sum(1 for _, e in rows if not e['additive']))
            elif config.sampling_experiment == 'gap-l1-c1':
                report = gap_report([(e['l1'], e['c1']) for _, e in rows])
            else:
                return []
            reports.append({'side': side, **report.to_dict()})
        return reports

    def _write_samples(self, path: Path, config: ExperimentConfig, draws: Dict) -> None:
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(SAMPLES_HEADER)
            for side in config.sides:
                for replica, (value, _) in enumerate(draws[side]):
                    writer.writerow([config.experiment, config.dim, format_number(config.param),
                                     format_number(side), replica, format_number(value)])

    def _write(self, manifest: RunManifest, output_dir: Path, name: str, payload) -> None:
        write_json(output_dir / name, payload)
        manifest.outputs[Path(name).stem] = name

    def _finish(self, manifest: RunManifest, output_dir: Path, started: float) -> RunManifest:
        manifest.wall_clock_seconds = time.perf_counter() - started
        manifest.outputs['manifest'] = 'manifest.json'
        write_json(output_dir / 'manifest.json', manifest.to_dict())
        logger.info(f"Run complete in {manifest.wall_clock_seconds:.2f}s; "
                    f"outputs in {output_dir}")
        return manifest


def run_experiment(config: ExperimentConfig, app_config: Optional[Config] = None) -> RunManifest:
    return ExperimentService(app_config).run(config)
