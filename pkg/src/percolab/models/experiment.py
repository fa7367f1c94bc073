# src/percolab/models/experiment.py
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

CONTINUUM_EXPERIMENTS = ('l1-poisson', 'l1-binomial', 'p-infinity', 'xi-boundary',
                         'xi-symmetry', 'gap-l1-c1', 'tail')
LATTICE_EXPERIMENTS = ('lattice-h', 'lattice-count', 'theta', 'kappa')
DERIVED_EXPERIMENTS = ('fit', 'clt')
EXPERIMENTS = CONTINUUM_EXPERIMENTS + LATTICE_EXPERIMENTS + DERIVED_EXPERIMENTS

# sampling experiments whose means follow a polynomial expansion in the side
EXPANSION_TARGETS = {
    'l1-poisson': 'minus',
    'l1-binomial': 'minus',
    'lattice-h': 'minus',
    'lattice-count': 'plus',
}
DECOMPOSITION_EXPERIMENTS = ('xi-boundary', 'xi-symmetry', 'gap-l1-c1', 'tail')
DEFAULT_TAIL_THRESHOLDS = (2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dim: int
    param: Optional[float] = None
    sides: Tuple[float, ...] = ()
    replicas: int = 0
    master_seed: int = 0
    workers: int = 1
    embed_factor: float = 2.0
    output_dir: str = 'runs'
    target: Optional[str] = None
    summary_path: Optional[str] = None
    degree: Optional[int] = None
    sign: Optional[str] = None
    exponent: Optional[float] = None
    thresholds: Tuple[float, ...] = DEFAULT_TAIL_THRESHOLDS
    tail_target: str = 'defect'

    @property
    def sampling_experiment(self) -> str:
        """The experiment whose replicas are drawn"""
        if self.experiment in DERIVED_EXPERIMENTS:
            return self.target or 'l1-poisson'
        return self.experiment

    @property
    def is_lattice(self) -> bool:
        return self.sampling_experiment in LATTICE_EXPERIMENTS

    @property
    def fit_degree(self) -> int:
        return self.degree if self.degree is not None else self.dim

    @property
    def fit_sign(self) -> str:
        return self.sign or EXPANSION_TARGETS.get(self.sampling_experiment, 'minus')

    @property
    def clt_exponent(self) -> float:
        return self.exponent if self.exponent is not None else self.dim / 2.0

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['sides'] = list(self.sides)
        data['thresholds'] = list(self.thresholds)
        return data


@dataclass
class RunManifest:
    config: Dict
    toolkit_version: str
    started_at: str
    wall_clock_seconds: float = 0.0
    outputs: Dict[str, str] = field(default_factory=dict)
    samples_digest: Optional[str] = None

    def to_dict(self) -> Dict:
        return asdict(self)
