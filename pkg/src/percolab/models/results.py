# src/percolab/models/results.py
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import norm


@dataclass(frozen=True)
class MonteCarloSummary:
    count: int
    mean: float
    variance: float
    stderr: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> Dict:
        return asdict(self)


def joint_z(a: MonteCarloSummary, b: MonteCarloSummary) -> float:
    """Difference of two independent means in joint standard errors"""
    spread = float(np.hypot(a.stderr, b.stderr))
    if spread == 0.0:
        return 0.0 if a.mean == b.mean else float('inf')
    return (a.mean - b.mean) / spread


@dataclass(frozen=True, eq=False)
class ExpansionFit:
    """
    Weighted polynomial fit of mean(side) on side^degree ... side^0.
    tau[i-1] = sign * coefficient of side^(degree-i); sign is -1 for the
    largest-component expansions and +1 for the cluster-count expansion.
    """
    degrees: Tuple[int, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    rss: float
    r_squared: float
    sign: int
    sides: Tuple[float, ...] = ()

    @property
    def degree(self) -> int:
        return self.degrees[0]

    @property
    def leading(self) -> float:
        return float(self.coefficients[0])

    @property
    def leading_stderr(self) -> float:
        return float(np.sqrt(max(self.covariance[0, 0], 0.0)))

    @property
    def tau(self) -> np.ndarray:
        return self.sign * self.coefficients[1:]

    @property
    def tau_stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance)[1:], 0.0, None))

    def tau_interval(self, i: int, level: float = 0.99) -> Tuple[float, float]:
        """Normal interval for tau_i, i = 1..degree"""
        if not 1 <= i <= self.degree:
            raise ValueError(f"tau index {i} outside 1..{self.degree}")
        z = norm.ppf(0.5 + level / 2.0)
        centre = float(self.tau[i - 1])
        half = z * float(self.tau_stderr[i - 1])
        return centre - half, centre + half

    def predict(self, side: float) -> Tuple[float, float]:
        """Fitted mean at `side` with its delta-method standard error"""
        basis = np.array([float(side) ** k for k in self.degrees])
        value = float(basis @ self.coefficients)
        variance = float(basis @ self.covariance @ basis)
        return value, float(np.sqrt(max(variance, 0.0)))

    def to_dict(self) -> Dict:
        return {
            'degrees': list(self.degrees),
            'coefficients': [float(c) for c in self.coefficients],
            'covariance': [[float(v) for v in row] for row in self.covariance],
            'rss': float(self.rss),
            'r_squared': float(self.r_squared),
            'sign': int(self.sign),
            'sides': [float(s) for s in self.sides],
            'leading': self.leading,
            'leading_stderr': self.leading_stderr,
            'tau': [float(t) for t in self.tau],
            'tau_stderr': [float(t) for t in self.tau_stderr],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExpansionFit':
        return cls(degrees=tuple(int(k) for k in data['degrees']),
                   coefficients=np.asarray(data['coefficients'], dtype=float),
                   covariance=np.asarray(data['covariance'], dtype=float),
                   rss=float(data['rss']),
                   r_squared=float(data['r_squared']),
                   sign=int(data['sign']),
                   sides=tuple(data.get('sides', ())))


@dataclass(frozen=True)
class NormalityReport:
    count: int
    side: float
    ks_distance: float
    ks_pvalue: float
    skewness: float
    excess_kurtosis: float
    sigma_hat: float

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class TailFit:
    rate: float
    r_squared: float
    points: Tuple[Tuple[float, float], ...]
    poor_fit: bool

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['points'] = [list(p) for p in self.points]
        return data


@dataclass(frozen=True)
class SymmetryReport:
    """E[xi(B(s))] against 2^d * sum_i E[xi(R_i)]"""
    total: MonteCarloSummary
    corner_regions: MonteCarloSummary
    z_score: float
    additivity_failures: int

    def to_dict(self) -> Dict:
        return {'total': self.total.to_dict(),
                'corner_regions': self.corner_regions.to_dict(),
                'z_score': self.z_score,
                'additivity_failures': self.additivity_failures}


@dataclass(frozen=True)
class GapReport:
    """Paired L1 of the inner graph against |C1| of the restricted giant"""
    l1: MonteCarloSummary
    c1: MonteCarloSummary
    gap: MonteCarloSummary

    def to_dict(self) -> Dict:
        return {'l1': self.l1.to_dict(), 'c1': self.c1.to_dict(), 'gap': self.gap.to_dict()}


@dataclass(frozen=True)
class DePoissonizationReport:
    binomial: MonteCarloSummary
    poisson: MonteCarloSummary
    points: int
    z_score: float
    sd_ratio: float

    def to_dict(self) -> Dict:
        return {'binomial': self.binomial.to_dict(), 'poisson': self.poisson.to_dict(),
                'points': self.points, 'z_score': self.z_score, 'sd_ratio': self.sd_ratio}


def summaries_to_dict(summaries: Dict[float, Optional[MonteCarloSummary]]) -> List[Dict]:
    rows = []
    for side in sorted(summaries):
        summary = summaries[side]
        rows.append({'side': side, **(summary.to_dict() if summary else {})})
    return rows
