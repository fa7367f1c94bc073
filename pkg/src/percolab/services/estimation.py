# src/percolab/services/estimation.py
import logging
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import scipy.stats
from statsmodels.api import WLS

from percolab.models.results import ExpansionFit, MonteCarloSummary, NormalityReport, TailFit

logger = logging.getLogger(__name__)

CI_LEVEL = 0.99
MIN_CLT_SAMPLES = 500
MIN_TAIL_R2 = 0.9

_SIGNS = {'minus': -1, 'plus': 1, -1: -1, 1: 1}


def summarize(samples: Iterable[float]) -> MonteCarloSummary:
    """
    Mean, unbiased variance, standard error and a 99% normal interval
    Args:
        samples: replica values
    Returns: MonteCarloSummary
    """
    values = np.asarray(list(samples), dtype=float)
    if values.size < 2:
        raise ValueError(f"need at least 2 samples to summarize, got {values.size}")
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    stderr = float(np.sqrt(variance / values.size))
    half = float(scipy.stats.norm.ppf(0.5 + CI_LEVEL / 2.0)) * stderr
    return MonteCarloSummary(count=int(values.size), mean=mean, variance=variance,
                             stderr=stderr, ci_low=mean - half, ci_high=mean + half)


def fit_expansion(points: Sequence[Tuple[float, float, float]], degree: int,
                  sign: Union[str, int] = 'minus') -> ExpansionFit:
    """
    Weighted least-squares fit of mean(s) = sum_k c_k s^k, k = degree..0
    Args:
        points: (side, mean, stderr) triples
        degree: polynomial degree, the dimension d of the expansion
        sign: 'minus' when the expansion subtracts the tau terms, 'plus' when it adds them
    Returns: ExpansionFit with raw-scale coefficients and covariance
    """
    if sign not in _SIGNS:
        raise ValueError(f"sign must be 'minus' or 'plus', got {sign!r}")
    if degree < 1:
        raise ValueError(f"degree must be at least 1, got {degree}")
    data = np.asarray(points, dtype=float).reshape(-1, 3)
    sides, means, stderrs = data[:, 0], data[:, 1], data[:, 2]

    if len(np.unique(sides)) < len(sides):
        raise ValueError("duplicate side values make the design matrix rank deficient")
    if len(sides) < degree + 2:
        raise ValueError(f"need at least {degree + 2} sides for degree {degree}, got {len(sides)}")
    if np.any(stderrs <= 0):
        raise ValueError("every standard error must be positive")

    # (s / s_max)^k keeps the Vandermonde matrix well conditioned
    degrees = tuple(range(degree, -1, -1))
    scale = float(np.max(np.abs(sides)))
    design = np.column_stack([(sides / scale) ** k for k in degrees])
    if np.linalg.matrix_rank(design) < len(degrees):
        raise ValueError("design matrix is rank deficient")

    result = WLS(means, design, weights=stderrs ** -2).fit()
    unscale = np.array([scale ** -k for k in degrees])
    coefficients = np.asarray(result.params) * unscale
    covariance = np.asarray(result.normalized_cov_params) * np.outer(unscale, unscale)
    covariance = (covariance + covariance.T) / 2.0

    fit = ExpansionFit(degrees=degrees, coefficients=coefficients, covariance=covariance,
                       rss=float(result.ssr), r_squared=float(result.rsquared),
                       sign=_SIGNS[sign], sides=tuple(float(s) for s in sides))
    logger.info(f"Expansion fit degree {degree}: leading {fit.leading:.6g} "
                f"+/- {fit.leading_stderr:.3g}, R^2 {fit.r_squared:.6f}")
    return fit


def clt_check(samples: Iterable[float], side: float, exponent: float) -> NormalityReport:
    """
    Standardise samples and compare them with the standard normal
    Args:
        samples: replica values at one side
        side: the side s they were drawn at
        exponent: scaling exponent, d/2 for the central limit theorems
    Returns: NormalityReport with sigma_hat = sd / side^exponent
    """
    values = np.asarray(list(samples), dtype=float)
    if values.size < MIN_CLT_SAMPLES:
        raise ValueError(f"need at least {MIN_CLT_SAMPLES} samples, got {values.size}")
    sd = float(values.std(ddof=1))
    if sd == 0.0:
        raise ValueError("samples have zero variance; normality is undefined")
    standardized = (values - values.mean()) / sd
    ks = scipy.stats.kstest(standardized, 'norm')
    return NormalityReport(count=int(values.size), side=float(side),
                           ks_distance=float(ks.statistic), ks_pvalue=float(ks.pvalue),
                           skewness=float(scipy.stats.skew(values)),
                           excess_kurtosis=float(scipy.stats.kurtosis(values)),
                           sigma_hat=sd / float(side) ** exponent)


def survival_pairs(values: Iterable[float], thresholds: Iterable[float]) -> List[Tuple[float, float]]:
    """Empirical P[X >= n] for each threshold n"""
    data = np.asarray(list(values), dtype=float)
    if data.size == 0:
        raise ValueError("no values to build a survival curve from")
    return [(float(n), float(np.mean(data >= n))) for n in thresholds]


def tail_decay_rate(pairs: Iterable[Tuple[float, float]], min_r2: float = MIN_TAIL_R2) -> TailFit:
    """
    Exponential decay rate of an empirical survival curve
    Args:
        pairs: (n, P[X >= n]) points
        min_r2: log-linear R^2 below which the fit is flagged poor
    Returns: TailFit with rate = -slope of log P against n
    """
    usable = tuple((float(n), float(p)) for n, p in pairs if p > 0)
    if len(usable) < 3:
        raise ValueError(f"need at least 3 points with positive probability, got {len(usable)}")
    ns = np.array([n for n, _ in usable])
    log_p = np.log([p for _, p in usable])
    fit = scipy.stats.linregress(ns, log_p)
    if np.ptp(log_p) == 0.0:
        r_squared = 0.0
    else:
        r_squared = float(fit.rvalue) ** 2
    rate = -float(fit.slope) + 0.0
    return TailFit(rate=rate, r_squared=r_squared, points=usable, poor_fit=r_squared < min_r2)
