"""
Metrics
Average throughput, Jain fairness, outage and convergence statistics
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import EmptyInputError
from app.models.episode import EpisodeLog, MetricsReport
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)


def jain_index(rates: Sequence[float]) -> float:
    """(sum x)^2 / (n * sum x^2); an all-zero list counts as perfectly fair"""
    if len(rates) == 0:
        logger.error("Jain index requested for an empty rate list")
        raise EmptyInputError("jain_index needs at least one rate")
    values = np.asarray(rates, dtype=float)
    squares = float((values ** 2).sum())
    if squares == 0.0:
        logger.warning("All rates are zero; Jain index defined as 1")
        return 1.0
    return float(values.sum() ** 2 / (len(values) * squares))


def outage(rate_lists: Sequence[Sequence[float]]) -> float:
    """Fraction of (drop, user) samples with zero throughput"""
    samples = [rate for rates in rate_lists for rate in rates]
    if not samples:
        return 0.0
    return sum(1 for rate in samples if rate <= 0.0) / len(samples)


def convergence_stats(counts: Sequence[int]) -> Tuple[float, float, List[Tuple[int, float]]]:
    """
    Mean, population standard deviation and empirical CDF of the
    repositions-to-converge counts

    Returns:
        (mean, stddev, [(k, P(X <= k)) for k = 0 .. max])
    """
    if len(counts) == 0:
        return 0.0, 0.0, []
    values = np.asarray(counts, dtype=int)
    support = np.arange(int(values.max()) + 1)
    cdf = [(int(k), float(np.mean(values <= k))) for k in support]
    return float(values.mean()), float(values.std()), cdf


def build_report(algorithm: str, logs: Sequence[EpisodeLog],
                 floor: Optional[float] = None) -> MetricsReport:
    """
    Summarize the final delivered rates of every drop of one algorithm

    A delivered rate is the end-to-end rate capped at the user's demand, so
    avg_throughput never credits throughput beyond what was asked for.
    """
    floor = SimConfig.THROUGHPUT_FLOOR_MBPS if floor is None else floor
    rate_lists = [list(log.delivered_rates().values()) for log in logs]
    samples = [rate for rates in rate_lists for rate in rates]
    if not samples:
        logger.error(f"No rate samples for {algorithm}")
        raise EmptyInputError(f"no rate samples for {algorithm}")

    mean_moves, std_moves, _ = convergence_stats([log.repositions_to_converge() for log in logs])
    return MetricsReport(
        algorithm=algorithm,
        avg_throughput=float(np.mean(samples)),
        jain_index=jain_index(samples),
        outage_fraction=outage(rate_lists),
        mean_repositions=mean_moves,
        std_repositions=std_moves,
        min_throughput=float(np.min(samples)),
        below_floor_fraction=float(np.mean(np.asarray(samples) < floor)),
        rates=rate_lists,
    )
