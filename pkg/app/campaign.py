"""
Campaign Runner
Monte Carlo drops over one scenario for a list of algorithms, merged in drop
order and written as CSV
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.deployment_service import DeploymentService
from app.knowledge_base import KnowledgeBase
from app.metrics import build_report
from app.models.episode import EpisodeLog, MetricsReport
from app.models.scenario import Scenario
from app.scenario_loader import resample_users
from app.storage import ResultStore
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)


@dataclass
class CampaignResult:
    reports: Dict[str, MetricsReport]
    logs: Dict[str, List[EpisodeLog]]
    paths: List[Path] = field(default_factory=list)


def drop_seeds(seed: int, drops: int) -> List[np.random.SeedSequence]:
    """Independent per-drop seed sequences derived from the master seed"""
    return np.random.SeedSequence(seed).spawn(drops)


def prepare_drop(scenario: Scenario, seed_sequence: np.random.SeedSequence) -> Tuple[Scenario, np.random.Generator]:
    """Resample the users of one drop; the returned generator drives its random placements"""
    rng = np.random.default_rng(seed_sequence)
    return resample_users(scenario, rng), rng


def _run_drop(task) -> Dict[str, EpisodeLog]:
    scenario, algorithms, drop, seed_sequence = task
    service = DeploymentService()
    drop_scenario, rng = prepare_drop(scenario, seed_sequence)
    logs = {}
    for algorithm in algorithms:
        logs[algorithm] = service.run_episode(drop_scenario, algorithm, drop, rng)
    return logs


def _run_carried(scenario: Scenario, seeds: Sequence[np.random.SeedSequence]) -> List[EpisodeLog]:
    """ai-cbr over every drop in order, each drop starting from the knowledge the earlier ones left"""
    service = DeploymentService()
    knowledge: Dict[str, KnowledgeBase] = {}
    logs = []
    for drop, seed_sequence in enumerate(seeds):
        drop_scenario, rng = prepare_drop(scenario, seed_sequence)
        logs.append(service.run_episode(drop_scenario, 'ai-cbr', drop, rng, knowledge=knowledge))
    logger.info(f"Carried knowledge: {sum(len(kb) for kb in knowledge.values())} case(s) after {len(logs)} drop(s)")
    return logs


def run_campaign(scenario: Scenario, algorithms: Sequence[str], drops: Optional[int] = None,
                 seed: Optional[int] = None, workers: Optional[int] = None,
                 out_dir: Optional[str] = None, save_kb: bool = False,
                 carry_knowledge: Optional[bool] = None) -> CampaignResult:
    """
    Run every drop for every algorithm and summarize

    Args:
        scenario: validated scenario; budgets and horizon are taken from it
        algorithms: algorithm names, in output order
        drops: drop count, defaults to the scenario's
        seed: master seed, defaults to the scenario's
        workers: process count; 1 runs in-process
        out_dir: directory for CSV outputs, skipped when None
        save_kb: also write the ai-cbr knowledge base(s): drop 0's, or the
            accumulated ones when knowledge is carried
        carry_knowledge: hand each drop's ai-cbr knowledge bases to the next
            drop, defaults to the scenario's setting

    Returns:
        CampaignResult
    """
    drops = scenario.drops if drops is None else drops
    seed = scenario.seed if seed is None else seed
    workers = SimConfig.CAMPAIGN_WORKERS if workers is None else workers
    carry = scenario.carry_knowledge if carry_knowledge is None else carry_knowledge
    carry = carry and 'ai-cbr' in algorithms
    seeds = drop_seeds(seed, drops)
    pooled = tuple(a for a in algorithms if not (carry and a == 'ai-cbr'))
    tasks = [(scenario, pooled, drop, child) for drop, child in enumerate(seeds)]

    logger.info(f"Campaign {scenario.name}: {drops} drop(s), algorithms {', '.join(algorithms)}, "
                f"seed {seed}, {workers} worker(s){', knowledge carried' if carry else ''}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_drop = list(pool.map(_run_drop, tasks))
    else:
        per_drop = [_run_drop(task) for task in tasks]

    logs = {algorithm: [results[algorithm] for results in per_drop] for algorithm in pooled}
    if carry:
        logs['ai-cbr'] = _run_carried(scenario, seeds)
    logs = {algorithm: logs[algorithm] for algorithm in algorithms}
    reports = {algorithm: build_report(algorithm, logs[algorithm]) for algorithm in algorithms}
    for report in reports.values():
        logger.info(f"{report.algorithm}: avg {report.avg_throughput:.1f} Mbps, jain {report.jain_index:.3f}, "
                    f"outage {report.outage_fraction:.3f}, repositions {report.mean_repositions:.2f}")

    result = CampaignResult(reports, logs)
    if out_dir is not None:
        store = ResultStore(out_dir)
        result.paths.append(store.write_summary(reports[a] for a in algorithms))
        result.paths.append(store.write_drops(logs))
        result.paths.append(store.write_convergence(logs))
        if save_kb and 'ai-cbr' in logs and logs['ai-cbr']:
            source = logs['ai-cbr'][-1 if carry else 0]
            result.paths.extend(store.write_knowledge_bases(source.knowledge_bases))
    return result
