"""
Result Storage Layer
Writes campaign CSVs, knowledge-base files and per-request field dumps
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import pandas as pd

from app.knowledge_base import KnowledgeBase
from app.metrics import convergence_stats
from app.models.episode import EpisodeLog, MetricsReport
from app.models.learning import LearnedThroughputMap
from app.models.placement import FitnessField

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.6f'

SUMMARY_COLUMNS = ['algo', 'avg_throughput', 'jain', 'outage', 'mean_repositions',
                   'std_repositions', 'min_throughput', 'below_floor']
DROP_COLUMNS = ['algo', 'drop', 'user', 'rate', 'e2e_rate', 'satisfied']
CDF_COLUMNS = ['algo', 'repositions', 'cdf']


class ResultStore:
    """File outputs of one campaign, all under a single directory"""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _write(self, frame: pd.DataFrame, name: str) -> Path:
        path = self.out_dir / name
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_summary(self, reports: Iterable[MetricsReport]) -> Path:
        rows = [report.to_dict() for report in reports]
        return self._write(pd.DataFrame(rows, columns=SUMMARY_COLUMNS), 'summary.csv')

    def write_drops(self, logs_by_algorithm: Dict[str, Sequence[EpisodeLog]]) -> Path:
        """
        One row per (algorithm, drop, user) with the final rates

        `rate` is the delivered rate, capped at the user's demand like every
        campaign metric; `e2e_rate` is the uncapped end-to-end rate.
        """
        rows: List[Dict] = []
        for algorithm, logs in logs_by_algorithm.items():
            for log in logs:
                for user_id, user in sorted(log.final_snapshot.users.items()):
                    rows.append({
                        'algo': algorithm,
                        'drop': log.drop,
                        'user': user_id,
                        'rate': user.delivered,
                        'e2e_rate': user.e2e_rate,
                        'satisfied': int(user.e2e_rate >= user.demand),
                    })
        return self._write(pd.DataFrame(rows, columns=DROP_COLUMNS), 'drops.csv')

    def write_convergence(self, logs_by_algorithm: Dict[str, Sequence[EpisodeLog]]) -> Path:
        rows = []
        for algorithm, logs in logs_by_algorithm.items():
            _, _, cdf = convergence_stats([log.repositions_to_converge() for log in logs])
            rows.extend({'algo': algorithm, 'repositions': k, 'cdf': p} for k, p in cdf)
        return self._write(pd.DataFrame(rows, columns=CDF_COLUMNS), 'convergence_cdf.csv')

    def write_knowledge_bases(self, knowledge_bases: Dict[str, KnowledgeBase]) -> List[Path]:
        """`kb.txt` for a single extender, `kb_<id>.txt` per extender otherwise"""
        paths = []
        for node_id, kb in sorted(knowledge_bases.items()):
            name = 'kb.txt' if len(knowledge_bases) == 1 else f"kb_{node_id}.txt"
            path = self.out_dir / name
            kb.save(path)
            paths.append(path)
        return paths

    def write_fitness_field(self, field: FitnessField, request_index: int, node_id: str) -> Path:
        frame = pd.DataFrame(field.to_rows(), columns=['x', 'y', 'F_R', 'F_E', 'product'])
        return self._write(frame, f"field_{node_id}_t{request_index:02d}.csv")

    def write_learned_map(self, learned: LearnedThroughputMap, request_index: int, node_id: str) -> Path:
        frame = pd.DataFrame(learned.to_rows(),
                             columns=['x', 'y', 'est_backhaul', 'est_fronthaul', 'provenance'])
        return self._write(frame, f"map_{node_id}_t{request_index:02d}.csv")
