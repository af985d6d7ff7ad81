"""
Episode Models
Per-request records, whole-episode logs and campaign metrics
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from app.models.geometry import Point
from app.models.network import PerceptionSnapshot

ALGORITHMS = ('ai-cbr', 'coverage-max', 'ap-only', 'oracle')

SOURCE_INITIAL = 'initial'
SOURCE_HOLD = 'hold'
SOURCE_REUSE = 'reuse'
SOURCE_OPTIMIZE = 'optimize'

STATUS_CONVERGED = 'converged'
STATUS_BUDGET_EXHAUSTED = 'budget-exhausted'
STATUS_HORIZON_REACHED = 'horizon-reached'


@dataclass
class RequestRecord:
    """
    One request step: the placement in force, what the agent perceived there
    and how that placement came about
    """

    request_index: int
    placement: Dict[str, Point]
    snapshot: PerceptionSnapshot
    source: str = SOURCE_INITIAL
    omega: Optional[float] = None
    degenerate: bool = False

    @property
    def overall_fitness(self) -> float:
        return self.snapshot.overall_fitness()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'request_index': self.request_index,
            'placement': {nid: loc.to_list() for nid, loc in sorted(self.placement.items())},
            'source': self.source,
            'omega': self.omega,
            'overall_fitness': self.overall_fitness,
        }


@dataclass
class EpisodeLog:
    """Everything one drop produced for one algorithm"""

    scenario_name: str
    algorithm: str
    drop: int
    records: List[RequestRecord] = field(default_factory=list)
    status: str = STATUS_CONVERGED
    repositions: int = 0
    knowledge_bases: Dict[str, Any] = field(default_factory=dict)

    @property
    def final(self) -> RequestRecord:
        return self.records[-1]

    @property
    def final_snapshot(self) -> PerceptionSnapshot:
        return self.final.snapshot

    def delivered_rates(self) -> Dict[str, float]:
        return self.final_snapshot.delivered_rates()

    def repositions_to_converge(self) -> int:
        """Optimize-driven moves applied before the final placement was first reached"""
        target = self.final.placement
        first = next(i for i, record in enumerate(self.records) if record.placement == target)
        return sum(1 for record in self.records[:first + 1] if record.source == SOURCE_OPTIMIZE)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario_name,
            'algorithm': self.algorithm,
            'drop': self.drop,
            'status': self.status,
            'repositions': self.repositions,
            'repositions_to_converge': self.repositions_to_converge(),
            'records': [record.to_dict() for record in self.records],
        }


@dataclass
class MetricsReport:
    """Campaign metrics of one algorithm"""

    algorithm: str
    avg_throughput: float
    jain_index: float
    outage_fraction: float
    mean_repositions: float
    std_repositions: float
    min_throughput: float
    below_floor_fraction: float
    rates: List[List[float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'algo': self.algorithm,
            'avg_throughput': self.avg_throughput,
            'jain': self.jain_index,
            'outage': self.outage_fraction,
            'mean_repositions': self.mean_repositions,
            'std_repositions': self.std_repositions,
            'min_throughput': self.min_throughput,
            'below_floor': self.below_floor_fraction,
        }
