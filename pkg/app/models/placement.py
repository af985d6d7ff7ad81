"""
Placement Models
Fitness fields over the candidate grid and exhaustive-solver results
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.models.geometry import Point
from app.models.network import PerceptionSnapshot


@dataclass
class FitnessField:
    """Exploitation, exploration and their product per candidate"""

    candidates: List[Point]
    exploitation: np.ndarray
    exploration: np.ndarray
    combined: np.ndarray = None

    def __post_init__(self):
        self.exploitation = np.asarray(self.exploitation, dtype=float)
        self.exploration = np.asarray(self.exploration, dtype=float)
        if self.combined is None:
            self.combined = self.exploitation * self.exploration

    def to_rows(self) -> List[Dict[str, float]]:
        return [
            {
                'x': point.x,
                'y': point.y,
                'F_R': float(self.exploitation[i]),
                'F_E': float(self.exploration[i]),
                'product': float(self.combined[i]),
            }
            for i, point in enumerate(self.candidates)
        ]


@dataclass(frozen=True)
class GeneratedAction:
    """Chosen candidate; `degenerate` marks a fallback to exploitation alone"""

    location: Point
    index: int
    degenerate: bool = False
    fitness_field: Optional[FitnessField] = field(default=None, compare=False, repr=False)


@dataclass
class ExhaustiveSolveResult:
    """
    Optimal placement sequence of the dynamic location problem

    `deployed[i, t]` is 1 when candidate i hosts an extender at request t;
    `repositioned[i, t]` flags a change at (i, t).
    """

    candidates: List[Point]
    deployed: np.ndarray
    repositioned: np.ndarray
    objective: int
    feasible: bool
    demands: List[Dict[str, float]]
    snapshots: List[PerceptionSnapshot] = field(default_factory=list)

    @property
    def rates(self) -> List[Dict[str, float]]:
        """End-to-end rate per user at each request"""
        return [{uid: user.e2e_rate for uid, user in snap.users.items()} for snap in self.snapshots]

    @property
    def horizon(self) -> int:
        return self.deployed.shape[1]

    def placements(self) -> List[List[Point]]:
        """Occupied candidates per request"""
        return [
            [self.candidates[i] for i in np.flatnonzero(self.deployed[:, t])]
            for t in range(self.horizon)
        ]

    def min_fitness(self) -> float:
        worst = 1.0
        for demand, rate in zip(self.demands, self.rates):
            for user_id, wanted in demand.items():
                worst = min(worst, min(rate.get(user_id, 0.0) / wanted, 1.0))
        return worst
