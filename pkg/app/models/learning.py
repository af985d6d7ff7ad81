"""
Learning Models
Learned throughput maps and the exploration state
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from app.models.geometry import Point


class Provenance(str, Enum):
    DISTANCE = 'distance-based'
    REGION = 'region-propagated'


@dataclass(frozen=True)
class Measurement:
    """A measured rate at a visited location, with the anchor its regions grow from"""

    location: Point
    value: float
    anchor: Point


@dataclass
class LearnedThroughputMap:
    """
    Per-candidate estimated backhaul and aggregate fronthaul rates

    The `prior_*` arrays hold the distance-based estimates; the current
    arrays are always a pure function of the priors and the measurement sets,
    so re-applying a measurement leaves the map unchanged.
    """

    candidates: List[Point]
    prior_backhaul: np.ndarray
    prior_fronthaul: np.ndarray
    backhaul: np.ndarray = None
    fronthaul: np.ndarray = None
    backhaul_provenance: List[Provenance] = None
    fronthaul_provenance: List[Provenance] = None
    backhaul_measurements: Dict[Point, Measurement] = field(default_factory=dict)
    fronthaul_measurements: Dict[Point, Measurement] = field(default_factory=dict)

    def __post_init__(self):
        size = len(self.candidates)
        if self.backhaul is None:
            self.backhaul = np.array(self.prior_backhaul, dtype=float)
        if self.fronthaul is None:
            self.fronthaul = np.array(self.prior_fronthaul, dtype=float)
        if self.backhaul_provenance is None:
            self.backhaul_provenance = [Provenance.DISTANCE] * size
        if self.fronthaul_provenance is None:
            self.fronthaul_provenance = [Provenance.DISTANCE] * size

    def index_of(self, point: Point) -> int:
        return self.candidates.index(point)

    def provenance(self, index: int) -> Provenance:
        if Provenance.REGION in (self.backhaul_provenance[index], self.fronthaul_provenance[index]):
            return Provenance.REGION
        return Provenance.DISTANCE

    def copy(self) -> 'LearnedThroughputMap':
        return LearnedThroughputMap(
            candidates=list(self.candidates),
            prior_backhaul=self.prior_backhaul.copy(),
            prior_fronthaul=self.prior_fronthaul.copy(),
            backhaul=self.backhaul.copy(),
            fronthaul=self.fronthaul.copy(),
            backhaul_provenance=list(self.backhaul_provenance),
            fronthaul_provenance=list(self.fronthaul_provenance),
            backhaul_measurements=dict(self.backhaul_measurements),
            fronthaul_measurements=dict(self.fronthaul_measurements),
        )

    def to_rows(self) -> List[dict]:
        return [
            {
                'x': point.x,
                'y': point.y,
                'est_backhaul': float(self.backhaul[i]),
                'est_fronthaul': float(self.fronthaul[i]),
                'provenance': self.provenance(i).value,
            }
            for i, point in enumerate(self.candidates)
        ]


@dataclass
class ExplorationState:
    """Exploration factor plus the last two overall fitness values"""

    omega: float = 0.5
    previous_fitness: Optional[float] = None
    current_fitness: Optional[float] = None

    def record(self, fitness: float) -> None:
        self.previous_fitness = self.current_fitness
        self.current_fitness = fitness
