"""
Floor-plan geometry: points, walls and the candidate grid
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Point:
    """A location on the floor plan, in meters"""

    x: float
    y: float

    def distance_to(self, other: 'Point') -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def to_list(self) -> List[float]:
        return [self.x, self.y]

    @classmethod
    def from_sequence(cls, values) -> 'Point':
        x, y = values
        return cls(float(x), float(y))

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class WallSegment:
    """A straight wall between two points with a penetration loss in dB"""

    a: Point
    b: Point
    loss: float = 10.0

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if self.a == self.b:
            errors.append("Wall endpoints must differ")
        if self.loss < 0:
            errors.append("Wall loss must be >= 0 dB")
        return len(errors) == 0, errors


@dataclass
class FloorPlan:
    """
    Rectangular layout with walls and a square candidate grid

    The candidate grid holds every point (m * grid_step, n * grid_step) inside
    the bounds, in row-major order (y outer, x inner). An optional region
    (x0, y0, x1, y1) restricts the candidates to the managed apartment.
    """

    width: float
    height: float
    walls: List[WallSegment] = field(default_factory=list)
    grid_step: float = 1.0
    candidate_region: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        self._wall_array = None
        self._candidates = None

    def validate(self) -> Tuple[bool, list]:
        """
        Validate plan dimensions, walls and the candidate grid
        Returns (is_valid, errors_list)
        """
        errors = []
        if not (self.width > 0 and self.height > 0):
            errors.append("Floor plan width and height must be > 0")
        if not self.grid_step > 0:
            errors.append("Grid step must be > 0")
        for index, wall in enumerate(self.walls):
            ok, wall_errors = wall.validate()
            if not ok:
                errors.extend(f"wall {index}: {message}" for message in wall_errors)
        if not errors and not self.candidates():
            errors.append("Candidate grid is empty")
        return len(errors) == 0, errors

    def contains(self, point: Point, tolerance: float = 1e-9) -> bool:
        return (-tolerance <= point.x <= self.width + tolerance
                and -tolerance <= point.y <= self.height + tolerance)

    def in_candidate_region(self, point: Point, tolerance: float = 1e-9) -> bool:
        if self.candidate_region is None:
            return self.contains(point, tolerance)
        x0, y0, x1, y1 = self.candidate_region
        return (x0 - tolerance <= point.x <= x1 + tolerance
                and y0 - tolerance <= point.y <= y1 + tolerance)

    def candidates(self) -> List[Point]:
        """Deduplicated candidate grid in row-major order"""
        if self._candidates is None:
            columns = int(math.floor(self.width / self.grid_step + 1e-9)) + 1
            rows = int(math.floor(self.height / self.grid_step + 1e-9)) + 1
            points = []
            for n in range(rows):
                for m in range(columns):
                    point = Point(round(m * self.grid_step, 9), round(n * self.grid_step, 9))
                    if self.in_candidate_region(point):
                        points.append(point)
            self._candidates = points
        return list(self._candidates)

    def nearest_candidate(self, point: Point) -> Point:
        """Closest candidate to an arbitrary point; ties go to the lowest index"""
        candidates = self.candidates()
        coords = np.array([c.to_list() for c in candidates])
        distances = np.hypot(coords[:, 0] - point.x, coords[:, 1] - point.y)
        return candidates[int(np.argmin(distances))]

    def wall_array(self) -> np.ndarray:
        """Walls as an (n, 5) array of ax, ay, bx, by, loss"""
        if self._wall_array is None:
            rows = [[w.a.x, w.a.y, w.b.x, w.b.y, w.loss] for w in self.walls]
            self._wall_array = np.array(rows, dtype=float).reshape(-1, 5)
        return self._wall_array

    def without_walls(self) -> 'FloorPlan':
        """Same bounds and grid with no obstacles, the agent's view of the layout"""
        return FloorPlan(self.width, self.height, [], self.grid_step, self.candidate_region)
