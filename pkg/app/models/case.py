"""
Case Model
Problem / action / fitness triplets stored in the knowledge base
"""

from dataclasses import dataclass
from typing import Tuple, Union

from app.models.geometry import Point


@dataclass(frozen=True)
class Problem:
    """
    Fixed-length problem vector

    Layout: AP x, AP y, then per user slot (x, y, demand / normalizer);
    unused slots are zero.
    """

    vector: Tuple[float, ...]
    slot_count: int

    @property
    def dimension(self) -> int:
        return len(self.vector)


@dataclass(frozen=True)
class Action:
    """New extender position"""

    location: Point


@dataclass(frozen=True)
class Case:
    """A retained experience: problem, action, post-action fitness"""

    problem: Problem
    action: Action
    fitness: float
    request_index: int = 0

    def with_fitness(self, fitness: float) -> 'Case':
        return Case(self.problem, self.action, fitness, self.request_index)

    def with_action(self, action: Action, fitness: float, request_index: int) -> 'Case':
        return Case(self.problem, action, fitness, request_index)

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if not 0.0 <= self.fitness <= 1.0:
            errors.append(f"Case fitness {self.fitness} must be within [0, 1]")
        if self.problem.dimension != 2 + 3 * self.problem.slot_count:
            errors.append("Problem vector length does not match its slot count")
        if self.request_index < 0:
            errors.append("Request index must be >= 0")
        return len(errors) == 0, errors


@dataclass(frozen=True)
class DecisionThresholds:
    """Maximum matching distance and minimum fitness for reuse"""

    max_match: float = 2.0
    min_fitness: float = 0.8

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if self.max_match < 0:
            errors.append("Maximum matching distance must be >= 0")
        if not 0.0 <= self.min_fitness <= 1.0:
            errors.append("Minimum fitness must be within [0, 1]")
        return len(errors) == 0, errors


@dataclass(frozen=True)
class ReuseAction:
    action: Action
    case_index: int


@dataclass(frozen=True)
class ComputeNewAction:
    reason: str


Decision = Union[ReuseAction, ComputeNewAction]
