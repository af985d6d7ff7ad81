"""
Knowledge Base Layer
Case storage and the retrieve / reuse / revise / retain lifecycle
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import (
    CaseIndexError,
    DimensionMismatchError,
    EmptyKnowledgeBaseError,
    InvalidFitnessError,
    KnowledgeBaseFormatError,
)
from app.models.case import (
    Action,
    Case,
    ComputeNewAction,
    Decision,
    DecisionThresholds,
    Problem,
    ReuseAction,
)
from app.models.geometry import Point
from app.models.scenario import ManagedUser
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 'v1'
HEADER_PREFIX = '# extender-kb'


def build_problem(ap_location: Point, users: Iterable[ManagedUser],
                  normalizer: Optional[float] = None,
                  slot_count: Optional[int] = None) -> Problem:
    """
    Encode the AP location and the users' locations and demands

    Slots are filled in user-id order; demands are divided by the normalizer
    so one unit of demand weighs like one meter of displacement.
    """
    normalizer = SimConfig.DEMAND_NORMALIZER_MBPS if normalizer is None else normalizer
    slot_count = SimConfig.USER_SLOTS if slot_count is None else slot_count

    ordered = sorted(users, key=lambda user: user.user_id)
    if len(ordered) > slot_count:
        logger.warning(f"{len(ordered)} users exceed {slot_count} problem slots; extra users ignored")
        ordered = ordered[:slot_count]

    vector = [ap_location.x, ap_location.y]
    for user in ordered:
        vector.extend([user.location.x, user.location.y, user.demand / normalizer])
    vector.extend([0.0] * (3 * (slot_count - len(ordered))))
    return Problem(tuple(float(v) for v in vector), slot_count)


class KnowledgeBase:
    """Append-only case store of one managed extender"""

    def __init__(self, dimension: Optional[int] = None, cases: Optional[Sequence[Case]] = None):
        self.dimension = dimension
        self._cases: List[Case] = []
        for case in cases or []:
            self.retain(case)

    def __len__(self) -> int:
        return len(self._cases)

    def __getitem__(self, index: int) -> Case:
        self._check_index(index)
        return self._cases[index]

    @property
    def cases(self) -> Tuple[Case, ...]:
        return tuple(self._cases)

    def retain(self, case: Case) -> int:
        """
        Append a case

        Returns:
            int: index of the retained case
        """
        if self.dimension is None:
            self.dimension = case.problem.dimension
        if case.problem.dimension != self.dimension:
            logger.error(f"Case dimension {case.problem.dimension} does not match knowledge base {self.dimension}")
            raise DimensionMismatchError(
                f"problem dimension {case.problem.dimension} != knowledge base dimension {self.dimension}"
            )
        self._cases.append(case)
        logger.debug(f"Retained case {len(self._cases) - 1} at {case.action.location} (fitness {case.fitness:.3f})")
        return len(self._cases) - 1

    def revise(self, index: int, new_fitness: float) -> None:
        """Replace the fitness of one case; problem and action stay untouched"""
        self._check_index(index)
        if not 0.0 <= new_fitness <= 1.0:
            logger.error(f"Revised fitness {new_fitness} is outside [0, 1]")
            raise InvalidFitnessError(f"fitness must be within [0, 1], got {new_fitness}")
        self._cases[index] = self._cases[index].with_fitness(new_fitness)

    def revise_action(self, index: int, action: Action, new_fitness: float, request_index: int) -> None:
        """
        Point a case at a better action found for the same problem

        The problem vector is kept.
        """
        self._check_index(index)
        if not 0.0 <= new_fitness <= 1.0:
            logger.error(f"Revised fitness {new_fitness} is outside [0, 1]")
            raise InvalidFitnessError(f"fitness must be within [0, 1], got {new_fitness}")
        self._cases[index] = self._cases[index].with_action(action, new_fitness, request_index)
        logger.debug(f"Case {index} now points at {action.location} (fitness {new_fitness:.3f})")

    def retrieve(self, current: Problem) -> Tuple[int, float, Case]:
        """
        Most relevant case by Euclidean distance over the problem vector;
        ties go to the lowest index.

        Returns:
            (index, distance, case)
        """
        if not self._cases:
            raise EmptyKnowledgeBaseError("no cases")
        if current.dimension != self.dimension:
            logger.error(f"Query dimension {current.dimension} does not match knowledge base {self.dimension}")
            raise DimensionMismatchError(
                f"problem dimension {current.dimension} != knowledge base dimension {self.dimension}"
            )
        stored = np.array([case.problem.vector for case in self._cases], dtype=float)
        query = np.asarray(current.vector, dtype=float)
        distances = np.sqrt(((stored - query) ** 2).sum(axis=1))
        index = int(np.argmin(distances))
        return index, float(distances[index]), self._cases[index]

    def best_case(self) -> Tuple[int, Case]:
        """Highest-fitness case; ties go to the lowest index"""
        if not self._cases:
            raise EmptyKnowledgeBaseError("no cases")
        index = int(np.argmax([case.fitness for case in self._cases]))
        return index, self._cases[index]

    def save(self, path) -> None:
        """Write the versioned text format, one case per line"""
        lines = [f"{HEADER_PREFIX} {FORMAT_VERSION} dim={self.dimension or 0}"]
        for case in self._cases:
            problem = ','.join(repr(v) for v in case.problem.vector)
            action = f"{case.action.location.x!r},{case.action.location.y!r}"
            lines.append(f"{case.request_index};{problem};{action};{case.fitness!r}")
        Path(path).write_text('\n'.join(lines) + '\n')
        logger.info(f"Saved {len(self._cases)} cases to {path}")

    @classmethod
    def load(cls, path) -> 'KnowledgeBase':
        text = Path(path).read_text().splitlines()
        if not text or not text[0].startswith(HEADER_PREFIX):
            raise KnowledgeBaseFormatError(f"{path}:1: missing '{HEADER_PREFIX}' header")
        header = text[0].split()
        if len(header) < 4 or header[2] != FORMAT_VERSION or not header[3].startswith('dim='):
            raise KnowledgeBaseFormatError(f"{path}:1: unsupported header '{text[0]}'")
        dimension = int(header[3][4:]) or None

        kb = cls(dimension=dimension)
        for number, line in enumerate(text[1:], start=2):
            if not line.strip():
                continue
            try:
                index_text, problem_text, action_text, fitness_text = line.split(';')
                vector = tuple(float(v) for v in problem_text.split(','))
                x, y = (float(v) for v in action_text.split(','))
                case = Case(Problem(vector, (len(vector) - 2) // 3), Action(Point(x, y)),
                            float(fitness_text), int(index_text))
            except ValueError as e:
                raise KnowledgeBaseFormatError(f"{path}:{number}: {e}")
            kb.retain(case)
        return kb

    def _check_index(self, index: int) -> None:
        if not 0 <= index < len(self._cases):
            logger.error(f"Case index {index} out of range (size {len(self._cases)})")
            raise CaseIndexError(f"case index {index} out of range for {len(self._cases)} cases")


def decide(distance: float, case: Case, thresholds: Optional[DecisionThresholds] = None,
           case_index: int = 0) -> Decision:
    """Reuse the retrieved action only if it is close enough and was good enough"""
    if thresholds is None:
        thresholds = DecisionThresholds(**SimConfig.get_decision_config())
    if distance < thresholds.max_match and case.fitness > thresholds.min_fitness:
        return ReuseAction(case.action, case_index)
    if distance >= thresholds.max_match:
        return ComputeNewAction(f"match distance {distance:.3f} >= {thresholds.max_match}")
    return ComputeNewAction(f"case fitness {case.fitness:.3f} <= {thresholds.min_fitness}")
