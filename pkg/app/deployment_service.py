"""
Deployment Service Layer
Runs one drop of a scenario: the case-based self-deployment loop and the
coverage-max, AP-only and oracle baselines
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.exceptions import EmptyKnowledgeBaseError
from app.knowledge_base import KnowledgeBase, build_problem, decide
from app.learning import initial_map, update_backhaul, update_fronthaul, update_omega
from app.models.case import Action, Case, ComputeNewAction, DecisionThresholds, Problem, ReuseAction
from app.models.episode import (
    ALGORITHMS,
    SOURCE_HOLD,
    SOURCE_INITIAL,
    SOURCE_OPTIMIZE,
    SOURCE_REUSE,
    STATUS_BUDGET_EXHAUSTED,
    STATUS_CONVERGED,
    STATUS_HORIZON_REACHED,
    EpisodeLog,
    RequestRecord,
)
from app.models.geometry import Point
from app.models.learning import ExplorationState, LearnedThroughputMap
from app.models.network import PerceptionSnapshot
from app.models.placement import FitnessField
from app.models.scenario import ManagedUser, Scenario
from app.network_state import perceive, unsatisfied_users
from app.placement import exhaustive_solve, generate_action
from app.rf_environment import coverage_value
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

FieldObserver = Callable[[int, str, FitnessField, LearnedThroughputMap], None]


def user_groups(scenario: Scenario) -> Dict[str, List[ManagedUser]]:
    """
    Split the managed users among the extenders by bearing around the AP;
    a single extender owns every user.
    """
    extenders = sorted(scenario.extenders, key=lambda node: node.node_id)
    if not extenders:
        return {}
    ap = scenario.ap.location
    ordered = sorted(scenario.users,
                     key=lambda u: (math.atan2(u.location.y - ap.y, u.location.x - ap.x), u.user_id))
    chunks = np.array_split(np.arange(len(ordered)), len(extenders))
    return {node.node_id: [ordered[i] for i in chunk] for node, chunk in zip(extenders, chunks)}


def midway_place(scenario: Scenario) -> Dict[str, Point]:
    """Candidate nearest the midpoint between the AP and each extender's users"""
    placement = {}
    ap = scenario.ap.location
    for node_id, users in user_groups(scenario).items():
        group = users or scenario.users
        cx = float(np.mean([u.location.x for u in group]))
        cy = float(np.mean([u.location.y for u in group]))
        placement[node_id] = scenario.plan.nearest_candidate(Point((ap.x + cx) / 2.0, (ap.y + cy) / 2.0))
    return placement


def coverage_max_place(scenario: Scenario) -> Dict[str, Point]:
    """
    Max-min RSSI placement: each extender takes the candidate whose weakest
    link (AP to extender, extender to any of its users) is strongest.
    Ties go to the lowest row-major index.
    """
    candidates = scenario.plan.candidates()
    placement = {}
    for node_id, users in user_groups(scenario).items():
        node = scenario.extender(node_id)
        locations = [u.location for u in (users or scenario.users)]
        values = [coverage_value(c, scenario.ap, locations, scenario.plan, scenario.channel, node.tx_power)
                  for c in candidates]
        placement[node_id] = candidates[int(np.argmax(values))]
    return placement


def initial_placement(scenario: Scenario, rng: Optional[np.random.Generator] = None) -> Dict[str, Point]:
    """Starting extender locations for the scenario's placement mode"""
    mode = scenario.initial_placement
    if mode == 'midway':
        return midway_place(scenario)
    if mode == 'coverage-max':
        return coverage_max_place(scenario)
    if mode == 'random':
        rng = np.random.default_rng(scenario.seed) if rng is None else rng
        candidates = scenario.plan.candidates()
        return {node.node_id: candidates[int(rng.integers(len(candidates)))]
                for node in sorted(scenario.extenders, key=lambda n: n.node_id)}
    return scenario.placement()


@dataclass
class _ExtenderAgent:
    """
    Knowledge, learned estimates and exploration state of one extender

    `case_index` is the case retained for this episode's problem; it always
    holds the best action met so far. `recalled` is what the knowledge base
    offered before that case went in.
    """

    node_id: str
    users: List[ManagedUser]
    problem: Problem
    kb: KnowledgeBase
    learned: LearnedThroughputMap
    exploration: ExplorationState
    case_index: Optional[int] = None
    recalled: Optional[Tuple[int, float, Case]] = None
    reusing: Optional[int] = None


class DeploymentService:
    """Episode driver for every supported algorithm"""

    def __init__(self, thresholds: Optional[DecisionThresholds] = None,
                 hidden_penalty: Optional[float] = None):
        self.thresholds = thresholds or DecisionThresholds(**SimConfig.get_decision_config())
        self.learning = SimConfig.get_learning_config()
        self.episode = SimConfig.get_episode_config()
        self.hidden_penalty = hidden_penalty

    def run_episode(self, scenario: Scenario, algorithm: str, drop: int = 0,
                    rng: Optional[np.random.Generator] = None,
                    observer: Optional[FieldObserver] = None,
                    knowledge: Optional[Dict[str, KnowledgeBase]] = None) -> EpisodeLog:
        """
        Run one drop

        Args:
            scenario: drop scenario (users already resampled)
            algorithm: one of ai-cbr, coverage-max, ap-only, oracle
            drop: drop index, recorded in the log
            rng: generator for random initial placements
            observer: called with every fitness field the agent computes
            knowledge: per-extender knowledge bases carried over from earlier
                drops; missing entries are created and filled in place

        Returns:
            EpisodeLog
        """
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
        if algorithm == 'ai-cbr':
            return self._run_ai_cbr(scenario, drop, rng, observer, knowledge)
        if algorithm == 'coverage-max':
            return self._run_fixed(scenario, algorithm, drop, coverage_max_place(scenario))
        if algorithm == 'ap-only':
            return self._run_fixed(scenario.without_extenders(), algorithm, drop, {})
        return self._run_oracle(scenario, drop)

    def _perceive(self, scenario: Scenario, request_index: int) -> PerceptionSnapshot:
        return perceive(scenario, request_index, hidden_penalty=self.hidden_penalty)

    def _run_fixed(self, scenario: Scenario, algorithm: str, drop: int,
                   placement: Dict[str, Point]) -> EpisodeLog:
        current = scenario.with_placement(placement)
        log = EpisodeLog(scenario.name, algorithm, drop)
        log.records.append(RequestRecord(0, current.placement(), self._perceive(current, 0)))
        return log

    def _run_oracle(self, scenario: Scenario, drop: int) -> EpisodeLog:
        result = exhaustive_solve(scenario, horizon=1, max_extenders=max(1, len(scenario.extenders)))
        snapshot = result.snapshots[0]
        placement = {nid: state.location for nid, state in snapshot.nodes.items() if not state.is_wired}
        log = EpisodeLog(scenario.name, 'oracle', drop)
        log.records.append(RequestRecord(0, placement, snapshot))
        if not result.feasible:
            logger.info(f"Drop {drop}: no placement satisfies every user; oracle keeps the max-min fitness one")
        return log

    def _new_agent(self, scenario: Scenario, node_id: str, users: List[ManagedUser],
                   kb: KnowledgeBase) -> _ExtenderAgent:
        return _ExtenderAgent(
            node_id=node_id,
            users=users,
            problem=build_problem(scenario.ap.location, users),
            kb=kb,
            learned=initial_map(scenario, scenario.extender(node_id), users=users or None),
            exploration=ExplorationState(omega=self.learning['omega_initial']),
        )

    def _learn(self, agent: _ExtenderAgent, scenario: Scenario, snapshot: PerceptionSnapshot,
               fitness: float, request_index: int) -> None:
        """Fold the new measurements in and settle the outcome of the last action"""
        node = scenario.extender(agent.node_id)
        state = snapshot.nodes[agent.node_id]
        step = scenario.plan.grid_step
        width = self.learning['corridor_half_width']

        agent.learned = update_backhaul(agent.learned, node.location, state.meas_backhaul,
                                        scenario.ap.location, step, width)
        served = snapshot.served_by(agent.node_id)
        if served:
            agent.learned = update_fronthaul(
                agent.learned, node.location, state.meas_fronthaul_total,
                [snapshot.users[uid].location for uid in served], state.meas_backhaul,
                sum(snapshot.users[uid].demand for uid in served), step, width)
        agent.exploration.record(fitness)

        if agent.reusing is not None:
            agent.kb.revise(agent.reusing, fitness)
            logger.info(f"Request {request_index}: revised case {agent.reusing} of {agent.node_id} "
                        f"to fitness {fitness:.3f}")
            agent.reusing = None

        if agent.case_index is None:
            agent.recalled = self._retrieve(agent)
            agent.case_index = agent.kb.retain(Case(agent.problem, Action(node.location), fitness, request_index))
            logger.info(f"Request {request_index}: retained case {agent.case_index} for {agent.node_id} "
                        f"at {node.location.to_list()} (fitness {fitness:.3f})")
        elif fitness > agent.kb[agent.case_index].fitness:
            agent.kb.revise_action(agent.case_index, Action(node.location), fitness, request_index)
            logger.info(f"Request {request_index}: case {agent.case_index} of {agent.node_id} now points "
                        f"at {node.location.to_list()} (fitness {fitness:.3f})")

    @staticmethod
    def _retrieve(agent: _ExtenderAgent) -> Optional[Tuple[int, float, Case]]:
        try:
            return agent.kb.retrieve(agent.problem)
        except EmptyKnowledgeBaseError:
            return None

    def _reuse_target(self, agent: _ExtenderAgent, here: Point, fitness: float) -> Optional[ReuseAction]:
        """
        Decide on the most relevant case: the one recalled before this
        episode's case was retained, afterwards the nearest one in the base
        """
        found = agent.recalled if agent.recalled is not None else self._retrieve(agent)
        agent.recalled = None
        if found is None:
            return None
        index, distance, case = found
        decision = decide(distance, case, self.thresholds, index)
        if isinstance(decision, ComputeNewAction):
            logger.debug(f"{agent.node_id}: computing a new action ({decision.reason})")
            return None
        if decision.action.location == here or case.fitness <= fitness:
            logger.debug(f"{agent.node_id}: retrieved case {index} cannot improve on the current placement")
            return None
        return decision

    def _run_ai_cbr(self, scenario: Scenario, drop: int, rng: Optional[np.random.Generator],
                    observer: Optional[FieldObserver],
                    knowledge: Optional[Dict[str, KnowledgeBase]] = None) -> EpisodeLog:
        current = scenario.with_placement(initial_placement(scenario, rng))
        knowledge = {} if knowledge is None else knowledge
        agents = {nid: self._new_agent(current, nid, users, knowledge.setdefault(nid, KnowledgeBase()))
                  for nid, users in user_groups(current).items()}
        budget = scenario.max_repositions
        tolerance = self.episode['convergence_tolerance']
        window = self.episode['convergence_window']
        floor = max(self.learning['distance_floor_m'], scenario.plan.grid_step)

        log = EpisodeLog(scenario.name, 'ai-cbr', drop)
        log.knowledge_bases = {nid: agent.kb for nid, agent in agents.items()}
        source, omega_used, degenerate = SOURCE_INITIAL, None, False
        previous, unchanged = None, 0

        for t in range(scenario.max_requests):
            snapshot = self._perceive(current, t)
            fitness = snapshot.overall_fitness()
            log.records.append(RequestRecord(t, current.placement(), snapshot, source, omega_used, degenerate))
            for agent in agents.values():
                self._learn(agent, current, snapshot, fitness, t)

            unchanged = unchanged + 1 if previous is not None and abs(fitness - previous) <= tolerance else 0
            previous = fitness
            if not unsatisfied_users(snapshot):
                log.status = STATUS_CONVERGED
                break
            if unchanged >= window:
                log.status = STATUS_CONVERGED
                break
            if budget is not None and log.repositions >= budget:
                logger.warning(f"Drop {drop}: reposition budget {budget} exhausted at request {t}")
                log.status = STATUS_BUDGET_EXHAUSTED
                break
            if t == scenario.max_requests - 1:
                log.status = STATUS_HORIZON_REACHED
                break

            moves: Dict[str, Point] = {}
            source, omega_used, degenerate = SOURCE_HOLD, None, False
            for node_id in sorted(agents):
                agent = agents[node_id]
                here = current.extender(node_id).location
                reuse = self._reuse_target(agent, here, fitness)
                if reuse is not None:
                    moves[node_id] = reuse.action.location
                    agent.reusing = reuse.case_index
                    if source == SOURCE_HOLD:
                        source = SOURCE_REUSE
                    logger.info(f"Request {t}: reusing case {reuse.case_index} for {node_id} "
                                f"-> {reuse.action.location.to_list()}")
                    continue
                if budget is not None and log.repositions >= budget:
                    continue

                agent.exploration.omega = update_omega(agent.exploration, self.learning['omega_min'],
                                                       self.learning['omega_max'])
                visited = list(agent.learned.backhaul_measurements)
                generated = generate_action(agent.learned, visited, agent.exploration.omega, floor)
                if observer is not None:
                    observer(t, node_id, generated.fitness_field, agent.learned)
                if generated.location == here:
                    continue
                moves[node_id] = generated.location
                log.repositions += 1
                source, degenerate = SOURCE_OPTIMIZE, degenerate or generated.degenerate
                omega_used = agent.exploration.omega if omega_used is None else omega_used
                logger.info(f"Request {t}: moving {node_id} to {generated.location.to_list()} "
                            f"(omega {agent.exploration.omega:.3f})")
            current = current.with_placement(moves)

        self._settle(log, current)
        logger.info(f"Drop {drop}: ai-cbr finished ({log.status}) after {log.repositions} repositions, "
                    f"fitness {log.final.overall_fitness:.3f}")
        return log

    def _settle(self, log: EpisodeLog, current: Scenario) -> None:
        """Return to the best placement experienced if the episode ended elsewhere"""
        best = max(log.records, key=lambda record: record.overall_fitness)
        if best.placement == current.placement():
            return
        settled = current.with_placement(best.placement)
        t = log.final.request_index + 1
        log.records.append(RequestRecord(t, settled.placement(), self._perceive(settled, t), SOURCE_REUSE))
        logger.info(f"Settled on the placement of request {best.request_index} "
                    f"(fitness {best.overall_fitness:.3f})")
