"""
Placement Optimization
New-action generation balancing exploitation and exploration, plus the
exhaustive solver of the dynamic location problem used as an oracle
"""

import itertools
import logging
import math
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import InstanceTooLargeError
from app.models.geometry import Point
from app.models.learning import LearnedThroughputMap
from app.models.network import PerceptionSnapshot
from app.models.placement import ExhaustiveSolveResult, FitnessField, GeneratedAction
from app.models.radio import NodeRole, RadioNode
from app.models.scenario import Scenario
from app.network_state import perceive
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

_RATE_TOL = 1e-9


def exploitation_fitness(learned: LearnedThroughputMap) -> np.ndarray:
    """Expected end-user throughput per candidate: min(backhaul, fronthaul) estimates"""
    return np.minimum(learned.backhaul, learned.fronthaul)


def exploration_fitness(candidates: Sequence[Point], visited: Sequence[Point], omega: float,
                        distance_floor: Optional[float] = None) -> np.ndarray:
    """
    Distance-to-knowledge score per candidate

    F_E(i) = min over visited k of log10(zeta_ki) ** omega, zeta clamped to
    the floor so a visited cell scores exactly 0. With nothing visited every
    candidate scores 1.
    """
    floor = SimConfig.EXPLORE_DISTANCE_FLOOR_M if distance_floor is None else distance_floor
    if not visited:
        return np.ones(len(candidates))

    coords = np.array([p.to_list() for p in candidates], dtype=float)
    stored = np.array([p.to_list() for p in visited], dtype=float)
    zeta = np.hypot(coords[:, None, 0] - stored[None, :, 0], coords[:, None, 1] - stored[None, :, 1])
    zeta = np.maximum(zeta, max(floor, 1.0))
    return (np.log10(zeta) ** omega).min(axis=1)


def fitness_field(learned: LearnedThroughputMap, visited: Sequence[Point], omega: float,
                  distance_floor: Optional[float] = None) -> FitnessField:
    return FitnessField(
        candidates=list(learned.candidates),
        exploitation=exploitation_fitness(learned),
        exploration=exploration_fitness(learned.candidates, visited, omega, distance_floor),
    )


def generate_action(learned: LearnedThroughputMap, visited: Sequence[Point], omega: float,
                    distance_floor: Optional[float] = None) -> GeneratedAction:
    """
    Candidate maximizing exploitation x exploration; ties go to the lowest
    row-major index. An all-zero product falls back to exploitation alone.
    """
    field = fitness_field(learned, visited, omega, distance_floor)
    if field.combined.max() > 0.0:
        index = int(np.argmax(field.combined))
        return GeneratedAction(field.candidates[index], index, False, field)

    index = int(np.argmax(field.exploitation))
    logger.warning(f"Degenerate fitness field (all products zero); falling back to {field.candidates[index]}")
    return GeneratedAction(field.candidates[index], index, True, field)


def _extender_templates(scenario: Scenario, count: int) -> List[RadioNode]:
    if scenario.extenders:
        base = sorted(scenario.extenders, key=lambda node: node.node_id)
    else:
        ap = scenario.ap
        base = [RadioNode('ext-1', NodeRole.EXTENDER, ap.location, ap.tx_power, ap.channel, True, ap.channel)]
    templates = list(base[:count])
    while len(templates) < count:
        source = base[0]
        templates.append(RadioNode(f"{source.node_id}-{len(templates) + 1}", NodeRole.EXTENDER,
                                   source.location, source.tx_power, source.channel, source.managed,
                                   source.fronthaul_channel))
    return templates


def exhaustive_solve(scenario: Scenario, horizon: int = 1, max_extenders: int = 1,
                     demand_schedule: Optional[Sequence[Dict[str, float]]] = None,
                     combination_limit: Optional[int] = None) -> ExhaustiveSolveResult:
    """
    Enumerate every placement sequence over the horizon

    At each request up to `max_extenders` extenders occupy distinct
    candidates. Sequences meeting every demand at every request are ranked by
    the peak extender count plus the number of cells flipped between
    consecutive requests. Without any feasible sequence the one maximizing the
    worst user fitness is returned with `feasible=False`.

    Raises:
        InstanceTooLargeError: when the sequence count exceeds the limit
    """
    limit = SimConfig.ORACLE_COMBINATION_LIMIT if combination_limit is None else combination_limit
    candidates = scenario.plan.candidates()
    if demand_schedule is None:
        demand_schedule = [scenario.demands()] * horizon
    if len(demand_schedule) != horizon:
        raise ValueError(f"demand schedule covers {len(demand_schedule)} requests, horizon is {horizon}")

    combinations = combination_count(len(candidates), horizon, max_extenders)
    if combinations > limit:
        logger.error(f"Exhaustive search over {combinations} sequences exceeds the limit {limit}")
        raise InstanceTooLargeError(combinations, limit)

    options: List[Tuple[int, ...]] = []
    for size in range(max_extenders + 1):
        options.extend(itertools.combinations(range(len(candidates)), size))

    templates = _extender_templates(scenario, max_extenders)
    cache: Dict[Tuple[Tuple[int, ...], Tuple], PerceptionSnapshot] = {}

    def evaluate(option: Tuple[int, ...], t: int) -> PerceptionSnapshot:
        demands = demand_schedule[t]
        key = (option, tuple(sorted(demands.items())))
        if key not in cache:
            nodes = [templates[j].moved_to(candidates[i]) for j, i in enumerate(option)]
            users = [user.with_demand(demands.get(user.user_id, user.demand)) for user in scenario.users]
            cache[key] = perceive(replace(scenario, users=users, extenders=nodes), request_index=t)
        return cache[key]

    satisfied = np.zeros((horizon, len(options)), dtype=bool)
    worst = np.zeros((horizon, len(options)))
    for t in range(horizon):
        for o, option in enumerate(options):
            snapshot = evaluate(option, t)
            satisfied[t, o] = all(u.e2e_rate + _RATE_TOL >= u.demand for u in snapshot.users.values())
            worst[t, o] = snapshot.min_fitness()

    feasible = bool(satisfied.any(axis=1).all())
    pools = [np.flatnonzero(satisfied[t]) if feasible else range(len(options)) for t in range(horizon)]

    best_key, best_sequence = None, None
    for sequence in itertools.product(*pools):
        sets = [frozenset(options[o]) for o in sequence]
        objective = max(len(s) for s in sets) + sum(len(a ^ b) for a, b in zip(sets, sets[1:]))
        if feasible:
            key = (objective,)
        else:
            key = (-min(worst[t, o] for t, o in enumerate(sequence)), objective)
        if best_key is None or key < best_key:
            best_key, best_sequence = key, sequence

    deployed = np.zeros((len(candidates), horizon), dtype=np.int8)
    for t, o in enumerate(best_sequence):
        deployed[list(options[o]), t] = 1
    repositioned = np.zeros_like(deployed)
    repositioned[:, 1:] = np.abs(np.diff(deployed, axis=1))
    objective = int(deployed.sum(axis=0).max() + repositioned.sum())

    if not feasible:
        logger.warning(f"No placement sequence satisfies every demand; best worst-user fitness {-best_key[0]:.3f}")
    return ExhaustiveSolveResult(
        candidates=candidates,
        deployed=deployed,
        repositioned=repositioned,
        objective=objective,
        feasible=feasible,
        demands=[dict(d) for d in demand_schedule],
        snapshots=[evaluate(options[o], t) for t, o in enumerate(best_sequence)],
    )


def check_constraints(result: ExhaustiveSolveResult, max_extenders: int = 1) -> List[str]:
    """
    Names of the location-problem constraints the result violates

    C1 repositioning covers every flip, C2 demands are met (feasible results
    only), C3 user rates stay within min(fronthaul estimate, backhaul) of an
    occupied cell, C4 measured backhaul stays within its estimate, C5 binary
    variables. `N` flags more extenders than allowed.
    """
    violated = []
    deployed, repositioned = result.deployed, result.repositioned

    if np.any(repositioned[:, 1:] < np.abs(np.diff(deployed.astype(int), axis=1))):
        violated.append('C1')

    if result.feasible:
        for demands, snapshot in zip(result.demands, result.snapshots):
            if any(snapshot.users[uid].e2e_rate + _RATE_TOL < wanted for uid, wanted in demands.items()):
                violated.append('C2')
                break

    occupied = [set(result.placements()[t]) for t in range(result.horizon)]
    c3 = c4 = False
    for t, snapshot in enumerate(result.snapshots):
        for state in snapshot.nodes.values():
            if state.is_wired:
                continue
            if state.location not in occupied[t]:
                c3 = True
            bound = min(state.est_fronthaul_total, state.meas_backhaul)
            if any(rate > bound + _RATE_TOL for rate in state.e2e.values()):
                c3 = True
            if state.meas_backhaul > state.est_backhaul + _RATE_TOL:
                c4 = True
    if c3:
        violated.append('C3')
    if c4:
        violated.append('C4')

    if not (np.isin(deployed, (0, 1)).all() and np.isin(repositioned, (0, 1)).all()):
        violated.append('C5')
    if deployed.shape[1] and deployed.sum(axis=0).max() > max_extenders:
        violated.append('N')
    return violated


def combination_count(candidate_count: int, horizon: int, max_extenders: int = 1) -> int:
    """Sequences exhaustive_solve would enumerate"""
    per_step = sum(math.comb(candidate_count, size) for size in range(max_extenders + 1))
    return per_step ** horizon
