"""
Learning
Region-based refinement of throughput estimates from visited locations and
adaptation of the exploration factor
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.models.geometry import Point
from app.models.learning import ExplorationState, LearnedThroughputMap, Measurement, Provenance
from app.models.radio import RadioNode
from app.models.scenario import ManagedUser, Scenario
from app.rf_environment import link_phy_rate, rssi_at
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

_TOL = 1e-9
_DELTA_OMEGA_LOW = 2.0 - math.e  # value of 2 - exp(|dF|) at |dF| = 1


def initial_map(scenario: Scenario, extender: RadioNode, candidates: Optional[List[Point]] = None,
                users: Optional[Sequence[ManagedUser]] = None) -> LearnedThroughputMap:
    """
    Distance-based estimates over the candidate grid

    The agent knows neither walls nor neighbors: rates come from the
    wall-free path loss. Fronthaul at a candidate sums the estimated rates of
    the users that would associate to an extender placed there; `users`
    restricts the sum to the extender's own group.
    """
    plan = scenario.plan.without_walls()
    params, table = scenario.channel, scenario.mcs_table
    candidates = plan.candidates() if candidates is None else candidates

    backhaul = np.zeros(len(candidates))
    fronthaul = np.zeros(len(candidates))
    for i, point in enumerate(candidates):
        relay = extender.moved_to(point)
        backhaul[i] = link_phy_rate(scenario.ap, point, plan, params, table)
        total = 0.0
        for user in (scenario.users if users is None else users):
            if rssi_at(relay, user.location, plan, params) > rssi_at(scenario.ap, user.location, plan, params):
                total += link_phy_rate(relay, user.location, plan, params, table)
        fronthaul[i] = total
    return LearnedThroughputMap(candidates=list(candidates), prior_backhaul=backhaul,
                                prior_fronthaul=fronthaul)


def region_values(candidates: Sequence[Point], measurement: Measurement, grid_step: float,
                  half_width: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the candidates along the anchor->measurement axis

    Region 1 (anchor .. k, inside the corridor) takes the measured value;
    Region 2 (beyond k, inside the corridor) decays as value / dd with dd the
    extra distance from the anchor in grid units, floored at 1.

    Returns:
        (covered mask, values)
    """
    coords = np.array([p.to_list() for p in candidates], dtype=float)
    anchor = np.array(measurement.anchor.to_list())
    target = np.array(measurement.location.to_list())
    axis = target - anchor
    length = float(np.hypot(*axis))

    if length < _TOL:
        covered = np.hypot(*(coords - target).T) < _TOL
        return covered, np.where(covered, measurement.value, 0.0)

    unit = axis / length
    offsets = coords - anchor
    along = offsets @ unit
    across = np.abs(offsets[:, 0] * unit[1] - offsets[:, 1] * unit[0])
    corridor = across <= half_width * grid_step + _TOL

    region1 = corridor & (along >= -_TOL) & (along <= length + _TOL)
    region2 = corridor & (along > length + _TOL)

    anchor_distance = np.hypot(offsets[:, 0], offsets[:, 1])
    delta_d = np.maximum(1.0, np.abs(anchor_distance - length) / grid_step)
    values = np.where(region1, measurement.value, np.where(region2, measurement.value / delta_d, 0.0))
    return region1 | region2, values


def _propagate(candidates: Sequence[Point], prior: np.ndarray, measurements: Iterable[Measurement],
               grid_step: float, half_width: float) -> Tuple[np.ndarray, List[Provenance]]:
    """
    Combine every measurement's regions; a cell covered by several regions
    takes the one whose measured point is nearest, which puts the boundary
    between two measurements on their perpendicular bisector.
    """
    measurements = list(measurements)
    estimate = np.array(prior, dtype=float)
    provenance = [Provenance.DISTANCE] * len(candidates)
    if not measurements:
        return estimate, provenance

    coords = np.array([p.to_list() for p in candidates], dtype=float)
    ranks = np.full((len(measurements), len(candidates)), np.inf)
    values = np.zeros((len(measurements), len(candidates)))
    for m, measurement in enumerate(measurements):
        covered, region = region_values(candidates, measurement, grid_step, half_width)
        gap = np.hypot(coords[:, 0] - measurement.location.x, coords[:, 1] - measurement.location.y)
        ranks[m] = np.where(covered, gap, np.inf)
        values[m] = region

    winner = np.argmin(ranks, axis=0)
    reached = np.isfinite(ranks.min(axis=0))
    cells = np.arange(len(candidates))
    estimate[reached] = values[winner[reached], cells[reached]]
    for i in np.flatnonzero(reached):
        provenance[i] = Provenance.REGION
    return estimate, provenance


def update_backhaul(learned: LearnedThroughputMap, location: Point, measured: float,
                    ap_location: Point, grid_step: float,
                    half_width: Optional[float] = None) -> LearnedThroughputMap:
    """Fold one measured backhaul rate into the map, anchored at the AP"""
    half_width = SimConfig.CORRIDOR_HALF_WIDTH if half_width is None else half_width
    updated = learned.copy()
    updated.backhaul_measurements[location] = Measurement(location, measured, ap_location)
    updated.backhaul, updated.backhaul_provenance = _propagate(
        updated.candidates, updated.prior_backhaul, updated.backhaul_measurements.values(),
        grid_step, half_width)
    return updated


def update_fronthaul(learned: LearnedThroughputMap, location: Point, measured: float,
                     user_locations: Sequence[Point], backhaul_rate: float, total_demand: float,
                     grid_step: float, half_width: Optional[float] = None) -> LearnedThroughputMap:
    """
    Fold one measured fronthaul total into the map, anchored at the users'
    centroid. The measurement only counts when the backhaul was not the
    bottleneck: it met the demand or exceeded the fronthaul total.
    """
    half_width = SimConfig.CORRIDOR_HALF_WIDTH if half_width is None else half_width
    if not user_locations:
        logger.warning(f"Fronthaul measurement at {location} has no associated users; discarded")
        return learned
    if not (backhaul_rate >= total_demand or backhaul_rate >= measured):
        logger.warning(
            f"Fronthaul measurement at {location} discarded: backhaul {backhaul_rate:.1f} Mbps "
            f"below demand {total_demand:.1f} and fronthaul {measured:.1f}"
        )
        return learned

    centroid = points_centroid(user_locations)
    updated = learned.copy()
    updated.fronthaul_measurements[location] = Measurement(location, measured, centroid)
    updated.fronthaul, updated.fronthaul_provenance = _propagate(
        updated.candidates, updated.prior_fronthaul, updated.fronthaul_measurements.values(),
        grid_step, half_width)
    return updated


def update_omega(state: ExplorationState, omega_min: Optional[float] = None,
                 omega_max: Optional[float] = None) -> float:
    """
    Next exploration factor from the last two overall fitness values

    A small fitness change pushes omega up (explore wider); a large one
    pulls it down. The step 2 - exp(|dF|) is mapped affinely from
    [2 - e, 1] onto [0, 1] before averaging with the previous omega.
    """
    omega_min = SimConfig.OMEGA_MIN if omega_min is None else omega_min
    omega_max = SimConfig.OMEGA_MAX if omega_max is None else omega_max

    if state.current_fitness is None or state.previous_fitness is None:
        delta_f = 0.0
    else:
        delta_f = state.current_fitness - state.previous_fitness
    normalized = (delta_omega(delta_f) - _DELTA_OMEGA_LOW) / (1.0 - _DELTA_OMEGA_LOW)
    return min(max(0.5 * (state.omega + normalized), omega_min), omega_max)


def delta_omega(delta_f: float) -> float:
    """Raw exploration step before normalization"""
    return 2.0 - math.exp(abs(delta_f))


def points_centroid(points: Sequence[Point]) -> Point:
    return Point(float(np.mean([p.x for p in points])), float(np.mean([p.y for p in points])))
