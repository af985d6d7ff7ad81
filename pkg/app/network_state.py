"""
Network State
Perception of the managed network: association, throughput variables,
end-to-end rates and per-user fitness
"""

import logging
from typing import Dict, List, Optional

from app.exceptions import InvalidDemandError, NoServingNodeError
from app.models.network import PerceptionSnapshot, ThroughputState, UserPerception
from app.models.radio import NodeRole, RadioNode
from app.models.scenario import Scenario
from app.rf_environment import (
    Link,
    link_phy_rate,
    measured_link_throughput,
    rssi_at,
    transmitters,
)

logger = logging.getLogger(__name__)


def e2e_rate(state: ThroughputState, user_id: str) -> float:
    """
    End-to-end rate of one user behind a serving node

    Backhaul capacity is split across the node's users in proportion to
    their measured fronthaul rates; a single user gets min(backhaul, fronthaul).
    """
    if user_id not in state.meas_fronthaul:
        logger.error(f"User {user_id} has no serving node at {state.node_id}")
        raise NoServingNodeError(f"no serving node for user {user_id}")

    fronthaul = state.meas_fronthaul[user_id]
    if state.is_wired:
        return fronthaul
    total = state.meas_fronthaul_total
    share = state.meas_backhaul * fronthaul / total if total > 0 else 0.0
    return min(share, fronthaul)


def fitness(rate: float, demand: float) -> float:
    """QoS satisfaction degree, clipped to [0, 1]"""
    if demand <= 0:
        logger.error(f"Invalid demand {demand} Mbps")
        raise InvalidDemandError(f"demand must be > 0, got {demand}")
    return min(max(rate, 0.0) / demand, 1.0)


def associate(scenario: Scenario) -> Dict[str, str]:
    """
    Associate each managed user to the serving node with the strongest RSSI;
    ties go to the mAP, then to the lowest extender id.
    """
    serving = [scenario.ap] + sorted(scenario.extenders, key=lambda node: node.node_id)
    association = {}
    for user in scenario.users:
        best_id, best_rssi = None, None
        for node in serving:
            rssi = rssi_at(node, user.location, scenario.plan, scenario.channel)
            if best_rssi is None or rssi > best_rssi:
                best_id, best_rssi = node.node_id, rssi
        association[user.user_id] = best_id
    return association


def perceive(scenario: Scenario, request_index: int = 0,
             hidden_penalty: Optional[float] = None) -> PerceptionSnapshot:
    """
    Assemble measured and distance-based throughput variables for every
    serving node plus per-user e2e rate and fitness. Deterministic.
    """
    plan, params, table = scenario.plan, scenario.channel, scenario.mcs_table
    estimate_plan = plan.without_walls()
    radios = transmitters(scenario.ap, scenario.extenders, scenario.unmanaged_radios())
    association = associate(scenario)

    nodes: Dict[str, ThroughputState] = {}
    serving: List[RadioNode] = [scenario.ap] + list(scenario.extenders)
    for node in serving:
        state = ThroughputState(node.node_id, node.location)
        if node.role == NodeRole.EXTENDER:
            backhaul = Link(scenario.ap, node, node.channel)
            state.meas_backhaul = measured_link_throughput(
                backhaul, radios, plan, params, table, hidden_penalty=hidden_penalty)
            state.est_backhaul = link_phy_rate(scenario.ap, node.location, estimate_plan, params, table)

        for user in scenario.users:
            if association[user.user_id] != node.node_id:
                continue
            station = RadioNode(user.user_id, NodeRole.STATION, user.location,
                                channel=node.serving_channel)
            fronthaul = Link(node, station, node.serving_channel)
            state.meas_fronthaul[user.user_id] = measured_link_throughput(
                fronthaul, radios, plan, params, table, hidden_penalty=hidden_penalty)
            state.est_fronthaul[user.user_id] = link_phy_rate(
                node, user.location, estimate_plan, params, table)
        nodes[node.node_id] = state

    users: Dict[str, UserPerception] = {}
    for user in scenario.users:
        node_id = association[user.user_id]
        state = nodes[node_id]
        rate = e2e_rate(state, user.user_id)
        state.e2e[user.user_id] = rate
        server = scenario.ap if node_id == scenario.ap.node_id else scenario.extender(node_id)
        users[user.user_id] = UserPerception(
            user_id=user.user_id,
            location=user.location,
            serving_node=node_id,
            rssi=rssi_at(server, user.location, plan, params),
            e2e_rate=rate,
            demand=user.demand,
            fitness=fitness(rate, user.demand),
        )

    return PerceptionSnapshot(request_index=request_index, users=users, nodes=nodes)


def unsatisfied_users(snapshot: PerceptionSnapshot) -> List[str]:
    """Users whose rate is strictly below demand"""
    return sorted(uid for uid, user in snapshot.users.items() if user.e2e_rate < user.demand)
