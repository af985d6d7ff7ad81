"""
Network State Models
Per-node throughput variables and the per-request perception snapshot
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from app.models.geometry import Point


@dataclass
class ThroughputState:
    """
    Throughput variables of one serving node

    `meas_backhaul` is None for the mAP (wired backhaul). Fronthaul and e2e
    maps are keyed by the ids of the users associated to this node.
    """

    node_id: str
    location: Point
    est_backhaul: Optional[float] = None
    meas_backhaul: Optional[float] = None
    est_fronthaul: Dict[str, float] = field(default_factory=dict)
    meas_fronthaul: Dict[str, float] = field(default_factory=dict)
    e2e: Dict[str, float] = field(default_factory=dict)

    @property
    def est_fronthaul_total(self) -> float:
        return sum(self.est_fronthaul.values())

    @property
    def meas_fronthaul_total(self) -> float:
        return sum(self.meas_fronthaul.values())

    @property
    def is_wired(self) -> bool:
        return self.meas_backhaul is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'node_id': self.node_id,
            'location': self.location.to_list(),
            'est_backhaul': self.est_backhaul,
            'meas_backhaul': self.meas_backhaul,
            'est_fronthaul': dict(self.est_fronthaul),
            'meas_fronthaul': dict(self.meas_fronthaul),
            'e2e': dict(self.e2e),
        }


@dataclass(frozen=True)
class UserPerception:
    """What the agent perceives about one managed user"""

    user_id: str
    location: Point
    serving_node: str
    rssi: float
    e2e_rate: float
    demand: float
    fitness: float

    @property
    def delivered(self) -> float:
        """Users pull at most their demand"""
        return min(self.e2e_rate, self.demand)


@dataclass
class PerceptionSnapshot:
    """Performance indicators for one request step"""

    request_index: int
    users: Dict[str, UserPerception]
    nodes: Dict[str, ThroughputState]

    def served_by(self, node_id: str) -> List[str]:
        return sorted(uid for uid, user in self.users.items() if user.serving_node == node_id)

    def overall_fitness(self) -> float:
        """Mean per-user fitness over the managed users"""
        if not self.users:
            return 0.0
        return sum(user.fitness for user in self.users.values()) / len(self.users)

    def min_fitness(self) -> float:
        return min((user.fitness for user in self.users.values()), default=0.0)

    def delivered_rates(self) -> Dict[str, float]:
        return {uid: self.users[uid].delivered for uid in sorted(self.users)}

    def outage_count(self) -> int:
        return sum(1 for user in self.users.values() if user.e2e_rate <= 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'request_index': self.request_index,
            'users': {
                uid: {
                    'location': user.location.to_list(),
                    'serving_node': user.serving_node,
                    'rssi': user.rssi,
                    'e2e_rate': user.e2e_rate,
                    'demand': user.demand,
                    'fitness': user.fitness,
                }
                for uid, user in sorted(self.users.items())
            },
            'nodes': {nid: state.to_dict() for nid, state in sorted(self.nodes.items())},
        }
