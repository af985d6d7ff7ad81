"""
Scenario Model
One simulation drop: floor plan, radios, users, neighbors and budgets
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from app.models.geometry import FloorPlan, Point
from app.models.radio import ChannelParams, McsTable, NodeRole, RadioNode

PLACEMENT_MODES = ('fixed', 'midway', 'random', 'coverage-max')


@dataclass(frozen=True)
class ManagedUser:
    """A managed station with its SLA demand"""

    user_id: str
    location: Point
    demand: float

    def moved_to(self, location: Point) -> 'ManagedUser':
        return ManagedUser(self.user_id, location, self.demand)

    def with_demand(self, demand: float) -> 'ManagedUser':
        return ManagedUser(self.user_id, self.location, demand)


@dataclass(frozen=True)
class NeighborNetwork:
    """An unmanaged AP / extender / users triple"""

    name: str
    ap: RadioNode
    extender: Optional[RadioNode] = None
    users: Tuple[Point, ...] = ()
    saturated: bool = True

    def radios(self) -> List[RadioNode]:
        return [node for node in (self.ap, self.extender) if node is not None]


@dataclass
class Scenario:
    """The unit of one simulation drop"""

    name: str
    plan: FloorPlan
    channel: ChannelParams
    mcs_table: McsTable
    ap: RadioNode
    extenders: List[RadioNode]
    users: List[ManagedUser]
    neighbors: List[NeighborNetwork] = field(default_factory=list)
    max_repositions: Optional[int] = 5
    max_requests: int = 20
    drops: int = 50
    seed: int = 0
    initial_placement: str = 'fixed'
    user_region: Optional[Tuple[float, float, float, float]] = None
    resample_users: bool = True
    carry_knowledge: bool = False

    def demands(self) -> Dict[str, float]:
        return {user.user_id: user.demand for user in self.users}

    def extender(self, node_id: str) -> RadioNode:
        for node in self.extenders:
            if node.node_id == node_id:
                return node
        raise KeyError(node_id)

    def with_users(self, users: List[ManagedUser]) -> 'Scenario':
        return replace(self, users=list(users))

    def with_placement(self, placement: Dict[str, Point]) -> 'Scenario':
        """Copy with extenders moved; ids missing from `placement` keep their location"""
        moved = [node.moved_to(placement.get(node.node_id, node.location)) for node in self.extenders]
        return replace(self, extenders=moved)

    def without_extenders(self) -> 'Scenario':
        return replace(self, extenders=[])

    def placement(self) -> Dict[str, Point]:
        return {node.node_id: node.location for node in self.extenders}

    def unmanaged_radios(self) -> List[RadioNode]:
        """Radios of the saturated neighbor networks"""
        radios = []
        for neighbor in self.neighbors:
            if neighbor.saturated:
                radios.extend(neighbor.radios())
        return radios

    def validate(self) -> Tuple[bool, list]:
        """
        Validate the scenario
        Returns (is_valid, errors_list)
        """
        errors = []
        for label, result in (('floor plan', self.plan.validate()),
                              ('channel', self.channel.validate()),
                              ('mcs table', self.mcs_table.validate())):
            ok, messages = result
            if not ok:
                errors.extend(f"{label}: {message}" for message in messages)

        if self.ap.role != NodeRole.MAP:
            errors.append("The managed AP must have role mAP")
        nodes = [self.ap] + list(self.extenders)
        for neighbor in self.neighbors:
            nodes.extend(neighbor.radios())
        for node in nodes:
            ok, messages = node.validate()
            errors.extend(messages)
            if not self.plan.contains(node.location):
                errors.append(f"Node {node.node_id} lies outside the floor plan")

        for node in self.extenders:
            if node.channel != self.ap.channel:
                errors.append(f"Extender {node.node_id} backhaul channel {node.channel} "
                              f"differs from the AP channel {self.ap.channel}")
        if not self.users:
            errors.append("At least one managed user is required")
        seen = set()
        for user in self.users:
            if user.user_id in seen:
                errors.append(f"Duplicate user id {user.user_id}")
            seen.add(user.user_id)
            if user.demand <= 0:
                errors.append(f"User {user.user_id} demand must be > 0 Mbps")
            if not self.plan.contains(user.location):
                errors.append(f"User {user.user_id} lies outside the floor plan")
        for neighbor in self.neighbors:
            for location in neighbor.users:
                if not self.plan.contains(location):
                    errors.append(f"Neighbor {neighbor.name} user lies outside the floor plan")

        if self.max_repositions is not None and self.max_repositions < 0:
            errors.append("max_repositions must be >= 0 or unlimited")
        if self.max_requests < 1:
            errors.append("max_requests must be >= 1")
        if self.drops < 1:
            errors.append("drops must be >= 1")
        if self.initial_placement not in PLACEMENT_MODES:
            errors.append(f"initial_placement must be one of {', '.join(PLACEMENT_MODES)}")
        return len(errors) == 0, errors

    def __str__(self) -> str:
        return (f"Scenario({self.name}: {len(self.extenders)} extender(s), "
                f"{len(self.users)} user(s), {len(self.neighbors)} neighbor(s))")
