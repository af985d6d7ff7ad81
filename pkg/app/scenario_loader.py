"""
Scenario Loader
Reads YAML scenario files into validated Scenario objects, reporting every
problem with the line it came from
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from app.exceptions import ScenarioParseError
from app.models.geometry import FloorPlan, Point, WallSegment
from app.models.radio import ChannelParams, McsTable, NodeRole, RadioNode
from app.models.scenario import PLACEMENT_MODES, ManagedUser, NeighborNetwork, Scenario
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

UNLIMITED = 'unlimited'


class _LineLoader(yaml.SafeLoader):
    """SafeLoader that records the line of every mapping and of each of its keys"""

    def construct_mapping(self, node, deep=False):
        mapping = super().construct_mapping(node, deep=deep)
        mapping['__line__'] = node.start_mark.line + 1
        mapping['__lines__'] = {
            key_node.value: key_node.start_mark.line + 1 for key_node, _ in node.value
        }
        return mapping


def _strip(data: Any) -> Any:
    """Drop the line bookkeeping keys, recursively"""
    if isinstance(data, dict):
        return {k: _strip(v) for k, v in data.items() if k not in ('__line__', '__lines__')}
    if isinstance(data, list):
        return [_strip(v) for v in data]
    return data


class _Reader:
    """Collects problems while converting the raw mapping"""

    def __init__(self, path: str):
        self.path = path
        self.problems: List[Tuple[int, str]] = []

    def fail(self, mapping: Any, key: Optional[str], message: str) -> None:
        line = 1
        if isinstance(mapping, dict):
            line = mapping.get('__lines__', {}).get(key, mapping.get('__line__', 1))
        self.problems.append((line, message))

    def section(self, mapping: Dict, key: str, required: bool = True) -> Dict:
        value = mapping.get(key)
        if value is None:
            if required:
                self.fail(mapping, key, f"missing section '{key}'")
            return {}
        if not isinstance(value, dict):
            self.fail(mapping, key, f"'{key}' must be a mapping")
            return {}
        return value

    def number(self, mapping: Dict, key: str, default: Any = None, kind=float) -> Any:
        value = mapping.get(key, default)
        if value is None:
            self.fail(mapping, key, f"missing value '{key}'")
            return None
        if isinstance(value, bool):
            self.fail(mapping, key, f"'{key}' must be a number")
            return None
        try:
            return kind(value)
        except (TypeError, ValueError):
            self.fail(mapping, key, f"'{key}' must be a number, got {value!r}")
            return None

    def point(self, mapping: Dict, key: str, required: bool = True) -> Optional[Point]:
        value = mapping.get(key)
        if value is None:
            if required:
                self.fail(mapping, key, f"missing location '{key}'")
            return None
        try:
            return Point.from_sequence(value)
        except (TypeError, ValueError):
            self.fail(mapping, key, f"'{key}' must be [x, y] in meters, got {_strip(value)!r}")
            return None

    def region(self, mapping: Dict, key: str) -> Optional[Tuple[float, float, float, float]]:
        value = mapping.get(key)
        if value is None:
            return None
        try:
            x0, y0, x1, y1 = (float(v) for v in value)
        except (TypeError, ValueError):
            self.fail(mapping, key, f"'{key}' must be [x0, y0, x1, y1]")
            return None
        if x1 < x0 or y1 < y0:
            self.fail(mapping, key, f"'{key}' corners must be ordered low to high")
            return None
        return x0, y0, x1, y1


def load_scenario(path: str) -> Scenario:
    """
    Load and validate a scenario file

    Raises:
        ScenarioParseError: listing every problem with its line
    """
    path = str(path)
    try:
        with open(path, 'r') as handle:
            data = yaml.load(handle, Loader=_LineLoader)
    except OSError as e:
        raise ScenarioParseError(path, [f"cannot read file: {e}"])
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioParseError(path, [f"YAML syntax error: {getattr(e, 'problem', e)}"], line)

    scenario = parse_scenario(data, path=path, base_dir=Path(path).resolve().parent)
    logger.info(f"Loaded {scenario} from {path}")
    return scenario


def parse_scenario(data: Any, path: str = '<scenario>', base_dir: Optional[Path] = None) -> Scenario:
    """Build a Scenario from an already-parsed mapping"""
    reader = _Reader(path)
    if not isinstance(data, dict):
        raise ScenarioParseError(path, ["top level must be a mapping"], 1)

    plan = _parse_plan(reader, reader.section(data, 'floor_plan'))
    channel = _parse_channel(reader, reader.section(data, 'channel', required=False))
    table = _parse_mcs(reader, data, base_dir)

    ap_data = reader.section(data, 'ap')
    ap = _parse_node(reader, ap_data, NodeRole.MAP, 'mAP', managed=True) if ap_data else None

    placement = data.get('initial_placement', 'fixed')
    if placement not in PLACEMENT_MODES:
        reader.fail(data, 'initial_placement', f"initial_placement must be one of {', '.join(PLACEMENT_MODES)}")
    extenders = []
    for index, item in enumerate(data.get('extenders') or []):
        if not isinstance(item, dict):
            reader.fail(data, 'extenders', f"extender {index} must be a mapping")
            continue
        node = _parse_node(reader, item, NodeRole.EXTENDER, f"ext-{index + 1}", managed=True,
                           location_required=placement == 'fixed',
                           default_location=ap.location if ap else Point(0.0, 0.0),
                           default_channel=ap.channel if ap else 36)
        if node is not None:
            extenders.append(node)

    users = _parse_users(reader, data)
    neighbors = _parse_neighbors(reader, data)

    budget = data.get('max_repositions', 5)
    max_repositions = None
    if budget != UNLIMITED:
        max_repositions = reader.number(data, 'max_repositions', 5, kind=int)

    _check_placement(reader, data, plan, ap, extenders, users, neighbors)

    if reader.problems:
        _raise(path, reader.problems)

    scenario = Scenario(
        name=str(data.get('name', Path(path).stem)),
        plan=plan,
        channel=channel,
        mcs_table=table,
        ap=ap,
        extenders=extenders,
        users=users,
        neighbors=neighbors,
        max_repositions=max_repositions,
        max_requests=reader.number(data, 'max_requests', SimConfig.MAX_REQUESTS, kind=int),
        drops=reader.number(data, 'drops', 1, kind=int),
        seed=reader.number(data, 'seed', 0, kind=int),
        initial_placement=placement,
        user_region=reader.region(data, 'user_region'),
        resample_users=bool(data.get('resample_users', True)),
        carry_knowledge=bool(data.get('carry_knowledge', False)),
    )
    is_valid, errors = scenario.validate()
    if reader.problems or not is_valid:
        problems = list(reader.problems)
        problems.extend((data.get('__line__', 1), message) for message in errors)
        _raise(path, problems)
    return scenario


def _raise(path: str, problems: List[Tuple[int, str]]) -> None:
    problems = sorted(problems, key=lambda item: item[0])
    for line, message in problems:
        logger.error(f"{path}:{line}: {message}")
    raise ScenarioParseError(path, [f"line {line}: {message}" for line, message in problems],
                             problems[0][0])


def _parse_plan(reader: _Reader, data: Dict) -> FloorPlan:
    width = reader.number(data, 'width_m') if data else None
    height = reader.number(data, 'height_m') if data else None
    step = reader.number(data, 'grid_step_m', 1.0)
    default_loss = reader.number(data, 'wall_loss_db', 10.0)

    walls = []
    for index, item in enumerate(data.get('walls') or []):
        try:
            if isinstance(item, dict):
                wall = WallSegment(Point.from_sequence(item['from']), Point.from_sequence(item['to']),
                                   float(item.get('loss_db', default_loss)))
            else:
                values = [float(v) for v in item]
                if len(values) not in (4, 5):
                    raise ValueError(item)
                loss = values[4] if len(values) == 5 else default_loss
                wall = WallSegment(Point(values[0], values[1]), Point(values[2], values[3]), loss)
        except (KeyError, TypeError, ValueError):
            reader.fail(data, 'walls', f"wall {index} must be [x0, y0, x1, y1(, loss_db)] "
                                       f"or a mapping with from/to/loss_db")
            continue
        ok, errors = wall.validate()
        if not ok:
            reader.fail(data, 'walls', f"wall {index}: {'; '.join(errors)}")
            continue
        walls.append(wall)

    plan = FloorPlan(width or 1.0, height or 1.0, walls, step or 1.0, reader.region(data, 'candidate_region'))
    if width is not None and height is not None and step:
        ok, errors = plan.validate()
        for message in errors:
            reader.fail(data, None, message)
    return plan


def _parse_channel(reader: _Reader, data: Dict) -> ChannelParams:
    defaults = ChannelParams()
    return ChannelParams(
        frequency=reader.number(data, 'frequency_mhz', defaults.frequency),
        noise_floor=reader.number(data, 'noise_floor_dbm', defaults.noise_floor),
        rx_sensitivity=reader.number(data, 'rx_sensitivity_dbm', defaults.rx_sensitivity),
        cca_threshold=reader.number(data, 'cca_threshold_dbm', defaults.cca_threshold),
        pathloss_exponent=reader.number(data, 'pathloss_exponent', defaults.pathloss_exponent),
    )


def _parse_mcs(reader: _Reader, data: Dict, base_dir: Optional[Path]) -> McsTable:
    value = data.get('mcs_table', 'default')
    try:
        if isinstance(value, dict):
            table = McsTable.from_dict(_strip(value))
        elif value in (None, 'default'):
            table = McsTable.load(SimConfig.MCS_TABLE_PATH)
        else:
            table_path = Path(str(value))
            if not table_path.is_absolute() and base_dir is not None:
                table_path = base_dir / table_path
            table = McsTable.load(str(table_path))
    except (OSError, KeyError, TypeError, ValueError, yaml.YAMLError) as e:
        reader.fail(data, 'mcs_table', f"cannot read MCS table {value!r}: {e}")
        return McsTable(((0.0, 1.0),))

    if data.get('fixed_mcs_index') is not None:
        table = table.with_fixed_index(reader.number(data, 'fixed_mcs_index', kind=int))
    ok, errors = table.validate()
    for message in errors:
        reader.fail(data, 'mcs_table', message)
    return table


def _parse_node(reader: _Reader, data: Dict, role: NodeRole, default_id: str, managed: bool,
                location_required: bool = True, default_location: Optional[Point] = None,
                default_channel: int = 36) -> Optional[RadioNode]:
    location = reader.point(data, 'location', required=location_required) or default_location
    if location is None:
        return None
    tx_power = reader.number(data, 'tx_power_dbm', 20.0)
    if role == NodeRole.EXTENDER:
        backhaul = reader.number(data, 'backhaul_channel', default_channel, kind=int)
        fronthaul = reader.number(data, 'fronthaul_channel', backhaul, kind=int)
    else:
        backhaul = reader.number(data, 'channel', default_channel, kind=int)
        fronthaul = None
    return RadioNode(str(data.get('id', default_id)), role, location, tx_power,
                     backhaul, managed, fronthaul)


def _parse_users(reader: _Reader, data: Dict) -> List[ManagedUser]:
    users = []
    for index, item in enumerate(data.get('users') or []):
        if not isinstance(item, dict):
            reader.fail(data, 'users', f"user {index} must be a mapping")
            continue
        location = reader.point(item, 'location')
        demand = reader.number(item, 'demand_mbps')
        if demand is not None and demand <= 0:
            reader.fail(item, 'demand_mbps', f"user demand must be > 0 Mbps, got {demand}")
        if location is not None and demand is not None:
            users.append(ManagedUser(str(item.get('id', f"u{index + 1}")), location, demand))
    if not users and 'users' not in data:
        reader.fail(data, None, "missing section 'users'")
    return users


def _parse_neighbors(reader: _Reader, data: Dict) -> List[NeighborNetwork]:
    neighbors = []
    for index, item in enumerate(data.get('neighbors') or []):
        if not isinstance(item, dict):
            reader.fail(data, 'neighbors', f"neighbor {index} must be a mapping")
            continue
        name = str(item.get('name', f"neighbor-{index + 1}"))
        ap_data = reader.section(item, 'ap')
        if not ap_data:
            continue
        ap = _parse_node(reader, ap_data, NodeRole.MAP, f"{name}-ap", managed=False)
        extender = None
        if item.get('extender') is not None:
            ext_data = reader.section(item, 'extender')
            extender = _parse_node(reader, ext_data, NodeRole.EXTENDER, f"{name}-ext", managed=False,
                                   default_channel=ap.channel if ap else 36)
        locations = []
        for value in item.get('users') or []:
            try:
                locations.append(Point.from_sequence(value))
            except (TypeError, ValueError):
                reader.fail(item, 'users', f"neighbor user location {value!r} must be [x, y]")
        if ap is not None:
            neighbors.append(NeighborNetwork(name, ap, extender, tuple(locations),
                                             bool(item.get('saturated', True))))
    return neighbors


def _check_placement(reader: _Reader, data: Dict, plan: FloorPlan, ap: Optional[RadioNode],
                     extenders: List[RadioNode], users: List[ManagedUser],
                     neighbors: List[NeighborNetwork]) -> None:
    """Per-node checks that can point at the offending entry"""
    if reader.problems:
        return
    for node in [ap] + extenders:
        if node is not None and not plan.contains(node.location):
            reader.fail(data, 'extenders' if node is not ap else 'ap',
                        f"node {node.node_id} at {node.location.to_list()} lies outside the floor plan")
    for node in extenders:
        if ap is not None and node.channel != ap.channel:
            reader.fail(data, 'extenders', f"extender {node.node_id} backhaul channel {node.channel} "
                                           f"differs from the AP channel {ap.channel}")
    for user in users:
        if not plan.contains(user.location):
            reader.fail(data, 'users', f"user {user.user_id} at {user.location.to_list()} lies outside the floor plan")
    for neighbor in neighbors:
        for node in neighbor.radios():
            if not plan.contains(node.location):
                reader.fail(data, 'neighbors', f"neighbor node {node.node_id} lies outside the floor plan")


def resample_users(scenario: Scenario, rng: np.random.Generator) -> Scenario:
    """
    Draw new managed-user locations uniformly inside the user region (or the
    whole plan); ids and demands are kept.
    """
    if not scenario.resample_users:
        return scenario
    x0, y0, x1, y1 = scenario.user_region or (0.0, 0.0, scenario.plan.width, scenario.plan.height)
    users = []
    for user in sorted(scenario.users, key=lambda u: u.user_id):
        x, y = rng.uniform((x0, y0), (x1, y1))
        users.append(user.moved_to(Point(float(x), float(y))))
    return scenario.with_users(users)
