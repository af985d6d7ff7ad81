"""
Shared fixtures: channel parameters, the shipped MCS table, small floor
plans and the shipped scenarios
"""

from pathlib import Path

import pytest

from app.models.geometry import FloorPlan, Point, WallSegment
from app.models.network import PerceptionSnapshot, UserPerception
from app.models.radio import ChannelParams, McsTable, NodeRole, RadioNode
from app.models.scenario import ManagedUser, Scenario
from app.scenario_loader import load_scenario
from config.sim_config import SimConfig

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'scenarios'


@pytest.fixture
def channel():
    return ChannelParams(frequency=5180.0, noise_floor=-85.0, rx_sensitivity=-83.0,
                         cca_threshold=-82.0, pathloss_exponent=3.5)


@pytest.fixture
def mcs_table():
    return McsTable.load(SimConfig.MCS_TABLE_PATH)


@pytest.fixture
def open_plan():
    return FloorPlan(10.0, 10.0)


@pytest.fixture
def walled_plan():
    """Open 20 m x 10 m plan with one wall at x = 5"""
    return FloorPlan(20.0, 10.0, [WallSegment(Point(5.0, 0.0), Point(5.0, 10.0), 10.0)])


@pytest.fixture
def small_scenario(channel, mcs_table):
    """4 m x 4 m room, AP in one corner, one user in the other"""
    ap = RadioNode('mAP', NodeRole.MAP, Point(0.0, 0.0), channel=36)
    extender = RadioNode('ext-1', NodeRole.EXTENDER, Point(2.0, 2.0), channel=36, fronthaul_channel=44)
    return Scenario(
        name='small',
        plan=FloorPlan(4.0, 4.0),
        channel=channel,
        mcs_table=mcs_table,
        ap=ap,
        extenders=[extender],
        users=[ManagedUser('u1', Point(4.0, 4.0), 100.0)],
        max_repositions=3,
        max_requests=8,
        drops=2,
    )


@pytest.fixture
def isolated_scenario():
    return load_scenario(SCENARIO_DIR / 'isolated_apartment.yaml')


@pytest.fixture
def hidden_node_scenario():
    return load_scenario(SCENARIO_DIR / 'hidden_node.yaml')


def make_snapshot(rates, demand=100.0, request_index=0):
    """Snapshot with one mAP-served user per rate"""
    users = {}
    for index, rate in enumerate(rates):
        user_id = f"u{index + 1}"
        users[user_id] = UserPerception(user_id, Point(0.0, 0.0), 'mAP', -50.0, rate, demand,
                                        min(rate / demand, 1.0))
    return PerceptionSnapshot(request_index, users, {})
