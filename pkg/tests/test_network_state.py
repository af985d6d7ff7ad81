import pytest

from app.exceptions import InvalidDemandError, NoServingNodeError
from app.models.geometry import Point
from app.models.network import ThroughputState
from app.models.scenario import ManagedUser
from app.network_state import associate, e2e_rate, fitness, perceive, unsatisfied_users
from tests.conftest import make_snapshot


class TestFitness:
    def test_clipped_at_one(self):
        assert fitness(150.0, 100.0) == 1.0

    def test_ratio(self):
        assert fitness(50.0, 100.0) == 0.5
        assert fitness(0.0, 100.0) == 0.0

    def test_negative_rate_floors_at_zero(self):
        assert fitness(-5.0, 100.0) == 0.0

    @pytest.mark.parametrize('demand', [0.0, -10.0])
    def test_invalid_demand(self, demand):
        with pytest.raises(InvalidDemandError):
            fitness(10.0, demand)


class TestE2eRate:
    def test_proportional_backhaul_split(self):
        state = ThroughputState('ext-1', Point(0.0, 0.0), meas_backhaul=50.0,
                                meas_fronthaul={'a': 60.0, 'b': 40.0})
        assert e2e_rate(state, 'a') == pytest.approx(30.0)
        assert e2e_rate(state, 'b') == pytest.approx(20.0)

    def test_single_user_is_min_of_hops(self):
        state = ThroughputState('ext-1', Point(0.0, 0.0), meas_backhaul=500.0, meas_fronthaul={'a': 80.0})
        assert e2e_rate(state, 'a') == 80.0
        state.meas_backhaul = 30.0
        assert e2e_rate(state, 'a') == 30.0

    def test_wired_node_passes_fronthaul(self):
        state = ThroughputState('mAP', Point(0.0, 0.0), meas_fronthaul={'a': 77.0})
        assert e2e_rate(state, 'a') == 77.0

    def test_zero_fronthaul(self):
        state = ThroughputState('ext-1', Point(0.0, 0.0), meas_backhaul=50.0, meas_fronthaul={'a': 0.0})
        assert e2e_rate(state, 'a') == 0.0

    def test_unassociated_user(self):
        state = ThroughputState('ext-1', Point(0.0, 0.0), meas_backhaul=50.0, meas_fronthaul={'a': 10.0})
        with pytest.raises(NoServingNodeError):
            e2e_rate(state, 'b')


class TestAssociate:
    def test_user_next_to_extender(self, small_scenario):
        assert associate(small_scenario) == {'u1': 'ext-1'}

    def test_ap_only(self, small_scenario):
        assert associate(small_scenario.without_extenders()) == {'u1': 'mAP'}

    def test_tie_goes_to_map(self, small_scenario):
        user = ManagedUser('u1', Point(1.0, 1.0), 100.0)
        scenario = small_scenario.with_users([user])
        assert associate(scenario) == {'u1': 'mAP'}


class TestPerceive:
    def test_bounds(self, small_scenario):
        snapshot = perceive(small_scenario, request_index=3)
        assert snapshot.request_index == 3
        user = snapshot.users['u1']
        ext = snapshot.nodes['ext-1']
        assert user.serving_node == 'ext-1'
        assert user.e2e_rate <= ext.meas_fronthaul['u1']
        assert user.e2e_rate <= ext.meas_backhaul
        assert 0.0 <= user.fitness <= 1.0
        assert ext.meas_backhaul <= ext.est_backhaul
        assert snapshot.nodes['mAP'].is_wired

    def test_deterministic(self, isolated_scenario):
        first = perceive(isolated_scenario).to_dict()
        assert perceive(isolated_scenario).to_dict() == first

    def test_extender_beats_ap_only_behind_walls(self, hidden_node_scenario):
        relayed = perceive(hidden_node_scenario.with_placement({'ext-1': Point(3.0, 5.0)}))
        direct = perceive(hidden_node_scenario.without_extenders())
        assert relayed.users['u1'].e2e_rate > direct.users['u1'].e2e_rate

    def test_hidden_nodes_cut_midway_backhaul(self, hidden_node_scenario):
        midway = perceive(hidden_node_scenario.with_placement({'ext-1': Point(5.0, 5.0)}))
        ext = midway.nodes['ext-1']
        assert ext.meas_backhaul == pytest.approx(0.1 * 263.3)
        assert midway.users['u1'].e2e_rate == pytest.approx(26.33)

    def test_relay_out_of_the_hidden_zone(self, hidden_node_scenario):
        relayed = perceive(hidden_node_scenario.with_placement({'ext-1': Point(3.0, 5.0)}))
        assert relayed.nodes['ext-1'].meas_backhaul == pytest.approx(520.0)
        assert relayed.users['u1'].e2e_rate == pytest.approx(87.8)


class TestUnsatisfiedUsers:
    def test_strictly_below_demand(self):
        snapshot = make_snapshot([100.0, 99.9, 150.0])
        assert unsatisfied_users(snapshot) == ['u2']

    def test_overall_fitness_is_mean(self):
        snapshot = make_snapshot([100.0, 50.0, 0.0])
        assert snapshot.overall_fitness() == pytest.approx(0.5)
        assert snapshot.outage_count() == 1
