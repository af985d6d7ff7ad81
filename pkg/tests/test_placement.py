import math
from dataclasses import replace

import numpy as np
import pytest

from app.exceptions import InstanceTooLargeError
from app.models.geometry import FloorPlan, Point, WallSegment
from app.models.learning import LearnedThroughputMap
from app.models.scenario import ManagedUser
from app.network_state import perceive
from app.placement import (
    check_constraints,
    combination_count,
    exhaustive_solve,
    exploitation_fitness,
    exploration_fitness,
    fitness_field,
    generate_action,
)


def random_map(rng, plan):
    candidates = plan.candidates()
    backhaul = rng.uniform(0, 900, len(candidates))
    fronthaul = rng.uniform(0, 900, len(candidates))
    return LearnedThroughputMap(candidates, backhaul, fronthaul)


def brute_force_products(learned, visited, omega, floor):
    products = []
    for i, point in enumerate(learned.candidates):
        exploit = min(learned.backhaul[i], learned.fronthaul[i])
        if visited:
            explore = min(math.log10(max(point.distance_to(v), floor, 1.0)) ** omega for v in visited)
        else:
            explore = 1.0
        products.append(exploit * explore)
    return products


class TestFitnessField:
    def test_exploitation_is_weaker_hop(self):
        plan = FloorPlan(1.0, 0.0)
        learned = LearnedThroughputMap(plan.candidates(), np.array([100.0, 20.0]), np.array([50.0, 70.0]))
        np.testing.assert_array_equal(exploitation_fitness(learned), [50.0, 20.0])

    def test_exploration_without_knowledge(self):
        candidates = FloorPlan(3.0, 3.0).candidates()
        np.testing.assert_array_equal(exploration_fitness(candidates, [], 0.5), np.ones(16))

    def test_exploration_values(self):
        candidates = [Point(0.0, 0.0), Point(10.0, 0.0), Point(0.5, 0.0)]
        values = exploration_fitness(candidates, [Point(0.0, 0.0)], 0.5, distance_floor=1.0)
        assert values[0] == 0.0
        assert values[1] == pytest.approx(1.0)
        assert values[2] == 0.0

    def test_field_rows(self):
        plan = FloorPlan(1.0, 0.0)
        learned = LearnedThroughputMap(plan.candidates(), np.array([100.0, 20.0]), np.array([50.0, 70.0]))
        field = fitness_field(learned, [Point(0.0, 0.0)], 1.0)
        rows = field.to_rows()
        assert rows[0] == {'x': 0.0, 'y': 0.0, 'F_R': 50.0, 'F_E': 0.0, 'product': 0.0}
        assert rows[1]['product'] == rows[1]['F_R'] * rows[1]['F_E']


class TestGenerateAction:
    def test_matches_brute_force_argmax(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            size = int(rng.integers(1, 10))
            plan = FloorPlan(float(size), float(rng.integers(0, 10)))
            learned = random_map(rng, plan)
            visited = [learned.candidates[int(i)]
                       for i in rng.choice(len(learned.candidates),
                                           size=min(int(rng.integers(0, 6)), len(learned.candidates)),
                                           replace=False)]
            omega = float(rng.uniform(0.1, 1.0))

            action = generate_action(learned, visited, omega, distance_floor=1.0)
            products = brute_force_products(learned, visited, omega, 1.0)
            best = max(products)
            if best <= 0.0:
                assert action.degenerate
                continue
            assert not action.degenerate
            assert products[action.index] == pytest.approx(best, rel=1e-12)
            assert action.location == learned.candidates[action.index]
            ranked = sorted(products, reverse=True)
            if len(ranked) == 1 or ranked[0] - ranked[1] > 1e-9 * ranked[0]:
                assert action.index == products.index(best)

    def test_ties_go_to_lowest_index(self):
        plan = FloorPlan(2.0, 0.0)
        learned = LearnedThroughputMap(plan.candidates(), np.full(3, 100.0), np.full(3, 100.0))
        assert generate_action(learned, [], 0.5).index == 0

    def test_never_picks_a_visited_cell_when_others_score(self):
        plan = FloorPlan(4.0, 4.0)
        learned = LearnedThroughputMap(plan.candidates(), np.full(25, 100.0), np.full(25, 100.0))
        visited = [Point(0.0, 0.0), Point(4.0, 4.0)]
        assert generate_action(learned, visited, 0.5).location not in visited

    def test_degenerate_falls_back_to_exploitation(self):
        plan = FloorPlan(1.0, 0.0)
        learned = LearnedThroughputMap(plan.candidates(), np.array([10.0, 90.0]), np.array([10.0, 90.0]))
        action = generate_action(learned, plan.candidates(), 0.5)
        assert action.degenerate
        assert action.location == Point(1.0, 0.0)
        assert action.fitness_field.combined.max() == 0.0

    def test_all_zero_exploitation(self):
        plan = FloorPlan(2.0, 0.0)
        learned = LearnedThroughputMap(plan.candidates(), np.zeros(3), np.zeros(3))
        action = generate_action(learned, [], 0.5)
        assert action.degenerate
        assert action.index == 0


class TestExhaustiveSolve:
    @pytest.fixture
    def room(self, small_scenario):
        return small_scenario

    def test_low_demand_needs_no_extender(self, room):
        scenario = room.with_users([ManagedUser('u1', Point(4.0, 4.0), 1.0)])
        result = exhaustive_solve(scenario, horizon=1)
        assert result.feasible
        assert result.objective == 0
        assert result.placements() == [[]]
        assert check_constraints(result) == []

    def test_infeasible_keeps_best_worst_fitness(self, room):
        scenario = room.with_users([ManagedUser('u1', Point(4.0, 4.0), 10_000.0)])
        result = exhaustive_solve(scenario, horizon=1)
        assert not result.feasible
        best = 0.0
        for point in scenario.plan.candidates():
            snapshot = perceive(scenario.with_placement({'ext-1': point}))
            best = max(best, snapshot.min_fitness())
        assert result.min_fitness() == pytest.approx(best)
        assert check_constraints(result) == []

    def test_constraints_hold_on_small_grids(self, room):
        for size in range(1, 5):
            plan = FloorPlan(float(size), float(size))
            ap = replace(room.ap, location=Point(0.0, 0.0))
            for demand in (50.0, 400.0, 5_000.0):
                user = ManagedUser('u1', Point(float(size), float(size)), demand)
                scenario = replace(room, plan=plan, ap=ap, users=[user])
                for horizon in (1, 2):
                    result = exhaustive_solve(scenario, horizon=horizon)
                    assert check_constraints(result) == []
                    assert result.deployed.shape == ((size + 1) ** 2, horizon)
                    assert result.deployed.sum(axis=0).max() <= 1

    def test_demand_schedule(self, room):
        schedule = [{'u1': 1.0}, {'u1': 1.0}]
        result = exhaustive_solve(room, horizon=2, demand_schedule=schedule)
        assert result.feasible
        assert result.objective == 0
        assert result.demands == schedule

    def test_demand_change_forces_one_move(self, room):
        walls = [WallSegment(Point(1.5, 0.0), Point(1.5, 3.0), 15.0),
                 WallSegment(Point(0.0, 1.5), Point(3.0, 1.5), 15.0)]
        users = [ManagedUser('a', Point(3.0, 0.0), 1.0), ManagedUser('b', Point(0.0, 3.0), 1.0)]
        scenario = replace(room, plan=FloorPlan(3.0, 3.0, walls), users=users)
        schedule = [{'a': 300.0, 'b': 1.0}, {'a': 1.0, 'b': 300.0}]
        result = exhaustive_solve(scenario, horizon=2, demand_schedule=schedule)
        assert len(result.candidates) == 16
        assert result.feasible
        assert result.objective == 1 + 2
        assert result.deployed.sum(axis=0).tolist() == [1, 1]
        assert result.repositioned.sum() == 2
        first, second = result.placements()
        assert first[0] in (Point(1.0, 0.0), Point(2.0, 0.0))
        assert second[0] in (Point(0.0, 1.0), Point(0.0, 2.0))
        assert check_constraints(result) == []

    def test_schedule_length_must_match(self, room):
        with pytest.raises(ValueError):
            exhaustive_solve(room, horizon=2, demand_schedule=[{'u1': 1.0}])

    def test_too_large(self, room):
        with pytest.raises(InstanceTooLargeError) as info:
            exhaustive_solve(room, horizon=3, combination_limit=100)
        assert info.value.combinations == 26 ** 3

    def test_relay_beats_hidden_midway(self, hidden_node_scenario):
        midway = perceive(hidden_node_scenario.with_placement({'ext-1': Point(5.0, 5.0)}))
        result = exhaustive_solve(hidden_node_scenario, horizon=1)
        best = result.rates[0]['u1']
        assert best >= 3.0 * midway.users['u1'].e2e_rate
        assert check_constraints(result) == []


class TestCheckConstraints:
    def test_flags_extender_count_and_repositions(self, small_scenario):
        result = exhaustive_solve(small_scenario.with_users([ManagedUser('u1', Point(4.0, 4.0), 1.0)]))
        result.deployed[[0, 1], 0] = 1
        assert 'N' in check_constraints(result, max_extenders=1)

        two = exhaustive_solve(small_scenario.with_users([ManagedUser('u1', Point(4.0, 4.0), 1.0)]), horizon=2)
        two.deployed[3, 1] = 1
        assert 'C1' in check_constraints(two)

    def test_flags_non_binary(self, small_scenario):
        result = exhaustive_solve(small_scenario.with_users([ManagedUser('u1', Point(4.0, 4.0), 1.0)]))
        result.deployed[0, 0] = 2
        assert 'C5' in check_constraints(result, max_extenders=3)


class TestCombinationCount:
    def test_counts(self):
        assert combination_count(25, 2) == 676
        assert combination_count(25, 1, max_extenders=2) == 1 + 25 + 300
        assert combination_count(9, 0) == 1
