import math

import numpy as np
import pytest

from app.learning import (
    delta_omega,
    initial_map,
    points_centroid,
    region_values,
    update_backhaul,
    update_fronthaul,
    update_omega,
)
from app.models.geometry import FloorPlan, Point
from app.models.learning import ExplorationState, LearnedThroughputMap, Measurement, Provenance


def blank_map(plan, value=500.0):
    candidates = plan.candidates()
    return LearnedThroughputMap(candidates, np.full(len(candidates), value), np.full(len(candidates), value))


class TestRegionValues:
    @pytest.fixture
    def line(self):
        return [Point(float(x), 0.0) for x in range(-2, 10)] + [Point(2.0, 3.0), Point(2.0, 2.0)]

    def test_regions_along_axis(self, line):
        measurement = Measurement(Point(4.0, 0.0), 80.0, Point(0.0, 0.0))
        covered, values = region_values(line, measurement, grid_step=1.0, half_width=2.0)
        by_point = dict(zip(line, zip(covered, values)))

        assert by_point[Point(-1.0, 0.0)] == (False, 0.0)
        assert by_point[Point(0.0, 0.0)] == (True, 80.0)
        assert by_point[Point(2.0, 0.0)] == (True, 80.0)
        assert by_point[Point(4.0, 0.0)] == (True, 80.0)
        assert by_point[Point(5.0, 0.0)] == (True, 80.0)
        assert by_point[Point(6.0, 0.0)] == (True, 40.0)
        assert by_point[Point(8.0, 0.0)] == (True, 20.0)
        assert by_point[Point(2.0, 2.0)] == (True, 80.0)
        assert by_point[Point(2.0, 3.0)] == (False, 0.0)

    def test_zero_length_axis_covers_only_the_cell(self, line):
        measurement = Measurement(Point(2.0, 0.0), 55.0, Point(2.0, 0.0))
        covered, values = region_values(line, measurement, grid_step=1.0, half_width=2.0)
        assert covered.sum() == 1
        assert values[line.index(Point(2.0, 0.0))] == 55.0

    def test_decay_is_nonincreasing_along_the_ray(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            anchor = Point(*rng.uniform(0, 20, 2))
            target = Point(*rng.uniform(0, 20, 2))
            length = anchor.distance_to(target)
            if length < 1e-6:
                continue
            ux, uy = (target.x - anchor.x) / length, (target.y - anchor.y) / length
            steps = np.sort(rng.uniform(length + 1e-6, length + 30.0, 12))
            ray = [Point(anchor.x + s * ux, anchor.y + s * uy) for s in steps]
            step = float(rng.uniform(0.25, 2.0))
            covered, values = region_values(ray, Measurement(target, float(rng.uniform(1, 900)), anchor),
                                            grid_step=step, half_width=2.0)
            assert covered.all()
            assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


class TestUpdateBackhaul:
    def test_visited_cell_takes_the_measurement(self):
        rng = np.random.default_rng(11)
        plan = FloorPlan(10.0, 10.0)
        candidates = plan.candidates()
        for _ in range(1000):
            learned = blank_map(plan, float(rng.uniform(0, 900)))
            ap = Point(*rng.uniform(0, 10, 2))
            visits = [candidates[int(i)] for i in rng.choice(len(candidates), size=int(rng.integers(1, 5)),
                                                            replace=False)]
            values = rng.uniform(0, 900, len(visits))
            for location, value in zip(visits, values):
                learned = update_backhaul(learned, location, float(value), ap, grid_step=1.0, half_width=2.0)
            for location, value in zip(visits, values):
                i = learned.index_of(location)
                assert learned.backhaul[i] == pytest.approx(float(value))
                assert learned.backhaul_provenance[i] == Provenance.REGION

    def test_idempotent(self):
        rng = np.random.default_rng(13)
        plan = FloorPlan(8.0, 8.0)
        candidates = plan.candidates()
        for _ in range(1000):
            learned = blank_map(plan)
            location = candidates[int(rng.integers(len(candidates)))]
            ap = Point(*rng.uniform(0, 8, 2))
            value = float(rng.uniform(0, 900))
            once = update_backhaul(learned, location, value, ap, 1.0, 2.0)
            twice = update_backhaul(once, location, value, ap, 1.0, 2.0)
            np.testing.assert_array_equal(once.backhaul, twice.backhaul)
            assert once.backhaul_provenance == twice.backhaul_provenance

    def test_does_not_mutate_input(self):
        plan = FloorPlan(4.0, 4.0)
        learned = blank_map(plan)
        update_backhaul(learned, Point(2.0, 2.0), 10.0, Point(0.0, 0.0), 1.0, 2.0)
        assert learned.backhaul_measurements == {}
        assert (learned.backhaul == 500.0).all()

    def test_untouched_cells_keep_prior(self):
        plan = FloorPlan(10.0, 10.0)
        learned = update_backhaul(blank_map(plan), Point(4.0, 0.0), 80.0, Point(0.0, 0.0), 1.0, 2.0)
        i = learned.index_of(Point(0.0, 9.0))
        assert learned.backhaul[i] == 500.0
        assert learned.provenance(i) == Provenance.DISTANCE

    def test_nearest_measurement_wins_on_overlap(self):
        plan = FloorPlan(10.0, 0.0)
        learned = blank_map(plan)
        learned = update_backhaul(learned, Point(4.0, 0.0), 100.0, Point(0.0, 0.0), 1.0, 2.0)
        learned = update_backhaul(learned, Point(8.0, 0.0), 40.0, Point(0.0, 0.0), 1.0, 2.0)
        estimates = dict(zip(learned.candidates, learned.backhaul))
        assert estimates[Point(5.0, 0.0)] == 100.0
        assert estimates[Point(7.0, 0.0)] == 40.0
        assert estimates[Point(2.0, 0.0)] == 100.0


class TestUpdateFronthaul:
    @pytest.fixture
    def learned(self):
        return blank_map(FloorPlan(10.0, 10.0))

    def test_anchored_at_user_centroid(self, learned):
        users = [Point(8.0, 2.0), Point(8.0, 6.0)]
        updated = update_fronthaul(learned, Point(4.0, 4.0), 120.0, users, 300.0, 100.0, 1.0, 2.0)
        measurement = updated.fronthaul_measurements[Point(4.0, 4.0)]
        assert measurement.anchor == Point(8.0, 4.0)
        assert updated.fronthaul[updated.index_of(Point(4.0, 4.0))] == 120.0

    def test_discarded_when_backhaul_is_the_bottleneck(self, learned):
        updated = update_fronthaul(learned, Point(4.0, 4.0), 120.0, [Point(8.0, 4.0)], 20.0, 100.0, 1.0, 2.0)
        assert updated is learned

    def test_kept_when_backhaul_meets_demand(self, learned):
        updated = update_fronthaul(learned, Point(4.0, 4.0), 300.0, [Point(8.0, 4.0)], 150.0, 100.0, 1.0, 2.0)
        assert Point(4.0, 4.0) in updated.fronthaul_measurements

    def test_discarded_without_users(self, learned):
        assert update_fronthaul(learned, Point(4.0, 4.0), 50.0, [], 300.0, 100.0, 1.0, 2.0) is learned

    def test_centroid(self):
        assert points_centroid([Point(0.0, 0.0), Point(2.0, 4.0)]) == Point(1.0, 2.0)


class TestUpdateOmega:
    def test_endpoints(self):
        assert delta_omega(0.0) == pytest.approx(1.0, abs=1e-9)
        assert delta_omega(1.0) == pytest.approx(2.0 - math.e, abs=1e-9)
        assert delta_omega(-1.0) == pytest.approx(2.0 - math.e, abs=1e-9)

    def test_first_update_pushes_towards_exploration(self):
        assert update_omega(ExplorationState(omega=0.5)) == pytest.approx(0.75, abs=1e-9)

    def test_full_change_pulls_to_minimum(self):
        state = ExplorationState(omega=0.1, previous_fitness=0.0, current_fitness=1.0)
        assert update_omega(state, 0.1, 1.0) == pytest.approx(0.1, abs=1e-9)

    def test_clamped(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            state = ExplorationState(float(rng.uniform(0.1, 1.0)), float(rng.uniform()), float(rng.uniform()))
            assert 0.1 <= update_omega(state, 0.1, 1.0) <= 1.0

    def test_monotone_drift_under_constant_change(self):
        rng = np.random.default_rng(19)
        for _ in range(1000):
            delta = float(rng.uniform(-1.0, 1.0))
            state = ExplorationState(float(rng.uniform(0.1, 1.0)), 0.0, delta)
            trajectory = [state.omega]
            for _ in range(8):
                state.omega = update_omega(state, 0.1, 1.0)
                trajectory.append(state.omega)
            steps = np.diff(trajectory)
            assert (steps >= -1e-12).all() or (steps <= 1e-12).all()


class TestInitialMap:
    def test_ignores_walls(self, isolated_scenario):
        extender = isolated_scenario.extenders[0]
        with_walls = initial_map(isolated_scenario, extender)
        bare = isolated_scenario.with_placement({})
        bare.plan = isolated_scenario.plan.without_walls()
        without_walls = initial_map(bare, extender)
        np.testing.assert_array_equal(with_walls.backhaul, without_walls.backhaul)
        np.testing.assert_array_equal(with_walls.fronthaul, without_walls.fronthaul)

    def test_fronthaul_only_where_the_relay_wins_the_user(self, small_scenario):
        learned = initial_map(small_scenario, small_scenario.extenders[0])
        assert learned.fronthaul[learned.index_of(Point(0.0, 0.0))] == 0.0
        assert learned.fronthaul[learned.index_of(Point(3.0, 3.0))] > 0.0
        assert learned.backhaul[learned.index_of(Point(1.0, 0.0))] > 0.0
        assert all(p == Provenance.DISTANCE for p in learned.backhaul_provenance)

    def test_users_restrict_the_sum(self, small_scenario):
        learned = initial_map(small_scenario, small_scenario.extenders[0], users=[])
        assert (learned.fronthaul == 0.0).all()

    def test_map_rows(self, small_scenario):
        rows = initial_map(small_scenario, small_scenario.extenders[0]).to_rows()
        assert len(rows) == 25
        assert set(rows[0]) == {'x', 'y', 'est_backhaul', 'est_fronthaul', 'provenance'}
        assert rows[0]['provenance'] == 'distance-based'
