import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from dq_handover.classifier import (
    ClassificationReport,
    ClassifierConfig,
    ClassifierState,
    ConditionModel,
    ConditionSet,
    EliminationEvent,
    Exhausted,
    Nominated,
    advance,
    classify_stream,
    closest_poses,
    condition_hyperparameters,
    mahalanobis,
    step_probability,
    trajectory_likelihood,
)
from dq_handover.classifier.similarity import (
    closest_indices,
    normalised_similarities,
)
from dq_handover.geometry import (
    DualQuaternionPose,
    UnitQuaternion,
    d_mag,
    from_pose,
)
from dq_handover.gp import GpModel
from dq_handover.helpers import (
    InsufficientData,
    RangeError,
)
from dq_handover.kernels import (
    Hyperparameters,
    k_mag,
    min_eigenvalue,
)

HP = Hyperparameters(sigma_f=1.0, length_scale=0.5, sigma_n=0.1)


@pytest.fixture
def condition_at(line_trajectory):
    """Factory of conditions of three parallel lines at a given height."""

    def make(label: str, y: float) -> ConditionModel:
        trajectories = [
            line_trajectory(
                [0.0, y + offset, 0.0],
                [0.3, y + offset, 0.0],
                label=label,
                name=f"{label}_{index}",
            )
            for index, offset in enumerate((0.0, 0.002, 0.004))
        ]
        return ConditionModel(label=label, trajectories=trajectories, hp=HP)

    return make


@pytest.fixture
def query_at(line_trajectory):
    def make(y: float, label: str = "a"):
        return line_trajectory(
            [0.0, y, 0.0], [0.3, y, 0.0], label=label, name="query"
        )

    return make


class TestMahalanobis:
    def test_single_reference(self, random_pose):
        hp = Hyperparameters(sigma_f=2.0, length_scale=1.0)
        for _ in range(20):
            dq, ref = random_pose(), random_pose()
            assert mahalanobis(dq, [ref], hp) == pytest.approx(
                d_mag(dq, ref) / 2.0, rel=1e-9
            )

    def test_floor(self):
        pose = from_pose(UnitQuaternion.identity(), [0.3, 0.1, 0.0])
        hp = Hyperparameters(sigma_f=1.0, length_scale=1.0)
        assert mahalanobis(pose, [pose], hp) == 1e-8
        assert mahalanobis(pose, [pose], hp, epsilon_floor=1e-3) == 1e-3

    def test_dense_oracle(self, rng, random_pose):
        hp = Hyperparameters(sigma_f=1.0, length_scale=0.3, sigma_n=0.5)
        for _ in range(20):
            refs = [random_pose() for _ in range(rng.integers(2, 16))]
            dq = random_pose()
            d = np.array([d_mag(dq, ref) for ref in refs])
            K = np.array([[k_mag(a, b, hp) for b in refs] for a in refs])
            K += hp.sigma_n**2 * np.eye(len(refs))
            assert mahalanobis(dq, refs, hp, eigen_floor=0.0) == (
                pytest.approx(np.sqrt(d @ np.linalg.solve(K, d)), rel=1e-9)
            )

    def test_duplicated_references_count_once(self):
        hp = Hyperparameters(sigma_f=2.0, length_scale=0.5)
        ref = from_pose(UnitQuaternion.identity(), [0.0, 0.0, 0.0])
        rotation = UnitQuaternion.from_rotvec([0.0, 0.0, 0.3])
        dq = from_pose(rotation, [0.1, 0.0, 0.0])
        assert mahalanobis(dq, [ref] * 4, hp) == pytest.approx(
            d_mag(dq, ref) / 2.0, rel=1e-9
        )

    def test_spectrum_above_floor_is_kept(self, rng, random_pose):
        hp = Hyperparameters(sigma_f=1.0, length_scale=0.05, sigma_n=0.2)
        for _ in range(10):
            refs = [random_pose() for _ in range(rng.integers(2, 10))]
            dq = random_pose()
            K = np.array([[k_mag(a, b, hp) for b in refs] for a in refs])
            K += hp.sigma_n**2 * np.eye(len(refs))
            floor = 0.9 * min_eigenvalue(K)
            d = np.array([d_mag(dq, ref) for ref in refs])
            assert mahalanobis(dq, refs, hp, eigen_floor=floor) == (
                pytest.approx(np.sqrt(d @ np.linalg.solve(K, d)), rel=1e-9)
            )

    def test_indefinite_references(self, pose_cloud):
        hp = Hyperparameters(sigma_f=1.0, length_scale=0.5)
        for _ in range(5):
            refs = pose_cloud(15)
            query = pose_cloud(1)[0]
            distance = mahalanobis(query, refs, hp)
            assert np.isfinite(distance)
            assert distance > 0.0

    def test_lifted_covariance_lowers_distance(self, pose_cloud):
        hp = Hyperparameters(sigma_f=1.0, length_scale=0.5, sigma_n=0.3)
        for _ in range(5):
            refs = pose_cloud(10)
            query = pose_cloud(1)[0]
            assert mahalanobis(query, refs, hp, eigen_floor=2.0) <= (
                mahalanobis(query, refs, hp, eigen_floor=0.5) * (1 + 1e-9)
            )

    def test_no_references(self, random_pose):
        with pytest.raises(ValueError):
            mahalanobis(random_pose(), [], HP)


class TestConditions:
    def test_too_few_trajectories(self, line_trajectory):
        with pytest.raises(InsufficientData):
            ConditionModel(
                label="a",
                trajectories=[line_trajectory([0, 0, 0], [1, 0, 0])],
                hp=HP,
            )

    def test_padding(self, line_trajectory):
        condition = ConditionModel(
            label="a",
            trajectories=[
                line_trajectory([0, 0, 0], [1, 0, 0], n=20),
                line_trajectory([0, 0, 0], [1, 0, 0], n=25),
            ],
            hp=HP,
        )
        assert condition.rotations.shape == (2, 25, 4)
        assert condition.positions.shape == (2, 25, 3)
        assert np.all(np.isnan(condition.positions[0, 20:]))
        assert not np.any(np.isnan(condition.positions[1]))

    def test_set(self, condition_at):
        conditions = ConditionSet.from_models(
            [condition_at("b", 0.5), condition_at("a", 0.0)]
        )
        assert conditions.labels == ["a", "b"]
        with pytest.raises(TypeError):
            conditions["c"] = "not a condition"
        with pytest.raises(KeyError):
            conditions["c"] = condition_at("a", 0.0)
        with pytest.raises(ValueError):
            ConditionSet.from_models([condition_at("a", 0.0)] * 2)

    def test_hyperparameters_from_gp(self):
        hps = [
            Hyperparameters(sigma_f=f, length_scale=l, sigma_n=n)
            for f, l, n in [(1.0, 0.1, 0.5), (4.0, 0.4, 0.5)] * 3
        ]
        gp = GpModel.build([DualQuaternionPose.identity()], np.zeros(6), hps)
        hp = condition_hyperparameters(gp)
        assert hp.sigma_f == pytest.approx(2.0)
        assert hp.length_scale == pytest.approx(0.2)
        assert hp.sigma_n == 0.0

    def test_single_reference_distance_is_exact(self):
        hps = [
            Hyperparameters(sigma_f=1.0, length_scale=0.2, sigma_n=1e-6)
        ] * 6
        gp = GpModel.build([DualQuaternionPose.identity()], np.zeros(6), hps)
        hp = condition_hyperparameters(gp)
        ref = from_pose(UnitQuaternion.identity(), [0.0, 0.0, 0.0])
        dq = from_pose(UnitQuaternion.identity(), [0.4, 0.0, 0.0])
        assert mahalanobis(dq, [ref], hp) == pytest.approx(0.4, abs=1e-12)


class TestClosestPoses:
    def test_matches_sample(self, condition_at, query_at):
        condition = condition_at("a", 0.0)
        query = query_at(0.0).pose(10)
        assert_allclose(closest_indices(query, condition), [10, 10, 10])
        for pose, trajectory in zip(
            closest_poses(query, condition), condition.trajectories
        ):
            assert pose == trajectory.pose(10)

    def test_ignores_padding(self, line_trajectory):
        condition = ConditionModel(
            label="a",
            trajectories=[
                line_trajectory([0, 0, 0], [1, 0, 0], n=11),
                line_trajectory([0, 0, 0], [2, 0, 0], n=21),
            ],
            hp=HP,
        )
        query = from_pose(UnitQuaternion.identity(), [5.0, 0.0, 0.0])
        assert_allclose(closest_indices(query, condition), [10, 20])

    def test_earliest_on_ties(self, line_trajectory):
        condition = ConditionModel(
            label="a",
            trajectories=[
                line_trajectory([1, 0, 0], [-1, 0, 0], n=3),
                line_trajectory([1, 0, 0], [-1, 0, 0], n=3),
            ],
            hp=HP,
        )
        query = from_pose(UnitQuaternion.identity(), [0.5, 0.0, 0.0])
        assert_allclose(closest_indices(query, condition), [0, 0])
        query = from_pose(UnitQuaternion.identity(), [-0.5, 0.0, 0.0])
        assert_allclose(closest_indices(query, condition), [1, 1])


class TestStepProbability:
    def test_sums_to_one(self, condition_at, query_at):
        conditions = [
            condition_at(label, y)
            for label, y in [("a", 0.0), ("b", 0.5), ("c", 2.0)]
        ]
        for pose in query_at(0.3).poses:
            probabilities = step_probability(pose, conditions)
            assert list(probabilities) == ["a", "b", "c"]
            assert sum(probabilities.values()) == pytest.approx(1.0, abs=1e-12)
            assert all(0.0 < p < 1.0 for p in probabilities.values())

    def test_closest_condition_wins(self, condition_at, query_at):
        conditions = [condition_at("a", 0.0), condition_at("b", 1.0)]
        probabilities = step_probability(query_at(0.0).pose(0), conditions)
        assert probabilities["a"] > 0.95

    def test_single_condition(self, condition_at, random_pose):
        assert step_probability(random_pose(), [condition_at("a", 0.0)]) == {
            "a": 1.0
        }

    def test_no_condition(self, random_pose):
        with pytest.raises(ValueError):
            step_probability(random_pose(), [])

    def test_scale_invariance(self, rng):
        distances = rng.uniform(0.1, 5.0, size=6)
        assert_allclose(
            normalised_similarities(distances),
            normalised_similarities(7.5 * distances),
            rtol=1e-12,
        )


class TestTrajectoryLikelihood:
    def test_constant(self):
        assert trajectory_likelihood([0.5] * 10, 1, 10) == pytest.approx(5.0)

    def test_single_step(self):
        assert trajectory_likelihood([0.2, 0.3, 0.4], 2, 2) == (
            pytest.approx(0.3)
        )

    def test_equals_sum(self, rng):
        trace = rng.uniform(size=30)
        assert trajectory_likelihood(trace, 4, 17) == pytest.approx(
            trace[3:17].sum()
        )

    def test_trapezoid_relations(self, rng):
        trace = rng.uniform(size=20)
        a, b = 3, 15
        window = trace[a - 1 : b]
        likelihood = trajectory_likelihood(trace, a, b)
        standard = likelihood - (window[0] + window[-1]) / 2.0
        assert standard == pytest.approx(trapezoid(window))
        assert standard - window[:-1].sum() == pytest.approx(
            (window[-1] - window[0]) / 2.0
        )

    @pytest.mark.parametrize("steps", [(0, 3), (3, 2), (1, 11)])
    def test_range(self, steps):
        with pytest.raises(RangeError):
            trajectory_likelihood([0.1] * 10, *steps)


class TestClassifierConfig:
    def test_defaults(self):
        cfg = ClassifierConfig()
        assert cfg.window_m == 40
        assert cfg.win_nominate == pytest.approx(18.0)
        assert cfg.win_eliminate == pytest.approx(1.6)
        cfg.check(10)

    def test_check_two_conditions(self):
        with pytest.raises(ValueError):
            ClassifierConfig().check(2)
        ClassifierConfig(abs_nominate=0.9, window_m=10, win_nominate=8).check(
            2
        )

    def test_two_condition_defaults(self):
        cfg = ClassifierConfig.for_conditions(2)
        assert cfg.abs_nominate == pytest.approx(0.75)
        assert cfg.abs_eliminate == pytest.approx(0.02)
        assert cfg.win_nominate == pytest.approx(30.0)
        assert cfg.win_eliminate == pytest.approx(1.6)
        cfg.check(2)

    def test_ten_condition_defaults(self):
        cfg = ClassifierConfig.for_conditions(10)
        assert cfg == ClassifierConfig()

    def test_many_condition_defaults(self):
        cfg = ClassifierConfig.for_conditions(60, window_m=20)
        assert cfg.abs_nominate == pytest.approx(0.5)
        assert cfg.abs_eliminate == pytest.approx(0.2 / 60)
        assert cfg.win_nominate == pytest.approx(9.0)
        assert cfg.win_eliminate == pytest.approx(20 * 0.4 / 60)
        cfg.check(60)

    def test_explicit_thresholds_win(self):
        cfg = ClassifierConfig.for_conditions(
            2, abs_nominate=0.9, abs_eliminate=None, eigen_floor=0.5
        )
        assert cfg.abs_nominate == 0.9
        assert cfg.abs_eliminate == pytest.approx(0.02)
        assert cfg.eigen_floor == 0.5
        with pytest.raises(ValueError):
            ClassifierConfig.for_conditions(2, abs_nominate=0.5)
        with pytest.raises(ValueError):
            ClassifierConfig.for_conditions(1)

    def test_window_check(self):
        with pytest.raises(ValueError):
            ClassifierConfig(window_m=10, win_nominate=2.0).check(4)

    @pytest.mark.parametrize(
        "values",
        [
            {"abs_nominate": 0.02},
            {"abs_nominate": 1.0},
            {"window_m": 0},
            {"win_nominate": 1.0, "win_eliminate": 2.0},
            {"epsilon_floor": 0.0},
            {"eigen_floor": -1.0},
        ],
    )
    def test_invalid(self, values):
        with pytest.raises(ValueError):
            ClassifierConfig(**values)


CFG = ClassifierConfig(
    abs_nominate=0.9,
    abs_eliminate=0.02,
    window_m=5,
    win_nominate=4.0,
    win_eliminate=0.5,
)


class TestAdvance:
    def test_absolute_nomination(self, condition_at, query_at):
        conditions = [condition_at("a", 0.0), condition_at("b", 1.0)]
        report = classify_stream(query_at(0.0), conditions, CFG)
        assert report.nominated == "a"
        assert report.nomination_step == 1
        assert report.nomination_rule == "absolute"
        assert report.correct
        assert report.steps_observed == 1
        assert report.nomination_fraction == pytest.approx(1 / 30)

    def test_window_nomination(self, condition_at, query_at):
        cfg = ClassifierConfig(
            abs_nominate=0.9, window_m=5, win_nominate=3.0, win_eliminate=0.5
        )
        conditions = [condition_at("a", 0.0), condition_at("b", 0.5)]
        report = classify_stream(query_at(0.1), conditions, cfg)
        assert report.nominated == "a"
        assert report.nomination_step == 5
        assert report.nomination_rule == "window"
        assert report.eliminations == []

    def test_last_condition(self, condition_at, query_at):
        cfg = ClassifierConfig(
            abs_nominate=0.995, window_m=5, win_nominate=4.0, win_eliminate=0.5
        )
        report = classify_stream(
            query_at(0.25),
            [condition_at("a", 0.0), condition_at("c", 20.0)],
            cfg,
        )
        assert report.nominated == "a"
        assert report.nomination_step == 1
        assert report.nomination_rule == "last"
        assert report.eliminations == [
            EliminationEvent(label="c", step=1, rule="absolute")
        ]

    def test_exhausted(self, condition_at, query_at):
        conditions = [
            condition_at("a", 0.0),
            condition_at("b", 0.5),
            condition_at("c", 20.0),
        ]
        report = classify_stream(query_at(0.25), conditions, CFG)
        assert report.nominated is None
        assert report.nomination_fraction is None
        assert not report.correct
        assert report.steps_observed == 30
        assert report.eliminations == [
            EliminationEvent(label="c", step=1, rule="absolute")
        ]
        assert not np.isnan(report.traces["c"][0])
        assert np.all(np.isnan(report.traces["c"][1:]))
        for index in range(1, 30):
            assert report.traces["a"][index] + report.traces["b"][
                index
            ] == pytest.approx(1.0, abs=1e-12)

    def test_training_trajectory_is_nominated(self, condition_at):
        conditions = [condition_at("a", 0.0), condition_at("b", 0.5)]
        for condition in conditions:
            for trajectory in condition.trajectories:
                report = classify_stream(trajectory, conditions)
                assert report.nominated == condition.label
                assert report.correct
                assert report.nomination_step == 1

    def test_ties_go_to_first_label(self, line_trajectory):
        trajectories = [
            line_trajectory([0, 0, 0], [1, 0, 0]),
            line_trajectory([0, 0.01, 0], [1, 0.01, 0]),
        ]
        conditions = ConditionSet.from_models(
            [
                ConditionModel(label=label, trajectories=trajectories, hp=HP)
                for label in ("b", "a")
            ]
        )
        cfg = ClassifierConfig(abs_nominate=0.5)
        state = ClassifierState.start(conditions.labels)
        pose = line_trajectory([0, 0.5, 0], [1, 0.5, 0]).pose(0)
        advance(state, pose, conditions, cfg)
        assert state.outcome == Nominated("a", 1, "absolute")

    def test_terminated(self, condition_at, query_at):
        conditions = ConditionSet.from_models(
            [condition_at("a", 0.0), condition_at("b", 1.0)]
        )
        state = ClassifierState.start(conditions.labels)
        pose = query_at(0.0).pose(0)
        advance(state, pose, conditions, CFG)
        assert state.terminated
        with pytest.raises(ValueError):
            advance(state, pose, conditions, CFG)

    def test_finish(self):
        state = ClassifierState.start(["a", "b"])
        state.finish()
        assert state.outcome == Exhausted(0)

    def test_needs_two_conditions(self, condition_at, query_at):
        with pytest.raises(ValueError):
            classify_stream(query_at(0.0), [condition_at("a", 0.0)], CFG)

    def test_duplicate_labels(self):
        with pytest.raises(ValueError):
            ClassifierState.start(["a", "a"])


class TestReport:
    @pytest.fixture
    def report(self) -> ClassificationReport:
        return ClassificationReport(
            name="run_1",
            label="a",
            n_steps=4,
            nominated="a",
            nomination_step=3,
            nomination_rule="window",
            eliminations=[EliminationEvent(label="c", step=2, rule="window")],
            traces={
                "a": [0.4, 0.6, 0.7],
                "b": [0.35, 0.3, 0.3],
                "c": [0.25, 0.1, np.nan],
            },
        )

    def test_to_dict(self, report):
        data = json.loads(report.to_json())
        assert data["correct"] is True
        assert data["nomination_fraction"] == pytest.approx(0.75)
        assert data["traces"]["c"] == [0.25, 0.1, None]
        assert data["eliminations"] == [
            {"label": "c", "step": 2, "rule": "window"}
        ]
        assert list(data) == sorted(data)

    def test_write_traces(self, tmp_path, report):
        path = report.write_traces(tmp_path / "traces.csv")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["step", "a", "b", "c"]
        assert len(rows) == 4
        assert rows[3] == ["3", "0.7", "0.3", ""]
