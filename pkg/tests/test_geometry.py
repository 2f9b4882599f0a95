import numpy as np
import pytest
from numpy.testing import (
    assert_allclose,
    assert_array_equal,
)

from dq_handover.geometry import (
    DualQuaternionPose,
    TangentVelocity,
    UnitQuaternion,
    central_project,
    d_arc,
    d_arc_many,
    d_mag,
    d_mag_many,
    dq_conjugate,
    dq_mul,
    from_pose,
    quat_conjugate,
    quat_mul,
    stack_poses,
    tangent_frame,
    tangent_log,
    to_pose,
)
from dq_handover.helpers import (
    AntipodalPair,
    DegenerateDualQuaternion,
    InvalidQuaternion,
    InvalidVelocity,
    sign_continuous,
)

IDENTITY = UnitQuaternion.identity()


def translation(p) -> DualQuaternionPose:
    return from_pose(IDENTITY, p)


class TestQuaternion:
    def test_identity_element(self, random_quaternion):
        q = random_quaternion().as_array()
        assert_allclose(quat_mul([1.0, 0.0, 0.0, 0.0], q), q)

    def test_basis_relation(self):
        assert_array_equal(
            quat_mul([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]),
            [0.0, 0.0, 0.0, 1.0],
        )

    def test_norm_is_multiplicative(self, rng):
        for _ in range(100):
            a, b = rng.normal(size=4), rng.normal(size=4)
            assert np.linalg.norm(quat_mul(a, b)) == pytest.approx(
                np.linalg.norm(a) * np.linalg.norm(b), rel=1e-12
            )

    def test_renormalised_on_construction(self):
        q = UnitQuaternion(2.0, 0.0, 0.0, 0.0)
        assert q.w == 1.0

    def test_zero_norm(self):
        with pytest.raises(InvalidQuaternion):
            UnitQuaternion(0.0, 0.0, 0.0, 0.0)

    def test_double_cover_equality(self, random_quaternion):
        q = random_quaternion()
        assert q == -q
        assert q != UnitQuaternion.from_rotvec([0.0, 0.0, 0.5])

    def test_compare_with_other_type(self):
        with pytest.raises(TypeError):
            IDENTITY == (1.0, 0.0, 0.0, 0.0)

    def test_sign_continuous(self, random_quaternion):
        sequence = np.array(
            [random_quaternion().as_array() for _ in range(20)]
        )
        signs = np.where(np.arange(20) % 3 == 0, -1.0, 1.0)
        flipped = sequence * signs[:, None]
        continuous = sign_continuous(flipped)
        assert continuous[0, 0] >= 0.0
        assert np.all(
            np.sum(continuous[1:] * continuous[:-1], axis=1) >= 0.0
        )
        assert_allclose(np.abs(continuous), np.abs(sequence))
        assert sign_continuous(np.empty((0, 4))).shape == (0, 4)


class TestTangentSpace:
    def test_identity_frame(self):
        assert_array_equal(tangent_frame(IDENTITY).B, np.eye(4)[:, 1:])

    def test_frame_orthonormal(self, random_quaternion):
        for _ in range(1000):
            q = random_quaternion()
            B = tangent_frame(q).B
            assert_allclose(B.T @ B, np.eye(3), atol=1e-12)
            assert_allclose(B.T @ q.as_array(), np.zeros(3), atol=1e-12)

    def test_frame_of_negated_quaternion(self, random_quaternion):
        q = random_quaternion()
        B = tangent_frame(q).B
        B_neg = tangent_frame(-q).B
        assert_allclose(B @ B.T, B_neg @ B_neg.T, atol=1e-12)

    def test_project_zero(self, random_quaternion):
        q = random_quaternion()
        assert central_project(q, np.zeros(3)) == q

    def test_project_known_angle(self):
        alpha = 0.4
        projected = central_project(IDENTITY, [np.tan(alpha), 0.0, 0.0])
        assert_allclose(
            projected.as_array(),
            [np.cos(alpha), np.sin(alpha), 0.0, 0.0],
            atol=1e-12,
        )

    def test_project_hemisphere(self, rng, random_quaternion):
        for _ in range(100):
            q = random_quaternion()
            v = rng.normal(scale=5.0, size=3)
            assert np.dot(central_project(q, v).as_array(), q.as_array()) > 0

    def test_log_of_self(self, random_quaternion):
        q = random_quaternion()
        assert_allclose(tangent_log(q, q), np.zeros(3), atol=1e-12)

    def test_log_known_angle(self):
        q_next = UnitQuaternion(np.cos(0.3), np.sin(0.3), 0.0, 0.0)
        assert_allclose(
            tangent_log(IDENTITY, q_next), [np.tan(0.3), 0.0, 0.0]
        )

    def test_log_round_trip(self, rng, random_quaternion):
        checked = 0
        while checked < 200:
            q, q_next = random_quaternion(), random_quaternion()
            if abs(np.dot(q.as_array(), q_next.as_array())) <= 0.1:
                continue
            v = tangent_log(q, q_next)
            assert_allclose(
                np.abs(
                    np.dot(central_project(q, v).as_array(), q_next.as_array())
                ),
                1.0,
                atol=1e-9,
            )
            checked += 1

    def test_log_sign_insensitive(self, random_quaternion):
        q = random_quaternion()
        q_next = central_project(q, [0.1, -0.2, 0.05])
        assert_allclose(tangent_log(q, q_next), tangent_log(q, -q_next))

    def test_antipodal(self):
        with pytest.raises(AntipodalPair):
            tangent_log(IDENTITY, UnitQuaternion(0.0, 1.0, 0.0, 0.0))


class TestArcDistance:
    def test_zero(self, random_quaternion):
        q = random_quaternion()
        assert d_arc(q, q) == pytest.approx(0.0, abs=1e-7)
        assert d_arc(q, -q) == pytest.approx(0.0, abs=1e-7)

    def test_quarter_turn(self):
        q = UnitQuaternion(np.cos(np.pi / 4), np.sin(np.pi / 4), 0.0, 0.0)
        assert d_arc(IDENTITY, q) == pytest.approx(np.pi / 4)

    def test_metric_axioms(self, random_quaternion):
        for _ in range(1000):
            a, b, c = (
                random_quaternion(),
                random_quaternion(),
                random_quaternion(),
            )
            ab, bc, ac = d_arc(a, b), d_arc(b, c), d_arc(a, c)
            assert 0.0 <= ab <= np.pi / 2
            assert ab == pytest.approx(d_arc(b, a), abs=1e-12)
            assert ac <= ab + bc + 1e-12

    def test_many(self, random_quaternion):
        q = random_quaternion()
        others = [random_quaternion() for _ in range(10)]
        assert_allclose(
            d_arc_many(q, [o.as_array() for o in others]),
            [d_arc(q, o) for o in others],
        )


class TestDualQuaternion:
    def test_from_pose_identity(self):
        assert_array_equal(
            from_pose(IDENTITY, np.zeros(3)).as_array(),
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        )

    def test_from_pose_dual_part_is_half_translation(self):
        pose = translation([2.0, 0.0, 0.0])
        assert_array_equal(pose.q_re.as_array(), [1.0, 0.0, 0.0, 0.0])
        assert_array_equal(pose.q_du, [0.0, 1.0, 0.0, 0.0])

    def test_round_trip(self):
        q = UnitQuaternion.from_rotvec([0.0, 0.0, np.pi / 2])
        rotation, position = to_pose(from_pose(q, [1.0, 2.0, 3.0]))
        assert rotation == q
        assert_allclose(position, [1.0, 2.0, 3.0], atol=1e-12)

    def test_random_round_trip(self, rng, random_quaternion):
        for _ in range(100):
            q, p = random_quaternion(), rng.normal(size=3)
            rotation, position = to_pose(from_pose(q, p))
            assert rotation == q
            assert_allclose(position, p, atol=1e-12)

    def test_recovered_translation_is_imaginary(self, random_pose):
        pose = random_pose()
        q_t = 2.0 * quat_mul(pose.q_du, quat_conjugate(pose.q_re.as_array()))
        assert abs(q_t[0]) < 1e-9

    def test_to_pose_from_components(self):
        rotation, position = to_pose([2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0])
        assert rotation == IDENTITY
        assert_allclose(position, [2.0, 0.0, 0.0])

    def test_canonical_hemisphere(self, rng, random_quaternion):
        q, p = random_quaternion(), rng.normal(size=3)
        pose = from_pose(q, p)
        flipped = from_pose(-q, p)
        assert pose.q_re.w >= 0.0
        assert flipped == pose
        assert_allclose(flipped.as_array(), pose.as_array())

    def test_unit_constraint(self, random_pose):
        for _ in range(100):
            pose = random_pose()
            assert abs(np.dot(pose.q_re.as_array(), pose.q_du)) < 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateDualQuaternion):
            DualQuaternionPose.from_array(np.zeros(8))

    def test_compose_identity(self, random_pose):
        pose = random_pose()
        assert dq_mul(DualQuaternionPose.identity(), pose) == pose

    def test_compose_translations(self):
        composed = dq_mul(translation([1.0, 2.0, 0.0]), translation([0, 0, 3]))
        assert composed == translation([1.0, 2.0, 3.0])

    def test_compose_matches_matrices(self, random_pose):
        for _ in range(50):
            a, b = random_pose(), random_pose()
            assert_allclose(
                dq_mul(a, b).as_matrix(),
                a.as_matrix() @ b.as_matrix(),
                atol=1e-12,
            )

    def test_conjugate(self, random_pose):
        pose = random_pose()
        identity = DualQuaternionPose.identity()
        assert dq_conjugate(identity) == identity
        assert dq_conjugate(dq_conjugate(pose)) == pose
        assert dq_mul(dq_conjugate(pose), pose) == identity

    def test_position(self, rng, random_quaternion):
        p = rng.normal(size=3)
        assert_allclose(from_pose(random_quaternion(), p).position, p)


class TestPoseDistance:
    def test_zero(self, random_pose):
        pose = random_pose()
        assert d_mag(pose, pose) == pytest.approx(0.0, abs=1e-7)

    def test_pure_translation(self):
        t = [0.3, -0.4, 1.2]
        assert d_mag(DualQuaternionPose.identity(), translation(t)) == (
            pytest.approx(1.3)
        )

    def test_half_turn(self):
        half_turn = from_pose(
            UnitQuaternion.from_rotvec([0.0, 0.0, np.pi]), np.zeros(3)
        )
        assert d_mag(DualQuaternionPose.identity(), half_turn) == (
            pytest.approx(np.pi / 2)
        )

    def test_symmetry(self, random_pose):
        for _ in range(100):
            a, b = random_pose(), random_pose()
            assert d_mag(a, b) == pytest.approx(d_mag(b, a), abs=1e-9)

    def test_left_invariance(self, random_pose):
        for _ in range(100):
            g, a, b = random_pose(), random_pose(), random_pose()
            assert d_mag(dq_mul(g, a), dq_mul(g, b)) == pytest.approx(
                d_mag(a, b), abs=1e-9
            )

    def test_many(self, random_pose):
        pose = random_pose()
        others = [random_pose() for _ in range(20)]
        rotations, positions = stack_poses(others)
        assert_allclose(
            d_mag_many(pose, rotations, positions),
            [d_mag(pose, other) for other in others],
            atol=1e-9,
        )

    def test_many_padding(self, random_pose):
        rotations, positions = stack_poses([random_pose()])
        rotations = np.vstack([rotations, np.full((1, 4), np.nan)])
        positions = np.vstack([positions, np.full((1, 3), np.nan)])
        distances = d_mag_many(random_pose(), rotations, positions)
        assert np.isfinite(distances[0])
        assert np.isnan(distances[1])


class TestTangentVelocity:
    def test_array_round_trip(self):
        velocity = TangentVelocity.from_array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
        assert_array_equal(velocity.v_ts, [0.1, 0.2, 0.3])
        assert_array_equal(velocity.p_dot, [0.4, 0.5, 0.6])

    @pytest.mark.parametrize(
        "values",
        [
            [np.nan, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 20.0, 0.0, 0.0],
        ],
    )
    def test_invalid(self, values):
        with pytest.raises(InvalidVelocity):
            TangentVelocity.from_array(values)
