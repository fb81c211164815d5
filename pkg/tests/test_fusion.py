import numpy as np
import pytest

from core.errors import ConfigurationError, DataError, PreconditionError
from core.fusion import (
    FrameTensor, FusionMode, fuse, fuse_aggregative, fuse_gradient, fuse_standard,
    restandardize, rows_per_clip,
)


def frame(values):
    return FrameTensor.from_image(np.asarray(values, dtype=float))


class TestAggregative:
    def test_single_frame(self):
        f = frame([[1, 2], [3, 4]])
        np.testing.assert_array_equal(fuse_aggregative([f]).values, f.values)

    def test_copies_scale(self):
        f = frame([[1, -2], [0.5, 4]])
        np.testing.assert_allclose(fuse_aggregative([f] * 5).values, 5 * f.values)

    def test_hand_sum(self):
        fused = fuse_aggregative([frame([[1, 2], [3, 4]]), frame([[10, 20], [30, 40]])])
        np.testing.assert_array_equal(fused.as_image(), [[11, 22], [33, 44]])

    def test_empty(self):
        with pytest.raises(PreconditionError):
            fuse_aggregative([])

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            fuse_aggregative([frame(np.zeros((2, 2))), frame(np.zeros((2, 3)))])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        frames = [frame(rng.random((4, 5))) for _ in range(6)]
        reference = fuse_aggregative(frames).values
        for order in ([5, 4, 3, 2, 1, 0], [2, 0, 5, 1, 4, 3], rng.permutation(6).tolist()):
            shuffled = fuse_aggregative([frames[i] for i in order]).values
            np.testing.assert_allclose(shuffled, reference, rtol=0, atol=1e-12)


class TestGradient:
    def test_identical_frames(self):
        f = frame([[1, 2], [3, 4]])
        (diff,) = fuse_gradient([f, f])
        assert np.all(diff.values == 0.0)

    def test_constant_motion(self):
        base = np.array([[0.0, 1.0], [2.0, 3.0]])
        delta = np.array([[0.5, -1.0], [0.25, 2.0]])
        diffs = fuse_gradient([frame(base), frame(base + delta), frame(base + 2 * delta)])
        assert len(diffs) == 2
        for diff in diffs:
            np.testing.assert_allclose(diff.as_image(), delta)

    def test_count(self):
        frames = [frame(np.full((2, 2), float(i))) for i in range(6)]
        assert len(fuse_gradient(frames)) == 5

    def test_order(self):
        frames = [frame([[0.0]]), frame([[1.0]]), frame([[3.0]])]
        assert [d.values[0] for d in fuse_gradient(frames)] == [1.0, 2.0]

    def test_differences_telescope(self):
        rng = np.random.default_rng(6)
        frames = [frame(rng.normal(scale=10.0, size=(3, 4))) for _ in range(6)]
        total = np.sum([diff.values for diff in fuse_gradient(frames)], axis=0)
        np.testing.assert_allclose(total, frames[-1].values - frames[0].values, rtol=0, atol=1e-12)

    def test_too_few(self):
        with pytest.raises(PreconditionError):
            fuse_gradient([frame([[1.0]])])


class TestStandard:
    def test_passthrough_bitwise(self):
        frames = [frame(np.random.default_rng(0).random((3, 3))) for _ in range(6)]
        out = fuse_standard(frames)
        assert len(out) == 6
        for a, b in zip(out, frames):
            assert a.values.tobytes() == b.values.tobytes()


class TestDispatch:
    @pytest.mark.parametrize('mode,expected', [
        (FusionMode.STANDARD, 6), (FusionMode.AGGREGATIVE, 1), (FusionMode.GRADIENT, 5),
    ])
    def test_rows_per_six_frame_clip(self, mode, expected):
        frames = [frame(np.full((2, 2), float(i))) for i in range(6)]
        assert len(fuse(frames, mode)) == expected
        assert rows_per_clip(mode, 6) == expected

    def test_parse(self):
        assert FusionMode.parse(' Gradient ') is FusionMode.GRADIENT
        with pytest.raises(ConfigurationError):
            FusionMode.parse('optical_flow')

    def test_tags_round_trip(self):
        for mode in FusionMode:
            assert FusionMode.from_tag(mode.tag) is mode


class TestRestandardize:
    def test_mean_frame_maps_to_zero(self):
        f = frame([[1.0, 2.0], [3.0, 4.0]])
        out = restandardize(f, f.values, np.full(4, 2.0))
        assert np.all(out.values == 0.0)

    def test_identity(self):
        f = frame([[1.0, -2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(restandardize(f, np.zeros(4), np.ones(4)).values, f.values)

    def test_zero_variance_maps_to_zero(self):
        f = frame([[5.0, 2.0]])
        out = restandardize(f, np.array([1.0, 1.0]), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(out.values, [0.0, 1.0])

    def test_training_set_statistics(self):
        rows = np.random.default_rng(3).normal(2.0, 3.0, size=(50, 6))
        rows[:, 2] = 7.0
        mean, std = rows.mean(axis=0), rows.std(axis=0)
        out = np.vstack([restandardize(FrameTensor(2, 3, r), mean, std).values for r in rows])
        varying = std > 0
        assert np.all(np.abs(out.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(out.std(axis=0)[varying] - 1.0) < 1e-6)

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            restandardize(frame([[1.0, 2.0]]), np.zeros(3), np.ones(3))


def test_frame_rejects_non_finite():
    with pytest.raises(DataError):
        FrameTensor(1, 2, np.array([1.0, np.nan]))
