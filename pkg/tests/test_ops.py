import numpy as np
import pytest

from uisearch.errors import OddSpatialDim, ShapeMismatch
from uisearch.nn import available_backends, ops, use_backend
from uisearch.nn.optim import Parameter, sgd_step

BACKENDS = available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    use_backend(request.param)
    yield request.param
    use_backend("auto")


class TestConv2d:
    def test_identity_kernel(self, backend):
        rng = np.random.default_rng(0)
        x = rng.random((1, 5, 5))
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 1] = 1.0
        assert np.allclose(ops.conv2d(x, w, np.zeros(1)), x)

    def test_zero_kernel_gives_bias(self, backend):
        x = np.ones((2, 4, 4))
        w = np.zeros((3, 2, 3, 3))
        b = np.array([1.5, -2.0, 0.25])
        y = ops.conv2d(x, w, b)
        assert np.allclose(y, b[:, None, None])

    def test_ones_kernel_window_sums(self, backend):
        x = np.ones((1, 4, 4))
        w = np.ones((1, 1, 3, 3))
        y = ops.conv2d(x, w, np.zeros(1))[0]
        assert y[0, 0] == 4 and y[0, 3] == 4 and y[3, 0] == 4 and y[3, 3] == 4
        assert y[0, 1] == 6 and y[1, 0] == 6 and y[2, 3] == 6
        assert y[1, 1] == 9 and y[2, 2] == 9

    def test_shape_mismatch(self, backend):
        with pytest.raises(ShapeMismatch):
            ops.conv2d(np.ones((2, 4, 4)), np.ones((1, 3, 3, 3)), np.zeros(1))

    def test_gradient_mass_of_bias_matches_upstream(self, backend):
        rng = np.random.default_rng(1)
        x = rng.random((2, 2, 4, 4))
        w = rng.random((3, 2, 3, 3))
        gy = rng.random((2, 3, 4, 4))
        _, _, gb = ops.conv2d_backward(x, w, gy)
        assert np.allclose(gb, gy.sum(axis=(0, 2, 3)))


class TestRelu:
    def test_non_negative_unchanged(self, backend):
        x = np.array([0.0, 1.0, 2.5])
        assert np.array_equal(ops.relu(x), x)

    def test_negative_zeroed_and_masked(self, backend):
        x = -np.ones((3, 3))
        assert np.all(ops.relu(x) == 0)
        assert np.all(ops.relu_backward(x, np.ones_like(x)) == 0)

    def test_zero_convention(self, backend):
        x = np.array([-1.0, 0.0, 2.0])
        assert np.array_equal(ops.relu(x), [0.0, 0.0, 2.0])
        g = ops.relu_backward(x, np.ones(3))
        assert np.array_equal(g, [0.0, 0.0, 1.0])


class TestMaxpool2:
    def test_constant_input_tie_routes_top_left(self, backend):
        x = np.ones((1, 4, 4))
        y = ops.maxpool2(x)
        assert np.all(y == 1)
        gx = ops.maxpool2_backward(x, np.ones((1, 2, 2)))
        expected = np.zeros((1, 4, 4))
        expected[0, ::2, ::2] = 1.0
        assert np.array_equal(gx, expected)

    def test_argmax_routing(self, backend):
        x = np.array([[[1.0, 2.0], [3.0, 4.0]]])
        assert ops.maxpool2(x)[0, 0, 0] == 4.0
        gx = ops.maxpool2_backward(x, np.full((1, 1, 1), 5.0))
        assert gx[0, 1, 1] == 5.0 and gx.sum() == 5.0

    def test_odd_dims_rejected(self, backend):
        with pytest.raises(OddSpatialDim):
            ops.maxpool2(np.ones((1, 3, 4)))

    def test_gradient_mass_conserved(self, backend):
        rng = np.random.default_rng(2)
        x = rng.random((2, 3, 8, 8))
        gy = rng.random((2, 3, 4, 4))
        gx = ops.maxpool2_backward(x, gy)
        assert np.isclose(gx.sum(), gy.sum())


class TestUpsample2:
    def test_replicates_single_value(self, backend):
        y = ops.upsample2(np.full((1, 1, 1), 3.25))
        assert y.shape == (1, 2, 2) and np.all(y == 3.25)

    def test_backward_sums_four(self, backend):
        gx = ops.upsample2_backward(np.ones((2, 4, 4)))
        assert np.all(gx == 4.0)

    def test_upsample_then_pool_is_identity(self, backend):
        rng = np.random.default_rng(3)
        x = rng.random((3, 5, 7))
        assert np.array_equal(ops.maxpool2(ops.upsample2(x)), x)

    def test_gradient_mass_conserved(self, backend):
        rng = np.random.default_rng(4)
        gy = rng.random((1, 2, 6, 6))
        assert np.isclose(ops.upsample2_backward(gy).sum(), gy.sum())


class TestFullyConnected:
    def test_identity(self, backend):
        x = np.array([1.0, -2.0, 3.0])
        y = ops.fully_connected(x, np.eye(3), np.zeros(3))
        assert np.array_equal(y, x)

    def test_zero_weights_give_bias(self, backend):
        b = np.array([4.0, 5.0])
        y = ops.fully_connected(np.ones(3), np.zeros((2, 3)), b)
        assert np.array_equal(y, b)

    def test_hand_multiply(self, backend):
        w = np.array([[1.0, 2.0], [3.0, 4.0]])
        y = ops.fully_connected(np.array([1.0, 1.0]), w, np.zeros(2))
        assert np.array_equal(y, [3.0, 7.0])

    def test_dim_mismatch(self, backend):
        with pytest.raises(ShapeMismatch):
            ops.fully_connected(np.ones(3), np.ones((2, 4)), np.zeros(2))


class TestMseLoss:
    def test_identical_inputs_zero(self):
        x = np.random.default_rng(5).random((4, 4))
        assert ops.mse_loss(x, x) == 0.0

    def test_unit_difference(self):
        assert ops.mse_loss(np.zeros(2), np.ones(2)) == 1.0

    def test_gradient_value(self):
        g = ops.mse_loss_backward(np.zeros(2), np.ones(2))
        assert np.array_equal(g, [1.0, 1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ops.mse_loss(np.zeros(2), np.zeros(3))


class TestDiceCoef:
    def test_perfect_overlap(self):
        x = np.array([1.0, 1.0, 0.0, 1.0])
        assert abs(ops.dice_coef(x, x) - 1.0) < 1e-6

    def test_disjoint_supports_near_zero(self):
        assert ops.dice_coef(np.array([1.0, 0.0]), np.array([0.0, 1.0])) < 1e-6

    def test_half_overlap_fixture_exact(self):
        value = ops.dice_coef(np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 1.0]))
        assert abs(value - 0.5) < 1e-9

    def test_symmetric(self):
        rng = np.random.default_rng(6)
        x, y = rng.random(10), rng.random(10)
        assert ops.dice_coef(x, y) == ops.dice_coef(y, x)

    def test_bounded_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            x, y = rng.random(8), rng.random(8)
            assert 0.0 <= ops.dice_coef(x, y) <= 1.0 + 1e-12

    def test_empty_vs_empty_is_one(self):
        assert ops.dice_coef(np.zeros(4), np.zeros(4)) == 1.0


class TestSgdStep:
    def test_zero_gradients_no_change(self):
        p = Parameter("p", np.array([1.0, 2.0]))
        sgd_step([p], lr=0.5)
        assert np.array_equal(p.value, [1.0, 2.0])

    def test_update_rule(self):
        p = Parameter("p", np.array([1.0]))
        p.accumulate(np.array([2.0]))
        sgd_step([p], lr=0.5)
        assert np.array_equal(p.value, [0.0])
        assert np.array_equal(p.grad, [0.0])

    def test_two_steps_same_grad(self):
        p = Parameter("p", np.array([1.0]))
        for _ in range(2):
            p.accumulate(np.array([3.0]))
            sgd_step([p], lr=0.1)
        assert np.isclose(p.value[0], 1.0 - 2 * 0.1 * 3.0)

    def test_accumulate_shape_checked(self):
        p = Parameter("p", np.zeros(3))
        with pytest.raises(ShapeMismatch):
            p.accumulate(np.zeros(4))


class TestBackendParity:
    """Both backends must agree to float noise on every kernel."""

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="numba unavailable")
    def test_conv_pool_upsample_agree(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((3, 4, 10, 10))
        w = rng.standard_normal((5, 4, 3, 3))
        b = rng.standard_normal(5)
        gy = rng.standard_normal((3, 5, 10, 10))
        wp = rng.standard_normal((2, 4))
        bp = rng.standard_normal(2)
        gyp = rng.standard_normal((3, 2, 10, 10))

        results = {}
        for name in BACKENDS:
            use_backend(name)
            results[name] = {
                "conv": ops.conv2d(x, w, b),
                "conv_back": ops.conv2d_backward(x, w, gy),
                "conv1x1": ops.conv1x1(x, wp, bp),
                "conv1x1_back": ops.conv1x1_backward(x, wp, gyp),
                "pool": ops.maxpool2(x),
                "pool_back": ops.maxpool2_backward(x, ops.maxpool2(x)),
                "up": ops.upsample2(x),
                "up_back": ops.upsample2_backward(x[:, :, :10, :10]),
            }
        use_backend("auto")
        a, b_ = (results[n] for n in BACKENDS[:2])
        for key in a:
            va, vb = a[key], b_[key]
            if isinstance(va, tuple):
                for ta, tb in zip(va, vb):
                    np.testing.assert_allclose(ta, tb, rtol=1e-10, atol=1e-10)
            else:
                np.testing.assert_allclose(va, vb, rtol=1e-10, atol=1e-10)
