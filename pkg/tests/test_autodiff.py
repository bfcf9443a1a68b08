import numpy as np
import pytest

from drbert import autodiff as ad
from drbert.autodiff import GraphError, ShapeError, Tensor
from drbert.gradcheck import finite_difference_check
from drbert.rng import Rng


def t(data, grad=True):
    return Tensor(data, requires_grad=grad)


class TestForward:
    def test_matmul_identity(self):
        out = ad.matmul(Tensor(np.eye(2)), Tensor([[3.0, 4.0], [5.0, 6.0]]))
        np.testing.assert_array_equal(out.data, [[3.0, 4.0], [5.0, 6.0]])

    def test_softmax_symmetry(self):
        out = ad.softmax(Tensor([0.0, 0.0]), axis=-1)
        np.testing.assert_allclose(out.data, [0.5, 0.5])

    def test_relu_values(self):
        assert ad.relu(Tensor(-1.5)).item() == 0.0
        assert ad.relu(Tensor(2.0)).item() == 2.0

    def test_max_over_axis(self):
        out, idx = ad.max_over_axis(Tensor([[1.0, 5.0], [3.0, 2.0]]), axis=0)
        np.testing.assert_array_equal(out.data, [3.0, 5.0])
        np.testing.assert_array_equal(idx, [1, 0])

    def test_softmax_rows_are_distributions(self):
        rng = Rng(3)
        x = Tensor(rng.uniform(-5, 5, (8, 11)))
        out = ad.softmax(x, axis=-1)
        np.testing.assert_allclose(out.data.sum(axis=-1), np.ones(8), atol=1e-6)
        assert (out.data > 0).all() and (out.data < 1).all()

    def test_shape_error_names_op_and_shapes(self):
        with pytest.raises(ShapeError, match=r"matmul.*2, 3.*2, 3"):
            ad.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
        with pytest.raises(ShapeError, match="add"):
            ad.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4,))))

    def test_finite_forward_on_finite_inputs(self):
        rng = Rng(4)
        x = Tensor(rng.uniform(-3, 3, (5, 6)))
        for node in (ad.tanh(x), ad.sigmoid(x), ad.relu(x), ad.softmax(x, -1),
                     ad.mean_over_axis(x, 0), ad.sum_over_axis(x), ad.scale(x, 2.5)):
            assert np.isfinite(node.data).all()


class TestBackward:
    def test_square_gradient(self):
        x = t(3.0)
        y = ad.mul(x, x)
        y.backward()
        assert x.grad == pytest.approx(6.0, abs=1e-12)

    def test_crossentropy_softmax_identity(self):
        # d(-sum(y*log(softmax(z))))/dz == softmax(z) - y
        z = t([0.3, -1.2, 2.0])
        y = np.array([0.0, 1.0, 0.0])
        p = ad.softmax(z, axis=-1)
        loss = ad.scale(ad.sum_over_axis(ad.mul(Tensor(y), ad.log(p))), -1.0)
        loss.backward()
        np.testing.assert_allclose(z.grad, p.data - y, atol=1e-12)

    def test_fanout_sums_both_paths(self):
        x = t(3.0)
        z = ad.add(ad.mul(x, x), x)  # x feeds two consumers
        z.backward()
        assert x.grad == pytest.approx(7.0)

    def test_backward_twice_accumulates(self):
        x = t(2.0)
        y = ad.mul(x, x)
        y.backward()
        y.backward()
        assert x.grad == pytest.approx(8.0)

    def test_nonscalar_root_rejected(self):
        x = t([1.0, 2.0])
        with pytest.raises(GraphError, match="scalar"):
            ad.mul(x, x).backward()

    def test_nan_gradient_names_originating_op(self):
        x = t(np.inf)
        y = ad.mul(x, x)
        with pytest.raises(GraphError, match="mul"):
            y.backward()

    def test_embedding_lookup_scatter(self):
        table = t(np.arange(12.0).reshape(4, 3))
        out = ad.embedding_lookup(table, np.array([1, 1, 3]))
        ad.sum_over_axis(out).backward()
        expected = np.zeros((4, 3))
        expected[1] = 2.0
        expected[3] = 1.0
        np.testing.assert_array_equal(table.grad, expected)


def _rand(rng, shape, lo=-1.0, hi=1.0):
    return rng.uniform(lo, hi, shape)


# every registered op, checked against the central-difference oracle
OP_CASES = [
    ("matmul", lambda p, c: ad.matmul(p["a"], p["b"]),
     lambda rng: {"a": t(_rand(rng, (3, 4))), "b": t(_rand(rng, (4, 2)))}),
    ("matmul_batched", lambda p, c: ad.matmul(p["a"], p["b"]),
     lambda rng: {"a": t(_rand(rng, (2, 3, 4))), "b": t(_rand(rng, (4, 2)))}),
    ("matmul_vec", lambda p, c: ad.matmul(p["a"], p["b"]),
     lambda rng: {"a": t(_rand(rng, (4,))), "b": t(_rand(rng, (4, 3)))}),
    ("add_broadcast", lambda p, c: ad.add(p["a"], p["b"]),
     lambda rng: {"a": t(_rand(rng, (3, 5))), "b": t(_rand(rng, (5,)))}),
    ("mul_broadcast", lambda p, c: ad.mul(p["a"], p["b"]),
     lambda rng: {"a": t(_rand(rng, (3, 5))), "b": t(_rand(rng, (3, 1)))}),
    ("tanh", lambda p, c: ad.tanh(p["a"]), lambda rng: {"a": t(_rand(rng, (4, 4)))}),
    ("sigmoid", lambda p, c: ad.sigmoid(p["a"]), lambda rng: {"a": t(_rand(rng, (4, 4)))}),
    ("relu", lambda p, c: ad.relu(p["a"]),
     lambda rng: {"a": t(np.sign(_rand(rng, (4, 4))) * (0.2 + np.abs(_rand(rng, (4, 4)))))}),
    ("softmax", lambda p, c: ad.softmax(p["a"], -1), lambda rng: {"a": t(_rand(rng, (3, 6)))}),
    ("max", lambda p, c: ad.max_over_axis(p["a"], -1)[0],
     lambda rng: {"a": t(_rand(rng, (3, 6)))}),
    ("mean", lambda p, c: ad.mean_over_axis(p["a"], 0), lambda rng: {"a": t(_rand(rng, (3, 6)))}),
    ("sum", lambda p, c: ad.sum_over_axis(p["a"], 1), lambda rng: {"a": t(_rand(rng, (3, 6)))}),
    ("concat", lambda p, c: ad.concat([p["a"], p["b"]], axis=1),
     lambda rng: {"a": t(_rand(rng, (2, 3))), "b": t(_rand(rng, (2, 4)))}),
    ("scale", lambda p, c: ad.scale(p["a"], -2.5), lambda rng: {"a": t(_rand(rng, (4, 4)))}),
    ("log", lambda p, c: ad.log(p["a"]),
     lambda rng: {"a": t(0.5 + np.abs(_rand(rng, (4, 4))))}),
    ("rsqrt", lambda p, c: ad.rsqrt(p["a"]),
     lambda rng: {"a": t(0.5 + np.abs(_rand(rng, (4, 4))))}),
    ("reshape", lambda p, c: ad.reshape(p["a"], (6, 2)),
     lambda rng: {"a": t(_rand(rng, (3, 4)))}),
    ("transpose", lambda p, c: ad.transpose(p["a"], (1, 0, 2)),
     lambda rng: {"a": t(_rand(rng, (2, 3, 4)))}),
]


@pytest.mark.parametrize("name,op,make", OP_CASES, ids=[c[0] for c in OP_CASES])
def test_every_op_matches_finite_differences(name, op, make):
    rng = Rng(11, stream=hash(name) % 1000)
    params = make(rng)
    probe = Tensor(_rand(rng, op(params, None).data.shape))

    def f():
        return ad.sum_over_axis(ad.mul(op(params, None), probe))

    assert finite_difference_check(f, params) < 1e-4


def test_three_layer_composite_matches_finite_differences():
    rng = Rng(12)
    params = {
        "w1": t(_rand(rng, (5, 7))), "b1": t(_rand(rng, (7,))),
        "w2": t(_rand(rng, (7, 6))), "b2": t(_rand(rng, (6,))),
        "w3": t(_rand(rng, (6, 3))),
    }
    x = Tensor(_rand(rng, (4, 5)))
    y = Tensor(np.eye(3)[rng.integers(0, 3, (4,))])

    def f():
        h1 = ad.tanh(ad.matmul(x, params["w1"]) + params["b1"])
        h2 = ad.relu(ad.matmul(h1, params["w2"]) + params["b2"])
        p = ad.softmax(ad.matmul(h2, params["w3"]), axis=-1)
        return ad.scale(ad.sum_over_axis(ad.mul(y, ad.log(p))), -1.0)

    assert finite_difference_check(f, params) < 1e-4


class TestFiniteDifferenceCheck:
    def test_theta_squared_near_exact(self):
        theta = t(2.0)
        err = finite_difference_check(lambda: ad.mul(theta, theta), {"theta": theta})
        assert err < 1e-9

    def test_zero_eps_rejected(self):
        theta = t(2.0)
        with pytest.raises(ValueError, match="eps"):
            finite_difference_check(lambda: ad.mul(theta, theta), {"theta": theta}, eps=0.0)

    def test_nonfinite_f_rejected(self):
        theta = t(np.inf)
        with pytest.raises(ValueError, match="non-finite"):
            finite_difference_check(lambda: ad.mul(theta, theta), {"theta": theta})
