import numpy as np
import pytest

from conftest import finite_diff_input_grad, make_conv_model, make_linear_model
from tsxplain.errors import InvalidParamsError
from tsxplain.nn.model import _backward


def _rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6))


def test_linear_input_gradient_is_the_weight_row():
    W = np.array([[0.5, -1.5, 2.0, 0.0], [1.0, 1.0, -1.0, 3.0]])
    model = make_linear_model(W)
    x = np.array([0.3, -0.7, 1.1, 0.2])
    for c in (0, 1):
        assert np.allclose(model.backward_input(x, c), W[c], atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_conv_input_gradient_matches_finite_differences(seed):
    model = make_conv_model(seed, length=24)
    x = np.random.default_rng(100 + seed).normal(size=24)
    target = seed % model.class_count
    analytic = model.backward_input(x, target)
    numeric = finite_diff_input_grad(model, x, target)
    assert _rel_err(analytic, numeric) < 1e-4


def test_input_gradients_batched_matches_single():
    model = make_conv_model(6, length=24)
    X = np.random.default_rng(42).normal(size=(4, 24))
    dlogits = np.zeros((4, model.class_count))
    dlogits[:, 1] = 1.0
    batched = model.input_gradients(X, dlogits)
    for i in range(4):
        assert np.allclose(batched[i], model.backward_input(X[i], 1), atol=1e-10)


def test_param_gradients_match_finite_differences():
    model = make_conv_model(7, length=20)
    x = np.random.default_rng(9).normal(size=(1, 20))
    target = 0
    # params are f32: perturbations quantize, so divide by the realized step;
    # with fixed relu/maxpool routing the logit is linear in any one entry,
    # which makes a generous step exact rather than biased
    h = 1e-3

    logits, _, caches = model._run(x, False, None, need_cache=True)
    dlogits = np.zeros_like(logits)
    dlogits[0, target] = 1.0
    _, grads = _backward(model.layers, caches, dlogits, collect_param_grads=True)

    def routing():
        _, _, cc = model._run(x, False, None, need_cache=True)
        return [
            c[1].copy() for c in cc if c is not None and c[0] in ("relu", "maxpool")
        ]

    def probe(flat, j, step):
        orig = flat[j]
        flat[j] = orig + step
        a_up = float(flat[j])
        up = model.logits(x)[0, target]
        route_up = routing()
        flat[j] = orig - step
        a_dn = float(flat[j])
        dn = model.logits(x)[0, target]
        route_dn = routing()
        flat[j] = orig
        same = all(np.array_equal(a, b) for a, b in zip(route_up, route_dn))
        return (up - dn) / (a_up - a_dn), same

    rng = np.random.default_rng(0)
    checked = 0
    for li, p in enumerate(model.params):
        if p is None:
            continue
        for key in ("W", "b"):
            flat = p[key].ravel()
            for _ in range(4):
                j = int(rng.integers(flat.size))
                numeric, smooth = probe(flat, j, h)
                # a relu flip or maxpool re-route inside the probe interval
                # makes the secant incomparable to the one-sided analytic grad
                if not smooth:
                    continue
                checked += 1
                analytic = grads[li][key].ravel()[j]
                assert abs(numeric - analytic) <= 1e-4 * max(1.0, abs(numeric)), (
                    li,
                    key,
                    j,
                )
    assert checked >= 8


def test_gradient_zero_beyond_receptive_field():
    # one conv block pooled to a single window: only the first pool*1 + kernel-1
    # inputs reach the logit of interest through the kept max
    W = np.array([[1.0, 0.0, 0.0, 0.0]])
    model = make_linear_model(np.vstack([W, -W]))
    grad = model.backward_input(np.array([1.0, 2.0, 3.0, 4.0]), 0)
    assert np.allclose(grad, [1.0, 0.0, 0.0, 0.0])


def test_backward_input_validates_class():
    model = make_conv_model(0, length=24)
    with pytest.raises(InvalidParamsError):
        model.backward_input(np.zeros(24), 99)
