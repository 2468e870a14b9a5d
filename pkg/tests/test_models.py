import numpy as np
import pytest

from corrdrift.models import (MODEL_IDS, custom_model, get_model,
                              model_drift_sigma)
from corrdrift.models import _EX4_ALPHA, _EX5_ALPHA, _g1, _g2, _g2_inverse


def central_derivatives(fn, x, h=1e-5):
    first = (fn(x + h) - fn(x - h)) / (2 * h)
    second = (fn(x + h) - 2 * fn(x) + fn(x - h)) / h ** 2
    return first, second


def test_registry_contents():
    assert MODEL_IDS == ("ex1", "ex2", "ex3", "ex4", "ex5")
    with pytest.raises(KeyError):
        get_model("ex9")


def test_point_values_ex1():
    b, s = model_drift_sigma("ex1", 1.0)
    assert b == pytest.approx(-2.0)
    assert s == pytest.approx(1.0)


def test_point_values_ex2():
    b, s = model_drift_sigma("ex2", 0.0)
    assert b == pytest.approx(0.0)
    assert s == pytest.approx(1.0)


def test_point_values_ex5_origin():
    b, _ = model_drift_sigma("ex5", 0.0)
    assert b == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model_id,transform,kappa,vol", [
    ("ex2", np.tanh, 1.0, 1.0),
    ("ex3", np.exp, 0.5, 1.0),
])
def test_exact_ou_models_ito_consistency(model_id, transform, kappa, vol):
    # X = F(xi), d xi = -kappa xi dt + vol dW  =>
    # b(F(xi)) = F'(xi)(-kappa xi) + 0.5 F''(xi) vol^2, sigma(F(xi)) = F'(xi) vol
    spec = get_model(model_id)
    assert spec.ou_rate == pytest.approx(kappa)
    assert spec.ou_vol == pytest.approx(vol)
    xi = np.linspace(-1.2, 1.2, 25)
    first, second = central_derivatives(transform, xi)
    x = transform(xi)
    np.testing.assert_allclose(spec.drift(x),
                               first * (-kappa * xi) + 0.5 * second * vol ** 2,
                               atol=5e-6)
    np.testing.assert_allclose(spec.diffusion(x), first * vol, atol=5e-6)


@pytest.mark.parametrize("model_id,transform,alpha", [
    ("ex4", _g1, _EX4_ALPHA),
    ("ex5", _g2, _EX5_ALPHA),
])
def test_asinh_map_models_ito_consistency(model_id, transform, alpha):
    # the closed forms are the Ito images of X = G(xi) with
    # d xi = alpha(xi) dt + dW: b(G(xi)) = G' alpha + G''/2, sigma(G(xi)) = G'
    spec = get_model(model_id)
    xi = np.linspace(-2.0, 2.0, 41)
    xi = xi[np.abs(xi) > 0.05]
    first, second = central_derivatives(transform, xi)
    x = transform(xi)
    np.testing.assert_allclose(spec.drift(x), first * alpha(xi) + 0.5 * second,
                               atol=2e-5)
    np.testing.assert_allclose(spec.diffusion(x), first, atol=1e-8)


def test_g2_inverse_round_trip():
    x = np.linspace(-4.0, 4.0, 801)
    np.testing.assert_allclose(_g2(_g2_inverse(x)), x, atol=1e-9)
    assert _g2_inverse(np.array([0.0]))[0] == 0.0


def test_g2_inverse_accurate_near_origin():
    # the naive closed form cancels catastrophically here; the stable one
    # must stay proportional to sqrt(13/2) * x all the way down
    x = np.array([1e-12, 1e-8, 1e-4, 1e-2])
    np.testing.assert_allclose(_g2_inverse(x) / x, np.sqrt(6.5), rtol=1e-4)
    # forward-map roundoff (~1e-16 absolute) dominates the roundtrip at tiny x
    np.testing.assert_allclose(_g2(_g2_inverse(x)), x, rtol=1e-9, atol=1e-14)


def test_get_model_overrides():
    spec = get_model("ex1", x0=0.5, interval=(-1.0, 1.0))
    assert spec.sim_x0 == 0.5
    assert spec.x0 == 0.5
    assert spec.interval == (-1.0, 1.0)
    # ex3 starts at exp(0) = 1 in X-space
    assert get_model("ex3").x0 == pytest.approx(1.0)


def test_custom_model():
    spec = custom_model(lambda x: -x, lambda x: np.ones_like(x), 0.3, (0, 1))
    assert spec.model_id == "custom"
    assert spec.scheme == "euler"
    assert spec.x0 == pytest.approx(0.3)


def test_ex3_drift_guards_nonpositive_states():
    b = get_model("ex3").drift(np.array([-0.5, 0.0, 1.0]))
    assert np.all(np.isfinite(b))
    assert b[2] == pytest.approx(0.5)  # 1 * (-0.5*log(1) + 0.5)
