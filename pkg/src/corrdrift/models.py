"""The five benchmark diffusion models and their closed-form coefficients.

Each model is a scalar SDE ``dX = b(X) dt + sigma(X) dB`` together with the
scheme used to simulate it:

* ``ex1``, ``ex4`` and ``ex5`` are integrated by Euler directly on X at the
  observation step, so the conditional mean increment of the simulated
  chain is exactly ``b(X) dt`` and the regression target is unbiased.
* ``ex2`` and ``ex3`` are smooth maps (tanh, exp) of an Ornstein-Uhlenbeck
  process that is simulated by its exact Gaussian autoregression.

The ``ex4``/``ex5`` coefficient pairs are the Ito images of asinh-type maps
of a latent unit-noise diffusion ``d xi = alpha(xi) dt + dW``; the latent
functions are kept here because the closed forms derive from them and
`tests/test_models.py` checks each pair against a finite-difference Ito
expansion.  (Simulating the latent chain at the observation step and
mapping it afterwards leaves an O(dt) gap between the data's conditional
drift and ``b`` that dominates the estimation error at desk scale, which
is why the direct scheme is used; the latent route remains available
through ModelSpec for custom models.)
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = ["ModelSpec", "get_model", "model_drift_sigma", "custom_model", "MODEL_IDS"]

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelSpec:
    """Dynamics, display interval and simulation recipe for one model.

    ``drift``/``diffusion`` are the coefficients of the observed process X
    (used for error measurement and the sigma-weighted penalty).  The
    simulated process may be a latent one: ``sim_drift``/``sim_diffusion``
    drive the Euler scheme and ``transform`` maps the latent path to X.
    For the exact-OU scheme, ``ou_rate``/``ou_vol`` give the latent
    dynamics ``d xi = -ou_rate * xi dt + ou_vol * dW`` instead.
    """

    model_id: str
    drift: ArrayFn
    diffusion: ArrayFn
    interval: tuple[float, float]
    scheme: str = "euler"                     # "euler" | "exact_ou"
    sim_drift: ArrayFn | None = None
    sim_diffusion: ArrayFn | None = None
    sim_x0: float = 0.0
    transform: ArrayFn | None = None
    ou_rate: float | None = None
    ou_vol: float | None = None

    @property
    def x0(self) -> float:
        """Initial value of the observed process X."""
        if self.transform is None:
            return self.sim_x0
        return float(self.transform(np.asarray([self.sim_x0]))[0])


# --- model 1: hyperbolic diffusion -----------------------------------------

_EX1_THETA = 2.0
_EX1_GAMMA = np.sqrt(0.5)


def _b1(x):
    return -_EX1_THETA * x


def _s1(x):
    return _EX1_GAMMA * np.sqrt(1.0 + x * x)


# --- model 2: tanh of an OU process -----------------------------------------
# X = tanh(xi) with d xi = -(r/2) xi dt + (gamma/2) dW.

_EX2_R = 2.0
_EX2_GAMMA = 2.0


def _b2(x):
    return (1.0 - x * x) * (-0.5 * _EX2_R * np.arctanh(x)
                            - 0.25 * _EX2_GAMMA ** 2 * x)


def _s2(x):
    return 0.5 * _EX2_GAMMA * (1.0 - x * x)


# --- model 3: exp of an OU process -------------------------------------------
# X = exp(xi) with d xi = -(r/2) xi dt + (gamma/2) dW; X stays positive, the
# floor on log only guards evaluation of b3 at non-positive display points.

_EX3_R = 1.0
_EX3_GAMMA = 2.0
_LOG_FLOOR = 1e-30


def _b3(x):
    xp = np.maximum(x, 0.0)
    return x * (-0.5 * _EX3_R * np.log(np.maximum(xp, _LOG_FLOOR))
                + _EX3_GAMMA ** 2 / 8.0)


def _s3(x):
    return 0.5 * _EX3_GAMMA * np.maximum(x, 0.0)


# --- models 4 and 5: asinh maps of a latent unit-noise diffusion -------------
# Latent: d xi = alpha(xi) dt + dW with alpha(x) = -theta x / sqrt(1 + c^2 x^2).


def _alpha(theta: float, c: float) -> ArrayFn:
    def fn(x):
        return -theta * x / np.sqrt(1.0 + (c * x) ** 2)
    return fn


_EX4_THETA = 3.0
_EX4_C = 2.0
_EX4_ALPHA = _alpha(_EX4_THETA, _EX4_C)


def _g1(x):
    return np.arcsinh(_EX4_C * x)


def _b4(x):
    return -(_EX4_THETA + _EX4_C ** 2 / (2.0 * np.cosh(x))) * np.sinh(x) / np.cosh(x) ** 2


def _s4(x):
    return _EX4_C / np.cosh(x)


_EX5_THETA = 1.0
_EX5_C = 10.0


def _g2(x):
    return np.arcsinh(x - 5.0) + np.arcsinh(x + 5.0)


def _g2_prime(x):
    return 1.0 / np.sqrt(1.0 + (x - 5.0) ** 2) + 1.0 / np.sqrt(1.0 + (x + 5.0) ** 2)


def _g2_second(x):
    return (-(x - 5.0) * (1.0 + (x - 5.0) ** 2) ** -1.5
            - (x + 5.0) * (1.0 + (x + 5.0) ** 2) ** -1.5)


def _g2_inverse(x):
    # Closed form for the inverse of _g2.  The textbook bracket
    # (49 + cosh x) sinh^2 x + 100 (1 - cosh x) cancels catastrophically
    # near 0; with u = cosh x - 1 it equals u^2 (u + 52) exactly, which is
    # cancellation-free, and u / sinh x -> 0 removes the singularity.
    x = np.asarray(x, dtype=float)
    u = 2.0 * np.sinh(0.5 * x) ** 2
    sh = np.sinh(x)
    ratio = np.divide(u, sh, out=np.zeros_like(u), where=sh != 0.0)
    return ratio * np.sqrt((u + 52.0) / 2.0)


_EX5_ALPHA = _alpha(_EX5_THETA, _EX5_C)


def _b5(x):
    h = _g2_inverse(x)
    return _g2_prime(h) * _EX5_ALPHA(h) + 0.5 * _g2_second(h)


def _s5(x):
    return _g2_prime(_g2_inverse(x))


_REGISTRY: dict[str, ModelSpec] = {
    "ex1": ModelSpec(
        model_id="ex1", drift=_b1, diffusion=_s1, interval=(-0.9, 0.8),
        scheme="euler", sim_drift=_b1, sim_diffusion=_s1, sim_x0=0.0),
    "ex2": ModelSpec(
        model_id="ex2", drift=_b2, diffusion=_s2, interval=(-0.9, 0.9),
        scheme="exact_ou", ou_rate=0.5 * _EX2_R, ou_vol=0.5 * _EX2_GAMMA,
        sim_x0=0.0, transform=np.tanh),
    "ex3": ModelSpec(
        model_id="ex3", drift=_b3, diffusion=_s3, interval=(0.44, 2.0),
        scheme="exact_ou", ou_rate=0.5 * _EX3_R, ou_vol=0.5 * _EX3_GAMMA,
        sim_x0=0.0, transform=np.exp),
    "ex4": ModelSpec(
        model_id="ex4", drift=_b4, diffusion=_s4, interval=(-1.15, 1.15),
        scheme="euler", sim_drift=_b4, sim_diffusion=_s4, sim_x0=0.0),
    "ex5": ModelSpec(
        model_id="ex5", drift=_b5, diffusion=_s5, interval=(-4.0, 4.0),
        scheme="euler", sim_drift=_b5, sim_diffusion=_s5, sim_x0=0.0),
}

MODEL_IDS = tuple(_REGISTRY)


def get_model(model_id: str, x0: float | None = None,
              interval: tuple[float, float] | None = None) -> ModelSpec:
    """Look up a benchmark model, optionally overriding the latent start
    value or the display interval."""
    try:
        spec = _REGISTRY[model_id]
    except KeyError:
        raise KeyError(f"unknown model {model_id!r}; choose from {MODEL_IDS}") from None
    overrides = {}
    if x0 is not None:
        overrides["sim_x0"] = float(x0)
    if interval is not None:
        overrides["interval"] = (float(interval[0]), float(interval[1]))
    return replace(spec, **overrides) if overrides else spec


def custom_model(drift: ArrayFn, diffusion: ArrayFn, x0: float,
                 interval: tuple[float, float]) -> ModelSpec:
    """A user-supplied scalar SDE integrated by Euler directly on X."""
    return ModelSpec(model_id="custom", drift=drift, diffusion=diffusion,
                     interval=interval, scheme="euler", sim_drift=drift,
                     sim_diffusion=diffusion, sim_x0=float(x0))


def model_drift_sigma(model_id: str, x: float) -> tuple[float, float]:
    """Closed-form ``(b(x), sigma(x))`` for a benchmark model."""
    spec = get_model(model_id)
    arr = np.asarray([x], dtype=float)
    return float(spec.drift(arr)[0]), float(spec.diffusion(arr)[0])
