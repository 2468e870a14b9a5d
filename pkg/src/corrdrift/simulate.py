"""Generation of path ensembles driven by correlated Brownian motions.

All randomness is drawn per path from counter-based Philox streams keyed by
``(seed, replicate, path index)``, so a given ensemble is bit-identical no
matter how the work is scheduled.  Cross-path correlation is imposed by
multiplying the matrix of independent standard normals with the Cholesky
factor of the correlation matrix.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .correlation import CholeskyFactor, CorrelationMatrix, cholesky, is_identity
from .models import ModelSpec

__all__ = ["PathEnsemble", "SimulationExploded", "correlated_increments",
           "simulate_ensemble", "subsample", "write_ensemble", "read_ensemble",
           "ensemble_to_csv"]

_MAGIC = b"CDRIFT01"


class SimulationExploded(ArithmeticError):
    """A state became non-finite; usually the time step is too large."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state at step {step}; reduce dt")
        self.step = step


@dataclass(frozen=True)
class PathEnsemble:
    """N discrete trajectories on [0, T] with step dt, plus provenance.

    ``values`` has shape ``(n_paths, n_steps + 1)`` with column 0 equal to
    the common initial value.  ``increments`` holds the driving Gaussian
    increments (shape ``(n_paths, n_steps)``); for the exact-OU scheme these
    are the Brownian-equivalent innovations ``sqrt(dt) * C @ Z``.
    """

    values: np.ndarray
    dt: float
    seed: int
    model_id: str
    correlation_descriptor: str
    increments: np.ndarray | None = None
    replicate: int = 0

    def __post_init__(self) -> None:
        # freely shareable across workers: freeze the arrays we own
        for arr in (self.values, self.increments):
            if arr is not None and arr.flags.writeable and arr.flags.owndata:
                arr.setflags(write=False)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1] - 1

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt


def _normal_rows(seed: int, replicate: int, n_paths: int, n_steps: int) -> np.ndarray:
    """Independent N(0,1) draws, one Philox stream per path."""
    out = np.empty((n_paths, n_steps))
    for i in range(n_paths):
        bits = np.random.Philox(np.random.SeedSequence((seed, replicate, i)))
        out[i] = np.random.Generator(bits).standard_normal(n_steps)
    return out


def correlated_increments(factor: CholeskyFactor, n_steps: int, dt: float,
                          rng: np.random.Generator | None = None,
                          z: np.ndarray | None = None) -> np.ndarray:
    """Brownian increments with ``Cov(dB^i, dB^k) = R[i, k] * dt``.

    Column k is ``sqrt(dt) * C @ Z_k`` for i.i.d. standard normal vectors
    ``Z_k``, supplied either pre-drawn (``z``) or from ``rng``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = factor.n
    if n_steps == 0:
        return np.empty((n, 0))
    if z is None:
        if rng is None:
            raise ValueError("either rng or z must be provided")
        z = rng.standard_normal((n, n_steps))
    elif z.shape != (n, n_steps):
        raise ValueError(f"z must have shape {(n, n_steps)}, got {z.shape}")
    return np.sqrt(dt) * (factor.matrix @ z)


def _euler_paths(drift, diffusion, x0: float, dt: float, db: np.ndarray) -> np.ndarray:
    n_paths, n_steps = db.shape
    values = np.empty((n_paths, n_steps + 1))
    x = np.full(n_paths, float(x0))
    values[:, 0] = x
    # overflow in a diverging state is the explosion signal, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            x = x + drift(x) * dt + diffusion(x) * db[:, k]
            if not np.all(np.isfinite(x)):
                raise SimulationExploded(k + 1)
            values[:, k + 1] = x
    return values


def _exact_ou_paths(rate: float, vol: float, x0: float, dt: float,
                    eta: np.ndarray) -> np.ndarray:
    """Exact Gaussian autoregression for ``d xi = -rate xi dt + vol dW``.

    ``eta`` holds correlated standard normal columns; the innovation
    standard deviation matches the stationary transition law so every
    marginal is exact regardless of dt.
    """
    n_paths, n_steps = eta.shape
    if rate > 0:
        decay = np.exp(-rate * dt)
        innov_sd = vol * np.sqrt((1.0 - np.exp(-2.0 * rate * dt)) / (2.0 * rate))
    else:
        decay, innov_sd = 1.0, vol * np.sqrt(dt)
    values = np.empty((n_paths, n_steps + 1))
    x = np.full(n_paths, float(x0))
    values[:, 0] = x
    for k in range(n_steps):
        x = decay * x + innov_sd * eta[:, k]
        values[:, k + 1] = x
    return values


def simulate_ensemble(model: ModelSpec, n_paths: int, horizon: float, dt: float,
                      correlation: CorrelationMatrix, seed: int,
                      replicate: int = 0) -> PathEnsemble:
    """Simulate N correlated sample paths of the model on [0, horizon].

    ``horizon / dt`` must be an integer number of steps.  Deterministic in
    ``(seed, replicate)`` and all parameters; raises ``NotPositiveDefinite``
    for a degenerate correlation matrix and ``SimulationExploded`` if a
    state leaves the finite range.
    """
    if correlation.n != n_paths:
        raise ValueError(f"correlation matrix is {correlation.n}x{correlation.n} "
                         f"but n_paths={n_paths}")
    n_steps_f = horizon / dt
    n_steps = int(round(n_steps_f))
    if abs(n_steps_f - n_steps) > 1e-9 or n_steps < 0:
        raise ValueError("horizon must be an integer multiple of dt")
    z = _normal_rows(seed, replicate, n_paths, n_steps)
    if is_identity(correlation):
        eta = z
    else:
        eta = cholesky(correlation).matrix @ z
    db = np.sqrt(dt) * eta

    if model.scheme == "euler":
        latent = _euler_paths(model.sim_drift, model.sim_diffusion,
                              model.sim_x0, dt, db)
    elif model.scheme == "exact_ou":
        latent = _exact_ou_paths(model.ou_rate, model.ou_vol, model.sim_x0, dt, eta)
    else:
        raise ValueError(f"unknown scheme {model.scheme!r}")

    values = model.transform(latent) if model.transform is not None else latent
    if not np.all(np.isfinite(values)):
        raise SimulationExploded(int(np.argwhere(~np.isfinite(values))[0][1]))
    return PathEnsemble(values=values, dt=dt, seed=seed, model_id=model.model_id,
                        correlation_descriptor=correlation.descriptor,
                        increments=db, replicate=replicate)


def subsample(ens: PathEnsemble, stride: int) -> PathEnsemble:
    """Keep every ``stride``-th observation (coarser time grid, same paths).

    Driving increments are aggregated over each coarse interval, so they
    remain genuine Brownian increments at the new step.
    """
    if stride < 1 or ens.n_steps % stride:
        raise ValueError("stride must divide the number of steps")
    values = np.ascontiguousarray(ens.values[:, ::stride])
    incr = None
    if ens.increments is not None:
        n_coarse = ens.n_steps // stride
        incr = ens.increments.reshape(ens.n_paths, n_coarse, stride).sum(axis=2)
    return PathEnsemble(values=values, dt=ens.dt * stride, seed=ens.seed,
                        model_id=ens.model_id,
                        correlation_descriptor=ens.correlation_descriptor,
                        increments=incr, replicate=ens.replicate)


def write_ensemble(ens: PathEnsemble, path) -> None:
    """Binary dump: magic, N, n_steps, dt, seed header then row-major float64."""
    header = _MAGIC + struct.pack("<QQdQ", ens.n_paths, ens.n_steps,
                                  ens.dt, ens.seed)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(ens.values, dtype="<f8").tobytes())


def read_ensemble(path) -> PathEnsemble:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not an ensemble file (bad magic {magic!r})")
        n_paths, n_steps, dt, seed = struct.unpack("<QQdQ", fh.read(32))
        data = np.frombuffer(fh.read(), dtype="<f8")
    values = data.reshape(n_paths, n_steps + 1)
    return PathEnsemble(values=values, dt=dt, seed=seed, model_id="file",
                        correlation_descriptor="file")


def ensemble_to_csv(ens: PathEnsemble, path) -> None:
    """One row per path; header gives the observation times."""
    times = np.arange(ens.n_steps + 1) * ens.dt
    header = ",".join(str(t) for t in times)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in ens.values:
            fh.write(",".join(repr(v) for v in row) + "\n")
