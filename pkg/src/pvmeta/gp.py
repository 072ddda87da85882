"""Zero-mean, unit-variance Gaussian process over (azimuth, tilt) with an RBF kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import FactorizationFailure

MAX_JITTER = 1e-4
_FALLBACK_JITTER = 1e-10


@dataclass(frozen=True)
class KernelSpec:
    """RBF kernel ``exp(-sum_d (dist_d / l_d)^2)`` over (azimuth, tilt) in degrees.

    ``azimuth_metric`` selects the azimuth distance:

    * ``"chord"``: chord length of the azimuth circle scaled to degrees,
      ``(360 / pi) sin(|d| / 2)``. Matches the wrapped difference for small
      ``d`` and keeps the kernel positive definite for any lengthscale.
    * ``"arc"``: wrapped difference ``min(|d|, 360 - |d|)``. Not positive
      definite once lengthscales are a sizeable fraction of the circle.
    * ``"linear"``: plain ``|d|``, no wraparound.
    """

    lengthscales: tuple[float, float] = (90.0, 30.0)
    jitter: float = 1e-10
    azimuth_metric: str = "chord"

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in self.lengthscales))
        if len(self.lengthscales) != 2 or min(self.lengthscales) <= 0:
            raise ValueError("need two positive lengthscales (azimuth, tilt)")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")
        if self.azimuth_metric not in ("chord", "arc", "linear"):
            raise ValueError(f"unknown azimuth metric {self.azimuth_metric!r}")

    @classmethod
    def unit(cls, jitter: float = 1e-10) -> "KernelSpec":
        """``exp(-||x - y||^2)`` on raw degrees, no wraparound."""
        return cls((1.0, 1.0), jitter, azimuth_metric="linear")

    def to_dict(self) -> dict:
        return {"lengthscales": list(self.lengthscales), "jitter": self.jitter,
                "azimuth_metric": self.azimuth_metric}

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelSpec":
        return cls(tuple(doc["lengthscales"]), doc["jitter"], doc["azimuth_metric"])


def kernel_matrix(x1, x2, spec: KernelSpec) -> np.ndarray:
    x1 = np.atleast_2d(np.asarray(x1, float))
    x2 = np.atleast_2d(np.asarray(x2, float))
    d_az = np.abs(x1[:, None, 0] - x2[None, :, 0])
    if spec.azimuth_metric == "chord":
        d_az = (360.0 / np.pi) * np.abs(np.sin(np.radians(d_az) / 2.0))
    elif spec.azimuth_metric == "arc":
        d_az = np.mod(d_az, 360.0)
        d_az = np.minimum(d_az, 360.0 - d_az)
    d_tilt = x1[:, None, 1] - x2[None, :, 1]
    la, lt = spec.lengthscales
    return np.exp(-((d_az / la) ** 2 + (d_tilt / lt) ** 2))


def kernel(p1, p2, spec: KernelSpec) -> float:
    return float(kernel_matrix([p1], [p2], spec)[0, 0])


@dataclass(frozen=True, eq=False)
class GpState:
    """Observations plus the Cholesky factor of ``K + jitter * I``.

    ``jitter`` is the value currently in effect; it may exceed the kernel's
    configured jitter after an escalation.
    """

    kernel: KernelSpec
    points: np.ndarray  # (t, 2)
    observations: np.ndarray  # (t,)
    chol: np.ndarray  # (t, t) lower triangular
    alpha: np.ndarray  # (K + jitter I)^-1 observations
    jitter: float

    @classmethod
    def empty(cls, spec: KernelSpec | None = None) -> "GpState":
        spec = spec or KernelSpec()
        return cls(spec, np.empty((0, 2)), np.empty(0), np.empty((0, 0)), np.empty(0), spec.jitter)

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def t(self) -> int:
        return len(self.observations)


def _factorize(points, obs, spec: KernelSpec, jitter: float):
    """Full Cholesky, doubling jitter until it succeeds or exceeds the ceiling."""
    K = kernel_matrix(points, points, spec)
    j = jitter
    while True:
        try:
            L = np.linalg.cholesky(K + j * np.eye(len(K)))
            if np.all(np.diag(L) > 0):
                return L, cho_solve((L, True), obs), j
        except np.linalg.LinAlgError:
            pass
        if j >= MAX_JITTER:
            raise FactorizationFailure(f"kernel matrix singular even with jitter {MAX_JITTER:g}")
        j = _FALLBACK_JITTER if j == 0 else min(2.0 * j, MAX_JITTER)


def update(state: GpState, point, value: float) -> GpState:
    """Return a new state with ``(point, value)`` appended.

    Uses a rank-one extension of the Cholesky factor; if the new pivot is
    numerically lost the factor is rebuilt with doubled jitter.
    """
    x = np.asarray(point, float).reshape(1, 2)
    points = np.vstack([state.points, x])
    obs = np.append(state.observations, float(value))
    j = state.jitter
    t = state.t
    if t:
        k = kernel_matrix(state.points, x, state.kernel)[:, 0]
        row = solve_triangular(state.chol, k, lower=True)
        pivot2 = 1.0 + j - row @ row
    else:
        row = np.empty(0)
        pivot2 = 1.0 + j
    if pivot2 > max(0.5 * j, 1e-12):
        L = np.zeros((t + 1, t + 1))
        L[:t, :t] = state.chol
        L[t, :t] = row
        L[t, t] = np.sqrt(pivot2)
        alpha = cho_solve((L, True), obs)
    else:
        L, alpha, j = _factorize(points, obs, state.kernel,
                                 _FALLBACK_JITTER if j == 0 else min(2.0 * j, MAX_JITTER))
    return GpState(state.kernel, points, obs, L, alpha, j)


def condition(points, values, spec: KernelSpec | None = None) -> GpState:
    state = GpState.empty(spec)
    for p, v in zip(np.asarray(points, float), values):
        state = update(state, p, v)
    return state


def posterior(state: GpState, query) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at each query point (shape ``(m, 2)``)."""
    q = np.atleast_2d(np.asarray(query, float))
    if state.t == 0:
        return np.zeros(len(q)), np.ones(len(q))
    k = kernel_matrix(q, state.points, state.kernel)
    mean = k @ state.alpha
    v = solve_triangular(state.chol, k.T, lower=True)
    var = np.maximum(1.0 - np.einsum("ij,ij->j", v, v), 0.0)
    return mean, var


def posterior_at(state: GpState, point) -> tuple[float, float]:
    mean, var = posterior(state, [point])
    return float(mean[0]), float(var[0])
