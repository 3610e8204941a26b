"""Deterministic mean-field limit of the urn process.

The stochastic recursion, rescaled by the step weights 1/(1 + d*(t+1)) with
d the minimum degree, tracks the flow dz/dt = mean_field(z). That field is a
degree-scaled Laplacian flow: on a connected graph its equilibria are exactly
the consensus vectors c*(1,...,1), the degree-weighted average of z is
conserved, and every trajectory in [0,1]^n converges to the consensus whose
value is that conserved average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

# The exact flow preserves [0,1]^n; numerical drift past this is a bug.
CLIP_TOLERANCE = 1e-9


class IntegrationError(RuntimeError):
    """Trajectory left [0,1]^n beyond tolerance or became non-finite."""


@dataclass
class OdeTrajectory:
    """Integrated trajectory: times[k] maps to states[k] (shape (len, n))."""

    times: np.ndarray
    states: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]


def _check_z(g: Graph, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (g.n,):
        raise ValueError(f"state must have shape ({g.n},), got {z.shape}")
    return z


def mean_field(g: Graph, z) -> np.ndarray:
    """Limit drift field: (d/d_i) * (sum of neighbor z_j - d_i * z_i).

    The prefactor d/d_i (d = minimum degree) multiplies the whole bracket;
    with that reading every consensus vector is an equilibrium on any
    connected graph, and on regular graphs the field reduces to the plain
    negated Laplacian flow.
    """
    z = _check_z(g, z)
    pref = g.min_degree / g.degrees_float
    return pref * (g.adjacency_float @ z - g.degrees_float * z)


def finite_time_field(g: Graph, z, t: int) -> np.ndarray:
    """Drift field of the rescaled recursion at finite step t.

    Same bracket as mean_field with prefactor (1 + d*t)/(1 + d_i*t); it
    converges to mean_field componentwise as t grows, and equals it for all
    t on regular graphs.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    z = _check_z(g, z)
    d = g.min_degree
    pref = (1.0 + d * t) / (1.0 + g.degrees_float * t)
    return pref * (g.adjacency_float @ z - g.degrees_float * z)


def step_weight(t: int, g: Graph) -> float:
    """Decreasing step weight 1/(1 + d*(t+1)) of the rescaled recursion.

    The weights sum to infinity (like log T / d) while their squares sum
    finitely, the usual stochastic-approximation schedule.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return 1.0 / (1.0 + g.min_degree * (t + 1))


def predicted_consensus(g: Graph, z0) -> float:
    """Consensus value of the flow from z0: degree-weighted average of z0."""
    z0 = _check_z(g, z0)
    return float((g.degrees_float * z0).sum() / g.degrees_float.sum())


def default_step_size(g: Graph) -> float:
    """Conservative fixed RK4 step: 0.01 / max degree."""
    return 0.01 / g.max_degree


def integrate(g: Graph, z0, step_size: float | None = None, horizon: float = 10.0) -> OdeTrajectory:
    """Fixed-step classical RK4 trajectory of dz/dt = mean_field(z).

    States are clipped to [0,1] after each step; drift beyond CLIP_TOLERANCE
    or any non-finite value raises IntegrationError, since the exact flow
    preserves the cube and larger excursions indicate a step-size or field
    bug rather than something to silence.
    """
    z = _check_z(g, z0)
    if (z < 0).any() or (z > 1).any():
        raise ValueError("z0 must lie in [0,1]^n")
    if step_size is None:
        step_size = default_step_size(g)
    if not step_size > 0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")

    # mean_field as a single matrix: rhs(z) = -(pref * L) @ z.
    pref = g.min_degree / g.degrees_float
    flow = -(pref[:, None] * (np.diag(g.degrees_float) - g.adjacency_float))

    n_steps = int(np.ceil(horizon / step_size)) if horizon > 0 else 0
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, g.n))
    times[0] = 0.0
    states[0] = z

    h = step_size
    for k in range(1, n_steps + 1):
        k1 = flow @ z
        k2 = flow @ (z + 0.5 * h * k1)
        k3 = flow @ (z + 0.5 * h * k2)
        k4 = flow @ (z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(z).all():
            raise IntegrationError(f"non-finite state at step {k}")
        drift = max(float(-z.min()), float(z.max() - 1.0), 0.0)
        if drift > CLIP_TOLERANCE:
            raise IntegrationError(
                f"state left [0,1] by {drift:.3e} at step {k}; reduce step_size"
            )
        z = np.clip(z, 0.0, 1.0)
        times[k] = k * h
        states[k] = z

    return OdeTrajectory(times=times, states=states)
