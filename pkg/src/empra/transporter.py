"""Embedding transport: iterative clipped gradient ascent toward an anchor.

The transporter nudges a sentence embedding ``s`` toward an anchor
embedding ``a`` by repeatedly stepping along the clipped gradient of
``cos(s, a)``.  Two bounding modes are supported: ``grad_clip`` clips
each step's gradient componentwise to [-epsilon, +epsilon] before
scaling by eta, and ``ball_project`` additionally projects the running
state back onto the L-infinity ball of radius epsilon around the
starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vecmath import as_vector, clip_vec, cosine_gradient, project_linf

__all__ = ["TransportParams", "Trajectory", "transport_step", "transport"]

BOUND_MODES = ("grad_clip", "ball_project")


@dataclass(frozen=True)
class TransportParams:
    """Knobs of the transport loop: step size, bound, iterations, mode."""

    eta: float = 0.1
    epsilon: float = 0.01
    iters: int = 25
    bound_mode: str = "grad_clip"

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.iters < 0:
            raise ValueError(f"iters must be >= 0, got {self.iters}")
        if self.bound_mode not in BOUND_MODES:
            raise ValueError(f"bound_mode must be one of {BOUND_MODES}")


@dataclass(frozen=True)
class Trajectory:
    """All intermediate states s^(0)..s^(N) of one transport run."""

    states: tuple
    anchor: np.ndarray

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValueError("trajectory must contain at least the initial state")

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)


def transport_step(
    s: np.ndarray,
    a: np.ndarray,
    params: TransportParams,
    center: np.ndarray | None = None,
) -> np.ndarray:
    """One update: s + eta * clip(grad cos(s, a)), optionally ball-projected.

    In ``ball_project`` mode the caller must supply ``center`` (the
    trajectory's starting state); the updated state is projected onto the
    L-infinity ball of radius epsilon around it.
    """
    s = as_vector(s)
    a = as_vector(a, dim=s.shape[0])
    grad = cosine_gradient(s, a)
    nxt = s + params.eta * clip_vec(grad, -params.epsilon, params.epsilon)
    if params.bound_mode == "ball_project":
        if center is None:
            raise ValueError("ball_project mode requires the trajectory center")
        nxt = project_linf(nxt, as_vector(center, dim=s.shape[0]), params.epsilon)
    return nxt


def transport(s0: np.ndarray, a: np.ndarray, params: TransportParams) -> Trajectory:
    """Run ``params.iters`` transport steps from s0, recording every state."""
    s0 = as_vector(s0)
    a = as_vector(a, dim=s0.shape[0])
    states = [s0]
    current = s0
    for _ in range(params.iters):
        current = transport_step(current, a, params, center=s0)
        states.append(current)
    return Trajectory(states=tuple(states), anchor=a)
