"""Reference trajectories for tracking experiments.

A reference is a time-indexed pose X_d(t) together with the unicycle
input u_d(t) that generates it, tied by the flow condition

    d/dt X_d(t) = X_d(t) * wedge(Omega_d, v_d, 0).

Ellipses are built flatness-style: heading, speed, and turn rate are
derived from the position path and its first two derivatives, so the
flow condition holds by construction for any axis ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .se2 import ControlPair, Pose, wedge


@dataclass(frozen=True)
class DesiredTrajectory:
    """Reference pose/input pair with a scalar fast path.

    state_at(t) returns (theta_d, pdx, pdy, omega_d, v_d) as plain
    floats; pose_at / input_at wrap it in the structured types. period
    is None for aperiodic references. descriptor records the family and
    parameters for manifests and round-trip reconstruction.
    """

    state_at: Callable[[float], tuple]
    period: Optional[float]
    descriptor: dict = field(default_factory=dict)

    def pose_at(self, t: float) -> Pose:
        theta, px, py, _, _ = self.state_at(t)
        return Pose(theta, np.array([px, py]))

    def input_at(self, t: float) -> ControlPair:
        _, _, _, omega, v = self.state_at(t)
        return ControlPair(omega, v)


def ellipse_trajectory(a: float, b: float, h: float, origin=(0.0, 0.0)) -> DesiredTrajectory:
    """Elliptical reference p_d(t) = origin + (a cos(ht), b sin(ht)).

    The feedforward is derived from the path:

        v_d     = |dp_d/dt|
        theta_d = atan2 of dp_d/dt
        Omega_d = (dp_d x d2p_d) / |dp_d|^2

    For a == b this reduces to the circle (constant v_d = a|h|,
    Omega_d = h). Rejects degenerate axes: a zero semi-axis makes the
    speed vanish twice per revolution, where the heading is undefined.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("ellipse semi-axes must be positive")
    if h == 0.0:
        raise ValueError("ellipse rate h must be nonzero")
    ox, oy = float(origin[0]), float(origin[1])
    a, b, h = float(a), float(b), float(h)

    def state_at(t: float) -> tuple:
        c = math.cos(h * t)
        s = math.sin(h * t)
        dx = -a * h * s
        dy = b * h * c
        speed2 = dx * dx + dy * dy
        return (
            math.atan2(dy, dx),
            ox + a * c,
            oy + b * s,
            a * b * h / (a * a * s * s + b * b * c * c),
            math.sqrt(speed2),
        )

    return DesiredTrajectory(
        state_at,
        period=2.0 * math.pi / abs(h),
        descriptor={"family": "ellipse", "a": a, "b": b, "h": h, "origin": [ox, oy]},
    )


def line_trajectory(speed: float, heading: float = 0.0, start=(0.0, 0.0)) -> DesiredTrajectory:
    """Straight-line (or stationary, speed = 0) constant-input reference."""
    sx, sy = float(start[0]), float(start[1])
    speed, heading = float(speed), float(heading)
    cx = speed * math.cos(heading)
    cy = speed * math.sin(heading)

    def state_at(t: float) -> tuple:
        return (heading, sx + cx * t, sy + cy * t, 0.0, speed)

    return DesiredTrajectory(
        state_at,
        period=None,
        descriptor={"family": "line", "speed": speed, "heading": heading, "start": [sx, sy]},
    )


def trajectory_from_descriptor(desc: dict) -> DesiredTrajectory:
    """Rebuild a trajectory from its descriptor dict (manifest round-trip)."""
    family = desc.get("family")
    if family == "ellipse":
        return ellipse_trajectory(desc["a"], desc["b"], desc["h"], desc.get("origin", (0.0, 0.0)))
    if family == "line":
        return line_trajectory(desc.get("speed", 0.0), desc.get("heading", 0.0), desc.get("start", (0.0, 0.0)))
    raise ValueError(f"unknown trajectory family: {family!r}")


def flow_consistency_residual(traj: DesiredTrajectory, t_span=(0.0, 10.0), samples: int = 100,
                              delta: float = 1e-5) -> float:
    """Max defect of d/dt X_d = X_d U_d over sampled times (central differences).

    Returns the largest entrywise difference between the finite-difference
    derivative of the pose matrix and X_d(t) @ wedge(u_d(t)).
    """
    worst = 0.0
    for t in np.linspace(t_span[0], t_span[1], samples):
        t = float(t)
        Xp = traj.pose_at(t + delta).to_matrix()
        Xm = traj.pose_at(t - delta).to_matrix()
        fd = (Xp - Xm) / (2.0 * delta)
        flow = traj.pose_at(t).to_matrix() @ wedge(traj.input_at(t).embed())
        worst = max(worst, float(np.max(np.abs(fd - flow))))
    return worst
