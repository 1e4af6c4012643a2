"""Closed-loop simulation, logging, and batch experiments.

The integrator is a classical fixed-step 4th-order scheme on the
coordinates (theta, px, py); the heading is renormalized to [-pi, pi)
after every step, so the implied rotation matrix is always exactly
orthogonal. The control law is algebraic and is re-evaluated at every
integration substage.

The hot loop works on plain floats on purpose: a 60 s run at dt = 1e-3
is 60k steps, and batch experiments multiply that by hundreds. Array
allocation per substage would dominate the runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .controller import Gains, KanayamaGains, correction_scalars
from .se2 import wrap_angle
from .trajectories import DesiredTrajectory, trajectory_from_descriptor

TWO_PI = 2.0 * math.pi

CONTROLLERS = ("spatial", "kanayama", "feedforward")

CSV_COLUMNS = (
    "t", "theta", "px", "py", "theta_d", "pxd", "pyd",
    "eL_theta", "eL_px", "eL_py", "eR_theta", "eR_px", "eR_py",
    "lyap", "omega", "v", "omega_tilde", "v_tilde",
)

COL = {name: i for i, name in enumerate(CSV_COLUMNS)}


class SimulationDiverged(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"non-finite state at step {step} (t = {t:.6g})")


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one run.

    trajectory is a descriptor dict (see trajectories module). gains is
    a controller-specific tuple: (k_omega, k_v) for spatial, (k_x, k_y,
    k_theta) for kanayama, ignored for feedforward; None picks the
    defaults. offset = (dx, dy, dtheta) perturbs the initial state to
    p(0) = p_d(0) + (dx, dy), theta(0) = theta_d(0) + dtheta.
    """

    trajectory: dict
    controller: str = "spatial"
    gains: Optional[tuple] = None
    offset: tuple = (0.0, 0.0, 0.0)
    dt: float = 1e-3
    t_end: float = 40.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}; pick one of {CONTROLLERS}")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one step long")
        if len(self.offset) != 3:
            raise ValueError("offset must be (dx, dy, dtheta)")

    def to_dict(self) -> dict:
        return {
            "trajectory": dict(self.trajectory),
            "controller": self.controller,
            "gains": None if self.gains is None else list(self.gains),
            "offset": list(self.offset),
            "dt": self.dt,
            "t_end": self.t_end,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(
            trajectory=dict(d["trajectory"]),
            controller=d.get("controller", "spatial"),
            gains=None if d.get("gains") is None else tuple(d["gains"]),
            offset=tuple(d.get("offset", (0.0, 0.0, 0.0))),
            dt=float(d.get("dt", 1e-3)),
            t_end=float(d.get("t_end", 40.0)),
            seed=d.get("seed"),
        )


@dataclass(frozen=True)
class SimLog:
    """Uniform-grid time series of one run; data has one CSV_COLUMNS row per step."""

    data: np.ndarray
    config: Optional[SimConfig] = None

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, COL[name]]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def lyap(self) -> np.ndarray:
        return self.data[:, COL["lyap"]]

    def heading_error(self) -> np.ndarray:
        """|theta - theta_d| wrapped; identical for both error conventions."""
        return np.abs(self.column("eR_theta"))

    def position_error(self) -> np.ndarray:
        """Euclidean gap |p - p_d| (convention-free)."""
        dx = self.column("px") - self.column("pxd")
        dy = self.column("py") - self.column("pyd")
        return np.hypot(dx, dy)

    def to_csv(self, path) -> None:
        """Write the log with shortest round-trip decimals and LF endings."""
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in self.data:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        with open(path, "r", newline="") as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header: {header}")
            rows = [[float(tok) for tok in line.split(",")] for line in fh if line.strip()]
        data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
        return cls(data=data)


def _make_controller(cfg: SimConfig, traj: DesiredTrajectory):
    """Build control(t, th, px, py) -> (omega, v, omega_tilde, v_tilde)."""
    state_at = traj.state_at

    if cfg.controller == "feedforward":

        def control(t, th, px, py):
            thd, pdx, pdy, omd, vd = state_at(t)
            return omd, vd, 0.0, 0.0

        return control

    if cfg.controller == "spatial":
        g = Gains(*cfg.gains) if cfg.gains is not None else Gains()
        k_om, k_v = g.k_omega, g.k_v

        def control(t, th, px, py):
            thd, pdx, pdy, omd, vd = state_at(t)
            thE = th - thd
            cE = math.cos(thE)
            sE = math.sin(thE)
            pEx = px - (cE * pdx - sE * pdy)
            pEy = py - (sE * pdx + cE * pdy)
            omt, vt = correction_scalars(thE, pEx, pEy, thd, pdx, pdy)
            omt *= k_om
            vt *= k_v
            return omd + omt, vd + vt, omt, vt

        return control

    g = KanayamaGains(*cfg.gains) if cfg.gains is not None else KanayamaGains()
    k_x, k_y, k_th = g.k_x, g.k_y, g.k_theta

    def control(t, th, px, py):
        thd, pdx, pdy, omd, vd = state_at(t)
        # gap to the reference in the vehicle frame
        the = thd - th
        c = math.cos(th)
        s = math.sin(th)
        dx = pdx - px
        dy = pdy - py
        x_e = c * dx + s * dy
        y_e = -s * dx + c * dy
        v = vd * math.cos(the) + k_x * x_e
        om = omd + vd * (k_y * y_e + k_th * math.sin(the))
        return om, v, om - omd, v - vd

    return control


def simulate(cfg: SimConfig) -> SimLog:
    """Integrate the closed loop and return the populated log.

    Deterministic for a fixed config. Raises SimulationDiverged (with
    the offending step index) if the state leaves the finite range.
    """
    traj = trajectory_from_descriptor(cfg.trajectory)
    state_at = traj.state_at
    control = _make_controller(cfg, traj)
    dt = cfg.dt
    steps = int(round(cfg.t_end / dt))

    thd0, pdx0, pdy0, _, _ = state_at(0.0)
    dx0, dy0, dth0 = cfg.offset
    th = wrap_angle(thd0 + dth0)
    px = pdx0 + dx0
    py = pdy0 + dy0

    data = np.empty((steps + 1, len(CSV_COLUMNS)))
    half = 0.5 * dt
    sixth = dt / 6.0

    for k in range(steps + 1):
        t = k * dt
        thd, pdx, pdy, _, _ = state_at(t)
        om, v, omt, vt = control(t, th, px, py)

        # error components and Lyapunov value at the grid point
        thE = wrap_angle(th - thd)
        cE = math.cos(thE)
        sE = math.sin(thE)
        eRx = px - (cE * pdx - sE * pdy)
        eRy = py - (sE * pdx + cE * pdy)
        cd = math.cos(thd)
        sd = math.sin(thd)
        gx = px - pdx
        gy = py - pdy
        row = data[k]
        row[0] = t
        row[1] = th
        row[2] = px
        row[3] = py
        row[4] = thd
        row[5] = pdx
        row[6] = pdy
        row[7] = thE
        row[8] = cd * gx + sd * gy
        row[9] = -sd * gx + cd * gy
        row[10] = thE
        row[11] = eRx
        row[12] = eRy
        row[13] = 2.0 * (1.0 - cE) + 0.5 * (eRx * eRx + eRy * eRy)
        row[14] = om
        row[15] = v
        row[16] = omt
        row[17] = vt

        if k == steps:
            break

        try:
            # stage 1 reuses the control evaluated for the log row
            a1 = om
            b1 = v * math.cos(th)
            c1 = v * math.sin(th)
            tm = t + half
            om2, v2, _, _ = control(tm, th + half * a1, px + half * b1, py + half * c1)
            a2 = om2
            b2 = v2 * math.cos(th + half * a1)
            c2 = v2 * math.sin(th + half * a1)
            om3, v3, _, _ = control(tm, th + half * a2, px + half * b2, py + half * c2)
            a3 = om3
            b3 = v3 * math.cos(th + half * a2)
            c3 = v3 * math.sin(th + half * a2)
            om4, v4, _, _ = control(t + dt, th + dt * a3, px + dt * b3, py + dt * c3)
            a4 = om4
            b4 = v4 * math.cos(th + dt * a3)
            c4 = v4 * math.sin(th + dt * a3)
            th = wrap_angle(th + sixth * (a1 + 2.0 * (a2 + a3) + a4))
            px = px + sixth * (b1 + 2.0 * (b2 + b3) + b4)
            py = py + sixth * (c1 + 2.0 * (c2 + c3) + c4)
        except (OverflowError, ValueError):
            raise SimulationDiverged(k + 1, t + dt) from None
        if not (math.isfinite(th) and math.isfinite(px) and math.isfinite(py)):
            raise SimulationDiverged(k + 1, t + dt)

    return SimLog(data=data, config=cfg)


@dataclass(frozen=True)
class BasinSummary:
    """Aggregate of a Monte-Carlo convergence sweep."""

    samples: int
    converged: int
    threshold: float
    t_end: float
    seed: Optional[int]
    final_lyapunov: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def fraction(self) -> Optional[float]:
        return None if self.samples == 0 else self.converged / self.samples

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "converged": self.converged,
            "fraction": self.fraction,
            "threshold": self.threshold,
            "t_end": self.t_end,
            "seed": self.seed,
            "final_lyapunov": list(self.final_lyapunov),
            "failures": list(self.failures),
        }


def monte_carlo_basin(cfg: SimConfig, samples: int, seed: int,
                      threshold: float = 1e-6,
                      theta_margin: float = 0.05,
                      p_box: float = 5.0) -> BasinSummary:
    """Sweep random initial spatial errors and count convergences.

    Draws theta_E uniform on [-pi + theta_margin, pi - theta_margin]
    and p_E uniform on [-p_box, p_box]^2, places the vehicle so the
    initial spatial error is exactly the draw, runs each case, and
    counts final Lyapunov values below threshold. Deterministic for a
    fixed seed. The margin keeps draws away from the antipodal
    equilibrium, where escape times blow up.
    """
    rng = np.random.default_rng(seed)
    traj = trajectory_from_descriptor(cfg.trajectory)
    thd0, pdx0, pdy0, _, _ = traj.state_at(0.0)

    finals = []
    failures = []
    for i in range(samples):
        thE = rng.uniform(-math.pi + theta_margin, math.pi - theta_margin)
        pEx = rng.uniform(-p_box, p_box)
        pEy = rng.uniform(-p_box, p_box)
        # invert E_R(0) = (thE, pE): p(0) = pE + R(thE) p_d(0)
        c, s = math.cos(thE), math.sin(thE)
        dx = pEx + (c * pdx0 - s * pdy0) - pdx0
        dy = pEy + (s * pdx0 + c * pdy0) - pdy0
        log = simulate(replace(cfg, offset=(dx, dy, thE), seed=None))
        final = float(log.lyap[-1])
        finals.append(final)
        if not final < threshold:
            failures.append({"index": i, "theta_E": thE, "p_E": [pEx, pEy], "final_lyapunov": final})

    converged = sum(1 for L in finals if L < threshold)
    return BasinSummary(
        samples=samples, converged=converged, threshold=threshold,
        t_end=cfg.t_end, seed=seed, final_lyapunov=finals, failures=failures,
    )


@dataclass(frozen=True)
class ComparisonRow:
    """Per-controller convergence metrics from a shared scenario."""

    controller: str
    gains: Optional[tuple]
    time_to_heading: Optional[float]
    time_to_position: Optional[float]
    final_heading_error: float
    final_position_error: float
    final_lyapunov: float

    def to_dict(self) -> dict:
        return {
            "controller": self.controller,
            "gains": None if self.gains is None else list(self.gains),
            "time_to_heading": self.time_to_heading,
            "time_to_position": self.time_to_position,
            "final_heading_error": self.final_heading_error,
            "final_position_error": self.final_position_error,
            "final_lyapunov": self.final_lyapunov,
        }


def _settle_time(t: np.ndarray, err: np.ndarray, threshold: float) -> Optional[float]:
    """First grid time after which err stays below threshold, None if never."""
    below = err < threshold
    if not below[-1]:
        return None
    # last index where the error was still at/above threshold
    above = np.nonzero(~below)[0]
    if len(above) == 0:
        return float(t[0])
    idx = above[-1] + 1
    return float(t[idx]) if idx < len(t) else None


def compare_controllers(cfgs, threshold: float = 1e-2):
    """Run several controllers on the same scenario and tabulate metrics.

    All configs must share the trajectory and initial offset (that is
    the point of the comparison). Returns (rows, logs) in input order.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("need at least one config to compare")
    ref_traj = cfgs[0].trajectory
    ref_off = tuple(cfgs[0].offset)
    for c in cfgs[1:]:
        if c.trajectory != ref_traj or tuple(c.offset) != ref_off:
            raise ValueError("comparison configs must share trajectory and offset")

    rows = []
    logs = []
    for c in cfgs:
        log = simulate(c)
        he = log.heading_error()
        pe = log.position_error()
        rows.append(
            ComparisonRow(
                controller=c.controller,
                gains=c.gains,
                time_to_heading=_settle_time(log.t, he, threshold),
                time_to_position=_settle_time(log.t, pe, threshold),
                final_heading_error=float(he[-1]),
                final_position_error=float(pe[-1]),
                final_lyapunov=float(log.lyap[-1]),
            )
        )
        logs.append(log)
    return rows, logs
