"""Per-configuration vehicle models.

Builds the discrete delayed longitudinal dynamics of one vehicle
hardware configuration, the configuration-specific operational design
domain (ODD) polytope over (v, v_T, h), the admissible input and
disturbance sets, and the delay-free augmented system whose extra states
carry the queued control inputs.

All quantities are SI internally; configuration files carry explicit
unit strings converted at ingestion with :func:`to_si`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Box, HPolytope

# indices of the physical state [v, v_T, h]
IV, IVT, IH = 0, 1, 2

_UNIT_FACTORS = {
    "km/h": 1.0 / 3.6,
    "m/s": 1.0,
    "m": 1.0,
    "s": 1.0,
    "m/s^2": 1.0,
    "m/s²": 1.0,
}


class UnitError(ValueError):
    """Unknown or missing unit annotation."""


def to_si(value, unit):
    """Convert a dimensioned value to SI (velocities may be km/h)."""
    try:
        return float(value) * _UNIT_FACTORS[unit]
    except KeyError:
        raise UnitError("unknown unit %r" % (unit,)) from None


@dataclass(frozen=True)
class VhcParams:
    """Estimated parameters of one vehicle hardware configuration."""

    name: str
    c1: float  # control effectiveness after drag/friction compensation
    c2: float  # disturbance gain
    t_cycle: float  # s
    k: int  # control delay in cycles
    h_max: float  # m, maximum reliable sensing range
    a_min: float  # m/s^2
    a_max: float  # m/s^2
    w_min: float  # m/s^2
    w_max: float  # m/s^2
    class_h_max: dict = field(default_factory=dict)  # per object class override

    def __post_init__(self):
        if not (0.0 < self.c1 <= 1.0 and 0.0 < self.c2 <= 1.0):
            raise ValueError("c1, c2 must lie in (0, 1]")
        if self.t_cycle <= 0.0:
            raise ValueError("t_cycle must be positive")
        if self.k < 0 or self.k != int(self.k):
            raise ValueError("delay step count k must be a nonnegative integer")
        if self.h_max <= 0.0:
            raise ValueError("h_max must be positive")
        if not (self.a_min < 0.0 < self.a_max):
            raise ValueError("acceleration bounds must straddle zero")
        if not (self.w_min <= 0.0 <= self.w_max):
            raise ValueError("disturbance bounds must contain zero")

    def sensing_range(self, object_class=None):
        return float(self.class_h_max.get(object_class, self.h_max))


@dataclass(frozen=True)
class OddParams:
    """Operational design domain bounds, common to all configurations."""

    h_min: float  # m
    t_h_min: float  # s
    v_min: float  # m/s
    v_max: float  # m/s
    v_T_min: float  # m/s
    v_T_max: float  # m/s
    a_T_min: float  # m/s^2, front object acceleration bounds
    a_T_max: float  # m/s^2

    def __post_init__(self):
        if self.h_min <= 0.0 or self.t_h_min <= 0.0:
            raise ValueError("h_min and t_h_min must be positive")
        if not (0.0 < self.v_min < self.v_max):
            raise ValueError("need 0 < v_min < v_max")
        if not (self.v_T_min < self.v_T_max):
            raise ValueError("need v_T_min < v_T_max")
        if not (self.a_T_min < 0.0 < self.a_T_max):
            raise ValueError("front object acceleration bounds must straddle zero")


@dataclass(frozen=True)
class DriverParams:
    """Driver-selected setpoints plus the perceived object class."""

    v_d: float  # m/s
    t_h_d: float  # s
    object_class: str = "car"

    def __post_init__(self):
        if self.object_class not in ("car", "pedestrian"):
            raise ValueError("object_class must be 'car' or 'pedestrian'")


def validate_driver(driver, odd):
    if not (odd.v_min <= driver.v_d <= odd.v_max):
        raise ValueError("desired velocity outside the ODD velocity range")
    if driver.t_h_d < odd.t_h_min:
        raise ValueError("desired time headway below the ODD minimum")


@dataclass(frozen=True, eq=False)
class LinearDynamics:
    """Exact zero-order-hold discretization of the longitudinal model."""

    A: np.ndarray  # 3x3
    B_a: np.ndarray  # control column
    B_f: np.ndarray  # front-object column
    E: np.ndarray  # disturbance column
    t_s: float

    def step(self, x, a, a_T=0.0, w=0.0):
        return self.A @ x + self.B_a * a + self.B_f * a_T + self.E * w


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """Delay-free form: physical state extended by k queued controls.

    State layout [v, v_T, h, q_1, ..., q_k] where q_1 is the control
    applied at the current step and a fresh control enters the queue
    tail.  For k = 0 this coincides with the underlying dynamics.
    """

    A_aug: np.ndarray
    B_aug: np.ndarray
    B_f_aug: np.ndarray
    E_aug: np.ndarray
    k: int

    @property
    def dim(self):
        return self.A_aug.shape[0]

    def step(self, x, a, a_T=0.0, w=0.0):
        return self.A_aug @ x + self.B_aug * a + self.B_f_aug * a_T + self.E_aug * w

    def step_many(self, X, a, a_T=0.0, w=0.0):
        """Vectorized step for states stacked row-wise."""
        out = X @ self.A_aug.T + np.outer(np.ravel(a), self.B_aug)
        out += np.outer(np.ravel(a_T) * np.ones(len(out)), self.B_f_aug)
        out += np.outer(np.ravel(w) * np.ones(len(out)), self.E_aug)
        return out


def discretize(p):
    """Discrete matrices for one configuration (exact closed forms)."""
    ts = p.t_cycle
    A = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-ts, ts, 1.0]])
    B_a = np.array([p.c1 * ts, 0.0, -0.5 * p.c1 * ts * ts])
    B_f = np.array([0.0, ts, 0.5 * ts * ts])
    E = np.array([p.c2 * ts, 0.0, -0.5 * p.c2 * ts * ts])
    return LinearDynamics(A=A, B_a=B_a, B_f=B_f, E=E, t_s=ts)


def augment(d, k):
    """Krasovskii augmentation: queued controls become states."""
    if k < 0:
        raise ValueError("delay step count must be nonnegative")
    n = 3 + k
    A = np.zeros((n, n))
    A[:3, :3] = d.A
    B = np.zeros(n)
    if k == 0:
        B[:3] = d.B_a
    else:
        A[:3, 3] = d.B_a  # q_1 drives the physical block
        for i in range(k - 1):
            A[3 + i, 4 + i] = 1.0  # queue shift q_i <- q_{i+1}
        B[n - 1] = 1.0  # new control enters the tail
    B_f = np.zeros(n)
    B_f[:3] = d.B_f
    E = np.zeros(n)
    E[:3] = d.E
    return AugmentedSystem(A_aug=A, B_aug=B, B_f_aug=B_f, E_aug=E, k=k)


def build_odd(o, p, object_class=None):
    """Configuration-specific ODD polytope over (v, v_T, h).

    The time-headway constraint h / v >= t_h_min is linearized exactly
    as h - t_h_min * v >= 0, valid because v >= v_min > 0 on the ODD.
    """
    h_max = p.sensing_range(object_class)
    if h_max < o.h_min:
        raise ValueError("empty ODD: sensing range below the minimum headway")
    A = np.array(
        [
            [0.0, 0.0, -1.0],  # h >= h_min
            [o.t_h_min, 0.0, -1.0],  # time headway
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],  # sensing range
        ]
    )
    b = np.array(
        [-o.h_min, 0.0, o.v_max, -o.v_min, o.v_T_max, -o.v_T_min, h_max]
    )
    return HPolytope(A, b)


@dataclass(frozen=True)
class FrontObjectEnvelope:
    """State-conditioned admissibility of the front-object acceleration.

    Scenarios in which the front object leaves its own speed range are
    outside the ODD, so at state x only accelerations keeping
    v_T + t_s * a_T inside [v_T_min, v_T_max] are admissible.  With the
    unconditioned box instead, persistent worst-case braking pushes any
    candidate invariant set's v_T window shut and the maximal RCIS is
    empty.
    """

    v_T_min: float
    v_T_max: float
    t_s: float

    def a_T_bounds(self, v_T, D_box):
        """Admissible a_T interval(s) at the given v_T value(s)."""
        v_T = np.asarray(v_T, dtype=float)
        lo = np.maximum(D_box.lo[0], (self.v_T_min - v_T) / self.t_s)
        hi = np.minimum(D_box.hi[0], (self.v_T_max - v_T) / self.t_s)
        return lo, hi


def front_object_envelope(p, o):
    return FrontObjectEnvelope(v_T_min=o.v_T_min, v_T_max=o.v_T_max, t_s=p.t_cycle)


def build_sets(p, o, object_class=None):
    """Admissible control box, disturbance box and augmented ODD.

    The queued control states are constrained to the control box inside
    the augmented ODD; without that the invariant-set computation would
    admit unreachable queue contents.
    """
    U_a = Box([p.a_min], [p.a_max])
    D_box = Box([o.a_T_min, p.w_min], [o.a_T_max, p.w_max])
    odd = build_odd(o, p, object_class)
    n = 3 + p.k
    A = np.zeros((odd.nrows + 2 * p.k, n))
    A[: odd.nrows, :3] = odd.A
    b = np.concatenate([odd.b, np.empty(2 * p.k)])
    for i in range(p.k):
        r = odd.nrows + 2 * i
        A[r, 3 + i] = 1.0
        b[r] = p.a_max
        A[r + 1, 3 + i] = -1.0
        b[r + 1] = -p.a_min
    return U_a, D_box, HPolytope(A, b, normalize=False)
