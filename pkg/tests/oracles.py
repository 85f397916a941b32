"""Independent numeric oracles used to freeze expected values.

These deliberately avoid the closed forms used by the implementation:
flight times come from integrating the ballistic ODE, retract states from
integrating the constant-acceleration ODE, Jacobians from finite
differences, and oscillator periods from simulating the oscillator.
"""

import math

import numpy as np


def _rk4(f, y, t, dt):
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def ballistic_flight_time(v_up: float, drop: float, g: float,
                          tol: float = 1e-13) -> float:
    """Time for z(0)=drop, dz=v_up, ddz=-g to reach z=0 descending.

    `drop` is the height above the landing level at takeoff.
    """
    if drop == 0.0 and v_up == 0.0:
        return 0.0

    def f(_t, y):
        return np.array([y[1], -g])

    dt = 1e-4
    y = np.array([drop, v_up])
    t = 0.0
    while not (y[0] <= 0.0 and y[1] < 0.0):
        y_prev, t_prev = y.copy(), t
        y = _rk4(f, y, t, dt)
        t += dt
        if t > 1e3:
            raise RuntimeError("no landing found")
    lo, hi = t_prev, t
    y_lo = y_prev
    while hi - lo > tol:
        mid = (lo + hi) / 2
        y_mid = _rk4(f, y_lo, lo, mid - lo)
        if y_mid[0] <= 0.0:
            hi = mid
        else:
            lo, y_lo = mid, y_mid
    return (lo + hi) / 2


def integrate_const_accel(p0: float, v0: float, a: float, duration: float,
                          steps: int = 2000) -> tuple[float, float]:
    """(position, velocity) after integrating constant acceleration."""
    def f(_t, y):
        return np.array([y[1], a])

    y = np.array([p0, v0])
    dt = duration / steps
    t = 0.0
    for _ in range(steps):
        y = _rk4(f, y, t, dt)
        t += dt
    return float(y[0]), float(y[1])


def time_to_velocity(v0: float, a: float, v_target: float,
                     tol: float = 1e-13) -> float:
    """Time for velocity to reach v_target under constant acceleration."""
    def f(_t, y):
        return np.array([a])

    dt = 1e-4
    y = np.array([v0])
    t = 0.0
    sign = 1.0 if v_target >= v0 else -1.0
    while sign * (y[0] - v_target) < 0.0:
        y_prev, t_prev = y.copy(), t
        y = _rk4(f, y, t, dt)
        t += dt
        if t > 1e3:
            raise RuntimeError("velocity target unreachable")
    lo, hi = t_prev, t
    y_lo = y_prev
    while hi - lo > tol:
        mid = (lo + hi) / 2
        y_mid = _rk4(f, y_lo, lo, mid - lo)
        if sign * (y_mid[0] - v_target) >= 0.0:
            hi = mid
        else:
            lo, y_lo = mid, y_mid
    return (lo + hi) / 2


def finite_diff_jacobian(fk, q: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a position map R^3 -> R^3."""
    J = np.zeros((3, 3))
    for j in range(3):
        dq = np.zeros(3)
        dq[j] = eps
        J[:, j] = (fk(q + dq) - fk(q - dq)) / (2 * eps)
    return J


def oscillator_half_period(k: float, m: float, c: float = 0.0,
                           dt: float = 1e-6) -> float:
    """First return of x to 0 for m x'' = -k x - c x', from x=0, v=-1."""
    def f(_t, y):
        return np.array([y[1], (-k * y[0] - c * y[1]) / m])

    y = np.array([0.0, -1.0])
    t = 0.0
    y = _rk4(f, y, t, dt)
    t += dt
    while not (y[0] >= 0.0 and y[1] > 0.0):
        y_prev, t_prev = y.copy(), t
        y = _rk4(f, y, t, dt)
        t += dt
        if t > 1e3:
            raise RuntimeError("no return found")
    lo, hi = t_prev, t
    y_lo = y_prev
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        y_mid = _rk4(f, y_lo, lo, mid - lo)
        if y_mid[0] >= 0.0:
            hi = mid
        else:
            lo, y_lo = mid, y_mid
    return (lo + hi) / 2


def rotation_from_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx
