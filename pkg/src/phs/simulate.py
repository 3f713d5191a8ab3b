"""Implicit midpoint integration of assembled PH-ODEs with energy audits.

For ``x' = A x + B u`` with ``A = J W`` the midpoint step solves

    (I - dt/2 A) x_{k+1} = (I + dt/2 A) x_k + dt B u_mid

and, because ``H`` is quadratic and ``J`` skew, satisfies the discrete
power balance ``H_{k+1} - H_k = dt u_mid^T y_mid`` exactly in exact arithmetic.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .system import DiscreteSystem, hamiltonian

DENSE_LIMIT = 500


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Signal:
    """Boundary input as a function of time.

    ``kind`` is one of ``zero``, ``constant`` and ``step_release``; a released
    signal holds ``value`` strictly before ``release_time`` and is zero after.
    """

    kind: str = "zero"
    value: tuple[float, ...] | None = None
    release_time: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "step_release"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.kind != "zero":
            if self.value is None:
                raise ValueError(f"{self.kind} signal needs a value")
            object.__setattr__(self, "value", tuple(float(v) for v in np.atleast_1d(self.value)))
        if self.kind == "step_release" and (self.release_time is None or not np.isfinite(self.release_time)):
            raise ValueError("step_release needs a finite release_time")

    @classmethod
    def zero(cls) -> "Signal":
        return cls("zero")

    @classmethod
    def constant(cls, value) -> "Signal":
        return cls("constant", value)

    @classmethod
    def step_release(cls, value, release_time: float) -> "Signal":
        return cls("step_release", value, float(release_time))

    def __call__(self, t: float, width: int) -> np.ndarray:
        if self.kind == "zero" or (self.kind == "step_release" and t >= self.release_time):
            return np.zeros(width)
        v = np.asarray(self.value, dtype=float)
        if v.size != width:
            raise ValueError(f"signal has {v.size} components, port expects {width}")
        return v.copy()

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or not any(self.value)


def stack_inputs(sys: DiscreteSystem, signals, t: float) -> np.ndarray:
    """Evaluate one signal per port at ``t`` and stack them in port order."""
    u = np.zeros(sys.n_inputs)
    if signals is None:
        return u
    if isinstance(signals, dict):
        items = [(sys.port(name), sig) for name, sig in signals.items()]
    else:
        if len(signals) != len(sys.ports):
            raise ValueError(f"got {len(signals)} signals for {len(sys.ports)} ports")
        items = list(zip(sys.ports, signals))
    for port, sig in items:
        if sig is not None:
            u[port.slice] = sig(t, port.width)
    return u


class MidpointStepper:
    """Factorizes ``I - dt/2 A`` once and applies midpoint steps.

    ``dt`` may be negative, which steps backwards in time.
    """

    def __init__(self, sys: DiscreteSystem, dt: float):
        if not np.isfinite(dt) or dt == 0:
            raise SolverError(f"time step must be finite and nonzero, got {dt}")
        self.sys = sys
        self.dt = float(dt)
        a = sys.system_matrix()
        n = sys.n_states
        self.dense = n < DENSE_LIMIT
        if self.dense:
            a = a.toarray()
            lhs = np.eye(n) - 0.5 * dt * a
            self.rhs_mat = np.eye(n) + 0.5 * dt * a
            self.condition = float(np.linalg.cond(lhs, 1))
            self._lu = sla.lu_factor(lhs, check_finite=True)
            self._solve = lambda r: sla.lu_solve(self._lu, r, check_finite=False)
        else:
            eye = sp.identity(n, format="csc")
            lhs = (eye - 0.5 * dt * a).tocsc()
            self.rhs_mat = (eye + 0.5 * dt * a).tocsr()
            lu = spla.splu(lhs)
            self._solve = lu.solve
            try:
                inv_norm = spla.onenormest(spla.LinearOperator(lhs.shape, matvec=lu.solve, rmatvec=lambda r: lu.solve(r, trans="T")))
            except Exception:  # estimator failure is not fatal
                inv_norm = np.nan
            self.condition = float(spla.norm(lhs, 1) * inv_norm)
        if not np.isfinite(self.condition) or self.condition > 1e14:
            raise SolverError(f"midpoint matrix is ill-conditioned (1-norm condition estimate {self.condition:.3e})")
        self.b_dt = sys.b_mat * dt

    def step(self, x, u_mid=None) -> np.ndarray:
        r = self.rhs_mat @ x
        if u_mid is not None and self.sys.n_inputs:
            r = r + self.b_dt @ u_mid
        x_new = self._solve(r)
        if not np.all(np.isfinite(x_new)):
            raise SolverError("non-finite state produced by midpoint solve")
        return x_new


_steppers: "weakref.WeakKeyDictionary[DiscreteSystem, dict[float, MidpointStepper]]" = weakref.WeakKeyDictionary()


def stepper_for(sys: DiscreteSystem, dt: float) -> MidpointStepper:
    cache = _steppers.setdefault(sys, {})
    if dt not in cache:
        cache[dt] = MidpointStepper(sys, dt)
    return cache[dt]


def midpoint_step(sys: DiscreteSystem, x_k, u_mid=None, dt: float = 1e-3) -> np.ndarray:
    """One implicit midpoint step; the factorization is cached per ``(sys, dt)``."""
    x_k = np.asarray(x_k, dtype=float)
    if x_k.shape != (sys.n_states,):
        raise ValueError(f"state has shape {x_k.shape}, expected ({sys.n_states},)")
    if not np.all(np.isfinite(x_k)):
        raise SolverError("non-finite state")
    if u_mid is not None:
        u_mid = np.asarray(u_mid, dtype=float)
        if u_mid.shape != (sys.n_inputs,):
            raise ValueError(f"input has shape {u_mid.shape}, expected ({sys.n_inputs},)")
        if not np.all(np.isfinite(u_mid)):
            raise SolverError("non-finite input")
    return stepper_for(sys, dt).step(x_k, u_mid)


@dataclass
class Trajectory:
    """Recorded run; inputs, outputs and residuals are per step (at midpoints)."""

    times: np.ndarray
    states: np.ndarray
    hamiltonian: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    residual: np.ndarray
    dt: float

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def max_relative_drift(self, start: int = 0) -> float:
        h = self.hamiltonian[start:]
        ref = h[0]
        scale = ref if ref > 0 else max(np.abs(h).max(), np.finfo(float).tiny)
        return float(np.abs(h - ref).max() / scale)

    def port_power(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.inputs, self.outputs)


def simulate(sys: DiscreteSystem, signals=None, dt: float = 1e-3, t_end: float = 1.0, x0=None) -> Trajectory:
    """Integrate from ``x0`` (rest by default) to ``t_end`` with inputs sampled at midpoints."""
    if not (np.isfinite(dt) and dt > 0):
        raise SolverError(f"dt must be positive, got {dt}")
    if not (np.isfinite(t_end) and t_end > 0):
        raise SolverError(f"t_end must be positive, got {t_end}")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    stepper = stepper_for(sys, dt)
    w = sys.q_weights
    bt_w = (sys.b_mat.T @ w).tocsr()

    x = np.zeros(sys.n_states) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (sys.n_states,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({sys.n_states},)")
    times = dt * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, sys.n_states))
    energy = np.empty(n_steps + 1)
    inputs = np.empty((n_steps, sys.n_inputs))
    outputs = np.empty((n_steps, sys.n_inputs))
    residual = np.empty(n_steps)
    states[0] = x
    energy[0] = hamiltonian(sys, x)
    for k in range(n_steps):
        u = stack_inputs(sys, signals, times[k] + 0.5 * dt)
        x_new = stepper.step(x, u)
        y = bt_w @ (0.5 * (x + x_new))
        states[k + 1] = x_new
        energy[k + 1] = hamiltonian(sys, x_new)
        inputs[k], outputs[k] = u, y
        residual[k] = energy[k + 1] - energy[k] - dt * float(u @ y)
        x = x_new
    return Trajectory(times, states, energy, inputs, outputs, residual, dt)


@dataclass(frozen=True)
class Equilibrium:
    state: np.ndarray
    residual: float
    exists: bool


def static_equilibrium(sys: DiscreteSystem, u_const, tol: float = 1e-9) -> Equilibrium:
    """Minimum-norm least-squares solution of ``A x + B u = 0``.

    ``exists`` is False when the residual, relative to ``|B u|``, exceeds ``tol``;
    conservative systems need not admit an equilibrium for every load.
    """
    u = np.asarray(u_const, dtype=float)
    if u.shape != (sys.n_inputs,):
        raise ValueError(f"input has shape {u.shape}, expected ({sys.n_inputs},)")
    a = sys.system_matrix().toarray()
    rhs = -(sys.b_mat @ u)
    scale = np.linalg.norm(rhs)
    if scale == 0:
        return Equilibrium(np.zeros(sys.n_states), 0.0, True)
    x, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    res = float(np.linalg.norm(a @ x - rhs))
    return Equilibrium(x, res, res <= tol * scale)
