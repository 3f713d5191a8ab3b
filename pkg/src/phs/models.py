"""Concrete models: 1D/2D wave equations, Timoshenko beam, Mindlin plate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BoundarySpec1D,
    BoundarySpec2D,
    CoefficientSet,
    ContinuousModel,
    ModelError,
    QuadraticDensity,
)
from .simulate import Signal

GRAVITY = 9.81


def shear_modulus(young_modulus: float, poisson_ratio: float) -> float:
    return young_modulus / (2.0 * (1.0 + poisson_ratio))


def _require_positive(**values):
    bad = [f"{k}={v}" for k, v in values.items() if not (np.isfinite(v) and v > 0)]
    if bad:
        raise ModelError("parameters must be positive: " + ", ".join(bad))


def _require_poisson(nu: float):
    if not 0.0 < nu < 0.5:
        raise ModelError(f"poisson ratio ν = {nu} out of (0, 0.5)")


def wave_1d(density: float = 1.0, modulus: float = 1.0, length: float = 1.0,
            at_a: str = "p", at_b: str = "q", signal_a=None, signal_b=None) -> ContinuousModel:
    """String/rod ``rho u_tt = E u_xx`` with ``p = rho u_t`` and ``q = u_x``.

    The default boundary is fixed at ``a`` (zero velocity) and free at ``b``.
    """
    _require_positive(density=density, modulus=modulus, length=length)
    return ContinuousModel(
        dimension=1,
        domain=(0.0, float(length)),
        coefficients=CoefficientSet(p1=[[1.0]], p0=[[0.0]]),
        density_p=QuadraticDensity([[1.0 / density]]),
        density_q=QuadraticDensity([[float(modulus)]]),
        boundary=BoundarySpec1D(at_a, at_b, signal_a, signal_b),
        name="wave_1d",
    )


@dataclass(frozen=True)
class TimoshenkoParams:
    length: float = 1.0
    area: float = math.pi * 0.02**2
    second_moment: float = math.pi * 0.02**4 / 4
    density: float = 2698.9
    young_modulus: float = 68e9
    poisson_ratio: float = 0.36
    shear_factor: float | None = None
    tip_mass: float = 2.0
    release_time: float = 7.0

    @classmethod
    def disc(cls, radius: float, **kw) -> "TimoshenkoParams":
        """Solid circular section of the given radius."""
        _require_positive(radius=radius)
        return cls(area=math.pi * radius**2, second_moment=math.pi * radius**4 / 4, **kw)

    @property
    def kappa(self) -> float:
        # circular-section default
        if self.shear_factor is not None:
            return self.shear_factor
        nu = self.poisson_ratio
        return 6 * (1 + nu) / (7 + 6 * nu)

    def validate(self):
        _require_positive(length=self.length, area=self.area, second_moment=self.second_moment,
                          density=self.density, young_modulus=self.young_modulus, kappa=self.kappa)
        _require_poisson(self.poisson_ratio)
        if self.tip_mass < 0 or not np.isfinite(self.release_time) or self.release_time < 0:
            raise ModelError("tip_mass and release_time must be non-negative")


def timoshenko(params: TimoshenkoParams | None = None) -> ContinuousModel:
    """Cantilever clamped at ``0`` with the tip weight released at ``release_time``.

    p = (transverse momentum, angular momentum), q = (shear strain, curvature).
    """
    pr = params or TimoshenkoParams()
    pr.validate()
    G = shear_modulus(pr.young_modulus, pr.poisson_ratio)
    rho = pr.density
    tip = Signal.step_release((-pr.tip_mass * GRAVITY, 0.0), pr.release_time) if pr.tip_mass else Signal.zero()
    return ContinuousModel(
        dimension=1,
        domain=(0.0, pr.length),
        coefficients=CoefficientSet(p1=np.eye(2), p0=[[0.0, 0.0], [1.0, 0.0]]),
        density_p=QuadraticDensity.diagonal([1 / (rho * pr.area), 1 / (rho * pr.second_moment)]),
        density_q=QuadraticDensity.diagonal([pr.kappa * G * pr.area, pr.young_modulus * pr.second_moment]),
        boundary=BoundarySpec1D("p", "q", Signal.zero(), tip),
        name="timoshenko",
    )


def wave_2d(density: float = 1.0, modulus: float = 1.0, L1: float = 1.0, L2: float = 1.0,
            edges: dict[str, str] | None = None, loads=None) -> ContinuousModel:
    """Membrane ``rho w_tt = T lap w``; p = rho w_t, q = grad w.

    All edges default to p (fixed, zero velocity).
    """
    _require_positive(density=density, modulus=modulus, L1=L1, L2=L2)
    tags = {"left": "p", "right": "p", "bottom": "p", "top": "p", **(edges or {})}
    return ContinuousModel(
        dimension=2,
        domain=(float(L1), float(L2)),
        coefficients=CoefficientSet(p1=[[1.0, 0.0]], p2=[[0.0, 1.0]], p0=[[0.0, 0.0]]),
        density_p=QuadraticDensity([[1.0 / density]]),
        density_q=QuadraticDensity(float(modulus) * np.eye(2)),
        boundary=BoundarySpec2D(**tags, loads=loads or {}),
        name="wave_2d",
    )


MINDLIN_P1 = np.array([[0, 0, 0, 1, 0], [1, 0, 0, 0, 0], [0, 0, 1, 0, 0]], dtype=float)
MINDLIN_P2 = np.array([[0, 0, 0, 0, 1], [0, 0, 1, 0, 0], [0, 1, 0, 0, 0]], dtype=float)
MINDLIN_P0 = np.array([[0, 0, 0, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]], dtype=float)

_OPPOSITE = {"left": "right", "right": "left", "bottom": "top", "top": "bottom"}


@dataclass(frozen=True)
class MindlinParams:
    L1: float = 0.6
    L2: float = 0.4
    thickness: float = 0.003
    density: float = 2698.9
    young_modulus: float = 68e9
    poisson_ratio: float = 0.36
    shear_factor: float = 5.0 / 6.0
    mass: float = 2.0
    clamped_edge: str = "left"
    loaded_edge: str = "right"
    attachment: float = 0.16  # coordinate along the loaded edge
    release_time: float = 7.0

    def validate(self):
        _require_positive(L1=self.L1, L2=self.L2, thickness=self.thickness, density=self.density,
                          young_modulus=self.young_modulus, shear_factor=self.shear_factor)
        _require_poisson(self.poisson_ratio)
        if self.clamped_edge not in _OPPOSITE or self.loaded_edge not in _OPPOSITE:
            raise ModelError(f"unknown edge name in {self.clamped_edge!r}, {self.loaded_edge!r}")
        if self.loaded_edge == self.clamped_edge:
            raise ModelError(f"edge {self.loaded_edge!r} tagged twice (clamped and loaded)")
        if self.loaded_edge != _OPPOSITE[self.clamped_edge]:
            raise ModelError(
                f"loaded edge must face the clamped edge {self.clamped_edge!r} so the two "
                f"remaining edges are opposite free edges, got {self.loaded_edge!r}"
            )
        if self.mass < 0 or self.release_time < 0:
            raise ModelError("mass and release_time must be non-negative")
        span = self.L2 if self.loaded_edge in ("left", "right") else self.L1
        if not 0.0 < self.attachment < span:
            raise ModelError(f"attachment {self.attachment} must lie strictly inside the loaded edge (0, {span})")

    @property
    def bending_rigidity(self) -> float:
        nu = self.poisson_ratio
        return self.young_modulus * self.thickness**3 / (12 * (1 - nu**2))

    def attachment_point(self) -> tuple[float, float]:
        s = self.attachment
        return {
            "left": (0.0, s),
            "right": (self.L1, s),
            "bottom": (s, 0.0),
            "top": (s, self.L2),
        }[self.loaded_edge]


def mindlin(params: MindlinParams | None = None) -> ContinuousModel:
    """Plate clamped on one edge, free on the two edges beside it, loaded on the last.

    p = (transverse, two angular momenta), q = (k_xx, k_yy, k_xy, g_x, g_y).
    """
    pr = params or MindlinParams()
    pr.validate()
    nu, t, rho = pr.poisson_ratio, pr.thickness, pr.density
    D = pr.bending_rigidity
    G = shear_modulus(pr.young_modulus, nu)
    bending = D * np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]])
    shear = pr.shear_factor * G * t * np.eye(2)
    weight_q = np.zeros((5, 5))
    weight_q[:3, :3], weight_q[3:, 3:] = bending, shear

    tags = {edge: "q" for edge in _OPPOSITE}
    tags[pr.clamped_edge] = "p"
    loads = {}
    if pr.mass:
        loads[pr.attachment_point()] = Signal.step_release((-pr.mass * GRAVITY, 0.0, 0.0), pr.release_time)
    return ContinuousModel(
        dimension=2,
        domain=(pr.L1, pr.L2),
        coefficients=CoefficientSet(p1=MINDLIN_P1, p2=MINDLIN_P2, p0=MINDLIN_P0),
        density_p=QuadraticDensity.diagonal([1 / (rho * t), 12 / (rho * t**3), 12 / (rho * t**3)]),
        density_q=QuadraticDensity(weight_q),
        boundary=BoundarySpec2D(**tags, loads=loads),
        name="mindlin",
    )
