"""Continuous model description shared by the 1D and 2D discretizations.

A model is the split linear port-Hamiltonian PDE

    p_t = (P1 d/dx1 + P2 d/dx2 + P0) e_q
    q_t = (P1^T d/dx1 + P2^T d/dx2 - P0^T) e_p

with quadratic energy densities, so that the co-energies are
``e_p = Q_p(x) p`` and ``e_q = Q_q(x) q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

P_FAMILY = "p"
Q_FAMILY = "q"
FAMILIES = (P_FAMILY, Q_FAMILY)

EDGES = ("left", "right", "bottom", "top")


class ModelError(ValueError):
    """Raised when a model or one of its parts is malformed."""


def _as_family(tag: str) -> str:
    # accept the long "q-effort-input" spelling used in configs
    t = str(tag).lower().split("-")[0]
    if t not in FAMILIES:
        raise ModelError(f"unknown port family tag {tag!r} (expected 'p' or 'q')")
    return t


@dataclass(frozen=True)
class CoefficientSet:
    """Constant matrices of the interconnection operator.

    All matrices have shape ``(n_p, n_q)``; ``p2`` is present only for 2D models.
    """

    p1: np.ndarray
    p0: np.ndarray
    p2: np.ndarray | None = None

    def __post_init__(self):
        for name in ("p1", "p0", "p2"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.atleast_2d(np.asarray(val, dtype=float))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_p(self) -> int:
        return self.p1.shape[0]

    @property
    def n_q(self) -> int:
        return self.p1.shape[1]

    @property
    def dimension(self) -> int:
        return 1 if self.p2 is None else 2


class QuadraticDensity:
    """Energy density ``1/2 z^T Q(x) z`` given through its weight matrix.

    ``weight`` is either a constant square matrix or a callable returning one
    for a spatial point (a float in 1D, a pair in 2D).
    """

    def __init__(self, weight: np.ndarray | Callable[[Any], np.ndarray], size: int | None = None):
        if callable(weight):
            if size is None:
                raise ModelError("size is required for a spatially varying density")
            self._func = weight
            self._const = None
            self.size = int(size)
        else:
            w = np.atleast_2d(np.asarray(weight, dtype=float))
            if w.shape[0] != w.shape[1]:
                raise ModelError(f"density weight must be square, got {w.shape}")
            w.setflags(write=False)
            self._func = None
            self._const = w
            self.size = w.shape[0]

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "QuadraticDensity":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    def weight_at(self, point) -> np.ndarray:
        if self._const is not None:
            return self._const
        w = np.atleast_2d(np.asarray(self._func(point), dtype=float))
        if w.shape != (self.size, self.size):
            raise ModelError(f"density returned shape {w.shape}, expected {(self.size, self.size)}")
        return w

    def __repr__(self):
        kind = "constant" if self.is_constant else "varying"
        return f"QuadraticDensity({kind}, size={self.size})"


@dataclass(frozen=True)
class BoundarySpec1D:
    """Port families at both ends of the interval plus their input signals.

    A missing signal means a zero input.
    """

    at_a: str
    at_b: str
    signal_a: Any = None
    signal_b: Any = None

    def __post_init__(self):
        object.__setattr__(self, "at_a", _as_family(self.at_a))
        object.__setattr__(self, "at_b", _as_family(self.at_b))


@dataclass(frozen=True)
class BoundarySpec2D:
    """One port family per rectangle edge.

    ``loads`` maps boundary coordinates ``(x1, x2)`` to signals; every other
    boundary port receives a zero input.
    """

    left: str
    right: str
    bottom: str
    top: str
    loads: Mapping[tuple[float, float], Any] = field(default_factory=dict)

    def __post_init__(self):
        for edge in EDGES:
            object.__setattr__(self, edge, _as_family(getattr(self, edge)))
        object.__setattr__(self, "loads", dict(self.loads))

    def edge_tags(self) -> dict[str, str]:
        return {edge: getattr(self, edge) for edge in EDGES}


@dataclass(frozen=True)
class ContinuousModel:
    """A linear port-Hamiltonian PDE on an interval or a rectangle.

    ``domain`` is ``(a, b)`` in 1D and ``(L1, L2)`` in 2D (rectangle anchored
    at the origin).
    """

    dimension: int
    domain: tuple[float, float]
    coefficients: CoefficientSet
    density_p: QuadraticDensity
    density_q: QuadraticDensity
    boundary: BoundarySpec1D | BoundarySpec2D
    name: str = "model"

    def sample_points(self, n: int = 5) -> list:
        """Points used to check density invariants."""
        if self.dimension == 1:
            a, b = self.domain
            return list(np.linspace(a, b, n))
        L1, L2 = self.domain
        return [(x, y) for y in np.linspace(0.0, L2, n) for x in np.linspace(0.0, L1, n)]


def _full_rank(mat: np.ndarray) -> bool:
    return np.linalg.matrix_rank(mat) == min(mat.shape)


def _density_violations(label: str, density: QuadraticDensity, points) -> list[str]:
    out = []
    for pt in points:
        try:
            w = density.weight_at(pt)
        except Exception as exc:  # a user callable may fail anywhere
            out.append(f"{label} could not be evaluated at {pt}: {exc}")
            break
        if not np.all(np.isfinite(w)):
            out.append(f"{label} not finite at {pt}")
            break
        scale = max(np.abs(w).max(), np.finfo(float).tiny)
        if np.abs(w - w.T).max() > 8 * np.finfo(float).eps * scale:
            out.append(f"{label} not symmetric at {pt}")
            break
        if np.linalg.eigvalsh(0.5 * (w + w.T)).min() <= 0.0:
            out.append(f"{label} density not positive definite at {pt}")
            break
    return out


def validate_model(model: ContinuousModel) -> list[str]:
    """Return every structural problem of ``model``; an empty list means admissible."""
    problems: list[str] = []
    c = model.coefficients
    if model.dimension not in (1, 2):
        problems.append(f"dimension must be 1 or 2, got {model.dimension}")
        return problems

    dom = np.asarray(model.domain, dtype=float)
    if dom.shape != (2,) or not np.all(np.isfinite(dom)):
        problems.append(f"domain must be two finite numbers, got {model.domain}")
    elif model.dimension == 1 and not dom[1] > dom[0]:
        problems.append(f"domain length must be positive, got [{dom[0]}, {dom[1]}]")
    elif model.dimension == 2 and not (dom[0] > 0 and dom[1] > 0):
        problems.append(f"rectangle sides must be positive, got {tuple(dom)}")

    shape = c.p1.shape
    if c.p0.shape != shape:
        problems.append(f"p0 shape {c.p0.shape} differs from p1 shape {shape}")
    if not _full_rank(c.p1):
        problems.append("p1 rank-deficient")
    if model.dimension == 2:
        if c.p2 is None:
            problems.append("2D model requires p2")
        else:
            if c.p2.shape != shape:
                problems.append(f"p2 shape {c.p2.shape} differs from p1 shape {shape}")
            elif not _full_rank(c.p2):
                problems.append("p2 rank-deficient")
    elif c.p2 is not None:
        problems.append("1D model must not define p2")

    if model.density_p.size != c.n_p:
        problems.append(f"density_p has size {model.density_p.size}, expected n_p={c.n_p}")
    if model.density_q.size != c.n_q:
        problems.append(f"density_q has size {model.density_q.size}, expected n_q={c.n_q}")

    if not problems:
        pts = model.sample_points()
        problems += _density_violations("density_p", model.density_p, pts)
        problems += _density_violations("density_q", model.density_q, pts)

    wanted = BoundarySpec1D if model.dimension == 1 else BoundarySpec2D
    if not isinstance(model.boundary, wanted):
        problems.append(f"boundary must be a {wanted.__name__} for a {model.dimension}D model")
    return problems


def coenergy(density: QuadraticDensity, point, state) -> np.ndarray:
    """Co-energy ``Q(point) @ state`` of a quadratic density."""
    z = np.asarray(state, dtype=float).reshape(-1)
    if z.size != density.size:
        raise ModelError(f"state has length {z.size}, density expects {density.size}")
    return density.weight_at(point) @ z
