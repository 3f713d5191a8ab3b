"""Staggered-grid discretization of 1D port-Hamiltonian systems.

The interval ``[a, b]`` is cut into ``K`` half-steps of length ``h``.  Grid
points alternate between the p and q families, so every interior point of a
family sits at the centre of two points of the other family.  Each state
derivative is approximated from a first-order Taylor fit through those two
neighbours, which for the differential part is the centred difference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import (
    P_FAMILY,
    Q_FAMILY,
    BoundarySpec1D,
    CoefficientSet,
    ContinuousModel,
    ModelError,
    _as_family,
    validate_model,
)
from .system import DiscreteSystem, Port, StateBlock, block_diag_weights, skew_from_upper


class GridError(ModelError):
    """Raised for degenerate grids or boundary layouts that do not fit a grid."""


def _other(family: str) -> str:
    return Q_FAMILY if family == P_FAMILY else P_FAMILY


@dataclass(frozen=True)
class StaggeredGrid1D:
    """Interleaved point families on ``[a, b]``; point ``i`` sits at ``a + i h``."""

    a: float
    b: float
    K: int
    family_at_a: str

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.K

    @property
    def points(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.K + 1)

    def family(self, i: int) -> str:
        return self.family_at_a if i % 2 == 0 else _other(self.family_at_a)

    @property
    def family_at_b(self) -> str:
        return self.family(self.K)

    def indices(self, family: str, interior: bool | None = None) -> list[int]:
        """Lattice indices of ``family``; ``interior`` filters interior/boundary."""
        out = []
        for i in range(self.K + 1):
            if self.family(i) != family:
                continue
            on_boundary = i in (0, self.K)
            if interior is None or interior != on_boundary:
                out.append(i)
        return out

    @property
    def psi_p(self) -> np.ndarray:
        return self.points[self.indices(P_FAMILY)]

    @property
    def psi_q(self) -> np.ndarray:
        return self.points[self.indices(Q_FAMILY)]

    @property
    def n_interior_p(self) -> int:
        return len(self.indices(P_FAMILY, interior=True))

    @property
    def n_interior_q(self) -> int:
        return len(self.indices(Q_FAMILY, interior=True))

    def is_boundary(self, i: int) -> bool:
        return i == 0 or i == self.K

    def coordinate(self, i: int) -> float:
        # endpoints are returned exactly
        if i == self.K:
            return float(self.b)
        return float(self.a + i * self.h)


def build_grid_1d(a: float, b: float, K: int, family_at_a: str) -> StaggeredGrid1D:
    """Staggered grid with ``K`` half-steps, ``family_at_a`` owning the left end."""
    if not (np.isfinite(a) and np.isfinite(b)):
        raise GridError(f"endpoints must be finite, got a={a}, b={b}")
    if not b > a:
        raise GridError(f"need b > a, got a={a}, b={b}")
    if int(K) != K or K < 3:
        raise GridError(f"need an integer K >= 3 half-steps (one interior point per family), got {K}")
    return StaggeredGrid1D(float(a), float(b), int(K), _as_family(family_at_a))


def local_stencil_1d(coefficients: CoefficientSet, h: float, target_family: str):
    """Blocks applied to the (left, right) neighbour co-energies of a target point.

    For a q target the blocks act on p co-energies, for a p target on q ones.
    """
    if not h > 0:
        raise GridError(f"h must be positive, got {h}")
    p1, p0 = coefficients.p1, coefficients.p0
    if _as_family(target_family) == Q_FAMILY:
        return (-p1.T - h * p0.T) / (2 * h), (p1.T - h * p0.T) / (2 * h)
    return (h * p0 - p1) / (2 * h), (h * p0 + p1) / (2 * h)


def connection_coefficients_1d(grid: StaggeredGrid1D) -> dict[str, np.ndarray]:
    """Integer neighbour patterns ``I1``/``I0`` for p rows and for q rows.

    ``I1_p``/``I0_p`` have one row per interior p point and one column per
    interior q point; ``I1_q``/``I0_q`` the other way round.
    """
    out = {}
    for fam in (P_FAMILY, Q_FAMILY):
        rows = grid.indices(fam, interior=True)
        cols = {i: k for k, i in enumerate(grid.indices(_other(fam), interior=True))}
        i1 = np.zeros((len(rows), len(cols)), dtype=int)
        i0 = np.zeros_like(i1)
        for r, i in enumerate(rows):
            for nb, sign in ((i - 1, -1), (i + 1, 1)):
                if nb in cols:
                    i1[r, cols[nb]] = sign
                    i0[r, cols[nb]] = 1
        out[f"I1_{fam}"] = i1
        out[f"I0_{fam}"] = i0
    return out


def check_boundary_1d(boundary: BoundarySpec1D, grid: StaggeredGrid1D) -> None:
    for end, tag, owner in (("a", boundary.at_a, grid.family_at_a), ("b", boundary.at_b, grid.family_at_b)):
        if tag != owner:
            raise GridError(
                f"boundary at {end} is tagged as a {tag}-effort input but the grid puts a "
                f"{owner} point there (K={grid.K}, family_at_a={grid.family_at_a})"
            )


def _state_layout(grid: StaggeredGrid1D, n_p: int, n_q: int):
    states, offset = [], 0
    slots = {}
    for fam, n in ((P_FAMILY, n_p), (Q_FAMILY, n_q)):
        for i in grid.indices(fam, interior=True):
            states.append(StateBlock(fam, (grid.coordinate(i),), offset, offset + n, (i,)))
            slots[i] = (offset, offset + n)
            offset += n
    return states, slots


def assemble_1d(model: ContinuousModel, grid: StaggeredGrid1D) -> DiscreteSystem:
    """Explicit PH-ODE of ``model`` on ``grid``.

    The p-row block of the interconnection is built from the connection
    patterns; the q-row block is its negated transpose.
    """
    if model.dimension != 1:
        raise ModelError("assemble_1d needs a 1D model")
    problems = validate_model(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))
    if not np.isclose(grid.a, model.domain[0]) or not np.isclose(grid.b, model.domain[1]):
        raise GridError(f"grid [{grid.a}, {grid.b}] does not match model domain {model.domain}")
    check_boundary_1d(model.boundary, grid)

    c = model.coefficients
    n_p, n_q, h = c.n_p, c.n_q, grid.h
    conn = connection_coefficients_1d(grid)
    pdp = np.kron(conn["I1_p"], c.p1) + np.kron(conn["I0_p"], c.p0 * h)
    upper = sp.csr_matrix(pdp / (2 * h) / (2 * h))

    states, slots = _state_layout(grid, n_p, n_q)
    n_states = states[-1].stop
    np_total = grid.n_interior_p * n_p
    j_mat = skew_from_upper(upper, np_total, grid.n_interior_q * n_q)

    weights = []
    for s in states:
        dens = model.density_p if s.family == P_FAMILY else model.density_q
        weights.append(2 * h * dens.weight_at(s.point[0]))
    w = block_diag_weights(weights)

    # inputs: q-family ports first (they drive p rows), then p-family ports
    left_q, right_q = local_stencil_1d(c, h, Q_FAMILY)
    ports, cols = [], []
    col = 0
    for fam in (Q_FAMILY, P_FAMILY):
        for i in grid.indices(fam, interior=False):
            nb = i + 1 if i == 0 else i - 1
            r0, r1 = slots[nb]
            block = np.zeros((n_states, n_p))
            if fam == Q_FAMILY:
                block[r0:r1] = np.eye(n_p) / (2 * h)
            else:
                # boundary below its q neighbour is that neighbour's left point
                block[r0:r1] = left_q if i == 0 else right_q
            end = "a" if i == 0 else "b"
            ports.append(Port(end, fam, (grid.coordinate(i),), col, col + n_p, (i,)))
            cols.append(block)
            col += n_p
    b_mat = sp.csr_matrix(np.hstack(cols))

    return DiscreteSystem(
        j_mat=j_mat,
        b_mat=b_mat,
        q_weights=w,
        states=states,
        ports=ports,
        n_p=n_p,
        n_q=n_q,
        steps=(h,),
        measure=2 * h,
        connections=conn,
        label=model.name,
    )


def discretize_1d(model: ContinuousModel, K: int) -> DiscreteSystem:
    """Build the grid matching ``model.boundary`` and assemble."""
    a, b = model.domain
    return assemble_1d(model, build_grid_1d(a, b, K, model.boundary.at_a))
