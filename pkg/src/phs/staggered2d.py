"""Two-grid staggered discretization on the rectangle ``[0, L1] x [0, L2]``.

Lattice site ``(i, j)`` sits at ``(i h1, j h2)``.  The q family takes sites
with ``i = m_q (mod 2)`` and ``j = n_q (mod 2)``, the p family the opposite
parities; the mixed-parity sites belong to neither.  Each interior point is
the centre of four diagonal neighbours of the other family, and its state
derivative comes from a bilinear Taylor fit through them.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .core import P_FAMILY, Q_FAMILY, BoundarySpec2D, ContinuousModel, ModelError, validate_model
from .staggered1d import GridError
from .system import DiscreteSystem, Port, StateBlock, block_diag_weights, skew_from_upper

# corner order (--, +-, -+, ++) relative to the stencil centre
CORNERS = ((-1, -1), (1, -1), (-1, 1), (1, 1))


@dataclass(frozen=True)
class StaggeredGrid2D:
    L1: float
    L2: float
    N1: int
    N2: int
    offsets: tuple[int, int]

    @property
    def h1(self) -> float:
        return self.L1 / self.N1

    @property
    def h2(self) -> float:
        return self.L2 / self.N2

    def parities(self, family: str) -> tuple[int, int]:
        m_q, n_q = self.offsets
        return (m_q, n_q) if family == Q_FAMILY else (1 - m_q, 1 - n_q)

    def family(self, i: int, j: int) -> str | None:
        if not (0 <= i <= self.N1 and 0 <= j <= self.N2):
            return None
        for fam in (Q_FAMILY, P_FAMILY):
            if (i % 2, j % 2) == self.parities(fam):
                return fam
        return None

    def coordinate(self, i: int, j: int) -> tuple[float, float]:
        x = self.L1 if i == self.N1 else i * self.h1
        y = self.L2 if j == self.N2 else j * self.h2
        return (float(x), float(y))

    def is_boundary(self, i: int, j: int) -> bool:
        return i in (0, self.N1) or j in (0, self.N2)

    def edges_of(self, i: int, j: int) -> tuple[str, ...]:
        out = []
        if i == 0:
            out.append("left")
        if i == self.N1:
            out.append("right")
        if j == 0:
            out.append("bottom")
        if j == self.N2:
            out.append("top")
        return tuple(out)

    def indices(self, family: str, interior: bool | None = None) -> list[tuple[int, int]]:
        """Sites of ``family`` ordered row-major (by ``j``, then ``i``)."""
        mi, nj = self.parities(family)
        out = []
        for j in range(nj, self.N2 + 1, 2):
            for i in range(mi, self.N1 + 1, 2):
                if interior is None or interior != self.is_boundary(i, j):
                    out.append((i, j))
        return out

    @cached_property
    def edge_owner(self) -> dict[str, str]:
        """Family occupying each edge; a function of offsets and parities only."""
        m_q, n_q = self.offsets
        own = lambda q_parity, site: Q_FAMILY if site % 2 == q_parity else P_FAMILY
        return {
            "left": own(m_q, 0),
            "right": own(m_q, self.N1),
            "bottom": own(n_q, 0),
            "top": own(n_q, self.N2),
        }

    def neighbours(self, i: int, j: int) -> list[tuple[int, int, int, int]]:
        """Diagonal neighbours ``(i', j', s1, s2)`` in corner order."""
        return [(i + s1, j + s2, s1, s2) for s1, s2 in CORNERS]


def build_grid_2d(L1: float, L2: float, N1: int, N2: int, offsets=(1, 0)) -> StaggeredGrid2D:
    if not (np.isfinite(L1) and np.isfinite(L2) and L1 > 0 and L2 > 0):
        raise GridError(f"rectangle sides must be positive and finite, got {L1}, {L2}")
    for name, n in (("N1", N1), ("N2", N2)):
        if int(n) != n or n < 3:
            raise GridError(f"{name} must be an integer >= 3, got {n}")
    m_q, n_q = (int(o) for o in offsets)
    if m_q not in (0, 1) or n_q not in (0, 1):
        raise GridError(f"offsets must be 0 or 1, got {offsets}")
    grid = StaggeredGrid2D(float(L1), float(L2), int(N1), int(N2), (m_q, n_q))
    for fam in (P_FAMILY, Q_FAMILY):
        for i, j in grid.indices(fam, interior=True):
            for ni, nj, _, _ in grid.neighbours(i, j):
                assert grid.family(ni, nj) not in (None, fam)
    return grid


def offsets_for(boundary: BoundarySpec2D, N1: int, N2: int) -> tuple[int, int]:
    """Grid offsets realising the edge tags of ``boundary``, or a GridError.

    Opposite edges carry the same family exactly when the half-step count
    along that axis is even.
    """
    tags = boundary.edge_tags()
    issues = []
    for lo, hi, n, axis in (("left", "right", N1, "N1"), ("bottom", "top", N2, "N2")):
        same = tags[lo] == tags[hi]
        if same != (n % 2 == 0):
            need = "even" if same else "odd"
            issues.append(
                f"{lo}={tags[lo]} and {hi}={tags[hi]} need {need} {axis}, got {axis}={n}"
            )
    if issues:
        raise GridError("infeasible boundary layout: " + "; ".join(issues))
    m_q = 0 if tags["left"] == Q_FAMILY else 1
    n_q = 0 if tags["bottom"] == Q_FAMILY else 1
    return (m_q, n_q)


def check_boundary_2d(boundary: BoundarySpec2D, grid: StaggeredGrid2D) -> None:
    bad = [
        f"{edge} edge tagged {tag} but owned by the {grid.edge_owner[edge]} family"
        for edge, tag in boundary.edge_tags().items()
        if grid.edge_owner[edge] != tag
    ]
    if bad:
        raise GridError(
            f"boundary layout does not match grid (offsets={grid.offsets}, N1={grid.N1}, "
            f"N2={grid.N2}): " + "; ".join(bad)
        )


def stencil_coefficients_2d(h1: float, h2: float):
    """Weights of the four corner samples in corner order (--, +-, -+, ++).

    Returns ``(c_xi1, c_xi2, c_0)``: the bilinear fit through the corners gives
    ``df/dx1 = c_xi1 . f``, ``df/dx2 = c_xi2 . f`` and ``f = c_0 . f`` at the centre.
    """
    if not (h1 > 0 and h2 > 0):
        raise GridError(f"half-steps must be positive, got {h1}, {h2}")
    s = np.array(CORNERS, dtype=float)
    return s[:, 0] / (4 * h1), s[:, 1] / (4 * h2), np.full(4, 0.25)


def connection_coefficients_2d(grid: StaggeredGrid2D) -> dict[str, np.ndarray]:
    """``I1``, ``I2``, ``I0`` patterns between interior points of both families."""
    out = {}
    for fam in (P_FAMILY, Q_FAMILY):
        other = Q_FAMILY if fam == P_FAMILY else P_FAMILY
        rows = grid.indices(fam, interior=True)
        cols = {site: k for k, site in enumerate(grid.indices(other, interior=True))}
        i1 = np.zeros((len(rows), len(cols)), dtype=int)
        i2 = np.zeros_like(i1)
        i0 = np.zeros_like(i1)
        for r, (i, j) in enumerate(rows):
            for ni, nj, s1, s2 in grid.neighbours(i, j):
                k = cols.get((ni, nj))
                if k is None:
                    continue
                i1[r, k], i2[r, k], i0[r, k] = s1, s2, 1
        out[f"I1_{fam}"], out[f"I2_{fam}"], out[f"I0_{fam}"] = i1, i2, i0
    return out


def assemble_2d(model: ContinuousModel, grid: StaggeredGrid2D) -> DiscreteSystem:
    """Explicit PH-ODE of a 2D ``model`` on ``grid``."""
    if model.dimension != 2:
        raise ModelError("assemble_2d needs a 2D model")
    problems = validate_model(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))
    if not np.allclose((grid.L1, grid.L2), model.domain):
        raise GridError(f"grid {grid.L1} x {grid.L2} does not match model domain {model.domain}")
    check_boundary_2d(model.boundary, grid)

    c = model.coefficients
    n_p, n_q = c.n_p, c.n_q
    h1, h2 = grid.h1, grid.h2
    area = 4 * h1 * h2
    conn = connection_coefficients_2d(grid)
    pdp = (
        np.kron(conn["I1_p"], c.p1 * h2)
        + np.kron(conn["I2_p"], c.p2 * h1)
        + np.kron(conn["I0_p"], c.p0 * (h1 * h2))
    )
    p_sites = grid.indices(P_FAMILY, interior=True)
    q_sites = grid.indices(Q_FAMILY, interior=True)
    upper = sp.csr_matrix(pdp / area / area)
    j_mat = skew_from_upper(upper, len(p_sites) * n_p, len(q_sites) * n_q)

    states, slots, offset = [], {}, 0
    for fam, sites, n in ((P_FAMILY, p_sites, n_p), (Q_FAMILY, q_sites, n_q)):
        for site in sites:
            states.append(StateBlock(fam, grid.coordinate(*site), offset, offset + n, site))
            slots[site] = (offset, offset + n)
            offset += n
    n_states = offset

    weights = []
    for s in states:
        dens = model.density_p if s.family == P_FAMILY else model.density_q
        weights.append(area * dens.weight_at(s.point))
    w = block_diag_weights(weights)

    # one column block per boundary point, possibly feeding several rows
    rows, cols, vals = [], [], []
    ports, col = [], 0
    eye = np.eye(n_p) / area
    for fam in (Q_FAMILY, P_FAMILY):
        for i, j in grid.indices(fam, interior=False):
            touched = False
            for ni, nj, s1, s2 in grid.neighbours(i, j):
                slot = slots.get((ni, nj))
                if slot is None:
                    continue
                touched = True
                if fam == Q_FAMILY:
                    block = eye
                else:
                    # the q row sits at (s1, s2) from the boundary point, so the
                    # boundary point is the row's corner (-s1, -s2)
                    block = (-s1 * h2 * c.p1.T - s2 * h1 * c.p2.T - h1 * h2 * c.p0.T) / area
                r, cc = np.nonzero(block)
                rows.extend(slot[0] + r)
                cols.extend(col + cc)
                vals.extend(block[r, cc])
            if not touched:
                continue
            ports.append(
                Port(f"{fam}({i},{j})", fam, grid.coordinate(i, j), col, col + n_p, (i, j), grid.edges_of(i, j))
            )
            col += n_p
    b_mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_states, col))

    return DiscreteSystem(
        j_mat=j_mat,
        b_mat=b_mat,
        q_weights=w,
        states=states,
        ports=ports,
        n_p=n_p,
        n_q=n_q,
        steps=(h1, h2),
        measure=area,
        connections=conn,
        label=model.name,
    )


def discretize_2d(model: ContinuousModel, N1: int, N2: int) -> DiscreteSystem:
    """Pick offsets matching the model's edge tags and assemble."""
    L1, L2 = model.domain
    offsets = offsets_for(model.boundary, N1, N2)
    return assemble_2d(model, build_grid_2d(L1, L2, N1, N2, offsets))
