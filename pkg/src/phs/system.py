"""The explicit finite-dimensional port-Hamiltonian ODE produced by assembly.

    x' = J grad H(x) + B u,    y = B^T grad H(x),    H(x) = 1/2 x^T W x

``J`` is stored as ``j_mat`` (acting on ``grad H = W x``), ``B`` as ``b_mat``
and ``W`` as ``q_weights``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class StateBlock:
    """A contiguous block of the state vector living at one grid point."""

    family: str
    point: tuple[float, ...]
    start: int
    stop: int
    index: tuple[int, ...] = ()

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


@dataclass(frozen=True)
class Port:
    """A boundary input/output pair.

    ``family`` is the family owning the boundary point: a q port receives a
    generalized force and returns the conjugate p co-energy, a p port
    receives a p co-energy (velocity) and returns a generalized force.
    """

    name: str
    family: str
    point: tuple[float, ...]
    start: int
    stop: int
    index: tuple[int, ...] = ()
    edges: tuple[str, ...] = ()

    @property
    def width(self) -> int:
        return self.stop - self.start

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)

    @property
    def input_meaning(self) -> str:
        if self.family == "q":
            return "q co-energy input (generalized force)"
        return "p co-energy input (generalized velocity)"

    @property
    def output_meaning(self) -> str:
        if self.family == "q":
            return "collocated p co-energy output"
        return "collocated q co-energy output (generalized force)"


@dataclass(eq=False)
class DiscreteSystem:
    """Assembled PH-ODE; states ordered p block first, then q block."""

    j_mat: sp.csr_matrix
    b_mat: sp.csr_matrix
    q_weights: sp.csr_matrix
    states: list[StateBlock]
    ports: list[Port]
    n_p: int
    n_q: int
    steps: tuple[float, ...]
    measure: float
    connections: dict[str, np.ndarray] = field(default_factory=dict)
    label: str = "system"

    @property
    def n_states(self) -> int:
        return self.j_mat.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b_mat.shape[1]

    @property
    def n_p_states(self) -> int:
        return sum(s.stop - s.start for s in self.states if s.family == "p")

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(f"no port named {name!r}; have {[p.name for p in self.ports]}")

    def state_blocks(self, family: str) -> list[StateBlock]:
        return [s for s in self.states if s.family == family]

    def grad(self, x) -> np.ndarray:
        return self.q_weights @ np.asarray(x, dtype=float)

    def output(self, x) -> np.ndarray:
        return self.b_mat.T @ self.grad(x)

    def rhs(self, x, u=None) -> np.ndarray:
        dx = self.j_mat @ self.grad(x)
        if u is not None:
            dx = dx + self.b_mat @ np.asarray(u, dtype=float)
        return dx

    def system_matrix(self) -> sp.csr_matrix:
        """``A = J W`` of the linear ODE ``x' = A x + B u``."""
        return (self.j_mat @ self.q_weights).tocsr()

    def coenergy_matrix(self) -> sp.csr_matrix:
        """Interconnection acting on co-energies (``J`` times the cell measure)."""
        return (self.j_mat * self.measure).tocsr()

    def skew_defect(self) -> float:
        """Largest entry of ``J + J^T``; zero for every assembled system."""
        d = (self.j_mat + self.j_mat.T).tocoo()
        return float(np.abs(d.data).max()) if d.nnz else 0.0

    def summary(self) -> str:
        steps = ", ".join(f"{s:.6g}" for s in self.steps)
        return (
            f"{self.label}: {self.n_states} states ({self.n_p_states} p, "
            f"{self.n_states - self.n_p_states} q), {len(self.ports)} ports, "
            f"{self.n_inputs} input channels, half-steps ({steps})"
        )


def hamiltonian(sys: DiscreteSystem, x) -> float:
    """Discrete energy ``1/2 x^T W x``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sys.n_states:
        raise ValueError(f"state has length {x.shape[-1]}, system has {sys.n_states}")
    return 0.5 * float(x @ (sys.q_weights @ x))


def block_diag_weights(weights: list[np.ndarray]) -> sp.csr_matrix:
    if not weights:
        return sp.csr_matrix((0, 0))
    return sp.block_diag(weights, format="csr")


def skew_from_upper(upper: sp.spmatrix, n_p_total: int, n_q_total: int) -> sp.csr_matrix:
    """``[[0, U], [-U^T, 0]]``; the negated transpose makes skewness bit-exact."""
    upper = sp.csr_matrix(upper)
    lower = -upper.T
    j = sp.bmat(
        [[sp.csr_matrix((n_p_total, n_p_total)), upper], [lower, sp.csr_matrix((n_q_total, n_q_total))]],
        format="csr",
    )
    j.eliminate_zeros()
    return j
