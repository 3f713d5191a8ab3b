"""Power-preserving coupling of two 1D subsystems at a shared interface.

The p-effort input of one system is driven by the output of a q-effort port
of the other, and that q port receives the negated output of the p port::

    u_p = y_q_port,    u_q = -y_p_port

Eliminating both ports adds the coupling blocks ``B_p B_q^T`` and
``-B_q B_p^T`` to the interconnection matrix, which keeps it skew.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import P_FAMILY, Q_FAMILY, ModelError
from .system import DiscreteSystem, Port, StateBlock


class InterconnectionError(ModelError):
    pass


@dataclass(frozen=True)
class PortPairing:
    """Pair ``port_1`` of the first system with ``port_2`` of the second.

    The defaults describe the chain case: system 1's right (p-effort) end
    feeds system 2's left (q-effort) end.
    """

    port_1: str = "b"
    port_2: str = "a"


def _interface_point(sys: DiscreteSystem, port: Port) -> StateBlock:
    """State block whose co-energy the port's collocated output reports."""
    rows = np.unique(sys.b_mat[:, port.start:port.stop].tocoo().row)
    for s in sys.states:
        if s.start <= rows[0] < s.stop:
            return s
    raise InterconnectionError(f"port {port.name} drives no state")


def check_pairing(sys1: DiscreteSystem, sys2: DiscreteSystem, pairing: PortPairing) -> tuple[Port, Port]:
    if len(sys1.steps) != 1 or len(sys2.steps) != 1:
        raise InterconnectionError("only 1D subsystems can be interconnected")
    if (sys1.n_p, sys1.n_q) != (sys2.n_p, sys2.n_q):
        raise InterconnectionError(
            f"dimension mismatch: ({sys1.n_p}, {sys1.n_q}) vs ({sys2.n_p}, {sys2.n_q})"
        )
    p1, p2 = sys1.port(pairing.port_1), sys2.port(pairing.port_2)
    if p1.family == p2.family:
        raise InterconnectionError(
            f"complementary families required, both ports are {p1.family}-effort inputs"
        )
    if p1.width != p2.width:
        raise InterconnectionError(f"port widths differ: {p1.width} vs {p2.width}")
    h1, h2 = sys1.steps[0], sys2.steps[0]
    if abs(h1 - h2) > 1e-12 * max(h1, h2):
        raise InterconnectionError(f"half-steps differ: {h1} vs {h2}")
    # each port point must coincide with the state that supplies its input
    for a, sa, b, sb in ((p1, sys1, p2, sys2), (p2, sys2, p1, sys1)):
        src = _interface_point(sb, b)
        x = a.point[0]
        if abs(x - src.point[0]) > 1e-12 * h1 + 8 * np.finfo(float).eps * abs(x):
            raise InterconnectionError(
                f"port {a.name} at {a.point[0]} does not coincide with the {src.family} "
                f"point at {src.point[0]} feeding it"
            )
    return p1, p2


def _split(sys: DiscreteSystem):
    npt = sys.n_p_states
    return npt, sys.n_states - npt


def interconnect(sys1: DiscreteSystem, sys2: DiscreteSystem, pairing: PortPairing | None = None) -> DiscreteSystem:
    """Composite system with state ``(p1, p2, q1, q2)`` and ``H = H1 + H2``."""
    pairing = pairing or PortPairing()
    port1, port2 = check_pairing(sys1, sys2, pairing)

    np1, nq1 = _split(sys1)
    np2, nq2 = _split(sys2)
    n1, n2 = sys1.n_states, sys2.n_states
    # permutation from stacked (x1, x2) to (p1, p2, q1, q2)
    order = np.concatenate(
        [np.arange(np1), n1 + np.arange(np2), np1 + np.arange(nq1), n1 + np2 + np.arange(nq2)]
    )
    perm = sp.identity(n1 + n2, format="csr")[order]

    b1 = sys1.b_mat.tocsc()
    b2 = sys2.b_mat.tocsc()
    b1_port = b1[:, port1.slice]
    b2_port = b2[:, port2.slice]
    # p-effort input takes the q port's output; q-effort input takes minus the p port's output
    if port1.family == P_FAMILY:
        coupling_12 = b1_port @ b2_port.T
    else:
        coupling_12 = -(b1_port @ b2_port.T)
    j = sp.bmat([[sys1.j_mat, coupling_12], [-coupling_12.T, sys2.j_mat]], format="csr")
    j = (perm @ j @ perm.T).tocsr()
    j.eliminate_zeros()

    w = (perm @ sp.block_diag([sys1.q_weights, sys2.q_weights], format="csr") @ perm.T).tocsr()

    keep1 = [p for p in sys1.ports if p.name != port1.name]
    keep2 = [p for p in sys2.ports if p.name != port2.name]
    kept = [(p, b1, 1) for p in keep1] + [(p, b2, 2) for p in keep2]
    # q-family ports first, each group by coordinate
    kept.sort(key=lambda t: (t[0].family != Q_FAMILY, t[0].point))
    cols, ports, col = [], [], 0
    names = {p.name for p in keep1} & {p.name for p in keep2}
    for p, b, which in kept:
        blk = b[:, p.slice]
        pad = [blk, sp.csc_matrix((n2, p.width))] if which == 1 else [sp.csc_matrix((n1, p.width)), blk]
        cols.append(perm @ sp.vstack(pad))
        name = f"{p.name}{which}" if p.name in names else p.name
        ports.append(Port(name, p.family, p.point, col, col + p.width, p.index, p.edges))
        col += p.width
    b_mat = sp.hstack(cols, format="csr") if cols else sp.csr_matrix((n1 + n2, 0))

    states = []
    offset = 0
    for s in [*sys1.state_blocks(P_FAMILY), *sys2.state_blocks(P_FAMILY),
              *sys1.state_blocks(Q_FAMILY), *sys2.state_blocks(Q_FAMILY)]:
        size = s.stop - s.start
        states.append(StateBlock(s.family, s.point, offset, offset + size, s.index))
        offset += size

    return DiscreteSystem(
        j_mat=j,
        b_mat=b_mat,
        q_weights=w,
        states=states,
        ports=ports,
        n_p=sys1.n_p,
        n_q=sys1.n_q,
        steps=sys1.steps,
        measure=sys1.measure,
        label=f"{sys1.label}+{sys2.label}",
    )


def geometric_permutation(sys: DiscreteSystem) -> np.ndarray:
    """Index array reordering states to (all p by coordinate, all q by coordinate)."""
    blocks = sorted(sys.states, key=lambda s: (s.family != P_FAMILY, s.point))
    return np.concatenate([np.arange(s.start, s.stop) for s in blocks])
