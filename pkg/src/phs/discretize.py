"""Dispatch from a continuous model to its assembled system and port signals."""
from __future__ import annotations

import numpy as np

from .core import ContinuousModel
from .simulate import Signal
from .staggered1d import GridError, discretize_1d
from .staggered2d import discretize_2d
from .system import DiscreteSystem


def discretize(model: ContinuousModel, resolution) -> DiscreteSystem:
    """``resolution`` is ``K`` in 1D and ``(N1, N2)`` in 2D."""
    if model.dimension == 1:
        return discretize_1d(model, int(resolution))
    n1, n2 = resolution
    return discretize_2d(model, int(n1), int(n2))


def boundary_signals(sys: DiscreteSystem, model: ContinuousModel) -> list[Signal]:
    """One signal per port of ``sys``, taken from the model's boundary description."""
    signals = [Signal.zero() for _ in sys.ports]
    bc = model.boundary
    if model.dimension == 1:
        by_end = {"a": bc.signal_a, "b": bc.signal_b}
        for k, port in enumerate(sys.ports):
            if by_end.get(port.name) is not None:
                signals[k] = by_end[port.name]
        return signals

    tol = 1e-9 * min(sys.steps)
    for point, sig in bc.loads.items():
        hits = [k for k, p in enumerate(sys.ports) if np.allclose(p.point, point, rtol=0, atol=tol)]
        if not hits:
            owners = sorted({p.family for p in sys.ports})
            raise GridError(
                f"load at {tuple(point)} does not coincide with a boundary grid point "
                f"(half-steps {sys.steps}, port families {owners})"
            )
        signals[hits[0]] = sig
    return signals
