"""Standing-wave references and spatial order-of-accuracy sweeps for the wave models."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContinuousModel, ModelError
from .discretize import discretize
from .simulate import simulate
from .system import DiscreteSystem


class ReferenceUnavailable(ModelError):
    pass


@dataclass(frozen=True)
class StandingWave:
    """Exact mode of the wave equation, sampled onto a discrete state.

    Displacement is ``shape(x) cos(omega t)``; p = rho u_t, q = grad u.
    """

    model: ContinuousModel
    wavenumbers: tuple[float, ...]
    phases: tuple[str, ...]  # "sin" or "cos" per axis
    omega: float

    def _factors(self, x, k, phase):
        if phase == "sin":
            return math.sin(k * x), k * math.cos(k * x)
        return math.cos(k * x), -k * math.sin(k * x)

    def state(self, sys: DiscreteSystem, t: float) -> np.ndarray:
        rho = 1.0 / _scalar(self.model.density_p)
        x0 = self.model.domain[0] if self.model.dimension == 1 else 0.0
        out = np.zeros(sys.n_states)
        c, s = math.cos(self.omega * t), math.sin(self.omega * t)
        for blk in sys.states:
            vals = [self._factors(xi - x0, k, ph) for xi, k, ph in zip(blk.point, self.wavenumbers, self.phases)]
            shape = math.prod(v[0] for v in vals)
            if blk.family == "p":
                out[blk.slice] = -rho * self.omega * shape * s
            else:
                grads = []
                for axis in range(len(vals)):
                    g = vals[axis][1]
                    for other in range(len(vals)):
                        if other != axis:
                            g *= vals[other][0]
                    grads.append(g)
                out[blk.slice] = np.array(grads) * c
        return out


def _scalar(density) -> float:
    w = density.weight_at(0.0 if density.size == 1 else (0.0, 0.0))
    if not density.is_constant or not np.allclose(w, w[0, 0] * np.eye(w.shape[0])):
        raise ReferenceUnavailable("standing-wave reference needs constant isotropic densities")
    return float(w[0, 0])


def _axis_mode(fam_lo: str, fam_hi: str, length: float, mode: int) -> tuple[float, str]:
    # p end = fixed (u = 0), q end = free (u_x = 0)
    if fam_lo == "p":
        phase = "sin"
        k = mode * math.pi / length if fam_hi == "p" else (2 * mode - 1) * math.pi / (2 * length)
    else:
        phase = "cos"
        k = mode * math.pi / length if fam_hi == "q" else (2 * mode - 1) * math.pi / (2 * length)
    return k, phase


def standing_wave(model: ContinuousModel, mode=1) -> StandingWave:
    """Fundamental (or ``mode``-th) standing wave compatible with the boundary layout.

    In 2D only fully fixed rectangles have a reference: a zero input on a q
    edge also zeroes the tangential stress, which is not the free condition.
    """
    if model.name not in ("wave_1d", "wave_2d"):
        raise ReferenceUnavailable(f"no analytic reference for model {model.name!r}")
    inv_rho = _scalar(model.density_p)
    modulus = _scalar(model.density_q)
    speed = math.sqrt(modulus * inv_rho)
    bc = model.boundary
    if model.dimension == 1:
        (a, b), m = model.domain, int(mode)
        k, phase = _axis_mode(bc.at_a, bc.at_b, b - a, m)
        return StandingWave(model, (k,), (phase,), speed * k)
    modes = (mode, mode) if np.isscalar(mode) else tuple(mode)
    if any(tag != "p" for tag in bc.edge_tags().values()):
        raise ReferenceUnavailable("2D reference needs all edges fixed (p-owned)")
    if any(not sig.is_zero for sig in bc.loads.values()):
        raise ReferenceUnavailable("2D reference needs unloaded edges")
    L1, L2 = model.domain
    k = (modes[0] * math.pi / L1, modes[1] * math.pi / L2)
    return StandingWave(model, k, ("sin", "sin"), speed * math.hypot(*k))


def energy_norm(sys: DiscreteSystem, x) -> float:
    return math.sqrt(max(float(x @ (sys.q_weights @ x)), 0.0))


def standing_wave_error(model: ContinuousModel, resolution, dt: float, t_end: float, mode=1) -> float:
    """Relative energy-norm error at ``t_end`` of the discrete standing wave."""
    sys = discretize(model, resolution)
    ref = standing_wave(model, mode)
    tr = simulate(sys, None, dt, t_end, x0=ref.state(sys, 0.0))
    exact = ref.state(sys, tr.times[-1])
    return energy_norm(sys, tr.states[-1] - exact) / energy_norm(sys, ref.state(sys, 0.0))


def fit_order(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    slope, _ = np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(err, float)), 1)
    return float(slope)


def refinement_levels(model: ContinuousModel, base, levels: int) -> list:
    """Resolutions for successive refinements, each keeping the boundary parity."""
    out = []
    if model.dimension == 1:
        K = int(base)
        for lvl in range(levels):
            out.append(K * 2**lvl if K % 2 == 0 else (K + 1) * 2**lvl - 1)
        return out
    n1, n2 = (int(v) for v in base)
    for lvl in range(levels):
        out.append(tuple(n * 2**lvl if n % 2 == 0 else (n + 1) * 2**lvl - 1 for n in (n1, n2)))
    return out


def mesh_size(model: ContinuousModel, resolution) -> float:
    if model.dimension == 1:
        a, b = model.domain
        return (b - a) / int(resolution)
    return max(L / n for L, n in zip(model.domain, resolution))


@dataclass
class SweepRow:
    level: int
    resolution: object
    h: float
    dt: float
    error: float
    order: float | None  # observed between this level and the previous one


def convergence_rows(model: ContinuousModel, base, levels: int, dt: float, t_end: float, mode=1, map_fn=map) -> list[SweepRow]:
    """Sweep refinement levels with ``dt`` shrinking in proportion to ``h``."""
    standing_wave(model, mode)  # fail early if there is no reference
    res = refinement_levels(model, base, levels)
    h0 = mesh_size(model, res[0])
    hs = [mesh_size(model, r) for r in res]
    dts = [dt * h / h0 for h in hs]
    errors = list(map_fn(lambda args: standing_wave_error(model, args[0], args[1], t_end, mode), zip(res, dts)))
    rows = []
    for lvl, (r, h, d, e) in enumerate(zip(res, hs, dts, errors)):
        order = None if lvl == 0 else math.log(errors[lvl - 1] / e) / math.log(hs[lvl - 1] / h)
        rows.append(SweepRow(lvl, r, h, d, e, order))
    return rows
