"""Collisionless transport: exact characteristics and a 1D-1V grid solver.

The exact evaluator works pointwise in full 3D-3V and needs no mesh. The
grid solver exists to measure convergence: positions are periodic on
[0, length), velocities live on [-vmax, vmax] with zero inflow from outside
the hull, and each step is a Strang-split pair of constant-coefficient
back-traces with cubic interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import DiscreteDistribution, read_snapshot, write_snapshot

SNAPSHOT_ORDER_1D1V = "row-major-v-fastest"


@dataclass(frozen=True)
class ForceField:
    """Constant external force (N) acting on particles of the given mass (kg)."""

    force: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        force = np.asarray(self.force, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(force)):
            raise ValueError("force must be finite")
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")
        force.setflags(write=False)
        object.__setattr__(self, "force", force)

    @property
    def acceleration(self) -> np.ndarray:
        return self.force / self.mass


@dataclass(frozen=True)
class PhasePoint:
    """Position (m), velocity (m/s), time (s)."""

    r: np.ndarray
    v: np.ndarray
    t: float

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=np.float64).reshape(3)
        v = np.asarray(self.v, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v)) and np.isfinite(self.t)):
            raise ValueError("phase point must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)


def exact_solution(f0, field: ForceField, p: PhasePoint) -> float:
    """Value at p of the transport solution with initial data f0.

    The solution is constant along characteristics, so this back-traces to
    t = 0: f0(r - v t + a t^2 / 2, v - a t).
    """
    a = field.acceleration
    t = p.t
    r0 = p.r - p.v * t + 0.5 * a * t * t
    v0 = p.v - a * t
    return float(f0(r0, v0))


@dataclass(frozen=True)
class PhaseGrid1D1V:
    """Phase-space samples, shape (nx, nv); x periodic, v node-centered."""

    nx: int
    length: float
    nv: int
    vmax: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.nx < 4 or self.nv < 4:
            raise ValueError("need at least 4 nodes per axis")
        if not (self.length > 0.0 and self.vmax > 0.0):
            raise ValueError("length and vmax must be positive")
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (self.nx, self.nv):
            raise ValueError(f"values shape {values.shape} does not match ({self.nx}, {self.nv})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def x_axis(self) -> np.ndarray:
        return np.arange(self.nx) * (self.length / self.nx)

    @property
    def v_axis(self) -> np.ndarray:
        return np.linspace(-self.vmax, self.vmax, self.nv)

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @property
    def dv(self) -> float:
        return 2.0 * self.vmax / (self.nv - 1)

    def mass(self) -> float:
        return float(np.sum(self.values)) * self.dx * self.dv


def phase_grid_from_function(fn, nx: int, length: float, nv: int, vmax: float) -> PhaseGrid1D1V:
    """Sample fn(x, v) on the grid nodes."""
    grid = PhaseGrid1D1V(nx, length, nv, vmax, np.zeros((nx, nv)))
    x = grid.x_axis[:, None]
    v = grid.v_axis[None, :]
    return PhaseGrid1D1V(nx, length, nv, vmax, fn(x, v))


def _cubic_weights(t: np.ndarray):
    """Cubic Lagrange weights for nodes -1, 0, 1, 2 at fraction t in [0, 1)."""
    return (
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t * t - 1.0) * (t - 2.0) / 2.0,
        -t * (t + 1.0) * (t - 2.0) / 2.0,
        t * (t * t - 1.0) / 6.0,
    )


def _advect_x(values: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Periodic back-trace along axis 0 by a per-column node shift."""
    nx = values.shape[0]
    tau = -shifts
    base = np.floor(tau).astype(np.int64)
    weights = _cubic_weights(tau - base)
    rows = np.arange(nx)[:, None]
    out = np.zeros_like(values)
    cols = np.arange(values.shape[1])[None, :]
    for offset, w in zip((-1, 0, 1, 2), weights):
        idx = np.mod(rows + base[None, :] + offset, nx)
        out += w[None, :] * values[idx, cols]
    return out


def _advect_v(values: np.ndarray, shift: float) -> np.ndarray:
    """Back-trace along axis 1 by a uniform node shift; zero outside the hull."""
    nv = values.shape[1]
    tau = -shift
    base = int(np.floor(tau))
    weights = _cubic_weights(np.asarray(tau - base))
    out = np.zeros_like(values)
    for offset, w in zip((-1, 0, 1, 2), weights):
        src = np.arange(nv) + base + offset
        valid = (src >= 0) & (src < nv)
        if not np.any(valid):
            continue
        out[:, valid] += float(w) * values[:, src[valid]]
    return out


@dataclass(frozen=True)
class TransportRunResult:
    grid: PhaseGrid1D1V
    mass_drift: float


def semi_lagrangian_run(f0: PhaseGrid1D1V, field: ForceField, dt: float,
                        n_steps: int, interpolation: str = "cubic") -> TransportRunResult:
    """Advance n_steps of Strang-split advection; reports relative mass drift.

    The velocity axis is driven by the x-component of the force.
    """
    if interpolation != "cubic":
        raise ValueError(f"only cubic interpolation is implemented, got {interpolation!r}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    ax = float(field.acceleration[0])
    values = np.asarray(f0.values, dtype=np.float64).copy()
    x_shift_half = f0.v_axis * (0.5 * dt) / f0.dx
    v_shift = ax * dt / f0.dv
    mass0 = float(np.sum(values)) * f0.dx * f0.dv
    worst_drift = 0.0
    for _ in range(n_steps):
        values = _advect_x(values, x_shift_half)
        values = _advect_v(values, v_shift)
        values = _advect_x(values, x_shift_half)
        if mass0 != 0.0:
            mass = float(np.sum(values)) * f0.dx * f0.dv
            worst_drift = max(worst_drift, abs(mass - mass0) / abs(mass0))
    grid = PhaseGrid1D1V(f0.nx, f0.length, f0.nv, f0.vmax, values)
    return TransportRunResult(grid=grid, mass_drift=worst_drift)


def collisional_rhs_check(f: DiscreteDistribution, spec, probes, threads: int = 1):
    """Spatially homogeneous balance: time derivative equals the collision term.

    Thin forwarding wrapper so audits can probe the right-hand side through
    the transport interface.
    """
    from .collision_operator import evaluate_field

    probes = [np.asarray(p, dtype=np.float64).reshape(3) for p in probes]
    estimates = evaluate_field(f, probes, spec, threads=threads)
    return list(zip(probes, estimates))


def save_phase_grid(grid: PhaseGrid1D1V, path) -> None:
    header = {
        "kind": "phase-1d1v",
        "nx": grid.nx,
        "length": grid.length,
        "nv": grid.nv,
        "vmax": grid.vmax,
        "order": SNAPSHOT_ORDER_1D1V,
    }
    write_snapshot(path, header, grid.values)


def load_phase_grid(path) -> PhaseGrid1D1V:
    header, flat = read_snapshot(path)
    if header.get("kind") != "phase-1d1v" or header.get("order") != SNAPSHOT_ORDER_1D1V:
        raise ValueError(f"not a 1D-1V phase snapshot: header {header!r}")
    nx, nv = int(header["nx"]), int(header["nv"])
    return PhaseGrid1D1V(nx, float(header["length"]), nv, float(header["vmax"]),
                         flat.reshape(nx, nv))
