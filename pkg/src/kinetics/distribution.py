"""One-particle velocity distributions on a uniform Cartesian grid.

The grid spans ``[-vmax, vmax]^3`` with an odd or even number of nodes per
axis; values are number density per velocity volume. Distributions are
spatially homogeneous here; transport handles position dependence
analytically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .constants import BOLTZMANN
from .errors import UnderResolved

SNAPSHOT_ORDER_3D = "row-major-z-fastest"


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform node-centered grid on [-vmax, vmax] per axis."""

    vmax: float
    nodes_per_axis: int

    def __post_init__(self) -> None:
        if not (self.vmax > 0.0 and np.isfinite(self.vmax)):
            raise ValueError(f"vmax must be positive and finite, got {self.vmax}")
        if self.nodes_per_axis < 4:
            raise ValueError(f"need at least 4 nodes per axis, got {self.nodes_per_axis}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.vmax / (self.nodes_per_axis - 1)

    @cached_property
    def axis(self) -> np.ndarray:
        ax = np.linspace(-self.vmax, self.vmax, self.nodes_per_axis)
        ax.setflags(write=False)
        return ax

    @property
    def hull_volume(self) -> float:
        return (2.0 * self.vmax) ** 3

    @property
    def node_volume(self) -> float:
        return self.spacing**3


@dataclass(frozen=True)
class DiscreteDistribution:
    """Distribution samples, shape (n, n, n), indexed [ix, iy, iz], z fastest."""

    grid: VelocityGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        n = self.grid.nodes_per_axis
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (n, n, n):
            raise ValueError(f"values shape {values.shape} does not match grid {(n, n, n)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("distribution values must be finite")
        if np.any(values < 0.0):
            raise ValueError("distribution values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


class Moments(NamedTuple):
    density: float
    momentum: np.ndarray
    kinetic_energy: float


def _gaussian_values(grid: VelocityGrid, density: float, bulk_velocity: np.ndarray,
                     temperature: float, mass: float) -> np.ndarray:
    ax = grid.axis
    dx = ax - bulk_velocity[0]
    dy = ax - bulk_velocity[1]
    dz = ax - bulk_velocity[2]
    sq = (dx**2)[:, None, None] + (dy**2)[None, :, None] + (dz**2)[None, None, :]
    kt = BOLTZMANN * temperature
    coef = density * (mass / (2.0 * np.pi * kt)) ** 1.5
    return coef * np.exp(-0.5 * mass * sq / kt)


def _check_resolution(grid: VelocityGrid, bulk_velocity: np.ndarray,
                      temperature: float, mass: float) -> None:
    vth = np.sqrt(BOLTZMANN * temperature / mass)
    if grid.spacing > vth / 3.0:
        raise UnderResolved(
            f"spacing {grid.spacing:g} exceeds a third of the thermal speed {vth:g}")
    speed = float(np.linalg.norm(bulk_velocity))
    if grid.vmax < speed + 4.0 * vth:
        raise UnderResolved(
            f"vmax {grid.vmax:g} below |u| + 4 thermal speeds = {speed + 4.0 * vth:g}")


def maxwellian(grid: VelocityGrid, density: float, bulk_velocity,
               temperature: float, mass: float) -> DiscreteDistribution:
    """Drifting Maxwellian sampled at the grid nodes."""
    if not density > 0.0:
        raise ValueError(f"density must be positive, got {density}")
    if not temperature > 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if not mass > 0.0:
        raise ValueError(f"mass must be positive, got {mass}")
    u = np.asarray(bulk_velocity, dtype=np.float64).reshape(3)
    _check_resolution(grid, u, temperature, mass)
    return DiscreteDistribution(grid, _gaussian_values(grid, density, u, temperature, mass))


def bimodal(grid: VelocityGrid, density1: float, u1, temperature1: float,
            density2: float, u2, temperature2: float, mass: float) -> DiscreteDistribution:
    """Sum of two Maxwellian modes; a mode with zero density contributes nothing."""
    if not mass > 0.0:
        raise ValueError(f"mass must be positive, got {mass}")
    total = np.zeros((grid.nodes_per_axis,) * 3)
    for density, u, temperature in ((density1, u1, temperature1),
                                    (density2, u2, temperature2)):
        if density < 0.0:
            raise ValueError(f"mode density must be nonnegative, got {density}")
        if density == 0.0:
            continue
        if not temperature > 0.0:
            raise ValueError(f"temperature must be positive, got {temperature}")
        u = np.asarray(u, dtype=np.float64).reshape(3)
        _check_resolution(grid, u, temperature, mass)
        total += _gaussian_values(grid, density, u, temperature, mass)
    return DiscreteDistribution(grid, total)


def moments(f: DiscreteDistribution, mass: float) -> Moments:
    """Node-weight sums: density, momentum, kinetic energy per volume."""
    h3 = f.grid.node_volume
    ax = f.grid.axis
    density = float(np.sum(f.values)) * h3
    px = float(np.sum(f.values * ax[:, None, None]))
    py = float(np.sum(f.values * ax[None, :, None]))
    pz = float(np.sum(f.values * ax[None, None, :]))
    momentum = mass * h3 * np.array([px, py, pz])
    sq = (ax**2)[:, None, None] + (ax**2)[None, :, None] + (ax**2)[None, None, :]
    kinetic = 0.5 * mass * h3 * float(np.sum(f.values * sq))
    return Moments(density=density, momentum=momentum, kinetic_energy=kinetic)


def _axis_index_frac(ax: np.ndarray, coords: np.ndarray, spacing: float):
    """Lower node index and fractional offset per query coordinate.

    Snaps the fraction to exactly 1.0 when the query sits on the upper node,
    so node queries reproduce stored values bit-exactly.
    """
    n = ax.shape[0]
    idx = np.searchsorted(ax, coords, side="right") - 1
    np.clip(idx, 0, n - 2, out=idx)
    frac = (coords - ax[idx]) / spacing
    on_upper = coords == ax[idx + 1]
    frac = np.where(on_upper, 1.0, frac)
    return idx, frac


def interpolate_many(f: DiscreteDistribution, points) -> np.ndarray:
    """Trilinear interpolation at (..., 3) query points; zero outside the hull."""
    pts = np.asarray(points, dtype=np.float64)
    flat = pts.reshape(-1, 3)
    ax = f.grid.axis
    vmax = f.grid.vmax
    h = f.grid.spacing
    inside = np.all((flat >= -vmax) & (flat <= vmax), axis=1)
    out = np.zeros(flat.shape[0])
    if np.any(inside):
        q = flat[inside]
        ix, fx = _axis_index_frac(ax, q[:, 0], h)
        iy, fy = _axis_index_frac(ax, q[:, 1], h)
        iz, fz = _axis_index_frac(ax, q[:, 2], h)
        vals = f.values
        acc = np.zeros(q.shape[0])
        for dx in (0, 1):
            wx = fx if dx else 1.0 - fx
            for dy in (0, 1):
                wy = fy if dy else 1.0 - fy
                for dz in (0, 1):
                    wz = fz if dz else 1.0 - fz
                    acc += wx * wy * wz * vals[ix + dx, iy + dy, iz + dz]
        out[inside] = acc
    return out.reshape(pts.shape[:-1])


def interpolate(f: DiscreteDistribution, v) -> float:
    """Trilinear interpolation at one velocity; zero outside the hull."""
    return float(interpolate_many(f, np.asarray(v, dtype=np.float64).reshape(1, 3))[0])


def write_snapshot(path, header: dict, array: np.ndarray) -> None:
    """One-line JSON header, newline, then little-endian float64 payload."""
    payload = np.ascontiguousarray(array, dtype="<f8")
    data = json.dumps(header).encode("ascii") + b"\n" + payload.tobytes()
    Path(path).write_bytes(data)


def read_snapshot(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    newline = raw.index(b"\n")
    header = json.loads(raw[:newline].decode("ascii"))
    array = np.frombuffer(raw[newline + 1:], dtype="<f8")
    return header, array


def save_distribution(f: DiscreteDistribution, path) -> None:
    header = {
        "nodes_per_axis": f.grid.nodes_per_axis,
        "vmax": f.grid.vmax,
        "order": SNAPSHOT_ORDER_3D,
    }
    write_snapshot(path, header, f.values)


def load_distribution(path) -> DiscreteDistribution:
    header, flat = read_snapshot(path)
    if header.get("order") != SNAPSHOT_ORDER_3D:
        raise ValueError(f"unsupported snapshot order {header.get('order')!r}")
    n = int(header["nodes_per_axis"])
    grid = VelocityGrid(vmax=float(header["vmax"]), nodes_per_axis=n)
    return DiscreteDistribution(grid, flat.reshape(n, n, n))
