"""Spatially homogeneous direct-simulation particle gas.

Candidate pairs follow the no-time-counter scheme: the expected candidate
count per step is N(N-1)/2 * w * pi d^2 * g_max * dt / V, and a candidate
with relative velocity g and a direction n drawn uniformly on the sphere is
accepted with probability |g . n| / g_max. Accepted pairs are transformed by
the selected impact rule, so the realized collision frequency matches the
quadrature kernel (1/4) d^2 |g . n| integrated over the full sphere.

The majorant in force at each step is max(2 * max particle speed, config
majorant); a collision chain that pushes a relative speed above it aborts
the step, which is retried with the majorant doubled. Collisions mutate the
pair velocities sequentially in sample order, and every draw comes from a
stream keyed by (seed, step index), so a run is bit-reproducible and any
step can be recomputed in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng
from .collision_kernel import CollisionBranch, Species
from .constants import BOLTZMANN
from .errors import MajorantExceeded

_MAJORANT_RETRIES = 8
_BOUND_REFRESH_STEPS = 64


@dataclass(frozen=True)
class ParticleEnsemble:
    """Simulator particles: velocities (N, 3) and molecules per particle."""

    velocities: np.ndarray
    species: Species
    statistical_weight: float

    def __post_init__(self) -> None:
        velocities = np.ascontiguousarray(self.velocities, dtype=np.float64)
        if velocities.ndim != 2 or velocities.shape[1] != 3:
            raise ValueError(f"velocities must be (N, 3), got {velocities.shape}")
        if not np.all(np.isfinite(velocities)):
            raise ValueError("velocities must be finite")
        if not self.statistical_weight > 0.0:
            raise ValueError(
                f"statistical weight must be positive, got {self.statistical_weight}")
        velocities.setflags(write=False)
        object.__setattr__(self, "velocities", velocities)

    @property
    def count(self) -> int:
        return self.velocities.shape[0]


@dataclass(frozen=True)
class DsmcConfig:
    """Step size, gas state, impact rule, and the majorant floor."""

    dt: float
    number_density: float
    epsilon: float
    branch: CollisionBranch
    seed: int
    majorant_relative_speed: float

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.number_density > 0.0:
            raise ValueError(
                f"number density must be positive, got {self.number_density}")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"restitution must lie in (0, 1], got {self.epsilon}")
        if not self.majorant_relative_speed > 0.0:
            raise ValueError("majorant must be positive")


class EnsembleMoments(NamedTuple):
    density: float
    momentum: np.ndarray
    kinetic_energy: float
    temperature: float


def sample_maxwellian_ensemble(count: int, species: Species, density: float,
                               bulk_velocity, temperature: float,
                               seed: int) -> ParticleEnsemble:
    """Gaussian velocities with the requested mean and temperature.

    The ensemble represents a unit simulation volume, so the statistical
    weight is density / count; T = 0 collapses every velocity onto the bulk
    velocity exactly.
    """
    if count < 2:
        raise ValueError(f"need at least 2 particles, got {count}")
    if not density > 0.0:
        raise ValueError(f"density must be positive, got {density}")
    if temperature < 0.0:
        raise ValueError(f"temperature must be nonnegative, got {temperature}")
    u = np.asarray(bulk_velocity, dtype=np.float64).reshape(3)
    sigma = math.sqrt(BOLTZMANN * temperature / species.mass)
    generator = rng.stream(seed, "dsmc-maxwellian")
    velocities = u[None, :] + sigma * generator.standard_normal((count, 3))
    return ParticleEnsemble(velocities=velocities, species=species,
                            statistical_weight=density / count)


def ensemble_moments(ensemble: ParticleEnsemble, volume: float = 1.0) -> EnsembleMoments:
    """Per-volume density, momentum, kinetic energy, and granular temperature (K)."""
    v = ensemble.velocities
    w = ensemble.statistical_weight
    m = ensemble.species.mass
    n = v.shape[0]
    density = n * w / volume
    momentum = m * w * np.sum(v, axis=0) / volume
    kinetic = 0.5 * m * w * float(np.sum(v * v)) / volume
    mean_v = np.mean(v, axis=0)
    peculiar_sq = float(np.mean(np.sum(v * v, axis=1))) - float(mean_v @ mean_v)
    temperature = m * peculiar_sq / (3.0 * BOLTZMANN)
    return EnsembleMoments(density=density, momentum=momentum,
                           kinetic_energy=kinetic, temperature=temperature)


class _State:
    """Mutable velocity columns plus an upper bound on the max squared speed.

    Columns are plain Python lists: the collision loop is scalar-dominated
    and list indexing beats ndarray item access by a wide margin.
    """

    def __init__(self, velocities: np.ndarray):
        self.vx = velocities[:, 0].tolist()
        self.vy = velocities[:, 1].tolist()
        self.vz = velocities[:, 2].tolist()
        self.count = velocities.shape[0]
        self.refresh_bound()

    def refresh_bound(self) -> None:
        arr = self.as_array()
        self.bound_sq = float(np.max(np.sum(arr * arr, axis=1)))

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.vx, self.vy, self.vz])


def _attempt_step(state: _State, config: DsmcConfig, species: Species,
                  weight: float, volume: float,
                  generator: np.random.Generator, majorant: float) -> bool:
    """One candidate sweep in place; False if the majorant was pierced.

    Accepted collisions are journaled with their pre-collision velocities so
    a pierced attempt can be unwound exactly instead of copying the whole
    ensemble every step.
    """
    n = state.count
    expected = (0.5 * n * (n - 1) * weight * math.pi * species.diameter**2
                * majorant * config.dt / volume)
    n_candidates = int(math.floor(expected + generator.uniform()))
    if n_candidates == 0:
        return True
    first = generator.integers(0, n, n_candidates)
    second = generator.integers(0, n - 1, n_candidates)
    second = second + (second >= first)
    normals = generator.standard_normal((n_candidates, 3))
    uniforms = generator.uniform(0.0, 1.0, n_candidates)
    first_l = first.tolist()
    second_l = second.tolist()
    nx_l, ny_l, nz_l = (normals[:, 0].tolist(), normals[:, 1].tolist(),
                        normals[:, 2].tolist())
    u_l = uniforms.tolist()
    vx, vy, vz = state.vx, state.vy, state.vz
    factor = 0.5 * config.branch.normal_factor(config.epsilon)
    majorant_sq = majorant * majorant
    bound_sq = state.bound_sq
    journal: list[tuple] = []
    sqrt = math.sqrt
    for k in range(n_candidates):
        i = first_l[k]
        j = second_l[k]
        gx = vx[j] - vx[i]
        gy = vy[j] - vy[i]
        gz = vz[j] - vz[i]
        g_sq = gx * gx + gy * gy + gz * gz
        if g_sq > majorant_sq:
            for i, j, x1, y1, z1, x2, y2, z2 in reversed(journal):
                vx[i] = x1
                vy[i] = y1
                vz[i] = z1
                vx[j] = x2
                vy[j] = y2
                vz[j] = z2
            return False
        nx = nx_l[k]
        ny = ny_l[k]
        nz = nz_l[k]
        norm = sqrt(nx * nx + ny * ny + nz * nz)
        if norm < 1e-300:
            continue
        gn = (gx * nx + gy * ny + gz * nz) / norm
        if u_l[k] * majorant >= abs(gn):
            continue
        journal.append((i, j, vx[i], vy[i], vz[i], vx[j], vy[j], vz[j]))
        impulse = factor * gn / norm
        ix = impulse * nx
        iy = impulse * ny
        iz = impulse * nz
        wx1 = vx[i] + ix
        wy1 = vy[i] + iy
        wz1 = vz[i] + iz
        wx2 = vx[j] - ix
        wy2 = vy[j] - iy
        wz2 = vz[j] - iz
        vx[i] = wx1
        vy[i] = wy1
        vz[i] = wz1
        vx[j] = wx2
        vy[j] = wy2
        vz[j] = wz2
        s1 = wx1 * wx1 + wy1 * wy1 + wz1 * wz1
        if s1 > bound_sq:
            bound_sq = s1
        s2 = wx2 * wx2 + wy2 * wy2 + wz2 * wz2
        if s2 > bound_sq:
            bound_sq = s2
    state.bound_sq = bound_sq
    return True


def _step_state(state: _State, config: DsmcConfig, species: Species,
                weight: float, volume: float, step_index: int) -> None:
    generator = rng.stream(config.seed, "dsmc-step", step_index)
    majorant = max(config.majorant_relative_speed, 2.0 * math.sqrt(state.bound_sq))
    for _ in range(_MAJORANT_RETRIES):
        if _attempt_step(state, config, species, weight, volume, generator, majorant):
            return
        majorant *= 2.0
    raise MajorantExceeded(
        f"relative speed still above majorant after {_MAJORANT_RETRIES} doublings")


def step(ensemble: ParticleEnsemble, config: DsmcConfig,
         step_index: int = 0) -> ParticleEnsemble:
    """Advance one step; pure function of (ensemble, config, step_index)."""
    if ensemble.count < 2:
        raise ValueError("need at least 2 particles to step")
    state = _State(ensemble.velocities)
    volume = ensemble.count * ensemble.statistical_weight / config.number_density
    _step_state(state, config, ensemble.species, ensemble.statistical_weight,
                volume, step_index)
    return ParticleEnsemble(velocities=state.as_array(), species=ensemble.species,
                            statistical_weight=ensemble.statistical_weight)


def run(ensemble: ParticleEnsemble, config: DsmcConfig, n_steps: int,
        sample_every: int = 1) -> np.ndarray:
    """Step repeatedly, sampling moments; rows are (t, density, px, py, pz, T).

    Row 0 is always the initial state, so n_steps = 0 yields one row.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be nonnegative, got {n_steps}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    if ensemble.count < 2 and n_steps > 0:
        raise ValueError("need at least 2 particles to step")
    state = _State(ensemble.velocities)
    weight = ensemble.statistical_weight
    volume = ensemble.count * weight / config.number_density
    species = ensemble.species
    rows = [_sample_row(0.0, state, species, weight, volume)]
    for index in range(n_steps):
        if index and index % _BOUND_REFRESH_STEPS == 0:
            state.refresh_bound()
        _step_state(state, config, species, weight, volume, index)
        if (index + 1) % sample_every == 0:
            t = (index + 1) * config.dt
            rows.append(_sample_row(t, state, species, weight, volume))
    return np.array(rows)


def final_ensemble(ensemble: ParticleEnsemble, config: DsmcConfig,
                   n_steps: int) -> ParticleEnsemble:
    """State after n_steps, without sampling overhead."""
    state = _State(ensemble.velocities)
    weight = ensemble.statistical_weight
    volume = ensemble.count * weight / config.number_density
    for index in range(n_steps):
        if index and index % _BOUND_REFRESH_STEPS == 0:
            state.refresh_bound()
        _step_state(state, config, ensemble.species, weight, volume, index)
    return ParticleEnsemble(velocities=state.as_array(), species=ensemble.species,
                            statistical_weight=weight)


def _sample_row(t: float, state: _State, species: Species, weight: float,
                volume: float) -> list[float]:
    arr = state.as_array()
    snapshot = ParticleEnsemble(velocities=arr, species=species,
                                statistical_weight=weight)
    m = ensemble_moments(snapshot, volume=volume)
    return [t, m.density, m.momentum[0], m.momentum[1], m.momentum[2], m.temperature]


def write_timeseries(path, series: np.ndarray) -> None:
    """CSV rows t,density,px,py,pz,temperature with round-trip floats."""
    lines = ["t,density,px,py,pz,temperature"]
    for row in np.asarray(series, dtype=np.float64):
        lines.append(",".join(repr(float(x)) for x in row))
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
