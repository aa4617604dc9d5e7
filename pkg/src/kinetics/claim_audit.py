"""Numerical audits of the collision-model claims, with machine verdicts.

Each audit computes a residual and compares it against a stated threshold;
the verdict is a pure function of that comparison. Statistical audits use a
3-sigma threshold on |estimate| / std_error so quadrature noise is separated
from genuine contradiction; under-specified relations are recorded as
diagnostic-only rows that never carry a pass/fail.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng, sphere_group
from .collision_kernel import (
    CollisionBranch,
    Species,
    actual_energy_loss,
    energy_loss_formula,
    jacobian_numeric,
)
from .collision_operator import (
    GainNormalization,
    QuadratureSpec,
    RateEstimate,
    evaluate_field,
    moment_rates,
)
from .distribution import DiscreteDistribution, VelocityGrid, bimodal, maxwellian

VERDICT_CONSISTENT = "consistent"
VERDICT_INCONSISTENT = "inconsistent"
VERDICT_DIAGNOSTIC = "diagnostic-only"

# In-cell offset at which trilinear interpolation error equals its cell
# average (the two-point Gauss abscissa); probe velocities placed there keep
# the equilibrium estimator bias below its Monte Carlo noise.
GAUSS_OFFSET = (1.0 - 1.0 / math.sqrt(3.0)) / 2.0


@dataclass(frozen=True)
class AuditReport:
    """One audited claim: residual, threshold, mechanical verdict, metadata."""

    claim_id: str
    paper_ref: str
    residual: float
    tolerance_or_sigma: float
    verdict: str
    metadata: dict = field(default_factory=dict)


def _graded(claim_id: str, ref: str, residual: float, threshold: float,
            metadata: dict) -> AuditReport:
    verdict = VERDICT_CONSISTENT if residual <= threshold else VERDICT_INCONSISTENT
    return AuditReport(claim_id=claim_id, paper_ref=ref, residual=float(residual),
                       tolerance_or_sigma=float(threshold), verdict=verdict,
                       metadata=metadata)


def _diagnostic(claim_id: str, ref: str, residual: float, metadata: dict) -> AuditReport:
    return AuditReport(claim_id=claim_id, paper_ref=ref, residual=float(residual),
                       tolerance_or_sigma=float("nan"), verdict=VERDICT_DIAGNOSTIC,
                       metadata=metadata)


def _sigma_ratio(estimate: RateEstimate) -> float:
    if estimate.value == 0.0:
        return 0.0
    if estimate.std_error == 0.0:
        return float("inf")
    return abs(estimate.value) / estimate.std_error


def audit_jacobian(seed: int = 0, n_configs: int = 100,
                   tolerance: float = 1e-6) -> AuditReport:
    """Finite-difference determinant of the pair map versus the restitution."""
    generator = rng.stream(seed, "audit-jacobian")
    worst = 0.0
    forced = [0.3, 0.7, 1.0]
    for branch in CollisionBranch:
        for index in range(n_configs):
            epsilon = forced[index] if index < len(forced) else float(
                generator.uniform(0.05, 1.0))
            s1 = Species(mass=float(generator.uniform(0.5, 3.0)), diameter=1.0)
            s2 = Species(mass=float(generator.uniform(0.5, 3.0)), diameter=1.0)
            v1 = generator.uniform(-2.0, 2.0, 3)
            v2 = generator.uniform(-2.0, 2.0, 3)
            n = generator.standard_normal(3)
            n /= np.linalg.norm(n)
            det = jacobian_numeric(v1, v2, n, epsilon, branch, s1, s2)
            worst = max(worst, abs(det - epsilon))
    return _graded(
        "pair-map-determinant-equals-restitution",
        "claim: the pair-velocity map contracts phase-space volume by exactly "
        "the restitution coefficient",
        worst, tolerance,
        {"seed": seed, "configs_per_branch": n_configs},
    )


def audit_energy_formula(seed: int = 0, n_configs: int = 200) -> list[AuditReport]:
    """Stated energy-loss expression versus the deficit the impact rules produce.

    Head-on geometry agrees to round-off; oblique geometry disagrees by
    (1/2)(1 - eps^2) mu (|g|^2 - (g.n)^2), which is reported, not repaired.
    """
    generator = rng.stream(seed, "audit-energy")
    worst_head_on = 0.0
    worst_oblique = 0.0
    worst_closed_form = 0.0
    for _ in range(n_configs):
        s1 = Species(mass=float(generator.uniform(0.5, 3.0)), diameter=1.0)
        s2 = Species(mass=float(generator.uniform(0.5, 3.0)), diameter=1.0)
        epsilon = float(generator.uniform(0.05, 0.999))
        mu = s1.mass * s2.mass / (s1.mass + s2.mass)
        v2 = generator.uniform(-2.0, 2.0, 3)
        n = generator.standard_normal(3)
        n /= np.linalg.norm(n)
        # head-on: relative velocity parallel to n
        v1 = v2 + float(generator.uniform(0.2, 3.0)) * n
        formula = energy_loss_formula(v1, v2, epsilon, s1, s2)
        actual = actual_energy_loss(v1, v2, n, epsilon, s1, s2)
        worst_head_on = max(worst_head_on, abs(formula - actual) / formula)
        # oblique: generic relative velocity
        v1 = v2 + generator.uniform(-2.0, 2.0, 3)
        g = v1 - v2
        formula = energy_loss_formula(v1, v2, epsilon, s1, s2)
        actual = actual_energy_loss(v1, v2, n, epsilon, s1, s2)
        discrepancy = formula - actual
        predicted = 0.5 * (1.0 - epsilon**2) * mu * (float(g @ g) - float(g @ n) ** 2)
        worst_oblique = max(worst_oblique, discrepancy / formula)
        worst_closed_form = max(worst_closed_form,
                                abs(discrepancy - predicted) / max(formula, 1e-300))
    ref = ("claim: energy loss depends on the full relative speed; the impact "
           "rules dissipate only the component along the impact normal")
    head_on = _graded("energy-loss-formula-head-on", ref, worst_head_on, 1e-12,
                      {"seed": seed, "configs": n_configs})
    oblique = _graded("energy-loss-formula-oblique", ref, worst_oblique, 1e-12,
                      {"seed": seed, "configs": n_configs,
                       "closed_form_residual": worst_closed_form})
    return [head_on, oblique]


def equilibrium_ray_probes(grid: VelocityGrid, thermal_speed: float,
                           radii=(0.5, 1.1, 1.7)) -> list[np.ndarray]:
    """Probe velocities along the axes, offset to the Gauss point of their cell.

    Twenty probes: three radii on both signs of each axis, plus two near the
    origin. Axis-aligned placements keep the partner-velocity cell phases
    unconstrained, which is where the trilinear estimator bias is smallest.
    """
    ax = grid.axis
    n = grid.nodes_per_axis
    h = grid.spacing

    def snap(x: float) -> float:
        i = min(int(np.searchsorted(ax, x)), n - 2)
        return float(ax[i] + GAUSS_OFFSET * h)

    probes = []
    for axis in range(3):
        for sign in (1.0, -1.0):
            for r in radii:
                p = np.full(3, snap(0.0))
                p[axis] = snap(sign * r * thermal_speed)
                probes.append(p)
    probes.append(np.full(3, snap(0.0)))
    probes.append(np.array([snap(0.3 * thermal_speed),
                            snap(-0.3 * thermal_speed), snap(0.0)]))
    return probes


@dataclass(frozen=True)
class StokesScenario:
    label: str
    distribution: DiscreteDistribution
    probes: list


def audit_stokes_claim(scenarios: list[StokesScenario], spec: QuadratureSpec,
                       threads: int = 1) -> list[AuditReport]:
    """Does the collision term vanish? One verdict per probed distribution."""
    reports = []
    for scenario in scenarios:
        estimates = evaluate_field(scenario.distribution, scenario.probes, spec,
                                   threads=threads)
        ratios = [_sigma_ratio(e) for e in estimates]
        worst = max(ratios)
        reports.append(_graded(
            f"vanishing-collision-term-{scenario.label}",
            "claim: the collision term vanishes identically, making the "
            "kinetic equation collisionless",
            worst, 3.0,
            {"seed": spec.seed, "samples": spec.samples,
             "probes": len(scenario.probes), "epsilon": spec.epsilon,
             "max_abs_rate": max(abs(e.value) for e in estimates)},
        ))
    return reports


def audit_chain_rule(points, lam: float, force, mass: float,
                     hemisphere: str = "lower") -> AuditReport:
    """Scalar-determinant force term versus the full chain-rule matrix.

    Test fields on the chart with analytic gradients; the difference between
    J (F/m) . grad(g) and (M^T F/m) . grad(g) is recorded per point and
    summarized. Diagnostic only: no graded claim states which form is meant.
    """
    force = np.asarray(force, dtype=np.float64).reshape(3)
    accel = force / mass

    def gaussian_field(vstar):
        value = math.exp(-float(vstar @ vstar))
        return value, -2.0 * vstar * value

    def linear_field(vstar):
        coeffs = np.array([0.7, -1.2, 0.4])
        return float(coeffs @ vstar), coeffs

    def radial_field(vstar):
        return float(vstar @ vstar), 2.0 * vstar

    differences = []
    for point in points:
        point = np.asarray(point, dtype=np.float64).reshape(3)
        matrix, det = sphere_group.chart_jacobian(point, lam, hemisphere)
        vstar = sphere_group.project_chart(
            sphere_group.embed(point, lam, hemisphere)).vstar
        for field_fn in (gaussian_field, linear_field, radial_field):
            _, grad = field_fn(vstar)
            scalar_form = det * float(accel @ grad)
            matrix_form = float((matrix.T @ accel) @ grad)
            differences.append(abs(scalar_form - matrix_form))
    differences = np.array(differences)
    return _diagnostic(
        "scalar-determinant-force-term",
        "comparison: scalar-determinant chain rule versus the full derivative "
        "matrix of the chart",
        float(differences.max()),
        {"lambda": lam, "hemisphere": hemisphere, "points": len(points),
         "median_difference": float(np.median(differences)),
         "force": force.tolist(), "mass": mass},
    )


def audit_mass_conservation(epsilons, spec_template: QuadratureSpec,
                            f: DiscreteDistribution,
                            threads: int = 1) -> list[AuditReport]:
    """Density and momentum rates under both gain weightings, per restitution."""
    reports = []
    for epsilon in epsilons:
        for norm in GainNormalization:
            spec = replace(spec_template, epsilon=epsilon, normalization=norm)
            rates = moment_rates(f, spec, threads=threads)
            density_ratio = _sigma_ratio(rates.density)
            momentum_ratio = max(_sigma_ratio(c) for c in rates.momentum)
            meta = {
                "seed": spec.seed, "samples": spec.samples, "epsilon": epsilon,
                "density_rate": rates.density.value,
                "density_sigma": rates.density.std_error,
                "energy_rate": rates.energy.value,
                "energy_sigma": rates.energy.std_error,
            }
            tag = f"{norm.value}-eps{epsilon:g}"
            reports.append(_graded(
                f"density-conservation-{tag}",
                "claim test: particle number is conserved by the collision "
                "term under this gain weighting",
                density_ratio, 3.0, meta))
            reports.append(_graded(
                f"momentum-conservation-{tag}",
                "claim test: momentum is conserved by the collision term "
                "under this gain weighting",
                momentum_ratio, 3.0, {"seed": spec.seed, "samples": spec.samples,
                                      "epsilon": epsilon}))
    return reports


@dataclass(frozen=True)
class TransportScenario:
    label: str
    field: object          # callable (vstar, t) -> float
    generator: sphere_group.PureQuaternion
    theta_of_t: object     # callable t -> float
    c_of_v: object         # callable vstar -> float
    times: list
    probe: sphere_group.ChartCoords


def audit_transport_relation(scenarios: list[TransportScenario]) -> list[AuditReport]:
    """Residual of f(v,t) + theta'(t) f(orbit(theta(t))) - C(v); diagnostic."""
    reports = []
    for scenario in scenarios:
        residual = sphere_group.transport_relation_residual(
            scenario.field, scenario.generator, scenario.theta_of_t,
            scenario.c_of_v, scenario.times, scenario.probe)
        reports.append(_diagnostic(
            f"transport-relation-{scenario.label}",
            "diagnostic: residual of the integrated transport relation along "
            "a one-parameter subgroup orbit",
            residual,
            {"times": [float(t) for t in scenario.times],
             "generator": scenario.generator.xi.tolist()},
        ))
    return reports


def default_transport_scenarios() -> list[TransportScenario]:
    generator = sphere_group.PureQuaternion(np.array([0.3, -0.1, 0.2]))
    probe = sphere_group.ChartCoords(np.array([0.1, 0.05, -0.02]))
    times = [0.0, 0.25, 0.5, 0.75, 1.0]

    def zero_field(vstar, t):
        return 0.0

    def steady_field(vstar, t):
        return math.exp(-float(np.dot(vstar, vstar)))

    def zero_c(vstar):
        return 0.0

    return [
        TransportScenario("zero-field", zero_field, generator, lambda t: t,
                          zero_c, times, probe),
        TransportScenario("steady-field", steady_field, generator, lambda t: t,
                          zero_c, times, probe),
    ]


@dataclass(frozen=True)
class AuditSettings:
    """Desk-scale defaults; the full battery runs in a couple of minutes."""

    seed: int = 0
    mass: float = 1.380649e-23
    diameter: float = 1.0
    temperature: float = 1.0
    jacobian_configs: int = 100
    stokes_samples: int = 100_000
    stokes_nodes: int = 197
    stokes_vmax_thermal: float = 5.5
    bimodal_nodes: int = 61
    bimodal_drift_thermal: float = 2.0
    mass_samples: int = 1_000_000
    mass_nodes: int = 61
    mass_vmax_thermal: float = 4.5


def run_all_audits(settings: AuditSettings, threads: int = 1) -> list[AuditReport]:
    """Run the full battery and return the rows in a stable order."""
    from .constants import BOLTZMANN

    vth = math.sqrt(BOLTZMANN * settings.temperature / settings.mass)
    reports: list[AuditReport] = [audit_jacobian(seed=settings.seed,
                                                 n_configs=settings.jacobian_configs)]
    reports.extend(audit_energy_formula(seed=settings.seed))

    eq_grid = VelocityGrid(vmax=settings.stokes_vmax_thermal * vth,
                           nodes_per_axis=settings.stokes_nodes)
    f_eq = maxwellian(eq_grid, density=1.0, bulk_velocity=(0.0, 0.0, 0.0),
                      temperature=settings.temperature, mass=settings.mass)
    drift = settings.bimodal_drift_thermal * vth
    bi_grid = VelocityGrid(vmax=(settings.bimodal_drift_thermal + 4.0) * vth,
                           nodes_per_axis=settings.bimodal_nodes)
    f_bi = bimodal(bi_grid, 0.5, (drift, 0.0, 0.0), settings.temperature,
                   0.5, (-drift, 0.0, 0.0), settings.temperature, settings.mass)
    bi_probes = equilibrium_ray_probes(bi_grid, vth)
    bi_probes.extend([np.array([drift, 0.0, 0.0]), np.array([-drift, 0.0, 0.0])])
    stokes_spec = QuadratureSpec(
        samples=settings.stokes_samples, seed=settings.seed,
        diameter=settings.diameter, mass=settings.mass, epsilon=1.0,
        branch=CollisionBranch.REFLECTIVE,
        normalization=GainNormalization.RESTITUTION_WEIGHTED)
    scenarios = [
        StokesScenario("maxwellian", f_eq, equilibrium_ray_probes(eq_grid, vth)),
        StokesScenario("bimodal", f_bi, bi_probes),
    ]
    reports.extend(audit_stokes_claim(scenarios, stokes_spec, threads=threads))

    chain_points = [np.array([0.0, 0.0, 0.0]), np.array([0.3, 0.0, 0.0]),
                    np.array([0.1, -0.2, 0.25]), np.array([-0.4, 0.1, 0.2])]
    reports.append(audit_chain_rule(chain_points, lam=1.0,
                                    force=(1.0, -0.5, 0.25), mass=2.0))

    mass_grid = VelocityGrid(vmax=settings.mass_vmax_thermal * vth,
                             nodes_per_axis=settings.mass_nodes)
    f_mass = maxwellian(mass_grid, density=1.0, bulk_velocity=(0.0, 0.0, 0.0),
                        temperature=settings.temperature, mass=settings.mass)
    mass_spec = QuadratureSpec(
        samples=settings.mass_samples, seed=settings.seed,
        diameter=settings.diameter, mass=settings.mass, epsilon=1.0,
        branch=CollisionBranch.REFLECTIVE,
        normalization=GainNormalization.RESTITUTION_WEIGHTED)
    reports.extend(audit_mass_conservation([1.0, 0.8], mass_spec, f_mass,
                                           threads=threads))

    reports.extend(audit_transport_relation(default_transport_scenarios()))
    return reports


def audit_csv_text(reports: list[AuditReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["claim_id", "paper_ref", "residual", "threshold",
                     "verdict", "metadata_json"])
    for report in reports:
        writer.writerow([
            report.claim_id,
            report.paper_ref,
            repr(float(report.residual)),
            repr(float(report.tolerance_or_sigma)),
            report.verdict,
            json.dumps(report.metadata, sort_keys=True),
        ])
    return buffer.getvalue()


def audit_summary_text(reports: list[AuditReport]) -> str:
    lines = ["claim audit summary", "==================="]
    for report in reports:
        if report.verdict == VERDICT_DIAGNOSTIC:
            status = f"diagnostic (residual {report.residual:.3e})"
        else:
            status = (f"{report.verdict} (residual {report.residual:.3e}"
                      f" vs threshold {report.tolerance_or_sigma:.3e})")
        lines.append(f"{report.claim_id}: {status}")
    counts: dict[str, int] = {}
    for report in reports:
        counts[report.verdict] = counts.get(report.verdict, 0) + 1
    lines.append("")
    lines.append(", ".join(f"{k}: {v}" for k, v in sorted(counts.items())))
    return "\n".join(lines) + "\n"


def write_audit_csv(path, reports: list[AuditReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(audit_csv_text(reports))


def write_audit_summary(path, reports: list[AuditReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(audit_summary_text(reports))
