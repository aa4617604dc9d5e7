"""Batch front door: JSON config in, CSV and snapshot artifacts out.

Configs are strict: unknown keys are rejected by name, defaults are applied
and echoed to ``config_echo.json``, and every output is written atomically
(temp file + rename) so failed runs leave no partial files. Exit codes:
0 success, 1 configuration or validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import claim_audit, dsmc, transport_solver
from .collision_kernel import CollisionBranch, Species, collide
from .collision_operator import GainNormalization, QuadratureSpec, evaluate_field
from .distribution import VelocityGrid, bimodal, maxwellian
from .errors import (
    ConfigError,
    KineticsError,
    ParseError,
    UnderResolved,
    ValidationError,
)
from .transport_solver import ForceField

SUBCOMMANDS = ("collide", "operator", "dsmc", "transport", "audit")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    parameters: dict
    seed: int
    output_dir: str


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


class _Schema:
    """Field table: name -> (checker, default). Missing default means required."""

    def __init__(self, fields: dict):
        self.fields = fields

    def resolve(self, params: dict, context: str) -> dict:
        unknown = set(params) - set(self.fields)
        if unknown:
            raise ValidationError(
                f"unknown key {sorted(unknown)[0]!r} in {context}")
        resolved = {}
        for name, (checker, *default) in self.fields.items():
            if name in params:
                resolved[name] = checker(params[name], f"{context}.{name}")
            elif default:
                resolved[name] = default[0]
            else:
                raise ValidationError(f"missing required key {name!r} in {context}")
        return resolved


def _number(value, context) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{context} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{context} must be finite")
    return value


def _positive(value, context) -> float:
    value = _number(value, context)
    if not value > 0.0:
        raise ValidationError(f"{context} must be positive")
    return value


def _nonneg(value, context) -> float:
    value = _number(value, context)
    if value < 0.0:
        raise ValidationError(f"{context} must be nonnegative")
    return value


def _integer(value, context) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{context} must be an integer")
    return value


def _positive_int(value, context) -> int:
    value = _integer(value, context)
    if value < 1:
        raise ValidationError(f"{context} must be >= 1")
    return value


def _nonneg_int(value, context) -> int:
    value = _integer(value, context)
    if value < 0:
        raise ValidationError(f"{context} must be >= 0")
    return value


def _vec3(value, context) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ValidationError(f"{context} must be a list of 3 numbers")
    return [_number(v, context) for v in value]


def _restitution(value, context) -> float:
    value = _number(value, context)
    if not (0.0 < value <= 1.0):
        raise ValidationError(f"{context} must lie in (0, 1]")
    return value


def _branch(value, context) -> str:
    if value not in ("reflective", "passing"):
        raise ValidationError(f"{context} must be 'reflective' or 'passing'")
    return value


def _normalization(value, context) -> str:
    allowed = tuple(n.value for n in GainNormalization)
    if value not in allowed:
        raise ValidationError(f"{context} must be one of {allowed}")
    return value


def _string(value, context) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{context} must be a string")
    return value


def _probes(value, context) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{context} must be a non-empty list of 3-vectors")
    return [_vec3(item, f"{context}[{i}]") for i, item in enumerate(value)]


def _distribution_params(value, context) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(f"{context} must be an object")
    kind = value.get("kind")
    if kind == "maxwellian":
        schema = _Schema({
            "kind": (_string,),
            "density": (_positive, 1.0),
            "bulk_velocity": (_vec3, [0.0, 0.0, 0.0]),
            "temperature": (_positive, 1.0),
        })
    elif kind == "bimodal":
        schema = _Schema({
            "kind": (_string,),
            "density1": (_nonneg, 0.5),
            "bulk_velocity1": (_vec3,),
            "temperature1": (_positive, 1.0),
            "density2": (_nonneg, 0.5),
            "bulk_velocity2": (_vec3,),
            "temperature2": (_positive, 1.0),
        })
    else:
        raise ValidationError(f"{context}.kind must be 'maxwellian' or 'bimodal'")
    return schema.resolve(value, context)


_COLLIDE_SCHEMA = _Schema({
    "v1": (_vec3,),
    "v2": (_vec3,),
    "n": (_vec3,),
    "epsilon": (_restitution,),
    "branch": (_branch,),
    "mass1": (_positive, 1.0),
    "mass2": (_positive, 1.0),
    "diameter1": (_positive, 1.0),
    "diameter2": (_positive, 1.0),
})

_OPERATOR_SCHEMA = _Schema({
    "vmax": (_positive,),
    "nodes_per_axis": (_positive_int,),
    "distribution": (_distribution_params,),
    "mass": (_positive, 1.0),
    "diameter": (_positive, 1.0),
    "epsilon": (_restitution, 1.0),
    "branch": (_branch, "reflective"),
    "normalization": (_normalization, "restitution_weighted"),
    "samples": (_positive_int, 100_000),
    "probes": (_probes,),
})

_DSMC_SCHEMA = _Schema({
    "particles": (_positive_int,),
    "steps": (_nonneg_int,),
    "sample_every": (_positive_int, 1),
    "dt": (_positive,),
    "number_density": (_positive, 1.0),
    "epsilon": (_restitution, 1.0),
    "branch": (_branch, "reflective"),
    "temperature": (_positive, 1.0),
    "bulk_velocity": (_vec3, [0.0, 0.0, 0.0]),
    "mass": (_positive, 1.0),
    "diameter": (_positive, 1.0),
    "majorant_relative_speed": (_positive, 1.0),
})

_TRANSPORT_SCHEMA = _Schema({
    "nx": (_positive_int, 128),
    "length": (_positive, 10.0),
    "nv": (_positive_int, 128),
    "vmax": (_positive, 3.0),
    "dt": (_positive,),
    "steps": (_nonneg_int,),
    "force": (_vec3, [0.0, 0.0, 0.0]),
    "mass": (_positive, 1.0),
    "center_x": (_number, 3.0),
    "center_v": (_number, 0.0),
    "sigma_x": (_positive, 0.5),
    "sigma_v": (_positive, 0.4),
    "amplitude": (_positive, 1.0),
})

_AUDIT_SCHEMA = _Schema({
    "mass": (_positive, 1.380649e-23),
    "diameter": (_positive, 1.0),
    "temperature": (_positive, 1.0),
    "jacobian_configs": (_positive_int, 100),
    "stokes_samples": (_positive_int, 100_000),
    "stokes_nodes": (_positive_int, 197),
    "mass_samples": (_positive_int, 1_000_000),
    "mass_nodes": (_positive_int, 61),
})

_SCHEMAS = {
    "collide": _COLLIDE_SCHEMA,
    "operator": _OPERATOR_SCHEMA,
    "dsmc": _DSMC_SCHEMA,
    "transport": _TRANSPORT_SCHEMA,
    "audit": _AUDIT_SCHEMA,
}

_TOP_LEVEL_KEYS = {"subcommand", "parameters", "seed", "output_dir"}


def parse_config(text: str, subcommand: str | None = None) -> RunConfig:
    """Validate a JSON config; defaults applied, unknown keys rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("config must be a single JSON object")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ValidationError(f"unknown key {sorted(unknown)[0]!r} at top level")
    declared = raw.get("subcommand")
    if declared is not None and declared not in SUBCOMMANDS:
        raise ValidationError(f"subcommand must be one of {SUBCOMMANDS}")
    if subcommand is not None and declared is not None and declared != subcommand:
        raise ValidationError(
            f"config declares subcommand {declared!r} but {subcommand!r} was requested")
    chosen = declared or subcommand
    if chosen is None:
        raise ValidationError("no subcommand given (config or command line)")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ValidationError("output_dir must be a string")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("parameters must be an object")
    resolved = _SCHEMAS[chosen].resolve(params, "parameters")
    return RunConfig(subcommand=chosen, parameters=resolved, seed=seed,
                     output_dir=output_dir)


def config_to_json(config: RunConfig) -> str:
    payload = {
        "subcommand": config.subcommand,
        "seed": config.seed,
        "output_dir": config.output_dir,
        "parameters": config.parameters,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Staging:
    """Collects outputs and publishes them only after the run succeeds."""

    def __init__(self, output_dir: str):
        self.root = Path(output_dir)
        self.pending: list[tuple[Path, bytes]] = []

    def add_text(self, name: str, text: str) -> None:
        self.pending.append((self.root / name, text.encode("utf-8")))

    def add_bytes(self, name: str, data: bytes) -> None:
        self.pending.append((self.root / name, data))

    def publish(self) -> None:
        for path, data in self.pending:
            _write_atomic(path, data)


def _csv_text(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = [repr(float(x)) if isinstance(x, (int, float, np.floating))
                 else str(x) for x in row]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _run_collide(config: RunConfig, staging: _Staging, threads: int) -> None:
    p = config.parameters
    s1 = Species(mass=p["mass1"], diameter=p["diameter1"])
    s2 = Species(mass=p["mass2"], diameter=p["diameter2"])
    event = collide(p["v1"], p["v2"], p["n"], p["epsilon"],
                    CollisionBranch(p["branch"]), s1, s2)
    row = list(event.w1) + list(event.w2) + [event.lambda1, event.lambda2,
                                             event.delta_e]
    staging.add_text("collision.csv", _csv_text(
        ["w1x", "w1y", "w1z", "w2x", "w2y", "w2z", "lambda1", "lambda2",
         "delta_e"], [row]))


def _build_distribution(p: dict):
    grid = VelocityGrid(vmax=p["vmax"], nodes_per_axis=p["nodes_per_axis"])
    d = p["distribution"]
    if d["kind"] == "maxwellian":
        return maxwellian(grid, d["density"], d["bulk_velocity"],
                          d["temperature"], p["mass"])
    return bimodal(grid, d["density1"], d["bulk_velocity1"], d["temperature1"],
                   d["density2"], d["bulk_velocity2"], d["temperature2"],
                   p["mass"])


def _run_operator(config: RunConfig, staging: _Staging, threads: int) -> None:
    p = config.parameters
    f = _build_distribution(p)
    spec = QuadratureSpec(
        samples=p["samples"], seed=config.seed, diameter=p["diameter"],
        mass=p["mass"], epsilon=p["epsilon"], branch=CollisionBranch(p["branch"]),
        normalization=GainNormalization(p["normalization"]))
    probes = [np.asarray(probe) for probe in p["probes"]]
    estimates = evaluate_field(f, probes, spec, threads=threads)
    rows = [[probe[0], probe[1], probe[2], est.value, est.std_error]
            for probe, est in zip(probes, estimates)]
    staging.add_text("rates.csv", _csv_text(
        ["vx", "vy", "vz", "rate", "std_error"], rows))


def _run_dsmc(config: RunConfig, staging: _Staging, threads: int) -> None:
    p = config.parameters
    species = Species(mass=p["mass"], diameter=p["diameter"])
    ensemble = dsmc.sample_maxwellian_ensemble(
        p["particles"], species, p["number_density"], p["bulk_velocity"],
        p["temperature"], config.seed)
    cfg = dsmc.DsmcConfig(
        dt=p["dt"], number_density=p["number_density"], epsilon=p["epsilon"],
        branch=CollisionBranch(p["branch"]), seed=config.seed,
        majorant_relative_speed=p["majorant_relative_speed"])
    series = dsmc.run(ensemble, cfg, p["steps"], p["sample_every"])
    rows = [list(row) for row in series]
    staging.add_text("timeseries.csv", _csv_text(
        ["t", "density", "px", "py", "pz", "temperature"], rows))


def _run_transport(config: RunConfig, staging: _Staging, threads: int) -> None:
    p = config.parameters
    x0, v0 = p["center_x"], p["center_v"]
    sx, sv, amp = p["sigma_x"], p["sigma_v"], p["amplitude"]

    def initial(x, v):
        return amp * np.exp(-((x - x0) ** 2) / (2.0 * sx**2)
                            - ((v - v0) ** 2) / (2.0 * sv**2))

    grid0 = transport_solver.phase_grid_from_function(
        initial, p["nx"], p["length"], p["nv"], p["vmax"])
    field = ForceField(force=p["force"], mass=p["mass"])
    result = transport_solver.semi_lagrangian_run(grid0, field, p["dt"], p["steps"])
    final = result.grid
    t_end = p["dt"] * p["steps"]
    ax = field.acceleration[0]
    x_grid = final.x_axis[:, None]
    v_grid = final.v_axis[None, :]
    exact = initial(x_grid - v_grid * t_end + 0.5 * ax * t_end**2,
                    v_grid - ax * t_end)
    linf = float(np.max(np.abs(final.values - exact)))
    staging.add_text("transport.csv", _csv_text(
        ["metric", "value"],
        [["mass_drift", result.mass_drift],
         ["linf_error_vs_exact", linf],
         ["t_end", t_end]]))
    header = {
        "kind": "phase-1d1v", "nx": final.nx, "length": final.length,
        "nv": final.nv, "vmax": final.vmax,
        "order": transport_solver.SNAPSHOT_ORDER_1D1V,
    }
    payload = (json.dumps(header).encode("ascii") + b"\n"
               + np.ascontiguousarray(final.values, dtype="<f8").tobytes())
    staging.add_bytes("phase_snapshot.bin", payload)


def _run_audit(config: RunConfig, staging: _Staging, threads: int) -> None:
    p = config.parameters
    settings = claim_audit.AuditSettings(
        seed=config.seed, mass=p["mass"], diameter=p["diameter"],
        temperature=p["temperature"], jacobian_configs=p["jacobian_configs"],
        stokes_samples=p["stokes_samples"], stokes_nodes=p["stokes_nodes"],
        mass_samples=p["mass_samples"], mass_nodes=p["mass_nodes"])
    reports = claim_audit.run_all_audits(settings, threads=threads)
    staging.add_text("audit.csv", claim_audit.audit_csv_text(reports))
    staging.add_text("audit_summary.txt", claim_audit.audit_summary_text(reports))


_RUNNERS = {
    "collide": _run_collide,
    "operator": _run_operator,
    "dsmc": _run_dsmc,
    "transport": _run_transport,
    "audit": _run_audit,
}


def run(config: RunConfig, threads: int = 1) -> int:
    """Execute a validated config; outputs appear only on success."""
    staging = _Staging(config.output_dir)
    staging.add_text("config_echo.json", config_to_json(config))
    try:
        _RUNNERS[config.subcommand](config, staging, threads)
    except (ConfigError, ValueError, UnderResolved) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KineticsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    staging.publish()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kinetics",
        description="collision kernels, collision-term quadrature, particle "
                    "oracle, transport, and claim audits")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="path to a JSON config")
        sub.add_argument("--output-dir", default=None,
                         help="override the config's output directory")
        sub.add_argument("--seed", type=int, default=None,
                         help="override the config's seed")
        sub.add_argument("--threads", type=int, default=1,
                         help="worker cap; results are identical at any value")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text, subcommand=args.subcommand)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output_dir is not None:
        config = RunConfig(config.subcommand, config.parameters, config.seed,
                           args.output_dir)
    if args.seed is not None:
        config = RunConfig(config.subcommand, config.parameters, args.seed,
                           config.output_dir)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run(config, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
