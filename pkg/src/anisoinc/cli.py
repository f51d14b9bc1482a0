"""Command-line surface: construct -> transform -> verify pipeline.

Subcommands: construct, verify, ellipsoid, material, green, export.
Exit codes: 0 ok/pass, 1 input error, 2 solver non-convergence,
3 verification fail.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as aio
from .elliptic import EllipsoidAxes
from .ellipsoid_potential import (
    EllipsoidPose,
    eval_polynomial_potential,
    quadratic_density_coefficients,
)
from .errors import DomainError, StructuralError, UnsupportedInputError
from .fbsolver import (
    Grid,
    assemble_stiffness,
    construct_coincidence_set,
    extract_coincidence_set,
)
from .geometry import DiagonalStretch, connected_components, stretch_region
from .greens_ti import green_ti
from .materials import (
    ElasticTensor,
    check_construction_constraints,
    scale_factors,
    validate_elastic_tensor,
)
from .obstacle import (
    ObstacleSpec,
    eval_obstacle,
    nonpositivity_radius,
    obstacle_radius,
    support_halfwidth,
)
from .verify import (
    DensityPolynomial,
    EigenstrainSpec,
    certify_polynomial_conservation,
    non_ellipsoidality_score,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2
EXIT_VERIFY_FAIL = 3

#: Worker cap for quadrature chunking; set by --threads.
MAX_THREADS = 1


def load_preset(name: str) -> dict:
    with resources.files("anisoinc.presets").joinpath(f"{name}.json").open() as fh:
        return json.load(fh)


def load_config(args) -> dict:
    if getattr(args, "config", None):
        cfg = json.loads(Path(args.config).read_text())
    elif getattr(args, "case", "custom") in ("omega1", "omega2"):
        cfg = load_preset(args.case)
    else:
        raise DomainError("custom case needs --config PATH")
    return cfg


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_vec(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")], dtype=float)


def cmd_construct(args) -> int:
    cfg = load_config(args)
    material = ElasticTensor.from_dict(cfg["material"])
    report = validate_elastic_tensor(material)
    if not report.passed:
        print(f"error: material fails validation: {report.violations}", file=sys.stderr)
        return EXIT_INPUT
    spec = ObstacleSpec.from_dict(cfg["obstacle"])
    gridcfg = cfg.get("grid", {})
    n = int(gridcfg.get("n", 64))
    halfwidth = max(obstacle_radius(spec), support_halfwidth(spec))
    L = float(gridcfg["L"]) if "L" in gridcfg and gridcfg["L"] else 1.25 * halfwidth
    tol = float(gridcfg.get("tol", 1e-8))
    omega_relax = float(gridcfg.get("relaxation", 1.5))
    eps = float(args.eps_coincidence if args.eps_coincidence is not None
                else gridcfg.get("eps_coincidence", 1e-4))
    out_dir = Path(args.out if args.out else cfg.get("output", "anisoinc-out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = Grid(n=n, L=L)
    result = construct_coincidence_set(
        grid, lambda pts: eval_obstacle(spec, pts),
        tol=tol, omega=omega_relax, eps=eps,
        max_iters=gridcfg.get("max_iters"),
        far_field_iters=int(gridcfg.get("far_field_iters", 10)),
    )
    V, phi, stats = result.V, result.phi_shifted, result.stats
    region = result.region
    count, largest, sizes = connected_components(region)
    stretch = DiagonalStretch(*cfg.get("stretch", [1.0, 1.0, 1.0]))
    stretched = stretch_region(region, stretch) if not region.is_empty else region
    tight_stretched = (stretch_region(result.region_tight, stretch)
                       if not result.region_tight.is_empty else result.region_tight)

    aio.write_vtk_structured_points(out_dir / "V.vtk", V, "V")
    aio.write_vtk_structured_points(out_dir / "phi.vtk", phi, "phi")
    from .fbsolver import ScalarField

    mask = ScalarField(grid, (np.abs(V.values - phi.values) <= eps).astype(float))
    aio.write_vtk_structured_points(out_dir / "mask.vtk", mask, "mask")
    aio.write_region_csv(out_dir / "region.csv", region)
    aio.write_region_csv(out_dir / "region_stretched.csv", stretched)
    aio.write_region_csv(out_dir / "region_tight.csv", result.region_tight)
    aio.write_region_csv(out_dir / "region_tight_stretched.csv", tight_stretched)
    aio.write_region_csv(out_dir / "region_half.csv", result.region_half)
    half_stretched = (stretch_region(result.region_half, stretch)
                      if not result.region_half.is_empty else result.region_half)
    aio.write_region_csv(out_dir / "region_half_stretched.csv", half_stretched)

    r0 = obstacle_radius(spec)
    contained = True
    if not region.is_empty:
        radii = np.linalg.norm(region.centers(), axis=1)
        contained = bool(np.max(radii) <= nonpositivity_radius(spec) + 2.0 * grid.h)
    summary = {
        "n": n,
        "L": L,
        "h": grid.h,
        "eps_coincidence": eps,
        "converged": stats.converged,
        "iterations": stats.iterations,
        "last_update": stats.last_update,
        "complementarity": stats.complementarity,
        "coincidence_nodes": len(region),
        "tight_coincidence_nodes": len(result.region_tight),
        "half_loading_nodes": len(result.region_half),
        "component_count": count,
        "component_sizes": sizes[:8],
        "r0": r0,
        "containment_radius_ok": contained,
        "empty_coincidence_set": region.is_empty,
        "far_field_iterations": result.outer_history,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if region.is_empty:
        print("construct: empty coincidence set (legal); outputs in", out_dir)
    else:
        print(
            f"construct: {len(region)} coincidence nodes, {count} component(s), "
            f"iterations={stats.iterations}, outputs in {out_dir}"
        )
    if not stats.converged:
        print(f"error: solver did not converge (last update {stats.last_update:.3e})",
              file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args)
    region_path = Path(args.region)
    if not region_path.exists():
        print(f"error: region file {region_path} not found", file=sys.stderr)
        return EXIT_INPUT
    region = aio.read_region_csv(region_path)
    material = ElasticTensor.from_dict(cfg["material"])
    eig_cfg = cfg["eigenstrain"]
    density = DensityPolynomial.from_dict(eig_cfg["density"])
    eig = EigenstrainSpec.uniaxial(int(eig_cfg.get("axis", 3)), density, eig_cfg["case"])
    out_dir = Path(args.out if args.out else cfg.get("output", "anisoinc-out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    cert = certify_polynomial_conservation(region, material, eig)
    score = non_ellipsoidality_score(region)
    report = {
        "case": cert.case,
        "degree": cert.degree,
        "pass": cert.passed,
        "field_rms": cert.field_rms,
        "residual_at_degree": cert.residual_at_degree,
        "residual_at_degree_plus_1": cert.residual_at_degree_plus_1,
        "incremental_energy": cert.incremental_energy,
        "tolerance": cert.tolerance,
        "sample_count": cert.sample_count,
        "scale_free": cert.scale_free,
        "non_ellipsoidality_score": score.score,
        "geometric_mismatch": score.geometric_mismatch,
        "potential_mismatch": score.potential_mismatch,
        "fitted_axes": list(score.fitted_axes),
    }
    (out_dir / "certification.json").write_text(json.dumps(report, indent=2) + "\n")
    from .verify import STRAIN_COMPONENTS

    lines = ["x,y,z,component,value,fitted"]
    for p, vals, fits in zip(cert.sample_points, cert.sample_values, cert.fitted_values):
        for name, v, f in zip(STRAIN_COMPONENTS, vals, fits):
            lines.append(
                ",".join([_fmt(p[0]), _fmt(p[1]), _fmt(p[2]), name, _fmt(v), _fmt(f)])
            )
    (out_dir / "certification_samples.csv").write_text("\n".join(lines) + "\n")
    print(
        f"verify: case={cert.case} degree={cert.degree} "
        f"residual={cert.residual_at_degree:.4e} (field rms {cert.field_rms:.4e}) "
        f"score={score.score:.4f} -> {'PASS' if cert.passed else 'FAIL'}"
    )
    return EXIT_OK if cert.passed else EXIT_VERIFY_FAIL


def cmd_ellipsoid(args) -> int:
    axes = EllipsoidAxes(*_parse_vec(args.axes))
    pose = EllipsoidPose(axes)
    coeffs = quadratic_density_coefficients(pose)
    point = _parse_vec(args.point)
    value = eval_polynomial_potential(coeffs, point)
    print(_fmt(value))
    if args.csv:
        lines = ["name,value", f"C_E,{_fmt(coeffs.C_E)}"]
        lines += [f"B{i+1},{_fmt(v)}" for i, v in enumerate(coeffs.B)]
        lines += [f"J{i+1},{_fmt(v)}" for i, v in enumerate(coeffs.J)]
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_material(args) -> int:
    cfg = load_config(args)
    material = ElasticTensor.from_dict(cfg["material"])
    report = validate_elastic_tensor(material)
    print(f"symmetry_class={material.symmetry_class}")
    print(f"valid={report.passed}")
    for v in report.violations:
        print(f"violated: {v}")
    if not report.passed:
        return EXIT_INPUT
    constraints = check_construction_constraints(material)
    print(f"scenario={constraints.scenario}")
    for item in constraints.items:
        print(f"constraint {item.name}: {'ok' if item.satisfied else 'violated'} "
              f"(residual {_fmt(item.residual)})")
    factors = scale_factors(material)
    print(f"kind={factors.kind}")
    if factors.kind == "transiso_v":
        print(f"branch={'degenerate' if factors.degenerate else 'non_degenerate'}")
        print(f"v={_fmt(factors.v)}")
        print(f"v1={_fmt(factors.v1)} v2={_fmt(factors.v2)}")
        print(f"gamma={_fmt(factors.gamma)}")
    for name in ("t", "s1", "s2"):
        value = getattr(factors, name)
        if value is not None:
            print(f"{name}={_fmt(value)}")
    return EXIT_OK


def cmd_green(args) -> int:
    cfg = load_config(args)
    material = ElasticTensor.from_dict(cfg["material"])
    point = _parse_vec(args.point)
    G = green_ti(material, point)
    for row in G:
        print(" ".join(_fmt(v) for v in row))
    return EXIT_OK


def cmd_export(args) -> int:
    field_v, _ = aio.read_vtk_structured_points(args.field)
    field_phi, _ = aio.read_vtk_structured_points(args.phi)
    region = extract_coincidence_set(field_v, field_phi, eps=float(args.eps_coincidence or 1e-4))
    aio.write_region_csv(args.out, region)
    print(f"export: {len(region)} voxel centers -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anisoinc",
        description="Construct and verify non-ellipsoidal inclusions with "
                    "polynomial-conserving strain fields in anisotropic media.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="cap worker count for quadrature chunking")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--case", choices=("omega1", "omega2", "custom"),
                       default="custom", help="bundled preset or custom config")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("construct", help="solve the obstacle problem and extract the inclusion")
    add_config(p)
    p.add_argument("--eps-coincidence", type=float, default=None,
                   help="coincidence threshold |V - phi| (default 1e-4)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="certify polynomial conservation of a region")
    add_config(p)
    p.add_argument("--region", required=True, help="region CSV file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ellipsoid", help="closed-form quadratic-density potential")
    p.add_argument("--axes", required=True, help="a1,a2,a3")
    p.add_argument("--point", default="0,0,0", help="evaluation point x1,x2,x3")
    p.add_argument("--density", choices=("quadratic",), default="quadratic")
    p.add_argument("--csv", help="write coefficient table")
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("material", help="validate a material and print scale factors")
    add_config(p)
    p.set_defaults(func=cmd_material)

    p = sub.add_parser("green", help="evaluate the TI Green function at a point")
    add_config(p)
    p.add_argument("--point", required=True, help="x1,x2,x3 (nonzero)")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("export", help="re-threshold V/phi volumes into a region CSV")
    p.add_argument("--field", required=True, help="V volume (.vtk)")
    p.add_argument("--phi", required=True, help="phi volume (.vtk)")
    p.add_argument("--eps-coincidence", type=float, default=1e-4)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    global MAX_THREADS
    parser = build_parser()
    args = parser.parse_args(argv)
    MAX_THREADS = max(1, args.threads)
    from . import kernels

    kernels.set_workers(MAX_THREADS)
    try:
        return args.func(args)
    except (DomainError, StructuralError, UnsupportedInputError, ValueError, KeyError,
            FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
