"""Command-line front end.

Orchestrates meshing, assembly, eigenvalue solves, angle sweeps,
convergence studies, counting/certificate reports, decay fits, and field
export.  Configuration comes from a flat ``key=value`` file (``--config``)
overridden by command-line flags; every key is validated against
CONFIG_SCHEMA and unknown keys are rejected.

Commands write delimited tables (CSV with fixed headers, 15 significant
digits) to ``--out`` or stdout.  Report commands (sweep, convergence,
bounds, decay) additionally render a PNG figure next to the output file
unless ``--no-figures`` is given.  With a fixed seed and
``BROKENGUIDE_THREADS=1`` the delimited outputs are byte-identical across
runs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import asymptotics, bounds, decay, eigensolve, fem, geometry

#: slack for the sweep monotonicity flag, matching the library-wide check
MONOTONICITY_SLACK = 1e-8


class ConfigError(ValueError):
    """Invalid configuration: unknown key, bad value, or bad combination."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage tag for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _parse_theta_list(text: str) -> Tuple[float, ...]:
    if not text.strip():
        return ()
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"theta: {exc}") from None
    for value in values:
        if not 0.0 < value < math.pi / 2:
            raise ConfigError(
                f"theta must lie strictly inside (0, pi/2); got {value!r}"
            )
    return values


def _parse_int_list(text: str) -> Tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_formulation(text: str) -> str:
    allowed = (geometry.MODEL_GUIDE, geometry.REFERENCE_STRIP, geometry.FULL_GUIDE)
    if text not in allowed:
        raise ConfigError(
            f"formulation must be one of {', '.join(allowed)}; got {text!r}"
        )
    return text


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


#: key -> (converter from string, default value)
CONFIG_SCHEMA: Dict[str, Tuple[Callable, object]] = {
    "theta": (_parse_theta_list, ()),
    "formulation": (_parse_formulation, geometry.MODEL_GUIDE),
    "length": (int, 5),
    "level": (int, 16),
    "degree": (int, 6),
    "quad_degree": (int, 0),      # 0 -> 2*degree + 1
    "nval": (int, 6),
    "nsub": (int, 0),             # 0 -> solver default
    "eps": (float, 1e-8),
    "seed": (int, 0),
    "out": (str, ""),
    "levels": (_parse_int_list, (8, 16, 32)),
    "degrees": (_parse_int_list, (2, 3, 4, 5, 6)),
    "nx": (int, 200),
    "ny": (int, 50),
    "field_j": (int, 1),
    "vtk": (str, ""),
    "cert_n": (int, 0),           # 0 -> smallest n with a negative certificate
    "n_slices": (int, 12),
    "no_figures": (_parse_bool, False),
    "field_out": (str, ""),
}


@dataclass
class RunConfig:
    """Resolved configuration for one command invocation."""

    theta: Tuple[float, ...]
    formulation: str
    length: int
    level: int
    degree: int
    quad_degree: int
    nval: int
    nsub: int
    eps: float
    seed: int
    out: str
    levels: Tuple[int, ...]
    degrees: Tuple[int, ...]
    nx: int
    ny: int
    field_j: int
    vtk: str
    cert_n: int
    n_slices: int
    no_figures: bool
    field_out: str

    def single_theta(self) -> float:
        if len(self.theta) != 1:
            raise ConfigError(
                f"this command takes exactly one theta; got {len(self.theta)}"
            )
        return self.theta[0]


def parse_config_file(path: str) -> Dict[str, object]:
    """Parse a flat key=value file against CONFIG_SCHEMA."""
    values: Dict[str, object] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in CONFIG_SCHEMA:
                raise ConfigError(
                    f"{path}:{lineno}: unknown config key {key!r}; "
                    f"allowed: {', '.join(sorted(CONFIG_SCHEMA))}"
                )
            converter, _ = CONFIG_SCHEMA[key]
            try:
                values[key] = converter(text)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from None
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    values = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in CONFIG_SCHEMA:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            converter, _ = CONFIG_SCHEMA[key]
            if isinstance(flag_value, str):
                flag_value = converter(flag_value)
            values[key] = flag_value
    cfg = RunConfig(**values)
    if cfg.length < 1:
        raise ConfigError("length must be >= 1")
    if cfg.level < 1:
        raise ConfigError("level must be >= 1")
    if not 1 <= cfg.degree <= fem.MAX_DEGREE:
        raise ConfigError(f"degree must be in 1..{fem.MAX_DEGREE}")
    if cfg.nval < 1:
        raise ConfigError("nval must be >= 1")
    if cfg.eps <= 0.0:
        raise ConfigError("eps must be positive")
    return cfg


# ---------------------------------------------------------------------------
# pipeline stages and output helpers
# ---------------------------------------------------------------------------

def _run_stage(stage: str, func: Callable, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc


def _build_mesh(cfg: RunConfig, theta: float, level: Optional[int] = None) -> geometry.Mesh:
    spec = geometry.DomainSpec(cfg.formulation, theta, length=cfg.length)
    return geometry.generate_mesh(geometry.build_domain(spec), level or cfg.level)


def _assemble(cfg: RunConfig, mesh: geometry.Mesh, theta: float,
              degree: Optional[int] = None) -> fem.AssembledSystem:
    k = degree or cfg.degree
    quad_degree = cfg.quad_degree or 2 * k + 1
    basis = fem.build_basis(k)
    quadrature = fem.build_quadrature(quad_degree)
    return fem.assemble(mesh, basis, quadrature, theta)


def _solve(cfg: RunConfig, system: fem.AssembledSystem,
           nval: Optional[int] = None) -> eigensolve.EigenResult:
    params = eigensolve.SolverParams(
        n_val=nval or cfg.nval,
        n_sub=cfg.nsub,
        tolerance=cfg.eps,
        seed=cfg.seed,
    )
    return eigensolve.solve_gevp(system.S, system.M, params)


def _pipeline(cfg: RunConfig, theta: float, level: Optional[int] = None,
              degree: Optional[int] = None, nval: Optional[int] = None):
    mesh = _run_stage("mesh", _build_mesh, cfg, theta, level)
    system = _run_stage("assemble", _assemble, cfg, mesh, theta, degree)
    result = _run_stage("solve", _solve, cfg, system, nval)
    return mesh, system, result


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.15g}"


def _write_table(out: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _figure_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".png"


def _maybe_figure(cfg: RunConfig, render: Callable[[str], None]) -> None:
    if cfg.out and not cfg.no_figures:
        render(_figure_path(cfg.out))


def _thread_map(task: Callable, items: Sequence) -> List:
    """Map preserving input order; BROKENGUIDE_THREADS caps parallelism."""
    workers = int(os.environ.get("BROKENGUIDE_THREADS", "1"))
    if workers <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, items))


def _sample_grid(mesh: geometry.Mesh, system: fem.AssembledSystem,
                 full_coeffs: np.ndarray, nx: int, ny: int):
    """Evaluate a field on a regular bounding-box grid; NaN outside."""
    verts = mesh.vertices
    us = np.linspace(verts[:, 0].min(), verts[:, 0].max(), nx)
    vs = np.linspace(verts[:, 1].min(), verts[:, 1].max(), ny)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    pts = np.column_stack([uu.ravel(), vv.ravel()])
    vals = fem.evaluate_field(mesh, system.numbering.basis, full_coeffs, pts,
                              numbering=system.numbering, on_outside="nan")
    return pts, vals


def _eigenvector_field(system: fem.AssembledSystem,
                       result: eigensolve.EigenResult, j: int) -> np.ndarray:
    if not 1 <= j <= result.eigenvalues.size:
        raise ConfigError(
            f"field_j={j} out of range; the solve produced "
            f"{result.eigenvalues.size} eigenpairs"
        )
    return system.expand(result.eigenvectors[:, j - 1])


def _write_vtk(path: str, mesh: geometry.Mesh, vertex_values: np.ndarray,
               name: str = "eigenvector") -> None:
    """Legacy-VTK ASCII unstructured grid with one vertex scalar field."""
    nv = mesh.vertices.shape[0]
    nt = mesh.triangles.shape[0]
    lines = [
        "# vtk DataFile Version 3.0",
        "brokenguide field export",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {nv} double",
    ]
    lines.extend(f"{u:.17g} {v:.17g} 0" for u, v in mesh.vertices)
    lines.append(f"CELLS {nt} {4 * nt}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles)
    lines.append(f"CELL_TYPES {nt}")
    lines.extend("5" for _ in range(nt))
    lines.append(f"POINT_DATA {nv}")
    lines.append(f"SCALARS {name} double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(f"{x:.17g}" for x in vertex_values)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

EIGEN_HEADER = ("theta", "j", "lambda", "residual", "iterations",
                "n_dofs", "mesh_level", "degree")


def cmd_solve(cfg: RunConfig) -> int:
    """Full pipeline: mesh, assemble, solve, certify, write eigenvalue CSV."""
    theta = cfg.single_theta()
    mesh, system, result = _pipeline(cfg, theta)
    report = _run_stage("certify", eigensolve.certify, system.S, system.M, result)
    if not report.ok:
        for message in report.messages:
            print(f"certification failed: {message}", file=sys.stderr)
        return 1
    rows = [
        (theta, j + 1, result.eigenvalues[j], result.residuals[j],
         result.iterations, result.n_dofs, cfg.level, cfg.degree)
        for j in range(result.eigenvalues.size)
    ]
    _write_table(cfg.out, EIGEN_HEADER, rows)
    if cfg.field_out:
        full = _eigenvector_field(system, result, cfg.field_j)
        pts, vals = _sample_grid(mesh, system, full, cfg.nx, cfg.ny)
        inside = np.isfinite(vals)
        _write_table(cfg.field_out, ("u", "v", "value"),
                     list(zip(pts[inside, 0], pts[inside, 1], vals[inside])))
    return 0


SWEEP_HEADER = ("theta", "j", "two_term", "bo_value", "fem_value", "gap")


def cmd_sweep(cfg: RunConfig) -> int:
    """Per-theta eigenvalues against the two-term law and the 1D reduction.

    ``gap`` is fem_value - two_term: the departure from the asymptotic law.
    Per-theta solver failures are reported on stderr and leave NaN rows;
    the sweep continues.  A first-eigenvalue monotonicity violation beyond
    the slack is flagged on stderr.
    """
    thetas = cfg.theta
    if list(thetas) != sorted(thetas):
        raise ConfigError("sweep requires an ascending theta list")

    def entry(theta: float):
        try:
            _, _, result = _pipeline(cfg, theta)
            fem_values = result.eigenvalues
            error = None
        except StageError as exc:
            fem_values = np.full(cfg.nval, math.nan)
            error = str(exc)
        try:
            bo_values = asymptotics.solve_bo(theta, asymptotics.bo_grid(theta))
        except Exception:
            bo_values = []
        return theta, fem_values, bo_values, error

    rows = []
    first: List[Tuple[float, float]] = []
    for theta, fem_values, bo_values, error in _thread_map(entry, thetas):
        if error is not None:
            print(f"sweep: theta={theta:.6g} failed: {error}", file=sys.stderr)
        for j in range(1, cfg.nval + 1):
            two_term = asymptotics.two_term_eigenvalue(theta, j)
            bo_value = bo_values[j - 1] if j <= len(bo_values) else math.nan
            fem_value = fem_values[j - 1] if j <= len(fem_values) else math.nan
            rows.append((theta, j, two_term, bo_value, fem_value,
                         fem_value - two_term))
        if math.isfinite(fem_values[0]):
            first.append((theta, fem_values[0]))
    for (ta, la), (tb, lb) in zip(first, first[1:]):
        if lb < la - MONOTONICITY_SLACK:
            print(
                f"sweep: monotonicity violation: lambda_1({tb:.6g}) = {lb:.12g} "
                f"< lambda_1({ta:.6g}) = {la:.12g}",
                file=sys.stderr,
            )
    _write_table(cfg.out, SWEEP_HEADER, rows)
    if rows:
        from . import _figures

        _maybe_figure(cfg, lambda path: _figures.sweep_figure(path, rows))
    return 0


CONVERGENCE_HEADER = ("level", "degree", "j", "n_dofs", "half_log10_dofs",
                      "lambda", "error")


def cmd_convergence(cfg: RunConfig) -> int:
    """Eigenvalue errors against a finest-mesh highest-degree reference.

    Writes one row per (level, degree, j) with the error
    |lambda_j - lambda_j^ref| keyed by log10(N)/2 for dof count N, then
    prints empirical rates: in h at the highest degree, in 1/k at the
    finest level.
    """
    theta = cfg.single_theta()
    if not cfg.levels or not cfg.degrees:
        raise ConfigError("convergence requires non-empty levels and degrees")
    levels = tuple(sorted(cfg.levels))
    degrees = tuple(sorted(cfg.degrees))
    ref_level, ref_degree = levels[-1], degrees[-1]

    cache: Dict[Tuple[int, int], Tuple[np.ndarray, int]] = {}

    def solved(level: int, degree: int) -> Tuple[np.ndarray, int]:
        key = (level, degree)
        if key not in cache:
            _, system, result = _pipeline(cfg, theta, level=level, degree=degree)
            cache[key] = (result.eigenvalues, result.n_dofs)
        return cache[key]

    reference, _ = solved(ref_level, ref_degree)
    rows = []
    for level in levels:
        for degree in degrees:
            values, n_dofs = solved(level, degree)
            key = math.log10(n_dofs) / 2.0
            for j in range(1, cfg.nval + 1):
                rows.append((level, degree, j, n_dofs, key, values[j - 1],
                             abs(values[j - 1] - reference[j - 1])))
    _write_table(cfg.out, CONVERGENCE_HEADER, rows)

    def h_rate(j: int) -> float:
        errors = [abs(solved(level, ref_degree)[0][j - 1] - reference[j - 1])
                  for level in levels[:-1]]
        pairs = [
            math.log(errors[i] / errors[i + 1]) /
            math.log(levels[i + 1] / levels[i])
            for i in range(len(errors) - 1)
            if errors[i] > 0.0 and errors[i + 1] > 0.0
        ]
        return sum(pairs) / len(pairs) if pairs else math.nan

    def k_rate(j: int) -> float:
        ks, errs = [], []
        for degree in degrees[:-1]:
            err = abs(solved(ref_level, degree)[0][j - 1] - reference[j - 1])
            if err > 0.0:
                ks.append(degree)
                errs.append(err)
        if len(ks) < 2:
            return math.nan
        design = np.column_stack([np.ones(len(ks)), -np.log(ks)])
        slope = np.linalg.lstsq(design, np.log(errs), rcond=None)[0][1]
        return float(slope)

    for j in (1, min(cfg.nval, 10)):
        print(f"rate in h (degree {ref_degree}, j={j}): {h_rate(j):.3f}")
        print(f"rate in 1/k (level {ref_level}, j={j}): {k_rate(j):.3f}")
        if cfg.nval == 1:
            break
    if rows:
        from . import _figures

        _maybe_figure(cfg, lambda path: _figures.convergence_figure(path, rows))
    return 0


BOUNDS_HEADER = ("theta", "Z_root", "J_min", "fem_count", "certificate_value")


def cmd_bounds(cfg: RunConfig) -> int:
    """Counting bound, computed count, and existence certificate per angle."""
    rows = []
    for theta in cfg.theta:
        count = _run_stage("bounds", bounds.count_lower_bound, theta)
        _, _, result = _pipeline(cfg, theta)
        fem_count = int(result.bound_states.size)
        if fem_count == result.eigenvalues.size:
            print(
                f"bounds: theta={theta:.6g}: all {fem_count} computed values "
                "are below 1; raise nval to count reliably",
                file=sys.stderr,
            )
        n = cfg.cert_n or _run_stage(
            "certificate", bounds.minimal_certificate_n, theta
        )
        value = _run_stage("certificate", bounds.existence_certificate, theta, n)
        rows.append((theta, count.z_root, count.j_min, fem_count, value))
    _write_table(cfg.out, BOUNDS_HEADER, rows)
    if rows:
        from . import _figures

        _maybe_figure(cfg, lambda path: _figures.bounds_figure(path, rows))
    return 0


DECAY_HEADER = ("theta", "lambda", "predicted_rate", "fitted_rate",
                "fit_residual", "n_slices")


def cmd_decay(cfg: RunConfig) -> int:
    """Fit axial decay of the first eigenvector against sqrt(1 - lambda)."""
    rows = []
    fits = []
    for theta in cfg.theta:
        mesh, system, result = _pipeline(cfg, theta)
        lam = float(result.eigenvalues[0])
        if lam >= 1.0:
            raise StageError(
                "decay", ValueError(
                    f"theta={theta:.6g}: no bound state (lambda_1 = {lam:.9g})"
                )
            )
        full = system.expand(result.eigenvectors[:, 0])

        def field(pts, _mesh=mesh, _system=system, _full=full):
            return fem.evaluate_field(_mesh, _system.numbering.basis, _full,
                                      pts, numbering=_system.numbering)

        positions = _run_stage(
            "decay", decay.default_slice_positions,
            theta, cfg.formulation, cfg.length, cfg.n_slices,
        )
        fit = _run_stage(
            "decay", decay.fit_decay_rate,
            field, lam, positions, theta, cfg.formulation,
        )
        rows.append((theta, lam, fit.predicted_rate, fit.rate,
                     fit.fit_residual, fit.n_slices))
        fits.append((theta, fit))
    _write_table(cfg.out, DECAY_HEADER, rows)
    if fits:
        from . import _figures

        _maybe_figure(cfg, lambda path: _figures.decay_figure(path, fits))
    return 0


def cmd_export(cfg: RunConfig) -> int:
    """Sample an eigenvector on a regular grid; optional legacy-VTK dump."""
    theta = cfg.single_theta()
    mesh, system, result = _pipeline(cfg, theta)
    full = _eigenvector_field(system, result, cfg.field_j)
    pts, vals = _sample_grid(mesh, system, full, cfg.nx, cfg.ny)
    inside = np.isfinite(vals)
    _write_table(cfg.out, ("u", "v", "value"),
                 list(zip(pts[inside, 0], pts[inside, 1], vals[inside])))
    if cfg.vtk:
        vertex_values = full[: mesh.vertices.shape[0]]
        _write_vtk(cfg.vtk, mesh, vertex_values)
    return 0


def cmd_mesh(cfg: RunConfig) -> int:
    """Generate the mesh; write the plain-text format when --out is given."""
    theta = cfg.single_theta()
    mesh = _run_stage("mesh", _build_mesh, cfg, theta)
    print(
        f"vertices={mesh.num_vertices} "
        f"triangles={mesh.num_triangles} "
        f"boundary_edges={len(mesh.boundary_edges)}"
    )
    if cfg.out:
        geometry.save_mesh(mesh, cfg.out)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "convergence": cmd_convergence,
    "bounds": cmd_bounds,
    "decay": cmd_decay,
    "export": cmd_export,
    "mesh": cmd_mesh,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brokenguide",
        description="Bound states of the Dirichlet Laplacian in broken "
                    "planar waveguides.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--theta", help="angle(s) in radians, comma-separated")
    common.add_argument("--formulation",
                        help="ModelGuide, ReferenceStrip, or FullGuide")
    common.add_argument("--length", type=int, help="guide length in periods")
    common.add_argument("--level", type=int, help="mesh refinement level")
    common.add_argument("--degree", type=int, help="polynomial degree")
    common.add_argument("--quad-degree", dest="quad_degree", type=int,
                        help="quadrature exactness degree (default 2k+1)")
    common.add_argument("--nval", type=int, help="number of eigenvalues")
    common.add_argument("--nsub", type=int, help="subspace dimension")
    common.add_argument("--eps", type=float, help="solver tolerance")
    common.add_argument("--seed", type=int, help="random start-block seed")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--no-figures", dest="no_figures",
                        action="store_const", const=True,
                        help="skip the report figure")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = subparsers.add_parser("solve", parents=[common],
                                help="mesh, assemble, solve, certify")
    sub.add_argument("--field-out", dest="field_out",
                     help="also sample an eigenvector to this CSV")
    sub.add_argument("--field-j", dest="field_j", type=int,
                     help="eigenvector index for field output (1-based)")
    sub.add_argument("--nx", type=int, help="grid samples along u")
    sub.add_argument("--ny", type=int, help="grid samples along v")

    subparsers.add_parser("sweep", parents=[common],
                          help="eigenvalues across an ascending theta list")

    sub = subparsers.add_parser("convergence", parents=[common],
                                help="error table against a reference run")
    sub.add_argument("--levels", help="comma-separated mesh levels")
    sub.add_argument("--degrees", help="comma-separated degrees")

    sub = subparsers.add_parser("bounds", parents=[common],
                                help="counting bound and certificate report")
    sub.add_argument("--cert-n", dest="cert_n", type=int,
                     help="certificate cutoff length (0 = automatic)")

    sub = subparsers.add_parser("decay", parents=[common],
                                help="axial decay-rate fit")
    sub.add_argument("--n-slices", dest="n_slices", type=int,
                     help="number of cross-section slices")

    sub = subparsers.add_parser("export", parents=[common],
                                help="sample an eigenvector on a grid")
    sub.add_argument("--field-j", dest="field_j", type=int,
                     help="eigenvector index (1-based)")
    sub.add_argument("--nx", type=int, help="grid samples along u")
    sub.add_argument("--ny", type=int, help="grid samples along v")
    sub.add_argument("--vtk", help="also write a legacy-VTK unstructured grid")

    subparsers.add_parser("mesh", parents=[common],
                          help="generate and export a mesh")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if not cfg.theta and args.command != "sweep":
            raise ConfigError("theta is required")
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
