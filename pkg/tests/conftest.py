"""Shared test plumbing: memoized meshes/solves and the acceptance scoreboard.

Eigensolves dominate the suite's runtime, and several criteria interrogate
the same solve (the small-angle spectrum feeds both the eigenvalue check and
the counting bound; the reference-angle solve feeds the decay fit).  Caching
on the full parameter tuple lets every test ask for what it needs without
re-paying.
"""

from __future__ import annotations

import functools
import math

from brokenguide import (
    DomainSpec,
    SolverParams,
    assemble,
    build_basis,
    build_domain,
    build_quadrature,
    generate_mesh,
    solve_gevp,
)

HALF_PI = math.pi / 2.0


@functools.lru_cache(maxsize=None)
def cached_mesh(formulation: str, theta: float, length: int, level: int):
    return generate_mesh(build_domain(DomainSpec(formulation, theta, length)), level)


@functools.lru_cache(maxsize=None)
def cached_solve(
    formulation: str,
    theta: float,
    length: int,
    level: int,
    degree: int,
    nval: int,
    nsub: int = 0,
    tolerance: float = 1e-8,
):
    """Full pipeline run, memoized: returns (mesh, basis, system, result)."""
    mesh = cached_mesh(formulation, theta, length, level)
    basis = build_basis(degree)
    quadrature = build_quadrature(max(13, 2 * degree + 1))
    system = assemble(mesh, basis, quadrature, theta)
    params = SolverParams(n_val=nval, n_sub=nsub, tolerance=tolerance)
    result = solve_gevp(system.S, system.M, params)
    return mesh, basis, system, result


# --- acceptance scoreboard -------------------------------------------------
#
# Each acceptance test records exactly one line here *before* asserting, so
# the summary shows a pass/fail verdict per criterion even when a criterion
# fails partway.  Printed by the terminal-summary hook below.

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number:02d}: {verdict} — {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
