"""Report figures rendered next to the delimited CLI output.

Each helper takes already-computed report rows and writes one PNG; nothing
here feeds back into the numerics.  matplotlib is imported lazily with the
Agg backend so headless runs and --no-figures never touch a display.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def sweep_figure(path: str, rows: Sequence[tuple]) -> None:
    """lambda_j against theta^(2/3) with the small-angle tangent lines.

    ``rows`` are (theta, j, two_term, bo_value, fem_value, gap) tuples.
    """
    plt = _pyplot()
    by_j: dict[int, list[tuple]] = {}
    for theta, j, two_term, bo_value, fem_value, gap in rows:
        by_j.setdefault(int(j), []).append((theta, two_term, bo_value, fem_value))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for j in sorted(by_j):
        pts = sorted(by_j[j])
        x = [t ** (2.0 / 3.0) for t, *_ in pts]
        fem = [p[3] for p in pts]
        two = [p[1] for p in pts]
        line, = ax.plot(x, fem, "o-", label=f"j={j}")
        ax.plot(x, two, "--", color=line.get_color(), linewidth=0.9)
    ax.axhline(1.0, color="0.4", linewidth=0.8)
    ax.set_xlabel(r"$\theta^{2/3}$")
    ax.set_ylabel("eigenvalue")
    ax.set_title("eigenvalues (solid) vs two-term law (dashed)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def convergence_figure(path: str, rows: Sequence[tuple]) -> None:
    """Error against the dof-count key, one curve per degree.

    ``rows`` are (level, degree, j, n_dofs, key, lam, error) tuples; only
    j=1 is plotted and zero errors (the reference run itself) are skipped.
    """
    plt = _pyplot()
    by_degree: dict[int, list[tuple]] = {}
    for level, degree, j, n_dofs, key, lam, error in rows:
        if j == 1 and error > 0.0:
            by_degree.setdefault(int(degree), []).append((key, error))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for degree in sorted(by_degree):
        pts = sorted(by_degree[degree])
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-",
                    label=f"degree {degree}")
    ax.set_xlabel(r"$\log_{10}(N)/2$")
    ax.set_ylabel(r"$|\lambda_1 - \lambda_1^{ref}|$")
    ax.set_title("eigenvalue error vs dof count")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def bounds_figure(path: str, rows: Sequence[tuple]) -> None:
    """Guaranteed lower count against the computed count per angle.

    ``rows`` are (theta, z_root, j_min, fem_count, certificate) tuples.
    """
    plt = _pyplot()
    thetas = [r[0] for r in rows]
    j_min = [r[2] for r in rows]
    fem = [r[3] for r in rows]
    x = np.arange(len(thetas))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.bar(x - width / 2, j_min, width, label="box-bound minimum")
    ax.bar(x + width / 2, fem, width, label="computed count")
    ax.set_xticks(x)
    ax.set_xticklabels([f"{t:.4f}" for t in thetas], fontsize=8)
    ax.set_xlabel("theta (rad)")
    ax.set_ylabel("bound states")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def decay_figure(path: str, fits: Sequence[tuple]) -> None:
    """Cross-section norms on a log scale with the fitted exponentials.

    ``fits`` are (theta, fit) pairs with :class:`brokenguide.decay.DecayFit`
    values.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for theta, fit in fits:
        pts = ax.semilogy(fit.positions, fit.norms, "o",
                          label=f"theta={theta:.4f}")[0]
        line = np.exp(fit.intercept - fit.rate * fit.positions)
        ax.semilogy(fit.positions, line, "-", color=pts.get_color(),
                    linewidth=0.9)
    ax.set_xlabel("axial position")
    ax.set_ylabel("cross-section norm")
    ax.set_title("slice norms and fitted decay")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
