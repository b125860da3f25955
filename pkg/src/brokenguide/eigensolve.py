"""Sparse symmetric generalized eigensolver for the smallest eigenvalues.

The wanted eigenpairs satisfy S w = lambda M w with S, M symmetric positive
definite and lambda at the bottom of the spectrum.  Power-type iterations
converge to the dominant end of the spectrum of the iterated operator, so
the solver iterates on w -> S^{-1} M w ("inverted strategy"): the largest
eigenvalues nu of M w = nu S w are found and the wanted eigenvalues are
recovered as lambda = 1/nu.

The block iteration performs M-orthonormalization and a Rayleigh-Ritz
projection every step, starts from a seeded random block for
reproducibility, and certifies convergence through both the relative change
of the Ritz values and explicit residual norms.  A "direct" mode iterating
on w -> M^{-1} S w is retained only to demonstrate that chasing the
smallest eigenvalues from the wrong end fails on real problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu


class IndefiniteMatrixError(ValueError):
    """Raised when a factorization meets a non-positive pivot (BC/assembly bug)."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the best result so far."""

    def __init__(self, message: str, best: "EigenResult") -> None:
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SolverParams:
    """Subspace-iteration controls.

    ``n_sub`` is the block size (must exceed ``n_val``: the extra vectors
    provide the convergence gap), ``tolerance`` bounds both the relative
    Ritz-value change and the residual scale, and ``seed`` fixes the random
    start block.
    """

    n_val: int = 6
    n_sub: int = 0           # 0 -> automatic: max(n_val + 2, 2 * n_val)
    tolerance: float = 1e-8
    max_iterations: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_val < 1:
            raise ValueError("n_val must be >= 1")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.n_sub and self.n_sub < self.n_val + 1:
            raise ValueError("n_sub must be at least n_val + 1")

    @property
    def block_size(self) -> int:
        return self.n_sub if self.n_sub else max(self.n_val + 2, 2 * self.n_val)


@dataclass
class EigenResult:
    """Converged eigenpairs, ascending, with certification data."""

    eigenvalues: np.ndarray      # (n_val,)
    eigenvectors: np.ndarray     # (n, n_val), M-orthonormal columns
    residuals: np.ndarray        # ||S w - lambda M w|| / ||w||
    iterations: int
    nu: np.ndarray               # raw inverted eigenvalues 1/lambda
    n_dofs: int
    converged: bool
    tolerance: float
    s_scale: float               # ||S||_1 used by the residual criterion

    @property
    def bound_states(self) -> np.ndarray:
        """Eigenvalues below the essential-spectrum threshold 1."""
        return self.eigenvalues[self.eigenvalues < 1.0]

    @property
    def artifact_values(self) -> np.ndarray:
        """Eigenvalues >= 1: discretization artifacts of the truncated
        essential spectrum, not bound states."""
        return self.eigenvalues[self.eigenvalues >= 1.0]


class Factorization:
    """Sparse symmetric factorization with a solve-to-tolerance guarantee."""

    def __init__(self, matrix: csr_matrix) -> None:
        matrix = matrix.tocsc()
        self.matrix = matrix
        self._lu = splu(
            matrix,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
        diag = self._lu.U.diagonal()
        if np.any(diag <= 0.0):
            bad = int(np.argmax(diag <= 0.0))
            raise IndefiniteMatrixError(
                f"non-positive pivot {diag[bad]:.3e} at elimination step {bad}: "
                "matrix is not positive definite"
            )

    def solve(self, rhs: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        """Solve to relative residual <= rtol, with iterative refinement."""
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        norm_b = np.linalg.norm(rhs, axis=0)
        scale = np.where(norm_b > 0.0, norm_b, 1.0)
        for _ in range(3):
            res = rhs - self.matrix @ x
            if np.all(np.linalg.norm(res, axis=0) <= rtol * scale):
                return x
            x = x + self._lu.solve(res)
        res = np.linalg.norm(rhs - self.matrix @ x, axis=0)
        if np.any(res > rtol * scale):
            raise RuntimeError(
                f"factorized solve stalled at relative residual {np.max(res / scale):.3e}"
            )
        return x


def factorize(S: csr_matrix) -> Factorization:
    """Factor a symmetric positive definite sparse matrix (fill-reducing order)."""
    return Factorization(S)


def _orthonormalize(Y: np.ndarray, MY: np.ndarray, rng: np.random.Generator,
                    M: csr_matrix):
    """M-orthonormalize the columns of Y, replacing collapsed directions."""
    while True:
        gram = Y.T @ MY
        gram = 0.5 * (gram + gram.T)
        vals, vecs = np.linalg.eigh(gram)
        good = vals > 1e-14 * max(vals[-1], np.finfo(float).tiny)
        if good.all():
            B = vecs[:, good] / np.sqrt(vals[good])
            return Y @ B, MY @ B
        # rank collapse: reseed the dead directions deterministically
        n_bad = int((~good).sum())
        fresh = rng.standard_normal((Y.shape[0], n_bad))
        Y = np.column_stack([Y, fresh])
        MY = np.column_stack([MY, M @ fresh])


def solve_gevp(
    S: csr_matrix,
    M: csr_matrix,
    params: SolverParams,
    strategy: str = "inverted",
    factor: Optional[Factorization] = None,
) -> EigenResult:
    """Find the ``params.n_val`` smallest eigenpairs of S w = lambda M w.

    ``strategy="inverted"`` (default) iterates on S^{-1} M, converging the
    wanted end; ``strategy="direct"`` iterates on M^{-1} S and is expected
    to fail on large problems.  Deterministic for a fixed seed.  Raises
    ConvergenceError (carrying the best approximation) when the iteration
    budget runs out.
    """
    if strategy not in ("inverted", "direct"):
        raise ValueError(f"unknown strategy {strategy!r}")
    n = S.shape[0]
    n_val = params.n_val
    if n_val > n:
        raise ValueError(f"requested {n_val} eigenpairs from a {n}-dof system")
    nsub = min(params.block_size, n)
    rng = np.random.default_rng(params.seed)

    if factor is None:
        factor = factorize(S if strategy == "inverted" else M)
    s_scale = float(np.max(np.abs(S).sum(axis=0)))

    X = rng.standard_normal((n, nsub))
    prev = None
    lam = np.full(nsub, np.inf)
    W = X
    residuals = np.full(n_val, np.inf)
    for it in range(1, params.max_iterations + 1):
        if strategy == "inverted":
            Y = factor.solve(M @ X, rtol=1e-10)
        else:
            Y = factor.solve(S @ X, rtol=1e-10)
        MY = M @ Y
        W, MW = _orthonormalize(Y, MY, rng, M)
        SW = S @ W
        ritz = W.T @ SW
        ritz = 0.5 * (ritz + ritz.T)
        lam, Z = np.linalg.eigh(ritz)
        W = W @ Z
        SW = SW @ Z
        MW = MW @ Z
        X = W
        # convergence: relative Ritz change on the wanted values, then residuals
        if prev is not None and prev.size >= n_val:
            change = np.abs(lam[:n_val] - prev[:n_val]) / np.maximum(
                np.abs(lam[:n_val]), np.finfo(float).tiny
            )
            if np.max(change) < params.tolerance:
                R = SW[:, :n_val] - MW[:, :n_val] * lam[:n_val]
                residuals = np.linalg.norm(R, axis=0) / np.linalg.norm(W[:, :n_val], axis=0)
                if np.max(residuals) <= params.tolerance * s_scale:
                    return EigenResult(
                        eigenvalues=lam[:n_val].copy(),
                        eigenvectors=W[:, :n_val].copy(),
                        residuals=residuals,
                        iterations=it,
                        nu=1.0 / lam[:n_val],
                        n_dofs=n,
                        converged=True,
                        tolerance=params.tolerance,
                        s_scale=s_scale,
                    )
        prev = lam.copy()

    R = SW[:, :n_val] - MW[:, :n_val] * lam[:n_val]
    residuals = np.linalg.norm(R, axis=0) / np.linalg.norm(W[:, :n_val], axis=0)
    best = EigenResult(
        eigenvalues=lam[:n_val].copy(),
        eigenvectors=W[:, :n_val].copy(),
        residuals=residuals,
        iterations=params.max_iterations,
        nu=1.0 / lam[:n_val],
        n_dofs=n,
        converged=False,
        tolerance=params.tolerance,
        s_scale=s_scale,
    )
    raise ConvergenceError(
        f"no convergence within {params.max_iterations} iterations "
        f"(best residuals {np.array2string(residuals, precision=2)}, "
        f"scale {params.tolerance * s_scale:.2e})",
        best,
    )


@dataclass
class CertificateReport:
    """Independent a-posteriori check of an EigenResult."""

    residuals: np.ndarray
    orthonormality_defect: float
    s_scale: float
    residual_bound: Optional[float]
    ok: bool
    messages: list = field(default_factory=list)


def certify(S: csr_matrix, M: csr_matrix, result: EigenResult,
            eps: Optional[float] = None) -> CertificateReport:
    """Recompute residuals and M-orthonormality from scratch; flag violations.

    ``eps`` (defaults to the solver tolerance recorded in the result) sets
    the residual bound eps * ||S||_1.  Report-only: never raises.
    """
    W = result.eigenvectors
    lam = result.eigenvalues
    R = S @ W - (M @ W) * lam
    residuals = np.linalg.norm(R, axis=0) / np.linalg.norm(W, axis=0)
    gram = W.T @ (M @ W)
    defect = float(np.abs(gram - np.eye(gram.shape[0])).max())
    s_scale = float(np.max(np.abs(S).sum(axis=0)))
    eps = result.tolerance if eps is None else eps
    bound = eps * s_scale
    messages = []
    if defect > 1e-8:
        messages.append(f"M-orthonormality defect {defect:.3e} exceeds 1e-8")
    bad = residuals > bound
    if bad.any():
        messages.append(
            f"{int(bad.sum())} residual(s) exceed {bound:.3e}: "
            f"{residuals[bad]}"
        )
    if not np.all(np.diff(lam) >= 0.0):
        messages.append("eigenvalues are not sorted ascending")
    return CertificateReport(
        residuals=residuals,
        orthonormality_defect=defect,
        s_scale=s_scale,
        residual_bound=bound,
        ok=not messages,
        messages=messages,
    )
