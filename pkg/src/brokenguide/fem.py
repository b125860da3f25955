"""High-order Lagrange finite elements on triangles.

Reference bases of degree 1..6 with Gauss-Lobatto edge nodes and
warp&blend interior nodes, collapsed-coordinate Gauss quadrature of
arbitrary exactness degree, and assembly of the anisotropic stiffness
and mass matrices

    S[phi, phi'] = int  c_u du(phi) du(phi') + c_v dv(phi) dv(phi'),
    M[phi, phi'] = int  phi phi',

with Dirichlet (and artificial-boundary) degrees of freedom eliminated
by row/column deletion, so the reduced pencil stays symmetric positive
definite.

The Lagrange basis is represented through an orthogonal modal basis
(Jacobi polynomials on the collapsed triangle, evaluated by homogeneous
three-term recurrences that are regular at the collapsing vertex) and a
generalized Vandermonde solve; this keeps degree-6 evaluation well
conditioned at arbitrary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import lu_factor, lu_solve
from scipy.special import roots_jacobi

from .geometry import ARTIFICIAL, DIRICHLET, FULL_GUIDE, MODEL_GUIDE, REFERENCE_STRIP, Mesh

MAX_DEGREE = 6

# warp&blend interior optimization parameter per degree (1-based)
_ALPHA_OPT = {1: 0.0, 2: 0.0, 3: 1.4152, 4: 0.1001, 5: 0.2751, 6: 0.9800}


# ---------------------------------------------------------------------------
# 1D node families
# ---------------------------------------------------------------------------

def gauss_lobatto_points(k: int) -> np.ndarray:
    """All k+1 Gauss-Lobatto points of degree k on [0, 1], ascending."""
    if k < 1:
        raise ValueError("degree must be >= 1")
    if k == 1:
        return np.array([0.0, 1.0])
    # interior points are the roots of P_k'
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    interior = np.sort(npleg.legroots(npleg.legder(coeffs)))
    pts = np.concatenate([[-1.0], interior, [1.0]])
    return (pts + 1.0) / 2.0


# ---------------------------------------------------------------------------
# Jacobi polynomials (vectorized three-term recurrences)
# ---------------------------------------------------------------------------

def _jacobi(n: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    """P_n^(a,b)(x), standard (unnormalized) Jacobi polynomial."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)
    pm1 = np.ones_like(x)
    p = 0.5 * (a - b + (a + b + 2.0) * x)
    for m in range(2, n + 1):
        c1 = 2.0 * m * (m + a + b) * (2.0 * m + a + b - 2.0)
        c2 = (2.0 * m + a + b - 1.0) * (a * a - b * b)
        c3 = (2.0 * m + a + b - 1.0) * (2.0 * m + a + b) * (2.0 * m + a + b - 2.0)
        c4 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * (2.0 * m + a + b)
        p, pm1 = ((c2 + c3 * x) * p - c4 * pm1) / c1, p
    return p


def _jacobi_deriv(n: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return 0.5 * (n + a + b + 1.0) * _jacobi(n - 1, a + 1.0, b + 1.0, x)


# ---------------------------------------------------------------------------
# modal basis on the unit triangle {u, v >= 0, u + v <= 1}
# ---------------------------------------------------------------------------

class _ModalBasis:
    """Orthogonal polynomial basis of total degree <= k with gradients.

    Basis functions are R_m(u, v) * P_n^(2m+1,0)(2v - 1) where
    R_m(u, v) = (1-v)^m P_m((2u-1+v)/(1-v)) is evaluated through a
    homogeneous recurrence in (s, w) = (2u-1+v, 1-v), so no division by
    (1-v) ever occurs and the top vertex is perfectly regular.
    """

    def __init__(self, k: int) -> None:
        self.k = k
        self.pairs = [(m, n) for total in range(k + 1) for m in range(total + 1)
                      for n in [total - m]]
        # L2-normalization constants (exact for this family)
        self.scale = np.array(
            [math.sqrt((2.0 * m + 1.0) * (m + n + 1.0)) for m, n in self.pairs]
        )

    @property
    def cardinality(self) -> int:
        return len(self.pairs)

    def _radial(self, u: np.ndarray, v: np.ndarray) -> Tuple[list, list, list]:
        """R_m and its partials wrt s and w, for m = 0..k."""
        s = 2.0 * u - 1.0 + v
        w = 1.0 - v
        one = np.ones_like(s)
        zero = np.zeros_like(s)
        R = [one, s]
        Rs = [zero, one]
        Rw = [zero, zero]
        for m in range(1, self.k):
            c = 2.0 * m + 1.0
            R.append((c * s * R[m] - m * w * w * R[m - 1]) / (m + 1.0))
            Rs.append((c * (R[m] + s * Rs[m]) - m * w * w * Rs[m - 1]) / (m + 1.0))
            Rw.append((c * s * Rw[m] - m * (2.0 * w * R[m - 1] + w * w * Rw[m - 1]))
                      / (m + 1.0))
        return R[: self.k + 1], Rs[: self.k + 1], Rw[: self.k + 1]

    def eval(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        u, v = pts[:, 0], pts[:, 1]
        R, _, _ = self._radial(u, v)
        x = 2.0 * v - 1.0
        out = np.empty((pts.shape[0], self.cardinality))
        for col, (m, n) in enumerate(self.pairs):
            out[:, col] = self.scale[col] * R[m] * _jacobi(n, 2.0 * m + 1.0, 0.0, x)
        return out

    def grad(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        u, v = pts[:, 0], pts[:, 1]
        R, Rs, Rw = self._radial(u, v)
        x = 2.0 * v - 1.0
        out = np.empty((pts.shape[0], self.cardinality, 2))
        for col, (m, n) in enumerate(self.pairs):
            a = 2.0 * m + 1.0
            q = _jacobi(n, a, 0.0, x)
            dq = _jacobi_deriv(n, a, 0.0, x)
            # s = 2u-1+v, w = 1-v: d/du = 2 d/ds, d/dv = d/ds - d/dw
            out[:, col, 0] = self.scale[col] * 2.0 * Rs[m] * q
            out[:, col, 1] = self.scale[col] * ((Rs[m] - Rw[m]) * q + 2.0 * R[m] * dq)
        return out


# ---------------------------------------------------------------------------
# reference basis (Lagrange nodes + evaluation machinery)
# ---------------------------------------------------------------------------

@dataclass
class ReferenceBasis:
    """Lagrange basis of degree k on the unit reference triangle.

    Node order: 3 vertices, then k-1 nodes per edge (edges (0,1), (1,2),
    (2,0), parameter ascending along the edge), then interior nodes.
    """

    degree: int
    nodes: np.ndarray            # (Np, 2)
    edge_param: np.ndarray       # (k-1,) interior Gauss-Lobatto parameters
    family: str
    _modal: _ModalBasis = field(repr=False, default=None)
    _vand_lu: tuple = field(repr=False, default=None)

    @property
    def cardinality(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_edge(self) -> int:
        return self.degree - 1

    @property
    def n_interior(self) -> int:
        return self.cardinality - 3 - 3 * self.n_edge

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Values of all Lagrange functions at the given reference points."""
        psi = self._modal.eval(points)
        return lu_solve(self._vand_lu, psi.T).T

    def grad(self, points: np.ndarray) -> np.ndarray:
        """Gradients (Npts, Np, 2) of all Lagrange functions."""
        dpsi = self._modal.grad(points)
        out = np.empty((dpsi.shape[0], self.cardinality, 2))
        for d in range(2):
            out[:, :, d] = lu_solve(self._vand_lu, dpsi[:, :, d].T).T
        return out


def build_basis(degree: int, family: str = "gauss-lobatto") -> ReferenceBasis:
    """Construct the degree-k reference basis.

    ``family`` selects node placement: ``"gauss-lobatto"`` (edges follow the
    Gauss-Lobatto distribution, interior warped and blended) or
    ``"equispaced"`` (full equidistant lattice).  The spanned space is the
    complete polynomial space P_k either way.
    """
    k = int(degree)
    if not 1 <= k <= MAX_DEGREE:
        raise ValueError(f"unsupported degree {degree}; expected 1..{MAX_DEGREE}")
    if family not in ("gauss-lobatto", "equispaced"):
        raise ValueError(f"unknown node family {family!r}")

    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    if family == "gauss-lobatto":
        params = gauss_lobatto_points(k)[1:-1] if k >= 2 else np.empty(0)
    else:
        params = np.arange(1, k) / k if k >= 2 else np.empty(0)

    nodes = [verts[0], verts[1], verts[2]]
    for a, b in ((0, 1), (1, 2), (2, 0)):
        for t in params:
            nodes.append((1.0 - t) * verts[a] + t * verts[b])
    if family == "gauss-lobatto":
        interior = _warp_blend_interior(k)
    else:
        interior = np.array(
            [[i / k, j / k] for i in range(1, k) for j in range(1, k - i)]
        ).reshape(-1, 2)
    for p in interior:
        nodes.append(np.asarray(p, dtype=float))
    nodes = np.array(nodes, dtype=float)

    modal = _ModalBasis(k)
    if nodes.shape[0] != modal.cardinality:
        raise AssertionError("node count does not match dim P_k")
    vand = modal.eval(nodes)            # V[i, alpha] = psi_alpha(node_i)
    basis = ReferenceBasis(degree=k, nodes=nodes, edge_param=np.asarray(params),
                           family=family, _modal=modal, _vand_lu=lu_factor(vand.T))
    return basis


def _warp_blend_interior(k: int) -> np.ndarray:
    """Interior nodes of the warp&blend family (equilateral construction)."""
    if k < 3:
        return np.empty((0, 2))
    alpha = _ALPHA_OPT[k]
    # equidistant barycentric lattice; keep the interior indices
    lattice = [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]
    interior_mask = [(i >= 1 and j >= 1 and i + j <= k - 1) for i, j in lattice]
    l2 = np.array([i / k for i, _ in lattice])
    l3 = np.array([j / k for _, j in lattice])
    l1 = 1.0 - l2 - l3
    # equilateral frame
    x = -l2 + l3
    y = (-l2 - l3 + 2.0 * l1) / math.sqrt(3.0)
    blend1 = 4.0 * l2 * l3
    blend2 = 4.0 * l1 * l3
    blend3 = 4.0 * l1 * l2
    warp1 = _warp_factor(k, l3 - l2)
    warp2 = _warp_factor(k, l1 - l3)
    warp3 = _warp_factor(k, l2 - l1)
    w1 = blend1 * warp1 * (1.0 + (alpha * l1) ** 2)
    w2 = blend2 * warp2 * (1.0 + (alpha * l2) ** 2)
    w3 = blend3 * warp3 * (1.0 + (alpha * l3) ** 2)
    x = x + 1.0 * w1 + math.cos(2.0 * math.pi / 3.0) * w2 + math.cos(4.0 * math.pi / 3.0) * w3
    y = y + 0.0 * w1 + math.sin(2.0 * math.pi / 3.0) * w2 + math.sin(4.0 * math.pi / 3.0) * w3
    # back to barycentric, then to the unit triangle
    lam2 = (-3.0 * x - math.sqrt(3.0) * y + 2.0) / 6.0
    lam3 = (3.0 * x - math.sqrt(3.0) * y + 2.0) / 6.0
    # node = lam1*(0,0) + lam2*(1,0) + lam3*(0,1)
    pts = np.column_stack([lam2, lam3])
    return pts[np.array(interior_mask)]


def _warp_factor(k: int, rout: np.ndarray) -> np.ndarray:
    """1D warp from equidistant to Gauss-Lobatto, evaluated at rout in [-1,1]."""
    gll = 2.0 * gauss_lobatto_points(k) - 1.0
    req = np.linspace(-1.0, 1.0, k + 1)
    # Lagrange interpolation matrix from the equidistant nodes to rout,
    # expressed through the 1D Legendre Vandermonde for stability
    veq = np.polynomial.legendre.legvander(req, k)
    pmat = np.polynomial.legendre.legvander(rout, k)
    lmat = np.linalg.solve(veq.T, pmat.T)
    warp = lmat.T @ (gll - req)
    zerof = (np.abs(rout) < 1.0 - 1e-10).astype(float)
    sf = 1.0 - (zerof * rout) ** 2
    return warp / sf + warp * (zerof - 1.0)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on the unit reference triangle, exact to ``degree``."""

    degree: int
    points: np.ndarray   # (nq, 2)
    weights: np.ndarray  # (nq,)


def build_quadrature(degree: int) -> QuadratureRule:
    """Collapsed tensor Gauss rule exact for all polynomials of total degree <= d.

    One Gauss-Legendre factor in the collapsed direction and one
    Gauss-Jacobi(1,0) factor absorbing the Duffy weight; all weights are
    positive and sum to the triangle area 1/2.
    """
    d = int(degree)
    if d < 1:
        raise ValueError(f"unsupported quadrature degree {degree}")
    m = (d + 2) // 2  # integrates 1D degree 2m-1 >= d
    xi, wxi = npleg.leggauss(m)
    xi = (xi + 1.0) / 2.0
    wxi = wxi / 2.0
    eta_r, weta = roots_jacobi(m, 1.0, 0.0)
    eta = (eta_r + 1.0) / 2.0
    weta = weta / 4.0  # accounts for the (1-eta) Duffy factor on [0,1]
    U = np.outer(xi, 1.0 - eta)
    V = np.broadcast_to(eta, (m, m))
    W = np.outer(wxi, weta)
    return QuadratureRule(degree=d, points=np.column_stack([U.ravel(), V.ravel()]),
                          weights=W.ravel().copy())


# ---------------------------------------------------------------------------
# global degree-of-freedom numbering
# ---------------------------------------------------------------------------

class DofNumbering:
    """Continuous global numbering: vertices, then edge dofs, then interiors.

    Edge dofs are stored in the direction of the globally ascending vertex
    pair, so shares between neighbouring elements match geometrically
    (Gauss-Lobatto parameters are symmetric under reversal).
    """

    def __init__(self, mesh: Mesh, basis: ReferenceBasis) -> None:
        self.mesh = mesh
        self.basis = basis
        k = basis.degree
        ne_per_edge = basis.n_edge
        edges: Dict[Tuple[int, int], int] = {}
        for tri in mesh.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                if key not in edges:
                    edges[key] = len(edges)
        self.edge_index = edges
        nv = mesh.num_vertices
        nt = mesh.num_triangles
        self.n_vertex_dofs = nv
        self.n_edge_dofs = len(edges) * ne_per_edge
        self.n_interior_dofs = nt * basis.n_interior
        self.n_full = self.n_vertex_dofs + self.n_edge_dofs + self.n_interior_dofs

        elem = np.empty((nt, basis.cardinality), dtype=np.int64)
        local_edges = ((0, 1), (1, 2), (2, 0))
        for t, tri in enumerate(mesh.triangles):
            col = 0
            for vloc in range(3):
                elem[t, col] = tri[vloc]
                col += 1
            for (la, lb) in local_edges:
                ga, gb = int(tri[la]), int(tri[lb])
                key = (min(ga, gb), max(ga, gb))
                base = nv + edges[key] * ne_per_edge
                if ga < gb:
                    slots = range(ne_per_edge)
                else:
                    slots = range(ne_per_edge - 1, -1, -1)
                for s in slots:
                    elem[t, col] = base + s
                    col += 1
            base = nv + self.n_edge_dofs + t * basis.n_interior
            for s in range(basis.n_interior):
                elem[t, col] = base + s
                col += 1
        self.element_dofs = elem

    def boundary_dofs(self, tags: Sequence[str]) -> np.ndarray:
        """All dofs supported on boundary edges carrying one of ``tags``."""
        ne_per_edge = self.basis.n_edge
        nv = self.mesh.num_vertices
        out = set()
        for (a, b), tag in self.mesh.boundary_edges:
            if tag not in tags:
                continue
            out.add(int(a))
            out.add(int(b))
            key = (min(a, b), max(a, b))
            base = nv + self.edge_index[key] * ne_per_edge
            out.update(range(base, base + ne_per_edge))
        return np.array(sorted(out), dtype=np.int64)

    def dof_coordinates(self) -> np.ndarray:
        """Physical coordinates of every global dof (nodal interpretation)."""
        mesh, basis = self.mesh, self.basis
        coords = np.empty((self.n_full, 2))
        coords[: mesh.num_vertices] = mesh.vertices
        t_param = basis.edge_param
        nv = mesh.num_vertices
        for (a, b), idx in self.edge_index.items():
            pa, pb = mesh.vertices[a], mesh.vertices[b]
            base = nv + idx * basis.n_edge
            for s, t in enumerate(t_param):
                coords[base + s] = (1.0 - t) * pa + t * pb
        n_int = basis.n_interior
        if n_int:
            ref = basis.nodes[3 + 3 * basis.n_edge:]
            base0 = nv + self.n_edge_dofs
            for t, tri in enumerate(mesh.triangles):
                a, b, c = mesh.vertices[tri]
                phys = a + np.outer(ref[:, 0], b - a) + np.outer(ref[:, 1], c - a)
                coords[base0 + t * n_int: base0 + (t + 1) * n_int] = phys
        return coords


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

@dataclass
class AssembledSystem:
    """Reduced symmetric pencil (S, M) with the elimination bookkeeping."""

    S: "scipy.sparse.csr_matrix"
    M: "scipy.sparse.csr_matrix"
    dof_map: np.ndarray          # full index -> reduced index or -1
    n_dofs: int
    n_full: int
    coefficients: Tuple[float, float]
    numbering: DofNumbering
    S_full: Optional[object] = None
    M_full: Optional[object] = None

    def expand(self, reduced: np.ndarray) -> np.ndarray:
        """Scatter a reduced coefficient vector to full numbering (zeros on BC)."""
        reduced = np.asarray(reduced)
        full = np.zeros(reduced.shape[:-1] + (self.n_full,))
        keep = self.dof_map >= 0
        full[..., keep] = reduced
        return full


def form_coefficients(theta: float, formulation: str) -> Tuple[float, float]:
    """Anisotropic gradient weights (c_u, c_v) of the scaled operator."""
    if formulation in (MODEL_GUIDE, FULL_GUIDE):
        return 2.0 * math.sin(theta) ** 2, 2.0 * math.cos(theta) ** 2
    if formulation == REFERENCE_STRIP:
        return math.tan(theta) ** 2, 1.0
    raise ValueError(f"unknown formulation {formulation!r}")


def assemble(
    mesh: Mesh,
    basis: ReferenceBasis,
    quadrature: QuadratureRule,
    theta: float,
    formulation: Optional[str] = None,
    coefficients: Optional[Tuple[float, float]] = None,
    keep_full: bool = False,
) -> AssembledSystem:
    """Assemble stiffness and mass on ``mesh`` and eliminate constrained dofs.

    Dofs supported on Dirichlet or Artificial boundary edges are removed by
    row/column deletion; Neumann edges are natural.  ``coefficients``
    overrides the formulation-derived (c_u, c_v) pair (used by scaling
    tests); exactly one of ``formulation``/``coefficients`` must determine
    the weights.
    """
    from scipy.sparse import coo_matrix

    if coefficients is None:
        if formulation is None:
            formulation = mesh.spec.formulation if mesh.spec is not None else None
        if formulation is None:
            raise ValueError("either a formulation or explicit coefficients are required")
        coefficients = form_coefficients(theta, formulation)
    c_u, c_v = coefficients

    k = basis.degree
    if quadrature.degree < 2 * k:
        raise ValueError(
            f"quadrature degree {quadrature.degree} is below the mass-exactness "
            f"requirement 2k = {2 * k}"
        )

    # reference matrices (exactly symmetric by construction)
    phi = basis.eval(quadrature.points)              # (nq, Np)
    dphi = basis.grad(quadrature.points)             # (nq, Np, 2)
    w = quadrature.weights
    wphi = phi * w[:, None]
    # one symmetrization here makes every assembled matrix exactly symmetric
    m_ref = wphi.T @ phi
    m_ref = 0.5 * (m_ref + m_ref.T)
    k_uu = (dphi[:, :, 0] * w[:, None]).T @ dphi[:, :, 0]
    k_uu = 0.5 * (k_uu + k_uu.T)
    k_vv = (dphi[:, :, 1] * w[:, None]).T @ dphi[:, :, 1]
    k_vv = 0.5 * (k_vv + k_vv.T)
    k_uv = (dphi[:, :, 0] * w[:, None]).T @ dphi[:, :, 1]
    k_sym = 0.5 * (k_uv + k_uv.T)
    kref = np.empty((2, 2) + m_ref.shape)
    kref[0, 0] = k_uu
    kref[0, 1] = k_sym
    kref[1, 0] = k_sym
    kref[1, 1] = k_vv

    # per-element geometry
    pts = mesh.vertices[mesh.triangles]              # (nt, 3, 2)
    j00 = pts[:, 1, 0] - pts[:, 0, 0]
    j10 = pts[:, 1, 1] - pts[:, 0, 1]
    j01 = pts[:, 2, 0] - pts[:, 0, 0]
    j11 = pts[:, 2, 1] - pts[:, 0, 1]
    det = j00 * j11 - j01 * j10
    if np.any(det <= 0.0):
        bad = int(np.argmin(det))
        raise ValueError(f"degenerate triangle {bad}: non-positive Jacobian {det[bad]}")
    inv00, inv01 = j11 / det, -j01 / det
    inv10, inv11 = -j10 / det, j00 / det
    # G = Jinv diag(c_u, c_v) Jinv^T, symmetric 2x2 per element
    g00 = c_u * inv00 ** 2 + c_v * inv01 ** 2
    g01 = c_u * inv00 * inv10 + c_v * inv01 * inv11
    g11 = c_u * inv10 ** 2 + c_v * inv11 ** 2
    gmat = np.empty((det.shape[0], 2, 2))
    gmat[:, 0, 0] = g00
    gmat[:, 0, 1] = g01
    gmat[:, 1, 0] = g01
    gmat[:, 1, 1] = g11

    s_loc = np.einsum("tab,abij->tij", gmat, kref, optimize=True)
    s_loc *= det[:, None, None]

    numbering = DofNumbering(mesh, basis)
    edofs = numbering.element_dofs
    np_loc = basis.cardinality
    rows = np.repeat(edofs, np_loc, axis=1).ravel()
    cols = np.tile(edofs, (1, np_loc)).ravel()
    n_full = numbering.n_full
    s_full = coo_matrix((s_loc.ravel(), (rows, cols)), shape=(n_full, n_full)).tocsr()
    m_data = (det[:, None] * m_ref.ravel()[None, :]).ravel()
    m_full = coo_matrix((m_data, (rows, cols)), shape=(n_full, n_full)).tocsr()

    eliminated = numbering.boundary_dofs((DIRICHLET, ARTIFICIAL))
    keep = np.ones(n_full, dtype=bool)
    keep[eliminated] = False
    dof_map = np.full(n_full, -1, dtype=np.int64)
    dof_map[keep] = np.arange(int(keep.sum()))

    keep_idx = np.flatnonzero(keep)
    s_red = s_full[keep_idx][:, keep_idx].tocsr()
    m_red = m_full[keep_idx][:, keep_idx].tocsr()

    return AssembledSystem(
        S=s_red,
        M=m_red,
        dof_map=dof_map,
        n_dofs=int(keep.sum()),
        n_full=n_full,
        coefficients=(c_u, c_v),
        numbering=numbering,
        S_full=s_full if keep_full else None,
        M_full=m_full if keep_full else None,
    )


# ---------------------------------------------------------------------------
# field evaluation and interpolation
# ---------------------------------------------------------------------------

def evaluate_field(
    mesh: Mesh,
    basis: ReferenceBasis,
    coefficients: np.ndarray,
    points: np.ndarray,
    numbering: Optional[DofNumbering] = None,
    on_outside: str = "error",
    gradient: bool = False,
):
    """Evaluate the FE function with full-numbering ``coefficients`` at points.

    ``on_outside`` is ``"error"`` (raise on any point outside the mesh) or
    ``"nan"`` (return NaN there).  With ``gradient=True`` returns
    ``(values, grads)``.
    """
    if numbering is None:
        numbering = DofNumbering(mesh, basis)
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (numbering.n_full,):
        raise ValueError(
            f"expected a full coefficient vector of length {numbering.n_full}, "
            f"got shape {coefficients.shape}"
        )
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    tri_idx, bary = mesh.locate(pts)
    outside = tri_idx < 0
    if outside.any():
        if on_outside == "error":
            raise ValueError(
                f"{int(outside.sum())} evaluation point(s) outside the mesh; "
                f"first: {pts[np.argmax(outside)]}"
            )
        if on_outside != "nan":
            raise ValueError(f"unknown on_outside mode {on_outside!r}")

    values = np.full(pts.shape[0], np.nan)
    grads = np.full((pts.shape[0], 2), np.nan) if gradient else None
    inside = np.flatnonzero(~outside)
    if inside.size:
        ref = np.column_stack([bary[inside, 1], bary[inside, 2]])
        phi = basis.eval(ref)                     # (ni, Np)
        local_coeff = coefficients[numbering.element_dofs[tri_idx[inside]]]
        values[inside] = np.sum(phi * local_coeff, axis=1)
        if gradient:
            dphi = basis.grad(ref)
            tri_pts = mesh.vertices[mesh.triangles[tri_idx[inside]]]
            j00 = tri_pts[:, 1, 0] - tri_pts[:, 0, 0]
            j10 = tri_pts[:, 1, 1] - tri_pts[:, 0, 1]
            j01 = tri_pts[:, 2, 0] - tri_pts[:, 0, 0]
            j11 = tri_pts[:, 2, 1] - tri_pts[:, 0, 1]
            det = j00 * j11 - j01 * j10
            gu = np.sum(dphi[:, :, 0] * local_coeff, axis=1)
            gv = np.sum(dphi[:, :, 1] * local_coeff, axis=1)
            # physical gradient = J^{-T} (gu, gv)
            grads[inside, 0] = (j11 * gu - j10 * gv) / det
            grads[inside, 1] = (-j01 * gu + j00 * gv) / det
    if gradient:
        return values, grads
    return values


def interpolate(mesh: Mesh, basis: ReferenceBasis, func,
                numbering: Optional[DofNumbering] = None) -> np.ndarray:
    """Nodal interpolant coefficients (full numbering) of ``func(x, y)``."""
    if numbering is None:
        numbering = DofNumbering(mesh, basis)
    xy = numbering.dof_coordinates()
    return np.asarray(func(xy[:, 0], xy[:, 1]), dtype=float)


def export_matrix(matrix, path: str, dof_map: Optional[np.ndarray] = None) -> None:
    """Write a sparse matrix as coordinate text: one ``row col value`` line
    per stored entry, 0-based indices, 17 significant digits, entries sorted
    by (row, col) so the output is reproducible.

    When ``dof_map`` is given (full index -> reduced index or -1, as stored
    on :class:`AssembledSystem`), a sidecar file ``<path>.dofmap`` records
    the mapping, one ``full reduced`` line per full dof, so external tools
    can relate matrix rows back to mesh dofs.
    """
    from scipy.sparse import coo_matrix

    coo = coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    lines.extend(
        f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}" for i in order
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if dof_map is not None:
        dof_map = np.asarray(dof_map)
        sidecar = [f"{full} {reduced}" for full, reduced in enumerate(dof_map)]
        with open(path + ".dofmap", "w") as fh:
            fh.write("\n".join(sidecar) + "\n")
