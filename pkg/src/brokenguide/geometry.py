"""Computational domains and structured nested triangulations.

Three formulations of the waveguide eigenproblem are supported, all living
in dimensionless coordinates:

* ``ModelGuide`` -- the half-guide obtained by symmetry reduction: a corner
  triangle glued to a diagonal semi-infinite strip of period ``pi*sqrt(2)``,
  truncated by an artificial boundary at ``u = m*pi*sqrt(2)``.  The symmetry
  axis carries a Neumann tag, the guide walls are Dirichlet.
* ``ReferenceStrip`` -- the fixed domain made of a corner triangle
  ``(-pi,0), (0,0), (0,pi)`` glued to the rectangle ``(0, m*pi) x (0, pi)``;
  horizontal sides Dirichlet, the slanted side Neumann, the right side
  artificial.
* ``FullGuide`` -- the even reflection of ``ModelGuide`` across ``v = 0``
  with the Neumann tag removed (used to validate the symmetry reduction).

Meshes are generated on an integer lattice: every vertex is keyed by an
integer pair ``(p, q)`` and its coordinates are ``period*p/n`` where ``n``
is the refinement level.  Because the coordinate formula is evaluated
identically everywhere, shared interface vertices deduplicate bit-exactly,
the FullGuide vertex set is exactly mirror-symmetric, and a level-``2n``
mesh contains the level-``n`` vertices verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

MODEL_GUIDE = "ModelGuide"
REFERENCE_STRIP = "ReferenceStrip"
FULL_GUIDE = "FullGuide"
FORMULATIONS = (MODEL_GUIDE, REFERENCE_STRIP, FULL_GUIDE)

DIRICHLET = "Dirichlet"
NEUMANN = "Neumann"
ARTIFICIAL = "Artificial"
TAGS = (DIRICHLET, NEUMANN, ARTIFICIAL)

#: single-letter codes used by the plain-text mesh format
TAG_CODES = {DIRICHLET: "D", NEUMANN: "N", ARTIFICIAL: "A"}
CODE_TAGS = {code: tag for tag, code in TAG_CODES.items()}

MODEL_PERIOD = math.pi * math.sqrt(2.0)
STRIP_PERIOD = math.pi


# ---------------------------------------------------------------------------
# domain specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Which domain to build: formulation, half-opening angle, truncation length.

    ``length`` counts periods of the straight part: the artificial boundary
    sits at ``u = length*pi*sqrt(2)`` (ModelGuide/FullGuide) or
    ``x = length*pi`` (ReferenceStrip).
    """

    formulation: str
    theta: float
    length: int = 5

    def __post_init__(self) -> None:
        if self.formulation not in FORMULATIONS:
            raise ValueError(
                f"unknown formulation {self.formulation!r}; expected one of {FORMULATIONS}"
            )
        if not (0.0 < self.theta < math.pi / 2.0):
            raise ValueError(f"theta must lie strictly inside (0, pi/2), got {self.theta}")
        if int(self.length) != self.length or self.length < 1:
            raise ValueError(f"length must be an integer >= 1, got {self.length}")

    @property
    def period(self) -> float:
        return STRIP_PERIOD if self.formulation == REFERENCE_STRIP else MODEL_PERIOD


@dataclass(frozen=True)
class Polygon:
    """Ordered CCW vertex cycle with one tag per side (side i joins vertex i to i+1)."""

    vertices: Tuple[Tuple[float, float], ...]
    side_tags: Tuple[str, ...]
    spec: DomainSpec

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.side_tags):
            raise ValueError("one tag per polygon side is required")


def build_domain(spec: DomainSpec) -> Polygon:
    """Assemble the boundary polygon of the requested computational domain."""
    d = spec.period
    big_l = spec.length * d
    if spec.formulation == MODEL_GUIDE:
        # pentagon: axis, lower wall, artificial side, upper wall (two
        # collinear segments meeting at the strip/triangle interface)
        verts = (
            (-d, 0.0),        # A, tip of the corner triangle
            (0.0, 0.0),       # O, where axis meets the lower wall
            (big_l, big_l),
            (big_l, big_l + d),
            (0.0, d),
        )
        tags = (NEUMANN, DIRICHLET, ARTIFICIAL, DIRICHLET, DIRICHLET)
    elif spec.formulation == REFERENCE_STRIP:
        verts = (
            (-d, 0.0),
            (big_l, 0.0),
            (big_l, d),
            (0.0, d),
        )
        tags = (DIRICHLET, ARTIFICIAL, DIRICHLET, NEUMANN)
    else:  # FullGuide: even reflection across v = 0, Neumann tag dropped
        verts = (
            (-d, 0.0),
            (0.0, -d),
            (big_l, -big_l - d),
            (big_l, -big_l),
            (0.0, 0.0),
            (big_l, big_l),
            (big_l, big_l + d),
            (0.0, d),
        )
        tags = (
            DIRICHLET, DIRICHLET, ARTIFICIAL, DIRICHLET,
            DIRICHLET, ARTIFICIAL, DIRICHLET, DIRICHLET,
        )
    return Polygon(vertices=verts, side_tags=tags, spec=spec)


# ---------------------------------------------------------------------------
# mesh container
# ---------------------------------------------------------------------------

class Mesh:
    """Triangulation with boundary tags.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, positively oriented
    boundary_edges : list of ((i, j), tag) pairs
    level : structured refinement integer n
    spec : the DomainSpec the mesh was generated from (None for ad-hoc meshes)
    """

    def __init__(
        self,
        vertices: np.ndarray,
        triangles: np.ndarray,
        boundary_edges: Sequence[Tuple[Tuple[int, int], str]],
        level: int,
        spec: Optional[DomainSpec] = None,
    ) -> None:
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.boundary_edges = [((int(a), int(b)), tag) for (a, b), tag in boundary_edges]
        self.level = int(level)
        self.spec = spec
        self._finder = None  # lazy point-location bins

    # -- basic metrics ------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def edge_set(self) -> Dict[Tuple[int, int], int]:
        """Undirected edges -> number of incident triangles."""
        count: Dict[Tuple[int, int], int] = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                count[key] = count.get(key, 0) + 1
        return count

    def validate(self) -> None:
        """Check orientation, boundary tiling, tag uniqueness and disk topology."""
        areas = self.signed_areas()
        if not np.all(areas > 0.0):
            bad = int(np.argmin(areas))
            raise ValueError(f"triangle {bad} has non-positive signed area {areas[bad]}")
        edges = self.edge_set()
        if any(c > 2 for c in edges.values()):
            raise ValueError("non-manifold edge found (more than two incident triangles)")
        topological = {e for e, c in edges.items() if c == 1}
        tagged = [((min(a, b), max(a, b)), tag) for (a, b), tag in self.boundary_edges]
        tagged_set = {e for e, _ in tagged}
        if len(tagged) != len(tagged_set):
            raise ValueError("a boundary edge carries more than one tag")
        if tagged_set != topological:
            missing = topological - tagged_set
            extra = tagged_set - topological
            raise ValueError(
                f"tagged edges do not tile the boundary: {len(missing)} untagged, "
                f"{len(extra)} tagged but interior"
            )
        for _, tag in tagged:
            if tag not in TAGS:
                raise ValueError(f"unknown boundary tag {tag!r}")
        # Euler characteristic of a disk: V - E + F = 1 (outer face not counted)
        euler = self.num_vertices - len(edges) + self.num_triangles
        if euler != 1:
            raise ValueError(f"mesh is not a triangulated disk: V-E+F = {euler}")

    # -- point location -----------------------------------------------------

    def locate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Find containing triangle and barycentric coordinates for each point.

        Returns (tri_index, bary) where tri_index is -1 for points outside
        the mesh.  Containment uses a small negative tolerance so points on
        edges are accepted.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if self._finder is None:
            self._finder = _TriangleBins(self)
        return self._finder.locate(pts)


class _TriangleBins:
    """Uniform-grid spatial index over triangle bounding boxes."""

    def __init__(self, mesh: Mesh, tol: float = 1e-10) -> None:
        self.mesh = mesh
        self.tol = tol
        tri_pts = mesh.vertices[mesh.triangles]
        self.lo = tri_pts.min(axis=(0, 1))
        self.hi = tri_pts.max(axis=(0, 1))
        span = np.maximum(self.hi - self.lo, 1e-300)
        ncell = max(1, int(math.sqrt(mesh.num_triangles)))
        self.shape = (ncell, ncell)
        self.cell = span / ncell
        self.bins: Dict[Tuple[int, int], List[int]] = {}
        tmin = tri_pts.min(axis=1)
        tmax = tri_pts.max(axis=1)
        for t in range(mesh.num_triangles):
            i0, j0 = self._cell_of(tmin[t])
            i1, j1 = self._cell_of(tmax[t])
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    self.bins.setdefault((i, j), []).append(t)

    def _cell_of(self, p: np.ndarray) -> Tuple[int, int]:
        ij = np.floor((p - self.lo) / self.cell).astype(int)
        return (
            min(max(int(ij[0]), 0), self.shape[0] - 1),
            min(max(int(ij[1]), 0), self.shape[1] - 1),
        )

    def locate(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mesh = self.mesh
        tri = mesh.triangles
        verts = mesh.vertices
        found = np.full(pts.shape[0], -1, dtype=np.int64)
        bary = np.zeros((pts.shape[0], 3))
        for k, p in enumerate(pts):
            if not (
                self.lo[0] - self.tol <= p[0] <= self.hi[0] + self.tol
                and self.lo[1] - self.tol <= p[1] <= self.hi[1] + self.tol
            ):
                continue
            candidates = self.bins.get(self._cell_of(p), ())
            best_t, best_b, best_def = -1, None, math.inf
            for t in candidates:
                a, b, c = verts[tri[t]]
                det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
                l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det
                l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det
                l0 = 1.0 - l1 - l2
                deficiency = -min(l0, l1, l2)
                if deficiency < best_def:
                    best_t, best_b, best_def = t, (l0, l1, l2), deficiency
            # relative tolerance: barycentric coords are dimensionless
            if best_t >= 0 and best_def <= self.tol:
                found[k] = best_t
                bary[k] = best_b
        return found, bary


# ---------------------------------------------------------------------------
# structured generation on the integer lattice
# ---------------------------------------------------------------------------

def generate_mesh(polygon: Polygon, level: int) -> Mesh:
    """Generate the structured triangulation of a built domain at level ``n``.

    The corner triangle is subdivided into ``n**2`` affine-congruent cells,
    the straight part into columns of width ``period/n`` whose quads are split
    into two triangles, giving ``n**2 * (1 + 2m)`` triangles for ModelGuide
    and ReferenceStrip and twice that for FullGuide.
    """
    n = int(level)
    if n < 1:
        raise ValueError(f"mesh level must be >= 1, got {level}")
    spec = polygon.spec
    builder = _LatticeBuilder(spec.period, n)
    m = spec.length

    if spec.formulation == REFERENCE_STRIP:
        _corner_triangle_cells(builder, n)
        for p in range(0, m * n):
            for q in range(0, n):
                builder.add_quad((p, q), (p + 1, q), (p + 1, q + 1), (p, q + 1))
        for p in range(-n, m * n):
            builder.add_boundary((p, 0), (p + 1, 0), DIRICHLET)
        for p in range(0, m * n):
            builder.add_boundary((p, n), (p + 1, n), DIRICHLET)
        for q in range(0, n):
            builder.add_boundary((m * n, q), (m * n, q + 1), ARTIFICIAL)
        for p in range(-n, 0):
            builder.add_boundary((p, p + n), (p + 1, p + n + 1), NEUMANN)
        return builder.finish(level=n, spec=spec)

    # ModelGuide half (also the upper half of FullGuide)
    _corner_triangle_cells(builder, n)
    for p in range(0, m * n):
        for r in range(0, n):
            builder.add_quad(
                (p, p + r), (p + 1, p + r + 1), (p + 1, p + r + 2), (p, p + r + 1)
            )
    mirror = spec.formulation == FULL_GUIDE
    if mirror:
        builder.mirror_lower_half()
    else:
        for p in range(-n, 0):
            builder.add_boundary((p, 0), (p + 1, 0), NEUMANN)
    for p in range(0, m * n):
        builder.add_boundary((p, p), (p + 1, p + 1), DIRICHLET, also_mirrored=mirror)
    for p in range(-n, m * n):
        builder.add_boundary((p, p + n), (p + 1, p + n + 1), DIRICHLET, also_mirrored=mirror)
    for r in range(0, n):
        builder.add_boundary((m * n, m * n + r), (m * n, m * n + r + 1), ARTIFICIAL,
                             also_mirrored=mirror)
    return builder.finish(level=n, spec=spec)


def _corner_triangle_cells(builder: "_LatticeBuilder", n: int) -> None:
    """Uniform n**2 subdivision of the corner triangle (lattice columns p < 0)."""
    for p in range(-n, 0):
        for q in range(0, p + n):
            builder.add_quad((p, q), (p + 1, q), (p + 1, q + 1), (p, q + 1))
        builder.add_triangle((p, p + n), (p + 1, p + n), (p + 1, p + n + 1))


class _LatticeBuilder:
    """Accumulates lattice-keyed triangles, then materializes float coordinates."""

    def __init__(self, period: float, n: int) -> None:
        self.period = period
        self.n = n
        self.index: Dict[Tuple[int, int], int] = {}
        self.coords: List[Tuple[float, float]] = []
        self.triangles: List[Tuple[int, int, int]] = []
        self.boundary: List[Tuple[Tuple[int, int], str]] = []

    def vertex(self, key: Tuple[int, int]) -> int:
        idx = self.index.get(key)
        if idx is None:
            idx = len(self.coords)
            self.index[key] = idx
            # one shared formula so interface/mirror/refinement vertices
            # reproduce bit-identical floats
            self.coords.append((self.period * key[0] / self.n, self.period * key[1] / self.n))
        return idx

    def add_triangle(self, a, b, c) -> None:
        self.triangles.append((self.vertex(a), self.vertex(b), self.vertex(c)))

    def add_quad(self, a, b, c, d) -> None:
        # split along the (a, c) diagonal; both children CCW for CCW quads
        self.add_triangle(a, b, c)
        self.add_triangle(a, c, d)

    def add_boundary(self, a, b, tag: str, also_mirrored: bool = False) -> None:
        self.boundary.append(((self.vertex(a), self.vertex(b)), tag))
        if also_mirrored:
            am = (a[0], -a[1])
            bm = (b[0], -b[1])
            self.boundary.append(((self.vertex(am), self.vertex(bm)), tag))

    def mirror_lower_half(self) -> None:
        """Reflect every triangle across q = 0, flipping orientation."""
        rev = {idx: key for key, idx in self.index.items()}
        for a, b, c in list(self.triangles):
            ma, mb, mc = [(rev[i][0], -rev[i][1]) for i in (a, b, c)]
            self.add_triangle(ma, mc, mb)

    def finish(self, level: int, spec: DomainSpec) -> Mesh:
        mesh = Mesh(
            vertices=np.array(self.coords, dtype=float),
            triangles=np.array(self.triangles, dtype=np.int64),
            boundary_edges=self.boundary,
            level=level,
            spec=spec,
        )
        mesh.validate()
        return mesh


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into 4 by edge midpoints; boundary tags inherit.

    Parent vertices keep their indices (and exact coordinates), so nesting
    holds by construction.
    """
    verts: List[Tuple[float, float]] = [tuple(p) for p in mesh.vertices]
    midpoint: Dict[Tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        idx = midpoint.get(key)
        if idx is None:
            pa, pb = mesh.vertices[key[0]], mesh.vertices[key[1]]
            idx = len(verts)
            verts.append(((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0))
            midpoint[key] = idx
        return idx

    tris: List[Tuple[int, int, int]] = []
    for a, b, c in mesh.triangles:
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, mab, mca), (mab, b, mbc), (mca, mbc, c), (mab, mbc, mca)])

    boundary: List[Tuple[Tuple[int, int], str]] = []
    for (a, b), tag in mesh.boundary_edges:
        m_ab = mid(a, b)
        boundary.append(((a, m_ab), tag))
        boundary.append(((m_ab, b), tag))

    out = Mesh(
        vertices=np.array(verts, dtype=float),
        triangles=np.array(tris, dtype=np.int64),
        boundary_edges=boundary,
        level=2 * mesh.level,
        spec=mesh.spec,
    )
    out.validate()
    return out


# ---------------------------------------------------------------------------
# coordinate maps between the physical guide and the model frames
# ---------------------------------------------------------------------------

def map_triangle_coords(u: float, v: float) -> Tuple[float, float]:
    """Corner-region map (u, v) -> (u, t) with t = v*period/(u + period)."""
    if u <= -MODEL_PERIOD:
        raise ValueError(f"triangle map degenerates at u = -pi*sqrt(2); got u = {u}")
    return u, v * MODEL_PERIOD / (u + MODEL_PERIOD)


def map_triangle_coords_inverse(u: float, t: float) -> Tuple[float, float]:
    if u <= -MODEL_PERIOD:
        raise ValueError(f"triangle map degenerates at u = -pi*sqrt(2); got u = {u}")
    return u, t * (u + MODEL_PERIOD) / MODEL_PERIOD


def map_strip_coords(u: float, v: float) -> Tuple[float, float]:
    """Straight-part shear map (u, v) -> (u, tau) with tau = v - u."""
    return u, v - u


def map_strip_coords_inverse(u: float, tau: float) -> Tuple[float, float]:
    return u, tau + u


# ---------------------------------------------------------------------------
# plain-text mesh format
# ---------------------------------------------------------------------------

def save_mesh(mesh: Mesh, path: str) -> None:
    """Write `nv nt ne` header, vertex, triangle and tagged-edge lines."""
    lines = [f"{mesh.num_vertices} {mesh.num_triangles} {len(mesh.boundary_edges)}"]
    for u, v in mesh.vertices:
        lines.append(f"{u:.17g} {v:.17g}")
    for a, b, c in mesh.triangles:
        lines.append(f"{a} {b} {c}")
    for (a, b), tag in mesh.boundary_edges:
        lines.append(f"{a} {b} {TAG_CODES[tag]}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_mesh(path: str) -> Mesh:
    with open(path) as handle:
        tokens = handle.read().split("\n")
    nv, nt, ne = (int(w) for w in tokens[0].split())
    verts = [tuple(float(w) for w in tokens[1 + i].split()) for i in range(nv)]
    tris = [tuple(int(w) for w in tokens[1 + nv + i].split()) for i in range(nt)]
    edges = []
    for i in range(ne):
        a, b, code = tokens[1 + nv + nt + i].split()
        edges.append(((int(a), int(b)), CODE_TAGS[code]))
    mesh = Mesh(np.array(verts), np.array(tris), edges, level=0, spec=None)
    mesh.validate()
    return mesh
