"""Editable planar triangulation: flips, splits, collapses, CDT.

Supports the parametric-plane remesher: a Delaunay triangulation of the
boundary samples whose constraint edges are recovered by flipping, then
locally modified (split / collapse / flip / smooth) under a metric.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .mesh import MeshError


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_cross(p, q, a, b):
    """Strict proper crossing of open segments pq and ab."""
    d1 = _orient(p, q, a)
    d2 = _orient(p, q, b)
    d3 = _orient(a, b, p)
    d4 = _orient(a, b, q)
    return (d1 * d2 < 0.0) and (d3 * d4 < 0.0)


def point_on_segment(p, a, b, tol):
    if abs(_orient(a, b, p)) > tol:
        return False
    lo = np.minimum(a, b) - tol
    hi = np.maximum(a, b) + tol
    return bool(np.all(p >= lo) and np.all(p <= hi))


def winding_number(point, loops):
    """Total winding of `loops` (lists of 2D points) around `point`."""
    wn = 0
    x, y = point
    for loop in loops:
        n = len(loop)
        for i in range(n):
            ax, ay = loop[i]
            bx, by = loop[(i + 1) % n]
            if ay <= y:
                if by > y and _orient((ax, ay), (bx, by), (x, y)) > 0.0:
                    wn += 1
            elif by <= y and _orient((ax, ay), (bx, by), (x, y)) < 0.0:
                wn -= 1
    return wn


class PlanarMesh:
    """Mutable 2D triangulation with positively oriented triangles.

    Deleted triangles are tombstoned with None; `compact()` returns clean
    arrays.  Constrained edges (domain boundary) are never flipped,
    split, or collapsed by the editing helpers.
    """

    def __init__(self, points, triangles):
        self.points = [np.asarray(p, dtype=np.float64) for p in points]
        self.tris: list = []
        self.e2t: dict[tuple[int, int], list[int]] = {}
        self.v2t: dict[int, set[int]] = {i: set() for i in range(len(self.points))}
        self.constrained: set[tuple[int, int]] = set()
        for t in triangles:
            self._add_tri(tuple(int(v) for v in t))

    # -- bookkeeping --------------------------------------------------------

    @staticmethod
    def _ekey(a, b):
        return (a, b) if a < b else (b, a)

    def _add_tri(self, tri):
        tid = len(self.tris)
        self.tris.append(tri)
        for k in range(3):
            key = self._ekey(tri[k], tri[(k + 1) % 3])
            self.e2t.setdefault(key, []).append(tid)
            self.v2t.setdefault(tri[k], set()).add(tid)
        return tid

    def _remove_tri(self, tid):
        tri = self.tris[tid]
        for k in range(3):
            key = self._ekey(tri[k], tri[(k + 1) % 3])
            self.e2t[key].remove(tid)
            if not self.e2t[key]:
                del self.e2t[key]
            self.v2t[tri[k]].discard(tid)
        self.tris[tid] = None

    def add_point(self, p):
        vid = len(self.points)
        self.points.append(np.asarray(p, dtype=np.float64))
        self.v2t[vid] = set()
        return vid

    def area(self, tid):
        a, b, c = (self.points[v] for v in self.tris[tid])
        return 0.5 * _orient(a, b, c)

    def edges(self):
        return list(self.e2t)

    def opposite_vertices(self, edge):
        out = []
        for tid in self.e2t[edge]:
            out.append(next(v for v in self.tris[tid] if v not in edge))
        return out

    def is_boundary_vertex(self, v):
        return any(
            v in e and e in self.constrained for e in self._vertex_edges(v)
        )

    def _vertex_edges(self, v):
        seen = set()
        for tid in self.v2t[v]:
            tri = self.tris[tid]
            for w in tri:
                if w != v:
                    seen.add(self._ekey(v, w))
        return seen

    # -- local operations ---------------------------------------------------

    def flip(self, edge, check=True):
        """Replace edge (a,b) of quad acbd by (c,d).  False if invalid."""
        if edge in self.constrained:
            return False
        tids = self.e2t.get(edge)
        if tids is None or len(tids) != 2:
            return False
        a, b = edge
        t0, t1 = tids
        c = next(v for v in self.tris[t0] if v not in edge)
        d = next(v for v in self.tris[t1] if v not in edge)
        if c == d:
            return False
        # t0 must wind a->b; ensure consistent naming
        tri0 = self.tris[t0]
        if (tri0[0], tri0[1], tri0[2]) in (
            (b, a, c), (a, c, b), (c, b, a)
        ):
            a, b = b, a
        new0 = (a, d, c)
        new1 = (d, b, c)
        if check:
            pa, pb, pc, pd = (self.points[v] for v in (a, b, c, d))
            if _orient(pa, pd, pc) <= 0.0 or _orient(pd, pb, pc) <= 0.0:
                return False
        self._remove_tri(t0)
        self._remove_tri(t1)
        self._add_tri(new0)
        self._add_tri(new1)
        return True

    def split_edge(self, edge, point=None):
        """Insert a vertex on an edge, bisecting its adjacent triangles."""
        tids = list(self.e2t.get(edge, ()))
        if not tids:
            return None
        a, b = edge
        if point is None:
            point = 0.5 * (self.points[a] + self.points[b])
        m = self.add_point(point)
        was_constrained = edge in self.constrained
        for tid in tids:
            tri = self.tris[tid]
            # rotate so the split edge is (x, y) in winding order
            for k in range(3):
                x, y, z = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
                if {x, y} == {a, b}:
                    break
            self._remove_tri(tid)
            self._add_tri((x, m, z))
            self._add_tri((m, y, z))
        if was_constrained:
            self.constrained.discard(edge)
            self.constrained.add(self._ekey(a, m))
            self.constrained.add(self._ekey(m, b))
        return m

    def collapse(self, edge):
        """Merge vertex a of (a,b) into b; a must be interior.  False if invalid."""
        a, b = edge
        if self.is_boundary_vertex(a):
            if self.is_boundary_vertex(b):
                return False
            a, b = b, a
        if self.is_boundary_vertex(a):
            return False
        ring = list(self.v2t[a])
        pb = self.points[b]
        for tid in ring:
            tri = self.tris[tid]
            if b in tri:
                continue
            pts = [pb if v == a else self.points[v] for v in tri]
            if _orient(*pts) <= 0.0:
                return False
        for tid in ring:
            tri = self.tris[tid]
            self._remove_tri(tid)
            if b in tri:
                continue
            self._add_tri(tuple(b if v == a else v for v in tri))
        return True

    def move_vertex(self, v, point):
        """Relocate an interior vertex if all incident triangles stay positive."""
        old = self.points[v]
        self.points[v] = np.asarray(point, dtype=np.float64)
        for tid in self.v2t[v]:
            if self.area(tid) <= 0.0:
                self.points[v] = old
                return False
        return True

    def compact(self):
        """(points (n,2), triangles (m,3)) without tombstones or orphans."""
        live = [t for t in self.tris if t is not None]
        used = sorted({v for t in live for v in t})
        remap = {v: i for i, v in enumerate(used)}
        pts = np.asarray([self.points[v] for v in used])
        tris = np.asarray([[remap[v] for v in t] for t in live], dtype=np.int64)
        return pts, tris, used


def constrained_triangulation(points, constraint_edges, tol=1e-12):
    """Delaunay triangulation honouring the given edges.

    Missing constraints are recovered by flipping crossing edges.  A
    vertex lying exactly on a constraint splits it in two sub-constraints
    (the polyline geometry is unchanged).  Returns a PlanarMesh with the
    recovered edges marked constrained.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 3:
        raise MeshError("need at least 3 boundary points")
    dt = Delaunay(pts)
    if len(dt.coplanar):
        raise MeshError("degenerate boundary points dropped by Delaunay")
    tris = dt.simplices.astype(np.int64)
    p = pts[tris]
    a2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - \
         (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tris[a2 < 0.0] = tris[a2 < 0.0][:, [0, 2, 1]]
    mesh = PlanarMesh(pts, tris)
    scale = float(np.abs(pts).max()) or 1.0
    eps = tol * scale

    queue = [tuple(sorted((int(a), int(b)))) for a, b in constraint_edges]
    guard = 0
    while queue:
        guard += 1
        if guard > 100000:
            raise MeshError("constraint recovery did not terminate")
        a, b = queue.pop(0)
        key = mesh._ekey(a, b)
        if key in mesh.e2t:
            mesh.constrained.add(key)
            continue
        pa, pb = mesh.points[a], mesh.points[b]
        # a vertex sitting on the constraint splits it
        on_seg = [
            v for v in range(len(mesh.points))
            if v not in (a, b) and mesh.v2t[v]
            and point_on_segment(mesh.points[v], pa, pb, eps)
        ]
        if on_seg:
            v = min(on_seg, key=lambda v: float(np.linalg.norm(mesh.points[v] - pa)))
            queue.insert(0, mesh._ekey(v, b))
            queue.insert(0, mesh._ekey(a, v))
            continue
        crossing = sorted(
            e for e in mesh.edges()
            if a not in e and b not in e
            and segments_cross(pa, pb, mesh.points[e[0]], mesh.points[e[1]])
        )
        progress = False
        for e in crossing:
            if e in mesh.constrained:
                raise MeshError("constraints cross each other")
            if mesh.flip(e):
                progress = True
                break
        if not progress:
            raise MeshError(f"cannot recover constraint edge {(a, b)}")
        queue.insert(0, key)
    return mesh


def clip_to_loops(mesh: PlanarMesh, loops_xy):
    """Delete triangles whose centroid is outside the union of loops."""
    for tid, tri in enumerate(mesh.tris):
        if tri is None:
            continue
        cen = (
            mesh.points[tri[0]] + mesh.points[tri[1]] + mesh.points[tri[2]]
        ) / 3.0
        if winding_number(cen, loops_xy) == 0:
            mesh._remove_tri(tid)
