"""Feature edge detection and patch segmentation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Adjacency, MeshError, Triangulation


@dataclass
class FeatureEdgeSet:
    """Edges tagged as model features, with their dihedral angles."""

    edges: set = field(default_factory=set)  # sorted vertex pairs
    angles: dict = field(default_factory=dict)  # edge -> degrees
    threshold_deg: float = 40.0

    def __contains__(self, edge):
        return edge in self.edges


@dataclass
class PatchSet:
    """A partition of the triangle set into feature-bounded patches."""

    patch_of_triangle: np.ndarray
    n_patches: int

    def triangles_of(self, pid):
        return np.nonzero(self.patch_of_triangle == pid)[0]


def detect_feature_edges(
    tri: Triangulation, adj: Adjacency, threshold_deg: float = 40.0
) -> FeatureEdgeSet:
    """Tag interior edges whose adjacent normals exceed the angle threshold.

    All boundary edges are tagged unconditionally.  The angle is the
    unsigned angle between the two unit face normals, so convex and
    concave creases are treated identically.
    """
    # 180 disables interior detection: no dihedral can exceed it
    if not (0.0 < threshold_deg <= 180.0):
        raise MeshError("feature angle threshold must lie in (0, 180] degrees")
    normals = tri.triangle_normals()
    out = FeatureEdgeSet(threshold_deg=threshold_deg)
    for edge, ts in adj.edge_tris.items():
        if len(ts) == 1:
            out.edges.add(edge)
            out.angles[edge] = 0.0
            continue
        if len(ts) != 2:
            raise MeshError("non-manifold edge in feature detection")
        d = float(np.clip(np.dot(normals[ts[0]], normals[ts[1]]), -1.0, 1.0))
        ang = float(np.degrees(np.arccos(d)))
        if ang > threshold_deg:
            out.edges.add(edge)
            out.angles[edge] = ang
    return out


def segment_patches(
    tri: Triangulation, adj: Adjacency, features: FeatureEdgeSet
) -> PatchSet:
    """Flood-fill triangles into maximal patches not crossing feature edges."""
    pid = np.full(tri.n_triangles, -1, dtype=np.int64)
    n = 0
    for seed in range(tri.n_triangles):
        if pid[seed] >= 0:
            continue
        stack = [seed]
        pid[seed] = n
        while stack:
            t = stack.pop()
            a, b, c = (int(v) for v in tri.triangles[t])
            for u, v in ((a, b), (b, c), (c, a)):
                edge = (u, v) if u < v else (v, u)
                if edge in features.edges:
                    continue
                o = adj.other_triangle(edge, t)
                if o is not None and pid[o] < 0:
                    pid[o] = n
                    stack.append(o)
        n += 1
    return PatchSet(patch_of_triangle=pid, n_patches=n)
