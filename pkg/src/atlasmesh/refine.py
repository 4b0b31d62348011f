"""Longest-edge bisection pre-refinement.

Splits never move existing vertices: every new vertex is the exact
midpoint of a surface edge, so the geometry (and total area) is
unchanged and the refined patch still lies on the input triangulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MeshError
from .patch import Patch


@dataclass
class RefineReport:
    rounds: int
    splits: int
    max_interior_edge: float
    converged: bool


def _edge_map(tris):
    em: dict[tuple[int, int], list[int]] = {}
    for t, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            em.setdefault(key, []).append(t)
    return em


def default_threshold(patch: Patch):
    """Mean boundary-edge length; falls back to mean edge length if closed."""
    if patch.loops:
        lens = []
        for loop in patch.loops:
            pts = patch.tri.vertices[np.asarray(loop)]
            lens.append(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1))
        return float(np.concatenate(lens).mean())
    em = _edge_map([tuple(int(v) for v in t) for t in patch.tri.triangles])
    v = patch.tri.vertices
    return float(np.mean([np.linalg.norm(v[a] - v[b]) for a, b in em]))


def longest_edge_bisection(
    patch: Patch,
    length_threshold=None,
    max_rounds=10,
    split_boundary=True,
    protected_edges=None,
):
    """Split long edges, longest first, until interior edges fit the threshold.

    Each round tags the currently long edges, sorts them by length
    descending and splits them in that order; both triangles adjacent to
    a split edge are bisected so no hanging nodes appear.  Edges listed
    in `protected_edges` (local sorted vertex pairs, e.g. curves shared
    with an already meshed neighbour) are never split.

    Returns (refined Patch, RefineReport).
    """
    if length_threshold is None:
        length_threshold = default_threshold(patch)
    if length_threshold <= 0.0:
        raise MeshError("refinement threshold must be positive")
    protected = set(protected_edges or ())

    verts = [tuple(v) for v in patch.tri.vertices]
    tris = [tuple(int(v) for v in t) for t in patch.tri.triangles]
    em = _edge_map(tris)
    gverts = list(int(g) for g in patch.global_vertices)

    def length(edge):
        a, b = edge
        pa, pb = verts[a], verts[b]
        return float(np.sqrt((pa[0] - pb[0]) ** 2 + (pa[1] - pb[1]) ** 2
                             + (pa[2] - pb[2]) ** 2))

    def splittable(edge):
        if edge in protected:
            return False
        if not split_boundary and len(em[edge]) == 1:
            return False
        return True

    def split(edge):
        a, b = edge
        pa, pb = verts[a], verts[b]
        mid = ((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0)
        m = len(verts)
        verts.append(mid)
        gverts.append(-1)
        adj = list(em.pop(edge))
        for t in adj:
            ta, tb, tc = tris[t]
            # orient so the split edge is (x, y)
            for u, v, w in ((ta, tb, tc), (tb, tc, ta), (tc, ta, tb)):
                if {u, v} == {a, b}:
                    x, y, z = u, v, w
                    break
            for e2 in ((y, z), (z, x)):
                key = (e2[0], e2[1]) if e2[0] < e2[1] else (e2[1], e2[0])
                em[key].remove(t)
            t1 = (x, m, z)
            t2 = (m, y, z)
            tris[t] = t1
            tid2 = len(tris)
            tris.append(t2)
            for tid, tt in ((t, t1), (tid2, t2)):
                for u, v in ((tt[0], tt[1]), (tt[1], tt[2]), (tt[2], tt[0])):
                    key = (u, v) if u < v else (v, u)
                    em.setdefault(key, []).append(tid)
            # de-duplicate: edge (m, z) got added by both halves of this
            # triangle exactly once each, which is correct; nothing to fix.

    n_splits = 0
    rounds = 0
    converged = False
    for rounds in range(1, max_rounds + 1):
        tagged = [e for e in em if splittable(e) and length(e) > length_threshold]
        if not tagged:
            rounds -= 1
            converged = True
            break
        tagged.sort(key=lambda e: (-length(e), e))
        for e in tagged:
            if e in em:
                split(e)
                n_splits += 1
    else:
        converged = not any(
            splittable(e) and length(e) > length_threshold for e in em
        )

    interior = [e for e in em if len(em[e]) == 2]
    max_int = max((length(e) for e in interior), default=0.0)
    refined = Patch.from_local(
        np.asarray(verts), np.asarray(tris, dtype=np.int64),
        np.asarray(gverts, dtype=np.int64),
    )
    return refined, RefineReport(
        rounds=rounds, splits=n_splits, max_interior_edge=max_int,
        converged=converged,
    )
