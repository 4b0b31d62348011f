"""Mapping analysis: per-triangle Jacobians, singular values, metric tensor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MeshError


def triangle_jacobian(tri3d, tri_uv):
    """Constant Jacobian (3x2) of the affine map from a UV triangle to 3D.

    Solves d_xyz = J d_uv from the two edge vectors of each triangle.
    """
    p = np.asarray(tri3d, dtype=np.float64)
    q = np.asarray(tri_uv, dtype=np.float64)
    E = np.column_stack([p[1] - p[0], p[2] - p[0]])  # 3x2
    D = np.column_stack([q[1] - q[0], q[2] - q[0]])  # 2x2
    det = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
    if det == 0.0:
        raise MeshError("degenerate UV triangle")
    Dinv = np.array([[D[1, 1], -D[0, 1]], [-D[1, 0], D[0, 0]]]) / det
    return E @ Dinv


def singular_values(J):
    """(s1, s2) with s1 >= s2 >= 0 from the 2x2 Gram matrix of J.

    Closed-form symmetric eigen-solve via trace and determinant; a rank
    deficient J yields s2 == 0.
    """
    G = np.asarray(J, dtype=np.float64).T @ np.asarray(J, dtype=np.float64)
    tr = G[0, 0] + G[1, 1]
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    disc = max(tr * tr / 4.0 - det, 0.0)
    root = np.sqrt(disc)
    e1 = tr / 2.0 + root
    e2 = max(tr / 2.0 - root, 0.0)
    return float(np.sqrt(e1)), float(np.sqrt(e2))


def metric_tensor(J, h):
    """M = J^T J / h^2: unit length under M is 3D length h."""
    if h <= 0.0:
        raise MeshError("target size must be positive")
    J = np.asarray(J, dtype=np.float64)
    M = J.T @ J / (h * h)
    if M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] <= 0.0:
        raise MeshError("rank-deficient Jacobian")
    return M


@dataclass
class QualityReport:
    sigma1: np.ndarray
    sigma2: np.ndarray

    @property
    def conformity(self):
        s1 = np.where(self.sigma1 > 0.0, self.sigma1, 1.0)
        return self.sigma2 / s1

    def summary(self):
        c = self.conformity
        hist, edges = np.histogram(c, bins=10, range=(0.0, 1.0))
        return {
            "min_conformity": float(c.min()) if len(c) else 1.0,
            "max_conformity": float(c.max()) if len(c) else 1.0,
            "mean_conformity": float(c.mean()) if len(c) else 1.0,
            "histogram": hist.tolist(),
            "bin_edges": edges.tolist(),
        }


def patch_quality(patch, param) -> QualityReport:
    """Singular values of every parametric triangle of a patch."""
    s1 = np.empty(patch.tri.n_triangles)
    s2 = np.empty(patch.tri.n_triangles)
    for t, (a, b, c) in enumerate(patch.tri.triangles):
        J = triangle_jacobian(
            patch.tri.vertices[[a, b, c]], param.uv[[a, b, c]]
        )
        s1[t], s2[t] = singular_values(J)
    return QualityReport(sigma1=s1, sigma2=s2)
