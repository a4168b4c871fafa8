"""Dimensionality reduction for the scatter view: PCA and the rotating
Grand Tour projection.

PCA eigen-decomposes the mean-centered covariance with cyclic Jacobi
sweeps (the matrices here are at most 128x128, where Jacobi is simple
and plenty fast). The Grand Tour evolves an orthonormal d x 2 basis by
composing planar Givens rotations on consecutive axis pairs with
incommensurate angular velocities, re-orthonormalizing after every step
so drift never accumulates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .pixels import PixelDataset


def jacobi_eigh(matrix: np.ndarray, max_sweeps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues, eigenvectors) sorted descending; eigenvectors
    are the columns.
    """
    a = np.array(matrix, dtype=np.float64)
    d = a.shape[0]
    if a.shape != (d, d) or not np.allclose(a, a.T, atol=1e-10 * max(1.0, np.abs(a).max())):
        raise ParameterError("jacobi_eigh needs a symmetric square matrix")
    v = np.eye(d)
    if d == 1:
        return a.diagonal().copy(), v
    scale = max(np.abs(a).max(), 1e-300)
    tol = 1e-14 * scale
    for _ in range(max_sweeps):
        off = np.sqrt(max((a**2).sum() - (a.diagonal() ** 2).sum(), 0.0))
        if off <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= tol / (d * d):
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    eigvals = a.diagonal().copy()
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], v[:, order]


@dataclass(frozen=True)
class PcaResult:
    basis: np.ndarray  # (d, components), orthonormal columns
    explained_variance: np.ndarray  # (components,), descending
    explained_ratio: np.ndarray  # fraction of total variance per component


def pca(dataset_or_points, components: int = 2) -> PcaResult:
    """Principal axes of the mean-centered point cloud."""
    points = (
        dataset_or_points.points
        if isinstance(dataset_or_points, PixelDataset)
        else np.asarray(dataset_or_points)
    )
    pts = np.asarray(points, dtype=np.float64)
    n, d = pts.shape
    if n < 2:
        raise ParameterError(f"pca needs at least 2 points, got {n}")
    if not 1 <= components <= d:
        raise ParameterError(f"components must be in [1, {d}], got {components}")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = jacobi_eigh(cov)
    eigvals = np.maximum(eigvals, 0.0)  # clamp round-off on a PSD matrix
    total = eigvals.sum()
    ratio = eigvals / total if total > 0 else np.zeros_like(eigvals)
    return PcaResult(
        basis=eigvecs[:, :components],
        explained_variance=eigvals[:components],
        explained_ratio=ratio[:components],
    )


def tour_velocities(d: int) -> np.ndarray:
    """Angular velocity of the rotation in plane (i, i+1): 1/(i+2).
    Pairwise distinct and incommensurate enough that the tour keeps
    visiting new orientations."""
    return 1.0 / (np.arange(d - 1) + 2.0)


@dataclass(frozen=True)
class ProjectionState:
    """Orthonormal d x 2 basis evolving under the rotation plan."""

    d: int
    basis: np.ndarray  # (d, 2) float64, write-protected

    def __post_init__(self) -> None:
        self.basis.setflags(write=False)
        if self.d < 2:
            raise ParameterError(f"projection needs d >= 2, got {self.d}")
        if self.basis.shape != (self.d, 2):
            raise ParameterError(
                f"basis shape {self.basis.shape} does not match d={self.d}"
            )

    @staticmethod
    def initial(d: int) -> "ProjectionState":
        basis = np.zeros((d, 2), dtype=np.float64)
        basis[0, 0] = 1.0
        basis[1, 1] = 1.0
        return ProjectionState(d=d, basis=basis)

    def orthonormality_error(self) -> float:
        gram = self.basis.T @ self.basis
        return float(np.abs(gram - np.eye(2)).max())


def _gram_schmidt_2col(basis: np.ndarray) -> np.ndarray:
    b = basis.copy()
    b[:, 0] /= np.linalg.norm(b[:, 0])
    b[:, 1] -= (b[:, 0] @ b[:, 1]) * b[:, 0]
    b[:, 1] /= np.linalg.norm(b[:, 1])
    return b


def grand_tour_step(state: ProjectionState, dt: float) -> ProjectionState:
    """Advance the basis by one tick: Givens rotations on planes
    (0,1), (1,2), ... with angles velocity*dt, then modified
    Gram-Schmidt. dt = 0 returns an identical basis."""
    if not np.isfinite(dt):
        raise ParameterError(f"dt must be finite, got {dt}")
    b = state.basis.copy()
    if dt != 0.0:
        for i, omega in enumerate(tour_velocities(state.d)):
            theta = omega * dt
            c, s = np.cos(theta), np.sin(theta)
            top = c * b[i, :] - s * b[i + 1, :]
            bot = s * b[i, :] + c * b[i + 1, :]
            b[i, :], b[i + 1, :] = top, bot
        b = _gram_schmidt_2col(b)
    return ProjectionState(d=state.d, basis=b)


def project(state: ProjectionState, dataset_or_points) -> np.ndarray:
    """Project points onto the current 2-d basis: (n, 2) float64.
    Orthonormal columns make this a contraction of pairwise distances."""
    points = (
        dataset_or_points.points
        if isinstance(dataset_or_points, PixelDataset)
        else np.asarray(dataset_or_points)
    )
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != state.d:
        raise ParameterError(
            f"points of shape {pts.shape} do not match projection d={state.d}"
        )
    return pts @ state.basis
