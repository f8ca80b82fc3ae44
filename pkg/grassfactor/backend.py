"""Structured spectral decompositions with the accuracy contracts the rest
of the package relies on: real Schur form of orthogonal matrices, unitary
eigendecomposition and the SVD."""

import logging
from typing import Literal

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from grassfactor.config import settings
from grassfactor.errors import (
    BadDimensions,
    ConvergenceFailure,
    NotOrthogonal,
    NotStructured,
    NotUnitary,
)

logger = logging.getLogger(__name__)


# ─── Types ───────────────────────────────────────────────────────────────────

class SchurBlock(BaseModel):
    """A 2×2 rotation block (angle θ, block angle 2θ) or a 1×1 sign."""

    kind: Literal["rotation", "sign"]
    value: float = Field(description="θ in (0, π/2] for rotations, ±1 for signs")

    @property
    def size(self) -> int:
        return 2 if self.kind == "rotation" else 1


class SchurForm(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    q: np.ndarray = Field(description="Orthogonal change of basis")
    blocks: list[SchurBlock]

    @property
    def angles(self) -> list[float]:
        return [b.value for b in self.blocks if b.kind == "rotation"]

    @property
    def signs(self) -> list[int]:
        return [int(b.value) for b in self.blocks if b.kind == "sign"]

    def matrix(self) -> np.ndarray:
        """Reassemble Q·diag(blocks)·Qᵀ."""
        return self.q @ block_matrix(self.blocks) @ self.q.T


class UnitaryEig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    q: np.ndarray = Field(description="Unitary eigenvector matrix")
    phases: np.ndarray = Field(description="Eigenphases in (−π, π], sorted descending")

    def matrix(self) -> np.ndarray:
        return (self.q * np.exp(1j * self.phases)) @ self.q.conj().T


# ─── Helpers ─────────────────────────────────────────────────────────────────

def as_matrix(a, square: bool = True) -> np.ndarray:
    """Coerce to a finite 2-D array, real when there is no imaginary part."""
    m = np.asarray(a)
    if m.ndim != 2:
        raise BadDimensions(f"expected a matrix, got an array of shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise BadDimensions(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotStructured("matrix has NaN or Inf entries")
    if np.iscomplexobj(m):
        return m.astype(complex)
    return m.astype(float)


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def rotation(phi: float) -> np.ndarray:
    """The block [[cos φ, sin φ], [−sin φ, cos φ]]."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def block_matrix(blocks: list[SchurBlock]) -> np.ndarray:
    parts = [rotation(2.0 * b.value) if b.kind == "rotation" else np.array([[b.value]])
             for b in blocks]
    if not parts:
        return np.zeros((0, 0))
    return scipy.linalg.block_diag(*parts)


def unitarity_residual(u: np.ndarray) -> float:
    return frob(u.conj().T @ u - np.eye(u.shape[0]))


def polar_project(u: np.ndarray) -> np.ndarray:
    """Nearest orthogonal / unitary matrix (unitary polar factor)."""
    if u.shape[0] == 0:
        return u
    p, _ = scipy.linalg.polar(u)
    return p


# ─── Operations ──────────────────────────────────────────────────────────────

def schur_orthogonal(q, tol: float | None = None) -> SchurForm:
    """Real Schur form of an orthogonal matrix.

    Returns:
        SchurForm whose rotation blocks read [[cos 2θ, sin 2θ], [−sin 2θ, cos 2θ]]
        with θ ∈ (0, π/2] and whose 1×1 blocks are ±1.
    """
    tol = settings.TOL if tol is None else tol
    q = as_matrix(q)
    if np.iscomplexobj(q):
        if frob(q.imag) > tol * max(q.shape[0], 1):
            raise NotOrthogonal("schur_orthogonal needs a real matrix")
        q = q.real
    n = q.shape[0]
    residual = unitarity_residual(q)
    if residual > tol * max(n, 1):
        raise NotOrthogonal(f"‖QᵀQ − I‖ = {residual:.3e} exceeds {tol * n:.3e}", residual=residual)

    qp = polar_project(q)
    if frob(qp - np.eye(n)) <= tol:
        return SchurForm(q=np.eye(n), blocks=[SchurBlock(kind="sign", value=1.0)] * n)

    try:
        t, z = scipy.linalg.schur(qp, output="real")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"real Schur iteration failed: {e}") from e

    blocks: list[SchurBlock] = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            a, b, c, d = t[i, i], t[i, i + 1], t[i + 1, i], t[i + 1, i + 1]
            phi = np.arctan2((b - c) / 2.0, (a + d) / 2.0)
            if phi < 0:
                z[:, i + 1] = -z[:, i + 1]
                phi = -phi
            blocks.append(SchurBlock(kind="rotation", value=float(phi / 2.0)))
            i += 2
        else:
            blocks.append(SchurBlock(kind="sign", value=1.0 if t[i, i] > 0 else -1.0))
            i += 1

    form = SchurForm(q=z, blocks=blocks)
    recon = frob(form.matrix() - q)
    if recon > 10 * tol * max(n, 1):
        raise ConvergenceFailure(f"Schur reconstruction residual {recon:.3e} too large")
    logger.debug("schur_orthogonal: n=%d, %d rotation blocks", n, len(form.angles))
    return form


def eig_unitary(u, tol: float | None = None) -> UnitaryEig:
    """Eigendecomposition U = Q·diag(e^{iγ})·Qᴴ with phases sorted descending."""
    tol = settings.TOL if tol is None else tol
    u = as_matrix(u).astype(complex)
    n = u.shape[0]
    residual = unitarity_residual(u)
    if residual > tol * max(n, 1):
        raise NotUnitary(f"‖UᴴU − I‖ = {residual:.3e} exceeds {tol * n:.3e}", residual=residual)

    up = polar_project(u)
    if frob(up - np.diag(np.diag(up))) <= tol:
        phases = np.angle(np.diag(up))
        z = np.eye(n, dtype=complex)
    else:
        try:
            t, z = scipy.linalg.schur(up, output="complex")
        except (np.linalg.LinAlgError, ValueError) as e:
            raise ConvergenceFailure(f"complex Schur iteration failed: {e}") from e
        phases = np.angle(np.diag(t))

    phases = np.where(phases <= -np.pi, np.pi, phases)
    order = np.argsort(-phases, kind="stable")
    eig = UnitaryEig(q=z[:, order], phases=phases[order])

    recon = frob(eig.matrix() - u)
    if recon > 10 * tol * max(n, 1):
        raise ConvergenceFailure(f"unitary eigendecomposition residual {recon:.3e} too large")
    return eig


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD returning (U, σ, V) with A = U·diag(σ)·Vᴴ."""
    a = as_matrix(a, square=False)
    if 0 in a.shape:
        k = min(a.shape)
        return np.eye(a.shape[0], k), np.zeros(k), np.eye(a.shape[1], k)
    try:
        u, s, vh = scipy.linalg.svd(a, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"SVD did not converge: {e}") from e
    return u, s, vh.conj().T


def cluster_values(values: np.ndarray, tol: float | None = None) -> list[list[int]]:
    """Group indices of (complex) values whose mutual distance is within tol.

    Single-linkage over the values in the given order; the clustering
    tolerance is the one multiplicity detection uses everywhere.
    """
    tol = settings.CLUSTER_TOL if tol is None else tol
    clusters: list[list[int]] = []
    for i, v in enumerate(values):
        for cluster in clusters:
            if any(abs(v - values[j]) <= tol for j in cluster):
                cluster.append(i)
                break
        else:
            clusters.append([i])
    return clusters
