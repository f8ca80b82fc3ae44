"""Involution models of the real and complex Grassmannians.

A point of Gr(k, Fⁿ) is stored as the involution X = 2VVᴴ − I of its
k-dimensional subspace span(V): X is symmetric (Hermitian), X² = I and
tr X = 2k − n.
"""

import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from grassfactor.backend import as_matrix, frob
from grassfactor.config import settings
from grassfactor.errors import BadDimensions, InvalidPoint, NotOrthonormal

logger = logging.getLogger(__name__)

FieldName = Literal["real", "complex"]


# ─── Types ───────────────────────────────────────────────────────────────────

class GrassPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: FieldName
    n: int = Field(description="Ambient dimension")
    k: int = Field(description="Subspace dimension, 0 ≤ k ≤ n")
    m: np.ndarray = Field(description="The n×n involution matrix")

    def __neg__(self) -> "GrassPoint":
        return GrassPoint(field=self.field, n=self.n, k=self.n - self.k, m=-self.m)


class SubspaceBasis(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: FieldName
    n: int
    k: int
    v: np.ndarray = Field(description="n×k matrix with orthonormal columns")


class ValidationReport(BaseModel):
    """Residuals of a candidate involution; accepted iff all are within tol·n."""

    accepted: bool
    k: int
    involution_residual: float
    symmetry_residual: float
    trace_residual: float
    threshold: float


# ─── Helpers ─────────────────────────────────────────────────────────────────

def field_of(m: np.ndarray) -> FieldName:
    return "complex" if np.iscomplexobj(m) else "real"


def _dtype(field: FieldName):
    return complex if field == "complex" else float


def _check_dims(k: int, n: int) -> None:
    if n < 0 or not 0 <= k <= n:
        raise BadDimensions(f"need 0 ≤ k ≤ n, got k={k}, n={n}")


def haar_unitary(field: FieldName, n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal / unitary matrix.

    QR of an i.i.d. Gaussian matrix, with the columns rescaled by the
    phases of diag(R) so the distribution is exactly Haar.
    """
    if field == "complex":
        g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    else:
        g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    phases = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return q * phases


def haar_special(field: FieldName, n: int, rng: np.random.Generator, det: int = 1) -> np.ndarray:
    """Haar sample from SO(n) / SU(n), or the det = −1 coset when det = −1."""
    q = haar_unitary(field, n, rng)
    if field == "real":
        if np.sign(np.linalg.det(q)) != det:
            q[:, 0] = -q[:, 0]
        return q
    target = 1.0 if det == 1 else -1.0 + 0j
    return q * (target / np.linalg.det(q)) ** (1.0 / n)


def group_sample(group: str, n: int, seed: int | None = None) -> np.ndarray:
    """Haar sample from so, so-, su or su-."""
    if n < 1:
        raise BadDimensions(f"need n ≥ 1, got {n}")
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    field: FieldName = "real" if group.startswith("so") else "complex"
    return haar_special(field, n, rng, det=-1 if group.endswith("-") else 1)


# ─── Operations ──────────────────────────────────────────────────────────────

def gr_canonical(field: FieldName, k: int, n: int) -> GrassPoint:
    """The base point diag(I_k, −I_{n−k})."""
    _check_dims(k, n)
    m = np.diag(np.concatenate([np.ones(k), -np.ones(n - k)])).astype(_dtype(field))
    return GrassPoint(field=field, n=n, k=k, m=m)


def gr_from_basis(b: SubspaceBasis, tol: float | None = None) -> GrassPoint:
    tol = settings.TOL if tol is None else tol
    v = np.asarray(b.v, dtype=_dtype(b.field)).reshape(b.n, b.k)
    gram_residual = frob(v.conj().T @ v - np.eye(b.k))
    if gram_residual > tol * max(b.n, 1):
        raise NotOrthonormal(f"‖VᴴV − I‖ = {gram_residual:.3e}", residual=gram_residual)
    m = 2.0 * (v @ v.conj().T) - np.eye(b.n)
    return GrassPoint(field=b.field, n=b.n, k=b.k, m=m)


def gr_basis_of(x: GrassPoint, tol: float | None = None) -> SubspaceBasis:
    """Orthonormal basis of the +1 eigenspace of x."""
    tol = settings.TOL if tol is None else tol
    report = gr_validate(x.m, x.k, tol)
    if not report.accepted:
        raise InvalidPoint(f"not a point of Gr({x.k}, {x.n}): {report}")
    herm = (x.m + x.m.conj().T) / 2.0
    _, vecs = np.linalg.eigh(herm)
    # eigh sorts ascending, so the +1 eigenvectors are the last k columns
    v = vecs[:, x.n - x.k:]
    if x.field == "real":
        v = v.real
    return SubspaceBasis(field=x.field, n=x.n, k=x.k, v=v)


def gr_sample(field: FieldName, k: int, n: int, seed: int | None = None) -> GrassPoint:
    """Q·diag(I_k, −I_{n−k})·Qᴴ with Haar Q, deterministic given seed."""
    _check_dims(k, n)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    if k in (0, n):
        return gr_canonical(field, k, n)
    q = haar_unitary(field, n, rng)
    base = gr_canonical(field, k, n).m
    m = q @ base @ q.conj().T
    m = (m + m.conj().T) / 2.0
    return GrassPoint(field=field, n=n, k=k, m=m)


def gr_validate(m, k: int, tol: float | None = None) -> ValidationReport:
    tol = settings.TOL if tol is None else tol
    m = as_matrix(m)
    n = m.shape[0]
    threshold = tol * max(n, 1)
    invo = frob(m @ m - np.eye(n))
    sym = frob(m - m.conj().T)
    trace_res = float(abs(np.trace(m) - (2 * k - n)))
    accepted = 0 <= k <= n and invo <= threshold and sym <= threshold and trace_res <= threshold
    return ValidationReport(
        accepted=bool(accepted),
        k=k,
        involution_residual=invo,
        symmetry_residual=sym,
        trace_residual=trace_res,
        threshold=threshold,
    )


def infer_k(m, tol: float | None = None) -> int:
    """Half-rank read off the trace, tr m = 2k − n.

    Half-integer traces are ambiguous and rejected instead of rounded.
    """
    tol = settings.TOL if tol is None else tol
    m = as_matrix(m)
    n = m.shape[0]
    k_real = (np.trace(m).real + n) / 2.0
    k = int(np.rint(k_real))
    if abs(k_real - k) >= 0.5 - tol or not 0 <= k <= n:
        raise InvalidPoint(f"trace {np.trace(m).real:.6g} does not determine k")
    return k


def as_grass_point(m, k: int | None = None, tol: float | None = None) -> GrassPoint:
    """Wrap a raw involution as a validated GrassPoint."""
    m = as_matrix(m)
    k = infer_k(m, tol) if k is None else k
    report = gr_validate(m, k, tol)
    if not report.accepted:
        raise InvalidPoint(f"not a point of Gr({k}, {m.shape[0]})", report=report)
    return GrassPoint(field=field_of(m), n=m.shape[0], k=k, m=m)
