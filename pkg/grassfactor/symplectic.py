"""Symplectic Grassmannians Gr_Sp(2k, F^{2n}) as symplectic involutions.

X ∈ Sp(2n, F) with X² = I and tr X = 4k − 2n, where Sp(2n, F) preserves
the bilinear form ω(u, v) = uᵀJv, J = [[0, I], [−I, 0]] (plain transpose
in both fields).
"""

import logging

import numpy as np
import scipy.linalg
import scipy.optimize
from pydantic import BaseModel, ConfigDict, Field

from grassfactor.backend import as_matrix, cluster_values, frob
from grassfactor.config import settings
from grassfactor.decompose import Factorization, product_of
from grassfactor.errors import (
    BadDimensions,
    ConvergenceFailure,
    InvalidPoint,
    NonGeneric,
    NotDiagonalSymplectic,
    NotSymplectic,
    Unsupported,
)
from grassfactor.grassmann import FieldName, GrassPoint, gr_validate

logger = logging.getLogger(__name__)

K2 = np.array([[0.0, 1.0], [1.0, 0.0]])
SKEW2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


# ─── Types ───────────────────────────────────────────────────────────────────

class SpGrassPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: FieldName
    n: int = Field(description="Half-dimension; m is 2n×2n")
    k: int = Field(description="Half-rank, 0 ≤ k ≤ n")
    m: np.ndarray

    def __neg__(self) -> "SpGrassPoint":
        return SpGrassPoint(field=self.field, n=self.n, k=self.n - self.k, m=-self.m)


class SymplecticMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: FieldName
    n: int
    m: np.ndarray


class SpValidationReport(BaseModel):
    accepted: bool
    k: int
    involution_residual: float
    symplectic_residual: float
    trace_residual: float
    threshold: float


# ─── Helpers ─────────────────────────────────────────────────────────────────

def J(n: int) -> np.ndarray:
    """The standard symplectic form J_{2n}."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def omega(u: np.ndarray, v: np.ndarray) -> complex:
    n = u.shape[0] // 2
    return u @ J(n) @ v


def symplectic_residual(m: np.ndarray) -> float:
    n = m.shape[0] // 2
    return frob(m.T @ J(n) @ m - J(n))


def sp_inverse(m: np.ndarray) -> np.ndarray:
    """M⁻¹ = −J·Mᵀ·J for symplectic M."""
    j = J(m.shape[0] // 2)
    return -j @ m.T @ j


def iota(g: np.ndarray) -> np.ndarray:
    """GL(n) → Sp(2n): g ↦ diag(g, g⁻ᵀ)."""
    return scipy.linalg.block_diag(g, np.linalg.inv(g).T)


def _half_dim(m: np.ndarray) -> int:
    if m.shape[0] % 2:
        raise BadDimensions(f"symplectic matrices are even-dimensional, got {m.shape}")
    return m.shape[0] // 2


def as_symplectic(x, field: FieldName | None = None, tol: float | None = None) -> SymplecticMatrix:
    """Wrap and check a raw matrix (or pass a SymplecticMatrix through)."""
    tol = settings.TOL if tol is None else tol
    if isinstance(x, SymplecticMatrix):
        m, field = x.m, field or x.field
    else:
        m = as_matrix(x)
        field = field or ("complex" if np.iscomplexobj(m) else "real")
    n = _half_dim(m)
    residual = symplectic_residual(m)
    if residual > tol * max(n, 1):
        raise NotSymplectic(f"‖MᵀJM − J‖ = {residual:.3e} exceeds {tol * n:.3e}", residual=residual)
    return SymplecticMatrix(field=field, n=n, m=m)


def symplectic_gram_schmidt(w: np.ndarray, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Symplectic basis (E, F) of the symplectic subspace spanned by w.

    ω(e_i, f_j) = δ_ij and ω vanishes on E×E and F×F.
    """
    tol = settings.GENERIC_TOL if tol is None else tol
    vecs = [w[:, i].copy() for i in range(w.shape[1])]
    if len(vecs) % 2:
        raise InvalidPoint("a symplectic subspace has even dimension")
    es, fs = [], []
    while vecs:
        gram = np.array([[omega(a, b) for b in vecs] for a in vecs])
        i, j = np.unravel_index(np.argmax(np.abs(gram)), gram.shape)
        if abs(gram[i, j]) <= tol:
            raise InvalidPoint("subspace is not symplectic")
        e = vecs[i] / np.linalg.norm(vecs[i])
        f = vecs[j] / omega(e, vecs[j])
        vecs = [v for idx, v in enumerate(vecs) if idx not in (i, j)]
        vecs = [v - omega(v, f) * e + omega(v, e) * f for v in vecs]
        es.append(e)
        fs.append(f)
    n = w.shape[0]
    return (np.column_stack(es) if es else np.zeros((n, 0)),
            np.column_stack(fs) if fs else np.zeros((n, 0)))


# ─── Model ───────────────────────────────────────────────────────────────────

def spgr_canonical(field: FieldName, k: int, n: int) -> SpGrassPoint:
    """diag(I_{k,n−k}, I_{k,n−k})."""
    if n < 0 or not 0 <= k <= n:
        raise BadDimensions(f"need 0 ≤ k ≤ n, got k={k}, n={n}")
    half = np.concatenate([np.ones(k), -np.ones(n - k)])
    m = np.diag(np.concatenate([half, half])).astype(complex if field == "complex" else float)
    return SpGrassPoint(field=field, n=n, k=k, m=m)


def spgr_from_conjugation(q, k: int, tol: float | None = None) -> SpGrassPoint:
    """q·diag(I_{k,n−k}, I_{k,n−k})·q⁻¹."""
    sq = as_symplectic(q, tol=tol)
    base = spgr_canonical(sq.field, k, sq.n).m
    m = sq.m @ base @ sp_inverse(sq.m)
    return SpGrassPoint(field=sq.field, n=sq.n, k=k, m=m)


def spgr_validate(m, k: int, tol: float | None = None) -> SpValidationReport:
    tol = settings.TOL if tol is None else tol
    m = as_matrix(m)
    n = _half_dim(m)
    threshold = tol * max(n, 1)
    invo = frob(m @ m - np.eye(2 * n))
    symp = symplectic_residual(m)
    trace_res = float(abs(np.trace(m) - (4 * k - 2 * n)))
    accepted = 0 <= k <= n and invo <= threshold and symp <= threshold and trace_res <= threshold
    return SpValidationReport(
        accepted=bool(accepted),
        k=k,
        involution_residual=invo,
        symplectic_residual=symp,
        trace_residual=trace_res,
        threshold=threshold,
    )


def as_spgrass_point(m, k: int | None = None, tol: float | None = None) -> SpGrassPoint:
    m = as_matrix(m)
    n = _half_dim(m)
    if k is None:
        k = int(np.rint((np.trace(m).real + 2 * n) / 4.0))
    report = spgr_validate(m, k, tol)
    if not report.accepted:
        raise InvalidPoint(f"not a point of Gr_Sp({2 * k}, {2 * n})", report=report)
    return SpGrassPoint(field="complex" if np.iscomplexobj(m) else "real", n=n, k=k, m=m)


def sp_from_hamiltonian(s) -> SymplecticMatrix:
    """exp(J·S) for symmetric S."""
    s = as_matrix(s)
    n = _half_dim(s)
    s = (s + s.T) / 2.0
    m = scipy.linalg.expm(J(n) @ s)
    return SymplecticMatrix(field="complex" if np.iscomplexobj(s) else "real", n=n, m=m)


def sp_sample(field: FieldName, n: int, seed: int | None = None, scale: float = 0.5) -> SymplecticMatrix:
    """exp(J·S) for a random symmetric S, deterministic given seed."""
    if n < 1:
        raise BadDimensions(f"need n ≥ 1, got {n}")
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    a = rng.standard_normal((2 * n, 2 * n))
    if field == "complex":
        a = a + 1j * rng.standard_normal((2 * n, 2 * n))
    s = scale * (a + a.T) / (2.0 * np.sqrt(2 * n))
    return sp_from_hamiltonian(s)


# ─── Identifications ─────────────────────────────────────────────────────────

def symplectic_subspace(x: SpGrassPoint, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (2n×2k) of the +1 eigenspace V_X."""
    tol = settings.TOL if tol is None else tol
    report = spgr_validate(x.m, x.k, tol)
    if not report.accepted:
        raise InvalidPoint(f"not a point of Gr_Sp({2 * x.k}, {2 * x.n})", report=report)
    if x.k == 0:
        return np.zeros((2 * x.n, 0), dtype=x.m.dtype)
    u, _, _ = scipy.linalg.svd((np.eye(2 * x.n) + x.m) / 2.0)
    return u[:, : 2 * x.k]


def symplectic_basis_completion(x: SpGrassPoint, tol: float | None = None) -> SymplecticMatrix:
    """Symplectic q with q·diag(I_{k,n−k}, I_{k,n−k})·q⁻¹ = x."""
    v_plus = symplectic_subspace(x, tol)
    minus = SpGrassPoint(field=x.field, n=x.n, k=x.n - x.k, m=-x.m)
    v_minus = symplectic_subspace(minus, tol)
    e1, f1 = symplectic_gram_schmidt(v_plus)
    e2, f2 = symplectic_gram_schmidt(v_minus)
    q = np.column_stack([e1, e2, f1, f2])
    return SymplecticMatrix(field=x.field, n=x.n, m=q)


def psi1(u: GrassPoint) -> SpGrassPoint:
    """Realification A + iB ↦ [[A, B], [−B, A]]."""
    if not gr_validate(u.m, u.k).accepted:
        raise InvalidPoint(f"not a point of Gr({u.k}, {u.n})")
    a, b = np.real(u.m), np.imag(u.m)
    m = np.block([[a, b], [-b, a]])
    return SpGrassPoint(field="real", n=u.n, k=u.k, m=m)


def psi2(x: SpGrassPoint, tol: float | None = None) -> GrassPoint:
    """2·V_X·V_Xᴴ − I for an orthonormal basis V_X of the +1 eigenspace."""
    v = symplectic_subspace(x, tol)
    m = 2.0 * (v @ v.conj().T) - np.eye(2 * x.n)
    if x.field == "real":
        m = m.real
    return GrassPoint(field=x.field, n=2 * x.n, k=2 * x.k, m=(m + m.conj().T) / 2.0)


# ─── Diagonal reduction ──────────────────────────────────────────────────────

def block_supports(n: int) -> list[list[int]]:
    """Coordinate pairs (0,1), (2,3), …; the last block takes three when n is odd."""
    if n < 2:
        raise BadDimensions(f"block reduction needs n ≥ 2, got {n}")
    blocks = [[2 * j, 2 * j + 1] for j in range(n // 2)]
    if n % 2:
        blocks[-1].append(n - 1)
    return blocks


def diag_block_split(d, tol: float | None = None) -> list[SymplecticMatrix]:
    """diag(D, D⁻¹) as a product of commuting diag(D_j, D_j⁻¹)."""
    tol = settings.TOL if tol is None else tol
    m = d.m if isinstance(d, SymplecticMatrix) else as_matrix(d)
    n = _half_dim(m)
    diag = np.diag(m)
    if frob(m - np.diag(diag)) > tol * max(n, 1) or np.any(diag == 0):
        raise NotDiagonalSymplectic("matrix is not diagonal and invertible")
    big_d = diag[:n]
    if np.max(np.abs(big_d * diag[n:] - 1.0)) > tol * max(n, 1):
        raise NotDiagonalSymplectic("lower diagonal block is not D⁻¹")
    field = "complex" if np.iscomplexobj(m) else "real"
    factors = []
    for support in block_supports(n):
        dj = np.ones(n, dtype=big_d.dtype)
        dj[support] = big_d[support]
        factors.append(SymplecticMatrix(field=field, n=n, m=np.diag(np.concatenate([dj, 1.0 / dj]))))
    return factors


def symplectic_eigenbasis(x: np.ndarray, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Symplectic S and D with x = S·diag(D, D⁻¹)·S⁻¹.

    D takes the eigenvalue of each reciprocal pair with |d| > 1, or
    Im d > 0 on the unit circle; eigenvalues ±1 come from a symplectic
    Gram–Schmidt of their eigenspaces. Raises NonGeneric when x is not
    diagonalizable.
    """
    tol = settings.GENERIC_TOL if tol is None else tol
    n = _half_dim(x)
    vals = scipy.linalg.eigvals(x)
    real_input = not np.iscomplexobj(x) and np.max(np.abs(vals.imag)) <= tol
    scale = max(1.0, float(np.max(np.abs(vals))))
    clusters = cluster_values(vals, tol * scale)
    centers = [complex(np.mean(vals[c])) for c in clusters]

    def eigenspace(mu: complex, size: int) -> np.ndarray:
        shift = x - (mu.real if real_input else mu) * np.eye(2 * n)
        _, _, vh = scipy.linalg.svd(shift)
        return vh[-size:].conj().T

    def upper(mu: complex) -> bool:
        if abs(abs(mu) - 1.0) > tol:
            return abs(mu) > 1.0
        return mu.imag > 0

    e_cols, f_cols, d_vals = [], [], []
    used = set()
    for ci, (c, mu) in enumerate(zip(clusters, centers)):
        if ci in used:
            continue
        if abs(mu - 1.0) <= tol or abs(mu + 1.0) <= tol:
            sign = 1.0 if mu.real > 0 else -1.0
            e, f = symplectic_gram_schmidt(eigenspace(complex(sign), len(c)))
            e_cols.append(e)
            f_cols.append(f)
            d_vals += [sign] * e.shape[1]
            used.add(ci)
            continue
        partner = min((j for j in range(len(clusters)) if j != ci and j not in used),
                      key=lambda j: abs(centers[j] - 1.0 / mu), default=None)
        if partner is None or abs(centers[partner] - 1.0 / mu) > tol * scale \
                or len(clusters[partner]) != len(c):
            raise NonGeneric("spectrum is not closed under d ↦ 1/d")
        used |= {ci, partner}
        if not upper(mu):
            ci, partner = partner, ci
            mu = centers[ci]
        v = eigenspace(mu, len(clusters[ci]))
        w = eigenspace(centers[partner], len(clusters[partner]))
        gram = v.T @ J(n) @ w
        if np.linalg.cond(gram) > 1.0 / tol:
            raise NonGeneric("eigenspaces are not in symplectic duality")
        e_cols.append(v)
        f_cols.append(w @ np.linalg.inv(gram))
        d_vals += [mu] * v.shape[1]

    s = np.column_stack(e_cols + f_cols)
    d = np.asarray(d_vals)
    if real_input:
        s, d = s.real, d.real
    if s.shape != (2 * n, 2 * n):
        raise NonGeneric("matrix is not diagonalizable")
    if symplectic_residual(s) > tol * max(n, 1):
        raise NonGeneric("eigenbasis is not symplectic")
    recon = frob(s @ iota(np.diag(d)) @ sp_inverse(s) - x)
    if recon > tol * max(frob(x), 1.0):
        raise NonGeneric(f"matrix is not symplectically diagonalizable (residual {recon:.3e})")
    return s, d


# ─── Two involutions ─────────────────────────────────────────────────────────

def _swap_involution() -> np.ndarray:
    """[[0, N], [N⁻¹, 0]] on (e₁, e₂, f₁, f₂) with N skew; conjugates ι(bI) to its inverse."""
    y = np.zeros((4, 4))
    y[:2, 2:] = SKEW2
    y[2:, :2] = np.linalg.inv(SKEW2)
    return y


def _embed(local: np.ndarray, support: list[int], n: int, out: np.ndarray) -> None:
    m = len(support)
    idx = support + [n + i for i in support]
    out[np.ix_(idx, idx)] = local.reshape(2 * m, 2 * m)


def _search_involution(x: np.ndarray, k: int, rng: np.random.Generator, tries: int) -> np.ndarray | None:
    """Least-squares search for Y = G·E₀·G⁻¹ with Y·x·Y = x⁻¹, G = exp(J·S)."""
    n = _half_dim(x)
    e0 = spgr_canonical("real", k, n).m
    x_inv = sp_inverse(x)
    iu = np.triu_indices(2 * n)
    complex_field = np.iscomplexobj(x)

    def build(params: np.ndarray) -> np.ndarray:
        count = len(iu[0])
        vals = params[:count] + (1j * params[count:] if complex_field else 0.0)
        s = np.zeros((2 * n, 2 * n), dtype=vals.dtype)
        s[iu] = vals
        s = s + s.T - np.diag(np.diag(s))
        g = scipy.linalg.expm(J(n) @ s)
        return g @ e0 @ sp_inverse(g)

    def residual(params: np.ndarray) -> np.ndarray:
        y = build(params)
        r = (y @ x @ y - x_inv).ravel()
        return np.concatenate([r.real, r.imag]) if complex_field else r

    size = len(iu[0]) * (2 if complex_field else 1)
    for _ in range(tries):
        start = 0.5 * rng.standard_normal(size)
        sol = scipy.optimize.least_squares(residual, start, method="trf", max_nfev=50 * size)
        if np.linalg.norm(sol.fun) <= 1e-10:
            return build(sol.x)
    return None


def sp_two_involutions_base(x, tol: float | None = None, seed: int | None = None) -> tuple[SpGrassPoint, SpGrassPoint, int]:
    """x = sign·y₁·y₂ with y₁, y₂ ∈ Gr_Sp(2⌊n/2⌋, F^{2n}) for n ∈ {2, 3}.

    Diagonalizable inputs split exactly when their spectrum is doubled
    (d, d, 1/d, 1/d), plus an eigenvalue pair at ±1 when n = 3; other
    inputs fall back to a bounded least-squares search.
    """
    tol = settings.TOL if tol is None else tol
    sx = as_symplectic(x, tol=max(tol, settings.TOL))
    m, n = sx.m, sx.n
    if n not in (2, 3):
        raise BadDimensions(f"base case needs n ∈ {{2, 3}}, got {n}")
    if frob(m @ m - np.eye(2 * n)) <= settings.GENERIC_TOL:
        raise NonGeneric("x² = I admits no generic two-involution split")
    k = n // 2
    y2 = None
    try:
        s, d = symplectic_eigenbasis(m)
        y2 = _doubled_split(s, d, n)
    except NonGeneric as e:
        logger.debug("constructive split unavailable: %s", e)
    if y2 is None:
        rng = np.random.default_rng(settings.SEED if seed is None else seed)
        y2 = _search_involution(m, k, rng, min(4, settings.SP_RETRIES))
    if y2 is None:
        raise NonGeneric("no pair of symplectic involutions reproduces x")

    y1 = m @ y2
    sign = 1
    if abs(np.trace(y1) - (4 * k - 2 * n)) > 0.5:
        y1, sign = -y1, -1
    if sx.field == "real":
        if max(frob(y1.imag), frob(y2.imag)) > tol * n:
            raise Unsupported("real input with non-real spectrum has no real split here")
        y1, y2 = y1.real, y2.real
    for y in (y1, y2):
        report = spgr_validate(y, k, max(tol, settings.SP_TOL))
        if not report.accepted:
            raise NonGeneric("two-involution split failed validation", report=report)
    return (SpGrassPoint(field=sx.field, n=n, k=k, m=y1),
            SpGrassPoint(field=sx.field, n=n, k=k, m=y2), sign)


def _doubled_split(s: np.ndarray, d: np.ndarray, n: int) -> np.ndarray | None:
    """y₂ = S·Y·S⁻¹ swapping a repeated eigenvalue pair, or None."""
    gtol = settings.GENERIC_TOL
    for i in range(n):
        for j in range(i + 1, n):
            rest = [l for l in range(n) if l not in (i, j)]
            if abs(d[i] - d[j]) > gtol * max(1.0, abs(d[i])):
                continue
            if any(abs(abs(d[l]) - 1.0) > gtol or abs(d[l].imag) > gtol for l in rest):
                continue
            local = np.zeros((2 * n, 2 * n), dtype=s.dtype)
            _embed(_swap_involution(), [i, j], n, local)
            for l in rest:
                local[l, l] = local[n + l, n + l] = -1.0
            return s @ local @ np.linalg.inv(s)
    return None


# ─── Four factors ────────────────────────────────────────────────────────────

def _pair_factors(d1: complex, d2: complex) -> list[np.ndarray]:
    """Four involutions on (e₁, e₂, f₁, f₂) with product diag(d₁, d₂, 1/d₁, 1/d₂)."""
    b = np.sqrt(complex(d1 * d2))
    a = d1 / b
    swap = _swap_involution().astype(complex)
    g1 = np.array([[0.0, a], [1.0 / a, 0.0]])
    return [iota(g1), iota(K2.astype(complex)), iota(b * np.eye(2)) @ swap, swap]


def _triple_factors(d: np.ndarray, x_free: complex) -> list[np.ndarray]:
    """Four involutions on (e₁, e₂, e₃, f₁, f₂, f₃) with product ι(diag(d)).

    diag(d) is conjugate to M·K with M = diag(x, 1/x, −1) and
    K = y·I + u·vᵀ of eigenvalues (y, y, 1); M splits as two swap
    involutions and K as two ι-conjugates of the pair swap. The first
    factor carries half-rank two on this block, the others one.
    """
    gtol = settings.GENERIC_TOL
    y = -np.sqrt(complex(-np.prod(d)))
    mvec = np.array([x_free, 1.0 / x_free, -1.0], dtype=complex)
    delta = y * mvec
    if min(abs(delta[i] - delta[j]) for i, j in ((0, 1), (0, 2), (1, 2))) <= gtol:
        raise NonGeneric("shifted spectrum is degenerate")
    c = np.array([
        -np.prod(delta[i] - d) / np.prod([delta[i] - delta[j] for j in range(3) if j != i])
        for i in range(3)
    ])
    w = np.sqrt(c)
    v = np.divide(c, w, out=np.zeros_like(c), where=np.abs(w) > 0)
    w_prime = np.diag(delta) + np.outer(w, v)

    vals, g = scipy.linalg.eig(w_prime)
    order = [int(np.argmin(np.abs(vals - di))) for di in d]
    if len(set(order)) != 3 or np.max(np.abs(vals[order] - d)) > gtol * max(1.0, np.max(np.abs(d))):
        raise NonGeneric("rank-one update missed the target spectrum")
    g = g[:, order]

    u = w / mvec
    null = scipy.linalg.null_space(v[None, :])
    if null.shape[1] != 2:
        raise NonGeneric("rank-one part of K is degenerate")
    v_k = np.column_stack([null, u])

    tau = -1.0
    g1 = np.diag(mvec) @ scipy.linalg.block_diag(K2, [[tau]])
    f1 = iota(g1)
    f2 = iota(scipy.linalg.block_diag(K2, [[tau]]).astype(complex))
    y_b = np.zeros((6, 6), dtype=complex)
    _embed(_swap_involution(), [0, 1], 3, y_b)
    y_b[2, 2] = y_b[5, 5] = tau
    kd = np.diag([y, y, 1.0])
    lift = iota(v_k)
    lift_inv = np.linalg.inv(lift)
    f3 = lift @ iota(kd) @ y_b @ lift_inv
    f4 = lift @ y_b @ lift_inv

    to_d = iota(g)
    from_d = np.linalg.inv(to_d)
    return [from_d @ f @ to_d for f in (f1, f2, f3, f4)]


def _is_generic(m: np.ndarray) -> bool:
    gtol = settings.GENERIC_TOL
    vals = scipy.linalg.eigvals(m)
    gaps = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(gaps, np.inf)
    return bool(np.min(gaps) > gtol and np.min(np.abs(vals - 1.0)) > gtol
                and np.min(np.abs(vals + 1.0)) > gtol)


def decompose_sp_four(x, tol: float | None = None, seed: int | None = None) -> Factorization:
    """x ∈ Sp(2n, ℂ) as a product of four symplectic involutions.

    Half-ranks are ⌊n/2⌋ throughout for even n and (k+1, k, k, k) with
    k = ⌊n/2⌋ for odd n. Even n needs x symplectically diagonalizable;
    odd n also needs distinct eigenvalues away from ±1.
    """
    tol = settings.SP_TOL if tol is None else tol
    sx = as_symplectic(x, tol=max(tol, settings.TOL))
    if sx.field == "real":
        raise Unsupported("four-factor construction is only available over the complex field")
    m, n = sx.m.astype(complex), sx.n
    k = n // 2

    if frob(m - np.eye(2 * n)) <= tol:
        base = spgr_canonical("complex", k, n)
        factors = [base.model_copy() for _ in range(4)]
        return _finish_sp(m, factors, tol)
    if n < 2:
        raise Unsupported("four-factor construction needs n ≥ 2")
    # pair blocks take any eigenvalues; triple blocks need distinct ones away from ±1
    if n % 2 and not _is_generic(m):
        raise NonGeneric("x needs distinct eigenvalues away from ±1")

    s, d = symplectic_eigenbasis(m)
    s_inv = np.linalg.inv(s)
    supports = block_supports(n)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    attempts = settings.SP_RETRIES if n % 2 else 1
    ks = [k + 1, k, k, k] if n % 2 else [k, k, k, k]
    last_error = "no attempt made"

    for attempt in range(attempts):
        x_free = 2.0 if attempt == 0 else rng.uniform(1.5, 3.0) * np.exp(2j * np.pi * rng.uniform())
        try:
            locals_ = [np.zeros((2 * n, 2 * n), dtype=complex) for _ in range(4)]
            for support in supports:
                blocks = _pair_factors(*d[support]) if len(support) == 2 \
                    else _triple_factors(d[support], x_free)
                for out, blk in zip(locals_, blocks):
                    _embed(blk, support, n, out)
            factors = [SpGrassPoint(field="complex", n=n, k=kk, m=s @ f @ s_inv)
                       for f, kk in zip(locals_, ks)]
            return _finish_sp(m, factors, tol)
        except (NonGeneric, ConvergenceFailure, np.linalg.LinAlgError) as e:
            last_error = str(e)
            logger.debug("sp four-factor attempt %d failed: %s", attempt, e)
    raise NonGeneric(f"four-factor construction failed after {attempts} attempts: {last_error}")


def _finish_sp(target: np.ndarray, factors: list[SpGrassPoint], tol: float) -> Factorization:
    n = target.shape[0] // 2
    for i, f in enumerate(factors):
        report = spgr_validate(f.m, f.k, tol)
        if not report.accepted:
            raise ConvergenceFailure(f"symplectic factor {i} failed validation", report=report)
    residual = frob(product_of(factors) - target)
    if residual > tol * max(n, 1):
        raise ConvergenceFailure(f"sp residual {residual:.3e} exceeds {tol * n:.3e}")
    logger.info("sp: n=%d, half-ranks=%s, residual=%.3e", n, [f.k for f in factors], residual)
    return Factorization(group="sp", target=target, factors=factors, residual=residual)
