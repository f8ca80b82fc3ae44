"""Constructive factorizations of special orthogonal and special unitary
matrices into products of Grassmannian involutions."""

import itertools
import logging
from typing import Any

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from grassfactor.backend import as_matrix, cluster_values, eig_unitary, frob, schur_orthogonal, unitarity_residual
from grassfactor.config import settings
from grassfactor.errors import (
    BadDimensions,
    BadSignature,
    ConvergenceFailure,
    DeterminantMismatch,
    GrassfactorError,
    NoSolutionFound,
    NotAntiSpecial,
    NotAntiSpecialUnitary,
    NotSpecialOrthogonal,
    NotSpecialUnitary,
    NotStructured,
    Unsupported,
)
from grassfactor.grassmann import GrassPoint, gr_validate
from grassfactor.phi import PhiSignature, is_normalized, split_phi2

logger = logging.getLogger(__name__)

K2 = np.array([[0.0, 1.0], [1.0, 0.0]])


# ─── Types ───────────────────────────────────────────────────────────────────

class Factorization(BaseModel):
    """target = sign · factors[0] ⋯ factors[-1].

    Factors are GrassPoint for the orthogonal / unitary groups and
    SpGrassPoint for the symplectic group.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    group: str
    target: np.ndarray
    factors: list[Any]
    residual: float = Field(description="‖sign·∏factors − target‖_F")
    sign: int = 1

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(f.k for f in self.factors)

    def product(self) -> np.ndarray:
        return self.sign * product_of(self.factors)


def product_of(factors: list) -> np.ndarray:
    out = np.eye(factors[0].m.shape[0], dtype=complex if any(np.iscomplexobj(f.m) for f in factors) else float)
    for f in factors:
        out = out @ f.m
    return out


def _finish(group: str, target: np.ndarray, factors: list[GrassPoint], tol: float) -> Factorization:
    """Validate factors and residual, then package the result."""
    n = target.shape[0]
    for i, f in enumerate(factors):
        report = gr_validate(f.m, f.k, tol)
        if not report.accepted:
            raise ConvergenceFailure(f"factor {i} of {group} failed validation", report=report)
    residual = frob(product_of(factors) - target)
    if residual > tol * max(n, 1):
        raise ConvergenceFailure(f"{group} residual {residual:.3e} exceeds {tol * n:.3e}")
    logger.info("%s: n=%d, half-ranks=%s, residual=%.3e", group, n, [f.k for f in factors], residual)
    return Factorization(group=group, target=target, factors=factors, residual=residual)


def _conjugate(q: np.ndarray, d: np.ndarray, field: str, k: int) -> GrassPoint:
    m = q @ d @ q.conj().T
    m = (m + m.conj().T) / 2.0
    if field == "real":
        m = m.real
    return GrassPoint(field=field, n=m.shape[0], k=k, m=m)


def _det_is(z: np.ndarray, value: float, tol: float) -> bool:
    return abs(np.linalg.det(z) - value) <= max(tol * z.shape[0], 1e-8)


def _real_orthogonal(z, tol: float, error: type[GrassfactorError]) -> np.ndarray:
    z = as_matrix(z)
    n = z.shape[0]
    if np.iscomplexobj(z):
        if frob(z.imag) > tol * max(n, 1):
            raise error("expected a real matrix")
        z = z.real
    if unitarity_residual(z) > tol * max(n, 1):
        raise error("matrix is not orthogonal")
    return z


def _unitary(z, tol: float, error: type[GrassfactorError]) -> np.ndarray:
    z = as_matrix(z).astype(complex)
    if unitarity_residual(z) > tol * max(z.shape[0], 1):
        raise error("matrix is not unitary")
    return z


# ─── Orthogonal group ────────────────────────────────────────────────────────

def _half_angle_blocks(theta: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [-s, -c]]), np.array([[c, s], [s, -c]])


def _orthogonal_pair(z: np.ndarray, tol: float, group: str) -> Factorization:
    n = z.shape[0]
    form = schur_orthogonal(z, tol)
    rot_cols, plus, minus, thetas = [], [], [], []
    col = 0
    for block in form.blocks:
        if block.kind == "rotation":
            rot_cols += [col, col + 1]
            thetas.append(block.value)
            col += 2
        else:
            (plus if block.value > 0 else minus).append(col)
            col += 1

    # −1 pairs become θ = π/2 blocks, +1 pairs θ = 0 blocks
    order = list(rot_cols)
    while len(minus) >= 2:
        order += [minus.pop(0), minus.pop(0)]
        thetas.append(np.pi / 2.0)
    while len(plus) >= 2:
        order += [plus.pop(0), plus.pop(0)]
        thetas.append(0.0)
    s_blocks, t_blocks = zip(*[_half_angle_blocks(t) for t in thetas]) if thetas else ((), ())
    s_blocks, t_blocks = list(s_blocks), list(t_blocks)
    if plus:
        order += plus
        s_blocks.append(np.array([[-1.0]]))
        t_blocks.append(np.array([[-1.0]]))
    elif minus:
        order += minus
        s_blocks.append(np.array([[1.0]]))
        t_blocks.append(np.array([[-1.0]]))

    q = form.q[:, order]
    s_mat = scipy.linalg.block_diag(*s_blocks)
    t_mat = scipy.linalg.block_diag(*t_blocks)
    k = n // 2
    k1 = k + 1 if minus else k
    return _finish(group, z, [_conjugate(q, s_mat, "real", k1), _conjugate(q, t_mat, "real", k)], tol)


def decompose_so(z, tol: float | None = None) -> Factorization:
    """Z ∈ SO(n) as X₁X₂ with X₁, X₂ ∈ Gr(⌊n/2⌋, ℝⁿ)."""
    tol = settings.TOL if tol is None else tol
    z = _real_orthogonal(z, tol, NotSpecialOrthogonal)
    if not _det_is(z, 1.0, tol):
        raise NotSpecialOrthogonal(f"det = {np.linalg.det(z):.6g}, expected +1")
    return _orthogonal_pair(z, tol, "so")


def decompose_so_minus(z, tol: float | None = None) -> Factorization:
    """Z ∈ O(n) with det −1 and n odd as X₁X₂, X₁ ∈ Gr(⌈n/2⌉), X₂ ∈ Gr(⌊n/2⌋)."""
    tol = settings.TOL if tol is None else tol
    z = _real_orthogonal(z, tol, NotAntiSpecial)
    if not _det_is(z, -1.0, tol):
        raise NotAntiSpecial(f"det = {np.linalg.det(z):.6g}, expected −1")
    if z.shape[0] % 2 == 0:
        raise Unsupported("det −1 two-factor decomposition is only constructed for odd n")
    return _orthogonal_pair(z, tol, "so-")


# ─── Unitary group ───────────────────────────────────────────────────────────

def _phase_swap(phi: float) -> np.ndarray:
    return np.array([[0.0, np.exp(-1j * phi)], [np.exp(1j * phi), 0.0]])


def _zero_sum_phases(z: np.ndarray, tol: float, delta: float):
    """Eigenphases sorted descending with γ_n reset so Σγ = δ exactly."""
    eig = eig_unitary(z, tol)
    gamma = eig.phases.copy()
    gamma[-1] = delta - gamma[:-1].sum()
    return eig.q, gamma


def _unitary_four(z: np.ndarray, tol: float, anti: bool, group: str) -> Factorization:
    n = z.shape[0]
    q, gamma = _zero_sum_phases(z, tol, np.pi if anti else 0.0)
    m = n // 2
    alpha = [gamma[: 2 * j - 1].sum() for j in range(1, m + 1)]
    beta = [gamma[: 2 * j].sum() for j in range(1, m + 1)]
    minus_one = np.array([[-1.0]])
    plus_one = np.array([[1.0]])

    if n % 2 == 0:
        x1 = [K2] * m
        x2 = [_phase_swap(a) for a in alpha]
        x3 = [minus_one] + [K2] * (m - 1) + [plus_one]
        x4 = [minus_one] + [_phase_swap(b) for b in beta[: m - 1]] + [minus_one if anti else plus_one]
    else:
        x1 = [K2] * m + [plus_one if anti else minus_one]
        x2 = [_phase_swap(a) for a in alpha] + [minus_one]
        x3 = [minus_one] + [K2] * m
        x4 = [minus_one] + [_phase_swap(b) for b in beta]

    ks = [m, m, m, m]
    if anti:
        ks = [m, m, m, m - 1] if n % 2 == 0 else [m + 1, m, m, m]
    factors = [
        _conjugate(q, scipy.linalg.block_diag(*blocks).astype(complex), "complex", k)
        for blocks, k in zip((x1, x2, x3, x4), ks)
    ]
    return _finish(group, z, factors, tol)


def decompose_su(z, tol: float | None = None) -> Factorization:
    """Z ∈ SU(n) as X₁X₂X₃X₄ with every X_i ∈ Gr(⌊n/2⌋, ℂⁿ)."""
    tol = settings.TOL if tol is None else tol
    z = _unitary(z, tol, NotSpecialUnitary)
    if not _det_is(z, 1.0, tol):
        raise NotSpecialUnitary(f"det = {np.linalg.det(z):.6g}, expected 1")
    return _unitary_four(z, tol, anti=False, group="su")


def decompose_su_minus(z, tol: float | None = None) -> Factorization:
    """Z with det −1 as a product in Φ(k,k,k,k−1) (n = 2k) or Φ(k+1,k,k,k) (n = 2k+1)."""
    tol = settings.TOL if tol is None else tol
    z = _unitary(z, tol, NotAntiSpecialUnitary)
    if not _det_is(z, -1.0, tol):
        raise NotAntiSpecialUnitary(f"det = {np.linalg.det(z):.6g}, expected −1")
    return _unitary_four(z, tol, anti=True, group="su-")


def decompose_su_signature(z, ks: tuple[int, int, int, int], tol: float | None = None) -> Factorization:
    """Z ∈ Φ(k₁,k₂,k₃,k₄, ℂⁿ) for normalized signatures with k₂ + k₄ ≥ n − 1.

    Z = A·B with diagonal A ∈ Φ(k₁,k₂) and B ∈ Φ(k₃,k₄) built from partial
    phase sums, then each of A, B is split into two involutions.
    """
    tol = settings.TOL if tol is None else tol
    z = _unitary(z, tol, NotStructured)
    n = z.shape[0]
    sig = PhiSignature(field="complex", n=n, ks=tuple(ks))
    if sig.d != 4 or not is_normalized(sig) or min(ks) < 0:
        raise BadSignature(f"{ks} is not a normalized four-factor signature for n={n}")
    k1, k2, k3, k4 = ks
    if k2 + k4 < n - 1:
        raise BadSignature(f"{ks} needs k₂ + k₄ ≥ n − 1 = {n - 1}")
    odd_sum = sum(ks) % 2 == 1
    if not _det_is(z, -1.0 if odd_sum else 1.0, tol):
        raise DeterminantMismatch(f"det = {np.linalg.det(z):.6g} does not match Σk = {sum(ks)}")

    q, gamma = _zero_sum_phases(z, tol, np.pi if odd_sum else 0.0)
    k = n // 2
    if n % 2 == 0:
        alpha = [gamma[: 2 * j - 1].sum() for j in range(1, k + 1)]
        beta = [gamma[: 2 * j].sum() for j in range(1, k)]
        a_diag = [v for a in alpha for v in (a, -a)]
        b_diag = [0.0] + [v for b in beta for v in (b, -b)] + [np.pi * ((k3 - k4) % 2)]
    else:
        alpha = [gamma[: 2 * j - 1].sum() for j in range(1, k + 1)]
        beta = [gamma[: 2 * j].sum() for j in range(1, k + 1)]
        a_diag = [v for a in alpha for v in (a, -a)] + [np.pi * ((k1 - k2) % 2)]
        b_diag = [0.0] + [v for b in beta for v in (b, -b)]
    a_mat = np.diag(np.exp(1j * np.asarray(a_diag)))
    b_mat = np.diag(np.exp(1j * np.asarray(b_diag)))

    x1, x2 = split_phi2(a_mat, k1, k2, "complex", tol)
    x3, x4 = split_phi2(b_mat, k3, k4, "complex", tol)
    factors = [_conjugate(q, x.m, "complex", x.k) for x in (x1, x2, x3, x4)]
    return _finish("su-sig", z, factors, tol)


# ─── Φ(k, k, k, k−2) ─────────────────────────────────────────────────────────

def solve_phase_system(
    thetas: tuple[float, float, float, float],
    candidates: list[tuple[int, int, int, int]] | None = None,
) -> tuple[tuple[int, int, int, int], float, float]:
    """Find τ and (x, y) ∈ [0,1]² with
    x·e^{iθ_τ(1)} − (1−x)·e^{iθ_τ(2)} = e^{−iθ_τ(3)}·(2y − 1).

    τ is returned 1-based. Permutations are tried in lexicographic order;
    multiplying through by e^{iθ_τ(3)} leaves a real right-hand side, so x
    is fixed by the imaginary part whenever sin(θ_τ(1)+θ_τ(3)) and
    sin(θ_τ(2)+θ_τ(3)) share a sign.
    """
    th = np.asarray(thetas, dtype=float)
    if th.shape != (4,):
        raise BadDimensions("solve_phase_system takes exactly four angles")
    if abs(th.sum()) > 1e-9:
        raise NotStructured(f"angles must sum to zero, got {th.sum():.3e}")
    perms = candidates or [tuple(p + 1 for p in perm) for perm in itertools.permutations(range(4))]
    for tau in perms:
        t1, t2, t3 = th[tau[0] - 1], th[tau[1] - 1], th[tau[2] - 1]
        s1, s2 = np.sin(t1 + t3), np.sin(t2 + t3)
        if s1 * s2 < -1e-15:
            continue
        x = 1.0 if abs(s1 + s2) <= 1e-12 else float(np.clip(s2 / (s1 + s2), 0.0, 1.0))
        w = x * np.exp(1j * (t1 + t3)) - (1.0 - x) * np.exp(1j * (t2 + t3))
        y = float(np.clip((1.0 + w.real) / 2.0, 0.0, 1.0))
        residual = abs(x * np.exp(1j * t1) - (1.0 - x) * np.exp(1j * t2) - np.exp(-1j * t3) * (2.0 * y - 1.0))
        if residual <= 1e-9:
            return tuple(tau), x, y
    raise NoSolutionFound(f"no permutation solves the phase system for {thetas}")


def _core_roles(gamma: np.ndarray) -> tuple[tuple[int, int, int], float, float]:
    """First index triple (a, b, c) whose phases close the 2×2 core.

    With φ₂, φ₃, φ₄ = γ_a, γ_b, γ_c and φ₁ = −(φ₂+φ₃+φ₄) the bulk sum, the
    core needs a trace-zero Hermitian involution R with diag(e^{iφ₃}, e^{iφ₄})·R
    similar to diag(e^{−iφ₁}, −e^{−iφ₂}). Writing R = V_B·I_{1,−1}·V_Bᴴ with
    |x_B|² = y and the other block through |x_A|² = x, (x, y) is the
    identity-permutation solution of the phase system; a cheap
    |sin((φ₂−φ₁)/2)| ≤ |sin((φ₃−φ₄)/2)| screen skips hopeless triples.
    Returns the triple and (x, y).
    """
    n = len(gamma)
    for b, c in itertools.permutations(range(n), 2):
        s34 = abs(np.sin((gamma[b] - gamma[c]) / 2.0))
        s12 = np.abs(np.sin(gamma + (gamma[b] + gamma[c]) / 2.0))
        for a in np.flatnonzero(s12 <= s34 + 1e-12):
            if a in (b, c):
                continue
            p2, p3, p4 = gamma[a], gamma[b], gamma[c]
            try:
                _, x, y = solve_phase_system((-(p2 + p3 + p4), p2, p3, p4), candidates=[(1, 2, 3, 4)])
            except NoSolutionFound:
                continue
            return (int(a), b, c), x, y
    raise NoSolutionFound("no eigenphase triple closes the Φ(k,k,k,k−2) core")


def _core_factors(gamma: np.ndarray, k: int, y: float) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal A ∈ Φ(k,k), B ∈ Φ(k,k−2) with A·B = diag(e^{iγ}).

    γ is already ordered bulk first, then (φ₂, φ₃, φ₄).
    """
    g = gamma[: 2 * k - 3]
    phi1 = g.sum()
    phi2, phi3, phi4 = gamma[2 * k - 3:]

    def tail_sum(start: int) -> float:
        # Σ_{i=start}^{2k−3} g_i with 1-based i
        return float(g[start - 1:].sum())

    alpha = {j: tail_sum(2 * j + 1) for j in range(1, k - 1)}
    alpha[k - 1] = phi1
    alpha[k] = phi2 + np.pi
    beta = {j: tail_sum(2 * j) for j in range(1, k - 1)}

    a1 = [alpha[k - 1]]
    for j in range(1, k - 2):
        a1 += [-alpha[j], alpha[j]]
    a1.append(-alpha[k - 2])
    b1 = [v for j in range(1, k - 1) for v in (-beta[j], beta[j])]

    # V_B = V(√y, √(1−y), π) gives V_B·I_{1,−1}·V_Bᴴ = [[c, m], [m, −c]]
    c = 2.0 * y - 1.0
    m = np.sqrt(max(0.0, 1.0 - c * c))
    m_b = np.array([[c, m], [m, -c]], dtype=complex)
    # trace and determinant match diag(e^{−iφ₁}, −e^{−iφ₂}), so this is V_A·(…)·V_Aᴴ
    m_a = np.diag([np.exp(1j * phi3), np.exp(1j * phi4)]) @ m_b
    a_mat = scipy.linalg.block_diag(
        np.diag(np.exp(1j * np.asarray(a1))),
        np.diag([np.exp(1j * alpha[k - 2]), np.exp(1j * alpha[k])]),
        m_a,
    )
    b_mat = scipy.linalg.block_diag(
        np.diag(np.exp(1j * np.asarray(b1))),
        np.diag([1.0, -1.0]).astype(complex),
        m_b,
    )
    return a_mat, b_mat


_SUBSET_LIMIT = 1 << 16


def _balanced_subset(gamma: np.ndarray, tol: float) -> tuple[list[int], float] | None:
    """Even-size index set S, 2 ≤ |S| ≤ n−2, with Σ_S γ ≡ 0 or π (mod 2π).

    Phases are grouped by value so repeated eigenvalues are enumerated by
    count; spectra with too many distinct values only try pairs.
    """
    n = len(gamma)
    clusters = cluster_values(np.exp(1j * gamma))
    combos = int(np.prod([len(cl) + 1 for cl in clusters], dtype=float))
    if combos <= _SUBSET_LIMIT:
        choices = (
            [i for cl, cnt in zip(clusters, counts) for i in cl[:cnt]]
            for counts in itertools.product(*(range(len(cl) + 1) for cl in clusters))
        )
    else:
        choices = (list(pair) for pair in itertools.combinations(range(n), 2))
    for s in choices:
        if len(s) % 2 or not 2 <= len(s) <= n - 2:
            continue
        r = float(np.mod(gamma[s].sum(), 2.0 * np.pi))
        for target in (0.0, np.pi, 2.0 * np.pi):
            if abs(r - target) <= tol:
                return sorted(s), target % (2.0 * np.pi)
    return None


def _chain_angles(gamma: np.ndarray, path: list[int], start: float, end: float,
                  a: np.ndarray, b: np.ndarray) -> None:
    """Fill A- and B-phases along a path alternating A-pairs and B-pairs.

    Edges (p₀,p₁), (p₂,p₃), … carry conjugate A-phases, edges (p₁,p₂), … carry
    conjugate B-phases; the endpoints carry B-phases start and end (0 or π).
    """
    b[path[0]] = start
    a[path[0]] = gamma[path[0]] - start
    for i in range(1, len(path)):
        v, prev = path[i], path[i - 1]
        if i % 2:
            a[v] = -a[prev]
            b[v] = gamma[v] - a[v]
        else:
            b[v] = -b[prev]
            a[v] = gamma[v] - b[v]
    b[path[-1]] = end


def _diagonal_factors(gamma: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal A ∈ Φ(k,k), B ∈ Φ(k,k−2) with A·B = diag(e^{iγ}).

    Two chains cover the phases; their endpoints are B's ±1 eigenvalues, so a
    chain over S closes exactly when Σ_S γ matches its endpoint phases.
    """
    found = _balanced_subset(gamma, tol)
    if found is None:
        raise NoSolutionFound("no even set of eigenvalues multiplies to ±1")
    s, r = found
    t = [i for i in range(len(gamma)) if i not in s]
    a = np.zeros(len(gamma))
    b = np.zeros(len(gamma))
    if r == 0.0:
        _chain_angles(gamma, s, 0.0, 0.0, a, b)
        _chain_angles(gamma, t, np.pi, np.pi, a, b)
    else:
        _chain_angles(gamma, s, 0.0, np.pi, a, b)
        _chain_angles(gamma, t, 0.0, np.pi, a, b)
    return np.diag(np.exp(1j * a)), np.diag(np.exp(1j * b))


def decompose_su_kkkk2(z, tol: float | None = None) -> Factorization:
    """Z ∈ SU(2k), k ≥ 3, as a product in Φ(k, k, k, k−2, ℂ^{2k}).

    Z = A·B with A ∈ Φ(k,k) and B ∈ Φ(k,k−2) built in the eigenbasis of Z.
    The 2×2 core route covers generic spectra; when no eigenphase triple
    closes the core, A and B are taken diagonal, which needs an even set of
    eigenvalues with product ±1. NoSolutionFound when neither applies, which
    includes targets outside the product set (e^{iπ/3}·I₆ for k = 3).
    """
    tol = settings.TOL if tol is None else tol
    z = _unitary(z, tol, NotSpecialUnitary)
    n = z.shape[0]
    if n % 2 or n < 6:
        raise BadDimensions(f"Φ(k,k,k,k−2) needs n = 2k with k ≥ 3, got n={n}")
    if not _det_is(z, 1.0, tol):
        raise NotSpecialUnitary(f"det = {np.linalg.det(z):.6g}, expected 1")
    k = n // 2
    q, gamma = _zero_sum_phases(z, tol, 0.0)
    try:
        (a, b, c), x, y = _core_roles(gamma)
    except NoSolutionFound as e:
        logger.debug("kkkk2 core route failed (%s), trying diagonal chains", e)
        a_mat, b_mat = _diagonal_factors(gamma, tol)
    else:
        order = [i for i in range(n) if i not in (a, b, c)] + [a, b, c]
        q = q[:, order]
        a_mat, b_mat = _core_factors(gamma[order], k, y)
        logger.debug("kkkk2 core roles %s with |x_A|² = %.6f, |x_B|² = %.6f", (a, b, c), x, y)

    x1, x2 = split_phi2(a_mat, k, k, "complex", tol)
    x3, x4 = split_phi2(b_mat, k, k - 2, "complex", tol)
    factors = [_conjugate(q, x.m, "complex", x.k) for x in (x1, x2, x3, x4)]
    return _finish("su-kkkk2", z, factors, tol)
