"""Product sets Φ(k₁,…,k_d, Fⁿ) = {X₁⋯X_d : X_i ∈ Gr(k_i, Fⁿ)}.

Signature normalization, the spectral membership test and canonical
form for two factors, dimension formulas, orbit dimensions and the
reflection length of special (anti-)unitary matrices.
"""

import logging
from enum import Enum
from math import comb

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from grassfactor.backend import as_matrix, eig_unitary, frob, schur_orthogonal, unitarity_residual
from grassfactor.config import settings
from grassfactor.errors import (
    BadPartition,
    BadSignature,
    ConvergenceFailure,
    NotMember,
    NotSpecialOrAntiSpecial,
    NotStructured,
)
from grassfactor.grassmann import FieldName, GrassPoint, gr_validate

logger = logging.getLogger(__name__)


# ─── Types ───────────────────────────────────────────────────────────────────

class PhiSignature(BaseModel):
    field: FieldName
    n: int
    ks: tuple[int, ...] = Field(description="Half-ranks (k₁,…,k_d) of the factors")

    @property
    def d(self) -> int:
        return len(self.ks)


class SpectralProfile(BaseModel):
    """Eigenvalue data of an orthogonal / unitary matrix.

    `unpaired` holds phases whose conjugate is missing from the spectrum;
    it is always empty for real matrices.
    """

    pairs: list[tuple[float, int]] = Field(default_factory=list)
    plus_count: int = 0
    minus_count: int = 0
    unpaired: list[float] = Field(default_factory=list)

    @property
    def pair_count(self) -> int:
        return sum(m for _, m in self.pairs)

    @property
    def n(self) -> int:
        return 2 * self.pair_count + self.plus_count + self.minus_count + len(self.unpaired)


class CanonicalPhi2(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    q: np.ndarray
    sigma: list[float]
    e: list[int]
    tail: tuple[int, int] = Field(description="(n−k−k′, k−k′) for the block I_{n−k−k′, k−k′}")

    def middle(self) -> np.ndarray:
        return canonical_middle(self.sigma, self.e, self.tail)

    def matrix(self) -> np.ndarray:
        return self.q @ self.middle() @ self.q.conj().T


class Phi4Class(str, Enum):
    SU = "SU"
    SU_MINUS = "SU-"
    PROPER_SUBSET = "ProperSubset"


# ─── Signatures ──────────────────────────────────────────────────────────────

def _check_signature(s: PhiSignature) -> None:
    if s.n < 1 or s.d < 1:
        raise BadSignature(f"empty signature {s.ks} for n={s.n}")
    if any(not 0 <= k <= s.n for k in s.ks):
        raise BadSignature(f"half-ranks {s.ks} must lie in [0, {s.n}]")


def is_normalized(s: PhiSignature) -> bool:
    """Membership of s.ks in K_{n,d}: non-increasing with k₁ + k₂ ≤ n."""
    ks = s.ks
    if any(ks[i] < ks[i + 1] for i in range(len(ks) - 1)):
        return False
    return len(ks) < 2 or ks[0] + ks[1] <= s.n


def normalize_signature(s: PhiSignature) -> tuple[PhiSignature, int]:
    """K_{n,d} representative reachable by permutations and pair flips.

    Flipping a pair (k_i, k_j) → (n−k_i, n−k_j) negates two factors and
    leaves the product unchanged, so the returned sign is always +1.
    """
    _check_signature(s)
    n = s.n
    if s.d == 1:
        return s, 1
    small = [min(k, n - k) for k in s.ks]
    big_count = sum(1 for k in s.ks if 2 * k > n)
    has_half = any(2 * k == n for k in s.ks)
    if big_count % 2 == 1 and not has_half:
        j = int(np.argmax(small))
        rest = sorted(small[:j] + small[j + 1:], reverse=True)
        ks = (n - small[j], *rest)
    else:
        ks = tuple(sorted(small, reverse=True))
    return PhiSignature(field=s.field, n=n, ks=ks), 1


def flip_entry(s: PhiSignature, i: int) -> tuple[PhiSignature, int]:
    """Φ(…, n−k_i, …) = −Φ(…, k_i, …)."""
    _check_signature(s)
    if not 0 <= i < s.d:
        raise BadSignature(f"no entry {i} in {s.ks}")
    ks = list(s.ks)
    ks[i] = s.n - ks[i]
    return PhiSignature(field=s.field, n=s.n, ks=tuple(ks)), -1


# ─── Dimensions ──────────────────────────────────────────────────────────────

def phi_dim(field: FieldName, k: int, kp: int, n: int) -> int:
    """Dimension of Φ(k, k′, Fⁿ) as a real manifold."""
    if not (0 <= kp <= k < n and k + kp <= n):
        raise BadSignature(f"phi_dim needs k′ ≤ k < n and k + k′ ≤ n, got ({k}, {kp}, {n})")
    if field == "complex":
        return 2 * k * (n - k) + 2 * kp * (n - kp) - kp
    return k * (n - k) + kp * (n - kp) - kp


def orbit_dim_real(m0: int, blocks: list[tuple[int, int]], q: int, n: int) -> int:
    """Dimension of the O(n)-conjugation orbit of a canonical product.

    blocks holds (p_j, q_j) for each distinct σ_j ∈ (0, 1).
    """
    m = m0 + sum(p + qq for p, qq in blocks)
    rest = n - q - 2 * m
    if m0 < 0 or q < 0 or rest < 0 or any(p < 0 or qq < 0 for p, qq in blocks):
        raise BadPartition(f"blocks do not fit: m0={m0}, blocks={blocks}, q={q}, n={n}")
    stabilizer = m0 ** 2 + sum(p ** 2 + qq ** 2 for p, qq in blocks) + comb(q, 2) + comb(rest, 2)
    return comb(n, 2) - stabilizer


def orbit_dim_complex(ms: list[int], q: int, n: int) -> int:
    """Dimension of the U(n)-conjugation orbit; ms are the multiplicities m_j."""
    m = sum(ms)
    rest = n - q - 2 * m
    if q < 0 or rest < 0 or any(mj < 1 for mj in ms):
        raise BadPartition(f"blocks do not fit: ms={ms}, q={q}, n={n}")
    return n ** 2 - (2 * sum(mj ** 2 for mj in ms) + q ** 2 + rest ** 2)


# ─── Spectra ─────────────────────────────────────────────────────────────────

class _PairedSpectrum(BaseModel):
    """Invariant 2-planes and ±1 eigenvectors of a structured matrix.

    Real: Z acts on span(a, b) as the block rotation(φ).
    Complex: a, b are eigenvectors for e^{iφ} and e^{−iφ}.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: FieldName
    n: int
    pairs: list[tuple[float, np.ndarray, np.ndarray]]
    plus: list[np.ndarray]
    minus: list[np.ndarray]
    unpaired: list[float]


def _structured(z, field: FieldName, tol: float) -> np.ndarray:
    z = as_matrix(z)
    n = z.shape[0]
    if field == "real" and np.iscomplexobj(z):
        if frob(z.imag) > tol * max(n, 1):
            raise NotStructured("real field needs a real matrix")
        z = z.real
    residual = unitarity_residual(z)
    if residual > tol * max(n, 1):
        raise NotStructured(f"matrix is not orthogonal/unitary (residual {residual:.3e})")
    return z


def _paired_spectrum(z: np.ndarray, field: FieldName, tol: float) -> _PairedSpectrum:
    n = z.shape[0]
    ctol = settings.CLUSTER_TOL
    pairs, plus, minus, unpaired = [], [], [], []
    if field == "real":
        form = schur_orthogonal(z, tol)
        col = 0
        for block in form.blocks:
            if block.kind == "rotation":
                phi = 2.0 * block.value
                a, b = form.q[:, col], form.q[:, col + 1]
                if phi <= ctol:
                    plus += [a, b]
                elif phi >= np.pi - ctol:
                    minus += [a, b]
                else:
                    pairs.append((phi, a, b))
                col += 2
            else:
                (plus if block.value > 0 else minus).append(form.q[:, col])
                col += 1
    else:
        eig = eig_unitary(z, tol)
        pos, neg = [], []
        for j, g in enumerate(eig.phases):
            if abs(g) <= ctol:
                plus.append(eig.q[:, j])
            elif abs(g) >= np.pi - ctol:
                minus.append(eig.q[:, j])
            elif g > 0:
                pos.append((g, j))
            else:
                neg.append((-g, j))
        pos.sort()
        neg.sort()
        i = j = 0
        while i < len(pos) and j < len(neg):
            if abs(pos[i][0] - neg[j][0]) <= ctol:
                phi = (pos[i][0] + neg[j][0]) / 2.0
                pairs.append((phi, eig.q[:, pos[i][1]], eig.q[:, neg[j][1]]))
                i += 1
                j += 1
            elif pos[i][0] < neg[j][0]:
                unpaired.append(pos[i][0])
                i += 1
            else:
                unpaired.append(-neg[j][0])
                j += 1
        unpaired += [g for g, _ in pos[i:]] + [-g for g, _ in neg[j:]]
    return _PairedSpectrum(field=field, n=n, pairs=pairs, plus=plus, minus=minus, unpaired=unpaired)


def spectral_profile(z, field: FieldName | None = None, tol: float | None = None) -> SpectralProfile:
    """Clustered conjugate-pair angles with multiplicities and ±1 counts."""
    tol = settings.TOL if tol is None else tol
    z = as_matrix(z)
    field = field or ("complex" if np.iscomplexobj(z) else "real")
    spectrum = _paired_spectrum(_structured(z, field, tol), field, tol)
    angles = sorted(phi for phi, _, _ in spectrum.pairs)
    clustered: list[tuple[float, int]] = []
    group: list[float] = []
    for phi in angles:
        if group and phi - group[-1] > settings.CLUSTER_TOL:
            clustered.append((float(np.mean(group)), len(group)))
            group = []
        group.append(phi)
    if group:
        clustered.append((float(np.mean(group)), len(group)))
    return SpectralProfile(
        pairs=clustered,
        plus_count=len(spectrum.plus),
        minus_count=len(spectrum.minus),
        unpaired=sorted(spectrum.unpaired),
    )


# ─── Two factors ─────────────────────────────────────────────────────────────

def _check_phi2(k: int, kp: int, n: int) -> None:
    if not (0 <= kp <= k <= n and k + kp <= n):
        raise BadSignature(f"(k, k′) = ({k}, {kp}) is not normalized for n={n}")


def _fits(spectrum: _PairedSpectrum, k: int, kp: int) -> bool:
    n = spectrum.n
    excess_plus = len(spectrum.plus) - (n - k - kp)
    excess_minus = len(spectrum.minus) - (k - kp)
    return (
        not spectrum.unpaired
        and excess_plus >= 0
        and excess_minus >= 0
        and excess_plus % 2 == 0
        and len(spectrum.pairs) + excess_plus // 2 + excess_minus // 2 == kp
    )


def member_phi2(z, k: int, kp: int, field: FieldName, tol: float | None = None) -> bool:
    """Spectral test for Z ∈ Φ(k, k′, Fⁿ) with k′ ≤ k and k + k′ ≤ n."""
    tol = settings.TOL if tol is None else tol
    z = _structured(z, field, tol)
    _check_phi2(k, kp, z.shape[0])
    return _fits(_paired_spectrum(z, field, tol), k, kp)


class _Layout(BaseModel):
    """Z in canonical coordinates: rotation pairs followed by the tail."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    pairs: list[tuple[float, np.ndarray, np.ndarray, bool]]
    tail_plus: list[np.ndarray]
    tail_minus: list[np.ndarray]


def _layout(z, k: int, kp: int, field: FieldName, tol: float) -> _Layout:
    z = _structured(z, field, tol)
    n = z.shape[0]
    _check_phi2(k, kp, n)
    spectrum = _paired_spectrum(z, field, tol)
    if not _fits(spectrum, k, kp):
        raise NotMember(f"matrix is not in Φ({k}, {kp}) over {field} n={n}")
    n_plus, n_minus = n - k - kp, k - kp
    extra_plus, extra_minus = spectrum.plus[n_plus:], spectrum.minus[n_minus:]
    # last flag marks blocks that are ±I on their plane
    pairs = [(phi, a, b, False) for phi, a, b in spectrum.pairs]
    h = len(extra_plus) // 2
    pairs += [(0.0, extra_plus[i], extra_plus[h + i], True) for i in range(h)]
    h = len(extra_minus) // 2
    pairs += [(np.pi, extra_minus[i], extra_minus[h + i], True) for i in range(h)]
    return _Layout(pairs=pairs, tail_plus=spectrum.plus[:n_plus], tail_minus=spectrum.minus[:n_minus])


def canonical_middle(sigma: list[float], e: list[int], tail: tuple[int, int]) -> np.ndarray:
    """[[√(I−Σ²)E, Σ, 0], [−Σ, √(I−Σ²)E, 0], [0, 0, I_{p,q}]]."""
    s = np.asarray(sigma, dtype=float)
    ce = np.sqrt(np.clip(1.0 - s ** 2, 0.0, None)) * np.asarray(e, dtype=float)
    top = np.block([[np.diag(ce), np.diag(s)], [-np.diag(s), np.diag(ce)]]) if len(s) else np.zeros((0, 0))
    tail_block = np.diag(np.concatenate([np.ones(tail[0]), -np.ones(tail[1])]))
    return scipy.linalg.block_diag(top, tail_block)


def canonical_phi2(z, k: int, kp: int, field: FieldName, tol: float | None = None) -> CanonicalPhi2:
    """Z = Q·[[√(I−Σ²)E, Σ, 0], [−Σ, √(I−Σ²)E, 0], [0, 0, I_{n−k−k′, k−k′}]]·Qᴴ.

    σ is sorted descending with e = +1 first on ties; e = +1 when σ = 1.
    """
    tol = settings.TOL if tol is None else tol
    z = as_matrix(z)
    lay = _layout(z, k, kp, field, tol)
    items = []
    for phi, a, b, _ in lay.pairs:
        if field == "complex":
            a, b = (a + b) / np.sqrt(2.0), 1j * (b - a) / np.sqrt(2.0)
        if abs(np.cos(phi)) <= tol:
            # σ = 1: the sign multiplies a zero block
            items.append((1.0, 1, a, b))
        else:
            items.append((float(np.sin(phi)), 1 if np.cos(phi) > 0 else -1, a, b))
    items.sort(key=lambda t: -t[0])
    # σ within the clustering tolerance counts as a tie, broken by e = +1 first
    ctol = settings.CLUSTER_TOL
    groups: list[list] = []
    for item in items:
        if groups and groups[-1][0][0] - item[0] <= ctol:
            groups[-1].append(item)
        else:
            groups.append([item])
    items = [t for g in groups for t in sorted(g, key=lambda t: -t[1])]
    cols = [t[2] for t in items] + [t[3] for t in items] + lay.tail_plus + lay.tail_minus
    n = z.shape[0]
    q = np.column_stack(cols) if cols else np.zeros((n, 0))
    if field == "real":
        q = q.real
    canon = CanonicalPhi2(
        q=q,
        sigma=[t[0] for t in items],
        e=[t[1] for t in items],
        tail=(n - k - kp, k - kp),
    )
    residual = frob(canon.matrix() - z)
    if residual > 10 * tol * max(n, 1):
        raise ConvergenceFailure(f"canonical form residual {residual:.3e} too large")
    return canon


def _half_angle_pair(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """S, T with S·T = rotation(2θ); both trace-zero symmetric involutions."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [-s, -c]]), np.array([[c, s], [s, -c]])


def split_phi2(z, k: int, kp: int, field: FieldName, tol: float | None = None) -> tuple[GrassPoint, GrassPoint]:
    """Factor Z = X·Y with X ∈ Gr(k, Fⁿ) and Y ∈ Gr(k′, Fⁿ).

    Non-normalized (k, k′) are reduced with Φ(k′, k) = Φ(k, k′)ᴴ and
    Φ(n−k, n−k′) = Φ(k, k′).
    """
    tol = settings.TOL if tol is None else tol
    z = as_matrix(z)
    n = z.shape[0]
    if not (0 <= k <= n and 0 <= kp <= n):
        raise BadSignature(f"half-ranks ({k}, {kp}) out of range for n={n}")
    if k + kp > n:
        x, y = split_phi2(z, n - k, n - kp, field, tol)
        return -x, -y
    if k < kp:
        x2, y2 = split_phi2(z.conj().T, kp, k, field, tol)
        return y2, x2

    lay = _layout(z, k, kp, field, tol)
    cols, x_blocks, y_blocks = [], [], []
    for phi, a, b, trivial in lay.pairs:
        if field == "complex" and not trivial:
            xb = np.array([[0.0, 1.0], [1.0, 0.0]])
            yb = np.array([[0.0, np.exp(-1j * phi)], [np.exp(1j * phi), 0.0]])
        else:
            xb, yb = _half_angle_pair(phi / 2.0)
        cols.append((a, b))
        x_blocks.append(xb)
        y_blocks.append(yb)
    # basis order: first vectors of the pairs, then second vectors, then the tail
    h = len(cols)
    basis = [a for a, _ in cols] + [b for _, b in cols] + lay.tail_plus + lay.tail_minus
    dtype = complex if field == "complex" else float
    dx = np.zeros((n, n), dtype=dtype)
    dy = np.zeros((n, n), dtype=dtype)
    for i, (xb, yb) in enumerate(zip(x_blocks, y_blocks)):
        idx = np.ix_([i, h + i], [i, h + i])
        dx[idx] = xb
        dy[idx] = yb
    for j in range(len(lay.tail_plus)):
        dx[2 * h + j, 2 * h + j] = -1.0
        dy[2 * h + j, 2 * h + j] = -1.0
    for j in range(len(lay.tail_minus)):
        t = 2 * h + len(lay.tail_plus) + j
        dx[t, t] = 1.0
        dy[t, t] = -1.0
    b = np.column_stack(basis) if basis else np.zeros((n, 0))
    if field == "real":
        b = b.real
    xm = b @ dx @ b.conj().T
    ym = b @ dy @ b.conj().T
    xm, ym = (xm + xm.conj().T) / 2.0, (ym + ym.conj().T) / 2.0

    x = GrassPoint(field=field, n=n, k=k, m=xm)
    y = GrassPoint(field=field, n=n, k=kp, m=ym)
    residual = frob(xm @ ym - z)
    if residual > 10 * tol * max(n, 1) or not gr_validate(xm, k, 10 * tol).accepted \
            or not gr_validate(ym, kp, 10 * tol).accepted:
        raise ConvergenceFailure(f"two-factor split residual {residual:.3e} too large")
    return x, y


# ─── Reflection length ───────────────────────────────────────────────────────

def reflection_length(a, tol: float | None = None) -> int:
    """ℓ(A) = (1/π)·max(Σθ_j(A), Σθ_j(Aᴴ)) with phases θ_j ∈ [0, 2π)."""
    tol = settings.TOL if tol is None else tol
    a = as_matrix(a).astype(complex)
    n = a.shape[0]
    det = np.linalg.det(a)
    if min(abs(det - 1.0), abs(det + 1.0)) > max(tol * n, 1e-8):
        raise NotSpecialOrAntiSpecial(f"det = {det:.6g} is not ±1")
    phases = np.mod(eig_unitary(a, tol).phases, 2.0 * np.pi)
    ctol = settings.CLUSTER_TOL
    phases = np.where((phases <= ctol) | (phases >= 2.0 * np.pi - ctol), 0.0, phases)
    conj_phases = np.where(phases > 0, 2.0 * np.pi - phases, 0.0)
    value = max(phases.sum(), conj_phases.sum()) / np.pi
    length = int(np.rint(value))
    if abs(value - length) > 1e-6:
        raise ConvergenceFailure(f"reflection length {value:.9f} is not an integer")
    return length


def length_upper_bound(s: PhiSignature) -> int:
    if not is_normalized(s):
        raise BadSignature(f"{s.ks} is not normalized")
    if s.d % 2 == 0:
        return sum(s.ks)
    return s.n - s.ks[0] + sum(s.ks[1:])


def classify_phi4_complex(s: PhiSignature) -> Phi4Class:
    """Which of SU(n), SU⁻(n) the product of four Grassmannians fills."""
    if s.d != 4 or not is_normalized(s):
        raise BadSignature(f"{s.ks} is not a normalized four-factor signature")
    n = s.n
    k1, k2, k3, k4 = s.ks
    if k1 == k2 == k3 == k4 and n in (2 * k1, 2 * k1 + 1) and k1 >= 1:
        return Phi4Class.SU
    if n % 2 == 0:
        k = n // 2
        if (k1, k2, k3, k4) == (k, k, k - 1, k - 1) and k >= 2:
            return Phi4Class.SU
        if (k1, k2, k3, k4) == (k, k, k, k - 2) and k >= 3:
            return Phi4Class.SU
        if (k1, k2, k3, k4) == (k, k, k, k - 1) and k >= 2:
            return Phi4Class.SU_MINUS
    else:
        k = n // 2
        if (k1, k2, k3, k4) == (k + 1, k, k, k) and k >= 1:
            return Phi4Class.SU_MINUS
    return Phi4Class.PROPER_SUBSET
