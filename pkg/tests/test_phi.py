import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfactor.backend import rotation
from grassfactor.errors import BadPartition, BadSignature, NotMember, NotSpecialOrAntiSpecial
from grassfactor.grassmann import gr_sample, group_sample
from grassfactor.phi import (
    Phi4Class,
    PhiSignature,
    canonical_middle,
    canonical_phi2,
    classify_phi4_complex,
    flip_entry,
    is_normalized,
    length_upper_bound,
    member_phi2,
    normalize_signature,
    orbit_dim_complex,
    orbit_dim_real,
    phi_dim,
    reflection_length,
    spectral_profile,
    split_phi2,
)


def sig(field, n, *ks):
    return PhiSignature(field=field, n=n, ks=ks)


# ─── Signatures ──────────────────────────────────────────────────────────────

@pytest.mark.parametrize(
    "given_sig, expected",
    [
        (sig("real", 4, 3, 3), (1, 1)),
        (sig("real", 4, 1, 2), (2, 1)),
        (sig("complex", 5, 2, 2, 2, 2), (2, 2, 2, 2)),
    ],
)
def test_normalize_examples(given_sig, expected):
    out, sign = normalize_signature(given_sig)
    assert out.ks == expected
    assert sign == 1
    assert is_normalized(out)


@given(n=st.integers(2, 9), data=st.data())
@settings(max_examples=80, deadline=None)
def test_normalize_is_idempotent(n, data):
    ks = tuple(data.draw(st.lists(st.integers(0, n), min_size=1, max_size=5)))
    out, _ = normalize_signature(PhiSignature(field="real", n=n, ks=ks))
    again, sign = normalize_signature(out)
    assert again.ks == out.ks
    assert sign == 1


def test_flip_entry_records_sign():
    out, sign = flip_entry(sig("real", 5, 2, 1), 0)
    assert out.ks == (3, 1)
    assert sign == -1


def test_signature_out_of_range():
    with pytest.raises(BadSignature):
        normalize_signature(sig("real", 3, 4, 1))


# ─── Dimensions ──────────────────────────────────────────────────────────────

def test_phi_dim_examples():
    assert phi_dim("real", 1, 1, 3) == 3
    assert phi_dim("real", 2, 0, 5) == 6
    assert phi_dim("complex", 2, 2, 4) == 14
    assert phi_dim("real", 2, 2, 4) == 6


def test_phi_dim_requires_normalized():
    with pytest.raises(BadSignature):
        phi_dim("real", 1, 2, 4)


def test_orbit_dim_real_examples():
    assert orbit_dim_real(0, [], 5, 5) == 0
    assert orbit_dim_real(1, [], 0, 2) == 0
    # one block of distinct σ with p = q = 1 in ℝ⁴: C(4, 2) − 2
    assert orbit_dim_real(0, [(1, 1)], 0, 4) == 6 - 2
    assert orbit_dim_real(0, [(1, 1), (0, 1)], 0, 6) == 15 - 3


def test_orbit_dim_real_rejects_overflow():
    with pytest.raises(BadPartition):
        orbit_dim_real(2, [(1, 1)], 1, 6)


def test_orbit_dim_complex_examples():
    assert orbit_dim_complex([], 3, 3) == 0
    assert orbit_dim_complex([1], 0, 2) == 2
    assert orbit_dim_complex([1, 1], 1, 5) == 20
    with pytest.raises(BadPartition):
        orbit_dim_complex([0], 0, 2)


def _tangent_rank(x, y, field):
    """Rank of {[Ω, X]·Y + X·[Ω′, Y]} over skew (skew-Hermitian) Ω, Ω′."""
    n = x.shape[0]
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j], e[j, i] = 1.0, -1.0
            basis.append(e)
            if field == "complex":
                f = np.zeros((n, n), dtype=complex)
                f[i, j], f[j, i] = 1j, 1j
                basis.append(f)
    if field == "complex":
        for i in range(n):
            f = np.zeros((n, n), dtype=complex)
            f[i, i] = 1j
            basis.append(f)
    vectors = []
    for om in basis:
        vectors.append((om @ x - x @ om) @ y)
        vectors.append(x @ (om @ y - y @ om))
    stacked = np.array([np.concatenate([v.real.ravel(), v.imag.ravel()]) for v in vectors])
    s = np.linalg.svd(stacked, compute_uv=False)
    return int(np.sum(s > 1e-6))


_NORMALIZED_PAIRS = [
    (n, k, kp) for n in range(2, 9) for k in range(1, n) for kp in range(1, k + 1) if k + kp <= n
]


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("n, k, kp", _NORMALIZED_PAIRS)
def test_phi_dim_matches_tangent_rank(field, n, k, kp):
    expected = phi_dim(field, k, kp, n)
    for sample in range(20):
        seed = 1000 * n + 100 * k + 10 * kp + sample
        x = gr_sample(field, k, n, seed=seed)
        y = gr_sample(field, kp, n, seed=seed + 50_000)
        assert _tangent_rank(x.m, y.m, field) == expected


# ─── Spectra and membership ──────────────────────────────────────────────────

def test_spectral_profile_examples(haar_real):
    p = spectral_profile(np.eye(3))
    assert p.plus_count == 3 and p.pairs == []

    z = scipy.linalg.block_diag(rotation(np.pi / 3), [[1.0]])
    p = spectral_profile(z)
    assert len(p.pairs) == 1
    assert p.pairs[0][0] == pytest.approx(np.pi / 3)
    assert p.pairs[0][1] == 1
    assert p.plus_count == 1

    q0 = haar_real(5)
    z = q0 @ scipy.linalg.block_diag(rotation(0.7), rotation(0.7), [[-1.0]]) @ q0.T
    p = spectral_profile(z)
    assert len(p.pairs) == 1
    assert p.pairs[0][0] == pytest.approx(0.7, abs=1e-9)
    assert p.pairs[0][1] == 2
    assert p.minus_count == 1
    assert p.n == 5


def test_spectral_profile_complex_unpaired():
    p = spectral_profile(np.diag(np.exp(1j * np.array([0.4, 1.0]))))
    assert p.pairs == []
    assert p.unpaired == pytest.approx([0.4, 1.0])


def test_member_examples():
    k = 3
    assert member_phi2(np.eye(2 * k), k, k, "real")
    i_n11 = np.diag([1.0] * (2 * k - 1) + [-1.0])
    assert member_phi2(i_n11, k, k - 1, "real")
    z = scipy.linalg.block_diag(rotation(0.5), rotation(1.2))
    assert not member_phi2(z, 1, 1, "real")
    assert member_phi2(z, 2, 2, "real")


def test_member_requires_normalized_signature():
    with pytest.raises(BadSignature):
        member_phi2(np.eye(4), 1, 2, "real")


@given(
    seed=st.integers(0, 10_000),
    n=st.integers(2, 6),
    field=st.sampled_from(["real", "complex"]),
    data=st.data(),
)
@settings(max_examples=80, deadline=None)
def test_member_accepts_constructed_products(seed, n, field, data):
    k = data.draw(st.integers(0, n))
    kp = data.draw(st.integers(0, min(k, n - k)))
    x = gr_sample(field, k, n, seed)
    y = gr_sample(field, kp, n, seed + 7919)
    z = x.m @ y.m
    assert member_phi2(z, k, kp, field)
    # transpose and negation moves
    assert member_phi2(z.conj().T, k, kp, field)
    assert member_phi2(-z, n - k, kp, field)


def test_member_rejects_profile_violations():
    # one rotation pair too many for k′ = 1
    z = scipy.linalg.block_diag(rotation(0.5), rotation(1.2), [[1.0]])
    assert not member_phi2(z, 2, 1, "real")
    # surplus +1 eigenvalues must come in pairs
    assert not member_phi2(np.diag([1.0, 1.0, -1.0, -1.0]), 2, 1, "real")
    # −1 count below k − k′
    assert not member_phi2(np.eye(4), 2, 1, "real")
    # complex: an unpaired phase never fits
    assert not member_phi2(np.diag(np.exp(1j * np.array([0.4, -0.1]))), 1, 1, "complex")


def _from_spectrum(field, angles, plus, minus, seed, drift=0.0):
    """Random conjugate of rotation pairs by angles plus ±1 eigenvalues.

    drift moves the conjugate partner of the first pair (complex only).
    """
    n = 2 * len(angles) + plus + minus
    signs = np.diag(np.concatenate([np.ones(plus), -np.ones(minus)]))
    if field == "real":
        d = scipy.linalg.block_diag(*[rotation(t) for t in angles], signs)
        q = group_sample("so", n, seed)
        return q @ d @ q.T
    phases = np.concatenate([angles, -np.asarray(angles), np.zeros(plus), np.full(minus, np.pi)])
    if drift:
        phases[len(angles)] += drift
    q = group_sample("su", n, seed)
    return q @ np.diag(np.exp(1j * phases)) @ q.conj().T


def _single_violations(n, k, kp, field):
    """Spectral layouts (pairs, plus, minus, drift) breaking one membership condition each."""
    n_plus, n_minus = n - k - kp, k - kp
    cases = {}
    if kp >= 1:
        # +1 and −1 surplus both odd
        cases["odd surplus"] = (kp - 1, n_plus + 1, n_minus + 1, 0.0)
    if n_plus >= 2:
        cases["+1 deficit"] = (kp + 1, n_plus - 2, n_minus, 0.0)
    if n_minus >= 2:
        cases["−1 deficit"] = (kp + 1, n_plus, n_minus - 2, 0.0)
    if field == "complex" and kp >= 1:
        cases["unpaired phases"] = (kp, n_plus, n_minus, 0.37)
    return cases


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("n", range(2, 7))
def test_member_rejects_single_condition_violations(field, n):
    rng = np.random.default_rng(n)
    rejected = 0
    for k in range(n + 1):
        for kp in range(min(k, n - k) + 1):
            for seed in range(3):
                angles = list(rng.uniform(0.3, 2.8, size=n))
                base = _from_spectrum(field, angles[:kp], n - k - kp, k - kp, seed)
                assert member_phi2(base, k, kp, field), (k, kp)
                for label, (p, plus, minus, drift) in _single_violations(n, k, kp, field).items():
                    z = _from_spectrum(field, angles[:p], plus, minus, seed, drift)
                    assert not member_phi2(z, k, kp, field), (label, k, kp)
                    rejected += 1
    assert rejected > 0


# ─── Canonical form and splitting ────────────────────────────────────────────

def test_canonical_identity():
    c = canonical_phi2(np.eye(4), 2, 2, "real")
    assert c.sigma == [0.0, 0.0]
    assert c.e == [1, 1]
    assert c.tail == (0, 0)
    np.testing.assert_allclose(c.q, np.eye(4))


def test_canonical_single_rotation():
    theta = 0.3
    c = canonical_phi2(rotation(2 * theta), 1, 1, "real")
    assert c.sigma == pytest.approx([np.sin(2 * theta)])
    assert c.e == [1]
    np.testing.assert_allclose(c.matrix(), rotation(2 * theta), atol=1e-12)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_canonical_quarter_turn_takes_positive_sign(field):
    # σ = 1 leaves cos φ at rounding level; the sign must not follow the noise
    for seed in range(200):
        if field == "real":
            q0 = group_sample("so", 3, seed)
            z = q0 @ scipy.linalg.block_diag(rotation(np.pi / 2), [[1.0]]) @ q0.T
        else:
            q0 = group_sample("su", 3, seed)
            z = q0 @ np.diag([1j, -1j, 1.0]) @ q0.conj().T
        c = canonical_phi2(z, 1, 1, field)
        assert c.e == [1]
        assert c.sigma == pytest.approx([1.0])
        assert np.linalg.norm(c.matrix() - z) <= 1e-9 * 3


@pytest.mark.parametrize("field", ["real", "complex"])
def test_canonical_recovers_parameters(field):
    sigma, e, tail = [0.9, 0.4, 0.4], [1, -1, 1], (1, 2)
    n = 2 * len(sigma) + sum(tail)
    q0 = gr_sample(field, 1, n, seed=1).m @ group_sample("so" if field == "real" else "su", n, 2)
    z = q0 @ canonical_middle(sigma, e, tail) @ q0.conj().T
    k, kp = len(sigma) + tail[1], len(sigma)
    c = canonical_phi2(z, k, kp, field)
    assert c.sigma == pytest.approx([0.9, 0.4, 0.4], abs=1e-9)
    assert c.e == [1, 1, -1]
    assert c.tail == tail
    assert np.linalg.norm(c.matrix() - z) <= 1e-9 * n


def test_canonical_rejects_non_member():
    with pytest.raises(NotMember):
        canonical_phi2(np.eye(4), 2, 1, "real")


def test_split_identity():
    x, y = split_phi2(np.eye(4), 2, 2, "real")
    np.testing.assert_allclose(x.m @ y.m, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(x.m, y.m, atol=1e-14)
    assert np.trace(x.m) == pytest.approx(0.0)


def test_split_complex_phase_pair():
    gamma = 0.8
    z = np.diag([np.exp(1j * gamma), np.exp(-1j * gamma)])
    x, y = split_phi2(z, 1, 1, "complex")
    np.testing.assert_allclose(x.m, [[0, 1], [1, 0]], atol=1e-14)
    np.testing.assert_allclose(y.m, [[0, np.exp(-1j * gamma)], [np.exp(1j * gamma), 0]], atol=1e-14)


@given(seed=st.integers(0, 10_000), field=st.sampled_from(["real", "complex"]), data=st.data())
@settings(max_examples=60, deadline=None)
def test_split_reconstructs_products(seed, field, data):
    n = data.draw(st.integers(2, 7))
    k = data.draw(st.integers(0, n))
    kp = data.draw(st.integers(0, n))
    x0 = gr_sample(field, k, n, seed)
    y0 = gr_sample(field, kp, n, seed + 1)
    z = x0.m @ y0.m
    x, y = split_phi2(z, k, kp, field)
    assert x.k == k and y.k == kp
    assert np.linalg.norm(x.m @ y.m - z) <= 1e-9 * n
    assert np.trace(x.m).real == pytest.approx(2 * k - n, abs=1e-9)
    assert np.trace(y.m).real == pytest.approx(2 * kp - n, abs=1e-9)


def test_split_real_member_of_phi_2_1():
    x0 = gr_sample("real", 2, 5, seed=17)
    y0 = gr_sample("real", 1, 5, seed=18)
    x, y = split_phi2(x0.m @ y0.m, 2, 1, "real")
    np.testing.assert_allclose(x.m @ y.m, x0.m @ y0.m, atol=1e-9)
    np.testing.assert_allclose(x.m, x.m.T, atol=1e-12)


# ─── Reflection length ───────────────────────────────────────────────────────

def test_reflection_length_identity():
    assert reflection_length(np.eye(4)) == 0


@pytest.mark.parametrize("n, k", [(4, 1), (5, 2), (6, 0), (3, 3)])
def test_reflection_length_of_grassmann_point(n, k):
    x = gr_sample("complex", k, n, seed=n + k)
    assert reflection_length(x.m) == n - k


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_reflection_length_witness(n):
    a = np.exp(2j * np.pi * (n - 1) / n) * np.eye(n)
    assert reflection_length(a) == 2 * n - 2


@given(seed=st.integers(0, 10_000), n=st.integers(2, 8))
@settings(max_examples=60, deadline=None)
def test_reflection_length_bounds_and_invariance(seed, n):
    a = group_sample("su", n, seed)
    length = reflection_length(a)
    assert 0 <= length <= 2 * n - 2
    q = group_sample("su", n, seed + 1)
    assert reflection_length(q @ a @ q.conj().T) == length
    b = group_sample("su", n, seed + 2)
    assert reflection_length(a @ b) <= length + reflection_length(b)
    assert reflection_length(group_sample("su-", n, seed)) <= 2 * n - 1


def test_reflection_length_rejects_general_unitary():
    with pytest.raises(NotSpecialOrAntiSpecial):
        reflection_length(np.diag([1j, 1.0]))


def test_length_upper_bound_examples():
    assert length_upper_bound(sig("complex", 4, 2, 2)) == 4
    assert length_upper_bound(sig("complex", 5, 2, 1, 1)) == 5
    assert length_upper_bound(sig("complex", 4, 2, 2, 2, 2)) == 8


# ─── Four-factor classification ──────────────────────────────────────────────

@pytest.mark.parametrize(
    "n, ks, expected",
    [
        (6, (3, 3, 3, 3), Phi4Class.SU),
        (6, (3, 3, 3, 2), Phi4Class.SU_MINUS),
        (6, (4, 2, 2, 2), Phi4Class.PROPER_SUBSET),
        (7, (3, 3, 3, 3), Phi4Class.SU),
        (7, (4, 3, 3, 3), Phi4Class.SU_MINUS),
        (6, (3, 3, 2, 2), Phi4Class.SU),
        (6, (3, 3, 3, 1), Phi4Class.SU),
        (4, (2, 2, 2, 0), Phi4Class.PROPER_SUBSET),
        (2, (1, 1, 1, 0), Phi4Class.PROPER_SUBSET),
    ],
)
def test_classify_table(n, ks, expected):
    assert classify_phi4_complex(sig("complex", n, *ks)) is expected


def _four_factor_table(n_max):
    """Signatures filling SU(n) or SU⁻(n), listed family by family."""
    table = {}
    for k in range(1, n_max // 2 + 1):
        table[(2 * k, (k, k, k, k))] = Phi4Class.SU
        if 2 * k + 1 <= n_max:
            table[(2 * k + 1, (k, k, k, k))] = Phi4Class.SU
            table[(2 * k + 1, (k + 1, k, k, k))] = Phi4Class.SU_MINUS
        if k >= 2:
            table[(2 * k, (k, k, k - 1, k - 1))] = Phi4Class.SU
            table[(2 * k, (k, k, k, k - 1))] = Phi4Class.SU_MINUS
        if k >= 3:
            table[(2 * k, (k, k, k, k - 2))] = Phi4Class.SU
    return table


def test_classify_matches_table_up_to_twelve():
    table = _four_factor_table(12)
    seen = 0
    for n in range(1, 13):
        for ks in itertools.combinations_with_replacement(range(n, -1, -1), 4):
            if ks[0] + ks[1] > n:
                continue
            got = classify_phi4_complex(sig("complex", n, *ks))
            assert got is table.get((n, ks), Phi4Class.PROPER_SUBSET), (n, ks)
            if got is not Phi4Class.PROPER_SUBSET:
                seen += 1
                # det of the product is ∏(−1)^{n−kᵢ}; a filling product also needs the dimension
                det_sign = (-1) ** sum(n - k for k in ks)
                assert det_sign == (1 if got is Phi4Class.SU else -1), (n, ks)
                assert sum(2 * k * (n - k) for k in ks) >= n * n - 1, (n, ks)
    assert seen == len(table)


def test_classify_requires_normalized_four_factor_signature():
    with pytest.raises(BadSignature):
        classify_phi4_complex(sig("complex", 6, 2, 3, 3, 3))
    with pytest.raises(BadSignature):
        classify_phi4_complex(sig("complex", 6, 3, 3, 3))
