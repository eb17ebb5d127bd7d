"""Core Toeplitz algebra: construction, projection, circulant embedding,
spectral primitives, spike models."""

import numpy as np
import pytest

from toeprec import (
    CirculantSpectrum,
    SpikeModel,
    ToeplitzVector,
    circulant_embed,
    frobenius_weights,
    nuclear_norm,
    numerical_rank,
    opnorm_exact,
    opnorm_upper,
    project_toeplitz,
    spike_toeplitz,
    sym_eig,
    toeplitz_to_dense,
    weighted_norm,
)
from toeprec.sensing import rng_from
from toeprec.toeplitz import diagonal_sums, require_symmetric


def tvec(*z):
    z = np.asarray(z, dtype=float)
    return ToeplitzVector(n=z.size, z=z)


def random_tvec(n, rng):
    return ToeplitzVector(n=n, z=rng.standard_normal(n))


def dense_circulant(t):
    """Oracle: explicit (2n-1) x (2n-1) circulant containing Toep(z)."""
    n = t.n
    first = np.concatenate([t.z, t.z[-1:0:-1]])
    size = 2 * n - 1
    C = np.empty((size, size))
    for i in range(size):
        C[i] = np.roll(first, i)
    return C


# --- construction ---------------------------------------------------------

def test_dense_2x2():
    assert toeplitz_to_dense(tvec(3.0, 5.0)).tolist() == [[3, 5], [5, 3]]


def test_dense_identity():
    assert np.array_equal(toeplitz_to_dense(tvec(1, 0, 0)), np.eye(3))


def test_dense_alternating_rank2():
    M = toeplitz_to_dense(tvec(1, 0, -1, 0))
    assert np.array_equal(M[:, 2], -M[:, 0])
    assert numerical_rank(M) == 2


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        ToeplitzVector(n=2, z=np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        ToeplitzVector(n=3, z=np.array([1.0, 2.0]))


# --- projection -----------------------------------------------------------

def test_project_diagonal_averages():
    t = project_toeplitz(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert t.z.tolist() == [2.5, 2.0]


@pytest.mark.parametrize("n", [2, 3, 7, 16])
def test_project_coordinate_rank_one_is_scaled_identity(n):
    # T(e_i e_i^T) = I/n for every i, bitwise
    expected = np.zeros(n)
    expected[0] = 1.0 / n
    for i in range(n):
        M = np.zeros((n, n))
        M[i, i] = 1.0
        assert np.array_equal(project_toeplitz(M).z, expected)


def test_project_idempotent_exactly():
    rng = rng_from(1, 0)
    for n in (2, 3, 5, 11, 33):
        t = random_tvec(n, rng)
        back = project_toeplitz(toeplitz_to_dense(t))
        assert np.array_equal(back.z, t.z)


def test_project_rejects_asymmetric():
    M = np.array([[1.0, 2.0], [2.1, 1.0]])
    with pytest.raises(ValueError):
        project_toeplitz(M)


def test_projection_orthogonality_and_contraction():
    rng = rng_from(2, 0)
    for _ in range(50):
        n = int(rng.integers(2, 20))
        M = rng.standard_normal((n, n))
        M = 0.5 * (M + M.T)
        t = project_toeplitz(M)
        resid = M - toeplitz_to_dense(t)
        probe = toeplitz_to_dense(random_tvec(n, rng))
        scale = max(1.0, np.linalg.norm(M, "fro") * np.linalg.norm(probe, "fro"))
        assert abs(np.sum(resid * probe)) <= 1e-9 * scale
        assert weighted_norm(t) <= np.linalg.norm(M, "fro") * (1 + 1e-12)


# --- weights --------------------------------------------------------------

def test_weights_small_cases():
    assert frobenius_weights(3).tolist() == [3.0, 4.0, 2.0]
    assert frobenius_weights(1).tolist() == [1.0]


def test_weighted_norm_matches_dense_oracle():
    rng = rng_from(3, 0)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        t = random_tvec(n, rng)
        dense = np.linalg.norm(toeplitz_to_dense(t), "fro")
        assert weighted_norm(t) == pytest.approx(dense, rel=1e-10)


def test_diagonal_sums_is_adjoint():
    rng = rng_from(4, 0)
    for _ in range(20):
        n = int(rng.integers(2, 16))
        M = rng.standard_normal((n, n))
        t = random_tvec(n, rng)
        lhs = float(np.sum(M * toeplitz_to_dense(t)))
        rhs = float(diagonal_sums(M) @ t.z)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# --- circulant embedding --------------------------------------------------

def test_circulant_identity():
    spec = circulant_embed(tvec(1, 0, 0, 0))
    assert np.allclose(spec.lam, 1.0, atol=1e-12)


def test_circulant_n2_explicit():
    spec = circulant_embed(tvec(1, 1))
    assert np.allclose(np.sort(spec.lam)[::-1], [3.0, 0.0, 0.0], atol=1e-12)


def test_circulant_matches_dense_eigensolver():
    rng = rng_from(5, 0)
    for _ in range(40):
        n = int(rng.integers(2, 24))
        t = random_tvec(n, rng)
        spec = circulant_embed(t)
        oracle = np.linalg.eigvalsh(dense_circulant(t))
        assert np.allclose(np.sort(spec.lam), oracle, atol=1e-10)


def test_circulant_trace_identity():
    rng = rng_from(6, 0)
    for _ in range(20):
        n = int(rng.integers(2, 24))
        t = random_tvec(n, rng)
        spec = circulant_embed(t)
        assert spec.lam.sum() == pytest.approx((2 * n - 1) * t.z[0], rel=1e-10, abs=1e-10)


def test_circulant_length_invariant():
    with pytest.raises(ValueError):
        CirculantSpectrum(n=3, lam=np.zeros(4))


def test_opnorm_upper_dominates():
    rng = rng_from(7, 0)
    assert opnorm_upper(tvec(1, 0, 0)) == pytest.approx(1.0)
    # eigenvalues of [[1,1],[1,1]] are {2, 0}; the circulant bound is 3
    assert opnorm_upper(tvec(1, 1)) == pytest.approx(3.0)
    assert opnorm_exact(tvec(1, 1)) == pytest.approx(2.0)
    for _ in range(100):
        n = int(rng.integers(2, 32))
        t = random_tvec(n, rng)
        assert opnorm_upper(t) >= opnorm_exact(t) - 1e-10


# --- symmetric eigendecomposition -----------------------------------------

def test_sym_eig_diagonal_cases():
    w, _ = sym_eig(np.eye(3))
    assert np.allclose(w, 1.0)
    w, _ = sym_eig(np.diag([3.0, 1.0, -2.0]))
    assert w.tolist() == [3.0, 1.0, -2.0]


def test_sym_eig_reconstruction_and_orthonormality():
    rng = rng_from(8, 0)
    for _ in range(20):
        n = int(rng.integers(2, 30))
        M = rng.standard_normal((n, n))
        M = 0.5 * (M + M.T)
        w, V = sym_eig(M)
        assert np.all(np.diff(w) <= 1e-12)
        assert np.linalg.norm(M @ V - V * w, "fro") <= 1e-9 * max(np.linalg.norm(M, "fro"), 1e-30)
        assert np.abs(V.T @ V - np.eye(n)).max() <= 1e-10


def test_sym_eig_sign_convention_reproducible():
    rng = rng_from(9, 0)
    M = rng.standard_normal((6, 6))
    M = 0.5 * (M + M.T)
    w1, V1 = sym_eig(M)
    w2, V2 = sym_eig(M.copy())
    assert np.array_equal(V1, V2)
    for k in range(6):
        first = V1[np.abs(V1[:, k]) > 1e-12, k][0]
        assert first > 0


def test_sym_eig_rejects_nonfinite():
    M = np.full((2, 2), np.inf)
    with pytest.raises(ValueError):
        sym_eig(M)


# --- nuclear norm ----------------------------------------------------------

def test_nuclear_norm_cases():
    assert nuclear_norm(np.eye(5)) == pytest.approx(5.0)
    assert nuclear_norm(np.diag([3.0, 1.0, -2.0])) == pytest.approx(6.0)
    rng = rng_from(10, 0)
    u = rng.standard_normal(7)
    assert nuclear_norm(np.outer(u, u)) == pytest.approx(float(u @ u), rel=1e-10)


# --- spike models ----------------------------------------------------------

def test_spike_constant_rank_one():
    t = spike_toeplitz(SpikeModel(spikes=((0.0, 1.0),)), 5)
    assert np.allclose(t.z, 1.0)
    assert numerical_rank(toeplitz_to_dense(t)) == 1


def test_spike_quarter_frequency():
    t = spike_toeplitz(SpikeModel(spikes=((0.25, 1.0),)), 4)
    assert np.allclose(t.z, [1.0, 0.0, -1.0, 0.0], atol=1e-12)
    assert numerical_rank(toeplitz_to_dense(t)) == 2


def test_spike_two_frequencies_rank4():
    model = SpikeModel(spikes=((0.1, 1.0), (0.3, 2.0)))
    t = spike_toeplitz(model, 32)
    assert model.rank() == 4
    assert numerical_rank(toeplitz_to_dense(t)) == 4


def test_spike_rank_formula_random_models():
    rng = rng_from(11, 0)
    n = 48
    for _ in range(20):
        k = int(rng.integers(1, 4))
        freqs = []
        while len(freqs) < k:
            f = float(rng.uniform(1.0 / n, 0.5 - 1.0 / n))
            if all(abs(f - g) >= 1.0 / n for g in freqs):
                freqs.append(f)
        spikes = [(f, float(rng.uniform(0.5, 2.0))) for f in freqs]
        if rng.integers(0, 2):
            spikes.append((0.0, 1.0))
        model = SpikeModel(spikes=tuple(spikes))
        t = spike_toeplitz(model, n)
        assert numerical_rank(toeplitz_to_dense(t)) == model.rank()


def test_spike_model_validation():
    with pytest.raises(ValueError):
        SpikeModel(spikes=((0.1, 1.0), (0.1, 2.0)))
    with pytest.raises(ValueError):
        SpikeModel(spikes=((0.1, -1.0),))
    with pytest.raises(ValueError):
        SpikeModel(spikes=((0.7, 1.0),))


# --- misc ------------------------------------------------------------------

def test_require_symmetric_tolerance_scales():
    M = np.array([[1.0, 1.0], [1.0 + 5e-13, 1.0]])
    require_symmetric(M)  # inside tolerance
    M[1, 0] = 1.0 + 1e-10
    with pytest.raises(ValueError):
        require_symmetric(M)


def test_json_roundtrip():
    t = tvec(1.5, -2.25, 0.125)
    back = ToeplitzVector.from_json(t.to_json())
    assert back.n == t.n and np.array_equal(back.z, t.z)
