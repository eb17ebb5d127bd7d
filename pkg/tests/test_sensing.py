"""Subgaussian laws, sensing vectors, the restricted measurement operator,
noise budgets, and serialization."""

import math

import numpy as np
import pytest

from toeprec import (
    MeasurementSet,
    ToeplitzVector,
    apply_operator,
    builtin_law,
    discrete_law,
    draw_noise,
    effective_matrix,
    effective_row,
    moment_audit,
    sample_vectors,
    sense,
    toeplitz_to_dense,
)
from toeprec.sensing import derive_seed, lag_sums, lp_norm, normalize_p, rng_from


# --- laws -------------------------------------------------------------------

def test_builtin_law_moments():
    assert builtin_law("gaussian").mu == 3.0
    assert builtin_law("rademacher").mu == 1.0
    assert builtin_law("uniform").mu == pytest.approx(9.0 / 5.0)


def test_builtin_law_k_bounds():
    # gaussian psi2 norm solves (1 - 2/t^2)^{-1/2} = 2
    assert builtin_law("gaussian").k_bound == pytest.approx(math.sqrt(8.0 / 3.0))
    assert builtin_law("rademacher").k_bound == pytest.approx(1.0 / math.sqrt(math.log(2.0)))
    assert builtin_law("uniform").k_bound == pytest.approx(math.sqrt(3.0 / math.log(2.0)))


def test_unknown_law_rejected():
    with pytest.raises(ValueError):
        builtin_law("cauchy")


def test_discrete_law_validation():
    # fair three-point law with unit variance
    v = math.sqrt(3.0 / 2.0)
    law = discrete_law([-v, 0.0, v], [1 / 3, 1 / 3, 1 / 3])
    assert law.mu == pytest.approx(1.5)
    assert law.k_bound == pytest.approx(v / math.sqrt(math.log(2.0)))
    with pytest.raises(ValueError):
        discrete_law([-1.0, 2.0], [0.5, 0.5])  # mean 0.5


# --- sampling ---------------------------------------------------------------

def test_sampling_deterministic():
    law = builtin_law("gaussian")
    a = sample_vectors(law, 8, 5, 42)
    b = sample_vectors(law, 8, 5, 42)
    c = sample_vectors(law, 8, 5, 43)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rademacher_support():
    xi = sample_vectors(builtin_law("rademacher"), 16, 64, 7)
    assert set(np.unique(xi)) == {-1.0, 1.0}


def test_gaussian_empirical_moments():
    xi = sample_vectors(builtin_law("gaussian"), 1000, 1000, 11).ravel()
    se = 1.0 / math.sqrt(xi.size)
    assert abs(xi.mean()) <= 5 * se
    assert abs(xi.var() - 1.0) <= 5 * math.sqrt(2.0) * se


def test_derive_seed_spreads():
    seeds = {derive_seed(1, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(1, 0) != derive_seed(2, 0)


# --- effective rows ----------------------------------------------------------

def test_effective_row_small_cases():
    assert np.allclose(effective_row(np.array([1.0, 2.0])), [5.0, 4.0], atol=1e-12)
    assert np.allclose(effective_row(np.array([1.0, 1.0, -1.0])), [3.0, 0.0, -2.0], atol=1e-12)


def test_effective_row_matches_dense_quadratic_form():
    rng = rng_from(21, 0)
    for _ in range(50):
        n = int(rng.integers(1, 48))
        xi = rng.standard_normal(n)
        t = ToeplitzVector(n=n, z=rng.standard_normal(n))
        dense = float(xi @ toeplitz_to_dense(t) @ xi)
        assert effective_row(xi) @ t.z == pytest.approx(dense, rel=1e-9, abs=1e-9)


def test_apply_operator_identity_and_zero():
    law = builtin_law("uniform")
    xi = sample_vectors(law, 12, 9, 3)
    t_id = ToeplitzVector(n=12, z=np.eye(12)[0])
    assert np.allclose(apply_operator(xi, t_id), (xi**2).sum(axis=1), rtol=1e-12)
    t_zero = ToeplitzVector(n=12, z=np.zeros(12))
    assert np.allclose(apply_operator(xi, t_zero), 0.0)


def test_apply_operator_dimension_mismatch():
    xi = sample_vectors(builtin_law("gaussian"), 8, 4, 0)
    with pytest.raises(ValueError):
        apply_operator(xi, ToeplitzVector(n=9, z=np.zeros(9)))


def test_lag_sums_matches_direct():
    rng = rng_from(22, 0)
    xi = rng.standard_normal((5, 17))
    out = lag_sums(xi)
    for k in range(5):
        for ell in range(17):
            direct = float(np.dot(xi[k, : 17 - ell], xi[k, ell:]))
            assert out[k, ell] == pytest.approx(direct, rel=1e-11, abs=1e-11)


# --- unbiasedness of the projected frame -------------------------------------

def test_projected_rank_one_unbiased():
    # E T(xi xi^T) = I: per-coordinate empirical mean within 5 se
    law = builtin_law("gaussian")
    n, trials = 6, 100_000
    xi = sample_vectors(law, n, trials, 99)
    sums = lag_sums(xi)
    coords = np.empty((trials, n))
    coords[:, 0] = sums[:, 0] / n
    coords[:, 1:] = sums[:, 1:] / (n - np.arange(1, n))
    target = np.zeros(n)
    target[0] = 1.0
    mean = coords.mean(axis=0)
    se = coords.std(axis=0, ddof=1) / math.sqrt(trials)
    assert np.all(np.abs(mean - target) <= 5 * se)


# --- noise -------------------------------------------------------------------

@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_noise_saturates_budget(p):
    e = draw_noise(40, 0.25, p, 17)
    assert lp_norm(e, p) == pytest.approx(0.25, rel=1e-12)


def test_noise_zero_eta():
    assert np.array_equal(draw_noise(10, 0.0, 2, 5), np.zeros(10))


def test_noise_scale_flag():
    e = draw_noise(10, 1.0, 2, 5, scale=0.5)
    assert lp_norm(e, 2) == pytest.approx(0.5, rel=1e-12)


def test_noise_isotropy():
    # coordinate correlations of the l2-sphere direction are near zero
    m, reps = 8, 4000
    samples = np.stack([draw_noise(m, 1.0, 2, derive_seed(31, i)) for i in range(reps)])
    corr = np.corrcoef(samples.T)
    off = corr[~np.eye(m, dtype=bool)]
    assert np.abs(off).max() <= 5.0 / math.sqrt(reps)


# --- moment audit -------------------------------------------------------------

def test_moment_audit_rademacher_exact():
    audit = moment_audit(builtin_law("rademacher"), 10_000, 1)
    assert audit.mu_hat == 1.0
    assert audit.var == pytest.approx(1.0)
    assert audit.tail_ok


def test_moment_audit_gaussian():
    audit = moment_audit(builtin_law("gaussian"), 1_000_000, 2)
    assert abs(audit.mu_hat - 3.0) <= 5 * audit.se_mu
    assert audit.tail_ok


def test_moment_audit_uniform():
    audit = moment_audit(builtin_law("uniform"), 200_000, 3)
    assert abs(audit.mu_hat - 1.8) <= 5 * audit.se_mu
    assert audit.tail_ok


def test_moment_audit_needs_samples():
    with pytest.raises(ValueError):
        moment_audit(builtin_law("gaussian"), 100, 1)


# --- measurement sets ---------------------------------------------------------

def _truth(n=10):
    rng = rng_from(8, 2)
    z = rng.standard_normal(n)
    return ToeplitzVector(n=n, z=z)


def test_sense_reproducible():
    law = builtin_law("gaussian")
    t = _truth()
    a = sense(t, law, 7, 0.1, 2, 123)
    b = sense(t, law, 7, 0.1, 2, 123)
    assert np.array_equal(a.xi, b.xi) and np.array_equal(a.b, b.b) and np.array_equal(a.e, b.e)


def test_sense_budget_and_consistency():
    law = builtin_law("rademacher")
    t = _truth()
    ms = sense(t, law, 9, 0.05, 1, 7)
    assert lp_norm(ms.e, 1) <= 0.05 * (1 + 1e-12)
    assert np.allclose(ms.b - ms.e, apply_operator(ms.xi, t), rtol=1e-12)


def test_measurement_json_roundtrip_materialized():
    law = builtin_law("uniform")
    ms = sense(_truth(), law, 6, 0.2, math.inf, 99)
    back = MeasurementSet.from_json(ms.to_json())
    assert np.array_equal(back.xi, ms.xi)
    assert np.array_equal(back.b, ms.b)
    assert back.p == math.inf and back.eta == 0.2


def test_measurement_json_roundtrip_lazy():
    law = builtin_law("gaussian")
    ms = sense(_truth(), law, 6, 0.0, 2, 4, materialized=False)
    text = ms.to_json()
    assert '"xi"' not in text
    back = MeasurementSet.from_json(text)
    assert np.array_equal(back.xi, ms.xi)  # regenerated from (seed, law, shape)


def test_normalize_p():
    assert normalize_p("inf") == math.inf
    assert normalize_p("1") == 1
    with pytest.raises(ValueError):
        normalize_p(3)
