"""Subgaussian sensing: scalar laws, rank-one sensing vectors, the measurement
operator restricted to Toeplitz arguments, and lp-budgeted noise.

Randomness is counter-based (Philox keyed by (seed, stream)), so every
consumer owns an independent, order-free stream and identical seeds always
reproduce identical draws.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .toeplitz import ToeplitzVector

_MASK64 = (1 << 64) - 1

# Exact psi2 norm of a standard gaussian: E exp(x^2/t^2) = (1-2/t^2)^{-1/2} = 2
# at t^2 = 8/3.
K_GAUSSIAN = math.sqrt(8.0 / 3.0)
# Exact psi2 norm of a Rademacher sign: exp(1/t^2) = 2 at t = 1/sqrt(log 2).
K_RADEMACHER = 1.0 / math.sqrt(math.log(2.0))
# For any |x| <= M, E exp(x^2/t^2) <= exp(M^2/t^2), so t = M/sqrt(log 2) is a
# valid psi2 bound; applied to uniform[-sqrt(3), sqrt(3)] and discrete laws.
K_UNIFORM = math.sqrt(3.0) / math.sqrt(math.log(2.0))

BUILTIN_KINDS = ("gaussian", "rademacher", "uniform")


def rng_from(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for the (seed, stream) pair."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & _MASK64, int(stream) & _MASK64]))


def derive_seed(base_seed: int, index: int) -> int:
    """SplitMix64 mix of (base_seed, index); order-free per-trial seeds."""
    x = (int(base_seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SubgaussianLaw:
    """Zero-mean unit-variance scalar law with fourth moment mu and a valid
    subgaussian-norm bound k_bound."""

    kind: str
    mu: float
    k_bound: float
    values: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        if self.mu < 1.0:
            raise ValueError("fourth moment mu must be >= 1")
        if self.k_bound <= 0.0:
            raise ValueError("k_bound must be positive")

    @property
    def id(self) -> str:
        return self.kind

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "mu": self.mu, "k_bound": self.k_bound}
        if self.kind == "discrete":
            doc["values"] = list(self.values)
            doc["probs"] = list(self.probs)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SubgaussianLaw":
        kind = doc["kind"]
        if kind == "discrete":
            return discrete_law(doc["values"], doc["probs"])
        return builtin_law(kind)


def builtin_law(kind: str) -> SubgaussianLaw:
    """One of the built-in laws: gaussian (mu=3), rademacher (mu=1), or
    uniform on [-sqrt(3), sqrt(3)] (mu=9/5)."""
    if kind == "gaussian":
        return SubgaussianLaw(kind="gaussian", mu=3.0, k_bound=K_GAUSSIAN)
    if kind == "rademacher":
        return SubgaussianLaw(kind="rademacher", mu=1.0, k_bound=K_RADEMACHER)
    if kind == "uniform":
        return SubgaussianLaw(kind="uniform", mu=9.0 / 5.0, k_bound=K_UNIFORM)
    raise ValueError(f"unsupported law kind {kind!r}")


def discrete_law(values, probs) -> SubgaussianLaw:
    """Finite-support law; must already be centered with unit variance."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if v.shape != p.shape or v.ndim != 1:
        raise ValueError("values and probs must be 1-d with matching length")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probs must be nonnegative and sum to 1")
    mean = float(p @ v)
    var = float(p @ v**2)
    if abs(mean) > 1e-12 or abs(var - 1.0) > 1e-12:
        raise ValueError(f"discrete law must have mean 0, variance 1 (got {mean:.2e}, {var:.6f})")
    mu = float(p @ v**4)
    k_bound = float(np.abs(v).max()) / math.sqrt(math.log(2.0))
    return SubgaussianLaw(kind="discrete", mu=mu, k_bound=k_bound,
                          values=tuple(v.tolist()), probs=tuple(p.tolist()))


def sample_scalars(law: SubgaussianLaw, shape, rng: np.random.Generator) -> np.ndarray:
    if law.kind == "gaussian":
        return rng.standard_normal(shape)
    if law.kind == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape).astype(float) - 1.0
    if law.kind == "uniform":
        r = math.sqrt(3.0)
        return rng.uniform(-r, r, size=shape)
    if law.kind == "discrete":
        return rng.choice(np.asarray(law.values), size=shape, p=np.asarray(law.probs))
    raise ValueError(f"unsupported law kind {law.kind!r}")


def sample_vectors(law: SubgaussianLaw, n: int, m: int, seed: int) -> np.ndarray:
    """m sensing vectors of length n with i.i.d. entries from the law."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    return sample_scalars(law, (m, n), rng_from(seed, 0))


def lag_sums(xi: np.ndarray) -> np.ndarray:
    """Row-wise autocorrelations: out[k, l] = sum_i xi[k, i] * xi[k, i+l].

    Computed by FFT with zero padding; linear, not circular.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    n = xi.shape[1]
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xi, nfft, axis=1)
    return np.fft.irfft(f * np.conj(f), nfft, axis=1)[:, :n]


def effective_row(xi_k) -> np.ndarray:
    """Coordinates of <xi xi^T, Toep(.)>: row[0] = sum xi_i^2 and
    row[l] = 2 sum_i xi_i xi_{i+l}."""
    row = lag_sums(np.asarray(xi_k, dtype=float)[None, :])[0]
    row[1:] *= 2.0
    return row


def effective_matrix(xi: np.ndarray) -> np.ndarray:
    """Stack of effective rows; (A z)_k = <xi_k xi_k^T, Toep(z)>."""
    A = lag_sums(xi)
    A[:, 1:] *= 2.0
    return A


def apply_operator(xi: np.ndarray, t: ToeplitzVector) -> np.ndarray:
    """Measurement values <xi_k xi_k^T, Toep(z)> for all k."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[1] != t.n:
        raise ValueError(f"sensing vectors have dimension {xi.shape}, expected (m, {t.n})")
    return effective_matrix(xi) @ t.z


def lp_norm(v: np.ndarray, p) -> float:
    p = normalize_p(p)
    if v.size == 0:
        return 0.0
    if p == 1:
        return float(np.abs(v).sum())
    if p == 2:
        return float(np.linalg.norm(v))
    return float(np.abs(v).max())


def normalize_p(p):
    """Accept 1, 2, inf or their string forms; anything else is rejected."""
    if p in (1, "1"):
        return 1
    if p in (2, "2"):
        return 2
    if p in (math.inf, np.inf, "inf"):
        return math.inf
    raise ValueError(f"p must be one of 1, 2, inf (got {p!r})")


def p_to_string(p) -> str:
    p = normalize_p(p)
    return "inf" if p == math.inf else str(p)


def draw_noise(m: int, eta: float, p, seed: int, scale: float = 1.0) -> np.ndarray:
    """Noise on the lp-sphere of radius scale * eta.

    The direction comes from normalizing a spherically symmetric gaussian
    draw in the lp norm; scale < 1 leaves slack in the budget.
    """
    p = normalize_p(p)
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    if not 0.0 <= scale <= 1.0:
        raise ValueError("scale must lie in [0, 1]")
    radius = scale * eta
    if radius == 0.0 or m == 0:
        return np.zeros(m)
    g = rng_from(seed, 1).standard_normal(m)
    return radius * g / lp_norm(g, p)


@dataclass(frozen=True)
class MomentAudit:
    mean: float
    var: float
    mu_hat: float
    se_mean: float
    se_var: float
    se_mu: float
    tail_ok: bool
    tail_table: tuple


def moment_audit(law: SubgaussianLaw, sample_count: int, seed: int,
                 t_grid=None, slack: float = 0.05) -> MomentAudit:
    """Empirical check of the moment contract and the subgaussian tail.

    tail_ok records whether P(|xi| > t) <= 2 exp(-t^2 / k_bound^2) (1 + slack)
    on the t-grid.
    """
    if sample_count < 10_000:
        raise ValueError("need at least 1e4 samples for a meaningful audit")
    x = sample_scalars(law, sample_count, rng_from(seed, 0))
    x2 = x * x
    x4 = x2 * x2
    mean = float(x.mean())
    var = float(x2.mean()) - mean**2
    mu_hat = float(x4.mean())
    rootN = math.sqrt(sample_count)
    se_mean = float(x.std()) / rootN
    se_var = float(x2.std()) / rootN
    se_mu = float(x4.std()) / rootN
    if t_grid is None:
        t_grid = np.linspace(0.5, 3.0, 6)
    rows = []
    ok = True
    for t in np.asarray(t_grid, dtype=float):
        emp = float(np.mean(np.abs(x) > t))
        bound = 2.0 * math.exp(-(t / law.k_bound) ** 2)
        # binomial error on the empirical tail
        se_tail = math.sqrt(max(emp * (1 - emp), 1e-12) / sample_count)
        row_ok = emp <= bound * (1.0 + slack) + 5.0 * se_tail
        ok = ok and row_ok
        rows.append((float(t), emp, bound, row_ok))
    return MomentAudit(mean=mean, var=var, mu_hat=mu_hat, se_mean=se_mean,
                       se_var=se_var, se_mu=se_mu, tail_ok=ok, tail_table=tuple(rows))


@dataclass(frozen=True)
class MeasurementSet:
    """Sensing vectors, observations b = A(X0) + e, and the noise budget."""

    n: int
    m: int
    xi: np.ndarray
    b: np.ndarray
    e: np.ndarray
    eta: float
    p: object
    seed: int
    law: SubgaussianLaw
    materialized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "p", normalize_p(self.p))
        for name in ("xi", "b", "e"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.xi.shape != (self.m, self.n):
            raise ValueError("xi must have shape (m, n)")
        if self.b.shape != (self.m,) or self.e.shape != (self.m,):
            raise ValueError("b and e must have length m")
        if lp_norm(self.e, self.p) > self.eta * (1 + 1e-12) + 1e-300:
            raise ValueError("noise exceeds the stated budget")

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "m": self.m,
            "p": p_to_string(self.p),
            "eta": self.eta,
            "seed": self.seed,
            "law": self.law.to_dict(),
            "b": self.b.tolist(),
            "e": self.e.tolist(),
            "materialized": bool(self.materialized),
        }
        if self.materialized:
            doc["xi"] = self.xi.ravel().tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementSet":
        doc = json.loads(text)
        n, m = int(doc["n"]), int(doc["m"])
        law = SubgaussianLaw.from_dict(doc["law"])
        materialized = bool(doc.get("materialized", True))
        if materialized:
            xi = np.asarray(doc["xi"], dtype=float).reshape(m, n)
        else:
            xi = sample_vectors(law, n, m, int(doc["seed"]))
        return cls(n=n, m=m, xi=xi,
                   b=np.asarray(doc["b"], dtype=float),
                   e=np.asarray(doc["e"], dtype=float),
                   eta=float(doc["eta"]), p=doc["p"], seed=int(doc["seed"]),
                   law=law, materialized=materialized)


def sense(truth: ToeplitzVector, law: SubgaussianLaw, m: int, eta: float, p,
          seed: int, noise_scale: float = 1.0, materialized: bool = True) -> MeasurementSet:
    """Draw sensing vectors and observations for a Toeplitz ground truth.

    Streams: (seed, 0) feeds the sensing vectors, (seed, 1) the noise, so the
    whole set is reproducible from (seed, law, truth).
    """
    xi = sample_vectors(law, truth.n, m, seed)
    e = draw_noise(m, eta, p, seed, scale=noise_scale)
    b = apply_operator(xi, truth) + e
    return MeasurementSet(n=truth.n, m=m, xi=xi, b=b, e=e, eta=eta, p=p,
                          seed=seed, law=law, materialized=materialized)
