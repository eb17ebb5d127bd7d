"""Monte-Carlo verification harness.

Every quantitative ingredient of the recovery analysis gets an empirical
probe here: quadratic-form moment identities, Hanson-Wright tails, the
small-ball function over Toeplitz directions, descent-cone geometry, spectral
norm scaling of the summed Toeplitz projections of rank-one frames,
minimum-conic-singular-value probes, recovery phase transitions, and
noise-error scaling.

All experiments are pure functions of (parameters, seed): per-trial streams
derive from counter-based generators keyed (seed, trial), so trials are
order-free and safely parallelizable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .sensing import (
    SubgaussianLaw,
    builtin_law,
    derive_seed,
    effective_matrix,
    lag_sums,
    lp_norm,
    moment_audit,
    normalize_p,
    rng_from,
    sample_scalars,
    sample_vectors,
    sense,
)
from .solver import SolverConfig, project_lp_ball, recover_measurements, svt
from .toeplitz import (
    RANK_RTOL,
    SpikeModel,
    ToeplitzVector,
    frobenius_weights,
    nuclear_norm,
    opnorm_exact,
    opnorm_upper,
    project_toeplitz,
    spike_toeplitz,
    sym_eig,
    toeplitz_to_dense,
    weighted_norm,
)

MEMBERSHIP_TOL = 1e-9
DESCENT_BOUND = math.sqrt(2.0) + 1.0


# ---------------------------------------------------------------------------
# direction and ground-truth sampling
# ---------------------------------------------------------------------------

def random_unit_toeplitz(n: int, rng: np.random.Generator,
                         z0: float | None = None) -> ToeplitzVector:
    """Unit-Frobenius Toeplitz direction, isotropic under the weighted metric.

    With z0 fixed, the remaining diagonals are drawn isotropically and
    rescaled so the total weighted norm is exactly 1 (requires |z0| <= 1/sqrt(n)).
    """
    c = frobenius_weights(n)
    if z0 is None:
        g = rng.standard_normal(n)
        v = g / np.sqrt(c)
        return ToeplitzVector(n=n, z=v / math.sqrt(float(np.sum(c * v * v))))
    if n * z0 * z0 > 1.0 + 1e-12:
        raise ValueError("|z0| may not exceed 1/sqrt(n) for a unit direction")
    tail_sq = max(1.0 - n * z0 * z0, 0.0)
    z = np.zeros(n)
    z[0] = z0
    if n > 1 and tail_sq > 0.0:
        g = rng.standard_normal(n - 1)
        z[1:] = (g / np.sqrt(c[1:])) * (math.sqrt(tail_sq) / np.linalg.norm(g))
    return ToeplitzVector(n=n, z=z)


def random_spike_model(r: int, n: int, rng: np.random.Generator,
                       amp_range=(0.5, 1.5), max_tries: int = 1000) -> SpikeModel:
    """Random rank-r spike model with frequencies separated by at least 1/n.

    Even r uses r/2 interior frequencies; odd r adds the f=0 boundary spike.
    """
    if r < 1:
        raise ValueError("rank must be >= 1")
    pairs = r // 2
    if 2 * pairs + 2 > n:
        raise ValueError(f"rank {r} too large for n={n}")
    lo, hi = 1.0 / n, 0.5 - 1.0 / n
    for _ in range(max_tries):
        freqs = np.sort(rng.uniform(lo, hi, size=pairs))
        if pairs <= 1 or np.min(np.diff(freqs)) >= 1.0 / n:
            break
    else:
        raise RuntimeError("could not separate spike frequencies")
    amps = rng.uniform(amp_range[0], amp_range[1], size=pairs + (r % 2))
    spikes = [(float(f), float(d)) for f, d in zip(freqs, amps)]
    if r % 2:
        spikes.append((0.0, float(amps[-1])))
    return SpikeModel(spikes=tuple(spikes))


def unit_spike_truth(r: int, n: int, rng: np.random.Generator) -> ToeplitzVector:
    """Random rank-r spike ground truth normalized to unit Frobenius norm."""
    t = spike_toeplitz(random_spike_model(r, n, rng), n)
    return ToeplitzVector(n=n, z=t.z / weighted_norm(t))


# ---------------------------------------------------------------------------
# quadratic-form sampling shared by the moment / tail / small-ball probes
# ---------------------------------------------------------------------------

def _iter_effective_rows(law: SubgaussianLaw, n: int, trials: int,
                         rng: np.random.Generator):
    """Yield chunks of effective rows; chunk @ z gives quadratic-form samples."""
    chunk = max(1, 8_000_000 // n)
    left = trials
    while left > 0:
        take = min(chunk, left)
        xi = sample_scalars(law, (take, n), rng)
        E = lag_sums(xi)
        E[:, 1:] *= 2.0
        yield E
        left -= take


def _toeplitz_moment_terms(t: ToeplitzVector, mu: float) -> tuple[float, float, float]:
    """(trace, sum of squared diagonal entries, closed-form second moment)."""
    n = t.n
    z0 = float(t.z[0])
    fro_sq = weighted_norm(t) ** 2
    trace = n * z0
    diag_sq = n * z0 * z0
    closed = trace**2 + (mu - 1.0) * diag_sq + 2.0 * (fro_sq - diag_sq)
    return trace, fro_sq, closed


@dataclass(frozen=True)
class MomentIdentityReport:
    law_id: str
    trials: int
    empirical: float
    closed_form: float
    std_err: float

    @property
    def deviation_se(self) -> float:
        if self.std_err == 0.0:
            return 0.0 if self.empirical == self.closed_form else math.inf
        return abs(self.empirical - self.closed_form) / self.std_err


def moment_identity_check(law: SubgaussianLaw, t: ToeplitzVector, trials: int,
                          seed: int) -> MomentIdentityReport:
    """Empirical E|xi^T Z xi|^2 against the closed form
    (Tr Z)^2 + (mu - 1) sum Z_ii^2 + 2 sum_{i != j} Z_ij^2."""
    if trials < 10_000:
        raise ValueError("need at least 1e4 trials")
    _, _, closed = _toeplitz_moment_terms(t, law.mu)
    s1 = s2 = 0.0
    rng = rng_from(seed, 0)
    for E in _iter_effective_rows(law, t.n, trials, rng):
        q2 = (E @ t.z) ** 2
        s1 += float(q2.sum())
        s2 += float((q2 * q2).sum())
    emp = s1 / trials
    var = max(s2 / trials - emp * emp, 0.0)
    return MomentIdentityReport(law_id=law.id, trials=trials, empirical=emp,
                                closed_form=closed, std_err=math.sqrt(var / trials))


@dataclass(frozen=True)
class FourthMomentReport:
    law_id: str
    trials: int
    empirical: float
    reference: float
    ratio: float
    std_err: float


def fourth_moment_bound_check(law: SubgaussianLaw, t: ToeplitzVector, trials: int,
                              seed: int) -> FourthMomentReport:
    """Ratio of empirical E|xi^T Z xi|^4 to (Tr Z)^4 + K^8 ||Z||_F^4."""
    if trials < 100_000:
        raise ValueError("need at least 1e5 trials")
    trace, fro_sq, _ = _toeplitz_moment_terms(t, law.mu)
    reference = trace**4 + law.k_bound**8 * fro_sq**2
    s4 = s8 = 0.0
    rng = rng_from(seed, 0)
    for E in _iter_effective_rows(law, t.n, trials, rng):
        q4 = (E @ t.z) ** 4
        s4 += float(q4.sum())
        s8 += float((q4 * q4).sum())
    emp = s4 / trials
    var = max(s8 / trials - emp * emp, 0.0)
    ratio = 0.0 if reference == 0.0 else emp / reference
    return FourthMomentReport(law_id=law.id, trials=trials, empirical=emp,
                              reference=reference, ratio=ratio,
                              std_err=math.sqrt(var / trials))


@dataclass(frozen=True)
class HansonWrightAudit:
    law_id: str
    trials: int
    fro_norm: float
    op_norm: float
    rows: tuple  # (t, empirical_tail, bound_exponent, implied_c)
    fitted_c: float
    monotone: bool


def hanson_wright_audit(law: SubgaussianLaw, t: ToeplitzVector, trials: int,
                        t_grid, seed: int) -> HansonWrightAudit:
    """Empirical tails of xi^T Z xi - E against the concentration shape
    2 exp(-c min(t^2 / (K^4 ||Z||_F^2), t / (K^2 ||Z||_op))).

    fitted_c is the largest c for which the bound holds on the whole grid.
    """
    Z_fro = weighted_norm(t)
    Z_op = opnorm_exact(t)
    mean_q = t.n * float(t.z[0])  # E xi^T Z xi = Tr Z
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    counts = np.zeros(t_grid.size)
    rng = rng_from(seed, 0)
    for E in _iter_effective_rows(law, t.n, trials, rng):
        dev = np.abs(E @ t.z - mean_q)
        counts += (dev[:, None] > t_grid[None, :]).sum(axis=0)
    tails = counts / trials
    rows = []
    fitted_c = math.inf
    for tv, tail in zip(t_grid, tails):
        if Z_fro == 0.0:
            g = math.inf
        else:
            g = min(tv**2 / (law.k_bound**4 * Z_fro**2),
                    tv / (law.k_bound**2 * Z_op))
        implied = math.inf if tail == 0.0 or g == 0.0 else math.log(2.0 / tail) / g
        fitted_c = min(fitted_c, implied)
        rows.append((float(tv), float(tail), float(g), float(implied)))
    monotone = bool(np.all(np.diff(tails) <= 0.0))
    return HansonWrightAudit(law_id=law.id, trials=trials, fro_norm=Z_fro,
                             op_norm=Z_op, rows=tuple(rows), fitted_c=fitted_c,
                             monotone=monotone)


# ---------------------------------------------------------------------------
# small-ball probability over Toeplitz directions
# ---------------------------------------------------------------------------

def small_ball_bound_shape(law: SubgaussianLaw, alpha: float) -> float:
    """(1 - alpha)^2 min{4/K^8, (mu / (1 + K^4))^2, 1}."""
    K = law.k_bound
    return (1.0 - alpha) ** 2 * min(4.0 / K**8, (law.mu / (1.0 + K**4)) ** 2, 1.0)


@dataclass(frozen=True)
class SmallBallPoint:
    z0: float
    min_prob: float
    mean_prob: float


@dataclass(frozen=True)
class SmallBallCurve:
    law_id: str
    n: int
    alpha: float
    directions: int
    trials: int
    points: tuple
    bound_shape: float

    @property
    def fitted_constant(self) -> float:
        """Largest c with every estimate >= c * bound_shape."""
        worst = min(p.min_prob for p in self.points)
        return worst / self.bound_shape

    @property
    def min_prob(self) -> float:
        return min(p.min_prob for p in self.points)


def small_ball_estimate(law: SubgaussianLaw, alpha: float, n: int, z0_grid,
                        per_z0_directions: int, trials: int, seed: int) -> SmallBallCurve:
    """Estimate P(|xi^T Z xi| >= alpha) over unit Toeplitz directions with the
    diagonal value pinned to each z0 in the grid; reports the per-z0 minimum
    over sampled directions."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    z0_grid = np.asarray(z0_grid, dtype=float)
    if z0_grid.size == 0:
        raise ValueError("z0 grid must be nonempty")
    if per_z0_directions < 1 or trials < 1:
        raise ValueError("need at least one direction and one trial")
    points = []
    for i, z0 in enumerate(z0_grid):
        dir_rng = rng_from(derive_seed(seed, i), 0)
        dirs = [random_unit_toeplitz(n, dir_rng, z0=float(z0))
                for _ in range(per_z0_directions)]
        D = np.column_stack([d.z for d in dirs])
        hits = np.zeros(per_z0_directions)
        sample_rng = rng_from(derive_seed(seed, i), 1)
        for E in _iter_effective_rows(law, n, trials, sample_rng):
            hits += (np.abs(E @ D) >= alpha).sum(axis=0)
        probs = hits / trials
        points.append(SmallBallPoint(z0=float(z0), min_prob=float(probs.min()),
                                     mean_prob=float(probs.mean())))
    return SmallBallCurve(law_id=law.id, n=n, alpha=alpha,
                          directions=per_z0_directions, trials=trials,
                          points=tuple(points),
                          bound_shape=small_ball_bound_shape(law, alpha))


# ---------------------------------------------------------------------------
# descent-cone geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DescentConeSample:
    """Direction in the closed nuclear-norm descent cone at X0 = U diag(s) V^T.

    Membership certificate: -<U V^T, Z> >= ||Z_{T_perp}||_* - tol, where
    T_perp projects as (I - P) Z (I - P) for the shared column space P.
    """

    U: np.ndarray
    V: np.ndarray
    Z: np.ndarray
    rank: int
    cert_gap: float

    def __post_init__(self):
        if self.cert_gap < -MEMBERSHIP_TOL:
            raise ValueError(f"membership certificate violated (gap {self.cert_gap:.3e})")


def _spectral_factors(x0_dense: np.ndarray):
    """(U, V, P) from the eigenpairs of a symmetric X0 above the rank cutoff."""
    w, Vfull = sym_eig(x0_dense)
    top = np.abs(w).max()
    if top == 0.0:
        raise ValueError("X0 must be nonzero")
    keep = np.abs(w) > RANK_RTOL * top
    V = Vfull[:, keep]
    signs = np.sign(w[keep])
    U = V * signs
    return U, V, V @ V.T


def membership_gap(Z: np.ndarray, U: np.ndarray, V: np.ndarray) -> float:
    """-<U V^T, Z> - ||(I-P) Z (I-P)||_* for the factors' shared column space."""
    P = V @ V.T
    n = Z.shape[0]
    Ic = np.eye(n) - P
    perp = Ic @ Z @ Ic
    inner = float(np.sum((U @ V.T) * Z))
    return -inner - nuclear_norm(0.5 * (perp + perp.T))


def _resolve_truth(x0, n: int | None) -> ToeplitzVector:
    if isinstance(x0, SpikeModel):
        if n is None:
            raise ValueError("n is required when passing a SpikeModel")
        return spike_toeplitz(x0, n)
    if isinstance(x0, ToeplitzVector):
        return x0
    raise TypeError("x0 must be a SpikeModel or ToeplitzVector")


def descent_cone_sampler(x0, count: int, seed: int,
                         n: int | None = None) -> list[DescentConeSample]:
    """Random certified members Z = Z_T + beta Z_perp of the descent cone.

    Z_T is a random tangent direction sign-flipped so <U V^T, Z_T> < 0;
    beta >= 0 is maximal subject to the membership inequality, which makes
    every sample sit on the cone boundary (up to the certificate tolerance).
    """
    truth = _resolve_truth(x0, n)
    X0 = toeplitz_to_dense(truth)
    U, V, P = _spectral_factors(X0)
    dim = X0.shape[0]
    r = U.shape[1]
    if r >= dim:
        raise ValueError("X0 must have rank below its dimension")
    UVt = U @ V.T
    Ic = np.eye(dim) - P
    rng = rng_from(seed, 0)
    samples = []
    for _ in range(count):
        G1 = rng.standard_normal((dim, dim))
        G1 = 0.5 * (G1 + G1.T)
        Zt = P @ G1 + G1 @ P - P @ G1 @ P
        Zt = 0.5 * (Zt + Zt.T)
        inner = float(np.sum(UVt * Zt))
        if inner > 0.0:
            Zt = -Zt
            inner = -inner
        G2 = rng.standard_normal((dim, dim))
        Zp = Ic @ (0.5 * (G2 + G2.T)) @ Ic
        Zp = 0.5 * (Zp + Zp.T)
        perp_nuc = nuclear_norm(Zp)
        beta = 0.0 if perp_nuc == 0.0 else -inner / perp_nuc
        Z = Zt + beta * Zp
        Z /= np.linalg.norm(Z, "fro")
        samples.append(DescentConeSample(U=U, V=V, Z=Z, rank=r,
                                         cert_gap=membership_gap(Z, U, V)))
    return samples


def descent_bound_check(samples) -> float:
    """Verify ||Z||_* <= (sqrt(2)+1) sqrt(r) ||Z||_F on every sample; returns
    the max observed ||Z||_* / (sqrt(r) ||Z||_F)."""
    worst = 0.0
    for k, s in enumerate(samples):
        fro = np.linalg.norm(s.Z, "fro")
        ratio = nuclear_norm(s.Z) / (math.sqrt(s.rank) * fro)
        worst = max(worst, ratio)
        if ratio > DESCENT_BOUND * (1.0 + 1e-12):
            raise RuntimeError(f"descent-cone bound violated at sample {k}: ratio {ratio}")
    return worst


# ---------------------------------------------------------------------------
# spectral norm of the summed Toeplitz projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecNormEstimate:
    """Monte-Carlo estimate of E||sum_k T(xi_k xi_k^T) - m I||_op with the
    exact dense norm (mean_dev) and the circulant upper bound (mean_upper)."""

    n: int
    m: int
    law_id: str
    trials: int
    mean_dev: float
    std_err: float
    mean_upper: float
    upper_std_err: float
    k_bound: float

    def __post_init__(self):
        if self.mean_upper < self.mean_dev:
            raise ValueError("circulant bound fell below the exact mean deviation")


def _deviation_vector(xi: np.ndarray, n: int, m: int) -> ToeplitzVector:
    """Toeplitz parameters of sum_k T(xi_k xi_k^T) - m I."""
    z = np.zeros(n)
    if m > 0:
        sums = lag_sums(xi).sum(axis=0)
        z[0] = (sums[0] - m * n) / n
        z[1:] = sums[1:] / (n - np.arange(1, n))
    return ToeplitzVector(n=n, z=z)


def specnorm_deviation(law: SubgaussianLaw, n: int, m: int, trials: int,
                       seed: int) -> SpecNormEstimate:
    """Per-trial exact and circulant-bounded spectral norms of the deviation."""
    if trials < 30:
        raise ValueError("need at least 30 trials")
    dev = np.empty(trials)
    upper = np.empty(trials)
    for trial in range(trials):
        if m == 0:
            dev[trial] = upper[trial] = 0.0
            continue
        xi = sample_scalars(law, (m, n), rng_from(seed, trial))
        t = _deviation_vector(xi, n, m)
        dev[trial] = opnorm_exact(t)
        upper[trial] = opnorm_upper(t)
    root = math.sqrt(trials)
    return SpecNormEstimate(n=n, m=m, law_id=law.id, trials=trials,
                            mean_dev=float(dev.mean()), std_err=float(dev.std(ddof=1)) / root,
                            mean_upper=float(upper.mean()),
                            upper_std_err=float(upper.std(ddof=1)) / root,
                            k_bound=law.k_bound)


@dataclass(frozen=True)
class SymmetrizedRadius:
    n: int
    m: int
    law_id: str
    trials: int
    estimate: float
    std_err: float
    deviation_bound: float
    bound_std_err: float

    @property
    def within_bound(self) -> bool:
        slack = 3.0 * (self.std_err + self.bound_std_err)
        return self.estimate <= self.deviation_bound + slack


def symmetrized_radius(law: SubgaussianLaw, n: int, m: int, trials: int,
                       seed: int) -> SymmetrizedRadius:
    """Estimate E||(1/m) sum_k eps_k T(xi_k xi_k^T)||_op and compare against
    twice the centered deviation (the symmetrization inequality direction)."""
    if trials < 30:
        raise ValueError("need at least 30 trials")
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = np.empty(trials)
    for trial in range(trials):
        rng = rng_from(seed, trial)
        xi = sample_scalars(law, (m, n), rng)
        eps = 2.0 * rng.integers(0, 2, size=m).astype(float) - 1.0
        signed = eps @ lag_sums(xi)
        z = np.empty(n)
        z[0] = signed[0] / (m * n)
        z[1:] = signed[1:] / (m * (n - np.arange(1, n)))
        vals[trial] = opnorm_exact(ToeplitzVector(n=n, z=z))
    ref = specnorm_deviation(law, n, m, trials, derive_seed(seed, 1 << 32))
    root = math.sqrt(trials)
    return SymmetrizedRadius(n=n, m=m, law_id=law.id, trials=trials,
                             estimate=float(vals.mean()),
                             std_err=float(vals.std(ddof=1)) / root,
                             deviation_bound=2.0 * ref.mean_dev / m,
                             bound_std_err=2.0 * ref.std_err / m)


@dataclass(frozen=True)
class ScalingFit:
    constant: float
    ratios: tuple
    spread: float


def scaling_theory(n: int, m: int, k_bound: float) -> float:
    """K^2 (sqrt(m) log n + log^{3/2} n)."""
    ln = math.log(n)
    return k_bound**2 * (math.sqrt(m) * ln + ln**1.5)


def scaling_fit(estimates) -> ScalingFit:
    """Least-squares constant C with mean_dev ~= C K^2 (sqrt(m) log n + log^{3/2} n),
    plus the max/min spread of observed-to-model ratios across the grid."""
    estimates = list(estimates)
    if len({e.n for e in estimates}) < 3 or len({e.m for e in estimates}) < 3:
        raise ValueError("grid must span at least 3 values each of n and m")
    x = np.array([scaling_theory(e.n, e.m, e.k_bound) for e in estimates])
    y = np.array([e.mean_dev for e in estimates])
    constant = float(x @ y / (x @ x))
    ratios = y / x
    return ScalingFit(constant=constant, ratios=tuple(float(r) for r in ratios),
                      spread=float(ratios.max() / ratios.min()))


# ---------------------------------------------------------------------------
# minimum conic singular value probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicProbe:
    value: float
    kept: int
    rejected: int


def min_conic_probe(xi: np.ndarray, x0, samples: int, p, seed: int,
                    n: int | None = None) -> ConicProbe:
    """Sampled upper envelope of inf ||A(Z)||_p / ||Z||_F over Toeplitz
    members of the descent cone.

    Cone samples are projected onto Toeplitz form and re-certified; failures
    are discarded.  The result is a probe over the sampled set, not a
    certified lower bound on the infimum.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    p = normalize_p(p)
    xi = np.asarray(xi, dtype=float)
    truth = _resolve_truth(x0, n)
    cone = descent_cone_sampler(truth, samples, seed)
    E = effective_matrix(xi) if xi.shape[0] > 0 else None
    best = math.inf
    kept = rejected = 0
    for s in cone:
        t = project_toeplitz(s.Z)
        fro = weighted_norm(t)
        if fro == 0.0 or membership_gap(toeplitz_to_dense(t), s.U, s.V) < -MEMBERSHIP_TOL:
            rejected += 1
            continue
        kept += 1
        val = 0.0 if E is None else lp_norm(E @ t.z, p) / fro
        best = min(best, val)
    if kept == 0:
        raise RuntimeError("all cone samples were rejected after Toeplitz projection")
    return ConicProbe(value=float(best), kept=kept, rejected=rejected)


# ---------------------------------------------------------------------------
# phase transitions and noise scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Experiment grid over (n, rank, m, law) with per-cell trial counts."""

    n_list: tuple
    r_list: tuple
    m_list: tuple
    laws: tuple
    trials: int
    base_seed: int
    eta: float = 0.0
    p: object = 2
    success_tol: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(v) for v in self.n_list))
        object.__setattr__(self, "r_list", tuple(int(v) for v in self.r_list))
        object.__setattr__(self, "m_list", tuple(int(v) for v in self.m_list))
        object.__setattr__(self, "laws", tuple(self.laws))
        object.__setattr__(self, "p", normalize_p(self.p))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not (self.n_list and self.r_list and self.m_list and self.laws):
            raise ValueError("grid lists must be nonempty")

    def cells(self):
        return itertools.product(self.n_list, self.r_list, self.m_list, self.laws)


@dataclass(frozen=True)
class TrialOutcome:
    n: int
    r: int
    m: int
    law_id: str
    trial: int
    success: bool
    rel_error: float
    iterations: int
    seed: int


@dataclass(frozen=True)
class PhaseSummary:
    n: int
    r: int
    m: int
    law_id: str
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials


@dataclass(frozen=True)
class PhaseResult:
    grid: GridSpec
    outcomes: tuple

    def summary(self) -> list[PhaseSummary]:
        rows = []
        for n, r, m, law in self.grid.cells():
            hits = [o for o in self.outcomes
                    if (o.n, o.r, o.m, o.law_id) == (n, r, m, law.id)]
            rows.append(PhaseSummary(n=n, r=r, m=m, law_id=law.id,
                                     trials=len(hits),
                                     successes=sum(o.success for o in hits)))
        return rows


def run_trial(n: int, r: int, m: int, law: SubgaussianLaw, eta: float, p,
              success_tol: float, trial_seed: int, trial_index: int,
              cfg: SolverConfig | None = None) -> TrialOutcome:
    """One recovery trial: spike truth, sensing, solve, success bookkeeping."""
    truth = unit_spike_truth(r, n, rng_from(trial_seed, 2))
    mset = sense(truth, law, m, eta, p, trial_seed)
    z_hat, report = recover_measurements(mset, cfg)
    rel = weighted_norm(ToeplitzVector(n=n, z=z_hat.z - truth.z))
    success = bool(report.converged and rel <= success_tol)
    return TrialOutcome(n=n, r=r, m=m, law_id=law.id, trial=trial_index,
                        success=success, rel_error=float(rel),
                        iterations=report.iterations, seed=trial_seed)


def phase_grid(grid: GridSpec, cfg: SolverConfig | None = None,
               threads: int = 1) -> PhaseResult:
    """Run every (n, r, m, law, trial) cell; per-trial seeds split from the
    base seed by flat enumeration index, so cells can run in any order.

    threads > 1 spreads trials over a thread pool; results are reassembled in
    flat-index order, so the outcome table does not depend on the pool size.
    """
    tasks = []
    flat = 0
    for n, r, m, law in grid.cells():
        for trial in range(grid.trials):
            tasks.append((n, r, m, law, derive_seed(grid.base_seed, flat), trial))
            flat += 1

    def _run(task):
        n, r, m, law, trial_seed, trial = task
        return run_trial(n, r, m, law, grid.eta, grid.p, grid.success_tol,
                         trial_seed, trial, cfg)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run, tasks))
    else:
        outcomes = [_run(t) for t in tasks]
    return PhaseResult(grid=grid, outcomes=tuple(outcomes))


@dataclass(frozen=True)
class NoisePoint:
    eta: float
    mean_error: float
    std_err: float


@dataclass(frozen=True)
class NoiseCurve:
    n: int
    r: int
    m: int
    law_id: str
    p: object
    trials: int
    points: tuple
    slope: float
    intercept: float

    @property
    def successive_ratios(self) -> tuple:
        means = [pt.mean_error for pt in self.points]
        return tuple(means[i + 1] / means[i] for i in range(len(means) - 1))


def error_vs_noise(n: int, spikes: int, m: int, law: SubgaussianLaw, eta_grid,
                   p, trials: int, seed: int,
                   cfg: SolverConfig | None = None) -> NoiseCurve:
    """Mean recovery error per noise level, with the linear fit error ~ slope * eta."""
    eta_grid = [float(e) for e in eta_grid]
    if not eta_grid:
        raise ValueError("eta grid must be nonempty")
    points = []
    flat = 0
    for eta in eta_grid:
        errs = np.empty(trials)
        for trial in range(trials):
            trial_seed = derive_seed(seed, flat)
            truth = unit_spike_truth(spikes, n, rng_from(trial_seed, 2))
            mset = sense(truth, law, m, eta, p, trial_seed)
            z_hat, _ = recover_measurements(mset, cfg)
            errs[trial] = weighted_norm(ToeplitzVector(n=n, z=z_hat.z - truth.z))
            flat += 1
        points.append(NoisePoint(eta=eta, mean_error=float(errs.mean()),
                                 std_err=float(errs.std(ddof=1)) / math.sqrt(trials)
                                 if trials > 1 else 0.0))
    xs = np.array([pt.eta for pt in points])
    ys = np.array([pt.mean_error for pt in points])
    if xs.size > 1:
        slope, intercept = np.polyfit(xs, ys, 1)
    else:
        slope, intercept = (ys[0] / xs[0] if xs[0] else 0.0), 0.0
    return NoiseCurve(n=n, r=spikes, m=m, law_id=law.id, p=normalize_p(p),
                      trials=trials, points=tuple(points),
                      slope=float(slope), intercept=float(intercept))


# ---------------------------------------------------------------------------
# Toeplitz projection of the rank-one ambiguity
# ---------------------------------------------------------------------------

def toeplitz_ambiguity_demo(n: int, seed: int = 0) -> dict:
    """Rank-one coordinate matrices are indistinguishable inside the Toeplitz
    subspace: every e_i e_i^T projects to identity/n exactly, raw Rademacher
    measurements of e_i e_i^T are the constant 1 regardless of i, and sensing
    the projected matrices therefore yields one shared measurement vector."""
    if n < 2:
        raise ValueError("n must be >= 2")
    expected = np.zeros(n)
    expected[0] = 1.0 / n
    projections = []
    for i in range(n):
        M = np.zeros((n, n))
        M[i, i] = 1.0
        projections.append(project_toeplitz(M).z)
    projections_equal = all(np.array_equal(z, expected) for z in projections)
    xi = sample_vectors(builtin_law("rademacher"), n, 64, seed)
    raw = [xi[:, i] ** 2 for i in range(2)]
    raw_identical = bool(np.array_equal(raw[0], raw[1]) and np.all(raw[0] == 1.0))
    E = effective_matrix(xi)
    sensed = [E @ z for z in projections[:2]]
    return {
        "projections_equal": projections_equal,
        "projection_z0": 1.0 / n,
        "raw_rademacher_identical": raw_identical,
        "sensed_projection_identical": bool(np.array_equal(sensed[0], sensed[1])),
    }


# ---------------------------------------------------------------------------
# invariant suite (backs the CLI `verify` subcommand)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def invariant_suite(quick: bool = True, base_seed: int = 20240) -> list[CheckResult]:
    """Deterministic pass/fail sweep over the package's structural invariants."""
    results = []
    rng = rng_from(base_seed, 0)
    reps = 20 if quick else 100
    mc = 100_000 if quick else 1_000_000

    # projection identities
    ok, worst = True, 0.0
    for _ in range(reps):
        n = int(rng.integers(2, 24))
        M = rng.standard_normal((n, n))
        M = 0.5 * (M + M.T)
        t = project_toeplitz(M)
        resid = M - toeplitz_to_dense(t)
        probe = random_unit_toeplitz(n, rng)
        inner = abs(float(np.sum(resid * toeplitz_to_dense(probe))))
        scale = max(1.0, np.linalg.norm(M, "fro"))
        worst = max(worst, inner / scale)
        ok &= inner <= 1e-9 * scale
        ok &= np.array_equal(project_toeplitz(toeplitz_to_dense(t)).z, t.z)
        ok &= weighted_norm(t) <= np.linalg.norm(M, "fro") * (1 + 1e-12)
    results.append(CheckResult("projection-identities", ok, f"max orthogonality defect {worst:.2e}"))

    # weighted norm and circulant dominance
    ok, worst = True, 0.0
    for _ in range(reps):
        n = int(rng.integers(2, 40))
        t = random_unit_toeplitz(n, rng)
        dense = toeplitz_to_dense(t)
        ok &= abs(weighted_norm(t) - np.linalg.norm(dense, "fro")) <= 1e-10
        exact = opnorm_exact(t)
        upper = opnorm_upper(t)
        ok &= upper >= exact - 1e-10
        worst = max(worst, exact - upper)
    results.append(CheckResult("circulant-dominance", ok, f"max (exact - upper) {worst:.2e}"))

    # Fact 1 moment identity per built-in law
    for kind in ("gaussian", "rademacher", "uniform"):
        law = builtin_law(kind)
        devs = []
        for k in range(3):
            t = random_unit_toeplitz(12, rng_from(derive_seed(base_seed, k), 3))
            rep = moment_identity_check(law, t, mc, derive_seed(base_seed, 100 + k))
            devs.append(rep.deviation_se)
        ok = max(devs) <= 5.0
        results.append(CheckResult(f"moment-identity-{kind}", ok,
                                   f"max deviation {max(devs):.2f} se"))

    # unbiasedness of the projected rank-one frame
    law = builtin_law("gaussian")
    n = 8
    trials = mc // 2
    xi = sample_scalars(law, (trials, n), rng_from(base_seed, 5))
    sums = lag_sums(xi)
    zbar = np.empty(n)
    zbar[0] = sums[:, 0].mean() / n
    zbar[1:] = (sums[:, 1:] / (n - np.arange(1, n))).mean(axis=0)
    target = np.zeros(n)
    target[0] = 1.0
    se = np.empty(n)
    se[0] = (sums[:, 0] / n).std(ddof=1) / math.sqrt(trials)
    se[1:] = (sums[:, 1:] / (n - np.arange(1, n))).std(axis=0, ddof=1) / math.sqrt(trials)
    dev = np.abs(zbar - target) / se
    ok = bool(np.all(dev <= 5.0))
    results.append(CheckResult("projected-frame-unbiased", ok, f"max deviation {dev.max():.2f} se"))

    # prox identities
    M1 = np.diag([3.0, 1.0, -2.0])
    ok = bool(np.allclose(svt(M1, 1.5), np.diag([1.5, 0.0, -0.5]), atol=1e-12))
    for _ in range(reps):
        n = int(rng.integers(2, 16))
        P1 = rng.standard_normal((n, n))
        P2 = rng.standard_normal((n, n))
        P1, P2 = 0.5 * (P1 + P1.T), 0.5 * (P2 + P2.T)
        tau = float(rng.uniform(0.1, 2.0))
        d = np.linalg.norm(svt(P1, tau) - svt(P2, tau), "fro")
        ok &= d <= np.linalg.norm(P1 - P2, "fro") * (1 + 1e-12)
    results.append(CheckResult("svt-prox", ok, "diagonal case + nonexpansiveness"))

    # ball projections
    ok = True
    for p in (1, 2, math.inf):
        for _ in range(reps):
            mth = int(rng.integers(1, 40))
            v = rng.standard_normal(mth) * 3
            ctr = rng.standard_normal(mth)
            rad = float(rng.uniform(0.0, 2.0))
            w = project_lp_ball(v, ctr, rad, p)
            ok &= lp_norm(w - ctr, p) <= rad * (1 + 1e-12) + 1e-12
            ok &= np.allclose(project_lp_ball(w, ctr, rad, p), w, atol=1e-12)
    results.append(CheckResult("lp-ball-projections", ok, "feasible + idempotent"))

    # descent-cone certificates and the rank bound
    t = unit_spike_truth(2, 16, rng_from(base_seed, 7))
    samples = descent_cone_sampler(t, 50 if quick else 500, derive_seed(base_seed, 7))
    try:
        worst = descent_bound_check(samples)
        ok = True
    except RuntimeError:
        worst, ok = math.nan, False
    results.append(CheckResult("descent-cone", ok, f"max ratio {worst:.4f} <= {DESCENT_BOUND:.4f}"))

    # rank-one ambiguity collapse
    demo = toeplitz_ambiguity_demo(8, seed=base_seed)
    ok = demo["projections_equal"] and demo["raw_rademacher_identical"]
    results.append(CheckResult("toeplitz-ambiguity", ok, "T(e_i e_i^T) = I/n for all i"))

    # subgaussian tail bounds
    for kind in ("gaussian", "rademacher", "uniform"):
        audit = moment_audit(builtin_law(kind), max(mc // 10, 10_000), derive_seed(base_seed, 11))
        results.append(CheckResult(f"tail-bound-{kind}", audit.tail_ok,
                                   f"mu_hat {audit.mu_hat:.3f}"))
    return results
