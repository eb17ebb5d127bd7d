"""Symmetric Toeplitz algebra.

Construction and projection of symmetric Toeplitz matrices, spike-model
ground truths, the circulant embedding with its explicit cosine-sum
eigenvalues, and the dense symmetric spectral primitives (eigendecomposition,
nuclear norm) that everything else builds on.

A symmetric Toeplitz matrix is parameterized by its n diagonal values
z[0], ..., z[n-1] with X[i, j] = z[|i - j|].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

# Asymmetric inputs are rejected rather than silently symmetrized: averaging
# away asymmetry would hide bugs upstream in sensing or solver code.
SYMMETRY_RTOL = 1e-12

# Eigenvalues below RANK_RTOL * |lambda|_max count as zero in rank checks.
RANK_RTOL = 1e-8


def _finite_vector(z, name="z"):
    z = np.array(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d real sequence")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} must have finite entries")
    return z


@dataclass(frozen=True)
class ToeplitzVector:
    """Diagonal values of a symmetric Toeplitz matrix.

    z[l] is the common value of the l-th diagonal; the induced dense matrix
    X[i, j] = z[|i - j|] is symmetric Toeplitz by construction.
    """

    n: int
    z: np.ndarray

    def __post_init__(self):
        z = _finite_vector(self.z)
        if self.n < 1 or self.n != z.size:
            raise ValueError("n must be positive and equal to len(z)")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "z": self.z.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ToeplitzVector":
        doc = json.loads(text)
        return cls(n=int(doc["n"]), z=np.asarray(doc["z"], dtype=float))


@dataclass(frozen=True)
class CirculantSpectrum:
    """Eigenvalues of the (2n-1) x (2n-1) circulant embedding of Toep(z)."""

    n: int
    lam: np.ndarray

    def __post_init__(self):
        lam = _finite_vector(self.lam, "lam")
        if lam.size != 2 * self.n - 1:
            raise ValueError("circulant spectrum must have length 2n-1")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class SpikeModel:
    """Spectral spikes (frequency, amplitude) generating a low-rank Toeplitz
    ground truth.

    Frequencies live in [0, 1/2] and must be pairwise distinct; amplitudes
    are strictly positive.  The induced matrix has rank
    2 * #{f in (0, 1/2)} + #{f in {0, 1/2}}.
    """

    spikes: tuple

    def __post_init__(self):
        spikes = tuple((float(f), float(d)) for f, d in self.spikes)
        if not spikes:
            raise ValueError("need at least one spike")
        freqs = [f for f, _ in spikes]
        if len(set(freqs)) != len(freqs):
            raise ValueError("spike frequencies must be pairwise distinct")
        for f, d in spikes:
            if not (0.0 <= f <= 0.5):
                raise ValueError(f"frequency {f} outside [0, 1/2]")
            if d <= 0.0:
                raise ValueError(f"amplitude {d} must be positive")
        object.__setattr__(self, "spikes", spikes)

    @property
    def count(self) -> int:
        return len(self.spikes)

    def rank(self) -> int:
        """Rank of the induced Toeplitz matrix (for n large enough)."""
        interior = sum(1 for f, _ in self.spikes if 0.0 < f < 0.5)
        boundary = sum(1 for f, _ in self.spikes if f in (0.0, 0.5))
        return 2 * interior + boundary


def require_symmetric(M) -> np.ndarray:
    """Validate a dense symmetric matrix; reject asymmetry, never repair it."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.abs(M).max()))
    gap = float(np.abs(M - M.T).max())
    if gap > SYMMETRY_RTOL * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {gap:.3e})")
    return M


def toeplitz_to_dense(t: ToeplitzVector) -> np.ndarray:
    """Dense symmetric Toeplitz matrix with X[i, j] = z[|i - j|]."""
    return sla.toeplitz(t.z)


def diagonal_sums(M: np.ndarray) -> np.ndarray:
    """s[l] = sum of M over all entries with |i - j| = l.

    This is the adjoint of z -> Toep(z): <M, Toep(z)>_F = s(M) . z.
    """
    n = M.shape[0]
    s = np.empty(n)
    s[0] = np.trace(M)
    for ell in range(1, n):
        s[ell] = np.trace(M, offset=ell) + np.trace(M, offset=-ell)
    return s


def frobenius_weights(n: int) -> np.ndarray:
    """Diagonal entry counts c with ||Toep(z)||_F^2 = sum_l c[l] z[l]^2.

    c[0] = n and c[l] = 2(n - l) for l >= 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    c = 2.0 * (n - np.arange(n, dtype=float))
    c[0] = n
    return c


def project_toeplitz(M) -> ToeplitzVector:
    """Orthogonal projection of a dense symmetric matrix onto Toeplitz form.

    Each diagonal value is the average of the corresponding diagonal; the
    residual M - Toep(z) is Frobenius-orthogonal to every Toeplitz matrix.
    Constant diagonals short-circuit to their common value, so projecting a
    matrix that is already Toeplitz reproduces its parameters exactly.
    """
    M = require_symmetric(M)
    n = M.shape[0]
    z = np.empty(n)
    for ell in range(n):
        d = np.diagonal(M, offset=ell)
        first = d[0]
        z[ell] = first if np.all(d == first) else float(d.mean())
    return ToeplitzVector(n=n, z=z)


def weighted_norm(t: ToeplitzVector) -> float:
    """||Toep(z)||_F computed from the diagonal parameterization."""
    c = frobenius_weights(t.n)
    return float(np.sqrt(np.sum(c * t.z * t.z)))


@lru_cache(maxsize=32)
def _circulant_cosines(n: int) -> np.ndarray:
    """Cosine table C[j, l] = cos(2 pi j l / (2n-1)), j = 0..2n-2, l = 0..n-1."""
    j = np.arange(2 * n - 1)[:, None]
    ell = np.arange(n)[None, :]
    return np.cos(2.0 * np.pi * j * ell / (2 * n - 1))


def circulant_embed(t: ToeplitzVector) -> CirculantSpectrum:
    """Eigenvalues of the (2n-1) x (2n-1) circulant containing Toep(z).

    lam[j] = z[0] + 2 sum_{l>=1} z[l] cos(2 pi j l / (2n-1)).
    """
    coeff = 2.0 * t.z
    coeff[0] = t.z[0]
    lam = _circulant_cosines(t.n) @ coeff
    return CirculantSpectrum(n=t.n, lam=lam)


def opnorm_upper(t: ToeplitzVector) -> float:
    """Circulant bound max_j |lam_j| >= ||Toep(z)||_op."""
    return float(np.abs(circulant_embed(t).lam).max())


def opnorm_exact(t: ToeplitzVector) -> float:
    """Exact spectral norm of Toep(z) via the dense symmetric eigensolver."""
    return float(np.abs(np.linalg.eigvalsh(toeplitz_to_dense(t))).max())


def sym_eig(M):
    """Eigendecomposition M = V diag(w) V^T of a dense symmetric matrix.

    Eigenvalues come in nonincreasing order; each eigenvector's first
    component of magnitude above 1e-12 of its peak is made positive, so
    repeated runs produce identical factors.
    """
    M = require_symmetric(M)
    w, V = np.linalg.eigh(M)
    w = w[::-1]
    V = V[:, ::-1]
    peaks = np.abs(V).max(axis=0)
    for k in range(V.shape[1]):
        nz = np.nonzero(np.abs(V[:, k]) > 1e-12 * peaks[k])[0]
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    return w, V


def nuclear_norm(M) -> float:
    """Sum of absolute eigenvalues (= sum of singular values for symmetric M)."""
    M = require_symmetric(M)
    return float(np.sum(np.abs(np.linalg.eigvalsh(M))))


def numerical_rank(M, rtol: float = RANK_RTOL) -> int:
    """Number of eigenvalues above rtol * |lambda|_max."""
    w = np.abs(np.linalg.eigvalsh(require_symmetric(M)))
    top = w.max()
    if top == 0.0:
        return 0
    return int(np.sum(w > rtol * top))


def spike_toeplitz(model: SpikeModel, n: int) -> ToeplitzVector:
    """Toeplitz vector z[l] = sum_i d_i cos(2 pi f_i l) of a spike model."""
    ell = np.arange(n, dtype=float)
    z = np.zeros(n)
    for f, d in model.spikes:
        z += d * np.cos(2.0 * np.pi * f * ell)
    return ToeplitzVector(n=n, z=z)
