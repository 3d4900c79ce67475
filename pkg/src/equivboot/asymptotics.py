"""Monte Carlo oracle for the limit law of ``sqrt(n) (d_hat - d)``.

With ``n = n1 + n2`` and ``lambda_i = n_i / n``, ``sqrt(n)((p_hat - q_hat) - (p - q))``
converges to a centred normal ``Z`` with covariance

    Sigma = (diag(p) - p p^T) / lambda1 + (diag(q) - q q^T) / lambda2,

and the statistic converges to ``T = d'_{p-q}(Z)``.  Sigma is singular (its
rows sum to zero), so ``Z`` is drawn as ``A @ eta`` with ``A A^T = Sigma``
from a clamped eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import empirical_quantile
from .errors import BadWeights, DimensionMismatch
from .norms import TAU_ACT, directional_derivative_rows
from .sampling import RngStream

EIG_CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class CovMatrix:
    entries: np.ndarray
    factor: np.ndarray

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @classmethod
    def from_matrix(cls, sigma) -> "CovMatrix":
        s = np.asarray(sigma, dtype=float)
        s = 0.5 * (s + s.T)
        w, v = np.linalg.eigh(s)
        if w.min(initial=0.0) < -EIG_CLAMP:
            raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
        keep = w > EIG_CLAMP
        factor = v[:, keep] * np.sqrt(w[keep])
        s.setflags(write=False)
        factor.setflags(write=False)
        return cls(s, factor)


def covariance_sigma(p, q, lambda1: float, lambda2: float) -> CovMatrix:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch(f"dimensions differ: {p.size} vs {q.size}")
    if not (lambda1 > 0 and lambda2 > 0) or abs(lambda1 + lambda2 - 1.0) > 1e-12:
        raise BadWeights(f"sample fractions must be positive and sum to 1, got {lambda1!r}, {lambda2!r}")
    sigma = (np.diag(p) - np.outer(p, p)) / lambda1 + (np.diag(q) - np.outer(q, q)) / lambda2
    return CovMatrix.from_matrix(sigma)


def sample_limit_T(kind, theta, sigma: CovMatrix, m: int, stream: RngStream, tau_act: float = TAU_ACT) -> np.ndarray:
    """``m`` independent draws of ``d'_theta(Z)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    theta = np.asarray(theta, dtype=float)
    if sigma.rank == 0:
        return np.zeros(m)
    eta = stream.generator().standard_normal((m, sigma.rank))
    z = eta @ sigma.factor.T
    return directional_derivative_rows(kind, theta, z, tau_act)


def limit_quantile(kind, theta, sigma: CovMatrix, alpha: float, m: int, stream: RngStream,
                   tau_act: float = TAU_ACT) -> float:
    if m < 10 / alpha:
        raise ValueError(f"need at least 10/alpha = {10 / alpha:g} draws, got {m}")
    return empirical_quantile(sample_limit_T(kind, theta, sigma, m, stream, tau_act), alpha)
