"""The L1, L-infinity and Euclidean norms and their directional derivatives.

All three norms are directionally Hadamard differentiable everywhere.  The
derivative at ``theta`` in direction ``v`` depends on which coordinates are
zero (L1) or attain the maximum modulus (L-infinity); those index sets are
computed with an explicit tolerance ``tau_act`` because floating point cannot
decide exact ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .simplex import NormKind

TAU_ACT = 1e-9


def norm_eval(kind, theta) -> float:
    kind = NormKind.parse(kind)
    t = np.asarray(theta, dtype=float)
    if kind is NormKind.L1:
        return float(np.abs(t).sum())
    if kind is NormKind.LINF:
        return float(np.abs(t).max())
    return float(np.sqrt(np.dot(t, t)))


def norm_rows(kind, thetas: np.ndarray) -> np.ndarray:
    """Row-wise norms of a 2-D array."""
    kind = NormKind.parse(kind)
    t = np.asarray(thetas, dtype=float)
    if kind is NormKind.L1:
        return np.abs(t).sum(axis=-1)
    if kind is NormKind.LINF:
        return np.abs(t).max(axis=-1)
    return np.sqrt(np.einsum("...i,...i->...", t, t))


def max_norm_on_simplex(kind) -> float:
    """Largest value of ``||p - q||`` for p, q on the simplex."""
    kind = NormKind.parse(kind)
    return {NormKind.L1: 2.0, NormKind.LINF: 1.0, NormKind.L2: float(np.sqrt(2.0))}[kind]


@dataclass(frozen=True)
class ActiveSets:
    """Index sets that decide the shape of the derivative.

    ``zero_set`` holds the coordinates with ``|theta_i| <= tau``; ``plus_set``
    and ``minus_set`` the coordinates within ``tau`` of ``+d_inf`` and
    ``-d_inf``.  Indices are 0-based.
    """

    zero_set: frozenset
    plus_set: frozenset
    minus_set: frozenset
    fully_differentiable: bool

    @property
    def extremal_set(self) -> frozenset:
        return self.plus_set | self.minus_set


def active_sets(kind, theta, tau_act: float = TAU_ACT) -> ActiveSets:
    if tau_act < 0:
        raise ValueError("tau_act must be nonnegative")
    kind = NormKind.parse(kind)
    t = np.asarray(theta, dtype=float)
    d_inf = float(np.abs(t).max())
    zero = frozenset(np.flatnonzero(np.abs(t) <= tau_act).tolist())
    plus = frozenset(np.flatnonzero(np.abs(t - d_inf) <= tau_act).tolist())
    minus = frozenset(np.flatnonzero(np.abs(t + d_inf) <= tau_act).tolist())
    if kind is NormKind.L1:
        smooth = not zero
    elif kind is NormKind.LINF:
        smooth = len(plus | minus) == 1
    else:
        smooth = len(zero) < t.size
    return ActiveSets(zero, plus, minus, smooth)


class _Derivative:
    """``v -> d'_theta(v)`` with the active sets resolved once.

    Evaluating on a stack of directions is the inner loop of the limit-law
    oracle, hence the precomputed masks.
    """

    def __init__(self, kind, theta, tau_act=TAU_ACT):
        self.kind = NormKind.parse(kind)
        self.theta = np.asarray(theta, dtype=float)
        self.sets = active_sets(self.kind, self.theta, tau_act)
        k = self.theta.size
        self.zero_mask = np.zeros(k, dtype=bool)
        self.zero_mask[list(self.sets.zero_set)] = True
        self.plus_idx = np.array(sorted(self.sets.plus_set), dtype=np.intp)
        self.minus_idx = np.array(sorted(self.sets.minus_set), dtype=np.intp)
        self.sign = np.where(self.zero_mask, 0.0, np.sign(self.theta))
        nrm = norm_eval(NormKind.L2, self.theta)
        self.is_zero = bool(self.zero_mask.all())
        self.unit = None if self.is_zero else self.theta / nrm

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.theta.size:
            raise DimensionMismatch(f"direction has dimension {v.shape[-1]}, expected {self.theta.size}")
        if self.kind is NormKind.L1:
            return v @ self.sign + np.abs(v[..., self.zero_mask]).sum(axis=-1)
        if self.kind is NormKind.LINF:
            parts = []
            if self.plus_idx.size:
                parts.append(v[..., self.plus_idx].max(axis=-1))
            if self.minus_idx.size:
                parts.append((-v[..., self.minus_idx]).max(axis=-1))
            return np.maximum.reduce(parts) if len(parts) > 1 else parts[0]
        if self.is_zero:
            return np.sqrt(np.einsum("...i,...i->...", v, v))
        return v @ self.unit


def directional_derivative(kind, theta, v, tau_act: float = TAU_ACT) -> float:
    """d'_theta(v) for a single direction ``v``."""
    t = np.asarray(theta, dtype=float)
    w = np.asarray(v, dtype=float)
    if t.shape != w.shape:
        raise DimensionMismatch(f"dimensions differ: {t.size} vs {w.size}")
    return float(_Derivative(kind, t, tau_act)(w))


def directional_derivative_rows(kind, theta, vs, tau_act: float = TAU_ACT) -> np.ndarray:
    """d'_theta applied to every row of ``vs``."""
    return np.asarray(_Derivative(kind, theta, tau_act)(np.atleast_2d(vs)))
