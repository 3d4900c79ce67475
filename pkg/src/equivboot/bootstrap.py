"""The constrained parametric bootstrap equivalence test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .config import TestConfig
from .errors import DimensionMismatch, EmptySample
from .estimation import ConstrainedFit, select_bootstrap_params
from .norms import norm_eval, norm_rows
from .sampling import MultinomialSampler, RngStream, _Seat
from .simplex import ProbVector, as_counts

ASSUMPTION = (
    "the alpha-quantile of the limit law d'_{p-q}(Z) is taken to be negative; "
    "this cannot be checked without the true (p, q)"
)


def _order_index(alpha: float, size: int) -> int:
    # ceil(alpha * B) evaluated on the decimal value of alpha, so that e.g.
    # alpha = 0.07, B = 100 selects the 7th order statistic, not the 8th
    rank = math.ceil(Fraction(repr(float(alpha))) * size)
    return min(max(rank, 1), size)


def empirical_quantile(sample, alpha: float) -> float:
    """The ``ceil(alpha * B)``-th smallest value of ``sample``."""
    values = np.asarray(sample, dtype=float).ravel()
    if values.size == 0:
        raise EmptySample("cannot take a quantile of an empty sample")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    j = _order_index(alpha, values.size)
    return float(np.partition(values, j - 1)[j - 1])


@dataclass(frozen=True, eq=False)
class TestReport:
    d_hat: float
    quantile_hat: float
    reject: bool
    bootstrap_stats: np.ndarray
    used_constrained: bool
    p_boot: ProbVector
    q_boot: ProbVector
    config: TestConfig
    fit: Optional[ConstrainedFit] = None
    assumptions: tuple = field(default=(ASSUMPTION,))

    __test__ = False

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def boot_norm(self) -> float:
        """``||p_boot - q_boot||``, the distance the resampling law sits at."""
        return norm_eval(self.config.norm, self.p_boot.entries - self.q_boot.entries)

    @property
    def threshold_alpha(self) -> float:
        """The test rejects for every level strictly above this value."""
        return float(np.count_nonzero(self.bootstrap_stats <= self.d_hat)) / self.bootstrap_stats.size

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "d_hat": self.d_hat,
            "quantile": self.quantile_hat,
            "reject": self.reject,
            "used_constrained": self.used_constrained,
            "constraint_residual": None if self.fit is None else self.fit.constraint_residual,
            "epsilon": cfg.epsilon,
            "alpha": cfg.alpha,
            "norm": str(cfg.norm),
            "b": cfg.bootstrap_b,
            "seed": cfg.seed,
            "p_boot": self.p_boot.entries.tolist(),
            "q_boot": self.q_boot.entries.tolist(),
            "threshold_alpha": self.threshold_alpha,
            "assumptions": list(self.assumptions),
        }


def bootstrap_statistics(p, q, n1: int, n2: int, kind, b: int, root: RngStream) -> np.ndarray:
    """``||p* - q*||`` for ``b`` resamples; replicate ``i`` uses ``root.derive("boot", i)``."""
    sp, sq = MultinomialSampler(p), MultinomialSampler(q)
    xs = np.empty((b, sp.k), dtype=np.int64)
    ys = np.empty((b, sq.k), dtype=np.int64)
    seat = _Seat()
    for i, key in enumerate(root.child_keys("boot", b)):
        gen = seat.seat_key(key)
        xs[i] = sp.draw(gen, n1)
        ys[i] = sq.draw(gen, n2)
    return norm_rows(kind, xs / n1 - ys / n2)


def equivalence_test(x, y, config: TestConfig, stream: RngStream | None = None) -> TestReport:
    """Run the constrained bootstrap test of ``||p - q|| >= eps`` against ``< eps``.

    The resampling pair is the MLE when it already lies in the null and the
    norm-constrained MLE otherwise; it is fitted once, never per replicate.
    ``stream`` defaults to ``RngStream(config.seed)``.
    """
    x, y = as_counts(x), as_counts(y)
    if x.k != y.k:
        raise DimensionMismatch(f"count vectors differ in length: {x.k} vs {y.k}")
    kind = config.norm
    params = select_bootstrap_params(x, y, config.epsilon, kind, config.solver)
    root = stream if stream is not None else RngStream(config.seed)
    stats = bootstrap_statistics(params.p.entries, params.q.entries, x.total, y.total, kind, config.bootstrap_b, root)
    stats.setflags(write=False)
    quantile = empirical_quantile(stats, config.alpha)
    return TestReport(
        d_hat=float(params.d_hat),
        quantile_hat=quantile,
        reject=bool(params.d_hat < quantile),
        bootstrap_stats=stats,
        used_constrained=params.used_constrained,
        p_boot=params.p,
        q_boot=params.q,
        config=config,
        fit=params.fit,
    )
