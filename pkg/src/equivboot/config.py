"""Solver and test configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

from .errors import InvalidConfig
from .simplex import NormKind

U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the constrained maximum-likelihood fit.

    Outward L1 and L-infinity fits are solved exactly by enumerating at most
    ``max_pieces`` half-space pieces; everything else goes through SLSQP with
    ``multistart_count`` starting points.  ``interior_floor`` keeps probabilities away from zero.
    """

    max_iter: int = 500
    ftol: float = 1e-13
    constraint_tol: float = 1e-8
    multistart_count: int = 5
    interior_floor: float = 1e-9
    tie_tol: float = 1e-8
    max_pieces: int = 1 << 16

    def __post_init__(self):
        if self.constraint_tol <= 0:
            raise InvalidConfig("constraint_tol must be positive")
        if not 0 < self.interior_floor < 0.5:
            raise InvalidConfig("interior_floor must lie in (0, 1/k)")
        if self.multistart_count < 1:
            raise InvalidConfig("multistart_count must be at least 1")
        if self.max_iter < 1:
            raise InvalidConfig("max_iter must be at least 1")
        if self.ftol <= 0 or self.tie_tol < 0:
            raise InvalidConfig("ftol must be positive and tie_tol nonnegative")
        if self.max_pieces < 1:
            raise InvalidConfig("max_pieces must be at least 1")


@dataclass(frozen=True)
class TestConfig:
    norm: NormKind
    epsilon: float
    alpha: float = 0.05
    bootstrap_b: int = 500
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        try:
            object.__setattr__(self, "norm", NormKind.parse(self.norm))
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        if not self.epsilon > 0:
            raise InvalidConfig(f"epsilon must be positive, got {self.epsilon!r}")
        if not 0 < self.alpha < 0.5:
            raise InvalidConfig(f"alpha must lie in (0, 0.5), got {self.alpha!r}")
        if int(self.bootstrap_b) != self.bootstrap_b or self.bootstrap_b < 1:
            raise InvalidConfig(f"bootstrap size must be a positive integer, got {self.bootstrap_b!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= U64_MAX:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "bootstrap_b", int(self.bootstrap_b))
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed: int) -> "TestConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["norm"] = str(self.norm)
        return d
