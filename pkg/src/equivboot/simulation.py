"""Simulation study: scenario families, rejection rates and parameter sweeps."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bootstrap import equivalence_test
from .config import TestConfig
from .errors import BadDelta, BadDimension, EquivbootError
from .norms import norm_eval
from .sampling import MultinomialSampler, RngStream
from .simplex import NormKind, ProbVector, validate_prob

THREADS_ENV = "EQUIVBOOT_THREADS"

BUILTIN = ("det15", "det16", "det17", "det18")
DEFAULT_NORM = {"det15": NormKind.LINF, "det16": NormKind.LINF, "det17": NormKind.L1, "det18": NormKind.L1}
DELTA_RANGE = {"det15": (0.0, 1.0), "det16": (0.0, 1.0), "det17": (0.0, 0.4), "det18": (0.0, 0.4)}

CSV_HEADER = ["scenario", "delta", "n1", "n2", "norm", "epsilon", "alpha", "reps", "B",
              "rejection_rate", "mc_stderr", "seed"]


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    delta: float
    p: ProbVector
    q: ProbVector

    @property
    def k(self) -> int:
        return self.p.k

    @property
    def default_norm(self) -> NormKind:
        return DEFAULT_NORM.get(self.name, NormKind.L1)

    def distance(self, kind=None) -> float:
        return norm_eval(kind or self.default_norm, self.p.entries - self.q.entries)

    @classmethod
    def custom(cls, p, q) -> "Scenario":
        p, q = validate_prob(p), validate_prob(q)
        if p.k != q.k:
            raise BadDimension(f"p and q differ in length: {p.k} vs {q.k}")
        return cls("custom", 0.0, p, q)

    @classmethod
    def builtin(cls, name: str, delta: float, k: int = 6) -> "Scenario":
        p, q = scenario_vectors(name, delta, k)
        return cls(name, float(delta), p, q)


def scenario_vectors(name: str, delta: float, k: int = 6) -> tuple[ProbVector, ProbVector]:
    """The probability-vector pairs of the simulation study, indexed by ``delta``."""
    if name not in BUILTIN:
        raise BadDelta(f"unknown scenario {name!r}; expected one of {', '.join(BUILTIN)}")
    if k != 6:
        raise BadDimension(f"scenario {name} is defined for k = 6, got k = {k}")
    lo, hi = DELTA_RANGE[name]
    d = float(delta)
    if not lo < d < hi:
        raise BadDelta(f"delta for {name} must lie in ({lo:g}, {hi:g}), got {delta!r}")
    if name == "det15":
        p = [1 - d] + [d / 5] * 5
        q = [d] + [(1 - d) / 5] * 5
    elif name == "det16":
        p = [(1 - d) / 2] * 2 + [d / 4] * 4
        q = [d / 2] * 2 + [(1 - d) / 4] * 4
    elif name == "det17":
        p = [0.1, 0.1, 0.1, 0.2, 0.1, 0.4]
        q = [0.125, 0.125, 0.125, 0.125, 0.1 + d, 0.4 - d]
    else:
        p = [0.1, 0.1, 0.1, 0.2, 0.1, 0.4]
        q = [0.1, 0.125, 0.125, 0.15, 0.1 + d, 0.4 - d]
    return ProbVector(p), ProbVector(q)


def scenario_distance(name: str, delta: float) -> float:
    """Closed-form distance of a built-in scenario under its own norm."""
    return {
        "det15": lambda d: abs(1 - 2 * d),
        "det16": lambda d: abs(0.5 - d),
        "det17": lambda d: 0.15 + 2 * d,
        "det18": lambda d: 0.1 + 2 * d,
    }[name](float(delta))


def boundary_deltas(name: str, epsilon: float) -> list[float]:
    """Values of ``delta`` at which a built-in scenario sits on ``||p - q|| = epsilon``."""
    if name == "det15":
        cands = [(1 - epsilon) / 2, (1 + epsilon) / 2]
    elif name == "det16":
        cands = [0.5 - epsilon, 0.5 + epsilon]
    elif name == "det17":
        cands = [(epsilon - 0.15) / 2]
    elif name == "det18":
        cands = [(epsilon - 0.1) / 2]
    else:
        return []
    lo, hi = DELTA_RANGE[name]
    return [d for d in cands if lo < d < hi]


def default_deltas(name: str, epsilon: float = 0.25) -> list[float]:
    """Nine-point grid around the first boundary, clipped to the scenario's domain."""
    lo, hi = DELTA_RANGE[name]
    centre = boundary_deltas(name, epsilon)[0]
    half = {"det15": 0.2, "det16": 0.2, "det17": 0.04, "det18": 0.06}[name]
    grid = np.linspace(centre - half, centre + half, 9)
    return [round(float(d), 10) for d in grid if lo < d < hi]


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise EquivbootError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise EquivbootError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Replications


def replicate_seed(stream: RngStream, r: int) -> int:
    """Seed of the bootstrap run inside replication ``r``."""
    return stream.derive("rep", r).derive("test", 0).as_seed()


def replicate_data(scenario: Scenario, n1: int, n2: int, stream: RngStream, r: int):
    gen = stream.derive("rep", r).generator()
    x = MultinomialSampler(scenario.p.entries).draw(gen, n1)
    y = MultinomialSampler(scenario.q.entries).draw(gen, n2)
    return x, y


def _decide_chunk(args) -> list[bool]:
    scenario, n1, n2, config, stream, reps = args
    out = []
    sp = MultinomialSampler(scenario.p.entries)
    sq = MultinomialSampler(scenario.q.entries)
    for r in reps:
        rep = stream.derive("rep", r)
        gen = rep.generator()
        x = sp.draw(gen, n1)
        y = sq.draw(gen, n2)
        seed = rep.derive("test", 0).as_seed()
        out.append(equivalence_test(x, y, config.with_seed(seed)).reject)
    return out


def _chunks(reps: int, size: int) -> list[range]:
    return [range(i, min(i + size, reps)) for i in range(0, reps, size)]


def _run(tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [_decide_chunk(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_decide_chunk, tasks))


def replicate_decisions(scenario: Scenario, n1: int, n2: int, reps: int, config: TestConfig,
                        stream: RngStream, workers: int | None = None) -> np.ndarray:
    """Reject/accept decision of every replication, in replication order."""
    if reps < 1:
        raise EquivbootError("reps must be at least 1")
    workers = worker_count() if workers is None else workers
    size = max(1, math.ceil(reps / (4 * workers))) if workers > 1 else reps
    tasks = [(scenario, n1, n2, config, stream, ch) for ch in _chunks(reps, size)]
    return np.array([d for part in _run(tasks, workers) for d in part], dtype=bool)


def mc_stderr(rate: float, reps: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / reps)


def rejection_probability(scenario: Scenario, n1: int, n2: int, reps: int, config: TestConfig,
                          stream: RngStream, workers: int | None = None) -> tuple[float, float]:
    """Fraction of replications in which the test rejects, with its standard error."""
    decisions = replicate_decisions(scenario, n1, n2, reps, config, stream, workers)
    rate = float(decisions.mean())
    return rate, mc_stderr(rate, reps)


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    delta: float
    n1: int
    n2: int
    norm: str
    epsilon: float
    alpha: float
    reps: int
    B: int
    rejection_rate: float
    mc_stderr: float
    seed: int

    def sort_key(self):
        return (self.scenario, self.norm, self.n1, self.delta, self.n2)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([
                r.scenario, repr(float(r.delta)), r.n1, r.n2, r.norm, repr(float(r.epsilon)),
                repr(float(r.alpha)), r.reps, r.B, f"{r.rejection_rate:.17g}", f"{r.mc_stderr:.17g}", r.seed,
            ])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "SweepResult":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise EquivbootError("empty CSV") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise EquivbootError(f"unexpected CSV header: {','.join(header)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CSV_HEADER):
                raise EquivbootError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(rec)}")
            try:
                row = SweepRow(
                    scenario=rec[0], delta=float(rec[1]), n1=int(rec[2]), n2=int(rec[3]), norm=rec[4],
                    epsilon=float(rec[5]), alpha=float(rec[6]), reps=int(rec[7]), B=int(rec[8]),
                    rejection_rate=float(rec[9]), mc_stderr=float(rec[10]), seed=int(rec[11]),
                )
            except ValueError as exc:
                raise EquivbootError(f"line {lineno}: {exc}") from None
            if not (0.0 <= row.rejection_rate <= 1.0) or not math.isfinite(row.delta):
                raise EquivbootError(f"line {lineno}: rejection rate outside [0, 1] or bad delta")
            rows.append(row)
        return cls(rows)

    @classmethod
    def read_csv(cls, path) -> "SweepResult":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read())


def cell_stream(root: RngStream, scenario: Scenario, n1: int, n2: int) -> RngStream:
    """Stream of one grid cell, named by its coordinates only."""
    if scenario.name == "custom":
        coords = "custom|" + ",".join(float(v).hex() for v in (*scenario.p, *scenario.q))
    else:
        coords = f"{scenario.name}|{float(scenario.delta).hex()}"
    return root.derive(f"cell|{coords}|{n1}|{n2}", 0)


def sweep(scenarios: Sequence[Scenario], sizes: Iterable[tuple[int, int]], reps: int, config: TestConfig,
          root: RngStream | None = None, workers: int | None = None) -> SweepResult:
    """Rejection rate for every (scenario, sample size) cell.

    Each cell draws from its own coordinate-named stream, so a sub-grid or a
    reordered grid reproduces the same numbers row for row.
    """
    sizes = list(sizes)
    if not scenarios or not sizes:
        raise EquivbootError("sweep grid is empty")
    root = root if root is not None else RngStream(config.seed)
    workers = worker_count() if workers is None else workers
    cells = [(sc, n1, n2) for sc in scenarios for n1, n2 in sizes]
    splits = max(1, math.ceil(4 * workers / len(cells))) if workers > 1 else 1
    per_cell = math.ceil(reps / splits)
    tasks, owners = [], []
    for idx, (sc, n1, n2) in enumerate(cells):
        for ch in _chunks(reps, per_cell):
            tasks.append((sc, n1, n2, config, cell_stream(root, sc, n1, n2), ch))
            owners.append(idx)
    results = _run(tasks, workers)
    rejections = [0] * len(cells)
    for idx, part in zip(owners, results):
        rejections[idx] += sum(part)
    rows = []
    for idx, (sc, n1, n2) in enumerate(cells):
        rate = rejections[idx] / reps
        rows.append(SweepRow(
            scenario=sc.name, delta=sc.delta, n1=n1, n2=n2, norm=str(config.norm), epsilon=config.epsilon,
            alpha=config.alpha, reps=reps, B=config.bootstrap_b, rejection_rate=rate,
            mc_stderr=mc_stderr(rate, reps), seed=root.root_seed,
        ))
    rows.sort(key=SweepRow.sort_key)
    return SweepResult(rows)
