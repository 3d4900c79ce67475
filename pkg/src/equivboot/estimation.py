"""Unconstrained and norm-constrained maximum likelihood for two multinomials.

The constrained problem maximises ``sum x log p + y log q`` over pairs of
simplex points with ``||p - q|| = eps``.  Two routes are used:

* Outward fits (``||p_hat - q_hat|| < eps``) under L1 or L-infinity.  The set
  ``{||theta|| >= eps}`` is a finite union of half-spaces
  (``s . theta >= eps`` over sign patterns ``s``), the likelihood is concave,
  and its maximum over the union lies on the sphere.  On each half-space the
  problem collapses to one concave scalar equation, so the global optimum is
  found exactly by enumerating pieces.
* Everything else (L2 in both directions, inward fits for every norm) is a
  smooth program solved with SLSQP from several starting points.  Inward
  fits are convex because the maximum over the sphere equals the maximum
  over the ball.

Every candidate is pushed onto the sphere exactly at the end by scaling
``p - q`` about the midpoint ``(p + q) / 2``, which keeps both vectors on the
simplex and multiplies the norm by the chosen factor.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize

from .config import SolverConfig
from .errors import DimensionMismatch, DomainError, EpsilonInfeasible, InvalidConfig, NoConvergence
from .norms import max_norm_on_simplex, norm_eval, norm_rows
from .simplex import NormKind, ProbVector, as_counts

_BISECT_STEPS = 80


@dataclass(frozen=True)
class ConstrainedFit:
    p_tilde: ProbVector
    q_tilde: ProbVector
    log_likelihood: float
    constraint_residual: float
    converged: bool
    starts_tried: int
    method: str = "slsqp"


class BootstrapParams(NamedTuple):
    """Resampling parameters picked by the case split on ``d_hat``."""

    p: ProbVector
    q: ProbVector
    d_hat: float
    fit: Optional[ConstrainedFit] = None

    @property
    def used_constrained(self) -> bool:
        return self.fit is not None


def _xlogy_sum(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    # 0 * log 0 = 0; rows of ``probs`` are broadcast against ``counts``
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, counts * np.log(probs), 0.0)
    return terms.sum(axis=-1)


def log_likelihood(p, q, x, y) -> float:
    """Log-likelihood of the pair ``(p, q)`` without multinomial coefficients."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    x = np.asarray(x)
    y = np.asarray(y)
    if not (p.shape == q.shape == x.shape == y.shape):
        raise DimensionMismatch("p, q, x and y must share one dimension")
    if np.any((x > 0) & (p <= 0)) or np.any((y > 0) & (q <= 0)):
        raise DomainError("positive count at a zero probability")
    return float(_xlogy_sum(x, p) + _xlogy_sum(y, q))


def mle(x, y) -> tuple[ProbVector, ProbVector]:
    x, y = as_counts(x), as_counts(y)
    if x.k != y.k:
        raise DimensionMismatch(f"count vectors differ in length: {x.k} vs {y.k}")
    return ProbVector(x.counts / x.total), ProbVector(y.counts / y.total)


# ---------------------------------------------------------------------------
# Exact outward fit for L1 / L-infinity


def _solve_pieces(A, B, C, D, c):
    """Maximise ``A log a + B log(1-a) + C log(a-c) + D log(1-a+c)`` on [c, 1].

    Vectorised over pieces.  The derivative is decreasing, so bisection on
    its sign converges to the unique maximiser (or to an endpoint).
    """
    lo = np.full(A.shape, float(c))
    hi = np.ones(A.shape)
    for _ in range(_BISECT_STEPS):
        a = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            # 0/0 at a vanishing group counts as a zero contribution
            grad = np.nan_to_num(A / a) - np.nan_to_num(B / (1.0 - a)) \
                + np.nan_to_num(C / (a - c)) - np.nan_to_num(D / (1.0 - a + c))
        up = grad > 0
        lo = np.where(up, a, lo)
        hi = np.where(up, hi, a)
    return 0.5 * (lo + hi)


def _group_weights(masks, primary, fallback):
    """Within-group proportions, borrowing ``fallback`` where ``primary`` is empty."""
    out = np.empty(masks.shape)
    for group in (masks, ~masks):
        size = group.sum(axis=1, keepdims=True).astype(float)
        w1 = np.where(group, primary, 0.0)
        w2 = np.where(group, fallback, 0.0)
        s1 = w1.sum(axis=1, keepdims=True)
        s2 = w2.sum(axis=1, keepdims=True)
        uniform = np.where(group, 1.0, 0.0) / np.maximum(size, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(s1 > 0, w1 / s1, np.where(s2 > 0, w2 / s2, uniform))
        out = np.where(group, w, out)
    return out


def _lead_pieces(masks, x_lead, x_lag, c):
    """Optimum of each piece ``P_lead(S) - P_lag(S) = c``."""
    xl = x_lead.astype(float)
    xg = x_lag.astype(float)
    A = masks @ xl
    C = masks @ xg
    B = xl.sum() - A
    D = xg.sum() - C
    a = _solve_pieces(A, B, C, D, c)[:, None]
    w_lead = _group_weights(masks, xl, xg)
    w_lag = _group_weights(masks, xg, xl)
    lead = np.where(masks, a * w_lead, (1.0 - a) * w_lead)
    lag = np.where(masks, (a - c) * w_lag, (1.0 - a + c) * w_lag)
    return lead, lag


def _all_masks(k):
    codes = np.arange(1, (1 << k) - 1, dtype=np.int64)
    return (codes[:, None] >> np.arange(k)) & 1 == 1


def _piece_ll(masks, x, y, c):
    p, q = _lead_pieces(masks, x, y, c)
    return _xlogy_sum(x, p) + _xlogy_sum(y, q)


def _swap_neighbours(mask):
    # every single flip and every pair flip, minus the empty and full sets
    k = mask.size
    i, j = np.triu_indices(k)
    out = np.repeat(mask[None], i.size, axis=0)
    rows = np.arange(i.size)
    out[rows, i] ^= True
    pair = i != j
    out[rows[pair], j[pair]] ^= True
    return out[out.any(axis=1) & ~out.all(axis=1)]


def _l1_search(x, y, c, starts=3):
    """Local search over positive sets when full enumeration is too large.

    Starts from the best prefixes of the likelihood-ratio order ``x_j / y_j``
    and climbs by single and pair flips.  Not guaranteed optimal.
    """
    k = x.size
    ratio = np.where(y > 0, x / np.where(y > 0, y, 1.0), np.inf)
    order = np.argsort(-ratio, kind="stable")
    prefixes = np.zeros((k - 1, k), dtype=bool)
    for m in range(1, k):
        prefixes[m - 1, order[:m]] = True
    values = _piece_ll(prefixes, x, y, c)
    found = []
    for s in np.argsort(-values, kind="stable")[:starts]:
        cur, best = prefixes[s].copy(), values[s]
        while True:
            nb = _swap_neighbours(cur)
            v = _piece_ll(nb, x, y, c)
            i = int(np.argmax(v))
            if not v[i] > best + 1e-12:
                break
            cur, best = nb[i], v[i]
        found.append(cur)
    return np.array(found)


def _outward_candidates(x, y, eps, kind, cfg):
    if kind is NormKind.L1:
        k = x.size
        if (1 << k) - 2 <= cfg.max_pieces:
            masks = _all_masks(k)
        else:
            masks = _l1_search(x, y, 0.5 * eps)
        p, q = _lead_pieces(masks, x, y, 0.5 * eps)
        return p, q
    masks = np.eye(x.size, dtype=bool)
    p_up, q_up = _lead_pieces(masks, x, y, eps)
    q_dn, p_dn = _lead_pieces(masks, y, x, eps)
    return np.vstack([p_up, p_dn]), np.vstack([q_up, q_dn])


def _pull_to_sphere(p, q, p_hat, q_hat, eps, kind):
    """Move a candidate with norm > eps toward the MLE until the norm is eps.

    Along the segment the norm is convex and the likelihood concave, so the
    crossing is unique and no worse than the candidate.
    """
    dp, dq = p - p_hat, q - q_hat
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_STEPS):
        t = 0.5 * (lo + hi)
        if norm_eval(kind, (p_hat - q_hat) + t * (dp - dq)) < eps:
            lo = t
        else:
            hi = t
    return p_hat + hi * dp, q_hat + hi * dq


# ---------------------------------------------------------------------------
# SLSQP route


def _radial(p, q, eps, kind):
    """Scale ``p - q`` about the midpoint so that its norm is ``eps``."""
    d = norm_eval(kind, p - q)
    if d == 0:
        return None
    m = 0.5 * (p + q)
    t = eps / d
    return m + t * (p - m), m + t * (q - m)


def _clamp(v, floor):
    v = np.maximum(v, floor)
    return v / v.sum()


def _starts(p_hat, q_hat, eps, kind, count, floor):
    th = p_hat - q_hat
    d = norm_eval(kind, th)
    starts = []
    if d > 0:
        p, q = _radial(p_hat, q_hat, eps, kind)
        starts.append((_clamp(p, floor), _clamp(q, floor)))
    # pushes along e_a - e_b for the largest-|theta| coordinates
    order = np.argsort(-np.abs(th), kind="stable")
    step = {NormKind.L1: eps / 4, NormKind.LINF: eps / 2, NormKind.L2: eps / (2 * np.sqrt(2))}[kind]
    for a, b in itertools.permutations(order[: min(order.size, 4)].tolist(), 2):
        if len(starts) >= count:
            break
        v = np.zeros_like(th)
        v[a], v[b] = 1.0, -1.0
        p = _clamp(p_hat + step * v, floor)
        q = _clamp(q_hat - step * v, floor)
        pushed = _radial(p, q, eps, kind)
        if pushed is not None:
            p, q = _clamp(pushed[0], floor), _clamp(pushed[1], floor)
        starts.append((p, q))
    return starts[:count]


def _slsqp(x, y, eps, kind, start, outward, cfg):
    k = x.size
    n = float(x.sum() + y.sum())
    xf, yf = x / n, y / n
    lifted = kind is NormKind.L1

    def split(z):
        return z[:k], z[k: 2 * k]

    def objective(z):
        p, q = split(z)
        return -(float(xf @ np.log(p)) + float(yf @ np.log(q)))

    def gradient(z):
        p, q = split(z)
        g = np.zeros_like(z)
        g[:k] = -xf / p
        g[k: 2 * k] = -yf / q
        return g

    nvar = 3 * k if lifted else 2 * k
    sums = np.zeros((2, nvar))
    sums[0, :k] = 1.0
    sums[1, k: 2 * k] = 1.0
    constraints = [{"type": "eq", "fun": lambda z: sums @ z - 1.0, "jac": lambda z: sums}]

    if kind is NormKind.L2:
        def sq(z):
            p, q = split(z)
            th = p - q
            return float(th @ th) - eps * eps

        def sq_jac(z):
            p, q = split(z)
            th = p - q
            return np.concatenate([2 * th, -2 * th])

        if outward:
            constraints.append({"type": "eq", "fun": sq, "jac": sq_jac})
        else:
            constraints.append({"type": "ineq", "fun": lambda z: -sq(z), "jac": lambda z: -sq_jac(z)})
    elif kind is NormKind.LINF:
        if outward:
            raise AssertionError("outward L-infinity fits use the exact route")
        eye = np.eye(k)
        G = np.vstack([np.hstack([-eye, eye]), np.hstack([eye, -eye])])
        constraints.append({"type": "ineq", "fun": lambda z: eps - G @ z, "jac": lambda z: -G})
    else:
        if outward:
            raise AssertionError("outward L1 fits use the exact route")
        eye = np.eye(k)
        # t_j >= |p_j - q_j|, sum t <= eps
        G = np.vstack([
            np.hstack([-eye, eye, eye]),
            np.hstack([eye, -eye, eye]),
            np.concatenate([np.zeros(2 * k), -np.ones(k)])[None, :],
        ])
        h = np.concatenate([np.zeros(2 * k), [eps]])
        constraints.append({"type": "ineq", "fun": lambda z: G @ z + h, "jac": lambda z: G})

    floor = cfg.interior_floor
    bounds = [(floor, 1.0)] * (2 * k)
    z0 = np.concatenate(start)
    if lifted:
        bounds += [(0.0, eps)] * k
        t0 = np.abs(start[0] - start[1])
        t0 = t0 * min(1.0, eps / max(t0.sum(), 1e-300))
        z0 = np.concatenate([z0, t0])
    with warnings.catch_warnings():
        # SLSQP may step slightly outside the bounds; the result is clamped below
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            objective, z0, jac=gradient, method="SLSQP", bounds=bounds, constraints=constraints,
            options={"maxiter": cfg.max_iter, "ftol": cfg.ftol},
        )
    p, q = split(np.asarray(res.x, dtype=float))
    p, q = _clamp(p, 0.0), _clamp(q, 0.0)
    return p, q, bool(res.success)


# ---------------------------------------------------------------------------


def _lex_best(ps, qs, lls, tie_tol):
    best = np.max(lls)
    near = np.flatnonzero(lls >= best - tie_tol)
    keys = [tuple(np.concatenate([ps[i], qs[i]]).tolist()) for i in near]
    return int(near[max(range(len(near)), key=keys.__getitem__)])


def _finish(p, q, eps, kind, floor):
    p = _clamp(np.asarray(p, dtype=float), floor)
    q = _clamp(np.asarray(q, dtype=float), floor)
    pushed = _radial(p, q, eps, kind)
    if pushed is not None and np.all(pushed[0] >= 0) and np.all(pushed[1] >= 0):
        p, q = pushed
    return p, q


def constrained_mle(x, y, epsilon: float, kind, cfg: SolverConfig | None = None) -> ConstrainedFit:
    """Maximise the likelihood on the sphere ``||p - q|| = epsilon``.

    Among optima whose log-likelihoods lie within ``cfg.tie_tol`` of the best,
    the pair with the lexicographically largest ``(p, q)`` is returned.
    """
    cfg = cfg or SolverConfig()
    kind = NormKind.parse(kind)
    x, y = as_counts(x), as_counts(y)
    if x.k != y.k:
        raise DimensionMismatch(f"count vectors differ in length: {x.k} vs {y.k}")
    eps = float(epsilon)
    top = max_norm_on_simplex(kind)
    if not 0 < eps < top:
        raise EpsilonInfeasible(f"epsilon must lie in (0, {top:g}) for the {kind} norm, got {eps!r}")
    k = x.k
    if cfg.interior_floor >= 1.0 / k:
        raise InvalidConfig(f"interior_floor must be below 1/k = {1.0 / k:g}")

    xc, yc = x.counts, y.counts
    p_hat, q_hat = xc / x.total, yc / y.total
    d_hat = norm_eval(kind, p_hat - q_hat)
    floor = cfg.interior_floor

    if abs(d_hat - eps) <= cfg.constraint_tol:
        ps, qs, method, starts, converged = p_hat[None], q_hat[None], "mle", 1, True
    elif d_hat < eps and kind is not NormKind.L2:
        ps, qs = _outward_candidates(xc, yc, eps, kind, cfg)
        for i in np.flatnonzero(norm_rows(kind, ps - qs) > eps + cfg.constraint_tol):
            ps[i], qs[i] = _pull_to_sphere(ps[i], qs[i], p_hat, q_hat, eps, kind)
        method, starts, converged = "pieces", ps.shape[0], True
    else:
        outward = d_hat < eps
        found_p, found_q, ok = [], [], []
        start_list = _starts(p_hat, q_hat, eps, kind, cfg.multistart_count, floor)
        for start in start_list:
            try:
                p, q, success = _slsqp(xc, yc, eps, kind, start, outward, cfg)
            except (ValueError, FloatingPointError):
                continue
            if np.all(np.isfinite(p)) and np.all(np.isfinite(q)):
                found_p.append(p)
                found_q.append(q)
                ok.append(success)
        if not found_p:
            raise NoConvergence(f"all {len(start_list)} starts failed", float("nan"))
        ps, qs = np.array(found_p), np.array(found_q)
        method, starts, converged = "slsqp", len(start_list), any(ok)

    finished = [_finish(ps[i], qs[i], eps, kind, floor) for i in range(ps.shape[0])]
    ps = np.array([f[0] for f in finished])
    qs = np.array([f[1] for f in finished])
    lls = _xlogy_sum(xc, ps) + _xlogy_sum(yc, qs)
    residuals = np.abs(norm_rows(kind, ps - qs) - eps)
    feasible = residuals <= cfg.constraint_tol
    if not feasible.any():
        raise NoConvergence(
            f"no start reached the constraint surface (best residual {residuals.min():.3g})",
            float(residuals.min()),
        )
    lls = np.where(feasible, lls, -np.inf)
    i = _lex_best(ps, qs, lls, cfg.tie_tol)
    return ConstrainedFit(
        p_tilde=ProbVector(ps[i]),
        q_tilde=ProbVector(qs[i]),
        log_likelihood=float(lls[i]),
        constraint_residual=float(residuals[i]),
        converged=bool(converged),
        starts_tried=int(starts),
        method=method,
    )


def select_bootstrap_params(x, y, epsilon: float, kind, cfg: SolverConfig | None = None) -> BootstrapParams:
    """Resample from the MLE when ``d_hat >= epsilon``, else from the constrained fit."""
    kind = NormKind.parse(kind)
    p_hat, q_hat = mle(x, y)
    d_hat = norm_eval(kind, p_hat.entries - q_hat.entries)
    if d_hat >= epsilon:
        return BootstrapParams(p_hat, q_hat, d_hat, None)
    fit = constrained_mle(x, y, epsilon, kind, cfg)
    return BootstrapParams(fit.p_tilde, fit.q_tilde, d_hat, fit)
