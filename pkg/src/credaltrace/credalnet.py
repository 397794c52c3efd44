"""Locally and separately specified credal networks with interval CPTs.

The joint credal set (strong extension) is never materialised. Every
joint-level computation goes through a factorised point, i.e. a
:class:`~credaltrace.bayesnet.BayesNet` whose rows sit inside the intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .bayesnet import PROB_FLOOR, BayesNet, count_tables, validate_population
from .graph import Dag
from .stats import make_rng

__all__ = [
    "CredalNet",
    "idm_from_data",
    "contaminate",
    "vacuous",
    "singleton",
    "contains",
    "project_row",
    "sample_points",
    "sample_point",
    "clipped_mle",
    "constrained_mle",
]

_TOL = 1e-9
_CONTAINS_TOL = 1e-12
_MAX_REJECTIONS = 1000


@dataclass(frozen=True, eq=False)
class CredalNet:
    """A DAG with ``[lower, upper]`` bounds on every CPT entry.

    ``lower[x]`` and ``upper[x]`` have the CPT shape of variable ``x``. Each
    row must be a non-empty credal set whose bounds are all attainable.
    """

    dag: Dag
    lower: tuple[np.ndarray, ...]
    upper: tuple[np.ndarray, ...]

    def __post_init__(self):
        lo = tuple(np.array(t, dtype=float) for t in self.lower)
        hi = tuple(np.array(t, dtype=float) for t in self.upper)
        if len(lo) != self.dag.n_vars or len(hi) != self.dag.n_vars:
            raise ValueError(f"expected {self.dag.n_vars} interval tables")
        for x, (l, u) in enumerate(zip(lo, hi)):
            shape = (self.dag.n_configs(x), self.dag.cardinalities[x])
            if l.shape != shape or u.shape != shape:
                raise ValueError(f"interval table of variable {x} must have shape {shape}")
            _check_rows(x, l, u)
            l.setflags(write=False)
            u.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def widths(self) -> tuple[np.ndarray, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))


def _check_rows(x: int, l: np.ndarray, u: np.ndarray) -> None:
    if np.any(l < -_TOL) or np.any(u > 1 + _TOL) or np.any(l > u + _TOL):
        raise ValueError(f"variable {x}: bounds must satisfy 0 <= lower <= upper <= 1")
    sl = l.sum(axis=1, keepdims=True)
    su = u.sum(axis=1, keepdims=True)
    if np.any(sl > 1 + _TOL) or np.any(su < 1 - _TOL):
        raise ValueError(f"variable {x}: empty credal row (sum lower > 1 or sum upper < 1)")
    if np.any(l + (su - u) < 1 - _TOL) or np.any(u + (sl - l) > 1 + _TOL):
        raise ValueError(f"variable {x}: interval bounds are not all reachable")


def idm_from_data(g: Dag, data, s: float | Mapping[int, float]) -> CredalNet:
    """Local imprecise Dirichlet model: ``[n_ij/(n_j+s), (n_ij+s)/(n_j+s)]``.

    ``s`` may be a mapping from variable id to its own hyperparameter.
    """
    data = validate_population(g, data)
    if data.shape[0] == 0:
        raise ValueError("IDM needs at least one observation")
    lower, upper = [], []
    for x, n in enumerate(count_tables(g, data)):
        sx = float(s[x]) if isinstance(s, Mapping) else float(s)
        if not sx > 0:
            raise ValueError(f"IDM hyperparameter must be positive, got {sx} for variable {x}")
        denom = n.sum(axis=1, keepdims=True) + sx
        lower.append(n / denom)
        upper.append((n + sx) / denom)
    return CredalNet(g, tuple(lower), tuple(upper))


def contaminate(bn: BayesNet, eps: float) -> CredalNet:
    """Epsilon-contamination of every CPT row: ``[(1-eps)p, (1-eps)p + eps]``."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    lower = tuple((1.0 - eps) * t for t in bn.cpts)
    upper = tuple(np.minimum(l + eps, 1.0) for l in lower)
    return CredalNet(bn.dag, lower, upper)


def vacuous(g: Dag) -> CredalNet:
    """All intervals ``[0, 1]``: only the graph is disclosed."""
    shapes = [(g.n_configs(x), g.cardinalities[x]) for x in range(g.n_vars)]
    return CredalNet(g, tuple(np.zeros(s) for s in shapes), tuple(np.ones(s) for s in shapes))


def singleton(bn: BayesNet) -> CredalNet:
    return CredalNet(bn.dag, bn.cpts, bn.cpts)


def contains(cn: CredalNet, bn: BayesNet) -> bool:
    """True iff every CPT entry of ``bn`` lies in its interval."""
    if cn.dag != bn.dag:
        raise ValueError("credal network and Bayesian network have different graphs")
    return all(
        np.all(t >= l - _CONTAINS_TOL) and np.all(t <= u + _CONTAINS_TOL)
        for t, l, u in zip(bn.cpts, cn.lower, cn.upper)
    )


def project_row(target: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``target`` onto ``{p : lower <= p <= upper, sum p = 1}``.

    Solves ``sum clip(target - lam, lower, upper) = 1`` for the shift ``lam``
    by bisection; the left-hand side is non-increasing in ``lam``.
    """
    target = np.asarray(target, dtype=float)
    lo_lam = float(np.min(target - upper)) - 1.0
    hi_lam = float(np.max(target - lower)) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo_lam + hi_lam)
        if np.clip(target - mid, lower, upper).sum() > 1.0:
            lo_lam = mid
        else:
            hi_lam = mid
        if hi_lam - lo_lam < 1e-17:
            break
    p = np.clip(target - 0.5 * (lo_lam + hi_lam), lower, upper)
    # Put the remaining rounding residual on the entry with the most slack.
    resid = 1.0 - p.sum()
    slack = (upper - p) if resid > 0 else (p - lower)
    i = int(np.argmax(slack))
    p[i] = min(max(p[i] + resid, lower[i]), upper[i])
    return p


def _binary_range(l: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Feasible range of p1 for binary rows; both bounds of state 0 are honoured too.
    lo = np.clip(np.maximum(l[:, 1], 1.0 - u[:, 0]), 0.0, 1.0)
    hi = np.clip(np.minimum(u[:, 1], 1.0 - l[:, 0]), 0.0, 1.0)
    return lo, np.maximum(hi, lo)


def _sample_row(l: np.ndarray, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    k = l.size
    for _ in range(_MAX_REJECTIONS):
        head = rng.uniform(l[:-1], u[:-1])
        last = 1.0 - head.sum()
        if l[-1] - _CONTAINS_TOL <= last <= u[-1] + _CONTAINS_TOL:
            return np.append(head, min(max(last, l[-1]), u[-1]))
    return project_row(0.5 * (l + u), l, u)


def sample_points(cn: CredalNet, n: int, seed: int | np.random.Generator = 0) -> list[np.ndarray]:
    """Draw ``n`` factorised points inside ``cn``.

    Returns one array of shape ``(n, n_configs, card)`` per variable. Binary
    rows draw ``p1`` uniformly on its feasible interval; larger rows use
    rejection sampling in the box with a midpoint projection fallback.
    """
    if n < 1:
        raise ValueError(f"need at least one point, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    out = []
    for x in range(cn.dag.n_vars):
        l, u = cn.lower[x], cn.upper[x]
        nc, k = l.shape
        if k == 2:
            lo, hi = _binary_range(l, u)
            p1 = lo + (hi - lo) * rng.random((n, nc))
            pts = np.stack([1.0 - p1, p1], axis=-1)
        else:
            pts = np.empty((n, nc, k))
            for i in range(n):
                for j in range(nc):
                    pts[i, j] = _sample_row(l[j], u[j], rng)
        out.append(pts)
    return out


def sample_point(cn: CredalNet, seed: int | np.random.Generator = 0) -> BayesNet:
    """One Bayesian network drawn inside ``cn`` (see :func:`sample_points`)."""
    pts = sample_points(cn, 1, seed)
    return BayesNet(cn.dag, tuple(p[0] for p in pts))


def clipped_mle(cn: CredalNet, counts: list[np.ndarray]) -> BayesNet:
    """Row-wise MLE projected onto the intervals.

    For binary rows this is the exact constrained maximiser, since the row
    log-likelihood is concave in ``p1``.
    """
    cpts = []
    for n, l, u in zip(counts, cn.lower, cn.upper):
        nc, k = n.shape
        totals = n.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            free = np.where(totals > 0, n / totals, 1.0 / k)
        if k == 2:
            lo, hi = _binary_range(l, u)
            p1 = np.clip(free[:, 1], lo, hi)
            # Rows already inside keep their exact MLE values (no 1 - p rounding).
            inside = (free[:, 1] >= lo) & (free[:, 1] <= hi)
            cpts.append(np.where(inside[:, None], free, np.stack([1.0 - p1, p1], axis=-1)))
        else:
            cpts.append(np.stack([
                free[j] if np.all((free[j] >= l[j]) & (free[j] <= u[j])) else project_row(free[j], l[j], u[j])
                for j in range(nc)
            ]))
    return BayesNet(cn.dag, tuple(cpts))


def constrained_mle(
    cn: CredalNet,
    data,
    n_points: int = 500,
    seed: int | np.random.Generator = 0,
) -> BayesNet:
    """Approximate maximum likelihood point of ``data`` inside ``cn``.

    Candidates are ``n_points`` draws from :func:`sample_points` followed by
    :func:`clipped_mle`; the candidate with the highest data log-likelihood
    wins, ties going to the lowest index.
    """
    data = validate_population(cn.dag, data)
    if data.shape[0] == 0:
        raise ValueError("constrained MLE needs at least one observation")
    counts = count_tables(cn.dag, data)
    pts = sample_points(cn, n_points, seed)
    scores = np.zeros(n_points)
    for n, p in zip(counts, pts):
        scores += np.einsum("jk,ijk->i", n, np.log(np.maximum(p, PROB_FLOOR)))
    clipped = clipped_mle(cn, counts)
    clipped_score = sum(
        float(np.sum(n * np.log(np.maximum(t, PROB_FLOOR)))) for n, t in zip(counts, clipped.cpts)
    )
    best = int(np.argmax(scores))
    if clipped_score > scores[best]:
        return clipped
    return BayesNet(cn.dag, tuple(p[best] for p in pts))
