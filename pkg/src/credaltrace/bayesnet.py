"""Bayesian networks over categorical variables: evaluation, sampling, learning."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .graph import Dag
from .stats import make_rng

__all__ = [
    "PROB_FLOOR",
    "BayesNet",
    "validate_population",
    "count_tables",
    "random_parameters",
    "log_joint",
    "log_likelihood",
    "forward_sample",
    "subsample",
    "mle",
    "dirichlet_estimate",
]

# Factors are clamped here before taking logs so that LLRs stay finite.
PROB_FLOOR = 1e-12
_ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BayesNet:
    """A DAG plus one conditional probability table per variable.

    ``cpts[x]`` has shape ``(dag.n_configs(x), dag.cardinalities[x])`` with rows
    ordered as in :func:`credaltrace.graph.parent_configurations`.
    """

    dag: Dag
    cpts: tuple[np.ndarray, ...]

    def __post_init__(self):
        cpts = tuple(np.array(t, dtype=float) for t in self.cpts)
        if len(cpts) != self.dag.n_vars:
            raise ValueError(f"expected {self.dag.n_vars} CPTs, got {len(cpts)}")
        for x, t in enumerate(cpts):
            shape = (self.dag.n_configs(x), self.dag.cardinalities[x])
            if t.shape != shape:
                raise ValueError(f"CPT of variable {x} has shape {t.shape}, expected {shape}")
            if np.any(t < 0) or np.any(t > 1):
                raise ValueError(f"CPT of variable {x} has entries outside [0, 1]")
            if np.any(np.abs(t.sum(axis=1) - 1.0) > _ROW_TOL):
                raise ValueError(f"CPT rows of variable {x} do not sum to 1")
            t.setflags(write=False)
        object.__setattr__(self, "cpts", cpts)

    @cached_property
    def log_cpts(self) -> tuple[np.ndarray, ...]:
        return tuple(np.log(np.maximum(t, PROB_FLOOR)) for t in self.cpts)

    def allclose(self, other: "BayesNet", atol: float = 1e-12) -> bool:
        return self.dag == other.dag and all(
            np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.cpts, other.cpts)
        )


def validate_population(g: Dag, data) -> np.ndarray:
    """Return ``data`` as an int64 matrix after checking it against ``g``."""
    arr = np.asarray(data)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != g.n_vars:
        raise ValueError(f"population must have {g.n_vars} columns, got shape {np.shape(data)}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("population entries must be integer states")
    arr = arr.astype(np.int64, copy=False)
    cards = np.asarray(g.cardinalities)
    if arr.size and (np.any(arr < 0) or np.any(arr >= cards)):
        raise ValueError("population has states outside the variable cardinalities")
    return arr


def count_tables(g: Dag, data) -> list[np.ndarray]:
    """Per-variable tables of counts ``n_ij`` with shape ``(n_configs, card)``."""
    data = validate_population(g, data)
    tables = []
    for x in range(g.n_vars):
        k = g.cardinalities[x]
        nc = g.n_configs(x)
        flat = g.config_index(x, data) * k + data[:, x]
        tables.append(np.bincount(flat, minlength=nc * k).reshape(nc, k).astype(float))
    return tables


def random_parameters(g: Dag, seed: int = 0) -> BayesNet:
    """Draw every CPT row from the flat Dirichlet on its simplex."""
    rng = make_rng(seed)
    cpts = []
    for x in range(g.n_vars):
        k = g.cardinalities[x]
        rows = rng.dirichlet(np.ones(k), size=g.n_configs(x))
        cpts.append(rows / rows.sum(axis=1, keepdims=True))
    return BayesNet(g, tuple(cpts))


def log_joint(bn: BayesNet, x) -> float | np.ndarray:
    """Log probability of complete assignment(s) under ``bn``.

    A 1-d ``x`` gives a float; a 2-d array gives one value per row.
    """
    arr = np.asarray(x)
    single = arr.ndim == 1
    data = validate_population(bn.dag, arr)
    out = np.zeros(data.shape[0])
    for v, logt in enumerate(bn.log_cpts):
        out += logt[bn.dag.config_index(v, data), data[:, v]]
    return float(out[0]) if single else out


def log_likelihood(bn: BayesNet, counts: Sequence[np.ndarray]) -> float:
    """Data log-likelihood from sufficient statistics (see :func:`count_tables`)."""
    return float(sum(np.sum(n * lt) for n, lt in zip(counts, bn.log_cpts)))


def forward_sample(bn: BayesNet, n: int, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Ancestral sampling of ``n`` i.i.d. assignments."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    g = bn.dag
    data = np.zeros((n, g.n_vars), dtype=np.int64)
    for v in g.topo_order:
        cum = np.cumsum(bn.cpts[v], axis=1)[:, :-1]
        u = rng.random(n)
        rows = cum[g.config_index(v, data)]
        data[:, v] = (u[:, None] >= rows).sum(axis=1)
    return data


def subsample(
    data: np.ndarray,
    n: int,
    seed: int | np.random.Generator = 0,
    return_index: bool = False,
):
    """Uniform sample of ``n`` distinct rows (without replacement)."""
    data = np.asarray(data)
    if not 1 <= n <= data.shape[0]:
        raise ValueError(f"cannot draw {n} rows from a population of {data.shape[0]}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    idx = rng.choice(data.shape[0], size=n, replace=False)
    return (data[idx], idx) if return_index else data[idx]


def _normalise_counts(tables: list[np.ndarray]) -> tuple[np.ndarray, ...]:
    cpts = []
    for n in tables:
        totals = n.sum(axis=1, keepdims=True)
        k = n.shape[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(totals > 0, n / totals, 1.0 / k)
        cpts.append(rows)
    return tuple(cpts)


def mle(g: Dag, data) -> BayesNet:
    """Maximum likelihood CPTs ``n_ij / n_j``; unseen parent configurations are uniform."""
    data = validate_population(g, data)
    if data.shape[0] == 0:
        raise ValueError("mle needs at least one observation")
    return BayesNet(g, _normalise_counts(count_tables(g, data)))


def dirichlet_estimate(g: Dag, data, c: float | Sequence[float] = 1.0) -> BayesNet:
    """Posterior-mean CPTs ``(n_ij + c_i) / (n_j + S)`` under a Dirichlet prior.

    ``c`` is either the total concentration ``S`` (split evenly over states)
    or an explicit pseudo-count vector applied to every row.
    """
    data = validate_population(g, data)
    cpts = []
    for x, n in enumerate(count_tables(g, data)):
        k = g.cardinalities[x]
        prior = np.full(k, float(c) / k) if np.isscalar(c) else np.asarray(c, dtype=float)
        if prior.shape != (k,):
            raise ValueError(f"pseudo-counts for variable {x} must have length {k}")
        if np.any(prior <= 0):
            raise ValueError("pseudo-counts must be strictly positive")
        cpts.append((n + prior) / (n.sum(axis=1, keepdims=True) + prior.sum()))
    return BayesNet(g, tuple(cpts))
