"""Recovering the hidden BN from a released CN when its recipe leaks.

Both masking schemes leave a fingerprint in the interval widths: the local
IDM gives width ``s / (n_j + s)`` per row, contamination gives width ``eps``
everywhere with row lowers summing to ``1 - eps``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .bayesnet import BayesNet
from .credalnet import CredalNet

__all__ = [
    "NotIdmError",
    "NotContaminationError",
    "UnrecoverableError",
    "IdmRecovery",
    "CnClassification",
    "recover_from_idm",
    "recover_from_contamination",
    "classify_cn",
]

_WIDTH_TOL = 1e-9
_SNAP_TOL = 1e-6


class NotIdmError(ValueError):
    pass


class NotContaminationError(ValueError):
    pass


class UnrecoverableError(ValueError):
    pass


@dataclass
class IdmRecovery:
    bn: BayesNet
    counts: list[np.ndarray]
    row_totals: list[np.ndarray]
    sample_size: float
    integral: bool


@dataclass
class CnClassification:
    """Outcome of :func:`classify_cn`.

    ``kind`` is one of ``singleton``, ``vacuous``, ``contamination_like``,
    ``idm_like`` or ``unknown``. For ``idm_like`` networks ``per_variable``
    lists, for each variable, ``n_j / s`` per row and their total ``N / s``;
    with an unknown ``s`` the counts are only determined up to that scale.
    """

    kind: str
    eps: Optional[float] = None
    per_variable: list[dict] = field(default_factory=list)
    shared_s: Optional[bool] = None

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.eps is not None:
            out["eps"] = self.eps
        if self.kind == "idm_like":
            out["shared_s"] = self.shared_s
            out["per_variable"] = self.per_variable
        return out


def _snap(values: np.ndarray) -> tuple[np.ndarray, bool]:
    rounded = np.round(values)
    ok = np.abs(values - rounded) <= _SNAP_TOL
    return np.where(ok, rounded, values), bool(np.all(ok))


def recover_from_idm(cn: CredalNet, s: float | Mapping[int, float]) -> IdmRecovery:
    """Invert the local IDM given its hyperparameter(s).

    Row width ``w`` yields ``n_j = s (1 - w) / w`` and every entry yields
    ``n_ij = lower * (n_j + s)``. Counts within 1e-6 of an integer are
    snapped; otherwise ``integral`` is False and a warning is issued.
    """
    counts, totals, cpts = [], [], []
    integral = True
    for x, (l, u) in enumerate(zip(cn.lower, cn.upper)):
        sx = float(s[x]) if isinstance(s, Mapping) else float(s)
        if not sx > 0:
            raise ValueError(f"hyperparameter must be positive, got {sx}")
        w = u - l
        if np.any(np.ptp(w, axis=1) > _WIDTH_TOL):
            raise NotIdmError(f"variable {x}: widths differ within a row, not an IDM network")
        w = w.mean(axis=1)
        if np.any(w <= _WIDTH_TOL):
            raise UnrecoverableError(f"variable {x}: zero-width row implies infinite counts")
        nj, ok_j = _snap(sx * (1.0 - w) / w)
        nij, ok_ij = _snap(l * (nj + sx)[:, None])
        integral &= ok_j and ok_ij
        k = l.shape[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(nj[:, None] > 0, nij / nj[:, None], 1.0 / k)
        counts.append(nij)
        totals.append(nj)
        cpts.append(rows)
    # Orphan rows carry N directly; any variable's totals sum to N as well.
    roots = [x for x in range(cn.dag.n_vars) if not cn.dag.parents(x)]
    n_total = float(totals[roots[0]][0]) if roots else float(totals[0].sum())
    if not integral:
        warnings.warn("recovered counts are not integral; hyperparameter may be wrong", RuntimeWarning)
    return IdmRecovery(BayesNet(cn.dag, tuple(cpts)), counts, totals, n_total, integral)


def recover_from_contamination(cn: CredalNet) -> tuple[BayesNet, float]:
    """Invert epsilon-contamination: ``eps`` is the common width, ``p = lower / (1 - eps)``."""
    widths = np.concatenate([w.ravel() for w in cn.widths])
    eps = float(widths.mean())
    if np.max(np.abs(widths - eps)) > _WIDTH_TOL:
        raise NotContaminationError("interval widths are not constant across the network")
    if eps >= 1.0 - 1e-12:
        raise UnrecoverableError("contamination level is 1; the base network is lost")
    cpts = []
    for l in cn.lower:
        if np.any(np.abs(l.sum(axis=1) - (1.0 - eps)) > _WIDTH_TOL):
            raise NotContaminationError("row lowers do not sum to 1 - eps")
        rows = l / (1.0 - eps)
        # Division leaves ~1e-16 drift; renormalise to keep rows on the simplex.
        cpts.append(rows / rows.sum(axis=1, keepdims=True))
    return BayesNet(cn.dag, tuple(cpts)), eps


def classify_cn(cn: CredalNet) -> CnClassification:
    """Match the width laws of the known masking schemes."""
    widths = cn.widths
    flat = np.concatenate([w.ravel() for w in widths])
    if np.all(np.abs(flat) <= _WIDTH_TOL):
        return CnClassification("singleton")
    if all(np.all(l <= _WIDTH_TOL) and np.all(u >= 1 - _WIDTH_TOL) for l, u in zip(cn.lower, cn.upper)):
        return CnClassification("vacuous")

    row_consistent = all(np.all(np.ptp(w, axis=1) <= _WIDTH_TOL) for w in widths)
    lowers_match = row_consistent and all(
        np.all(np.abs(l.sum(axis=1) - (1.0 - w[:, 0])) <= _WIDTH_TOL)
        for l, w in zip(cn.lower, widths)
    )
    if not lowers_match:
        return CnClassification("unknown")

    eps = float(flat.mean())
    if np.max(np.abs(flat - eps)) <= _WIDTH_TOL and eps < 1.0 - 1e-12:
        return CnClassification("contamination_like", eps=eps)

    if np.any(flat <= _WIDTH_TOL):
        return CnClassification("unknown")
    per_var = []
    for x, w in enumerate(widths):
        ratio = (1.0 - w[:, 0]) / w[:, 0]
        per_var.append({"variable": x, "n_over_s": ratio.tolist(), "total_over_s": float(ratio.sum())})
    tot = np.array([p["total_over_s"] for p in per_var])
    shared = bool(np.max(np.abs(tot - tot[0])) <= 1e-6 * max(1.0, abs(tot[0])))
    return CnClassification("idm_like", per_variable=per_var, shared_s=shared)
