"""Log-likelihood-ratio tracing attacks against released BNs and CNs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bayesnet import BayesNet, log_joint
from .credalnet import CredalNet, constrained_mle
from .stats import empirical_quantile, sorted_quantiles, std_normal_cdf, std_normal_quantile

__all__ = [
    "AttackModel",
    "CalibratedTest",
    "PowerCurve",
    "default_alpha_grid",
    "bn_attack",
    "cn_attack",
    "llr",
    "calibrate",
    "decide",
    "thresholds",
    "evaluate",
    "theoretical_power",
]


def default_alpha_grid(k: int = 20, low: float = 1e-4, high: float = 0.631) -> np.ndarray:
    """``k`` log-spaced Type I error levels from ``low`` to ``high`` inclusive."""
    return np.geomspace(low, high, k)


@dataclass(frozen=True, eq=False)
class AttackModel:
    """Parameters entering the LLR statistic.

    ``target`` is the released BN (BN attack) or the constrained MLE of the
    reference data inside the released CN (CN attack). ``reference`` is the
    MLE on the attacker's reference population.
    """

    kind: str
    target: BayesNet
    reference: BayesNet

    def __post_init__(self):
        if self.kind not in ("BN", "CN"):
            raise ValueError(f"attack kind must be 'BN' or 'CN', got {self.kind!r}")
        if self.target.dag != self.reference.dag:
            raise ValueError("target and reference parameters must share one graph")


@dataclass(frozen=True, eq=False)
class CalibratedTest:
    model: AttackModel
    alpha: float
    tau: float


@dataclass
class PowerCurve:
    """Power ``betas`` at increasing Type I error levels ``alphas``."""

    alphas: np.ndarray
    betas: np.ndarray
    kind: str
    m: Optional[int] = None
    e: Optional[int] = None
    complexity: Optional[int] = None
    repetition: Optional[int] = None
    s_or_eps: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.betas = np.asarray(self.betas, dtype=float)
        if self.alphas.shape != self.betas.shape:
            raise ValueError("alphas and betas must have the same length")
        if np.any(np.diff(self.alphas) <= 0):
            raise ValueError("alphas must be strictly increasing")
        if np.any((self.betas < 0) | (self.betas > 1)):
            raise ValueError("betas must lie in [0, 1]")


def bn_attack(released: BayesNet, reference: BayesNet) -> AttackModel:
    return AttackModel("BN", released, reference)


def cn_attack(
    released: CredalNet,
    reference_data,
    reference: BayesNet,
    n_points: int = 500,
    seed: int | np.random.Generator = 0,
) -> AttackModel:
    """CN attack: target is the constrained MLE of the reference data in ``released``."""
    target = constrained_mle(released, reference_data, n_points, seed)
    return AttackModel("CN", target, reference)


def llr(model: AttackModel, x) -> float | np.ndarray:
    """``log P(x | target) - log P(x | reference)`` per assignment."""
    return log_joint(model.target, x) - log_joint(model.reference, x)


def calibrate(model: AttackModel, null_sample, alpha: float) -> CalibratedTest:
    """Threshold at the empirical ``1 - alpha`` quantile of the null LLRs."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    values = np.atleast_1d(llr(model, null_sample))
    if values.size == 0:
        raise ValueError("cannot calibrate on an empty null sample")
    return CalibratedTest(model, float(alpha), empirical_quantile(values, 1.0 - alpha))


def decide(test: CalibratedTest, x) -> bool | np.ndarray:
    """True (member) iff the LLR strictly exceeds the threshold."""
    return llr(test.model, x) > test.tau


def thresholds(null_llr: np.ndarray, alphas: Sequence[float]) -> np.ndarray:
    """Thresholds for every level in ``alphas`` from one sorted null sample."""
    alphas = np.asarray(alphas, dtype=float)
    if np.any((alphas <= 0) | (alphas >= 1)):
        raise ValueError("alphas must lie in (0, 1)")
    return sorted_quantiles(np.sort(np.asarray(null_llr, dtype=float)), 1.0 - alphas)


def evaluate(model: AttackModel, target_data, reference_data, alphas: Sequence[float]) -> PowerCurve:
    """True positive rate on ``target_data`` at each level, calibrated on ``reference_data``."""
    alphas = np.asarray(alphas, dtype=float)
    taus = thresholds(np.atleast_1d(llr(model, reference_data)), alphas)
    lt = np.atleast_1d(llr(model, target_data))
    if lt.size == 0:
        raise ValueError("target data is empty")
    betas = (lt[None, :] > taus[:, None]).mean(axis=1)
    return PowerCurve(alphas, betas, kind=model.kind, extra={"tau": taus})


def theoretical_power(c: float, t_size: int, alpha: float) -> float:
    """Large-sample power ``Phi(sqrt(c / t_size) - z_alpha)`` of the BN attack."""
    if c < 1 or t_size < 1:
        raise ValueError("complexity and target size must be >= 1")
    return std_normal_cdf(math.sqrt(c / t_size) - std_normal_quantile(alpha))
