"""End-to-end privacy experiment: ground truth, subsampling, BN and CN attacks.

For each DAG shape ``(m, e)`` one ground-truth BN and one general population
are generated. Every repetition redraws the reference and target populations,
learns the released models and records power curves plus the diagnostics
needed to check the CN-vs-BN guarantees empirically.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .attack import PowerCurve, bn_attack, cn_attack, llr, theoretical_power, thresholds
from .bayesnet import BayesNet, forward_sample, mle, random_parameters
from .credalnet import idm_from_data
from .graph import Dag, complexity, random_dag
from .stats import make_rng

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "ConfigError",
    "ground_truth",
    "run_repetition",
    "run_configuration",
    "run_all",
    "aggregate",
    "export",
    "RAW_COLUMNS",
    "AGGREGATE_COLUMNS",
    "DIAGNOSTIC_COLUMNS",
]

# Stream tags keep ground-truth and repetition streams disjoint.
_TRUTH, _REPETITION = 0, 1

RAW_COLUMNS = [
    "configuration_m", "configuration_e", "complexity", "model_kind",
    "s_or_eps", "repetition", "alpha", "beta",
]
AGGREGATE_COLUMNS = [
    "configuration_m", "configuration_e", "complexity", "model_kind",
    "s_or_eps", "alpha", "mean_beta", "max_beta", "n_repetitions",
]
DIAGNOSTIC_COLUMNS = [
    "configuration_m", "configuration_e", "s_or_eps", "repetition", "alpha",
    "tau_bn", "tau_cn", "cn_only_fraction", "fpr_bn", "fpr_cn",
]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    m_values: list = field(default_factory=lambda: [10, 20, 50, 100])
    e_values: list = field(default_factory=lambda: [1, 2, 4])
    pop_size: int = 10000
    ref_size: int = 5000
    target_size: int = 500
    repetitions: int = 20
    alpha_grid: list = field(default_factory=lambda: np.geomspace(1e-4, 0.631, 20).tolist())
    s_values: list = field(default_factory=lambda: [1.0, 1000.0])
    n_credal_points: int = 500
    seed: int = 0
    cardinality: int = 2
    disjoint_populations: bool = True
    workers: int = 1

    def __post_init__(self):
        problems = self._problems()
        if problems:
            raise ConfigError("invalid experiment config: " + "; ".join(problems))

    def _problems(self) -> list[str]:
        out = []
        for name in ("pop_size", "ref_size", "target_size", "repetitions", "n_credal_points", "workers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                out.append(f"{name} must be a positive integer")
        if isinstance(self.pop_size, int):
            for name in ("ref_size", "target_size"):
                v = getattr(self, name)
                if isinstance(v, int) and v > self.pop_size:
                    out.append(f"{name} must not exceed pop_size")
            if (self.disjoint_populations and isinstance(self.ref_size, int)
                    and isinstance(self.target_size, int)
                    and self.ref_size + self.target_size > self.pop_size):
                out.append("ref_size + target_size must not exceed pop_size for disjoint populations")
        if not self.m_values or any(not isinstance(m, int) or m < 2 for m in self.m_values):
            out.append("m_values must be integers >= 2")
        if not self.e_values or any(not isinstance(e, int) or e < 1 for e in self.e_values):
            out.append("e_values must be integers >= 1")
        a = np.asarray(self.alpha_grid, dtype=float)
        if a.ndim != 1 or a.size == 0 or np.any((a <= 0) | (a >= 1)) or np.any(np.diff(a) <= 0):
            out.append("alpha_grid must be strictly increasing values in (0, 1)")
        if not self.s_values or any(float(s) <= 0 for s in self.s_values):
            out.append("s_values must be positive")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        if not isinstance(self.cardinality, int) or self.cardinality < 2:
            out.append("cardinality must be an integer >= 2")
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ExperimentResult:
    curves: list[PowerCurve] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)

    def extend(self, other: "ExperimentResult") -> None:
        self.curves.extend(other.curves)
        self.diagnostics.extend(other.diagnostics)

    def raw_rows(self) -> list[dict]:
        rows = []
        for c in self.curves:
            for a, b in zip(c.alphas, c.betas):
                rows.append({
                    "configuration_m": c.m,
                    "configuration_e": c.e,
                    "complexity": c.complexity,
                    "model_kind": c.kind,
                    "s_or_eps": "" if c.s_or_eps is None else float(c.s_or_eps),
                    "repetition": "" if c.repetition is None else c.repetition,
                    "alpha": float(a),
                    "beta": float(b),
                })
        return rows

    @property
    def aggregates(self) -> list[dict]:
        return aggregate(self.raw_rows())


@lru_cache(maxsize=8)
def ground_truth(seed: int, m: int, e: int, cardinality: int, pop_size: int):
    """Ground-truth DAG, BN and general population for one ``(m, e)`` shape."""
    rng = make_rng(seed, _TRUTH, m, e)
    g = random_dag(m, e, cardinality, seed=int(rng.integers(2**63)))
    bn = random_parameters(g, seed=int(rng.integers(2**63)))
    pop = forward_sample(bn, pop_size, rng)
    pop.setflags(write=False)
    return g, bn, pop


def run_repetition(cfg: ExperimentConfig, m: int, e: int, rep: int) -> ExperimentResult:
    g, _, pop = ground_truth(cfg.seed, m, e, cfg.cardinality, cfg.pop_size)
    c = complexity(g)
    alphas = np.asarray(cfg.alpha_grid, dtype=float)
    rng = make_rng(cfg.seed, _REPETITION, m, e, rep)
    if cfg.disjoint_populations:
        perm = rng.permutation(pop.shape[0])
        idx_t = perm[: cfg.target_size]
        idx_r = perm[cfg.target_size : cfg.target_size + cfg.ref_size]
    else:
        # Independent draws: roughly ref_size / pop_size of the target also sits in
        # the reference, and therefore in the null sample used for calibration.
        idx_r = rng.choice(pop.shape[0], size=cfg.ref_size, replace=False)
        idx_t = rng.choice(pop.shape[0], size=cfg.target_size, replace=False)
    ref, tgt = pop[idx_r], pop[idx_t]
    outside = np.ones(pop.shape[0], dtype=bool)
    outside[idx_t] = False

    theta_r = mle(g, ref)
    theta_t = mle(g, tgt)
    result = ExperimentResult()

    def run(model):
        l_pop = llr(model, pop)
        taus = thresholds(l_pop[idx_r], alphas)
        flags = l_pop[None, :] > taus[:, None]
        return taus, flags

    tau_bn, flags_bn = run(bn_attack(theta_t, theta_r))
    result.curves.append(PowerCurve(
        alphas, flags_bn[:, idx_t].mean(axis=1), "BN", m, e, c, rep,
        extra={"tau": taus_list(tau_bn), "fpr": flags_bn[:, outside].mean(axis=1).tolist()},
    ))
    for s in cfg.s_values:
        cn = idm_from_data(g, tgt, float(s))
        model = cn_attack(cn, ref, theta_r, cfg.n_credal_points, rng)
        tau_cn, flags_cn = run(model)
        result.curves.append(PowerCurve(
            alphas, flags_cn[:, idx_t].mean(axis=1), "CN", m, e, c, rep, float(s),
            extra={"tau": taus_list(tau_cn), "fpr": flags_cn[:, outside].mean(axis=1).tolist()},
        ))
        cn_only = (flags_cn[:, idx_t] & ~flags_bn[:, idx_t]).mean(axis=1)
        for i, a in enumerate(alphas):
            result.diagnostics.append({
                "configuration_m": m,
                "configuration_e": e,
                "s_or_eps": float(s),
                "repetition": rep,
                "alpha": float(a),
                "tau_bn": float(tau_bn[i]),
                "tau_cn": float(tau_cn[i]),
                "cn_only_fraction": float(cn_only[i]),
                "fpr_bn": float(flags_bn[i, outside].mean()),
                "fpr_cn": float(flags_cn[i, outside].mean()),
            })
    return result


def taus_list(taus: np.ndarray) -> list[float]:
    return [float(t) for t in taus]


def _theoretical_curve(cfg: ExperimentConfig, m: int, e: int) -> PowerCurve:
    g, _, _ = ground_truth(cfg.seed, m, e, cfg.cardinality, cfg.pop_size)
    c = complexity(g)
    alphas = np.asarray(cfg.alpha_grid, dtype=float)
    betas = [theoretical_power(c, cfg.target_size, a) for a in alphas]
    return PowerCurve(alphas, betas, "theoretical", m, e, c)


def _task(args):
    cfg, m, e, rep = args
    return run_repetition(cfg, m, e, rep)


def _collect(cfg: ExperimentConfig, shapes: list[tuple[int, int]]) -> ExperimentResult:
    tasks = [(cfg, m, e, r) for m, e in shapes for r in range(cfg.repetitions)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_task, tasks))
    else:
        parts = [_task(t) for t in tasks]
    # map() preserves task order, so the output is independent of scheduling.
    result = ExperimentResult()
    it = iter(parts)
    for m, e in shapes:
        for _ in range(cfg.repetitions):
            result.extend(next(it))
        result.curves.append(_theoretical_curve(cfg, m, e))
    return result


def run_configuration(cfg: ExperimentConfig, m: int, e: int) -> ExperimentResult:
    """All repetitions for one DAG shape plus its theoretical curve."""
    if m not in cfg.m_values or e not in cfg.e_values:
        raise ValueError(f"(m, e) = ({m}, {e}) is not in the configured grid")
    return _collect(cfg, [(m, e)])


def run_all(cfg: ExperimentConfig) -> ExperimentResult:
    return _collect(cfg, [(m, e) for m in cfg.m_values for e in cfg.e_values])


def aggregate(raw_rows: list[dict]) -> list[dict]:
    """Mean and max beta per (configuration, kind, s, alpha); pure function of raw rows."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    complexity_of = {}
    for r in raw_rows:
        key = (int(r["configuration_m"]), int(r["configuration_e"]), r["model_kind"],
               _opt_float(r["s_or_eps"]), float(r["alpha"]))
        groups[key].append(float(r["beta"]))
        complexity_of[key[:2]] = int(r["complexity"])
    kind_rank = {"BN": 0, "CN": 1, "theoretical": 2}
    keys = sorted(groups, key=lambda k: (k[0], k[1], kind_rank.get(k[2], 9), -1 if k[3] is None else k[3], k[4]))
    return [
        {
            "configuration_m": k[0],
            "configuration_e": k[1],
            "complexity": complexity_of[k[:2]],
            "model_kind": k[2],
            "s_or_eps": "" if k[3] is None else k[3],
            "alpha": k[4],
            "mean_beta": float(np.mean(groups[k])),
            "max_beta": float(np.max(groups[k])),
            "n_repetitions": len(groups[k]),
        }
        for k in keys
    ]


def _opt_float(v) -> Optional[float]:
    return None if v in ("", None) else float(v)


def _write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def checks(aggregates: list[dict], diagnostics: list[dict]) -> list[dict]:
    """Empirical checks of the CN-vs-BN guarantees, one record per check and configuration."""
    by_cfg: dict[tuple, dict] = defaultdict(lambda: {"BN": {}, "CN": defaultdict(dict), "theoretical": {}})
    for r in aggregates:
        cell = by_cfg[(r["configuration_m"], r["configuration_e"])]
        if r["model_kind"] == "CN":
            cell["CN"][float(r["s_or_eps"])][r["alpha"]] = r["mean_beta"]
        else:
            cell[r["model_kind"]][r["alpha"]] = r["mean_beta"]

    out = []
    for (m, e), cell in sorted(by_cfg.items()):
        bn = cell["BN"]
        if bn and cell["theoretical"]:
            dev = float(np.mean([abs(bn[a] - cell["theoretical"][a]) for a in bn]))
            out.append(_check(m, e, None, "bn_vs_theory_mean_abs", dev, 0.10))
        for s, cn in sorted(cell["CN"].items()):
            gap = max(cn[a] - bn[a] for a in cn) if bn else float("nan")
            out.append(_check(m, e, s, "power_ordering_max_gap", gap, 0.05))

    diag: dict[tuple, list[dict]] = defaultdict(list)
    for d in diagnostics:
        diag[(d["configuration_m"], d["configuration_e"], d["s_or_eps"])].append(d)
    for (m, e, s), rows in sorted(diag.items()):
        per_alpha = defaultdict(list)
        for d in rows:
            per_alpha[d["alpha"]].append(d["cn_only_fraction"])
        worst = max(float(np.mean(v)) for v in per_alpha.values())
        out.append(_check(m, e, s, "consistency_max_mean_cn_only", worst, 0.05))
        frac = float(np.mean([d["tau_cn"] >= d["tau_bn"] - 1e-9 for d in rows]))
        out.append(_check(m, e, s, "threshold_order_fraction", frac, 0.90, at_least=True))
    return out


def _check(m, e, s, name, value, bound, at_least=False) -> dict:
    ok = value >= bound if at_least else value <= bound
    return {"m": m, "e": e, "s": s, "check": name, "value": value, "bound": bound,
            "passed": bool(ok), "relation": ">=" if at_least else "<="}


def render_report(check_rows: list[dict], diagnostics: list[dict]) -> str:
    lines = ["# Tracing attack experiment report", ""]
    lines.append("| m | e | S | check | measured | bound | result |")
    lines.append("|---|---|---|---|---|---|---|")
    for c in check_rows:
        s = "" if c["s"] is None else f"{c['s']:g}"
        lines.append(
            f"| {c['m']} | {c['e']} | {s} | {c['check']} | {c['value']:.4f} | "
            f"{c['relation']} {c['bound']:g} | {'pass' if c['passed'] else 'FAIL'} |"
        )
    if diagnostics:
        lines += ["", "## Realized false positive rate on the non-target population", ""]
        lines.append("| alpha | mean FPR (BN) | mean FPR (CN) |")
        lines.append("|---|---|---|")
        per_alpha = defaultdict(lambda: ([], []))
        for d in diagnostics:
            per_alpha[d["alpha"]][0].append(d["fpr_bn"])
            per_alpha[d["alpha"]][1].append(d["fpr_cn"])
        for a in sorted(per_alpha):
            bn, cn = per_alpha[a]
            lines.append(f"| {a:.6g} | {np.mean(bn):.4f} | {np.mean(cn):.4f} |")
    n_fail = sum(not c["passed"] for c in check_rows)
    lines += ["", f"{len(check_rows) - n_fail} of {len(check_rows)} checks passed.", ""]
    return "\n".join(lines)


def export(result: ExperimentResult, path: str | os.PathLike) -> dict[str, str]:
    """Write ``raw.csv``, ``aggregate.csv``, ``diagnostics.csv`` and ``report.md`` into ``path``."""
    os.makedirs(path, exist_ok=True)
    raw = result.raw_rows()
    agg = aggregate(raw)
    files = {name: os.path.join(path, name) for name in ("raw.csv", "aggregate.csv", "diagnostics.csv", "report.md")}
    _write_csv(files["raw.csv"], RAW_COLUMNS, raw)
    _write_csv(files["aggregate.csv"], AGGREGATE_COLUMNS, agg)
    _write_csv(files["diagnostics.csv"], DIAGNOSTIC_COLUMNS, result.diagnostics)
    write_report(agg, result.diagnostics, files["report.md"])
    return files


def write_report(agg: list[dict], diagnostics: list[dict], path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_report(checks(agg, diagnostics), diagnostics))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_raw(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_diagnostics(path: str) -> list[dict]:
    rows = []
    for r in read_raw(path):
        rows.append({
            "configuration_m": int(r["configuration_m"]),
            "configuration_e": int(r["configuration_e"]),
            "s_or_eps": float(r["s_or_eps"]),
            "repetition": int(r["repetition"]),
            **{k: float(r[k]) for k in DIAGNOSTIC_COLUMNS[4:]},
        })
    return rows
