"""Command line interface: ``credaltrace <command> ...``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import experiment as exp
from .attack import bn_attack, cn_attack, llr, thresholds
from .bayesnet import BayesNet, dirichlet_estimate, forward_sample, mle, random_parameters
from .credalnet import CredalNet, contaminate, idm_from_data
from .formats import read_model, read_population, write_model, write_population
from .graph import random_dag
from .reconstruction import classify_cn, recover_from_contamination, recover_from_idm
from .stats import make_rng

SEED_ENV = "CREDALTRACE_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}")


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {a}")
    return a


def _alpha_list(text: str) -> list[float]:
    return [_alpha(t) for t in text.split(",") if t.strip()]


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="credaltrace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="random DAG, ground-truth BN and population")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--density", type=int, required=True)
    g.add_argument("--cardinality", type=int, default=2)
    g.add_argument("--pop", type=_positive_int, default=10000)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True, help="output directory")

    le = sub.add_parser("learn", help="learn BN parameters from a population")
    le.add_argument("--model", required=True, help="model file providing the DAG")
    le.add_argument("--data", required=True)
    le.add_argument("--method", choices=["mle", "dirichlet"], default="mle")
    le.add_argument("--s", type=float, default=1.0, help="Dirichlet total pseudo-count")
    le.add_argument("--out", required=True)

    mk = sub.add_parser("mask", help="turn a BN into a released CN")
    mk.add_argument("--model", required=True)
    mk.add_argument("--method", choices=["idm", "contaminate"], required=True)
    mk.add_argument("--s", type=float)
    mk.add_argument("--eps", type=float)
    mk.add_argument("--data")
    mk.add_argument("--out", required=True)

    at = sub.add_parser("attack", help="run the tracing attack on probe records")
    at.add_argument("--released", required=True, help="released BN or CN model file")
    at.add_argument("--reference", required=True, help="attacker reference population CSV")
    at.add_argument("--probe", required=True, help="records to classify (CSV)")
    at.add_argument("--alpha", type=_alpha_list, default=[0.05], help="comma separated levels")
    at.add_argument("--credal-points", type=_positive_int, default=500)
    at.add_argument("--seed", type=int, default=None)
    at.add_argument("--out", required=True, help="output directory")

    au = sub.add_parser("audit", help="classify a CN and try to recover the hidden BN")
    au.add_argument("--model", required=True)
    au.add_argument("--s", type=float, help="IDM hyperparameter, if known")
    au.add_argument("--out", help="also write the report and recovered BN here")

    ex = sub.add_parser("experiment", help="run the full power-curve experiment")
    ex.add_argument("--config", required=True, help="JSON file with ExperimentConfig fields")
    ex.add_argument("--out", required=True)
    ex.add_argument("--workers", type=_positive_int, help="override the config worker count")

    rp = sub.add_parser("report", help="rebuild aggregates and report from exported CSVs")
    rp.add_argument("--raw", required=True)
    rp.add_argument("--diagnostics")
    rp.add_argument("--out", required=True)
    for name, sp in sub.choices.items():
        sp.set_defaults(_parser=sp)
    return p


def cmd_generate(args, parser) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    rng = make_rng(seed)
    try:
        g = random_dag(args.nodes, args.density, args.cardinality, seed=int(rng.integers(2**63)))
    except ValueError as exc:
        parser.error(str(exc))
    bn = random_parameters(g, seed=int(rng.integers(2**63)))
    pop = forward_sample(bn, args.pop, rng)
    os.makedirs(args.out, exist_ok=True)
    write_model(bn, os.path.join(args.out, "model.json"))
    write_population(pop, os.path.join(args.out, "population.csv"))
    return 0


def cmd_learn(args, parser) -> int:
    g = read_model(args.model).dag
    data = read_population(args.data, g)
    bn = mle(g, data) if args.method == "mle" else dirichlet_estimate(g, data, args.s)
    write_model(bn, args.out)
    return 0


def cmd_mask(args, parser) -> int:
    model = read_model(args.model)
    if args.method == "idm":
        if args.data is None or args.s is None:
            parser.error("--method idm requires --data and --s")
        cn = idm_from_data(model.dag, read_population(args.data, model.dag), args.s)
    else:
        if args.eps is None:
            parser.error("--method contaminate requires --eps")
        if not isinstance(model, BayesNet):
            parser.error("--method contaminate needs a BN model")
        cn = contaminate(model, args.eps)
    write_model(cn, args.out)
    return 0


def cmd_attack(args, parser) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    released = read_model(args.released)
    g = released.dag
    ref = read_population(args.reference, g)
    probe = read_population(args.probe, g)
    theta_r = mle(g, ref)
    if isinstance(released, CredalNet):
        model = cn_attack(released, ref, theta_r, args.credal_points, make_rng(seed))
    else:
        model = bn_attack(released, theta_r)
    alphas = sorted(set(args.alpha))
    taus = thresholds(llr(model, ref), alphas)
    scores = llr(model, probe)
    flags = scores[None, :] > taus[:, None]

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "decisions.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "llr"] + [f"member@{a:g}" for a in alphas])
        for i, s in enumerate(scores):
            w.writerow([i, repr(float(s))] + [int(f) for f in flags[:, i]])
    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "tau", "flag_rate", "kind"])
        for a, t, f in zip(alphas, taus, flags.mean(axis=1)):
            w.writerow([repr(a), repr(float(t)), repr(float(f)), model.kind])
    return 0


def audit_report(cn: CredalNet, s: float | None = None) -> tuple[dict, BayesNet | None]:
    cls = classify_cn(cn)
    report = {"classification": cls.as_dict()}
    recovered = None
    if s is not None:
        rec = recover_from_idm(cn, s)
        recovered = rec.bn
        report["recovery"] = {
            "method": "idm",
            "s": s,
            "sample_size": rec.sample_size,
            "counts_integral": rec.integral,
            "row_totals": [t.tolist() for t in rec.row_totals],
            "cpts": [t.tolist() for t in rec.bn.cpts],
        }
    elif cls.kind == "contamination_like":
        recovered, eps = recover_from_contamination(cn)
        report["recovery"] = {
            "method": "contamination",
            "eps": eps,
            "cpts": [t.tolist() for t in recovered.cpts],
        }
    return report, recovered


def cmd_audit(args, parser) -> int:
    cn = read_model(args.model)
    if not isinstance(cn, CredalNet):
        parser.error("audit expects a CN model file")
    report, recovered = audit_report(cn, args.s)
    text = json.dumps(report, indent=1)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "audit.json"), "w") as fh:
            fh.write(text + "\n")
        if recovered is not None:
            write_model(recovered, os.path.join(args.out, "recovered_bn.json"))
    return 0


def cmd_experiment(args, parser) -> int:
    cfg = exp.ExperimentConfig.from_json(args.config)
    if args.workers:
        cfg.workers = args.workers
    files = exp.export(exp.run_all(cfg), args.out)
    for path in files.values():
        print(path)
    return 0


def cmd_report(args, parser) -> int:
    raw = exp.read_raw(args.raw)
    diag = exp.read_diagnostics(args.diagnostics) if args.diagnostics else []
    os.makedirs(args.out, exist_ok=True)
    agg = exp.aggregate(raw)
    exp._write_csv(os.path.join(args.out, "aggregate.csv"), exp.AGGREGATE_COLUMNS, agg)
    exp.write_report(agg, diag, os.path.join(args.out, "report.md"))
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "learn": cmd_learn,
    "mask": cmd_mask,
    "attack": cmd_attack,
    "audit": cmd_audit,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, args._parser)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
