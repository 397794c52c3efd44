"""JSON model files and CSV population files."""

from __future__ import annotations

import csv
import json
import os
from typing import Union

import numpy as np

from .bayesnet import BayesNet, validate_population
from .credalnet import CredalNet
from .graph import Dag

__all__ = [
    "dag_to_dict",
    "dag_from_dict",
    "model_to_dict",
    "model_from_dict",
    "write_model",
    "read_model",
    "write_population",
    "read_population",
]

Model = Union[BayesNet, CredalNet]


def dag_to_dict(g: Dag) -> dict:
    return {
        "variables": [{"id": v.id, "cardinality": v.cardinality} for v in g.variables],
        "edges": [list(e) for e in g.edges],
        "topo_order": list(g.topo_order),
    }


def dag_from_dict(d: dict) -> Dag:
    variables = sorted(d["variables"], key=lambda v: v["id"])
    if [v["id"] for v in variables] != list(range(len(variables))):
        raise ValueError("variable ids must be 0..n-1")
    return Dag(
        tuple(int(v["cardinality"]) for v in variables),
        tuple((int(a), int(b)) for a, b in d["edges"]),
        tuple(int(v) for v in d["topo_order"]),
    )


def model_to_dict(model: Model) -> dict:
    """Serialise a BN or CN; CN files carry bounds only, never counts or hyperparameters."""
    if isinstance(model, BayesNet):
        return {
            "kind": "bn",
            "dag": dag_to_dict(model.dag),
            "cpts": [{"variable": x, "rows": t.tolist()} for x, t in enumerate(model.cpts)],
        }
    if isinstance(model, CredalNet):
        return {
            "kind": "cn",
            "dag": dag_to_dict(model.dag),
            "intervals": [
                {"variable": x, "rows": np.stack([l, u], axis=-1).tolist()}
                for x, (l, u) in enumerate(zip(model.lower, model.upper))
            ],
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(d: dict) -> Model:
    kind = d.get("kind")
    g = dag_from_dict(d["dag"])
    if kind == "bn":
        tables = sorted(d["cpts"], key=lambda t: t["variable"])
        return BayesNet(g, tuple(np.asarray(t["rows"], dtype=float) for t in tables))
    if kind == "cn":
        tables = sorted(d["intervals"], key=lambda t: t["variable"])
        arrs = [np.asarray(t["rows"], dtype=float) for t in tables]
        return CredalNet(g, tuple(a[..., 0] for a in arrs), tuple(a[..., 1] for a in arrs))
    raise ValueError(f"unknown model kind {kind!r}; expected 'bn' or 'cn'")


def write_model(model: Model, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def read_model(path: str | os.PathLike) -> Model:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def write_population(data: np.ndarray, path: str | os.PathLike) -> None:
    data = np.asarray(data, dtype=np.int64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(range(data.shape[1]))
        w.writerows(data.tolist())


def read_population(path: str | os.PathLike, g: Dag | None = None) -> np.ndarray:
    """Read a population CSV; columns are reordered by their integer header ids."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty population file")
    try:
        header = [int(h) for h in rows[0]]
        data = np.array([[int(v) for v in r] for r in rows[1:] if r], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if sorted(header) != list(range(len(header))):
        raise ValueError(f"{path}: header must list variable ids 0..n-1")
    data = data.reshape(-1, len(header))[:, np.argsort(header)]
    return validate_population(g, data) if g is not None else data
