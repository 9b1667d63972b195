"""JSON file formats for placements and traffic.

Placement: {"n": int, "nodes": [[x, y], ...]}
Unicast:   {"n": int, "entries": [[u, w, rate], ...]}
Multicast: {"n": int, "entries": [[u, [w1, w2, ...], rate], ...]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .network import NodePlacement
from .traffic import MulticastTraffic, UnicastTraffic

PathLike = Union[str, Path]


def _load_json(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top-level JSON value must be an object")
    return data


def _require(data: dict, key: str, path: PathLike):
    if key not in data:
        raise ValueError(f"{path}: missing required key {key!r}")
    return data[key]


def load_placement(path: PathLike) -> NodePlacement:
    data = _load_json(path)
    n = _require(data, "n", path)
    nodes = _require(data, "nodes", path)
    if not isinstance(nodes, list) or len(nodes) != n:
        raise ValueError(f"{path}: 'nodes' must list exactly n={n} coordinate pairs")
    return NodePlacement(np.asarray(nodes, dtype=float))


def save_placement(p: NodePlacement, path: PathLike) -> None:
    payload = {"n": p.n, "nodes": [[float(x), float(y)] for x, y in p.nodes]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_unicast(path: PathLike) -> UnicastTraffic:
    data = _load_json(path)
    n = int(_require(data, "n", path))
    entries = _require(data, "entries", path)
    if not isinstance(entries, list):
        raise ValueError(f"{path}: 'entries' must be a list")
    triples = []
    for item in entries:
        if not (isinstance(item, list) and len(item) == 3):
            raise ValueError(f"{path}: each unicast entry must be [u, w, rate]")
        triples.append((int(item[0]), int(item[1]), float(item[2])))
    return UnicastTraffic.from_entries(n, triples)


def save_unicast(t: UnicastTraffic, path: PathLike) -> None:
    payload = {"n": t.n, "entries": [[u, w, r] for u, w, r in t.entries()]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_multicast(path: PathLike) -> MulticastTraffic:
    data = _load_json(path)
    n = int(_require(data, "n", path))
    entries = _require(data, "entries", path)
    if not isinstance(entries, list):
        raise ValueError(f"{path}: 'entries' must be a list")
    triples = []
    for item in entries:
        if not (isinstance(item, list) and len(item) == 3 and isinstance(item[1], list)):
            raise ValueError(f"{path}: each multicast entry must be [u, [w1, ...], rate]")
        triples.append((int(item[0]), [int(w) for w in item[1]], float(item[2])))
    return MulticastTraffic(n, triples)


def save_multicast(t: MulticastTraffic, path: PathLike) -> None:
    payload = {"n": t.n, "entries": [[u, list(dests), r] for u, dests, r in t.entries()]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
