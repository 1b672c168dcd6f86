"""Experiment configuration: JSON schema, parsing and serialisation.

Infinite box bounds are written as ``null``.  See ``data/config.schema.json``
and the README for the full layout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .boundedness import UncertaintyModel
from .distributions import Categorical, DistPair, GaussianId
from .glr import BoxSet
from .mcusum import UpsilonSet, expected_keys


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def load_schema() -> dict:
    return json.loads(resources.files("quickdiag").joinpath("data/config.schema.json").read_text())


def bundled_config_path(name: str = "gaussian_boxes.json") -> Path:
    return Path(str(resources.files("quickdiag").joinpath(f"data/{name}")))


@dataclass
class AlgorithmSpec:
    id: str
    kind: str  # "mcusum" | "glr"
    pair_source: str | None = None  # mcusum: "robust" | "oracle" | "explicit"
    window: int | None = None  # glr
    gamma: float | None = None
    h: float | None = None

    def to_dict(self) -> dict:
        out = {"id": self.id, "kind": self.kind}
        if self.pair_source is not None:
            out["pair_source"] = self.pair_source
        if self.window is not None:
            out["window"] = self.window
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.h is not None:
            out["h"] = self.h
        return out


@dataclass
class ExperimentConfig:
    family: str
    dimension: int
    lfds: list
    pairs: dict  # source name -> UpsilonSet
    algorithms: list
    sets: list | None = None
    runs: int = 500
    master_seed: int = 0
    cap: int = 100_000
    false_cap: int | None = None
    tolerance: float = 0.1
    sweep: list = field(default_factory=list)  # (type, mean tuple)
    output: str = "results"

    @property
    def J(self) -> int:
        return len(self.lfds) - 1

    def model(self) -> UncertaintyModel:
        if self.family != "gaussian" or self.sets is None:
            raise ConfigError("sets: boundedness verification needs Gaussian uncertainty boxes")
        return UncertaintyModel(list(self.sets), self.pairs["robust"], list(self.lfds))

    def algorithm(self, algo_id: str) -> AlgorithmSpec:
        for a in self.algorithms:
            if a.id == algo_id:
                return a
        raise KeyError(algo_id)

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        def dist(d):
            return (d.mean if isinstance(d, GaussianId) else d.probs).tolist()

        def bound(v):
            return None if math.isinf(v) else float(v)

        out = {"family": self.family, "dimension": self.dimension}
        if self.sets is not None:
            out["sets"] = [
                {"lower": [bound(v) for v in s.lower], "upper": [bound(v) for v in s.upper]} for s in self.sets
            ]
        out["lfds"] = [dist(d) for d in self.lfds]
        out["pairs"] = {
            name: [{"i": i, "j": j, "null": dist(ups[i, j].null_dist), "alt": dist(ups[i, j].alt_dist)} for (i, j) in ups]
            for name, ups in self.pairs.items()
        }
        out["algorithms"] = [a.to_dict() for a in self.algorithms]
        out.update(runs=self.runs, master_seed=self.master_seed, cap=self.cap, tolerance=self.tolerance)
        if self.false_cap is not None:
            out["false_cap"] = self.false_cap
        out["sweep"] = [{"type": t, "mean": list(m)} for t, m in self.sweep]
        out["output"] = self.output
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def default_sweep(lfds) -> list:
    """Grid along the diagonal: 0.4..0.8 for type 1 and 1.5..2.0 for type 2."""
    dim = lfds[0].dim
    grid = [(1, round(0.4 + 0.1 * k, 10)) for k in range(5)] + [(2, round(1.5 + 0.1 * k, 10)) for k in range(6)]
    return [(t, tuple([phi] * dim)) for t, phi in grid if t < len(lfds)]


def parse_config(data: dict) -> ExperimentConfig:
    """Validate against the schema plus semantic checks, then build the model."""
    validator = jsonschema.Draft7Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {e.message}")

    family = data.get("family", "gaussian")
    dim = data["dimension"]

    def dist(vec, where):
        if len(vec) != dim:
            raise ConfigError(f"{where}: expected {dim} entries, got {len(vec)}")
        try:
            return GaussianId(vec) if family == "gaussian" else Categorical(vec)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    lfds = [dist(v, f"lfds/{k}") for k, v in enumerate(data["lfds"])]
    J = len(lfds) - 1

    sets = None
    if "sets" in data:
        if family != "gaussian":
            raise ConfigError("sets: uncertainty boxes are only defined for the gaussian family")
        if len(data["sets"]) != J + 1:
            raise ConfigError(f"sets: expected {J + 1} boxes, got {len(data['sets'])}")
        sets = []
        for k, s in enumerate(data["sets"]):
            for side in ("lower", "upper"):
                if len(s[side]) != dim:
                    raise ConfigError(f"sets/{k}/{side}: expected {dim} entries")
            try:
                sets.append(BoxSet(s["lower"], s["upper"]))
            except ValueError as exc:
                raise ConfigError(f"sets/{k}: {exc}") from None

    pairs = {}
    for name, entries in data.get("pairs", {}).items():
        table = {}
        for n, e in enumerate(entries):
            key = (e["i"], e["j"])
            if key in table:
                raise ConfigError(f"pairs/{name}/{n}: duplicate pair {key}")
            table[key] = DistPair(dist(e["null"], f"pairs/{name}/{n}/null"), dist(e["alt"], f"pairs/{name}/{n}/alt"))
        if set(table) != set(expected_keys(J)):
            raise ConfigError(f"pairs/{name}: need exactly the pairs {expected_keys(J)} for J={J}")
        pairs[name] = UpsilonSet(table)

    algorithms = []
    seen = set()
    for n, a in enumerate(data["algorithms"]):
        spec = AlgorithmSpec(a["id"], a["kind"], a.get("pair_source"), a.get("window"), a.get("gamma"), a.get("h"))
        if spec.id in seen:
            raise ConfigError(f"algorithms/{n}/id: duplicate id {spec.id!r}")
        seen.add(spec.id)
        if spec.kind == "mcusum" and spec.pair_source in ("robust", "explicit") and spec.pair_source not in pairs:
            raise ConfigError(f"algorithms/{n}/pair_source: no '{spec.pair_source}' pairs given")
        if spec.kind == "glr" and sets is None:
            raise ConfigError(f"algorithms/{n}: glr needs Gaussian uncertainty boxes in 'sets'")
        algorithms.append(spec)

    if "sweep" in data:
        sweep = []
        for n, g in enumerate(data["sweep"]):
            if not 1 <= g["type"] <= J:
                raise ConfigError(f"sweep/{n}/type: must be in 1..{J}")
            if len(g["mean"]) != dim:
                raise ConfigError(f"sweep/{n}/mean: expected {dim} entries")
            sweep.append((g["type"], tuple(float(x) for x in g["mean"])))
    else:
        sweep = default_sweep(lfds) if family == "gaussian" else []

    return ExperimentConfig(
        family=family,
        dimension=dim,
        lfds=lfds,
        pairs=pairs,
        algorithms=algorithms,
        sets=sets,
        runs=data.get("runs", 500),
        master_seed=data.get("master_seed", 0),
        cap=data.get("cap", 100_000),
        false_cap=data.get("false_cap"),
        tolerance=data.get("tolerance", 0.1),
        sweep=sweep,
        output=data.get("output", "results"),
    )


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data)
