"""Run configuration: strict JSON schema, validation and scenario resolution."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

import numpy as np

from . import graph as gr
from .adversary import ByzantineStrategy

GRAPH_KINDS = ("erdos_renyi", "complete", "ring_bridge", "custom")
ALGORITHMS = ("relay", "baseline", "both")
MAX_GRAPH_RETRIES = 1000

_REQUIRED = ("m", "b", "graph", "iterations", "init_range", "default_value",
             "adversary", "algorithm", "seed", "epsilon")
_OPTIONAL = ("byzantine_ids", "D")
_GRAPH_KEYS = {"kind", "p", "edges", "seed"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GraphSpec:
    kind: str
    seed: int
    p: Optional[float] = None
    edges: Optional[tuple[tuple[int, int], ...]] = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind, "seed": self.seed}
        if self.p is not None:
            d["p"] = self.p
        if self.edges is not None:
            d["edges"] = [list(e) for e in self.edges]
        return d


@dataclass(frozen=True)
class SimConfig:
    m: int
    b: int
    graph: GraphSpec
    iterations: int
    init_range: tuple[float, float]
    adversary: Mapping[str, ByzantineStrategy]
    algorithm: str = "both"
    seed: int = 0
    epsilon: float = 1e-6
    default_value: float = 0.0
    byzantine_ids: Optional[tuple[int, ...]] = None
    D: Optional[int] = None

    def __post_init__(self):
        m, b = self.m, self.b
        if not isinstance(m, int) or m < 1:
            raise ConfigError(f"m must be a positive integer, got {m!r}")
        if not isinstance(b, int) or b < 0:
            raise ConfigError(f"b must be a non-negative integer, got {b!r}")
        if 3 * b >= m:
            raise ConfigError(f"b={b} violates the b < m/3 assumption (m={m})")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        lo, hi = self.init_range
        if not lo < hi:
            raise ConfigError(f"init_range needs lo < hi, got {list(self.init_range)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.D is not None and self.D < 1:
            raise ConfigError(f"D must be >= 1, got {self.D}")
        g = self.graph
        if g.kind not in GRAPH_KINDS:
            raise ConfigError(f"graph kind must be one of {GRAPH_KINDS}, got {g.kind!r}")
        if g.kind == "erdos_renyi" and (g.p is None or not 0.0 <= g.p <= 1.0):
            raise ConfigError(f"erdos_renyi needs p in [0, 1], got {g.p!r}")
        if g.kind == "custom" and g.edges is None:
            raise ConfigError("custom graph needs 'edges'")
        if self.byzantine_ids is not None:
            ids = self.byzantine_ids
            if len(set(ids)) != len(ids) or len(ids) != b:
                raise ConfigError(f"byzantine_ids must list exactly b={b} distinct ids, got {list(ids)}")
            if any(not 0 <= i < m for i in ids):
                raise ConfigError(f"byzantine_ids outside [0, {m}): {list(ids)}")
        for key in self.adversary:
            if key != "*" and not (key.isdigit() and int(key) < m):
                raise ConfigError(f"adversary key {key!r} is neither a node id nor '*'")

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "SimConfig":
        if not isinstance(obj, Mapping):
            raise ConfigError("config must be a JSON object")
        unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = [k for k in _REQUIRED if k not in obj]
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        gobj = obj["graph"]
        if not isinstance(gobj, Mapping):
            raise ConfigError("'graph' must be an object")
        if set(gobj) - _GRAPH_KEYS:
            raise ConfigError(f"unknown graph keys: {sorted(set(gobj) - _GRAPH_KEYS)}")
        if "kind" not in gobj or "seed" not in gobj:
            raise ConfigError("graph needs 'kind' and 'seed'")
        try:
            gspec = GraphSpec(
                kind=gobj["kind"],
                seed=int(gobj["seed"]),
                p=None if gobj.get("p") is None else float(gobj["p"]),
                edges=None if gobj.get("edges") is None
                else tuple((int(i), int(j)) for i, j in gobj["edges"]),
            )
            adv = {str(k): ByzantineStrategy.from_dict(v) for k, v in obj["adversary"].items()}
            rng_ = obj["init_range"]
            if len(rng_) != 2:
                raise ConfigError("init_range must be [lo, hi]")
            byz = obj.get("byzantine_ids")
            return cls(
                m=obj["m"], b=obj["b"], graph=gspec,
                iterations=int(obj["iterations"]),
                init_range=(float(rng_[0]), float(rng_[1])),
                adversary=adv,
                algorithm=obj["algorithm"],
                seed=int(obj["seed"]),
                epsilon=float(obj["epsilon"]),
                default_value=float(obj["default_value"]),
                byzantine_ids=None if byz is None else tuple(int(i) for i in byz),
                D=None if obj.get("D") is None else int(obj["D"]),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        d = {
            "m": self.m, "b": self.b, "graph": self.graph.to_dict(),
            "iterations": self.iterations, "init_range": list(self.init_range),
            "default_value": self.default_value,
            "adversary": {k: v.to_dict() for k, v in sorted(self.adversary.items())},
            "algorithm": self.algorithm, "seed": self.seed, "epsilon": self.epsilon,
        }
        if self.byzantine_ids is not None:
            d["byzantine_ids"] = list(self.byzantine_ids)
        if self.D is not None:
            d["D"] = self.D
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def with_seed(self, offset: int) -> "SimConfig":
        """Same experiment with master and graph seeds shifted by ``offset``."""
        return replace(self, seed=self.seed + offset,
                       graph=replace(self.graph, seed=self.graph.seed + offset))

    def strategy_for(self, node_id: int) -> ByzantineStrategy:
        s = self.adversary.get(str(node_id)) or self.adversary.get("*")
        if s is None:
            raise ConfigError(f"no adversary strategy for Byzantine node {node_id}")
        return s


@dataclass(frozen=True)
class Scenario:
    """A config made concrete: graph, partition and phase length."""

    config: SimConfig
    graph: gr.Graph
    partition: gr.Partition
    D: int
    diameter: int
    graph_seed: int
    retries: int = 0
    honest_graph: gr.Graph = field(default=None, repr=False)


def _placement(cfg: SimConfig) -> tuple[int, ...]:
    if cfg.byzantine_ids is not None:
        return tuple(sorted(cfg.byzantine_ids))
    rng = np.random.default_rng([cfg.seed & ((1 << 64) - 1), 0xB42])
    return tuple(sorted(rng.choice(cfg.m, size=cfg.b, replace=False).tolist()))


def build_scenario(cfg: SimConfig) -> Scenario:
    """Realise the graph and Byzantine placement.

    Random graphs whose honest subgraph is not strongly connected are
    redrawn with the next seed; fixed topologies must already qualify.
    """
    part = gr.Partition(cfg.m, _placement(cfg))
    for z in part.byzantine:
        cfg.strategy_for(z)
    gspec = cfg.graph
    seed, retries = gspec.seed, 0
    while True:
        if gspec.kind == "erdos_renyi":
            g = gr.generate_erdos_renyi(cfg.m, gspec.p, seed)
        elif gspec.kind == "complete":
            g = gr.complete_graph(cfg.m)
        elif gspec.kind == "ring_bridge":
            g = gr.ring_bridge_graph(cfg.m, part.byzantine)
        else:
            try:
                g = gr.Graph(cfg.m, gspec.edges)
            except ValueError as exc:
                raise ConfigError(f"bad custom graph: {exc}") from exc
        hg, _ = gr.honest_subgraph(g, part)
        if gr.is_strongly_connected(hg):
            break
        if gspec.kind != "erdos_renyi":
            raise ConfigError("honest subgraph is not strongly connected")
        retries += 1
        if retries > MAX_GRAPH_RETRIES:
            raise ConfigError(f"no strongly connected honest subgraph after {MAX_GRAPH_RETRIES} draws")
        seed += 1
    diam = gr.diameter(hg)
    D = max(1, diam)
    if cfg.D is not None:
        if cfg.D < diam:
            raise ConfigError(f"D={cfg.D} is below the honest-subgraph diameter {diam}")
        D = cfg.D
    return Scenario(cfg, g, part, D, diam, seed, retries, hg)
