"""Directed communication graphs, honest subgraphs and reduced-graph combinatorics."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np


class NotStronglyConnectedError(ValueError):
    """Raised when an operation needs a strongly connected graph."""


class CombinatorialBlowupError(ValueError):
    """Raised when exhaustive enumeration is requested beyond the supported size."""


#: Largest n for which every reduced graph of the complete graph on 2n+1 nodes is enumerated.
MAX_EXHAUSTIVE_N = 2


@dataclass(frozen=True)
class Graph:
    """Static directed graph on nodes ``0..m-1``; ``(i, j)`` means i may send to j."""

    m: int
    edges: frozenset[tuple[int, int]]
    _out: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _in: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __init__(self, m: int, edges: Iterable[Sequence[int]] = ()):
        if m < 1:
            raise ValueError(f"graph needs at least one node, got m={m}")
        es = frozenset((int(i), int(j)) for i, j in edges)
        for i, j in es:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < m and 0 <= j < m):
                raise ValueError(f"edge ({i}, {j}) outside [0, {m})")
        out: list[list[int]] = [[] for _ in range(m)]
        inn: list[list[int]] = [[] for _ in range(m)]
        for i, j in sorted(es):
            out[i].append(j)
            inn[j].append(i)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "edges", es)
        object.__setattr__(self, "_out", tuple(tuple(x) for x in out))
        object.__setattr__(self, "_in", tuple(tuple(sorted(x)) for x in inn))

    def out_neighbors(self, i: int) -> tuple[int, ...]:
        return self._out[i]

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        return self._in[i]

    def out_degree(self, i: int) -> int:
        return len(self._out[i])

    def in_degree(self, i: int) -> int:
        return len(self._in[i])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> str:
        return json.dumps({"m": self.m, "edges": [list(e) for e in self.sorted_edges()]})

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        obj = json.loads(text)
        return cls(obj["m"], obj["edges"])

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic graph with node ``i`` renamed ``perm[i]``."""
        return Graph(self.m, ((perm[i], perm[j]) for i, j in self.edges))


@dataclass(frozen=True)
class Partition:
    """Split of the node set into Byzantine and honest ids."""

    m: int
    byzantine: frozenset[int]

    def __init__(self, m: int, byzantine: Iterable[int]):
        byz = frozenset(int(x) for x in byzantine)
        bad = [x for x in byz if not 0 <= x < m]
        if bad:
            raise ValueError(f"byzantine ids {sorted(bad)} outside [0, {m})")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "byzantine", byz)

    @property
    def honest(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.m) if i not in self.byzantine)

    @property
    def b(self) -> int:
        return len(self.byzantine)

    @property
    def h(self) -> int:
        return self.m - len(self.byzantine)

    def is_honest(self, i: int) -> bool:
        return i not in self.byzantine


def complete_graph(m: int) -> Graph:
    return Graph(m, ((i, j) for i in range(m) for j in range(m) if i != j))


def directed_cycle(m: int) -> Graph:
    return Graph(m, ((i, (i + 1) % m) for i in range(m)) if m > 1 else ())


def ring_bridge_graph(m: int, byzantine: Iterable[int]) -> Graph:
    """Honest nodes on a directed cycle (one honest in-neighbour each), every
    Byzantine node linked both ways to every honest node."""
    part = Partition(m, byzantine)
    honest = part.honest
    edges = []
    if len(honest) > 1:
        edges += [(honest[k], honest[(k + 1) % len(honest)]) for k in range(len(honest))]
    for z in sorted(part.byzantine):
        for i in honest:
            edges += [(z, i), (i, z)]
    return Graph(m, edges)


def generate_erdos_renyi(m: int, p: float, seed: int) -> Graph:
    """Directed G(m, p): each ordered pair i != j is an edge independently with probability p."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    draws = rng.random((m, m))
    mask = draws < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Graph(m, zip(src.tolist(), dst.tolist()))


def honest_subgraph(g: Graph, part: Partition) -> tuple[Graph, tuple[int, ...]]:
    """Drop Byzantine nodes and their edges.

    Returns the subgraph re-indexed ``0..h-1`` and the order-preserving map
    ``new index -> original id``.
    """
    if part.m != g.m:
        raise ValueError(f"partition over {part.m} nodes does not match graph over {g.m}")
    ids = part.honest
    index = {v: k for k, v in enumerate(ids)}
    edges = ((index[i], index[j]) for i, j in g.edges if i in index and j in index)
    return Graph(len(ids), edges), ids


def _bfs(g: Graph, src: int) -> list[int]:
    dist = [-1] * g.m
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in g.out_neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def distances(g: Graph) -> list[list[int]]:
    """All-pairs hop distances; -1 marks unreachable."""
    return [_bfs(g, s) for s in range(g.m)]


def is_strongly_connected(g: Graph) -> bool:
    if g.m == 1:
        return True
    if min(_bfs(g, 0)) < 0:
        return False
    rev = Graph(g.m, ((j, i) for i, j in g.edges))
    return min(_bfs(rev, 0)) >= 0


def diameter(g: Graph) -> int:
    """Largest shortest-path length over ordered pairs."""
    best = 0
    for s in range(g.m):
        d = _bfs(g, s)
        if min(d) < 0:
            raise NotStronglyConnectedError("diameter undefined: graph is not strongly connected")
        best = max(best, max(d))
    return best


def find_source_components(g: Graph) -> set[int]:
    """Nodes with a directed path to every other node."""
    return {s for s in range(g.m) if min(_bfs(g, s)) >= 0}


def max_outdegree(g: Graph) -> tuple[int, int]:
    degs = [g.out_degree(i) for i in range(g.m)]
    top = max(degs)
    return degs.index(top), top


@dataclass(frozen=True)
class ReducedGraph:
    """Complete graph on 2n+1 nodes with exactly n incoming edges removed per node.

    ``removed[v]`` holds the senders whose edge into ``v`` was dropped.
    """

    n: int
    removed: tuple[frozenset[int], ...]

    def __post_init__(self):
        size = 2 * self.n + 1
        if len(self.removed) != size:
            raise ValueError(f"expected {size} removal sets, got {len(self.removed)}")
        for v, rem in enumerate(self.removed):
            if len(rem) != self.n or v in rem or not rem <= set(range(size)):
                raise ValueError(f"node {v}: invalid removed in-edge set {sorted(rem)}")

    @property
    def base(self) -> Graph:
        return complete_graph(2 * self.n + 1)

    @property
    def graph(self) -> Graph:
        size = 2 * self.n + 1
        return Graph(size, ((u, v) for v in range(size) for u in range(size)
                            if u != v and u not in self.removed[v]))


def _in_edge_choices(n: int) -> list[list[frozenset[int]]]:
    size = 2 * n + 1
    return [
        [frozenset(c) for c in itertools.combinations([u for u in range(size) if u != v], n)]
        for v in range(size)
    ]


def reduced_graph_count(n: int) -> int:
    """tau for the complete graph on 2n+1 nodes: C(2n, n) ** (2n+1)."""
    return comb(2 * n, n) ** (2 * n + 1)


def enumerate_reduced_graphs(n: int) -> Iterator[ReducedGraph]:
    """Yield every reduced graph of the complete graph on 2n+1 nodes once."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > MAX_EXHAUSTIVE_N:
        raise CombinatorialBlowupError(
            f"exhaustive enumeration limited to n <= {MAX_EXHAUSTIVE_N} "
            f"(n={n} gives {reduced_graph_count(n)} graphs); use sample_reduced_graphs")
    for removed in itertools.product(*_in_edge_choices(n)):
        yield ReducedGraph(n, tuple(removed))


def sample_reduced_graphs(n: int, k: int, seed: int) -> list[ReducedGraph]:
    """Draw k reduced graphs, each node's removed set uniform over the C(2n, n) choices."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    choices = _in_edge_choices(n)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, comb(2 * n, n), size=(k, 2 * n + 1))
    return [ReducedGraph(n, tuple(choices[v][c] for v, c in enumerate(row)))
            for row in picks.tolist()]
