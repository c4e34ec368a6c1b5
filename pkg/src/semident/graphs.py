"""Mixed graphs (directed + bidirected edges) and structural queries.

Nodes are internally labeled 1..m. External node names from parsed files are
kept in a symbol table on the graph. All values are immutable; every operation
is a pure function.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from heapq import heapify, heappop, heappush
from typing import Iterable

from .errors import (
    CyclicDirectedPartError,
    EmptySubsetError,
    GraphParseError,
    SelfLoopError,
)

_TOKEN = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class MixedGraph:
    """A mixed graph (V, D, B) on nodes 1..m.

    ``directed`` holds ordered pairs (i, j) meaning i -> j; ``bidirected``
    holds pairs stored canonically as (min, max) meaning i <-> j. The two edge
    sets may overlap (non-simple graphs are representable). Self-loops are
    rejected on construction.
    """

    m: int
    directed: frozenset = frozenset()
    bidirected: frozenset = frozenset()
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        directed = frozenset((int(i), int(j)) for i, j in self.directed)
        bidirected = frozenset(
            (min(int(i), int(j)), max(int(i), int(j))) for i, j in self.bidirected
        )
        for i, j in directed | bidirected:
            if i == j:
                raise SelfLoopError(f"self-loop at node {i}")
            if not (1 <= i <= self.m and 1 <= j <= self.m):
                raise GraphParseError(f"edge ({i},{j}) outside node range 1..{self.m}")
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "bidirected", bidirected)
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != self.m:
                raise GraphParseError("names length does not match node count")
            object.__setattr__(self, "names", names)

    # -- basic queries -------------------------------------------------

    @property
    def nodes(self) -> range:
        return range(1, self.m + 1)

    def has_directed(self, i: int, j: int) -> bool:
        return (i, j) in self.directed

    def has_bidirected(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.bidirected

    def parents(self, i: int) -> frozenset:
        return frozenset(j for j, k in self.directed if k == i)

    def children(self, i: int) -> frozenset:
        return frozenset(k for j, k in self.directed if j == i)

    def siblings(self, i: int) -> frozenset:
        return frozenset(
            (a if b == i else b) for a, b in self.bidirected if i in (a, b)
        )

    def name_of(self, i: int) -> str:
        return self.names[i - 1] if self.names is not None else str(i)


def parents(g: MixedGraph, i: int) -> frozenset:
    return g.parents(i)


def siblings_below(g: MixedGraph, i: int) -> frozenset:
    """S(i): siblings of node i+1 among the first i nodes.

    Assumes topologically relabeled nodes (as all stepwise formulas do).
    """
    return frozenset(j for j in range(1, i + 1) if g.has_bidirected(j, i + 1))


def is_simple(g: MixedGraph) -> bool:
    """True iff at most one edge joins any pair of nodes."""
    for i, j in g.directed:
        if g.has_bidirected(i, j) or (j, i) in g.directed:
            return False
    return True


def find_directed_cycle(g: MixedGraph) -> tuple | None:
    """Return one directed cycle as a node tuple, or None if acyclic."""
    color = {v: 0 for v in g.nodes}  # 0 unvisited, 1 on stack, 2 done
    parent: dict[int, int] = {}
    for start in g.nodes:
        if color[start]:
            continue
        stack = [(start, iter(sorted(g.children(start))))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for child in it:
                if color[child] == 0:
                    color[child] = 1
                    parent[child] = node
                    stack.append((child, iter(sorted(g.children(child)))))
                    advanced = True
                    break
                if color[child] == 1:
                    cycle = [node]
                    cur = node
                    while cur != child:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return tuple(cycle)
            if not advanced:
                color[node] = 2
                stack.pop()
    return None


def is_acyclic(g: MixedGraph) -> bool:
    return find_directed_cycle(g) is None


def topological_order(g: MixedGraph) -> tuple:
    """Nodes in a deterministic topological order of the directed part.

    Kahn's algorithm with ties broken by smallest original label. Raises
    CyclicDirectedPartError (carrying one cycle) when no order exists.
    """
    indeg = {v: 0 for v in g.nodes}
    for _, j in g.directed:
        indeg[j] += 1
    heap = [v for v in g.nodes if indeg[v] == 0]
    heapify(heap)
    order = []
    while heap:
        v = heappop(heap)
        order.append(v)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                heappush(heap, c)
    if len(order) != g.m:
        cycle = find_directed_cycle(g)
        raise CyclicDirectedPartError(cycle)
    return tuple(order)


def relabel(g: MixedGraph, new_label: dict) -> MixedGraph:
    """Apply a node relabeling {old: new}; names follow the nodes."""
    names = None
    if g.names is not None:
        names = [None] * g.m
        for old, new in new_label.items():
            names[new - 1] = g.names[old - 1]
        names = tuple(names)
    return MixedGraph(
        m=g.m,
        directed=frozenset((new_label[i], new_label[j]) for i, j in g.directed),
        bidirected=frozenset(
            (new_label[i], new_label[j]) for i, j in g.bidirected
        ),
        names=names,
    )


def relabel_topologically(g: MixedGraph) -> tuple[MixedGraph, dict]:
    """Relabel nodes so every directed edge goes from lower to higher label.

    Returns (relabeled graph, mapping old -> new). Idempotent on graphs that
    already carry topological labels (ties broken by original label).
    """
    order = topological_order(g)
    mapping = {old: pos + 1 for pos, old in enumerate(order)}
    return relabel(g, mapping), mapping


def induced_subgraph(g: MixedGraph, nodes: Iterable[int]) -> tuple[MixedGraph, dict]:
    """G_A with nodes relabeled 1..|A| ascending; returns (graph, new -> old map)."""
    subset = sorted(set(nodes))
    if not subset:
        raise EmptySubsetError("induced subgraph of the empty set")
    for v in subset:
        if not 1 <= v <= g.m:
            raise EmptySubsetError(f"node {v} outside 1..{g.m}")
    to_new = {old: k + 1 for k, old in enumerate(subset)}
    back = {k + 1: old for k, old in enumerate(subset)}
    names = (
        tuple(g.names[old - 1] for old in subset) if g.names is not None else None
    )
    sub = MixedGraph(
        m=len(subset),
        directed=frozenset(
            (to_new[i], to_new[j]) for i, j in g.directed if i in to_new and j in to_new
        ),
        bidirected=frozenset(
            (to_new[i], to_new[j])
            for i, j in g.bidirected
            if i in to_new and j in to_new
        ),
        names=names,
    )
    return sub, back


def _reachable_to(g: MixedGraph, target: int, within: frozenset) -> set:
    """Nodes of ``within`` with a directed path to ``target`` inside ``within``."""
    rev: dict[int, list[int]] = {v: [] for v in within}
    for i, j in g.directed:
        if i in within and j in within:
            rev[j].append(i)
    seen = {target}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for p in rev[v]:
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def descendants(g: MixedGraph, i: int) -> set:
    """Nodes reachable from i by directed paths (excluding i itself)."""
    seen = set()
    queue = deque([i])
    while queue:
        v = queue.popleft()
        for c in g.children(v):
            if c not in seen:
                seen.add(c)
                queue.append(c)
    seen.discard(i)
    return seen


def is_ancestral(g: MixedGraph) -> bool:
    """True iff no bidirected edge joins a node to one of its descendants."""
    if not is_acyclic(g):
        raise CyclicDirectedPartError(find_directed_cycle(g))
    for i, j in g.bidirected:
        if j in descendants(g, i) or i in descendants(g, j):
            return False
    return True


def bidirected_connected(g: MixedGraph, nodes: Iterable[int]) -> bool:
    """True iff (A, B_A) is a connected undirected graph (singletons connect)."""
    subset = frozenset(nodes)
    if not subset:
        raise EmptySubsetError("connectivity of the empty set")
    start = next(iter(subset))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for s in g.siblings(v):
            if s in subset and s not in seen:
                seen.add(s)
                queue.append(s)
    return seen == subset


def has_converging_arborescence(g: MixedGraph, nodes: Iterable[int], sink: int) -> bool:
    """True iff every node of the subset reaches ``sink`` by a directed path
    inside the subset (equivalently D_A contains an arborescence converging
    to the sink)."""
    subset = frozenset(nodes)
    if sink not in subset or len(subset) < 2:
        raise EmptySubsetError("need sink in subset and at least two nodes")
    return _reachable_to(g, sink, subset) == subset


# -- parsing and serialization ----------------------------------------


def parse_graph(text: str) -> MixedGraph:
    """Parse the edge-list text format (`a -> b`, `a <-> b`, `#` comments).

    Node names are alphanumeric tokens, assigned internal labels in order of
    first appearance. Duplicate edges collapse silently (edge sets, not
    multisets).
    """
    names: list[str] = []
    index: dict[str, int] = {}

    def intern(tok: str, lineno: int) -> int:
        if not _TOKEN.match(tok):
            raise GraphParseError(f"bad node name {tok!r}", lineno)
        if tok not in index:
            names.append(tok)
            index[tok] = len(names)
        return index[tok]

    directed = set()
    bidirected = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[1] not in ("->", "<->"):
            raise GraphParseError(f"expected 'a -> b' or 'a <-> b', got {raw!r}", lineno)
        a = intern(parts[0], lineno)
        b = intern(parts[2], lineno)
        if a == b:
            raise SelfLoopError(f"self-loop at node {parts[0]!r}", lineno)
        if parts[1] == "->":
            directed.add((a, b))
        else:
            bidirected.add((min(a, b), max(a, b)))
    return MixedGraph(
        m=len(names),
        directed=frozenset(directed),
        bidirected=frozenset(bidirected),
        names=tuple(names),
    )


def parse_graph_json(data) -> MixedGraph:
    """Parse the JSON graph format.

    ``{"nodes": [...], "directed": [[a, b], ...], "bidirected": [[a, b], ...]}``
    """
    if isinstance(data, str):
        data = json.loads(data)
    names = [str(n) for n in data.get("nodes", [])]
    index = {n: k + 1 for k, n in enumerate(names)}
    if len(index) != len(names):
        raise GraphParseError("duplicate node names")

    def intern(tok) -> int:
        tok = str(tok)
        if tok not in index:
            raise GraphParseError(f"edge endpoint {tok!r} not in nodes list")
        return index[tok]

    directed = set()
    bidirected = set()
    for a, b in data.get("directed", []):
        i, j = intern(a), intern(b)
        if i == j:
            raise SelfLoopError(f"self-loop at node {a!r}")
        directed.add((i, j))
    for a, b in data.get("bidirected", []):
        i, j = intern(a), intern(b)
        if i == j:
            raise SelfLoopError(f"self-loop at node {a!r}")
        bidirected.add((min(i, j), max(i, j)))
    return MixedGraph(
        m=len(names),
        directed=frozenset(directed),
        bidirected=frozenset(bidirected),
        names=tuple(names),
    )


def graph_to_text(g: MixedGraph) -> str:
    lines = [
        f"{g.name_of(i)} -> {g.name_of(j)}" for i, j in sorted(g.directed)
    ] + [f"{g.name_of(i)} <-> {g.name_of(j)}" for i, j in sorted(g.bidirected)]
    return "\n".join(lines) + ("\n" if lines else "")


def graph_to_json(g: MixedGraph) -> dict:
    return {
        "nodes": [g.name_of(i) for i in g.nodes],
        "directed": sorted([g.name_of(i), g.name_of(j)] for i, j in g.directed),
        "bidirected": sorted([g.name_of(i), g.name_of(j)] for i, j in g.bidirected),
    }


def load_graph(path: str) -> MixedGraph:
    """Load a graph from a file, dispatching on a leading '{' for JSON."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return parse_graph_json(text)
    return parse_graph(text)
