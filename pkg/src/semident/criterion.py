"""Graphical criterion for global identifiability.

An acyclic mixed graph has an injective covariance parametrization exactly
when no induced subgraph has both a converging arborescence in its directed
part and a connected bidirected part. Cyclic directed parts rule out
injectivity outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import linalg
from .errors import CyclicDirectedPartError
from .graphs import (
    MixedGraph,
    bidirected_connected,
    find_directed_cycle,
    has_converging_arborescence,
    induced_subgraph,
    is_acyclic,
    is_ancestral,
    is_simple,
    relabel_topologically,
    _reachable_to,
)


@dataclass(frozen=True)
class IdentVerdict:
    """Outcome of the global identifiability check.

    When not identifiable, ``violating_set`` holds a node set A whose induced
    subgraph certifies noninjectivity and ``sink`` the arborescence sink
    (omitted for cyclic graphs, where the set is one directed cycle).
    """

    identifiable: bool
    violating_set: tuple | None
    sink: int | None
    simple: bool
    ancestral: bool
    acyclic: bool

    def to_json(self, g: MixedGraph | None = None) -> dict:
        def fmt(v):
            if g is None:
                return v
            name = g.name_of(v)
            return int(name) if name.isdigit() else name

        out = {"identifiable": self.identifiable}
        if self.violating_set is not None:
            out["violating_set"] = [fmt(v) for v in self.violating_set]
        if self.sink is not None:
            out["sink"] = fmt(self.sink)
        out["flags"] = {
            "simple": self.simple,
            "ancestral": self.ancestral,
            "acyclic": self.acyclic,
        }
        return out


def find_violating_set(g: MixedGraph) -> tuple[tuple, int] | None:
    """Search for a violating induced subgraph by a shrinking fixpoint.

    Requires a topologically labeled acyclic graph. For each candidate sink y
    (later labels first) start from all nodes and alternately drop nodes with
    no directed path to y inside the current set and nodes outside y's
    bidirected component, until stable. The first sink whose fixpoint keeps at
    least two nodes yields the (maximal for that sink) violating set.
    """
    if not is_acyclic(g):
        raise CyclicDirectedPartError(find_directed_cycle(g))
    for y in range(g.m, 0, -1):
        a = frozenset(g.nodes)
        while True:
            reach = frozenset(_reachable_to(g, y, a))
            comp = _bidirected_component(g, y, reach)
            if comp == a:
                break
            a = comp
        if len(a) >= 2:
            return tuple(sorted(a)), y
    return None


def _bidirected_component(g: MixedGraph, y: int, within: frozenset) -> frozenset:
    from collections import deque

    seen = {y}
    queue = deque([y])
    while queue:
        v = queue.popleft()
        for s in g.siblings(v):
            if s in within and s not in seen:
                seen.add(s)
                queue.append(s)
    return frozenset(seen)


def find_violating_set_exhaustive(g: MixedGraph) -> tuple[tuple, int] | None:
    """Scan every induced subgraph for the criterion's two conditions.

    Exponential in the node count; retained as the independent oracle that
    cross-validates the fixpoint search (census uses it up to five nodes).
    """
    if not is_acyclic(g):
        raise CyclicDirectedPartError(find_directed_cycle(g))
    nodes = sorted(g.nodes)
    for size in range(g.m, 1, -1):
        for subset in combinations(nodes, size):
            if not bidirected_connected(g, subset):
                continue
            for y in subset:
                if has_converging_arborescence(g, subset, y):
                    return tuple(subset), y
    return None


def check_global_identifiability(g: MixedGraph) -> IdentVerdict:
    """Decide injectivity of the covariance parametrization of the graph.

    Accepts any labeling; the fixpoint search runs on a topologically
    relabeled copy and the violating set is mapped back to the input labels.
    """
    cycle = find_directed_cycle(g)
    if cycle is not None:
        return IdentVerdict(
            identifiable=False,
            violating_set=tuple(sorted(cycle)),
            sink=None,
            simple=is_simple(g),
            ancestral=False,
            acyclic=False,
        )
    simple = is_simple(g)
    ancestral = is_ancestral(g)
    topo, mapping = relabel_topologically(g)
    back = {new: old for old, new in mapping.items()}
    hit = find_violating_set(topo)
    if hit is None:
        return IdentVerdict(True, None, None, simple, ancestral, True)
    a, y = hit
    return IdentVerdict(
        identifiable=False,
        violating_set=tuple(sorted(back[v] for v in a)),
        sink=back[y],
        simple=simple,
        ancestral=ancestral,
        acyclic=True,
    )


def is_generically_identifiable_simple(g: MixedGraph) -> bool:
    """Sufficient condition for generic identifiability: simple and acyclic.

    Additionally confirms, at Lambda = 0 and Omega = I, that every stepwise
    rank condition holds (the identity covariance always has a singleton
    fiber for simple acyclic graphs).
    """
    if not is_acyclic(g) or not is_simple(g):
        return False
    from .inversion import rank_condition  # local import to avoid a cycle

    topo, _ = relabel_topologically(g)
    lam = linalg.zeros(topo.m, topo.m, "float")
    omega = np.eye(topo.m)
    for i in range(1, topo.m):
        rec = rank_condition(topo, lam, omega, i)
        if not rec.passed:
            return False
    return True


def all_subgraphs(g: MixedGraph):
    """Yield every (not necessarily induced) subgraph on the same node set."""
    directed = sorted(g.directed)
    bidirected = sorted(g.bidirected)
    for dmask in range(1 << len(directed)):
        dsub = frozenset(e for k, e in enumerate(directed) if dmask >> k & 1)
        for bmask in range(1 << len(bidirected)):
            bsub = frozenset(e for k, e in enumerate(bidirected) if bmask >> k & 1)
            yield MixedGraph(m=g.m, directed=dsub, bidirected=bsub, names=g.names)
