"""Explicit counterexamples to injectivity.

For a graph failing the identifiability criterion, build two distinct
parameter points with identical covariance: a converging arborescence fixes
Lambda so that the all-ones vector spans the critical column space, a
Laplacian-based Omega kills it from the left, and perturbing along the
resulting kernel direction of the final inversion step leaves the forward
image untouched.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .criterion import check_global_identifiability
from .errors import (
    NotArborescenceError,
    NotSpanningTreeError,
    PDPerturbationFailedError,
    SemidentError,
    ZeroCoordinateError,
)
from .graphs import MixedGraph, induced_subgraph, relabel_topologically, siblings_below
from .params import phi


@dataclass
class WitnessPair:
    """Two parameter points with equal forward image.

    ``separation`` is the max-norm distance between the points and
    ``residual`` the max-norm difference of their covariances (exactly zero
    on the rational backend).
    """

    point_a: tuple
    point_b: tuple
    sigma: np.ndarray
    separation: float
    residual: float


def build_arborescence_lambda(arb: MixedGraph, x) -> np.ndarray:
    """Lambda whose critical column space contains the given vector.

    ``arb`` must have a directed part that is an arborescence converging to
    its last node; ``x`` is an all-nonzero vector over the non-sink nodes.
    Each non-sink node i with unique outgoing edge i -> j (j below the sink)
    gets lambda_ij = x_i / x_j; edges into the sink stay zero. Then
    (I - Lambda)^{-1}_{[m], P(m)} x_{P(m)} = x holds exactly.
    """
    mm = arb.m
    n = mm - 1
    if len(x) != n:
        raise SemidentError(f"x must have length {n}")
    backend = "rational" if any(isinstance(v, Fraction) for v in x) else "float"
    for v in x:
        if v == 0:
            raise ZeroCoordinateError("x must have all-nonzero coordinates")
    out_edges: dict[int, int] = {}
    for i, j in arb.directed:
        if i in out_edges:
            raise NotArborescenceError(f"node {i} has two outgoing edges")
        out_edges[i] = j
    if set(out_edges) != set(range(1, mm)) or mm in out_edges:
        raise NotArborescenceError("every non-sink node needs exactly one outgoing edge")
    # every node must reach the sink through the unique-edge chain
    for i in range(1, mm):
        seen = set()
        cur = i
        while cur != mm:
            if cur in seen:
                raise NotArborescenceError("outgoing edges do not converge to the sink")
            seen.add(cur)
            cur = out_edges[cur]
    lam = linalg.zeros(mm, mm, backend)
    for i in range(1, mm):
        j = out_edges[i]
        if j != mm:
            lam[i - 1, j - 1] = x[i - 1] / x[j - 1]
    return lam


def build_laplacian_omega(gp: MixedGraph) -> np.ndarray:
    """Omega in PD(B) whose rows off the sink's siblings annihilate all-ones.

    Requires the bidirected part of ``gp`` to be a spanning tree with the
    sink as the last node. Over R = non-siblings, the block is the Laplacian
    of the induced bidirected graph plus the indicator diagonal of nodes
    touching a sibling; the R x S block splits each required row sum of -1
    equally over the available sibling neighbors. The sibling-and-sink
    diagonal starts at dominance and doubles until a PD factorization
    succeeds. Exact rational arithmetic throughout.
    """
    mm = gp.m
    n = mm - 1
    tree = gp.bidirected
    if len(tree) != mm - 1 or not _is_connected_tree(gp):
        raise NotSpanningTreeError("bidirected part must be a spanning tree")
    s = sorted(v for v in range(1, mm) if gp.has_bidirected(v, mm))
    r = [v for v in range(1, mm + 1 - 1) if v not in s]
    omega = linalg.zeros(mm, mm, "rational")
    # Laplacian of the induced bidirected graph on R
    for i in r:
        deg = sum(1 for j in r if j != i and gp.has_bidirected(i, j))
        omega[i - 1, i - 1] = Fraction(deg)
        for j in r:
            if j != i and gp.has_bidirected(i, j):
                omega[i - 1, j - 1] = Fraction(-1)
    # indicator diagonal and the -1 row sums toward the siblings
    for i in r:
        s_neighbors = [j for j in s if gp.has_bidirected(i, j)]
        if s_neighbors:
            omega[i - 1, i - 1] += 1
            share = Fraction(-1, len(s_neighbors))
            for j in s_neighbors:
                omega[i - 1, j - 1] = share
                omega[j - 1, i - 1] = share
    # dominance diagonal over siblings and sink, doubled until PD
    for i in s + [mm]:
        row_sum = sum(abs(omega[i - 1, j]) for j in range(mm) if j != i - 1)
        omega[i - 1, i - 1] = row_sum + 1
    while not linalg.is_pd(omega):
        for i in s + [mm]:
            omega[i - 1, i - 1] *= 2
    # rows over R annihilate the all-ones vector over the non-sink nodes
    for i in r:
        assert sum(omega[i - 1, j] for j in range(n)) == 0
    return omega


def _is_connected_tree(gp: MixedGraph) -> bool:
    seen = {1}
    queue = deque([1])
    while queue:
        v = queue.popleft()
        for w in gp.siblings(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == gp.m


def _shortest_path_arborescence(g: MixedGraph, sink: int) -> frozenset:
    """One outgoing edge per node along a shortest directed path to the sink."""
    rev: dict[int, list[int]] = {v: [] for v in g.nodes}
    for i, j in sorted(g.directed):
        rev[j].append(i)
    next_hop: dict[int, int] = {}
    queue = deque([sink])
    seen = {sink}
    while queue:
        v = queue.popleft()
        for p in rev[v]:
            if p not in seen:
                seen.add(p)
                next_hop[p] = v
                queue.append(p)
    return frozenset((i, j) for i, j in next_hop.items())


def _bfs_spanning_tree(g: MixedGraph, root: int) -> frozenset:
    tree = set()
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in sorted(g.siblings(v)):
            if w not in seen:
                seen.add(w)
                tree.add((min(v, w), max(v, w)))
                queue.append(w)
    return frozenset(tree)


def construct_witness(g: MixedGraph, backend: str = "float") -> WitnessPair:
    """Build a verified pair of distinct points with equal covariance.

    Precondition: the graph is acyclic and fails the identifiability
    criterion. The construction works inside the violating induced subgraph
    (arborescence + bidirected spanning tree), perturbs along the kernel of
    the final step system, and zero-pads back to the full graph.
    """
    linalg.check_backend(backend)
    verdict = check_global_identifiability(g)
    if verdict.identifiable:
        raise SemidentError("graph is identifiable; no witness exists")
    if not verdict.acyclic:
        raise SemidentError("cyclic graph: use the cycle-fiber machinery instead")

    gt, to_topo = relabel_topologically(g)
    from .criterion import find_violating_set

    a_set, y = find_violating_set(gt)
    sub, back_to_topo = induced_subgraph(gt, a_set)  # y becomes the last label
    mm = sub.m
    n = mm - 1

    arb_edges = _shortest_path_arborescence(sub, mm)
    tree_edges = _bfs_spanning_tree(sub, mm)
    skeleton = MixedGraph(m=mm, directed=arb_edges, bidirected=tree_edges)

    one = Fraction(1) if backend == "rational" else 1.0
    x = [one] * n
    lam = build_arborescence_lambda(skeleton, x)
    if backend == "float":
        lam = linalg.as_float(lam)
    omega = build_laplacian_omega(skeleton)
    if backend == "float":
        omega = linalg.as_float(omega)

    sigma_sub = phi(skeleton, lam, omega)

    # kernel direction of the final step system
    p = sorted(v - 1 for v in skeleton.parents(mm))
    s = sorted(v - 1 for v in siblings_below(skeleton, n))
    gamma = linalg.identity(n, backend) - lam[:n, :n]
    ginv = linalg.mat_inv(gamma)
    alpha = linalg.to_array([1] * len(p), backend)
    beta = ginv[:, p] @ alpha
    d_omega = -(omega[:n, :n] @ beta)[s]

    lam_b = lam.copy()
    omega_b = omega.copy()
    t = one
    while True:
        lam_b = lam.copy()
        omega_b = omega.copy()
        for k, col in enumerate(p):
            lam_b[col, n] = lam[col, n] + t * alpha[k]
        for k, col in enumerate(s):
            omega_b[col, n] = omega[col, n] + t * d_omega[k]
            omega_b[n, col] = omega_b[col, n]
        lamv = lam_b[:n, n]
        wv = omega_b[:n, n]
        gtpg = ginv.T @ omega[:n, :n] @ ginv
        omega_b[n, n] = sigma_sub[n, n] - lamv @ gtpg @ lamv - 2 * (wv @ ginv @ lamv)
        if linalg.is_pd(omega_b):
            break
        t = t / 2
        if float(t) < 1e-8:
            raise PDPerturbationFailedError("perturbation step size underflowed")

    # lift both points (and sigma) from the subgraph back to the full graph
    to_orig = {new: old for old, new in to_topo.items()}
    pos = [to_orig[back_to_topo[k]] - 1 for k in range(1, mm + 1)]

    def lift(lam_s, omega_s):
        lam_full = linalg.zeros(g.m, g.m, backend)
        omega_full = linalg.identity(g.m, backend)
        for i in range(mm):
            for j in range(mm):
                lam_full[pos[i], pos[j]] = lam_s[i, j]
                if i != j:
                    omega_full[pos[i], pos[j]] = omega_s[i, j]
                else:
                    omega_full[pos[i], pos[i]] = omega_s[i, i]
        return lam_full, omega_full

    point_a = lift(lam, omega)
    point_b = lift(lam_b, omega_b)
    sigma_a = phi(g, *point_a)
    sigma_b = phi(g, *point_b)
    residual = linalg.max_abs_diff(sigma_a, sigma_b)
    separation = max(
        linalg.max_abs_diff(point_a[0], point_b[0]),
        linalg.max_abs_diff(point_a[1], point_b[1]),
    )
    return WitnessPair(point_a, point_b, sigma_a, separation, residual)
