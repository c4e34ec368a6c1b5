"""Parameter matrices and the covariance parametrizations.

The forward map sends a pair (Lambda, Omega) with supports given by the
directed and bidirected edges to the covariance matrix

    Sigma = (I - Lambda)^{-T} Omega (I - Lambda)^{-1},

and its companion sends (Lambda, Delta) with diagonal Delta to the inverse
covariance (I - Lambda) Delta (I - Lambda)^T. Everything is generic over the
float/rational backend (see linalg).
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import (
    CyclicDirectedPartError,
    NotPositiveDefiniteError,
    SingularIminusLambdaError,
    SupportViolationError,
)
from .graphs import MixedGraph, find_directed_cycle, is_acyclic, topological_order


def check_lambda_support(g: MixedGraph, lam: np.ndarray) -> None:
    """Raise unless lambda is zero off the directed-edge support."""
    if lam.shape != (g.m, g.m):
        raise SupportViolationError(
            f"lambda has shape {lam.shape}, expected {(g.m, g.m)}"
        )
    for i in range(g.m):
        for j in range(g.m):
            if lam[i, j] != 0 and not g.has_directed(i + 1, j + 1):
                raise SupportViolationError(
                    f"lambda[{i + 1},{j + 1}] nonzero but {i + 1}->{j + 1} not an edge"
                )


def check_omega_support(g: MixedGraph, omega: np.ndarray, require_pd: bool = True) -> None:
    """Raise unless omega is symmetric, supported on B, and (optionally) PD."""
    if omega.shape != (g.m, g.m):
        raise SupportViolationError(
            f"omega has shape {omega.shape}, expected {(g.m, g.m)}"
        )
    for i in range(g.m):
        for j in range(i + 1, g.m):
            if omega[i, j] != omega[j, i]:
                raise SupportViolationError("omega is not symmetric")
            if omega[i, j] != 0 and not g.has_bidirected(i + 1, j + 1):
                raise SupportViolationError(
                    f"omega[{i + 1},{j + 1}] nonzero but {i + 1}<->{j + 1} not an edge"
                )
    if require_pd and not linalg.is_pd(omega):
        raise NotPositiveDefiniteError("omega is not positive definite")


def i_minus_lambda_inv(g: MixedGraph, lam: np.ndarray) -> np.ndarray:
    """(I - Lambda)^{-1}, raising SingularIminusLambdaError when singular."""
    backend = linalg.backend_of(lam)
    a = linalg.identity(g.m, backend) - lam
    if backend == "float":
        if abs(np.linalg.det(a)) < 1e-12:
            raise SingularIminusLambdaError("I - Lambda is singular")
        return np.linalg.inv(a)
    try:
        return linalg.mat_inv(a)
    except Exception as exc:
        raise SingularIminusLambdaError("I - Lambda is singular") from exc


def phi(g: MixedGraph, lam: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Forward covariance map (I - Lambda)^{-T} Omega (I - Lambda)^{-1}."""
    check_lambda_support(g, lam)
    check_omega_support(g, omega)
    if is_acyclic(g):
        # under topological labels det(I - Lambda) = 1; sanity-check the
        # triangular structure cheaply via the exact/float determinant
        backend = linalg.backend_of(lam)
        if backend == "float":
            det = float(np.linalg.det(np.eye(g.m) - lam))
            assert abs(det - 1.0) < 1e-8 or not _is_topologically_labeled(g)
    inv = i_minus_lambda_inv(g, lam)
    sigma = inv.T @ omega @ inv
    return linalg.symmetrize(sigma)


def _is_topologically_labeled(g: MixedGraph) -> bool:
    return all(i < j for i, j in g.directed)


def kappa(g: MixedGraph, lam: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Inverse-covariance map (I - Lambda) Delta (I - Lambda)^T.

    ``delta`` is a length-m vector of positive reals; satisfies
    kappa(g, L, D) = phi(g, L, D^{-1})^{-1}.
    """
    check_lambda_support(g, lam)
    backend = linalg.backend_of(lam)
    if any(d <= 0 for d in delta):
        raise NotPositiveDefiniteError("delta entries must be positive")
    a = linalg.identity(g.m, backend) - lam
    if backend == "float" and abs(np.linalg.det(a)) < 1e-12:
        raise SingularIminusLambdaError("I - Lambda is singular")
    dmat = linalg.zeros(g.m, g.m, backend)
    for i in range(g.m):
        dmat[i, i] = delta[i]
    return linalg.symmetrize(a @ dmat @ a.T)


def path_inverse(g: MixedGraph, lam: np.ndarray) -> np.ndarray:
    """(I - Lambda)^{-1} computed by summing path products over directed paths.

    Entry (i, j) is the sum over directed paths from i to j of the product of
    lambda entries along the path; computed by dynamic programming in
    topological order (no explicit path enumeration). Must agree with the
    numerically inverted I - Lambda; used as a cross-check oracle.
    """
    if not is_acyclic(g):
        raise CyclicDirectedPartError(find_directed_cycle(g))
    check_lambda_support(g, lam)
    backend = linalg.backend_of(lam)
    inv = linalg.identity(g.m, backend)
    for j in topological_order(g):
        for k in g.parents(j):
            # every path into j ends with an edge k -> j
            inv[:, j - 1] = inv[:, j - 1] + inv[:, k - 1] * lam[k - 1, j - 1]
    return inv


def sample_parameters(
    g: MixedGraph,
    seed: int,
    scale: float = 1.0,
    backend: str = "float",
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a random (Lambda, Omega) pair valid for the graph.

    Lambda entries are uniform on [-scale, scale] over the directed support.
    Omega takes uniform off-diagonal entries on the bidirected support and a
    diagonal of (row absolute sum + 1) so that positive definiteness holds by
    diagonal dominance. Deterministic per seed. The rational backend draws
    fractions with denominator 8 so that exact round-trips stay cheap.
    """
    linalg.check_backend(backend)
    rng = random.Random(seed)

    def draw():
        if backend == "rational":
            num = rng.randint(-8 * 4, 8 * 4)
            val = Fraction(num, 8)
            return val * Fraction(scale).limit_denominator(10**6)
        return rng.uniform(-scale, scale)

    lam = linalg.zeros(g.m, g.m, backend)
    for i, j in sorted(g.directed):
        lam[i - 1, j - 1] = draw()
    omega = linalg.zeros(g.m, g.m, backend)
    for i, j in sorted(g.bidirected):
        v = draw()
        omega[i - 1, j - 1] = v
        omega[j - 1, i - 1] = v
    one = Fraction(1) if backend == "rational" else 1.0
    for i in range(g.m):
        row_sum = sum(abs(omega[i, j]) for j in range(g.m) if j != i)
        omega[i, i] = row_sum + one
    return lam, omega


# -- serialization -----------------------------------------------------


def matrix_to_json(a: np.ndarray, labels: list[str] | None = None) -> dict:
    """Row-major JSON form with a labels field; Fractions become 'p/q' strings."""
    n = a.shape[0]
    if labels is None:
        labels = [str(i + 1) for i in range(n)]
    return {
        "labels": list(labels),
        "entries": [[linalg.entry_to_json(v) for v in row] for row in a],
    }


def matrix_from_json(data, backend: str = "float") -> np.ndarray:
    """Inverse of matrix_to_json; accepts either the dict form or a bare list."""
    rows = data["entries"] if isinstance(data, dict) else data
    return linalg.to_array(rows, backend)
