"""Exhaustive small-graph census with independent cross-validation.

Enumerates every acyclic mixed graph on up to six nodes (directed parts as
upper-triangular DAG representatives), classifies identifiability with the
fixpoint criterion, and double-checks each verdict against an oracle built
from the exhaustive induced-subgraph scan, random-point rank conditions and
explicit witness construction. Any disagreement is a build-failing event.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from multiprocessing import Pool

from . import linalg
from .criterion import (
    check_global_identifiability,
    find_violating_set_exhaustive,
    is_generically_identifiable_simple,
)
from .errors import SemidentError
from .graphs import MixedGraph, is_simple, relabel_topologically
from .inversion import rank_condition
from .params import i_minus_lambda_inv, sample_parameters
from .witness import construct_witness

#: hard cap on census node counts
MAX_N = 6

#: random rank-condition probes per injective graph
DEFAULT_TRIALS = 20


def enumerate_graphs(
    n: int,
    acyclic_only: bool = True,
    simple_only: bool = False,
    labeled: bool = False,
):
    """Yield the acyclic mixed graphs on ``n`` nodes.

    By default one representative per upper-triangular directed part is
    produced (every DAG is isomorphic to such a representative), crossed
    with all bidirected parts. With ``labeled=True`` each representative is
    additionally emitted under every node permutation, so the stream has
    n! times as many entries (counted with multiplicity).
    """
    if not 1 <= n <= MAX_N:
        raise SemidentError(f"census supports 1 <= n <= {MAX_N}, got {n}")
    if not acyclic_only:
        raise SemidentError("only the acyclic census is supported")
    pairs = list(combinations(range(1, n + 1), 2))
    perms = list(permutations(range(1, n + 1))) if labeled else [tuple(range(1, n + 1))]
    for dmask in range(1 << len(pairs)):
        directed = frozenset(p for k, p in enumerate(pairs) if dmask >> k & 1)
        for bmask in range(1 << len(pairs)):
            bidirected = frozenset(p for k, p in enumerate(pairs) if bmask >> k & 1)
            if simple_only and directed & bidirected:
                continue
            for perm in perms:
                yield MixedGraph(
                    m=n,
                    directed=frozenset((perm[i - 1], perm[j - 1]) for i, j in directed),
                    bidirected=frozenset(
                        (perm[i - 1], perm[j - 1]) for i, j in bidirected
                    ),
                )


def canonical_form(g: MixedGraph) -> tuple:
    """Lexicographically minimal edge encoding over all node permutations.

    Two graphs share a key exactly when they are isomorphic as mixed graphs.
    Brute force over n! <= 720 permutations at the census cap.
    """
    if g.m > MAX_N:
        raise SemidentError(f"canonical_form supports m <= {MAX_N}")
    best = None
    for perm in permutations(range(1, g.m + 1)):
        directed = tuple(sorted((perm[i - 1], perm[j - 1]) for i, j in g.directed))
        bidirected = tuple(
            sorted(
                (min(perm[i - 1], perm[j - 1]), max(perm[i - 1], perm[j - 1]))
                for i, j in g.bidirected
            )
        )
        key = (g.m, directed, bidirected)
        if best is None or key < best:
            best = key
    return best


def _seed_from_key(key: tuple, salt: int = 0) -> int:
    digest = hashlib.sha256(repr(key).encode()).digest()
    return int.from_bytes(digest[:8], "big") ^ salt


@dataclass
class OracleVerdict:
    """Independent injectivity verdict with the evidence that produced it."""

    injective: bool
    evidence: str


def injectivity_oracle(g: MixedGraph, trials: int = DEFAULT_TRIALS) -> OracleVerdict:
    """Decide injectivity without the fixpoint search.

    Runs the exhaustive induced-subgraph scan; an injective answer is backed
    by rank conditions at random parameter points (and at Lambda = 0,
    Omega = I), a noninjective answer by an explicit verified witness pair.
    Internal failures raise rather than silently passing.
    """
    if g.m > 5:
        raise SemidentError("injectivity oracle supports m <= 5")
    topo, _ = relabel_topologically(g)
    hit = find_violating_set_exhaustive(topo)
    if hit is None:
        key = canonical_form(g)
        lam0 = linalg.zeros(topo.m, topo.m, "float")
        omega0 = linalg.identity(topo.m, "float")
        points = [(lam0, omega0)]
        for k in range(trials):
            points.append(sample_parameters(topo, _seed_from_key(key, salt=k)))
        for lam, omega in points:
            for i in range(1, topo.m):
                rec = rank_condition(topo, lam, omega, i)
                if not rec.passed:
                    raise SemidentError(
                        f"subset scan says injective but rank fails at step {i}"
                    )
        return OracleVerdict(True, f"rank conditions at {len(points)} points")
    pair = construct_witness(g, backend="rational")
    if pair.residual != 0 or pair.separation == 0:
        raise SemidentError("witness construction produced an invalid pair")
    return OracleVerdict(
        False, f"witness with separation {float(pair.separation):.3g}"
    )


@dataclass
class CensusRow:
    """One unlabeled isomorphism class."""

    key: tuple
    directed: tuple
    bidirected: tuple
    simple: bool
    identifiable: bool
    labeled_count: int


@dataclass
class CensusReport:
    """Aggregate of a full census run; ``disagreements`` must stay empty."""

    n: int
    simple_only: bool
    rows: list = field(default_factory=list)
    disagreements: list = field(default_factory=list)

    @property
    def unlabeled_total(self) -> int:
        return len(self.rows)

    @property
    def labeled_total(self) -> int:
        return sum(r.labeled_count for r in self.rows)

    def unlabeled_count(self, simple: bool | None = None, identifiable: bool | None = None) -> int:
        return sum(
            1
            for r in self.rows
            if (simple is None or r.simple == simple)
            and (identifiable is None or r.identifiable == identifiable)
        )

    def labeled_count(self, simple: bool | None = None, identifiable: bool | None = None) -> int:
        return sum(
            r.labeled_count
            for r in self.rows
            if (simple is None or r.simple == simple)
            and (identifiable is None or r.identifiable == identifiable)
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "simple_only": self.simple_only,
            "unlabeled_total": self.unlabeled_total,
            "labeled_total": self.labeled_total,
            "counts": {
                "unlabeled": {
                    "identifiable": self.unlabeled_count(identifiable=True),
                    "noninjective": self.unlabeled_count(identifiable=False),
                    "simple_identifiable": self.unlabeled_count(True, True),
                    "simple_noninjective": self.unlabeled_count(True, False),
                },
                "labeled": {
                    "identifiable": self.labeled_count(identifiable=True),
                    "noninjective": self.labeled_count(identifiable=False),
                },
            },
            "disagreements": [
                {"directed": sorted(d), "bidirected": sorted(b)}
                for d, b in self.disagreements
            ],
        }

    def to_csv(self) -> str:
        import csv

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["directed", "bidirected", "simple", "identifiable", "labeled_count"]
        )
        for r in sorted(self.rows, key=lambda r: r.key):
            writer.writerow(
                [
                    ";".join(f"{i}->{j}" for i, j in r.directed),
                    ";".join(f"{i}<->{j}" for i, j in r.bidirected),
                    int(r.simple),
                    int(r.identifiable),
                    r.labeled_count,
                ]
            )
        return buf.getvalue()


def _classify(g: MixedGraph, trials: int) -> tuple:
    verdict = check_global_identifiability(g)
    disagreement = None
    if g.m <= 5:
        try:
            oracle = injectivity_oracle(g, trials=trials)
            if oracle.injective != verdict.identifiable:
                disagreement = (g.directed, g.bidirected)
        except SemidentError:
            disagreement = (g.directed, g.bidirected)
    key = canonical_form(g)
    return key, g.directed, g.bidirected, is_simple(g), verdict.identifiable, disagreement


def _classify_star(args):
    return _classify(*args)


def census_report(
    n: int,
    simple_only: bool = False,
    trials: int = DEFAULT_TRIALS,
    jobs: int = 1,
) -> CensusReport:
    """Classify every acyclic mixed graph on ``n`` nodes (n <= 5).

    Unlabeled classes are deduplicated by canonical key; the labeled count
    of a class is n! times its number of upper-triangular representatives.
    The criterion verdict and the oracle verdict are compared per graph and
    any conflict lands in ``disagreements``.
    """
    if not 1 <= n <= 5:
        raise SemidentError(f"census_report supports 1 <= n <= 5, got {n}")
    work = [(g, trials) for g in enumerate_graphs(n, simple_only=simple_only)]
    if jobs > 1:
        with Pool(jobs) as pool:
            results = pool.map(_classify_star, work, chunksize=64)
    else:
        results = [_classify_star(w) for w in work]

    report = CensusReport(n=n, simple_only=simple_only)
    classes: dict[tuple, CensusRow] = {}
    factorial = math.factorial(n)
    for key, directed, bidirected, simple, identifiable, disagreement in results:
        if disagreement is not None:
            report.disagreements.append(disagreement)
        row = classes.get(key)
        if row is None:
            classes[key] = CensusRow(
                key=key,
                directed=tuple(sorted(directed)),
                bidirected=tuple(sorted(bidirected)),
                simple=simple,
                identifiable=identifiable,
                labeled_count=factorial,
            )
        else:
            if row.identifiable != identifiable:
                report.disagreements.append((directed, bidirected))
            row.labeled_count += factorial
    report.rows = list(classes.values())
    return report
