"""Ground-truth identifiability by exact rank analysis of the measurement matrix.

The measurement universe is every simple (cycle-free) path between distinct
monitors; a link is identifiable exactly when its unit vector lies in the row
space of the 0/1 path-incidence matrix.  All rank computations are exact
(fraction-free integer elimination); floating point never decides a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd

from .graph import Graph, Link, NodeId, Placement, as_placement

NODE_CAP = 14
MIN_MONITORS_CAP = 12
PLACEMENT_COMBO_CAP = 10 ** 6


class OracleScaleError(ValueError):
    """Input exceeds the exhaustive oracle's intended scale."""


class PathUniverse:
    """All simple paths between all node pairs of a graph, enumerated once.

    Paths are stored from the lower-ordered endpoint and sorted by their
    node-order index sequence, so downstream row ordering is deterministic.
    """

    def __init__(self, g: Graph, node_cap: int = NODE_CAP):
        if len(g.nodes) > node_cap:
            raise OracleScaleError(
                f"graph has {len(g.nodes)} nodes; the exhaustive oracle is "
                f"capped at {node_cap} (raise node_cap only for oracle-scale use)")
        self.graph = g
        self._by_pair: dict[frozenset, list[tuple[NodeId, ...]]] = {}
        for start in g.nodes:
            self._walk(start)
        for paths in self._by_pair.values():
            paths.sort(key=self._path_key)

    def _walk(self, start: NodeId) -> None:
        g = self.graph
        order = g.order_of
        path = [start]
        on_path = {start}

        def extend(node: NodeId) -> None:
            for link in g.adjacent(node):
                nxt = link.other(node)
                if nxt in on_path:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                if order(nxt) > order(start):
                    key = frozenset((start, nxt))
                    self._by_pair.setdefault(key, []).append(tuple(path))
                extend(nxt)
                on_path.remove(nxt)
                path.pop()

        extend(start)

    def _path_key(self, path):
        return tuple(self.graph.order_of(n) for n in path)

    def paths_between(self, u: NodeId, v: NodeId) -> list[tuple[NodeId, ...]]:
        return self._by_pair.get(frozenset((u, v)), [])


@dataclass
class MeasurementMatrix:
    """Rows: one per simple monitor-to-monitor path (0/1 incidence over real links)."""

    links: tuple[Link, ...]
    rows: tuple[tuple[int, ...], ...]
    paths: tuple[tuple[NodeId, ...], ...]

    @property
    def path_count(self) -> int:
        return len(self.rows)


def build_matrix(g: Graph, p, node_cap: int = NODE_CAP,
                 monitor_interior: bool = True,
                 universe: PathUniverse | None = None) -> MeasurementMatrix:
    """Assemble the deduplicated path-incidence matrix for a placement.

    ``monitor_interior=False`` drops paths that pass through a third monitor,
    for sensitivity checks against the default model.
    """
    p = as_placement(p)
    p.validate(g)
    if universe is None:
        universe = PathUniverse(g, node_cap=node_cap)
    links = tuple(l for l in g.links if not l.virtual)
    col = {l.index: i for i, l in enumerate(links)}
    monitors = set(p)
    pairs = sorted(combinations(p.monitors, 2),
                   key=lambda ab: (g.order_of(ab[0]), g.order_of(ab[1])))
    rows: list[tuple[int, ...]] = []
    paths: list[tuple[NodeId, ...]] = []
    seen_rows: set[tuple[int, ...]] = set()
    for a, b in pairs:
        for path in universe.paths_between(a, b):
            if not monitor_interior and any(n in monitors for n in path[1:-1]):
                continue
            vec = [0] * len(links)
            for x, y in zip(path, path[1:]):
                vec[col[_real_link_between(g, x, y).index]] = 1
            tvec = tuple(vec)
            if tvec in seen_rows:
                continue
            seen_rows.add(tvec)
            rows.append(tvec)
            paths.append(path)
    ordered = sorted(range(len(rows)),
                     key=lambda i: tuple(g.order_of(n) for n in paths[i]))
    return MeasurementMatrix(links=links,
                             rows=tuple(rows[i] for i in ordered),
                             paths=tuple(paths[i] for i in ordered))


def _real_link_between(g: Graph, x: NodeId, y: NodeId) -> Link:
    for l in g.links_between(x, y):
        if not l.virtual:
            return l
    raise ValueError(f"no real link between {x!r} and {y!r}")


# -- exact elimination ----------------------------------------------------


def _normalize(row: list[int]) -> list[int]:
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return row
    if g > 1:
        return [x // g for x in row]
    return row


class _Echelon:
    """Fraction-free row-echelon basis over the integers."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: list[tuple[int, list[int]]] = []  # (pivot column, row)

    def reduce(self, row) -> list[int]:
        row = list(row)
        for pc, prow in self.pivots:
            if row[pc]:
                f, pv = row[pc], prow[pc]
                row = [pv * x - f * y for x, y in zip(row, prow)]
                row = _normalize(row)
        return row

    def add(self, row) -> bool:
        """Reduce and absorb a row; True if it increased the rank."""
        row = self.reduce(row)
        for c, x in enumerate(row):
            if x:
                self.pivots.append((c, row))
                self.pivots.sort(key=lambda t: t[0])
                return True
        return False

    def contains(self, row) -> bool:
        return not any(self.reduce(row))

    @property
    def rank(self) -> int:
        return len(self.pivots)


def matrix_rank(rows, ncols: int) -> int:
    ech = _Echelon(ncols)
    for row in rows:
        ech.add(row)
    return ech.rank


def rank_over_prime_field(rows, ncols: int, prime: int) -> int:
    """Rank of the matrix with entries reduced modulo ``prime``."""
    pivots: list[tuple[int, list[int]]] = []
    for row in rows:
        row = [x % prime for x in row]
        for pc, prow in pivots:
            if row[pc]:
                f = row[pc] * pow(prow[pc], prime - 2, prime) % prime
                row = [(x - f * y) % prime for x, y in zip(row, prow)]
        for c, x in enumerate(row):
            if x:
                pivots.append((c, row))
                break
    return len(pivots)


# -- verdicts --------------------------------------------------------------


@dataclass
class OracleVerdict:
    identifiable: tuple[Link, ...]
    rank: int
    path_count: int

    @property
    def identifiable_indices(self) -> frozenset:
        return frozenset(l.index for l in self.identifiable)


def identifiable_links(g: Graph, p, node_cap: int = NODE_CAP,
                       monitor_interior: bool = True,
                       universe: PathUniverse | None = None) -> OracleVerdict:
    """Exact identifiable set: link l is identifiable iff e_l lies in the row space."""
    m = build_matrix(g, p, node_cap=node_cap, monitor_interior=monitor_interior,
                     universe=universe)
    ech = _Echelon(len(m.links))
    for row in m.rows:
        ech.add(row)
    ident = []
    for i, link in enumerate(m.links):
        unit = [0] * len(m.links)
        unit[i] = 1
        if ech.contains(unit):
            ident.append(link)
    return OracleVerdict(identifiable=tuple(ident), rank=ech.rank,
                         path_count=m.path_count)


def solve_metrics(g: Graph, p, true_metrics: dict[int, Fraction],
                  node_cap: int = NODE_CAP,
                  universe: PathUniverse | None = None) -> dict[int, Fraction | None]:
    """Synthesize measurements from true per-link metrics and recover what is recoverable.

    ``true_metrics`` maps real link index to a positive rational.  Returns,
    per real link index, the uniquely determined exact value or None when the
    link is unidentifiable.  A recovered value disagreeing with the truth
    means the rank logic is broken, so that is checked here.
    """
    m = build_matrix(g, p, node_cap=node_cap, universe=universe)
    weights = []
    for link in m.links:
        w = Fraction(true_metrics[link.index])
        if w <= 0:
            raise ValueError(f"metric for link {link.label()} must be positive")
        weights.append(w)
    # Echelon over Fractions with the synthesized measurement carried along.
    pivots: list[tuple[int, list[Fraction], Fraction]] = []
    for row in m.rows:
        rhs = sum(w for w, x in zip(weights, row) if x)
        vec = [Fraction(x) for x in row]
        for pc, prow, prhs in pivots:
            if vec[pc]:
                f = vec[pc] / prow[pc]
                vec = [x - f * y for x, y in zip(vec, prow)]
                rhs = rhs - f * prhs
        for c, x in enumerate(vec):
            if x:
                pivots.append((c, vec, rhs))
                break
    out: dict[int, Fraction | None] = {}
    for i, link in enumerate(m.links):
        vec = [Fraction(0)] * len(m.links)
        vec[i] = Fraction(1)
        val = Fraction(0)
        for pc, prow, prhs in pivots:
            if vec[pc]:
                f = vec[pc] / prow[pc]
                vec = [x - f * y for x, y in zip(vec, prow)]
                val = val - f * prhs
        if any(vec):
            out[link.index] = None
        else:
            recovered = -val
            if recovered != weights[i]:
                raise AssertionError(
                    f"rank oracle inconsistency on link {link.label()}: "
                    f"recovered {recovered} != true {weights[i]}")
            out[link.index] = recovered
    return out


# -- exhaustive searches ----------------------------------------------------


@dataclass
class MinMonitorsResult:
    feasible: bool
    count: int | None
    witnesses: tuple[tuple[NodeId, ...], ...]


def _rank_for(g: Graph, monitors, universe: PathUniverse) -> int:
    m = build_matrix(g, Placement.of(monitors), universe=universe)
    return matrix_rank(m.rows, len(m.links))


def min_monitors_exhaustive(g: Graph, universe: PathUniverse | None = None) -> MinMonitorsResult:
    """Smallest monitor count achieving full identifiability, with all witnesses."""
    if len(g.nodes) > MIN_MONITORS_CAP:
        raise OracleScaleError(
            f"min-monitor search is capped at {MIN_MONITORS_CAP} nodes")
    if universe is None:
        universe = PathUniverse(g)
    total = len(g.real_links())
    if total == 0:
        return MinMonitorsResult(True, 0, ((),))
    for kappa in range(2, len(g.nodes) + 1):
        witnesses = [subset for subset in combinations(g.nodes, kappa)
                     if _rank_for(g, subset, universe) == total]
        if witnesses:
            return MinMonitorsResult(True, kappa, tuple(witnesses))
    return MinMonitorsResult(False, None, ())


def optimal_placement_exhaustive(g: Graph, kappa: int, pool,
                                 universe: PathUniverse | None = None
                                 ) -> tuple[int, tuple[tuple[NodeId, ...], ...]]:
    """Exhaustive max of the identifiable-link count over kappa-subsets of pool."""
    pool = list(pool)
    if math.comb(len(pool), kappa) > PLACEMENT_COMBO_CAP:
        raise OracleScaleError("placement search space exceeds the combinatorial cap")
    if universe is None:
        universe = PathUniverse(g)
    best = -1
    arg: list[tuple[NodeId, ...]] = []
    for subset in combinations(pool, kappa):
        n = len(identifiable_links(g, Placement.of(subset), universe=universe).identifiable)
        if n > best:
            best, arg = n, [subset]
        elif n == best:
            arg.append(subset)
    return best, tuple(arg)
