"""Undirected multigraph primitives and the connectivity predicates.

Node identifiers are opaque strings ordered by first appearance; that order
is the deterministic tie-break used everywhere downstream.  Link indices are
stable identities: subgraph extraction keeps the original ``Link`` objects,
so a link found in a decomposition component is the same link of the parent
graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

NodeId = str


class GraphError(ValueError):
    """Malformed graph, edge-list document, or operation argument."""


@dataclass(frozen=True)
class Link:
    """One link; ``index`` is its stable identity across subgraphs.

    ``twin`` is set only on virtual links created by triconnected
    decomposition and names the mirrored virtual link in the sibling
    component that shares the separation pair.
    """

    index: int
    u: NodeId
    v: NodeId
    virtual: bool = False
    twin: int | None = None

    @property
    def ends(self) -> tuple[NodeId, NodeId]:
        return (self.u, self.v)

    @property
    def pair(self) -> frozenset:
        return frozenset((self.u, self.v))

    def touches(self, node: NodeId) -> bool:
        return node == self.u or node == self.v

    def other(self, node: NodeId) -> NodeId:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise GraphError(f"node {node!r} is not an endpoint of link {self.index}")

    def label(self) -> str:
        return f"{self.u}-{self.v}"


class Graph:
    """Immutable undirected multigraph.

    Parallel links are permitted only when at least one of the parallel
    links is virtual; self-loops are rejected.
    """

    def __init__(self, nodes: Iterable[NodeId], links: Iterable[Link] = ()):
        self.nodes: tuple[NodeId, ...] = tuple(nodes)
        self.links: tuple[Link, ...] = tuple(links)
        self._order = {n: i for i, n in enumerate(self.nodes)}
        if len(self._order) != len(self.nodes):
            raise GraphError("duplicate node identifiers")
        self._adj: dict[NodeId, list[Link]] = {n: [] for n in self.nodes}
        seen_real = set()
        for link in self.links:
            if link.u == link.v:
                raise GraphError(f"self-loop at {link.u!r}")
            if link.u not in self._order or link.v not in self._order:
                raise GraphError(f"link {link.label()} has an endpoint outside the node set")
            if not link.virtual:
                if link.pair in seen_real:
                    raise GraphError(f"parallel real links between {link.u!r} and {link.v!r}")
                seen_real.add(link.pair)
            self._adj[link.u].append(link)
            self._adj[link.v].append(link)

    # -- accessors -----------------------------------------------------

    def __contains__(self, node: NodeId) -> bool:
        return node in self._order

    def order_of(self, node: NodeId) -> int:
        return self._order[node]

    def sorted_nodes(self, nodes: Iterable[NodeId]) -> list[NodeId]:
        return sorted(nodes, key=self._order.__getitem__)

    def adjacent(self, node: NodeId) -> Sequence[Link]:
        return self._adj[node]

    def neighbors(self, node: NodeId) -> list[NodeId]:
        seen: list[NodeId] = []
        for link in self._adj[node]:
            o = link.other(node)
            if o not in seen:
                seen.append(o)
        return seen

    def degree(self, node: NodeId) -> int:
        return len(self._adj[node])

    def real_links(self) -> list[Link]:
        return [l for l in self.links if not l.virtual]

    def virtual_links(self) -> list[Link]:
        return [l for l in self.links if l.virtual]

    def has_real_link(self, u: NodeId, v: NodeId) -> bool:
        return any(not l.virtual and l.touches(v) for l in self._adj.get(u, ()))

    def links_between(self, u: NodeId, v: NodeId) -> list[Link]:
        return [l for l in self._adj.get(u, ()) if l.touches(v)]

    def max_link_index(self) -> int:
        return max((l.index for l in self.links), default=-1)

    def subgraph_from_links(self, links: Iterable[Link],
                            extra_nodes: Iterable[NodeId] = ()) -> "Graph":
        links = list(links)
        present = set(extra_nodes)
        for l in links:
            present.add(l.u)
            present.add(l.v)
        return Graph(self.sorted_nodes(present), links)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Graph(|V|={len(self.nodes)}, |L|={len(self.links)})"


@dataclass(frozen=True)
class Placement:
    """An ordered set of monitor nodes (insertion order, duplicates dropped)."""

    monitors: tuple[NodeId, ...]

    @classmethod
    def of(cls, nodes: Iterable[NodeId]) -> "Placement":
        out: list[NodeId] = []
        for n in nodes:
            if n not in out:
                out.append(n)
        return cls(tuple(out))

    def __iter__(self):
        return iter(self.monitors)

    def __len__(self) -> int:
        return len(self.monitors)

    def __contains__(self, node: NodeId) -> bool:
        return node in self.monitors

    def validate(self, g: Graph) -> None:
        for m in self.monitors:
            if m not in g:
                raise GraphError(f"monitor {m!r} is not a node of the graph")


def as_placement(p) -> Placement:
    if isinstance(p, Placement):
        return p
    return Placement.of(p)


# -- parsing and serialization ------------------------------------------


def parse_graph(text: str) -> Graph:
    """Parse an edge-list document: one "u v" pair per line, '#' comments.

    Returns a simple graph (all links real) with nodes in first-appearance
    order.  Duplicate links and self-loops are rejected with the offending
    line number.
    """
    nodes: list[NodeId] = []
    seen: set[NodeId] = set()
    pairs: set[frozenset] = set()
    raw_links: list[tuple[NodeId, NodeId]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two node tokens, got {raw.strip()!r}")
        u, v = parts
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at {u!r}")
        key = frozenset((u, v))
        if key in pairs:
            raise GraphError(f"line {lineno}: duplicate link {u} {v}")
        pairs.add(key)
        for tok in (u, v):
            if tok not in seen:
                seen.add(tok)
                nodes.append(tok)
        raw_links.append((u, v))
    return Graph(nodes, [Link(i, u, v) for i, (u, v) in enumerate(raw_links)])


def serialize_graph(g: Graph) -> str:
    """Emit the edge-list document, links in index order."""
    return "".join(f"{l.u} {l.v}\n" for l in sorted(g.links, key=lambda l: l.index))


# -- reachability and connectivity --------------------------------------


def reachable(g: Graph, start: Iterable[NodeId], banned_nodes: Iterable[NodeId] = (),
              banned_links: Iterable[int] = ()) -> set:
    """Nodes reachable from ``start`` avoiding banned nodes and link indices."""
    banned_n = set(banned_nodes)
    banned_l = set(banned_links)
    todo = [n for n in start if n not in banned_n]
    seen = set(todo)
    while todo:
        cur = todo.pop()
        for link in g.adjacent(cur):
            if link.index in banned_l:
                continue
            nxt = link.other(cur)
            if nxt in banned_n or nxt in seen:
                continue
            seen.add(nxt)
            todo.append(nxt)
    return seen


def is_connected(g: Graph) -> bool:
    if not g.nodes:
        return False
    return len(reachable(g, g.nodes[:1])) == len(g.nodes)


def connected_components(g: Graph) -> list[Graph]:
    """Split into connected components, preserving node order and link identity."""
    remaining = list(g.nodes)
    out: list[Graph] = []
    seen: set[NodeId] = set()
    for node in remaining:
        if node in seen:
            continue
        comp_nodes = reachable(g, [node])
        seen |= comp_nodes
        comp_links = [l for l in g.links if l.u in comp_nodes]
        out.append(Graph(g.sorted_nodes(comp_nodes), comp_links))
    return out


def vertex_connectivity_at_least(g: Graph, k: int) -> bool:
    """True iff no vertex set of size < k disconnects g and |nodes| > k.

    Exhaustive small-cut enumeration; desk-scale inputs only.  Virtual links
    count as connectivity-bearing.
    """
    n = len(g.nodes)
    if n == 0 or n <= k:
        return False
    for size in range(0, k):
        for cut in combinations(g.nodes, size):
            rest = [x for x in g.nodes if x not in cut]
            reach = reachable(g, rest[:1], banned_nodes=cut)
            if len(reach) != len(rest):
                return False
    return True


def edge_connectivity_at_least(g: Graph, k: int) -> bool:
    """True iff no link set of size < k disconnects g."""
    if not g.nodes:
        return False
    for size in range(0, k):
        for cut in combinations(g.links, size):
            banned = {l.index for l in cut}
            reach = reachable(g, g.nodes[:1], banned_links=banned)
            if len(reach) != len(g.nodes):
                return False
    return True


# -- extended graph ------------------------------------------------------


def _fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name = "_" + name
    return name


def extended_graph(g: Graph, p) -> Graph:
    """Augment g with two mutually linked virtual nodes joined to all monitors."""
    p = as_placement(p)
    p.validate(g)
    if len(p) < 1:
        raise GraphError("extended graph needs at least one monitor")
    taken = set(g.nodes)
    x1 = _fresh_name("ext1", taken)
    taken.add(x1)
    x2 = _fresh_name("ext2", taken)
    nodes = list(g.nodes) + [x1, x2]
    links = list(g.links)
    nxt = g.max_link_index() + 1
    for m in p:
        links.append(Link(nxt, x1, m, virtual=True))
        nxt += 1
    for m in p:
        links.append(Link(nxt, x2, m, virtual=True))
        nxt += 1
    links.append(Link(nxt, x1, x2, virtual=True))
    return Graph(nodes, links)
