"""Identifiable-link determination from decomposition structure (the DAIL engine).

Per placement, every biconnected component gets its agents located; components
with fewer than two agents are dead (no usable measurement path crosses them).
Live components are split into triconnected components whose vantages are
classified, and per-category rules decide each real link.  Direct links
between a component's only two vantages need neighbor context and are handled
by the dedicated direct-link routine.
"""

from __future__ import annotations

from dataclasses import dataclass

from .decompose import (BOND, THREE_CONNECTED, TRIANGLE, BicompInfo, Tricomp,
                        biconnected_components, merge_triangles,
                        triconnected_components, with_agents)
from .graph import (Graph, GraphError, Link, NodeId, Placement, as_placement,
                    connected_components, edge_connectivity_at_least,
                    is_connected, reachable, vertex_connectivity_at_least)

CAT1 = "cat1"
CAT2_1 = "cat2_1"
CAT2_2 = "cat2_2"
CAT2_3 = "cat2_3"
CAT2_4 = "cat2_4"
CAT3 = "cat3"


class IdentifiabilityError(ValueError):
    pass


class CategoryInvariantError(IdentifiabilityError):
    """A component's vantage structure violated the classification invariants."""


@dataclass(frozen=True)
class CutClass:
    """A separating pair with its agent count behind the cut (pair excluded)."""

    pair: tuple[NodeId, NodeId]
    agents_behind: int


@dataclass(frozen=True)
class Vantage:
    node: NodeId
    independent: bool
    partners: tuple[NodeId, ...] = ()

    @property
    def status(self) -> str:
        if self.independent:
            return "independent"
        return "conjugate(" + ",".join(self.partners) + ")"


@dataclass(frozen=True)
class LinkVerdict:
    link: Link
    identifiable: bool
    reason: str


@dataclass
class IdentReport:
    verdicts: tuple[LinkVerdict, ...]

    @property
    def identifiable_indices(self) -> frozenset:
        return frozenset(v.link.index for v in self.verdicts if v.identifiable)

    @property
    def identifiable_count(self) -> int:
        return sum(1 for v in self.verdicts if v.identifiable)

    def by_index(self, index: int) -> LinkVerdict:
        for v in self.verdicts:
            if v.link.index == index:
                return v
        raise KeyError(index)


# -- cuts, vantages, categories ------------------------------------------


def _split_by_pair(b: BicompInfo, pair: frozenset) -> list[set]:
    comps: list[set] = []
    seen: set[NodeId] = set(pair)
    for n in b.graph.nodes:
        if n in seen:
            continue
        comp = reachable(b.graph, [n], banned_nodes=pair)
        seen |= comp
        comps.append(comp)
    return comps


def _agents_behind(b: BicompInfo, pair: frozenset, inside) -> int:
    """Agents of b separated from the ``inside`` anchor nodes by ``pair``."""
    agents = b.agents or ()
    inside = set(inside) - set(pair)
    behind: set[NodeId] = set()
    for comp in _split_by_pair(b, pair):
        if not comp & inside:
            behind |= comp
    return sum(1 for a in agents if a in behind)


def _k_if_cut(b: BicompInfo, pair: frozenset, inside) -> int | None:
    """Agents behind the pair, or None when the pair does not cut the component."""
    if len(_split_by_pair(b, pair)) < 2:
        return None
    return _agents_behind(b, pair, inside)


def classify_cut(b: BicompInfo, t: Tricomp, pair) -> CutClass:
    pair = frozenset(pair)
    if pair not in t.boundary_pairs:
        raise IdentifiabilityError(
            f"{sorted(pair)} is not a boundary pair of the component")
    k = _agents_behind(b, pair, set(t.nodes) - pair)
    ordered = tuple(b.graph.sorted_nodes(pair))
    return CutClass(pair=ordered, agents_behind=k)


def vantages_of(b: BicompInfo, t: Tricomp) -> list[Vantage]:
    """Vantages of a component: member agents plus boundary-pair members with
    at least one agent behind the cut, with their independence statuses."""
    if b.agents is None:
        raise IdentifiabilityError("agents must be located before vantage analysis")
    agents = set(b.agents)
    ks = {pair: _agents_behind(b, pair, set(t.nodes) - pair)
          for pair in t.boundary_pairs}
    nodes: list[NodeId] = [n for n in t.nodes if n in agents]
    for pair, k in ks.items():
        if k >= 1:
            nodes.extend(pair)
    ordered = b.graph.sorted_nodes(set(nodes))
    out: list[Vantage] = []
    for v in ordered:
        if v in agents:
            out.append(Vantage(v, independent=True))
            continue
        vpairs = [p for p in ks if v in p and ks[p] >= 1]
        if any(ks[p] >= 2 for p in vpairs):
            out.append(Vantage(v, independent=True))
            continue
        partners = [next(iter(p - {v})) for p in vpairs]
        if any(p in agents for p in partners):
            out.append(Vantage(v, independent=True))
            continue
        out.append(Vantage(v, independent=False,
                           partners=tuple(b.graph.sorted_nodes(partners))))
    return out


def categorize(t: Tricomp, vs: list[Vantage]) -> str:
    n = len(vs)
    if n < 2:
        raise CategoryInvariantError(
            f"component on {sorted(t.nodes)} has {n} vantage(s); a component of "
            "a two-plus-agent biconnected component must have at least two")
    if n == 2:
        return CAT3
    if n >= 4:
        return CAT1
    independents = [v for v in vs if v.independent]
    conj_pairs = {frozenset((v.node, p)) for v in vs if not v.independent
                  for p in v.partners}
    if len(independents) >= 2:
        return CAT2_1
    if len(independents) == 1:
        others = frozenset(v.node for v in vs if not v.independent)
        if others in conj_pairs:
            return CAT2_2
        raise CategoryInvariantError(
            f"component on {sorted(t.nodes)}: one independent vantage but the "
            "other two are not conjugate")
    if len(conj_pairs) == 3:
        return CAT2_4
    if len(conj_pairs) == 2:
        return CAT2_3
    raise CategoryInvariantError(
        f"component on {sorted(t.nodes)}: no independent vantage and "
        f"{len(conj_pairs)} conjugate pair(s)")


# -- analysis context -------------------------------------------------------


class NeighborContext:
    """Decomposition neighborhood of one biconnected component, plus the
    whole-graph agent landscape the direct-link rule needs."""

    def __init__(self, g: Graph, placement: Placement, bicomp: BicompInfo,
                 seed: int, all_bicomps: list[BicompInfo]):
        self.graph = g
        self.placement = placement
        self.bicomp = bicomp
        self.components = triconnected_components(bicomp, seed)
        self.canonical, sources = merge_triangles(self.components, return_sources=True)
        self._canonical_of: dict[int, Tricomp] = {}
        for canon, src in zip(self.canonical, sources):
            for produced_index in src:
                self._canonical_of[id(self.components[produced_index])] = canon
        self.all_bicomps = all_bicomps
        self._twin_home: dict[int, Tricomp] = {}
        for comp in self.components:
            for l in comp.graph.links:
                if l.virtual:
                    self._twin_home[l.index] = comp
        self._vantages: dict[int, list[Vantage]] = {}
        self._splits: dict[frozenset, list[set]] = {}

    @property
    def agents(self) -> tuple[NodeId, ...]:
        return self.bicomp.agents or ()

    def vantages(self, t: Tricomp) -> list[Vantage]:
        key = id(t)
        if key not in self._vantages:
            self._vantages[key] = vantages_of(self.bicomp, t)
        return self._vantages[key]

    def canonical_of(self, t: Tricomp) -> Tricomp:
        return self._canonical_of.get(id(t), t)

    def split_by_pair(self, pair: frozenset) -> list[set]:
        if pair not in self._splits:
            self._splits[pair] = _split_by_pair(self.bicomp, pair)
        return self._splits[pair]

    def real_link_between(self, u: NodeId, v: NodeId) -> bool:
        return self.bicomp.graph.has_real_link(u, v)

    def virtual_on(self, t: Tricomp, pair: frozenset) -> Link | None:
        for l in t.graph.links:
            if l.virtual and l.pair == pair:
                return l
        return None

    def neighbors_across(self, t: Tricomp, pair: frozenset):
        """Immediate neighbors over a boundary pair: sibling components plus
        one entry per real direct link living in an intervening bond."""
        v = self.virtual_on(t, pair)
        if v is None or v.twin is None:
            return []
        across = self._twin_home.get(v.twin)
        if across is None:
            return []
        if across.kind != BOND:
            return [("comp", across)]
        members: list = []
        for l in across.graph.links:
            if not l.virtual:
                members.append(("direct", l))
            elif l.index != v.twin and l.twin is not None:
                sibling = self._twin_home.get(l.twin)
                if sibling is not None:
                    members.append(("comp", sibling))
        return members

    def components_on_pair(self, pair: frozenset) -> list[Tricomp]:
        """Non-bond components carrying a virtual link on the given pair."""
        out = []
        for comp in self.components:
            if comp.kind == BOND:
                continue
            if any(l.virtual and l.pair == pair for l in comp.graph.links):
                out.append(comp)
        return out

    def region_nodes(self, t: Tricomp, pair: frozenset) -> set:
        """Nodes of the component on the far side of a boundary pair of t."""
        inside = set(t.nodes) - pair
        behind: set[NodeId] = set()
        for comp in self.split_by_pair(pair):
            if not comp & inside:
                behind |= comp
        return behind

    def has_replacement_component(self, t: Tricomp, pair: frozenset,
                                  anchor: NodeId, excluded: NodeId) -> bool:
        """Test for a component beyond ``pair`` that supplies both a
        replacement path and an anchor-to-agent path: it must contain the
        anchor, avoid the excluded node, meet the anchor with two or more
        real links, and carry three or more vantages.

        The search runs over the merged (canonical) components so the answer
        does not depend on how polygons were triangulated.
        """
        region = self.region_nodes(t, pair)
        for q in self.canonical:
            beyond = set(q.nodes) - pair
            if not beyond or not beyond <= region:
                continue
            if anchor not in q.nodes or excluded in q.nodes:
                continue
            if sum(1 for l in q.real_links() if l.touches(anchor)) < 2:
                continue
            if len(vantages_of(self.bicomp, q)) < 3:
                continue
            return True
        return False

    def external_agents(self, node: NodeId, exclude: frozenset) -> int:
        """Agents over the other biconnected components meeting this one at
        ``node`` only, excluding the given pair."""
        seen: set[NodeId] = set()
        for other in self.all_bicomps:
            if other is self.bicomp or node not in other.nodes:
                continue
            seen.update(other.agents or ())
        return len(seen - exclude)


# -- per-category link rules -------------------------------------------------


def _cycle_partner(d: Tricomp, vj: NodeId, vo: NodeId) -> NodeId:
    """The node playing the third-corner role for endpoint vj of side vj--vo
    in a triangle or polygon component: vj's other neighbor around the cycle.

    Evaluating the neighbor clauses against the merged component through this
    node makes them independent of how the polygon was triangulated.
    """
    others = [l.other(vj) for l in d.graph.adjacent(vj) if not l.touches(vo)]
    if len(others) != 1:
        raise IdentifiabilityError(
            f"{vj}-{vo} is not a side of the cycle component on {sorted(d.nodes)}")
    return others[0]


def _alg1_link_identifiable(ctx: NeighborContext, t: Tricomp,
                            v1: NodeId, v2: NodeId) -> bool:
    """Category 2.1 rule for the link (or link slot) v1--v2 of a triangle.

    Clauses are checked per endpoint in the merged component: the link is
    unidentifiable exactly when some endpoint is agent-free, loses the
    cross-link escape, and its only neighboring structure cannot supply both
    a replacement path and a disjoint endpoint-to-agent path.
    """
    d = ctx.canonical_of(t)
    inside = set(d.nodes) - {v1, v2}
    for vj, vo in ((v1, v2), (v2, v1)):
        wj = _cycle_partner(d, vj, vo)
        if ctx.real_link_between(vj, wj):
            continue
        if vj in ctx.agents:
            continue
        k12 = _k_if_cut(ctx.bicomp, frozenset((v1, v2)), inside)
        if k12 is not None and k12 >= 1:
            continue
        side = frozenset((vj, wj))
        if len(ctx.neighbors_across(d, side)) != 1:
            continue
        if ctx.has_replacement_component(d, side, anchor=vj, excluded=vo):
            continue
        return False
    return True


def alg1_triangle_cat21(ctx: NeighborContext, t: Tricomp,
                        vs: list[Vantage] | None = None) -> dict[int, bool]:
    """Per-real-link verdicts for a Category 2.1 triangle."""
    vs = vs if vs is not None else ctx.vantages(t)
    if t.kind != TRIANGLE or categorize(t, vs) != CAT2_1:
        raise IdentifiabilityError("component is not a Category 2.1 triangle")
    return {l.index: _alg1_link_identifiable(ctx, t, l.u, l.v)
            for l in t.real_links()}


def _cat23_roles(vs: list[Vantage]) -> tuple[NodeId, list[NodeId]]:
    """Split Category 2.3 vantages into the shared vantage and the other two."""
    shared = [v.node for v in vs if len(v.partners) == 2]
    if len(shared) != 1:
        raise CategoryInvariantError("Category 2.3 needs exactly one doubly-conjugate vantage")
    rest = [v.node for v in vs if v.node != shared[0]]
    return shared[0], rest


def _alg2_side_ok(ctx: NeighborContext, t: Tricomp, shared: NodeId,
                  other: NodeId) -> bool:
    if ctx.real_link_between(shared, other):
        return True
    members = ctx.neighbors_across(t, frozenset((shared, other)))
    if len(members) >= 2:
        return True
    return any(kind == "comp" and comp.kind == THREE_CONNECTED
               for kind, comp in members)


def alg2_triangle_cat23(ctx: NeighborContext, t: Tricomp,
                        vs: list[Vantage] | None = None) -> dict[int, bool]:
    """Per-real-link verdicts for a Category 2.3 triangle: the two links on
    conjugate pairs are identifiable outright; the remaining link needs a
    replacement route on both conjugate sides."""
    vs = vs if vs is not None else ctx.vantages(t)
    if t.kind != TRIANGLE or categorize(t, vs) != CAT2_3:
        raise IdentifiabilityError("component is not a Category 2.3 triangle")
    shared, (m2, m3) = _cat23_roles(vs)
    base_ok = (_alg2_side_ok(ctx, t, shared, m2)
               and _alg2_side_ok(ctx, t, shared, m3))
    out: dict[int, bool] = {}
    for l in t.real_links():
        if shared in l.ends:
            out[l.index] = True
        else:
            out[l.index] = base_ok
    return out


def algA_triangle_cat2(ctx: NeighborContext, t: Tricomp,
                       vs: list[Vantage] | None = None) -> dict[int, bool]:
    """Dispatch a Category 2 triangle to its sub-category rule."""
    vs = vs if vs is not None else ctx.vantages(t)
    cat = categorize(t, vs)
    if t.kind != TRIANGLE or cat not in (CAT2_1, CAT2_2, CAT2_3, CAT2_4):
        raise IdentifiabilityError("component is not a Category 2 triangle")
    if cat == CAT2_1:
        return alg1_triangle_cat21(ctx, t, vs)
    if cat == CAT2_2:
        ind = next(v.node for v in vs if v.independent)
        return {l.index: not l.touches(ind) for l in t.real_links()}
    if cat == CAT2_3:
        return alg2_triangle_cat23(ctx, t, vs)
    return {l.index: True for l in t.real_links()}


def _slot_identifiable(ctx: NeighborContext, comp: Tricomp, pair: frozenset) -> bool:
    """Verdict a neighboring component gives to a real link spanning one of
    its boundary pairs (the deferred branch of the direct-link rule)."""
    vs = ctx.vantages(comp)
    cat = categorize(comp, vs)
    if cat == CAT3:
        # The component's own rule: links touching either of its two vantages
        # stay unidentifiable; only a fully interior slot is identified here.
        return not any(v.node in pair for v in vs)
    if cat == CAT1:
        return True
    if cat == CAT2_2:
        ind = next(v.node for v in vs if v.independent)
        return ind not in pair
    if comp.kind != TRIANGLE:
        return True
    if cat == CAT2_1:
        u, v = sorted(pair, key=ctx.bicomp.graph.order_of)
        return _alg1_link_identifiable(ctx, comp, u, v)
    # Category 2.3 triangle: links on a conjugate pair are identifiable;
    # the remaining side needs the replacement condition.
    shared, (m2, m3) = _cat23_roles(vs)
    if shared in pair:
        return True
    return (_alg2_side_ok(ctx, comp, shared, m2)
            and _alg2_side_ok(ctx, comp, shared, m3))


def algB_direct_link(ctx: NeighborContext, link: Link) -> tuple[bool, str]:
    """Identifiability of a direct link joining a component's only two vantages.

    If some neighboring component over the pair has more than these two
    vantages, the verdict is taken there; otherwise both endpoints must be
    real monitors or see at least two agents through their own neighboring
    biconnected components.
    """
    pair = link.pair
    mu1, mu2 = ctx.bicomp.graph.sorted_nodes(pair)
    for comp in ctx.components_on_pair(pair):
        if link in comp.graph.links:
            continue
        vset = {v.node for v in ctx.vantages(comp)}
        if vset != set(pair):
            return _slot_identifiable(ctx, comp, pair), "algB-defer"

    def end_ok(mu: NodeId) -> bool:
        if mu in ctx.placement:
            return True
        return ctx.external_agents(mu, exclude=pair) >= 2

    return end_ok(mu1) and end_ok(mu2), "algB-direct"


# -- two-monitor interior conditions ----------------------------------------


def theorem2_conditions(g: Graph, m1: NodeId, m2: NodeId) -> tuple[bool, bool]:
    """The two exact conditions for full interior identifiability with two
    monitors: every interior-link deletion leaves the graph 2-edge-connected,
    and adding the monitor-monitor link makes it 3-vertex-connected."""
    for m in (m1, m2):
        if m not in g:
            raise GraphError(f"monitor {m!r} is not a node of the graph")
    if m1 == m2:
        raise GraphError("two distinct monitors are required")
    if g.has_real_link(m1, m2):
        raise GraphError(f"link {m1}-{m2} exists; the interior conditions do not apply")
    interior_links = [l for l in g.links if not l.touches(m1) and not l.touches(m2)]
    interior_nodes = [n for n in g.nodes if n not in (m1, m2)]
    if not interior_nodes:
        raise GraphError("interior graph is empty")
    interior = Graph(interior_nodes, interior_links)
    if not is_connected(interior):
        raise GraphError("interior graph is disconnected")

    cond1 = True
    for l in interior_links:
        rest = [x for x in g.links if x.index != l.index]
        if not edge_connectivity_at_least(Graph(g.nodes, rest), 2):
            cond1 = False
            break
    augmented = Graph(g.nodes, list(g.links) + [Link(g.max_link_index() + 1, m1, m2)])
    cond2 = vertex_connectivity_at_least(augmented, 3)
    return cond1, cond2


# -- the full pipeline --------------------------------------------------------


def dail(g: Graph, p, seed: int = 0) -> IdentReport:
    """Determine every real link's identifiability under a placement."""
    placement = as_placement(p)
    placement.validate(g)
    verdicts: dict[int, tuple[bool, str]] = {}

    all_bicomps: list[BicompInfo] = []
    per_cc: list[list[BicompInfo]] = []
    for cc in connected_components(g):
        infos, _cuts = biconnected_components(cc)
        located = [with_agents(g, placement, b) for b in infos]
        all_bicomps.extend(located)
        per_cc.append(located)

    for located in per_cc:
        for b in located:
            if len(b.agents or ()) < 2:
                for l in b.graph.real_links():
                    verdicts[l.index] = (False, "dead-component")
                continue
            ctx = NeighborContext(g, placement, b, seed, all_bicomps)
            _analyze_component(ctx, verdicts)

    for l in g.real_links():
        if l.u in placement and l.v in placement:
            verdicts[l.index] = (True, "direct-monitor-link")

    report = tuple(LinkVerdict(link=l, identifiable=verdicts[l.index][0],
                               reason=verdicts[l.index][1])
                   for l in sorted(g.real_links(), key=lambda l: l.index))
    return IdentReport(verdicts=report)


def _analyze_component(ctx: NeighborContext, verdicts: dict) -> None:
    for t in ctx.components:
        if t.kind == BOND:
            for l in t.real_links():
                ok, reason = algB_direct_link(ctx, l)
                verdicts[l.index] = (ok, reason)
            continue
        vs = ctx.vantages(t)
        cat = categorize(t, vs)
        vset = {v.node for v in vs}
        if cat == CAT1:
            for l in t.real_links():
                verdicts[l.index] = (True, "cat1")
        elif cat == CAT3:
            for l in t.real_links():
                if set(l.ends) == vset:
                    ok, reason = algB_direct_link(ctx, l)
                    verdicts[l.index] = (ok, reason)
                elif any(n in vset for n in l.ends):
                    verdicts[l.index] = (False, "cat3-incident")
                else:
                    verdicts[l.index] = (True, "cat3-interior")
        elif t.kind == TRIANGLE:
            reason = {CAT2_1: "cat2_1-alg1", CAT2_2: "cat2_2-exterior",
                      CAT2_3: "cat2_3-alg2", CAT2_4: "cat2_4"}[cat]
            for idx, ok in algA_triangle_cat2(ctx, t, vs).items():
                verdicts[idx] = (ok, reason)
        else:
            # 3-vertex-connected Category 2 components: only the links at the
            # independent vantage of Category 2.2 resist identification.
            if cat == CAT2_2:
                ind = next(v.node for v in vs if v.independent)
                for l in t.real_links():
                    if l.touches(ind):
                        verdicts[l.index] = (False, "cat2_2-exterior")
                    else:
                        verdicts[l.index] = (True, "cat2_2-interior")
            else:
                for l in t.real_links():
                    verdicts[l.index] = (True, f"{cat}-3conn")
