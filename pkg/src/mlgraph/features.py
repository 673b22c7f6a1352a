"""Topological feature detection and feature-driven contraction.

The detectors find simple cycles, strongly connected components, star
formations and cliques on a decontractible graph; a detected feature set
induces an equivalence over the nodes (equal non-empty membership
signatures) whose quotient is a valid contraction of the input.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .core import (
    DecGraph,
    GraphBuilder,
    GraphError,
    NodeId,
    Superedge,
)

DEFAULT_CYCLE_LIMIT = 100_000


class FeatureKind(enum.Enum):
    SIMPLE_CYCLE = "simple_cycle"
    SCC = "scc"
    STAR = "star"
    CLIQUE = "clique"


_KIND_ORDER = {k: i for i, k in enumerate(FeatureKind)}

# tag used by the matching contraction scheme, also used in supernode labels
KIND_TAGS = {
    FeatureKind.SIMPLE_CYCLE: "simple_cycles",
    FeatureKind.SCC: "scc",
    FeatureKind.STAR: "star",
    FeatureKind.CLIQUE: "clique",
}


@dataclass(frozen=True)
class Feature:
    """A detected topological pattern over a set of nodes."""

    kind: FeatureKind
    members: frozenset[NodeId]
    center: NodeId | None = None

    def __post_init__(self) -> None:
        if not self.members:
            raise GraphError("feature with no members")
        if self.kind is FeatureKind.STAR:
            if self.center is None or self.center not in self.members:
                raise GraphError("star feature needs a center drawn from its members")
            if len(self.members) < 2:
                raise GraphError("star feature needs a non-empty periphery")
        else:
            if self.center is not None:
                raise GraphError(f"{self.kind.value} feature cannot carry a center")
            if self.kind is not FeatureKind.SCC and len(self.members) < 2:
                raise GraphError(f"{self.kind.value} feature needs at least 2 members")

    @property
    def contraction_members(self) -> frozenset[NodeId]:
        """Nodes this feature aggregates when quotienting.

        A star merges only its periphery; keeping the center apart is the
        point of the pattern. Every other kind merges all members.
        """
        if self.kind is FeatureKind.STAR:
            return self.members - {self.center}
        return self.members

    def sort_key(self) -> tuple:
        return (
            _KIND_ORDER[self.kind],
            tuple(sorted(self.members)),
            -1 if self.center is None else self.center,
        )


@dataclass(frozen=True)
class FeatureSet:
    """Canonically ordered, deduplicated collection of features.

    ``source_fingerprint`` pins the set to the graph it was detected on;
    ``truncated`` records that an enumeration stopped at its resource
    limit before exhausting the search.
    """

    features: tuple[Feature, ...]
    source_fingerprint: str
    truncated: bool = False

    @classmethod
    def from_features(
        cls,
        features: Iterable[Feature],
        graph: DecGraph,
        truncated: bool = False,
    ) -> "FeatureSet":
        unique = {(f.kind, f.members, f.center): f for f in features}
        ordered = tuple(sorted(unique.values(), key=Feature.sort_key))
        return cls(ordered, graph.fingerprint(), truncated)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self) -> Iterator[Feature]:
        return iter(self.features)

    def to_json(self) -> str:
        items = []
        for f in self.features:
            entry: dict[str, Any] = {"kind": f.kind.value, "members": sorted(f.members)}
            if f.center is not None:
                entry["center"] = f.center
            items.append(entry)
        return json.dumps(items, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, graph: DecGraph, truncated: bool = False) -> "FeatureSet":
        feats = []
        for entry in json.loads(text):
            members = frozenset(int(m) for m in entry["members"])
            for m in members:
                if not graph.has_node(m):
                    raise GraphError(f"feature member {m} is not a node of the graph")
            center = entry.get("center")
            feats.append(
                Feature(FeatureKind(entry["kind"]), members, None if center is None else int(center))
            )
        return cls.from_features(feats, graph, truncated=truncated)


# -- strongly connected components ------------------------------------------


def _strongly_connected(
    nodes: Sequence[NodeId], succ: Mapping[NodeId, Sequence[NodeId]]
) -> list[list[NodeId]]:
    """Iterative Tarjan over the given adjacency; linear time."""
    index: dict[NodeId, int] = {}
    low: dict[NodeId, int] = {}
    on_stack: set[NodeId] = set()
    stack: list[NodeId] = []
    components: list[list[NodeId]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work: list[tuple[NodeId, int]] = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            descended = False
            neighbors = succ[v]
            while i < len(neighbors):
                w = neighbors[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    descended = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                components.append(sorted(component))
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
    return components


def detect_sccs(g: DecGraph) -> FeatureSet:
    """Strongly connected components with at least two members.

    Singleton components carry no aggregation signal and are omitted; the
    quotient treats their nodes as uncovered singletons, which gives the
    same result.
    """
    nodes = sorted(g.node_ids())
    succ = {v: g.successors(v) for v in nodes}
    feats = [
        Feature(FeatureKind.SCC, frozenset(c))
        for c in _strongly_connected(nodes, succ)
        if len(c) >= 2
    ]
    return FeatureSet.from_features(feats, g)


# -- simple cycles ------------------------------------------------------------


def _johnson_search(start: NodeId, adj: Mapping[NodeId, Sequence[NodeId]]) -> Iterator[list[NodeId]]:
    # Iterative core of Johnson's elementary-circuit enumeration: walk
    # paths from `start`, blocking visited nodes and unblocking along the
    # B-lists whenever a circuit closes.
    path = [start]
    blocked = {start}
    blist: dict[NodeId, set[NodeId]] = {}
    stack: list[Iterator[NodeId]] = [iter(adj[start])]
    closed = [False]
    while stack:
        descended = False
        for w in stack[-1]:
            if w == start:
                yield path.copy()
                closed[-1] = True
            elif w not in blocked:
                path.append(w)
                closed.append(False)
                blocked.add(w)
                stack.append(iter(adj[w]))
                descended = True
                break
        if descended:
            continue
        stack.pop()
        v = path.pop()
        if closed.pop():
            if closed:
                closed[-1] = True
            unblock = {v}
            while unblock:
                u = unblock.pop()
                if u in blocked:
                    blocked.remove(u)
                    unblock.update(blist.get(u, ()))
                    blist.pop(u, None)
        else:
            for w in adj[v]:
                blist.setdefault(w, set()).add(v)


def _elementary_circuits(g: DecGraph) -> Iterator[list[NodeId]]:
    """Yield every elementary circuit of the top-level graph once."""
    remaining: dict[NodeId, set[NodeId]] = {
        v: set(g.successors(v)) for v in g.node_ids()
    }
    nodes = sorted(remaining)
    components = [c for c in _strongly_connected(nodes, {v: sorted(remaining[v]) for v in nodes}) if len(c) >= 2]
    while components:
        components.sort(key=lambda c: c[0], reverse=True)
        component = components.pop()
        member_set = set(component)
        sub = {v: sorted(w for w in remaining[v] if w in member_set) for v in component}
        root = component[0]
        yield from _johnson_search(root, sub)
        remaining[root] = set()
        for v in component:
            remaining[v].discard(root)
        rest = sorted(member_set - {root})
        sub_rest = {v: sorted(w for w in remaining[v] if w in member_set and w != root) for v in rest}
        components.extend(c for c in _strongly_connected(rest, sub_rest) if len(c) >= 2)


def detect_simple_cycles(g: DecGraph, limit: int = DEFAULT_CYCLE_LIMIT) -> FeatureSet:
    """Node sets of the elementary circuits of the graph.

    Enumeration can be exponential in the worst case, so it stops after
    ``limit`` circuits; hitting the guard is reported through the
    ``truncated`` flag of the result rather than silently.
    """
    if limit <= 0:
        raise ValueError("cycle limit must be positive")
    gen = _elementary_circuits(g)
    feats: list[Feature] = []
    truncated = False
    for count, cycle in enumerate(gen, start=1):
        feats.append(Feature(FeatureKind.SIMPLE_CYCLE, frozenset(cycle)))
        if count >= limit:
            truncated = next(gen, None) is not None
            break
    return FeatureSet.from_features(feats, g, truncated=truncated)


# -- stars ---------------------------------------------------------------------


def detect_stars(g: DecGraph, min_periphery: int = 1) -> FeatureSet:
    """Star formations: a center plus nodes adjacent only to that center.

    Peripheries are read on the undirected adjacency. Candidate centers
    are processed in ascending id and a node already consumed as
    periphery cannot become a center, which settles isolated mutually
    adjacent pairs deterministically.
    """
    if min_periphery < 1:
        raise ValueError("min_periphery must be at least 1")
    ids = sorted(g.node_ids())
    adjacency = {v: g.neighbors(v) for v in ids}
    consumed: set[NodeId] = set()
    feats = []
    for center in ids:
        if center in consumed:
            continue
        periphery = [
            v
            for v in adjacency[center]
            if v not in consumed and adjacency[v] == frozenset((center,))
        ]
        if len(periphery) >= min_periphery:
            feats.append(
                Feature(FeatureKind.STAR, frozenset(periphery) | {center}, center=center)
            )
            consumed.add(center)
            consumed.update(periphery)
    return FeatureSet.from_features(feats, g)


# -- cliques ---------------------------------------------------------------------


def detect_cliques(g: DecGraph, min_size: int = 3) -> FeatureSet:
    """Maximal cliques of size >= min_size on the undirected projection.

    An undirected edge exists wherever at least one direction is present.
    Bron-Kerbosch with pivoting; deterministic branch order.
    """
    if min_size < 3:
        raise ValueError("min_size must be at least 3")
    adjacency: dict[NodeId, set[NodeId]] = {v: set() for v in g.node_ids()}
    for e in g.superedges():
        adjacency[e.source].add(e.target)
        adjacency[e.target].add(e.source)
    found: list[frozenset[NodeId]] = []

    def expand(clique: list[NodeId], candidates: set[NodeId], excluded: set[NodeId]) -> None:
        if not candidates and not excluded:
            if len(clique) >= min_size:
                found.append(frozenset(clique))
            return
        pivot = max(sorted(candidates | excluded), key=lambda u: len(candidates & adjacency[u]))
        for v in sorted(candidates - adjacency[pivot]):
            expand(clique + [v], candidates & adjacency[v], excluded & adjacency[v])
            candidates.remove(v)
            excluded.add(v)

    expand([], set(adjacency), set())
    feats = [Feature(FeatureKind.CLIQUE, c) for c in found]
    return FeatureSet.from_features(feats, g)


# -- quotient ---------------------------------------------------------------------


def quotient_by_features(g: DecGraph, q: FeatureSet, tag: str | None = None) -> DecGraph:
    """Contract ``g`` along the feature-membership equivalence.

    Nodes sharing the same non-empty membership signature collapse into
    one supernode whose payload is the induced subgraph on the class;
    nodes covered by no feature stay as singleton classes. Every ordered
    class pair joined by at least one crossing edge gets one superedge
    bundling exactly those edges. The result is always a contraction of
    the input.
    """
    if q.source_fingerprint != g.fingerprint():
        raise GraphError("feature set was detected on a different graph (fingerprint mismatch)")
    if tag is None:
        kinds = {f.kind for f in q.features}
        tag = KIND_TAGS[next(iter(kinds))] if len(kinds) == 1 else "features"

    signatures: dict[NodeId, frozenset[int]] = {}
    covered: dict[NodeId, set[int]] = {}
    for idx, feat in enumerate(q.features):
        for member in feat.contraction_members:
            if not g.has_node(member):
                raise GraphError(f"feature member {member} is not a node of the graph")
            covered.setdefault(member, set()).add(idx)
    for v in g.node_ids():
        signatures[v] = frozenset(covered.get(v, ()))

    classes: dict[tuple, list[NodeId]] = {}
    for v in g.node_ids():
        sig = signatures[v]
        key: tuple = ("sig", tuple(sorted(sig))) if sig else ("single", v)
        classes.setdefault(key, []).append(v)
    ordered_classes = sorted((sorted(members) for members in classes.values()))

    builder = GraphBuilder(start_id=g.max_id() + 1)
    class_of: dict[NodeId, int] = {}
    class_ids: list[NodeId] = []
    for members in ordered_classes:
        member_set = set(members)
        payload_nodes = [g.node(v) for v in members]
        payload_edges = [
            g.edge(u, w)
            for (u, w) in g.edge_pairs()
            if u in member_set and w in member_set
        ]
        payload = DecGraph(payload_nodes, payload_edges)
        weight = sum(n.weight for n in payload_nodes)
        if signatures[members[0]]:
            smallest = min(n.label for n in payload_nodes)
            label = f"{tag}:{len(members)}:{smallest}"
        else:
            label = g.node(members[0]).label
        cid = builder.add_node(label, weight, payload)
        class_ids.append(cid)
        for v in members:
            class_of[v] = cid

    crossing: dict[tuple[NodeId, NodeId], list[Superedge]] = {}
    for e in g.superedges():
        cu, cv = class_of[e.source], class_of[e.target]
        if cu != cv:
            crossing.setdefault((cu, cv), []).append(e)
    for (cu, cv) in sorted(crossing):
        bundle = crossing[(cu, cv)]
        builder.add_edge(cu, cv, sum(e.weight for e in bundle), tuple(bundle))
    return builder.build()


# -- contraction schemes ---------------------------------------------------------


@dataclass(frozen=True)
class ContractionScheme:
    """Named deterministic contraction function over decontractible graphs.

    ``apply`` composes the matching detector with the feature quotient,
    so its output is always a contraction of its input and schemes
    compose freely.
    """

    tag: str
    params: tuple[tuple[str, Any], ...] = ()

    def detect(self, g: DecGraph) -> FeatureSet:
        params = dict(self.params)
        if self.tag == "simple_cycles":
            return detect_simple_cycles(g, limit=params.get("limit", DEFAULT_CYCLE_LIMIT))
        if self.tag == "scc":
            return detect_sccs(g)
        if self.tag == "star":
            return detect_stars(g, min_periphery=params.get("min_periphery", 1))
        if self.tag == "clique":
            return detect_cliques(g, min_size=params.get("min_size", 3))
        raise ValueError(f"unknown scheme tag {self.tag!r}")

    def apply(self, g: DecGraph) -> DecGraph:
        return quotient_by_features(g, self.detect(g), tag=self.tag)

    def params_dict(self) -> dict[str, Any]:
        return dict(self.params)


SCHEME_TAGS = ("simple_cycles", "scc", "star", "clique")


def make_scheme(tag: str, **params: Any) -> ContractionScheme:
    """Validate tag and parameters, return the ready scheme."""
    if tag not in SCHEME_TAGS:
        raise ValueError(f"unknown scheme tag {tag!r}; expected one of {SCHEME_TAGS}")
    if tag == "simple_cycles":
        limit = params.pop("limit", DEFAULT_CYCLE_LIMIT)
        if not isinstance(limit, int) or limit <= 0:
            raise ValueError("simple_cycles limit must be a positive integer")
        checked: dict[str, Any] = {"limit": limit}
    elif tag == "star":
        min_periphery = params.pop("min_periphery", 1)
        if not isinstance(min_periphery, int) or min_periphery < 1:
            raise ValueError("star min_periphery must be a positive integer")
        checked = {"min_periphery": min_periphery}
    elif tag == "clique":
        min_size = params.pop("min_size", 3)
        if not isinstance(min_size, int) or min_size < 3:
            raise ValueError("clique min_size must be an integer >= 3")
        checked = {"min_size": min_size}
    else:
        checked = {}
    if params:
        raise ValueError(f"unexpected parameters for {tag!r}: {sorted(params)}")
    return ContractionScheme(tag, tuple(sorted(checked.items())))
