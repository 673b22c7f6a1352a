"""Decontractible directed graphs and their expansion algebra.

A decontractible graph is a directed graph whose nodes ("supernodes") and
edges ("superedges") each carry a payload describing the structure one
level further down: a supernode decontracts to a whole graph, a superedge
to the set of lower-level edges it bundles. Empty payloads mark base-level
elements.

Graphs are immutable after construction; all mutation happens inside
:class:`GraphBuilder` instances owned by a single thread, so built graphs
can be shared freely across threads. Node ids are plain integers assigned
so that they stay unique across every level produced by this package:
traceability flows through payloads only, ids are never reused.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping

NodeId = int


class GraphError(ValueError):
    """Structural problem with a graph or with an operation on one."""


@dataclass(frozen=True)
class Superedge:
    """Directed edge between supernodes.

    ``dec`` holds the lower-level edges this edge bundles, as full edge
    records; their (source, target) pairs must live in the payload graphs
    of the edge's endpoints. An empty ``dec`` marks a base-level edge.
    """

    source: NodeId
    target: NodeId
    weight: int = 1
    dec: tuple["Superedge", ...] = ()

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise GraphError(f"self-loop at node {self.source}")
        if self.weight < 0:
            raise GraphError(f"negative weight on edge ({self.source}, {self.target})")
        ordered = tuple(sorted(self.dec, key=lambda e: (e.source, e.target)))
        object.__setattr__(self, "dec", ordered)
        pairs = [(e.source, e.target) for e in ordered]
        if len(set(pairs)) != len(pairs):
            raise GraphError(f"duplicate lower edges in payload of ({self.source}, {self.target})")

    @property
    def pair(self) -> tuple[NodeId, NodeId]:
        return (self.source, self.target)

    @property
    def dec_pairs(self) -> tuple[tuple[NodeId, NodeId], ...]:
        """The payload viewed as plain (source, target) id pairs."""
        return tuple(e.pair for e in self.dec)

    def raw_key(self) -> tuple:
        return (self.source, self.target, self.weight, tuple(e.raw_key() for e in self.dec))


@dataclass(frozen=True)
class Supernode:
    """Node of a decontractible graph.

    ``weight`` counts the base-level occurrences the node represents; for
    a contracted node it equals the sum of the weights in its payload.
    """

    id: NodeId
    label: str
    weight: int = 1
    dec: "DecGraph" = field(default_factory=lambda: EMPTY_GRAPH)

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise GraphError(f"negative weight on node {self.id}")

    def is_base(self) -> bool:
        return self.dec.node_count == 0

    def raw_key(self) -> tuple:
        return (self.id, self.label, self.weight, self.dec.raw_key())


class DecGraph:
    """Immutable decontractible graph.

    At most one edge may exist per ordered (source, target) pair and
    self-loops are rejected at every level; parallel base transitions
    accumulate into edge weights instead.
    """

    __slots__ = ("_nodes", "_edges", "_succ", "_pred", "_rawkey", "_hash")

    def __init__(
        self,
        nodes: Iterable[Supernode] = (),
        edges: Iterable[Superedge] = (),
        strict: bool = True,
    ) -> None:
        node_map: dict[NodeId, Supernode] = {}
        for n in nodes:
            if n.id in node_map:
                raise GraphError(f"duplicate node id {n.id}")
            node_map[n.id] = n
        edge_map: dict[tuple[NodeId, NodeId], Superedge] = {}
        succ: dict[NodeId, list[NodeId]] = {i: [] for i in node_map}
        pred: dict[NodeId, list[NodeId]] = {i: [] for i in node_map}
        for e in edges:
            if e.pair in edge_map:
                raise GraphError(f"duplicate edge {e.pair}")
            if e.source not in node_map or e.target not in node_map:
                raise GraphError(f"edge {e.pair} references a missing node")
            if strict and e.dec:
                src_ids = node_map[e.source].dec._nodes
                tgt_ids = node_map[e.target].dec._nodes
                for sub in e.dec:
                    if sub.source not in src_ids or sub.target not in tgt_ids:
                        raise GraphError(
                            f"payload pair {sub.pair} of edge {e.pair} is not drawn "
                            "from the endpoint payload graphs"
                        )
            edge_map[e.pair] = e
            succ[e.source].append(e.target)
            pred[e.target].append(e.source)
        self._nodes = node_map
        self._edges = edge_map
        self._succ = {i: tuple(sorted(v)) for i, v in succ.items()}
        self._pred = {i: tuple(sorted(v)) for i, v in pred.items()}
        self._rawkey: tuple | None = None
        self._hash: int | None = None

    # -- accessors ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node_ids(self) -> list[NodeId]:
        return list(self._nodes)

    def supernodes(self) -> list[Supernode]:
        return list(self._nodes.values())

    def superedges(self) -> list[Superedge]:
        return list(self._edges.values())

    def edge_pairs(self) -> list[tuple[NodeId, NodeId]]:
        return list(self._edges)

    def has_node(self, node_id: NodeId) -> bool:
        return node_id in self._nodes

    def has_edge(self, source: NodeId, target: NodeId) -> bool:
        return (source, target) in self._edges

    def node(self, node_id: NodeId) -> Supernode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def edge(self, source: NodeId, target: NodeId) -> Superedge:
        try:
            return self._edges[(source, target)]
        except KeyError:
            raise GraphError(f"unknown edge ({source}, {target})") from None

    def successors(self, node_id: NodeId) -> tuple[NodeId, ...]:
        return self._succ[node_id]

    def predecessors(self, node_id: NodeId) -> tuple[NodeId, ...]:
        return self._pred[node_id]

    def neighbors(self, node_id: NodeId) -> frozenset[NodeId]:
        """In- and out-neighbors combined, direction ignored."""
        return frozenset(self._succ[node_id]) | frozenset(self._pred[node_id])

    def is_base_level(self) -> bool:
        return all(n.is_base() for n in self._nodes.values()) and all(
            not e.dec for e in self._edges.values()
        )

    def total_node_weight(self) -> int:
        return sum(n.weight for n in self._nodes.values())

    def total_edge_weight(self) -> int:
        """Top-level edge weights plus all weights inside node payloads."""
        own = sum(e.weight for e in self._edges.values())
        return own + sum(n.dec.total_edge_weight() for n in self._nodes.values())

    def max_id(self) -> NodeId:
        """Largest node id used at any depth; -1 for the empty graph."""
        best = -1
        for n in self._nodes.values():
            best = max(best, n.id, n.dec.max_id())
        return best

    # -- identity ----------------------------------------------------------

    def raw_key(self) -> tuple:
        if self._rawkey is None:
            nodes_part = tuple(sorted(n.raw_key() for n in self._nodes.values()))
            edges_part = tuple(sorted(e.raw_key() for e in self._edges.values()))
            self._rawkey = (nodes_part, edges_part)
        return self._rawkey

    def canonical_key(self) -> tuple:
        """Top-level-id-insensitive structural key.

        Nodes are matched by (label, weight, payload); useful for
        isomorphism-style comparisons where id assignment may differ.
        Payload content is compared as-is.
        """
        content = {n.id: (n.label, n.weight, n.dec.raw_key()) for n in self._nodes.values()}
        order = sorted(self._nodes, key=lambda i: (content[i], i))
        index = {nid: pos for pos, nid in enumerate(order)}
        nodes_part = tuple(content[nid] for nid in order)
        edges_part = tuple(
            sorted(
                (index[e.source], index[e.target], e.weight, tuple(x.raw_key() for x in e.dec))
                for e in self._edges.values()
            )
        )
        return (nodes_part, edges_part)

    def fingerprint(self) -> str:
        """Stable content hash, used to pin feature sets to their graph."""
        return hashlib.sha256(repr(self.raw_key()).encode("utf-8")).hexdigest()

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, DecGraph):
            return NotImplemented
        return self.raw_key() == other.raw_key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.raw_key())
        return self._hash

    def __repr__(self) -> str:
        return f"DecGraph(nodes={self.node_count}, edges={self.edge_count})"

    # -- serialization -----------------------------------------------------

    @staticmethod
    def _node_dict(n: Supernode) -> dict:
        return {
            "id": n.id,
            "label": n.label,
            "weight": n.weight,
            "dec": n.dec.to_dict() if n.dec.node_count else None,
        }

    @staticmethod
    def _edge_dict(e: Superedge) -> dict:
        return {
            "source": e.source,
            "target": e.target,
            "weight": e.weight,
            "dec": [DecGraph._edge_dict(x) for x in e.dec] if e.dec else None,
        }

    def to_dict(self) -> dict:
        return {
            "nodes": [self._node_dict(self._nodes[i]) for i in sorted(self._nodes)],
            "edges": [self._edge_dict(self._edges[p]) for p in sorted(self._edges)],
        }

    @staticmethod
    def _edge_from_dict(data: Mapping[str, Any]) -> Superedge:
        dec = data.get("dec")
        sub = tuple(DecGraph._edge_from_dict(d) for d in dec) if dec else ()
        return Superedge(int(data["source"]), int(data["target"]), int(data["weight"]), sub)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], strict: bool = True) -> "DecGraph":
        nodes = []
        for nd in data.get("nodes", ()):
            dec = nd.get("dec")
            payload = cls.from_dict(dec, strict=strict) if dec else EMPTY_GRAPH
            nodes.append(Supernode(int(nd["id"]), str(nd["label"]), int(nd["weight"]), payload))
        edges = [cls._edge_from_dict(ed) for ed in data.get("edges", ())]
        return cls(nodes, edges, strict=strict)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, strict: bool = True) -> "DecGraph":
        return cls.from_dict(json.loads(text), strict=strict)

    # -- DOT ----------------------------------------------------------------

    def to_dot(self, name: str = "declevel") -> str:
        """Render as GraphViz DOT.

        Payloads ride along as a ``dec`` attribute (JSON, so the format
        round-trips) and as human-readable tooltips.
        """
        lines = [f"digraph {name} {{"]
        for nid in sorted(self._nodes):
            n = self._nodes[nid]
            dec_json = json.dumps(self._node_dict(n)["dec"], sort_keys=True, separators=(",", ":"))
            tip = ", ".join(sorted(c.label for c in n.dec.supernodes())) or n.label
            lines.append(
                f"  n{n.id} [label={json.dumps(n.label)}, weight={n.weight}, "
                f"dec={json.dumps(dec_json)}, tooltip={json.dumps(tip)}];"
            )
        for pair in sorted(self._edges):
            e = self._edges[pair]
            dec_json = json.dumps(self._edge_dict(e)["dec"], sort_keys=True, separators=(",", ":"))
            tip = ", ".join(f"{a}->{b}" for a, b in e.dec_pairs) or "base"
            lines.append(
                f"  n{e.source} -> n{e.target} [weight={e.weight}, "
                f"dec={json.dumps(dec_json)}, tooltip={json.dumps(tip)}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dot(cls, text: str, strict: bool = True) -> "DecGraph":
        """Parse DOT produced by :meth:`to_dot` (only that subset)."""
        nodes: list[Supernode] = []
        edges: list[Superedge] = []
        for line in text.splitlines():
            em = _DOT_EDGE.match(line)
            if em:
                attrs = _parse_dot_attrs(em.group(3))
                dec = json.loads(attrs["dec"])
                sub = tuple(cls._edge_from_dict(d) for d in dec) if dec else ()
                edges.append(
                    Superedge(int(em.group(1)), int(em.group(2)), int(attrs["weight"]), sub)
                )
                continue
            nm = _DOT_NODE.match(line)
            if nm:
                attrs = _parse_dot_attrs(nm.group(2))
                dec = json.loads(attrs["dec"])
                payload = cls.from_dict(dec, strict=strict) if dec else EMPTY_GRAPH
                nodes.append(
                    Supernode(int(nm.group(1)), attrs["label"], int(attrs["weight"]), payload)
                )
        return cls(nodes, edges, strict=strict)


EMPTY_GRAPH = DecGraph()

_DOT_NODE = re.compile(r"^\s*n(\d+)\s*\[(.*)\];\s*$")
_DOT_EDGE = re.compile(r"^\s*n(\d+)\s*->\s*n(\d+)\s*\[(.*)\];\s*$")
_DOT_ATTR = re.compile(r'(\w+)=("(?:[^"\\]|\\.)*"|\d+)')


def _parse_dot_attrs(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in _DOT_ATTR.findall(text):
        out[key] = json.loads(value) if value.startswith('"') else int(value)
    return out


class GraphBuilder:
    """Accumulates nodes and edges, then freezes them into a DecGraph.

    Ids are handed out sequentially from ``start_id``, making id
    assignment a pure function of insertion order.
    """

    def __init__(self, start_id: NodeId = 0, strict: bool = True) -> None:
        self._next = start_id
        self._nodes: list[Supernode] = []
        self._edges: list[Superedge] = []
        self._strict = strict

    def add_node(self, label: str, weight: int = 1, dec: DecGraph | None = None) -> NodeId:
        nid = self._next
        self._next += 1
        self._nodes.append(Supernode(nid, label, weight, dec if dec is not None else EMPTY_GRAPH))
        return nid

    def add_edge(
        self,
        source: NodeId,
        target: NodeId,
        weight: int = 1,
        dec: Iterable[Superedge] = (),
    ) -> None:
        self._edges.append(Superedge(source, target, weight, tuple(dec)))

    def build(self) -> DecGraph:
        return DecGraph(self._nodes, self._edges, strict=self._strict)


class PlainGraph:
    """Ordinary directed weighted graph with string-labelled nodes.

    This is the shape the text pipeline produces; lift it into a
    decontractible graph with :func:`natural_transform`. Repeated
    ``add_node``/``add_edge`` calls accumulate weight.
    """

    __slots__ = ("_nodes", "_edges")

    def __init__(self) -> None:
        self._nodes: dict[str, int] = {}
        self._edges: dict[tuple[str, str], int] = {}

    def add_node(self, label: str, weight: int = 1) -> None:
        if weight < 0:
            raise GraphError(f"negative weight for node {label!r}")
        self._nodes[label] = self._nodes.get(label, 0) + weight

    def add_edge(self, source: str, target: str, weight: int = 1) -> None:
        if source not in self._nodes or target not in self._nodes:
            raise GraphError(f"edge ({source!r}, {target!r}) references a missing node")
        if weight < 0:
            raise GraphError(f"negative weight for edge ({source!r}, {target!r})")
        key = (source, target)
        self._edges[key] = self._edges.get(key, 0) + weight

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node_labels(self) -> list[str]:
        return list(self._nodes)

    def node_weight(self, label: str) -> int:
        return self._nodes[label]

    def edge_items(self) -> list[tuple[tuple[str, str], int]]:
        return list(self._edges.items())

    def total_node_weight(self) -> int:
        return sum(self._nodes.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PlainGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def to_dict(self) -> dict:
        return {
            "nodes": [[label, w] for label, w in self._nodes.items()],
            "edges": [[u, v, w] for (u, v), w in self._edges.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PlainGraph":
        g = cls()
        for label, w in data.get("nodes", ()):
            g.add_node(str(label), int(w))
        for u, v, w in data.get("edges", ()):
            g.add_edge(str(u), str(v), int(w))
        return g


def natural_transform(plain: PlainGraph) -> DecGraph:
    """Lift a plain graph to an isomorphic base-level decontractible graph.

    Every node and edge payload of the result is empty; labels and
    weights carry over unchanged. Inputs containing self-loops are
    rejected as malformed base graphs.
    """
    for (u, v), _ in plain.edge_items():
        if u == v:
            raise GraphError(f"self-loop on {u!r} in base graph")
    builder = GraphBuilder()
    ids = {label: builder.add_node(label, plain.node_weight(label)) for label in plain.node_labels()}
    for (u, v), w in plain.edge_items():
        builder.add_edge(ids[u], ids[v], w)
    return builder.build()


def is_contraction_of(candidate: DecGraph, base: DecGraph) -> bool:
    """Exact check that ``candidate`` is a contraction of ``base``.

    Two conditions, both verified literally: (i) the node payloads of
    ``candidate`` partition the node set of ``base``; (ii) the non-empty
    node-payload edge sets together with the superedge payloads partition
    the edge set of ``base``. Structural mismatch returns False, it never
    raises.
    """
    seen_nodes: set[NodeId] = set()
    for sn in candidate.supernodes():
        if sn.dec.node_count == 0:
            return False  # empty blocks cannot belong to a partition
        for inner in sn.dec.supernodes():
            if inner.id in seen_nodes:
                return False
            if not base.has_node(inner.id) or base.node(inner.id) != inner:
                return False
            seen_nodes.add(inner.id)
    if seen_nodes != set(base.node_ids()):
        return False

    seen_edges: set[tuple[NodeId, NodeId]] = set()
    for sn in candidate.supernodes():
        for inner in sn.dec.superedges():
            if inner.pair in seen_edges:
                return False
            if not base.has_edge(*inner.pair) or base.edge(*inner.pair) != inner:
                return False
            seen_edges.add(inner.pair)
    for se in candidate.superedges():
        if not se.dec:
            return False
        for inner in se.dec:
            if inner.pair in seen_edges:
                return False
            if not base.has_edge(*inner.pair) or base.edge(*inner.pair) != inner:
                return False
            seen_edges.add(inner.pair)
    return seen_edges == set(base.edge_pairs())


def reconstruct(contracted: DecGraph) -> DecGraph:
    """Rebuild the graph a contraction was derived from.

    Takes the union of all node payloads, all payload-internal edges and
    all superedge payloads. Requires every payload to be non-empty, i.e.
    the input must actually be a contraction of something.
    """
    nodes: list[Supernode] = []
    edges: list[Superedge] = []
    for sn in contracted.supernodes():
        if sn.dec.node_count == 0:
            raise GraphError(f"node {sn.id} has an empty decontraction; not a contraction")
        nodes.extend(sn.dec.supernodes())
        edges.extend(sn.dec.superedges())
    for se in contracted.superedges():
        if not se.dec:
            raise GraphError(f"edge {se.pair} has an empty decontraction; not a contraction")
        edges.extend(se.dec)
    try:
        return DecGraph(nodes, edges)
    except GraphError as exc:
        raise GraphError(f"input is not a contraction: {exc}") from exc


def complete_decontraction(g: DecGraph) -> DecGraph:
    """Decontract every supernode and superedge one level.

    Base-level graphs come back unchanged (the very same object); on a
    graph whose payloads are all non-empty this equals :func:`reconstruct`.
    Base-level nodes in mixed graphs pass through untouched, and an edge
    with an empty payload survives only while both its endpoints do.
    """
    if g.is_base_level():
        return g
    expanded = {n.id for n in g.supernodes() if not n.is_base()}
    nodes: list[Supernode] = []
    edges: list[Superedge] = []
    for n in g.supernodes():
        if n.id in expanded:
            nodes.extend(n.dec.supernodes())
            edges.extend(n.dec.superedges())
        else:
            nodes.append(n)
    for e in g.superedges():
        if e.dec:
            edges.extend(e.dec)
        elif e.source not in expanded and e.target not in expanded:
            edges.append(e)
    return DecGraph(nodes, edges, strict=False)


def decontract_node(g: DecGraph, node_id: NodeId) -> DecGraph:
    """Expand a single supernode in place, leaving the rest contracted.

    The focused node is replaced by its payload graph; incident edges are
    re-anchored through their payload pairings at the granularity of the
    nodes entering the view (pairings nested deeper than one level are
    resolved to the payload node that owns them). An incident edge whose
    payload carries no pairing down to the expanded side is dropped from
    the view: it represents no traceable transitions. Expanding a
    base-level node returns the graph unchanged.

    Views chain: expanding every node of a one-step contraction, in any
    order, reproduces its complete decontraction. The result is a local
    inspection view, so re-anchored edges may pair a top-level endpoint
    directly and strict payload-pair validation is skipped.
    """
    if not g.has_node(node_id):
        raise GraphError(f"unknown node id {node_id}")
    focus = g.node(node_id)
    if focus.is_base():
        return g

    # every id at any depth below the focus maps to the payload node that
    # now represents it at the top level
    owners: dict[NodeId, NodeId] = {}

    def claim(owner: NodeId, node: Supernode) -> None:
        owners[node.id] = owner
        for child in node.dec.supernodes():
            claim(owner, child)

    for child in focus.dec.supernodes():
        claim(child.id, child)

    nodes = [n for n in g.supernodes() if n.id != node_id]
    nodes.extend(focus.dec.supernodes())
    edges = [e for e in g.superedges() if node_id not in e.pair]
    edges.extend(focus.dec.superedges())

    for e in g.superedges():
        if node_id not in e.pair or not e.dec:
            continue
        expanded_is_source = e.source == node_id

        resolved: list[Superedge] = []
        work = list(e.dec)
        while work:
            sub = work.pop()
            key = sub.source if expanded_is_source else sub.target
            if key in owners:
                resolved.append(sub)
            elif sub.dec:
                work.extend(sub.dec)  # pairing anchored above; look deeper

        groups: dict[NodeId, list[Superedge]] = {}
        for sub in sorted(resolved, key=lambda s: s.pair):
            key = sub.source if expanded_is_source else sub.target
            groups.setdefault(owners[key], []).append(sub)
        for anchor in sorted(groups):
            subs = groups[anchor]
            pair = (anchor, e.target) if expanded_is_source else (e.source, anchor)
            if len(subs) == 1 and subs[0].pair == pair:
                edges.append(subs[0])  # opposite side already expanded
            else:
                edges.append(
                    Superedge(*pair, sum(s.weight for s in subs), tuple(subs))
                )
    return DecGraph(nodes, edges, strict=False)


def weak_component_count(g: DecGraph) -> int:
    """Number of weakly connected components (direction ignored)."""
    seen: set[NodeId] = set()
    count = 0
    for start in g.node_ids():
        if start in seen:
            continue
        count += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return count
