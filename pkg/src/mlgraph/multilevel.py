"""Multilevel graphs: a base graph plus an ordered stack of contractions.

Level 0 is the natural transformation of the base graph; level k applies
the k-th contraction scheme to level k-1. Levels are materialized lazily
and cached; materialized levels are immutable and safe to share across
threads, and at most one thread builds levels at a time.
"""

from __future__ import annotations

import json
import threading
from typing import Any, Mapping, Sequence

from .core import DecGraph, GraphError, NodeId, PlainGraph, Supernode, natural_transform
from .features import ContractionScheme, FeatureSet, make_scheme, quotient_by_features


def flatten_to_base(node: Supernode) -> frozenset[NodeId]:
    """Base-level node ids reachable by recursively flattening payloads."""
    if node.is_base():
        return frozenset((node.id,))
    out: set[NodeId] = set()
    for child in node.dec.supernodes():
        out |= flatten_to_base(child)
    return frozenset(out)


class MultilevelGraph:
    """Base graph + contraction schedule, with cached level materialization."""

    def __init__(self, base: PlainGraph, gamma: Sequence[ContractionScheme] = ()) -> None:
        self._base = base
        self._gamma = tuple(gamma)
        size = len(self._gamma) + 1
        self._levels: list[DecGraph | None] = [None] * size
        self._features: list[FeatureSet | None] = [None] * size
        self._truncated: list[bool] = [False] * size
        self._lock = threading.Lock()

    @property
    def base(self) -> PlainGraph:
        return self._base

    @property
    def gamma(self) -> tuple[ContractionScheme, ...]:
        return self._gamma

    @property
    def height(self) -> int:
        """Number of contraction schemes; the index of the topmost level."""
        return len(self._gamma)

    def _check_level(self, k: int) -> None:
        if not 0 <= k <= self.height:
            raise GraphError(f"level {k} out of range 0..{self.height}")

    def level(self, k: int) -> DecGraph:
        """The graph at level k, materializing and caching as needed."""
        self._check_level(k)
        if self._levels[k] is None:
            with self._lock:
                for i in range(k + 1):
                    if self._levels[i] is None:
                        self._materialize(i)
        graph = self._levels[k]
        assert graph is not None
        return graph

    def _materialize(self, i: int) -> None:
        if i == 0:
            self._levels[0] = natural_transform(self._base)
            return
        prev = self._levels[i - 1]
        assert prev is not None
        scheme = self._gamma[i - 1]
        fs = scheme.detect(prev)
        self._features[i] = fs
        self._truncated[i] = fs.truncated
        self._levels[i] = quotient_by_features(prev, fs, tag=scheme.tag)

    def level_uncached(self, k: int) -> DecGraph:
        """Recompute level k from scratch, bypassing the cache entirely."""
        self._check_level(k)
        graph = natural_transform(self._base)
        for scheme in self._gamma[:k]:
            graph = scheme.apply(graph)
        return graph

    def feature_set(self, k: int) -> FeatureSet:
        """Features detected while producing level k (k >= 1)."""
        if not 1 <= k <= self.height:
            raise GraphError(f"no feature set for level {k}")
        self.level(k)
        fs = self._features[k]
        if fs is None:
            # hierarchy was loaded with levels pre-cached; re-detect lazily
            fs = self._gamma[k - 1].detect(self.level(k - 1))
            self._features[k] = fs
        return fs

    def truncated(self, k: int) -> bool:
        """Whether cycle enumeration hit its guard while producing level k."""
        self._check_level(k)
        if k == 0:
            return False
        self.level(k)
        return self._truncated[k]

    def trace(self, level: int, node_id: NodeId) -> frozenset[NodeId]:
        """Base-level node ids a node at the given level stands for."""
        graph = self.level(level)
        if not graph.has_node(node_id):
            raise GraphError(f"unknown node id {node_id} at level {level}")
        return flatten_to_base(graph.node(node_id))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "base": self._base.to_dict(),
            "gamma": [
                {"tag": s.tag, "params": s.params_dict()} for s in self._gamma
            ],
            "levels": [self.level(i).to_dict() for i in range(self.height + 1)],
            "truncated": [self.truncated(i) for i in range(1, self.height + 1)],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MultilevelGraph":
        base = PlainGraph.from_dict(data["base"])
        gamma = [make_scheme(s["tag"], **s.get("params", {})) for s in data.get("gamma", ())]
        m = cls(base, gamma)
        levels = data.get("levels", ())
        if len(levels) not in (0, m.height + 1):
            raise GraphError("levels array does not match the schedule height")
        for i, level_dict in enumerate(levels):
            m._levels[i] = DecGraph.from_dict(level_dict)
        for i, flag in enumerate(data.get("truncated", ()), start=1):
            m._truncated[i] = bool(flag)
        return m

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MultilevelGraph":
        return cls.from_dict(json.loads(text))
