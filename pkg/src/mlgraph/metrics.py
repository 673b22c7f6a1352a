"""Per-level quantitative measurements of a multilevel hierarchy.

All metrics are pure functions of the graph (plus the lemma budget of the
originating narrative) and are defined for directed, possibly
disconnected graphs. Undefined values are represented as None, never 0,
and propagate as nulls through serialization and aggregation.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .core import DecGraph, weak_component_count

# Lemma budget: occurrence count of the cleaned narrative, the normalizer
# for every length-sensitive metric.
LemmaBudget = int

CSV_METRIC_COLUMNS = ("NNC", "CP", "GWAC", "NNW", "NNWv", "NNWm", "GSPL", "GDi", "GDe")


@dataclass
class LevelMetrics:
    """One measurement row for one level of one hierarchy."""

    level: int
    nnc: float | None
    cp: float | None
    gwac: float | None
    nnw: float | None
    nnwv: float | None
    nnwm: float | None
    gspl: float | None
    gdi: int | None
    gde: float | None
    truncated_cycles: bool = False
    extras: dict[str, Any] = field(default_factory=dict)

    def by_column(self) -> dict[str, float | int | None]:
        return {
            "NNC": self.nnc,
            "CP": self.cp,
            "GWAC": self.gwac,
            "NNW": self.nnw,
            "NNWv": self.nnwv,
            "NNWm": self.nnwm,
            "GSPL": self.gspl,
            "GDi": self.gdi,
            "GDe": self.gde,
        }


def contraction_percentage(prev: DecGraph, curr: DecGraph) -> float | None:
    """Relative node-count reduction from one level to the next, percent."""
    if prev.node_count == 0:
        return None
    return 100.0 * (prev.node_count - curr.node_count) / prev.node_count


def weight_assortativity(g: DecGraph) -> float | None:
    """Pearson correlation of (source weight, target weight) over edges.

    Undefined (None) with fewer than two edges or when either marginal is
    constant.
    """
    pairs = [
        (g.node(e.source).weight, g.node(e.target).weight)
        for e in sorted(g.superedges(), key=lambda e: e.pair)
    ]
    if len(pairs) < 2:
        return None
    try:
        return statistics.correlation([p[0] for p in pairs], [p[1] for p in pairs])
    except statistics.StatisticsError:
        return None


def density(g: DecGraph) -> float | None:
    """Edges over possible ordered pairs: |E| / (n*(n-1)); None for n <= 1."""
    n = g.node_count
    if n <= 1:
        return None
    return g.edge_count / (n * (n - 1))


def path_stats(g: DecGraph) -> tuple[float | None, int | None]:
    """Mean and max hop distance over ordered reachable pairs (u != v).

    Unweighted BFS distances; pairs with no path are simply excluded, so
    both values are None when nothing is reachable at all.
    """
    total = 0
    count = 0
    diameter = 0
    for source in g.node_ids():
        dist = {source: 0}
        queue = deque((source,))
        while queue:
            u = queue.popleft()
            for w in g.successors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        for v, d in dist.items():
            if v != source:
                total += d
                count += 1
                if d > diameter:
                    diameter = d
    if count == 0:
        return (None, None)
    return (total / count, diameter)


def weight_stats(
    g: DecGraph, lemma_budget: LemmaBudget
) -> tuple[float | None, float | None, float | None, float | None]:
    """(nnw, nnwv, nnwm, nnc): normalized node-weight statistics.

    Each node weight is scaled to 100*weight/L; nnw is their mean, nnwv
    the population variance, nnwm the maximum, and nnc the node count as
    a percentage of L. All None on the empty graph.
    """
    if lemma_budget < 1:
        raise ValueError("lemma budget must be at least 1")
    if g.node_count == 0:
        return (None, None, None, None)
    scaled = [100.0 * n.weight / lemma_budget for n in g.supernodes()]
    return (
        statistics.fmean(scaled),
        statistics.pvariance(scaled),
        max(scaled),
        100.0 * g.node_count / lemma_budget,
    )


def extras(
    g: DecGraph, prev: DecGraph | None, lemma_budget: LemmaBudget
) -> dict[str, Any]:
    """Optional per-level statistics beyond the main columns.

    Includes the normalized edge count, total and mean top-level edge
    weight, the distribution of contraction class sizes (payload node
    counts, only when a previous level exists) and the cycle basis count
    |E| - |V| + (number of weakly connected components).
    """
    if lemma_budget < 1:
        raise ValueError("lemma budget must be at least 1")
    total_w = sum(e.weight for e in g.superedges())
    out: dict[str, Any] = {
        "edge_count_pct": 100.0 * g.edge_count / lemma_budget,
        "edge_weight_total": total_w,
        "edge_weight_mean": (total_w / g.edge_count) if g.edge_count else None,
        "cycle_basis_count": g.edge_count - g.node_count + weak_component_count(g),
    }
    if prev is not None:
        sizes: dict[str, int] = {}
        for n in g.supernodes():
            key = str(n.dec.node_count)
            sizes[key] = sizes.get(key, 0) + 1
        out["class_sizes"] = sizes
    return out


def level_metrics(
    level: int,
    curr: DecGraph,
    prev: DecGraph | None,
    lemma_budget: LemmaBudget,
    truncated_cycles: bool = False,
    with_extras: bool = True,
) -> LevelMetrics:
    """Assemble the full measurement row for one level."""
    nnw, nnwv, nnwm, nnc = weight_stats(curr, lemma_budget)
    if level == 0:
        cp: float | None = 0.0
    else:
        assert prev is not None
        cp = contraction_percentage(prev, curr)
    gspl, gdi = path_stats(curr)
    return LevelMetrics(
        level=level,
        nnc=nnc,
        cp=cp,
        gwac=weight_assortativity(curr),
        nnw=nnw,
        nnwv=nnwv,
        nnwm=nnwm,
        gspl=gspl,
        gdi=gdi,
        gde=density(curr),
        truncated_cycles=truncated_cycles,
        extras=extras(curr, prev, lemma_budget) if with_extras else {},
    )
