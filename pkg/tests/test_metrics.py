"""Per-level metric computations against direct arithmetic oracles."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings

from mlgraph import (
    MultilevelGraph,
    contraction_percentage,
    density,
    extras,
    level_metrics,
    make_scheme,
    path_stats,
    weight_assortativity,
    weight_stats,
)
from mlgraph.core import EMPTY_GRAPH
from mlgraph.multilevel import flatten_to_base

from conftest import dec_graph, plain_graph, random_dec, random_plain, small_digraphs
from oracles import (
    assortativity_oracle,
    cycle_basis_count_oracle,
    density_oracle,
    path_stats_oracle,
)

REL = 1e-9


def close(a, b):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=REL, abs_tol=1e-12)


class TestContractionPercentage:
    def test_four_to_one(self):
        g = dec_graph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
        q = make_scheme("simple_cycles").apply(g)
        assert contraction_percentage(g, q) == 75.0

    def test_level_zero_convention(self):
        g = dec_graph([("a", "b")])
        row = level_metrics(0, g, None, lemma_budget=2)
        assert row.cp == 0.0

    def test_empty_previous_level_is_undefined(self):
        assert contraction_percentage(EMPTY_GRAPH, EMPTY_GRAPH) is None


class TestAssortativity:
    def test_constant_weights_undefined(self):
        g = dec_graph([("a", "b"), ("b", "c")])
        assert weight_assortativity(g) is None

    def test_perfect_correlation(self):
        g = dec_graph(
            [("a", "b"), ("c", "d")],
            nodes={"a": 1, "b": 1, "c": 2, "d": 2},
        )
        assert math.isclose(weight_assortativity(g), 1.0, rel_tol=REL)

    def test_single_edge_undefined(self):
        g = dec_graph([("a", "b")], nodes={"a": 1, "b": 2})
        assert weight_assortativity(g) is None

    def test_random_vs_pearson_oracle(self):
        rng = random.Random(71)
        for _ in range(40):
            g = random_dec(rng, 8, 0.35)
            assert close(weight_assortativity(g), assortativity_oracle(g))

    @settings(max_examples=60, deadline=None)
    @given(small_digraphs())
    def test_property_vs_oracle(self, g):
        assert close(weight_assortativity(g), assortativity_oracle(g))

    def test_scale_invariance(self):
        rng = random.Random(73)
        base = random_plain(rng, 8, 0.4)
        scaled = plain_graph(
            [(u, v, w) for (u, v), w in base.edge_items()],
            nodes={lab: base.node_weight(lab) * 7 for lab in base.node_labels()},
        )
        from mlgraph import natural_transform

        a = weight_assortativity(natural_transform(base))
        b = weight_assortativity(natural_transform(scaled))
        assert close(a, b)
        if a is not None:
            assert -1.0 - 1e-12 <= a <= 1.0 + 1e-12


class TestDensity:
    def test_complete_bidirected_triangle(self):
        labels = ["a", "b", "c"]
        g = dec_graph([(u, v) for u in labels for v in labels if u != v])
        assert density(g) == 1.0

    def test_single_node_undefined(self):
        g = dec_graph([], nodes=["a"])
        assert density(g) is None

    def test_random_vs_formula(self):
        rng = random.Random(79)
        for _ in range(30):
            g = random_dec(rng, 8, 0.3)
            assert close(density(g), density_oracle(g))
            d = density(g)
            if d is not None:
                assert 0.0 <= d <= 1.0


class TestPathStats:
    def test_two_hop_path(self):
        g = dec_graph([("a", "b"), ("b", "c")])
        gspl, gdi = path_stats(g)
        assert math.isclose(gspl, 4.0 / 3.0, rel_tol=REL)
        assert gdi == 2

    def test_edgeless(self):
        g = dec_graph([], nodes=["a", "b"])
        assert path_stats(g) == (None, None)

    def test_random_vs_floyd_warshall(self):
        rng = random.Random(83)
        for _ in range(40):
            g = random_dec(rng, 8, 0.3)
            gspl, gdi = path_stats(g)
            ospl, odi = path_stats_oracle(g)
            assert close(gspl, ospl)
            assert gdi == odi

    def test_diameter_bounds_mean(self):
        rng = random.Random(89)
        for _ in range(20):
            g = random_dec(rng, 7, 0.4)
            gspl, gdi = path_stats(g)
            if gspl is not None:
                assert gdi >= gspl >= 1.0


class TestWeightStats:
    def test_single_node_carrying_whole_budget(self):
        g = dec_graph([], nodes={"a": 6})
        nnw, nnwv, nnwm, nnc = weight_stats(g, 6)
        assert (nnw, nnwv, nnwm) == (100.0, 0.0, 100.0)
        assert math.isclose(nnc, 100.0 / 6.0, rel_tol=REL)

    def test_two_unit_nodes(self):
        g = dec_graph([], nodes={"a": 1, "b": 1})
        nnw, nnwv, nnwm, nnc = weight_stats(g, 4)
        assert (nnw, nnwv, nnwm, nnc) == (25.0, 0.0, 25.0, 50.0)

    def test_empty_graph_all_undefined(self):
        assert weight_stats(EMPTY_GRAPH, 10) == (None, None, None, None)

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            weight_stats(EMPTY_GRAPH, 0)

    def test_weights_match_traced_base_occurrences(self):
        rng = random.Random(97)
        for _ in range(10):
            base = random_plain(rng, 9, 0.35)
            m = MultilevelGraph(base, [make_scheme("simple_cycles"), make_scheme("scc")])
            budget = base.total_node_weight()
            for k in range(m.height + 1):
                level = m.level(k)
                base_graph = m.level(0)
                for node in level.supernodes():
                    traced = flatten_to_base(node)
                    assert node.weight == sum(base_graph.node(b).weight for b in traced)
                nnw, nnwv, nnwm, nnc = weight_stats(level, budget)
                xs = [100.0 * n.weight / budget for n in level.supernodes()]
                assert close(nnw, sum(xs) / len(xs))
                mean = sum(xs) / len(xs)
                assert close(nnwv, sum((x - mean) ** 2 for x in xs) / len(xs))
                assert close(nnwm, max(xs))
                assert close(nnc, 100.0 * level.node_count / budget)


class TestExtras:
    def test_tree_has_no_cycle_basis(self):
        g = dec_graph([("a", "b"), ("a", "c"), ("c", "d")])
        assert extras(g, None, 4)["cycle_basis_count"] == 0

    def test_four_cycle_has_one(self):
        g = dec_graph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
        assert extras(g, None, 4)["cycle_basis_count"] == 1

    def test_random_vs_component_oracle(self):
        rng = random.Random(101)
        for _ in range(30):
            g = random_dec(rng, 8, 0.2)
            assert extras(g, None, 10)["cycle_basis_count"] == cycle_basis_count_oracle(g)

    def test_class_sizes_only_with_previous_level(self):
        g = dec_graph([("a", "b"), ("b", "a")])
        q = make_scheme("scc").apply(g)
        assert "class_sizes" not in extras(g, None, 2)
        sizes = extras(q, g, 2)["class_sizes"]
        assert sizes == {"2": 1}

    def test_edge_statistics(self):
        g = dec_graph([("a", "b", 3), ("b", "c", 5)])
        out = extras(g, None, 10)
        assert out["edge_count_pct"] == 20.0
        assert out["edge_weight_total"] == 8
        assert out["edge_weight_mean"] == 4.0


class TestLevelMetricsAssembly:
    def test_purity_bit_identical(self):
        rng = random.Random(103)
        g = random_dec(rng, 9, 0.3)
        q = make_scheme("scc").apply(g)
        first = level_metrics(1, q, g, 20)
        second = level_metrics(1, q, g, 20)
        assert first == second

    def test_undefined_is_none_not_zero(self):
        g = dec_graph([], nodes=["a"])
        row = level_metrics(0, g, None, 1)
        assert row.gde is None and row.gspl is None and row.gdi is None
        assert row.gwac is None
