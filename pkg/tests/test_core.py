"""Core graph type: lifting, contraction checking, reconstruction, views."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings

from mlgraph import (
    DecGraph,
    EMPTY_GRAPH,
    GraphBuilder,
    GraphError,
    PlainGraph,
    Superedge,
    Supernode,
    complete_decontraction,
    decontract_node,
    detect_sccs,
    is_contraction_of,
    make_scheme,
    natural_transform,
    quotient_by_features,
    reconstruct,
)

from conftest import dec_graph, plain_graph, random_dec, small_digraphs
from oracles import partition_check


def local_view_fixture() -> tuple[DecGraph, DecGraph, DecGraph]:
    """The two-supernode local-decontraction configuration.

    Returns (contracted, union_base, full_left): ``contracted`` holds the
    two contracted supernodes joined by one superedge; ``union_base`` is
    the 7-node, 8-edge graph they abstract; ``full_left`` adds the two
    base-level neighbors and their payload-less edges.
    """
    a = {i: Supernode(i, f"a{i}", 1) for i in range(1, 8)}
    triangle_edges = [Superedge(1, 2), Superedge(2, 3), Superedge(3, 1)]
    star_edges = [Superedge(5, 4), Superedge(5, 7), Superedge(5, 6)]
    cross = [Superedge(3, 4), Superedge(2, 5)]

    triangle = DecGraph([a[1], a[2], a[3]], triangle_edges)
    star = DecGraph([a[4], a[5], a[6], a[7]], star_edges)
    union_base = DecGraph(a.values(), triangle_edges + star_edges + cross)

    v2 = Supernode(10, "v2", 3, triangle)
    v3 = Supernode(11, "v3", 4, star)
    e2 = Superedge(10, 11, 2, tuple(cross))
    contracted = DecGraph([v2, v3], [e2])

    v1 = Supernode(9, "v1", 1)
    v4 = Supernode(12, "v4", 1)
    full_left = DecGraph(
        [v1, v2, v3, v4],
        [Superedge(9, 10), e2, Superedge(11, 12), Superedge(10, 12)],
    )
    return contracted, union_base, full_left


class TestNaturalTransform:
    def test_empty_graph(self):
        g = natural_transform(PlainGraph())
        assert g.node_count == 0 and g.edge_count == 0
        assert g == EMPTY_GRAPH

    def test_three_cycle_isomorphic(self):
        g = dec_graph([("a", "b"), ("b", "c"), ("c", "a")])
        assert g.node_count == 3 and g.edge_count == 3
        assert all(n.is_base() for n in g.supernodes())
        assert all(not e.dec for e in g.superedges())
        assert sorted(n.label for n in g.supernodes()) == ["a", "b", "c"]

    def test_labels_weights_adjacency_preserved(self):
        p = plain_graph([("x", "y", 3)], nodes={"x": 2, "y": 5})
        g = natural_transform(p)
        by_label = {n.label: n for n in g.supernodes()}
        assert by_label["x"].weight == 2 and by_label["y"].weight == 5
        assert g.edge(by_label["x"].id, by_label["y"].id).weight == 3

    def test_insertion_order_insensitive_up_to_canonical_form(self):
        p1 = plain_graph([("a", "b")], nodes=["a", "b"])
        p2 = plain_graph([("a", "b")], nodes=["b", "a"])
        g1, g2 = natural_transform(p1), natural_transform(p2)
        assert g1.canonical_key() == g2.canonical_key()

    def test_rejects_self_loops(self):
        p = PlainGraph()
        p.add_node("a")
        p.add_edge("a", "a")
        with pytest.raises(GraphError):
            natural_transform(p)

    def test_complete_decontraction_is_identity_on_result(self):
        g = dec_graph([("a", "b"), ("b", "c")])
        assert complete_decontraction(g) is g


class TestIsContractionOf:
    def test_figure_configuration_is_contraction(self):
        contracted, union_base, _ = local_view_fixture()
        assert is_contraction_of(contracted, union_base)

    def test_natural_transform_never_contracts_nonempty(self):
        g = dec_graph([("a", "b")])
        assert not is_contraction_of(natural_transform(plain_graph([("a", "b")])), g)

    def test_scc_quotient_of_random_graph(self):
        rng = random.Random(7)
        for _ in range(25):
            g = random_dec(rng, 6, 0.35)
            q = quotient_by_features(g, detect_sccs(g))
            assert is_contraction_of(q, g)
            blocks = [set(n.id for n in sn.dec.supernodes()) for sn in q.supernodes()]
            assert partition_check(blocks, set(g.node_ids()))

    def test_mismatched_base_returns_false(self):
        contracted, _, _ = local_view_fixture()
        other = dec_graph([("a", "b")])
        assert not is_contraction_of(contracted, other)

    def test_empty_against_empty(self):
        assert is_contraction_of(EMPTY_GRAPH, EMPTY_GRAPH)

    def test_detects_edge_coverage_gap(self):
        contracted, union_base, _ = local_view_fixture()
        extra = DecGraph(
            union_base.supernodes(),
            union_base.superedges() + [Superedge(1, 4)],
        )
        assert not is_contraction_of(contracted, extra)


class TestReconstruct:
    def test_figure_union_graph(self):
        contracted, union_base, _ = local_view_fixture()
        rebuilt = reconstruct(contracted)
        assert rebuilt.node_count == 7 and rebuilt.edge_count == 8
        assert rebuilt == union_base

    def test_round_trip_through_any_scheme(self):
        rng = random.Random(11)
        schemes = [make_scheme(tag) for tag in ("simple_cycles", "scc", "star", "clique")]
        for _ in range(10):
            g = random_dec(rng, 8, 0.3)
            for scheme in schemes:
                assert reconstruct(scheme.apply(g)) == g

    def test_singleton_partition_strips_one_level(self):
        g = dec_graph([("a", "b"), ("b", "c"), ("c", "a")])
        wrapped = quotient_by_features(g, _empty_features(g))
        assert all(sn.dec.node_count == 1 for sn in wrapped.supernodes())
        assert reconstruct(wrapped) == g

    def test_rejects_empty_decontractions(self):
        g = dec_graph([("a", "b")])
        with pytest.raises(GraphError):
            reconstruct(g)


def _empty_features(g: DecGraph):
    from mlgraph import FeatureSet

    return FeatureSet.from_features([], g)


class TestCompleteDecontraction:
    def test_base_level_fixed_point(self):
        g = dec_graph([("a", "b"), ("b", "a")])
        assert complete_decontraction(g) is g
        assert complete_decontraction(complete_decontraction(g)) == g

    def test_fully_contracted_equals_reconstruct(self):
        contracted, union_base, _ = local_view_fixture()
        assert complete_decontraction(contracted) == reconstruct(contracted) == union_base

    def test_mixed_graph_passes_base_nodes_through(self):
        _, _, full_left = local_view_fixture()
        expanded = complete_decontraction(full_left)
        labels = sorted(n.label for n in expanded.supernodes())
        assert labels == ["a1", "a2", "a3", "a4", "a5", "a6", "a7", "v1", "v4"]
        # payload-less edges incident to an expanded node carry no
        # traceable transitions and disappear from the view
        assert expanded.edge_count == 8

    def test_empty_graph(self):
        assert complete_decontraction(EMPTY_GRAPH) is EMPTY_GRAPH


class TestDecontractNode:
    def test_base_node_unchanged(self):
        g = dec_graph([("a", "b")])
        assert decontract_node(g, g.node_ids()[0]) is g

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            decontract_node(EMPTY_GRAPH, 0)

    def test_figure_single_expansion(self):
        _, _, full_left = local_view_fixture()
        view = decontract_node(full_left, 10)  # expand the triangle node
        labels = sorted(n.label for n in view.supernodes())
        assert labels == ["a1", "a2", "a3", "v1", "v3", "v4"]
        pairs = set(view.edge_pairs())
        assert (1, 2) in pairs and (2, 3) in pairs and (3, 1) in pairs
        # the crossing superedge re-anchors at payload granularity
        assert (2, 11) in pairs and (3, 11) in pairs
        assert (11, 12) in pairs  # untouched neighbor edge survives
        assert len(pairs) == 6

    def test_sequential_expansion_matches_complete(self):
        _, _, full_left = local_view_fixture()
        for order in itertools.permutations(full_left.node_ids()):
            view = full_left
            for node_id in order:
                view = decontract_node(view, node_id)
            assert view == complete_decontraction(full_left)

    def test_sequential_expansion_on_random_quotients(self):
        rng = random.Random(23)
        for _ in range(20):
            g = random_dec(rng, 5, 0.4)
            q = quotient_by_features(g, detect_sccs(g))
            target = complete_decontraction(q)
            for order in itertools.permutations(q.node_ids()):
                view = q
                for node_id in order:
                    view = decontract_node(view, node_id)
                assert view == target

    def test_chained_views_on_doubly_nested_hierarchies(self):
        # payload nodes brought into a view are themselves expandable,
        # in any order, even when their sibling edges are still anchored
        rng = random.Random(37)
        for _ in range(10):
            g = random_dec(rng, 8, 0.35)
            q2 = make_scheme("star").apply(make_scheme("scc").apply(g))
            view = q2
            while any(not n.is_base() for n in view.supernodes()):
                target = next(
                    n.id
                    for n in sorted(view.supernodes(), key=lambda n: n.id, reverse=True)
                    if not n.is_base()
                )
                view = decontract_node(view, target)
            base_node_weight = g.total_node_weight()
            assert view.total_node_weight() == base_node_weight
            assert set(view.node_ids()) == set(g.node_ids())


class TestWeightBookkeeping:
    def test_figure_weights(self):
        contracted, union_base, _ = local_view_fixture()
        assert contracted.total_node_weight() == union_base.total_node_weight() == 7
        assert contracted.total_edge_weight() == union_base.total_edge_weight() == 8

    @settings(max_examples=60, deadline=None)
    @given(small_digraphs())
    def test_conservation_through_quotients(self, g):
        q = quotient_by_features(g, detect_sccs(g))
        assert q.total_node_weight() == g.total_node_weight()
        assert q.total_edge_weight() == g.total_edge_weight()


class TestSerialization:
    def test_json_round_trip_and_determinism(self):
        contracted, _, full_left = local_view_fixture()
        for g in (contracted, full_left, EMPTY_GRAPH):
            text = g.to_json()
            assert DecGraph.from_json(text) == g
            assert DecGraph.from_json(text).to_json() == text

    def test_dot_round_trip(self):
        contracted, union_base, _ = local_view_fixture()
        for g in (contracted, union_base):
            dot = g.to_dot()
            assert DecGraph.from_dot(dot) == g
            assert "tooltip" in dot

    def test_null_dec_encodes_base_level(self):
        g = dec_graph([("a", "b")])
        data = g.to_dict()
        assert all(node["dec"] is None for node in data["nodes"])
        assert all(edge["dec"] is None for edge in data["edges"])

    @settings(max_examples=40, deadline=None)
    @given(small_digraphs())
    def test_json_round_trip_random(self, g):
        q = quotient_by_features(g, detect_sccs(g))
        assert DecGraph.from_json(q.to_json()) == q

    def test_bit_identical_rebuild(self):
        def build():
            rng = random.Random(99)
            g = random_dec(rng, 12, 0.25)
            return quotient_by_features(g, detect_sccs(g)).to_json()

        assert build() == build()


class TestValidation:
    def test_self_loop_rejected_everywhere(self):
        with pytest.raises(GraphError):
            Superedge(1, 1)

    def test_duplicate_edge_rejected(self):
        b = GraphBuilder()
        x, y = b.add_node("x"), b.add_node("y")
        b.add_edge(x, y)
        b.add_edge(x, y)
        with pytest.raises(GraphError):
            b.build()

    def test_strict_payload_pair_validation(self):
        inner = Supernode(0, "inner", 1)
        payload = DecGraph([inner])
        u = Supernode(5, "u", 1, payload)
        v = Supernode(6, "v", 1)
        bogus = Superedge(5, 6, 1, (Superedge(0, 3),))
        with pytest.raises(GraphError):
            DecGraph([u, v], [bogus])

    def test_negative_weight_rejected(self):
        with pytest.raises(GraphError):
            Supernode(0, "x", -1)
