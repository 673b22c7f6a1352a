"""Shared builders and hypothesis strategies for the test suite."""

from __future__ import annotations

import random
import sys
from pathlib import Path

from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

from mlgraph import DecGraph, PlainGraph, natural_transform


def plain_graph(
    edges: list[tuple[str, str]] | list[tuple[str, str, int]],
    nodes: dict[str, int] | list[str] | None = None,
) -> PlainGraph:
    """Build a plain graph from edge tuples, auto-creating unit nodes."""
    g = PlainGraph()
    if isinstance(nodes, dict):
        for label, weight in nodes.items():
            g.add_node(label, weight)
    elif nodes:
        for label in nodes:
            g.add_node(label)
    for spec in edges:
        u, v = spec[0], spec[1]
        w = spec[2] if len(spec) == 3 else 1
        for label in (u, v):
            if label not in g.node_labels():
                g.add_node(label)
        g.add_edge(u, v, w)
    return g


def dec_graph(
    edges: list[tuple[str, str]] | list[tuple[str, str, int]],
    nodes: dict[str, int] | list[str] | None = None,
) -> DecGraph:
    return natural_transform(plain_graph(edges, nodes))


def random_plain(rng: random.Random, n: int, edge_prob: float, max_weight: int = 5) -> PlainGraph:
    """Seeded Gilbert-style digraph with weighted nodes and edges."""
    g = PlainGraph()
    labels = [f"n{i}" for i in range(n)]
    for label in labels:
        g.add_node(label, rng.randint(1, max_weight))
    for u in labels:
        for v in labels:
            if u != v and rng.random() < edge_prob:
                g.add_edge(u, v, rng.randint(1, max_weight))
    return g


def random_dec(rng: random.Random, n: int, edge_prob: float, max_weight: int = 5) -> DecGraph:
    return natural_transform(random_plain(rng, n, edge_prob, max_weight))


SAFE_VOCAB = [
    "lake", "river", "stone", "cloud", "wind", "tree", "path", "light",
    "shadow", "door", "bird", "storm", "field", "tower", "bridge", "flame",
]


def make_corpus_lines(
    rng: random.Random,
    n_dreamers: int,
    dreams_each: int,
    min_len: int = 18,
    max_len: int = 40,
    vocab: list[str] | None = None,
) -> list[dict]:
    """Synthetic dream records whose tokens pass the pipeline unchanged."""
    vocab = vocab or SAFE_VOCAB
    records = []
    for d in range(n_dreamers):
        for i in range(dreams_each):
            length = rng.randint(min_len, max_len)
            text = " ".join(rng.choice(vocab) for _ in range(length))
            records.append(
                {"dreamer": f"dreamer{d:02d}", "id": f"dream{i:03d}", "text": text}
            )
    return records


def write_corpus(path: Path, records: list[dict]) -> Path:
    import json

    path.write_text(
        "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n",
        encoding="utf-8",
    )
    return path


@st.composite
def small_digraphs(draw, max_nodes: int = 8, max_weight: int = 4):
    """Hypothesis strategy: base-level DecGraph with <= max_nodes nodes."""
    n = draw(st.integers(min_value=0, max_value=max_nodes))
    labels = [f"n{i}" for i in range(n)]
    g = PlainGraph()
    for label in labels:
        g.add_node(label, draw(st.integers(min_value=1, max_value=max_weight)))
    if n >= 2:
        candidates = [(u, v) for u in labels for v in labels if u != v]
        picked = draw(
            st.lists(st.sampled_from(candidates), unique=True, max_size=min(len(candidates), 24))
        )
        for u, v in picked:
            g.add_edge(u, v, draw(st.integers(min_value=1, max_value=max_weight)))
    return natural_transform(g)
