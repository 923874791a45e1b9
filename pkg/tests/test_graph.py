import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiermap import (
    GraphFormatError,
    edge_cut,
    extract_subgraph,
    from_edges,
    load_metis,
    metis_to_string,
    total_weight,
)
from hiermap.graph import Graph
from hiermap.instances import path_graph, star_graph

from _brute import pairwise_cut


def test_load_edge_weights_only():
    text = "3 2 1\n2 7\n1 7 3 4\n2 4\n"
    g = load_metis(text)
    assert g.n == 3
    assert g.num_edges == 2
    assert list(g.vertex_weights) == [1, 1, 1]
    assert list(g.neighbors(0)) == [1]
    assert list(g.neighbors(1)) == [0, 2]
    # path weights: {0,1} -> 7, {1,2} -> 4
    assert g.edge_weights[g.offsets[0]] == 7
    assert list(g.edge_weights[g.offsets[1]:g.offsets[2]]) == [7, 4]


def test_load_both_weights():
    g = load_metis("2 1 11\n5 2 9\n3 1 9\n")
    assert g.n == 2
    assert list(g.vertex_weights) == [5, 3]
    assert g.num_edges == 1
    assert g.edge_weights[0] == 9


def test_load_line_count_mismatch():
    with pytest.raises(GraphFormatError):
        load_metis("4 3\n2\n1\n")


def test_load_comments_and_unweighted():
    g = load_metis("% a comment\n3 2\n2\n% inner comment\n1 3\n2\n")
    assert g.n == 3 and g.num_edges == 2
    assert list(g.edge_weights) == [1, 1, 1, 1]


def test_load_rejects_bad_input():
    with pytest.raises(GraphFormatError):
        load_metis("")
    with pytest.raises(GraphFormatError):
        load_metis("nonsense header\n")
    with pytest.raises(GraphFormatError):
        load_metis("2 1 7\n2\n1\n")  # unknown format code
    with pytest.raises(GraphFormatError):
        load_metis("2 1\n3\n1\n")  # neighbor out of range
    with pytest.raises(GraphFormatError):
        load_metis("2 1 1\n2 -4\n1 -4\n")  # negative weight
    with pytest.raises(GraphFormatError):
        load_metis("3 2\n2\n1\n2\n")  # asymmetric adjacency
    with pytest.raises(GraphFormatError):
        load_metis("3 2 1\n2 7\n1 9 3 4\n2 4\n")  # asymmetric weights
    with pytest.raises(GraphFormatError):
        load_metis("3 5\n2\n1 3\n2\n")  # edge count mismatch
    with pytest.raises(GraphFormatError):
        load_metis("2 1 11 2\n5 2 9\n3 1 9\n")  # multi-constraint vertices


def test_self_loops_dropped():
    # vertex 1 lists itself twice; header counts that as one more edge
    g = load_metis("2 2\n2\n1 2 2\n")
    assert g.num_edges == 1
    assert list(g.neighbors(1)) == [0]


def test_total_weight():
    assert total_weight(from_edges(800, [(i, i + 1) for i in range(799)])) == 800
    empty = Graph(np.zeros(1, dtype=np.int64), [], [], [])
    assert total_weight(empty) == 0
    assert total_weight(load_metis("2 1 11\n5 2 9\n3 1 9\n")) == 8


def test_extract_subgraph_path():
    g = path_graph(3)
    ext = extract_subgraph(g, [0, 0, 1], 0)
    assert ext.subgraph.n == 2
    assert ext.subgraph.num_edges == 1
    assert list(ext.local_to_global) == [0, 1]


def test_extract_subgraph_identity():
    g = path_graph(5)
    ext = extract_subgraph(g, [3, 3, 3, 3, 3], 3)
    assert ext.subgraph == g
    assert list(ext.local_to_global) == list(range(5))


def test_extract_subgraph_star_leaves():
    g = star_graph(3)  # center 0, leaves 1..3
    ext = extract_subgraph(g, [0, 1, 1, 1], 1)
    assert ext.subgraph.n == 3
    assert ext.subgraph.num_edges == 0
    assert list(ext.local_to_global) == [1, 2, 3]


def test_extract_subgraph_missing_target():
    with pytest.raises(ValueError):
        extract_subgraph(path_graph(3), [0, 0, 1], 2)


def test_extract_preserves_vertex_weights():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)], vertex_weights=[5, 6, 7, 8])
    ext = extract_subgraph(g, [0, 1, 1, 0], 1)
    assert list(ext.subgraph.vertex_weights) == [6, 7]


def test_edge_cut_examples():
    p4 = path_graph(4)
    assert edge_cut(p4, [0, 0, 0, 0]) == 0
    assert edge_cut(p4, [0, 0, 1, 1]) == 1
    k4 = from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
    assert edge_cut(k4, [0, 0, 1, 1]) == 4


graphs = st.integers(1, 10).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.tuples(
                st.integers(0, n - 1), st.integers(0, n - 1), st.integers(0, 9)
            ).filter(lambda e: e[0] != e[1]),
            max_size=16,
            unique_by=lambda e: (min(e[0], e[1]), max(e[0], e[1])),
        ),
        st.lists(st.integers(0, 20), min_size=n, max_size=n),
    )
)


def _build(spec):
    n, edges, vw = spec
    return from_edges(n, edges, vertex_weights=vw)


@given(graphs)
@settings(max_examples=60)
def test_metis_round_trip(spec):
    g = _build(spec)
    again = load_metis(metis_to_string(g))
    assert again == g
    assert load_metis(metis_to_string(again)) == again


@given(graphs, st.randoms(use_true_random=False))
@settings(max_examples=60)
def test_edge_cut_matches_pairwise_sum(spec, rnd):
    g = _build(spec)
    blocks = [rnd.randrange(3) for _ in range(g.n)]
    assert edge_cut(g, blocks) == pairwise_cut(g, blocks)


@given(graphs, st.randoms(use_true_random=False))
@settings(max_examples=40)
def test_extract_partitions_vertex_set(spec, rnd):
    g = _build(spec)
    blocks = [rnd.randrange(3) for _ in range(g.n)]
    seen = []
    for target in set(blocks):
        ext = extract_subgraph(g, blocks, target)
        seen.extend(int(v) for v in ext.local_to_global)
        assert list(ext.subgraph.vertex_weights) == [
            int(g.vertex_weights[v]) for v in ext.local_to_global
        ]
    assert sorted(seen) == list(range(g.n))
