import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flatband.lattice import (
    Face,
    LatticeError,
    TorusSpec,
    build_torus,
    enumerate_faces,
    face_state,
    hopping_matrix,
    incidence_matrix,
    is_clique,
    line_graph_adjacency,
    vertex_cliques,
)


@pytest.mark.parametrize("size,nv,ne", [((4, 4, 4), 64, 192), ((4, 4, 6), 96, 288)])
def test_counts(size, nv, ne):
    t = build_torus(size)
    assert (t.n_vertices, t.n_edges) == (nv, ne)


@pytest.mark.parametrize("bad", [(4, 3, 4), (2, 4, 4), (4, 4, 5), (0, 4, 4)])
def test_rejects_bad_extents(bad):
    with pytest.raises(LatticeError, match="extent must be even ≥ 4"):
        TorusSpec(*bad)


def test_spec_sorted_and_parse():
    s = TorusSpec(8, 4, 6)
    assert s.extents == (4, 6, 8)
    assert TorusSpec.parse("6,4,4") == TorusSpec(4, 4, 6)
    with pytest.raises(LatticeError):
        TorusSpec.parse("4,4")


even_ext = st.sampled_from([4, 6, 8])


@settings(max_examples=15, deadline=None)
@given(even_ext, even_ext, even_ext)
def test_structure_any_spec(a, b, c):
    t = build_torus((a, b, c))
    assert t.n_edges == 3 * t.n_vertices
    assert set(t.degrees()) == {6}
    assert t.is_proper_coloring()
    B = incidence_matrix(t)
    S = t.face_state_matrix()
    assert not np.any(B @ S)


def test_incidence(t444):
    B = incidence_matrix(t444)
    assert B.shape == (64, 192)
    assert set(B.sum(axis=0)) == {2}
    assert set(B.sum(axis=1)) == {6}


def test_hopping_neighbor_count_brute_force(t444):
    T = hopping_matrix(t444)
    assert np.array_equal(T, T.T)
    assert set(np.diag(T)) == {2}
    ends = [set(map(int, e)) for e in t444.edge_ends]
    for e in range(0, t444.n_edges, 7):
        shared = [f for f in range(t444.n_edges) if f != e and ends[e] & ends[f]]
        assert len(shared) == 10
        assert sorted(np.flatnonzero(T[e]).tolist()) == sorted(shared + [e])


def test_hopping_minus_two_is_line_graph(t444):
    assert np.array_equal(hopping_matrix(t444) - 2 * np.eye(192, dtype=int), line_graph_adjacency(t444))


def test_vertex_cliques(t444):
    cl = vertex_cliques(t444)
    assert all(len(c) == 6 and is_clique(t444, c) for c in cl)


def test_faces_cover_each_edge_four_times(t444):
    faces = enumerate_faces(t444)
    assert len(faces) == 192
    count = np.zeros(t444.n_edges, dtype=int)
    for f in faces:
        for e in face_state(t444, f).edges:
            count[e] += 1
    assert set(count) == {4}


def test_distinct_faces_share_at_most_one_edge(t444):
    edge_sets = [set(t444.face_edges[f].tolist()) for f in range(t444.n_faces)]
    for a, b in itertools.combinations(edge_sets, 2):
        assert len(a & b) <= 1


def test_face_is_closed_cycle(t444):
    for f in range(t444.n_faces):
        vs = t444.face_vertices[f]
        for k, e in enumerate(t444.face_edges[f]):
            assert set(t444.edge_ends[e]) == {vs[k], vs[(k + 1) % 4]}


def test_face_state_signs(t444):
    B = incidence_matrix(t444)
    for f in enumerate_faces(t444):
        s = face_state(t444, f)
        assert sorted(s.signs) == [-1, -1, 1, 1]
        assert sum(s.signs) == 0
        assert all(s.signs[k] == -s.signs[(k + 1) % 4] for k in range(4))
        v = s.dense(t444.n_edges)
        assert v @ v == 4
        assert not np.any(B @ v)


def test_sign_orientation_convention(t444):
    # edge oriented even -> odd; +1 where the traversal follows that orientation
    for fid in range(0, t444.n_faces, 5):
        vs = t444.face_vertices[fid]
        for k, e in enumerate(t444.face_edges[fid]):
            start = vs[k]
            agrees = t444.parity[start] == 0
            assert t444.face_signs[fid][k] == (1 if agrees else -1)


def test_face_roundtrip_and_lookup(t444):
    f = t444.face((1, 2, 3), "YZ")
    assert Face.from_id(f.id) == f
    assert f.plane == 1
    with pytest.raises(LatticeError):
        t444.face_state(10_000)


def test_json_and_dot(t444):
    d = t444.to_json_dict()
    assert len(d["vertices"]) == 64 and len(d["edges"]) == 192 and len(d["faces"]) == 192
    dot = t444.to_dot()
    assert dot.count(" -- ") == 192
    assert dot.count("[label=") == 64
    assert t444.line_graph_dot().count(" -- ") == 192 * 10 // 2
