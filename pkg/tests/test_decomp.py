import itertools
import random

import pytest

from flatband.decomp import (
    Column,
    Decomposition,
    ExactCover,
    Packing2D,
    PackingError,
    RotationError,
    classify_2d_packing,
    count_decompositions,
    enumerate_2d_packings,
    enumerate_decompositions,
    plane_slice,
    rotatable_columns,
    rotate_column,
    rotation_closure,
    tower_decomposition,
    translate,
    verify_decomposition,
    vertex_axis_profile,
)
from flatband.lattice import build_torus


def count_by_first_edge(torus):
    """Independent oracle: plain backtracking on bitmasks, always covering the lowest free edge."""
    masks = [sum(1 << int(e) for e in torus.face_edges[f]) for f in range(torus.n_faces)]
    by_edge = [[int(f) for f in torus.edge_faces[e]] for e in range(torus.n_edges)]
    full = (1 << torus.n_edges) - 1

    def rec(covered):
        if covered == full:
            return 1
        free = ~covered & full
        e = (free & -free).bit_length() - 1
        return sum(rec(covered | masks[f]) for f in by_edge[e] if not masks[f] & covered)

    return rec(0)


def brute_force_packings(La, Lb):
    anchors = [(u, v) for u in range(La) for v in range(Lb)]
    out = set()
    for combo in itertools.combinations(anchors, La * Lb // 4):
        p = Packing2D((La, Lb), combo)
        if p.is_valid():
            out.add(p)
    return out


@pytest.mark.parametrize("size", [(4, 4, 4), (4, 6, 8), (6, 6, 6)])
def test_tower_valid(size):
    t = build_torus(size)
    d = tower_decomposition(t)
    assert len(d) == t.n_edges // 4
    assert verify_decomposition(t, d)
    assert vertex_axis_profile(t, d)


def test_tower_periodic(t444):
    d = tower_decomposition(t444)
    for axis in range(3):
        shift = [0, 0, 0]
        shift[axis] = 2
        assert translate(t444, d, shift) == d
    assert tower_decomposition(t444, (1, 0, 0)) != d


def test_verify_reports_defects(t444):
    d = tower_decomposition(t444)
    f = min(d.faces)
    missing = verify_decomposition(t444, Decomposition(d.faces - {f}))
    assert not missing and len(missing.uncovered) == 4 and not missing.overcovered
    extra = next(g for g in range(t444.n_faces) if g not in d.faces)
    over = verify_decomposition(t444, Decomposition(d.faces | {extra}))
    assert not over and len(over.overcovered) == 4 and not over.uncovered


def test_diagonal_pair_flagged(t444):
    f = t444.face_id((0, 0, 0), "XY")
    g = t444.face_id((1, 1, 0), "XY")
    rep = vertex_axis_profile(t444, {f, g})
    shared = t444.vertex_id((1, 1, 0))
    assert not rep
    assert rep.violations[shared][0] == 2


def test_rotation(t444):
    d = tower_decomposition(t444)
    for axis in range(3):
        cols = rotatable_columns(t444, d, axis)
        assert len(cols) == 4
        for col in cols:
            r = rotate_column(t444, d, col)
            assert verify_decomposition(t444, r)
            assert len(d.faces - r.faces) == 2 * t444.extents[axis]
            assert rotate_column(t444, r, col) == d


def test_rotations_commute(t444):
    d = tower_decomposition(t444)
    c1, c2 = rotatable_columns(t444, d, 2)[:2]
    a = rotate_column(t444, rotate_column(t444, d, c1), c2)
    b = rotate_column(t444, rotate_column(t444, d, c2), c1)
    assert a == b and verify_decomposition(t444, a)


def test_rotation_precondition(t444):
    d = tower_decomposition(t444)
    with pytest.raises(RotationError):
        rotate_column(t444, d, Column(2, (0, 0)))


def test_count_444_matches_oracles(t444):
    res = count_decompositions(t444)
    assert res.completed
    assert res.count == count_by_first_edge(t444) == 200
    assert 48 <= res.count <= 3_145_728
    seeds = [tower_decomposition(t444, o) for o in itertools.product((0, 1), repeat=3)]
    assert res.count >= len(rotation_closure(t444, seeds))


def test_count_independent_of_numbering(t444):
    rng = random.Random(7)
    edge_perm = list(range(t444.n_edges))
    rng.shuffle(edge_perm)
    face_perm = list(range(t444.n_faces))
    rng.shuffle(face_perm)
    options = {face_perm[f]: [edge_perm[int(e)] for e in t444.face_edges[f]] for f in range(t444.n_faces)}
    assert ExactCover(options).count() == 200


def test_count_threads(t444):
    assert count_decompositions(t444, threads=2).count == 200


def test_count_budget():
    t = build_torus((4, 4, 8))
    res = count_decompositions(t, max_nodes=500)
    assert not res.completed and res.count < 6344
    assert res.to_csv().splitlines()[0] == "spec,count,nodes,seconds,completed"


def test_enumerate(t444, decs444):
    first = list(enumerate_decompositions(t444, 100))
    assert len(first) == 100 == len(set(first))
    assert first == decs444[:100]
    assert len(decs444) == 200 == len(set(decs444))
    for d in decs444:
        assert verify_decomposition(t444, d)
        assert vertex_axis_profile(t444, d)
    assert list(enumerate_decompositions(t444, 0)) == []


def test_decomposition_json_roundtrip(decs444):
    d = decs444[3]
    assert Decomposition.from_json(d.to_json()) == d


def test_plane_slice_tower(t444):
    d = tower_decomposition(t444)
    p = plane_slice(t444, d, "XY", 0)
    assert p.is_valid() and p.has_moore_exclusion()
    assert len(p.anchors) == 4
    assert classify_2d_packing(p).kind == "regular"
    assert Packing2D.from_json_dict(p.to_json_dict()) == p


@pytest.mark.parametrize("La,Lb,expected", [(4, 4, 12), (4, 6, 20)])
def test_packings_match_brute_force(La, Lb, expected):
    packs = enumerate_2d_packings(La, Lb)
    assert set(packs) == brute_force_packings(La, Lb)
    assert len(packs) == expected <= 4 * (2 ** (La // 2) + 2 ** (Lb // 2))
    for p in packs:
        assert p.is_valid() and p.has_moore_exclusion()
        assert classify_2d_packing(p).classified


def test_packing_counts_larger():
    for La, Lb in [(6, 6), (6, 8), (8, 8)]:
        packs = enumerate_2d_packings(La, Lb)
        assert all(classify_2d_packing(p).classified for p in packs)
        assert len(packs) <= 4 * (2 ** (La // 2) + 2 ** (Lb // 2))


def test_packing_rejects_bad_size():
    with pytest.raises(PackingError):
        enumerate_2d_packings(4, 5)
    with pytest.raises(PackingError):
        enumerate_2d_packings(64, 64)


def test_classify_witnesses():
    regular = Packing2D((4, 4), [(0, 0), (2, 0), (0, 2), (2, 2)])
    c = classify_2d_packing(regular)
    assert c.kind == "regular" and c.base == (0, 0) and not any(c.shifts)
    # column u in {2, 3} slid up by one site
    col_shift = Packing2D((4, 4), [(0, 0), (0, 2), (2, 1), (2, 3)])
    c = classify_2d_packing(col_shift)
    assert c.kind == "column-shift" and c.shifts == (0, 1)
    row_shift = Packing2D((6, 4), [(0, 0), (2, 0), (4, 0), (1, 2), (3, 2), (5, 2)])
    c = classify_2d_packing(row_shift)
    assert c.kind == "row-shift" and c.shifts == (0, 1)
    broken = Packing2D((4, 4), [(0, 0), (1, 1)])
    assert classify_2d_packing(broken).kind == "unclassifiable"


def test_slices_of_enumerated_classify(t444, decs444):
    for d in decs444[:50]:
        for plane, ext in (("XY", 4), ("YZ", 4), ("ZX", 4)):
            for layer in range(ext):
                p = plane_slice(t444, d, plane, layer)
                assert p.is_valid()
                assert classify_2d_packing(p).classified
