"""Acceptance suite: one test per criterion, each with its tolerance and time limit.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed at the end of the session.
"""

import math
import sys
import time

import numpy as np
import pytest

from flatband import bounds
from flatband.decomp import (
    classify_2d_packing,
    count_decompositions,
    enumerate_2d_packings,
    enumerate_decompositions,
    plane_slice,
    rotatable_columns,
    rotate_column,
    tower_decomposition,
    verify_decomposition,
    vertex_axis_profile,
)
from flatband.exactalg import (
    block_permanent,
    face_span_rank,
    flat_band_multiplicity,
    hopping_spectrum,
    kernel_dimension,
    naive_permanent,
    permanent,
)
from flatband.lattice import build_torus, hopping_matrix, incidence_matrix, vertex_cliques, is_clique
from flatband.manybody import (
    apply_hamiltonian,
    column_gram_check,
    dilution_entropy,
    gram_rank,
    pair_wavefunction,
    rotated_family,
    two_boson_zero_dim,
    zero_mode_vectors,
)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_c01_lattice_structure():
    with Timer() as tm:
        t = build_torus((4, 4, 4))
        assert (t.n_vertices, t.n_edges) == (64, 192)
        assert set(t.degrees()) == {6}
        assert {len(n) for n in t.line_graph_neighbors} == {10}
        assert set(np.diag(hopping_matrix(t))) == {2}
        cliques = vertex_cliques(t)
        assert len(cliques) == 64
        assert all(len(c) == 6 and is_clique(t, c) for c in cliques)
    assert tm.elapsed < 1.0


def test_c02_flat_band_kernel():
    with Timer() as tm:
        for size, kdim in (((4, 4, 4), 129), ((4, 4, 6), 193), ((4, 6, 6), 289)):
            t = build_torus(size)
            assert kernel_dimension(t) == kdim == t.n_edges - t.n_vertices + 1
            assert flat_band_multiplicity(t, 1e-9) == kdim
            assert hopping_spectrum(t).min() >= -1e-9
    assert tm.elapsed < 30.0


def test_c03_face_states():
    t = build_torus((4, 4, 4))
    S = t.face_state_matrix()
    assert not np.any(incidence_matrix(t) @ S)
    modular = face_span_rank(t, method="modular", seed=11)
    bareiss = face_span_rank(t, method="fraction-free")
    assert modular == bareiss
    assert modular < 192 and modular <= 129
    print(f"face span rank at (4,4,4): {modular}")


def test_c04_decompositions():
    for size in ((4, 4, 4), (4, 6, 8), (6, 6, 6)):
        t = build_torus(size)
        d = tower_decomposition(t)
        assert verify_decomposition(t, d)
        for axis in range(3):
            for col in rotatable_columns(t, d, axis):
                r = rotate_column(t, d, col)
                assert verify_decomposition(t, r)
                assert r != d and rotate_column(t, r, col) == d
    # (4,4,4) has fewer than 1,000 decompositions; asking for 1,000 yields the
    # complete list, which must match the independent count
    t = build_torus((4, 4, 4))
    decs = list(enumerate_decompositions(t, 1000))
    total = count_decompositions(t).count
    assert len(decs) == total
    bad = [k for k, d in enumerate(decs) if not vertex_axis_profile(t, d)]
    assert bad == []
    # and a full 1,000 at a larger torus
    t = build_torus((4, 6, 6))
    decs = list(enumerate_decompositions(t, 1000))
    assert len(decs) == 1000
    assert all(vertex_axis_profile(t, d) for d in decs)
    print(f"profile checked on all {total} at (4,4,4) and 1000 at (4,6,6)")


def test_c05_exact_count_bracket():
    lo, hi = bounds.theorem1_lower((4, 4, 4)), bounds.theorem1_upper((4, 4, 4))
    assert (lo, hi) == (48, 3_145_728)
    with Timer() as tm:
        res = count_decompositions(build_torus((4, 4, 4)), max_seconds=30 * 60)
    assert res.count >= lo
    if res.completed:
        assert res.count <= hi
        bounds.assemble_report((4, 4, 4), res)
    assert res.completed
    assert tm.elapsed < 30 * 60
    print(f"omega4(4,4,4) = {res.count} in {tm.elapsed:.2f}s")


def test_c06_layer_theory(decs444):
    with Timer() as tm:
        packs = enumerate_2d_packings(4, 4)
        assert len(packs) <= 4 * (2**2 + 2**2) == 32
        assert [p for p in packs if not classify_2d_packing(p).classified] == []
        t = build_torus((4, 4, 4))
        assert len(decs444) == 200
        for d in decs444:
            for plane in ("XY", "YZ", "ZX"):
                for layer in range(4):
                    p = plane_slice(t, d, plane, layer)
                    assert p.is_valid()
                    assert classify_2d_packing(p).classified
    assert tm.elapsed < 60.0


def test_c07_permanent_engine():
    rng = np.random.default_rng(2024)
    for k in range(100):
        n = k % 6 + 1
        m = rng.integers(-9, 10, (n, n))
        assert permanent(m) == naive_permanent(m)
    for k in range(50):
        n = 2 + k % 11
        sizes = []
        while sum(sizes) < n:
            sizes.append(int(rng.integers(1, n - sum(sizes) + 1)))
        m = np.zeros((n, n), dtype=np.int64)
        at = 0
        for s in sizes:
            m[at : at + s, at : at + s] = rng.integers(-4, 5, (s, s))
            at += s
        m = m[rng.permutation(n)][:, rng.permutation(n)]
        assert block_permanent(m) == permanent(m)


def test_c08_column_gram():
    with Timer() as tm:
        for L in (4, 6, 8):
            rep = column_gram_check(L)
            assert rep.self_overlap_up == rep.self_overlap_down == 4 ** (2 * L)
            assert abs(rep.cross_overlap) < 4 ** (2 * L)
            assert rep.det > 0
    assert tm.elapsed < 10.0


def test_c09_rotated_family_rank():
    with Timer() as tm:
        for size, expected in (((4, 4, 4), 16), ((4, 4, 6), 64)):
            t = build_torus(size)
            fam = rotated_family(t)
            assert expected == bounds.theorem2_lower(size) == len(fam)
            assert gram_rank(t, fam) == expected
    assert tm.elapsed < 600.0


def test_c10_two_boson_zero_modes():
    with Timer() as tm:
        t = build_torus((4, 4, 4))
        res = two_boson_zero_dim(t, seed=5)
        assert res.n_pairs == 8385 and len(res.constraint) == 192
        assert res.rank == res.rank_check
        assert res.dimension == 8385 - res.rank
        rng = np.random.default_rng(10)
        U_site = [int(u) for u in rng.integers(1, 100, t.n_edges)]
        vecs = zero_mode_vectors(res, 10, seed=10)
        assert len(vecs) == 10
        for v in vecs:
            psi = pair_wavefunction(res, v)
            assert any(psi.ravel())
            assert not any(apply_hamiltonian(t, psi, U_site).ravel())
    assert tm.elapsed < 600.0
    print(f"two-boson zero-energy dimension at (4,4,4): {res.dimension}")


def test_c11_dilution_bound():
    rep = dilution_entropy(48, 24)
    assert rep.count == math.comb(48, 24)
    assert abs(rep.bound - math.log(2) / 4) <= 1e-12
    for N in (0, 48):
        edge = dilution_entropy(48, N)
        assert edge.count == 1 and edge.bound == 0


def test_c12_asymptotics_not_reproduced():
    # the asymptotic constants are unspecified; the exact brackets above stand in
    pytest.skip("asymptotic statement, replaced by the finite-size checks c01-c11")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
