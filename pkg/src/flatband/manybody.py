"""Bosonic product states built from face states.

A :class:`FaceProductState` puts one boson into each listed face state.  Two
such states overlap by the permanent of their single-particle overlap matrix
(Wick's theorem), evaluated blockwise by :func:`exactalg.sparse_block_permanent`.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import exactalg
from .decomp import Column, Decomposition, enumerate_decompositions, rotatable_columns, rotate_column, tower_decomposition
from .lattice import CubicTorus, TorusSpec, build_torus, hopping_matrix, line_graph_adjacency


class ParticleNumberMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FaceProductState:
    faces: tuple[int, ...]

    def __init__(self, faces):
        fs = tuple(sorted(int(f) for f in faces))
        if not fs:
            raise ValueError("a face product state needs at least one face")
        object.__setattr__(self, "faces", fs)

    @classmethod
    def from_decomposition(cls, d: Decomposition) -> "FaceProductState":
        return cls(d.faces)

    @property
    def n_particles(self) -> int:
        return len(self.faces)


def single_particle_overlap(torus: CubicTorus, f: int, g: int) -> int:
    """Sum over edges of s_f(e) * s_g(e)."""
    sf = dict(zip(torus.face_edges[f].tolist(), torus.face_signs[f].tolist()))
    return sum(sf[e] * s for e, s in zip(torus.face_edges[g].tolist(), torus.face_signs[g].tolist()) if e in sf)


def overlap_rows(torus: CubicTorus, A: FaceProductState, B: FaceProductState) -> list[dict[int, int]]:
    """Sparse single-particle overlap matrix, rows indexed by A's faces."""
    b_index: dict[int, list[tuple[int, int]]] = {}
    for j, g in enumerate(B.faces):
        for e, s in zip(torus.face_edges[g].tolist(), torus.face_signs[g].tolist()):
            b_index.setdefault(e, []).append((j, s))
    rows = []
    for f in A.faces:
        row: dict[int, int] = {}
        for e, s in zip(torus.face_edges[f].tolist(), torus.face_signs[f].tolist()):
            for j, t in b_index.get(e, ()):
                row[j] = row.get(j, 0) + s * t
        rows.append({j: v for j, v in row.items() if v})
    return rows


def state_overlap(torus: CubicTorus, A: FaceProductState, B: FaceProductState, max_states: int = exactalg.MAX_DP_STATES) -> int:
    if A.n_particles != B.n_particles:
        raise ParticleNumberMismatch(f"{A.n_particles} vs {B.n_particles} particles")
    rows = overlap_rows(torus, A, B)
    return exactalg.sparse_block_permanent(rows, B.n_particles, max_states=max_states)


def gram_matrix(torus: CubicTorus, states) -> np.ndarray:
    states = list(states)
    n = len(states)
    if len({s.n_particles for s in states}) > 1:
        raise ParticleNumberMismatch("all states must carry the same particle number")
    G = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            try:
                v = state_overlap(torus, states[i], states[j])
            except exactalg.CapExceeded as exc:
                raise exactalg.CapExceeded(f"overlap of states {i} and {j}: {exc}") from exc
            G[i, j] = G[j, i] = v
    return G


def gram_rank(torus: CubicTorus, states, seed: int | None = None) -> int:
    return exactalg.exact_rank(gram_matrix(torus, states), seed=seed).rank


def gram_is_psd(G: np.ndarray, tol: float = 1e-9) -> bool:
    """Floating cross-check: smallest eigenvalue of the diagonally scaled Gram matrix."""
    d = np.array([float(G[i, i]) for i in range(len(G))])
    if np.any(d <= 0):
        return False
    s = 1.0 / np.sqrt(d)
    scaled = np.array([[float(G[i, j]) * s[i] * s[j] for j in range(len(G))] for i in range(len(G))])
    return bool(np.linalg.eigvalsh(scaled).min() >= -tol)


# -- rotated towers ---------------------------------------------------------------


def rotated_family(torus: CubicTorus, axis: int = 0) -> list[FaceProductState]:
    """Tower decomposition with every subset of its ``axis`` columns rotated.

    The default axis X gives the columns perpendicular to the yz-plane, of
    which there are L2*L3/4, hence 2**(L2*L3/4) states.  State ``k`` rotates
    the columns whose bits are set in ``k`` (columns in sorted order).
    """
    tower = tower_decomposition(torus)
    cols = rotatable_columns(torus, tower, axis)
    out = []
    for mask in range(1 << len(cols)):
        d = tower
        for b, col in enumerate(cols):
            if mask >> b & 1:
                d = rotate_column(torus, d, col)
        out.append(FaceProductState.from_decomposition(d))
    return out


@dataclass
class ColumnGramReport:
    length: int
    self_overlap_up: int
    self_overlap_down: int
    cross_overlap: int
    det: int

    @property
    def self_overlap(self) -> int:
        return self.self_overlap_up

    @property
    def certified(self) -> bool:
        target = 4 ** (2 * self.length)
        return (
            self.self_overlap_up == target
            and self.self_overlap_down == target
            and abs(self.cross_overlap) < target
            and self.det > 0
        )

    def to_json_dict(self) -> dict:
        return {
            "length": self.length,
            "selfOverlap": str(self.self_overlap_up),
            "selfOverlapDown": str(self.self_overlap_down),
            "crossOverlap": str(self.cross_overlap),
            "det": str(self.det),
            "certified": self.certified,
        }


def column_states(torus: CubicTorus, col: Column) -> tuple[FaceProductState, FaceProductState]:
    return (
        FaceProductState(col.pattern(torus, "up")),
        FaceProductState(col.pattern(torus, "down")),
    )


def column_gram_check(length: int) -> ColumnGramReport:
    """Gram matrix of the two rotations of a single column of the given length."""
    if length < 4 or length % 2:
        raise ValueError(f"column length must be even ≥ 4 (got {length})")
    # extents are stored sorted, so the column length lands on the Z axis
    torus = build_torus(TorusSpec(4, 4, length))
    col = Column(2, (0, 0))
    up, down = column_states(torus, col)
    uu = state_overlap(torus, up, up)
    dd = state_overlap(torus, down, down)
    ud = state_overlap(torus, up, down)
    du = state_overlap(torus, down, up)
    if ud != du:
        raise ArithmeticError("Gram matrix is not symmetric")
    return ColumnGramReport(length, uu, dd, ud, uu * dd - ud * du)


# -- span of decomposition states ------------------------------------------------


@dataclass
class SpanRankReport:
    spec: str
    n_states: int
    rank: int
    method: str
    skipped_gram: tuple[int, int, int] | None = None  # (i, j, block side) that ruled out the Gram route

    def to_json_dict(self) -> dict:
        out = {"spec": self.spec, "states": self.n_states, "rank": self.rank, "method": self.method}
        if self.skipped_gram is not None:
            i, j, k = self.skipped_gram
            out["gramSkipped"] = {"pair": [i, j], "blockSide": k}
        return out


def largest_overlap_block(torus: CubicTorus, A: FaceProductState, B: FaceProductState) -> int:
    rows = overlap_rows(torus, A, B)
    return max((len(rs) for rs, _ in exactalg.permanent_blocks(rows, B.n_particles)), default=0)


def first_oversized_pair(torus: CubicTorus, states, block_limit: int):
    for i, A in enumerate(states):
        for j in range(i, len(states)):
            k = largest_overlap_block(torus, A, states[j])
            if k > block_limit:
                return i, j, k
    return None


def evaluation_rank(torus: CubicTorus, states, seed: int | None = None, extra: int = 8) -> int:
    """Certified lower bound on the rank of a set of product states.

    A state is identified with the polynomial prod_f <s_f, x> in the edge
    variables x.  Evaluating all polynomials at ``len(states) + extra`` random
    points modulo a 61-bit prime gives a matrix whose rank never exceeds the
    rank of the states over Q, and equals it with overwhelming probability.
    """
    states = list(states)
    rng = random.Random(seed)
    p = exactalg.random_primes(1, rng)[0]
    edges = torus.face_edges.tolist()
    signs = torus.face_signs.tolist()
    ech = exactalg.ModularEchelon(p)
    for _ in range(len(states) + extra):
        z = [rng.randrange(p) for _ in range(torus.n_edges)]
        lin = [sum(z[e] * s for e, s in zip(edges[f], signs[f])) % p for f in range(torus.n_faces)]
        row = {}
        for a, S in enumerate(states):
            v = 1
            for f in S.faces:
                v = v * lin[f] % p
            row[a] = v
        ech.add(row)
        if ech.rank == len(states):
            break
    return ech.rank


def decomposition_span_rank(
    torus: CubicTorus,
    limit: int,
    method: str = "auto",
    seed: int | None = None,
    block_limit: int = exactalg.RYSER_BLOCK_LIMIT,
) -> SpanRankReport:
    """Rank of the product states of the first ``limit`` enumerated decompositions.

    ``method="gram"`` forms the exact Gram matrix; ``"evaluation"`` uses
    :func:`evaluation_rank`; ``"auto"`` takes the Gram route unless some pair of
    states has an overlap block wider than ``block_limit``, and names that pair.
    """
    states = [FaceProductState.from_decomposition(d) for d in enumerate_decompositions(torus, limit)]
    return span_rank(torus, states, method, seed, block_limit)


def span_rank(torus: CubicTorus, states, method: str = "auto", seed=None, block_limit=exactalg.RYSER_BLOCK_LIMIT):
    states = list(states)
    spec = str(torus.spec)
    skipped = None
    if method == "auto":
        skipped = first_oversized_pair(torus, states, block_limit)
        method = "gram" if skipped is None else "evaluation"
    if method == "gram":
        res = exactalg.exact_rank(gram_matrix(torus, states), seed=seed)
        return SpanRankReport(spec, len(states), res.rank, "gram-" + res.method)
    if method == "evaluation":
        return SpanRankReport(spec, len(states), evaluation_rank(torus, states, seed), "evaluation", skipped)
    raise ValueError(f"unknown span-rank method {method!r}")


# -- two-boson zero modes ------------------------------------------------------------


@dataclass
class TwoBosonResult:
    spec: str
    kernel_dim: int
    n_pairs: int
    rank: int
    rank_check: int | None
    pairs: list[tuple[int, int]] = field(repr=False)
    constraint: list[dict[int, int]] = field(repr=False)
    basis_u: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.n_pairs - self.rank

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec,
            "kernelDim": self.kernel_dim,
            "pairs": self.n_pairs,
            "constraintShape": [len(self.constraint), self.n_pairs],
            "rank": self.rank,
            "dimension": self.dimension,
        }


def two_boson_constraints(U: np.ndarray) -> tuple[list[tuple[int, int]], list[dict[int, int]]]:
    """Rows: sites e; columns: pairs i <= j; entry u_i(e) u_j(e)."""
    d0 = U.shape[1]
    pairs = [(i, j) for i in range(d0) for j in range(i, d0)]
    index = {p: k for k, p in enumerate(pairs)}
    rows = []
    for e in range(U.shape[0]):
        nz = [(int(i), int(U[e, i])) for i in np.flatnonzero(U[e])]
        row = {}
        for a, (i, ui) in enumerate(nz):
            for j, uj in nz[a:]:
                row[index[(i, j)]] = ui * uj
        rows.append(row)
    return pairs, rows


def two_boson_zero_dim(torus: CubicTorus, seed: int | None = None, cross_check: bool = True) -> TwoBosonResult:
    """Dimension of the zero-energy two-boson space.

    The Hamiltonian is a sum of positive semidefinite pieces, so a two-boson
    state has zero energy iff it lies in Sym^2(kern T) and its amplitude on
    every doubly occupied site vanishes.
    """
    U = exactalg.kernel_basis(torus, seed=seed)
    pairs, rows = two_boson_constraints(U)
    rank = exactalg.exact_rank(rows, seed=seed).rank
    check = len(exactalg.rational_rref(rows)[1]) if cross_check else None
    return TwoBosonResult(str(torus.spec), U.shape[1], len(pairs), rank, check, pairs, rows, U)


def zero_mode_vectors(result: TwoBosonResult, count: int, seed: int = 0, nontrivial: bool = True):
    """Integer null vectors of the constraint matrix, one per sampled free pair.

    With ``nontrivial`` the sample avoids pairs whose constraint column is
    zero (such pairs trivially give zero-energy states).
    """
    from fractions import Fraction

    reduced, pivots = exactalg.rational_rref(result.constraint)
    pivot_set = set(pivots)
    touched = {c for r in result.constraint for c in r}
    free = [k for k in range(result.n_pairs) if k not in pivot_set and (k in touched or not nontrivial)]
    rng = random.Random(seed)
    chosen = sorted(rng.sample(free, min(count, len(free))))
    out = []
    for k in chosen:
        vec = {k: Fraction(1)}
        for r, c in zip(reduced, pivots):
            v = r.get(k)
            if v:
                vec[c] = -v
        den = math.lcm(*(v.denominator for v in vec.values()))
        out.append({c: int(v * den) for c, v in vec.items()})
    return out


def pair_wavefunction(result: TwoBosonResult, coeffs: dict[int, int]) -> np.ndarray:
    """Symmetric amplitude Psi(e, e') of sum_k c_k b^dag(u_i) b^dag(u_j)|0>."""
    U = result.basis_u.astype(object)
    n = U.shape[0]
    psi = np.zeros((n, n), dtype=object)
    for k, c in coeffs.items():
        i, j = result.pairs[k]
        ui, uj = U[:, i], U[:, j]
        psi += c * (np.outer(ui, uj) + np.outer(uj, ui))
    return psi


def apply_hamiltonian(torus: CubicTorus, psi: np.ndarray, U_site=None, hopping: str = "T") -> np.ndarray:
    """Two-particle Hubbard Hamiltonian on the symmetric amplitude, exactly.

    ``hopping="T"`` uses B^t B; ``"adjacency"`` uses the line-graph adjacency
    (each particle then has flat-band energy -2).
    """
    h = hopping_matrix(torus) if hopping == "T" else line_graph_adjacency(torus)
    if U_site is None:
        U_site = [1] * torus.n_edges
    bound = max(abs(int(v)) for v in psi.ravel()) * 24 + 4 * max(U_site)
    if bound < 2**40:
        psi = psi.astype(np.int64)
    else:
        h = h.astype(object)
    out = (h @ psi + psi @ h).astype(object)
    for e in range(torus.n_edges):
        out[e, e] += 2 * U_site[e] * psi[e, e]
    return out


# -- dilution -----------------------------------------------------------------


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


@dataclass
class EntropyReport:
    Nc: int
    N: int
    count: int
    density: float
    critical_density: float
    bound: float

    CSV_FIELDS = ("Nc", "N", "count", "density", "critical_density", "bound")

    def to_json_dict(self) -> dict:
        return {
            "Nc": self.Nc,
            "N": self.N,
            "count": str(self.count),
            "density": self.density,
            "criticalDensity": self.critical_density,
            "bound": self.bound,
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.CSV_FIELDS)
        w.writerow([self.Nc, self.N, self.count, repr(self.density), repr(self.critical_density), repr(self.bound)])
        return buf.getvalue()


def dilution_entropy(Nc: int, N: int) -> EntropyReport:
    """Ways to remove bosons from one decomposition state, and the entropy bound.

    The density is N / |E| with |E| = 4 Nc; the per-site bound is h_b(4 rho) / 4.
    """
    if not 0 <= N <= Nc:
        raise ValueError(f"need 0 <= N <= Nc (got N={N}, Nc={Nc})")
    rho = N / (4 * Nc)
    return EntropyReport(Nc, N, math.comb(Nc, N), rho, 0.25, binary_entropy(4 * rho) / 4)
