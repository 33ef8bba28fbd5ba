"""Exact integer linear algebra: ranks, kernels and permanents.

Matrices are numpy arrays with an integer (or ``object``) dtype, scipy sparse
matrices, nested lists, or lists of ``{column: value}`` row dicts.  Nothing
of record is computed in floating point; :func:`flat_band_multiplicity` is a
cross-check only.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .lattice import CubicTorus, hopping_matrix, incidence_matrix

PERMANENT_CAP = 30
RYSER_BLOCK_LIMIT = 16
MAX_DP_STATES = 1 << 20
PRIME_BITS = 61


class CapExceeded(ValueError):
    """A permanent was requested beyond the configured size or work cap."""


class EigenCheckError(RuntimeError):
    pass


@dataclass(frozen=True)
class RankResult:
    rank: int
    method: str
    primes: tuple[int, ...] = field(default=())


# -- conversions ---------------------------------------------------------------


def _shape(m) -> tuple[int, int]:
    if isinstance(m, list) and (not m or isinstance(m[0], dict)):
        ncols = max((max(r) + 1 for r in m if r), default=0)
        return len(m), ncols
    return tuple(np.shape(m))


def sparse_rows(m) -> list[dict[int, int]]:
    """Row dicts ``{col: value}`` holding only the nonzero entries."""
    if isinstance(m, list) and (not m or isinstance(m[0], dict)):
        return [{int(c): int(v) for c, v in r.items() if v} for r in m]
    if sparse.issparse(m):
        csr = sparse.csr_matrix(m)
        rows = []
        for i in range(csr.shape[0]):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            rows.append({int(c): int(v) for c, v in zip(csr.indices[lo:hi], csr.data[lo:hi]) if v})
        return rows
    a = np.asarray(m, dtype=object)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return [{j: int(v) for j, v in enumerate(row) if v} for row in a]


def dense_lists(m) -> list[list[int]]:
    if isinstance(m, list) and (not m or isinstance(m[0], dict)):
        _, n = _shape(m)
        return [[int(r.get(j, 0)) for j in range(n)] for r in m]
    if sparse.issparse(m):
        m = m.toarray()
    return [[int(v) for v in row] for row in np.asarray(m, dtype=object)]


def to_json_matrix(m) -> dict:
    """Row-major JSON form with big integers written as decimal strings."""
    rows = dense_lists(m)
    return {
        "rows": len(rows),
        "cols": len(rows[0]) if rows else _shape(m)[1],
        "data": [[str(v) for v in r] for r in rows],
    }


def from_json_matrix(obj: dict) -> np.ndarray:
    out = np.zeros((obj["rows"], obj["cols"]), dtype=object)
    for i, row in enumerate(obj["data"]):
        for j, v in enumerate(row):
            out[i, j] = int(v)
    return out


# -- rank ----------------------------------------------------------------------


def random_primes(k: int = 2, rng: random.Random | None = None) -> list[int]:
    """``k`` distinct random primes in ``(2**60, 2**61)``."""
    rng = rng or random.Random()
    out: list[int] = []
    while len(out) < k:
        p = sympy.nextprime(rng.randrange(1 << (PRIME_BITS - 1), 1 << PRIME_BITS))
        if p < (1 << PRIME_BITS) and p not in out:
            out.append(int(p))
    return out


class ModularEchelon:
    """Incrementally maintained row echelon form over GF(p).

    ``add(row)`` reduces the row against the stored pivots and keeps it if it
    is independent, so ``rank`` is always the rank of the rows seen so far.
    """

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict[int, int]) -> dict[int, int]:
        p = self.p
        r = {c: v % p for c, v in row.items() if v % p}
        pivots = self.pivots
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                return r
            f = r[c]
            for k, v in piv.items():
                nv = (r.get(k, 0) - f * v) % p
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
        return r

    def add(self, row: dict[int, int]) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        c = min(r)
        inv = pow(r[c], -1, self.p)
        self.pivots[c] = {k: v * inv % self.p for k, v in r.items()}
        return True


def rank_mod_p(m, p: int) -> int:
    ech = ModularEchelon(p)
    for row in sparse_rows(m):
        ech.add(row)
    return ech.rank


def rank_fraction_free(m) -> int:
    """Rank over the rationals by Bareiss fraction-free elimination."""
    a = dense_lists(m)
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        pc = pr[c]
        for i in range(r + 1, nrows):
            row = a[i]
            f = row[c]
            if f:
                for j in range(c + 1, ncols):
                    row[j] = (pc * row[j] - f * pr[j]) // prev
            else:
                for j in range(c + 1, ncols):
                    if row[j]:
                        row[j] = pc * row[j] // prev
            row[c] = 0
        prev = pc
        r += 1
    return r


def exact_rank(m, method: str = "modular", primes=None, seed: int | None = None) -> RankResult:
    """Rank over Q.

    ``method="modular"`` reduces modulo two random 61-bit primes; if they
    disagree the result falls back to fraction-free elimination.  A rank mod
    p never exceeds the rational rank.
    """
    nrows, ncols = _shape(m)
    if nrows * ncols > 10**9:
        raise OverflowError(f"matrix of shape {nrows}x{ncols} is beyond exact-rank capacity")
    if method == "fraction-free":
        return RankResult(rank_fraction_free(m), "fraction-free")
    if method != "modular":
        raise ValueError(f"unknown rank method {method!r}")
    if primes is None:
        primes = random_primes(2, random.Random(seed))
    if len(primes) < 2:
        raise ValueError("modular rank needs at least two primes")
    rows = sparse_rows(m)
    ranks = []
    for p in primes:
        ech = ModularEchelon(p)
        for row in rows:
            ech.add(row)
        ranks.append(ech.rank)
    if len(set(ranks)) == 1:
        return RankResult(ranks[0], "modular", tuple(primes))
    return RankResult(rank_fraction_free(rows), "fraction-free")


def rational_rref(m) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Sparse reduced row echelon form over Q.

    Returns the nonzero reduced rows (each with leading coefficient 1) and
    their pivot columns, in increasing pivot order.
    """
    pivots: dict[int, dict[int, Fraction]] = {}
    for row in sparse_rows(m):
        r = {c: Fraction(v) for c, v in row.items()}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                break
            f = r[c]
            for k, v in piv.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
        if not r:
            continue
        c = min(r)
        lead = r[c]
        r = {k: v / lead for k, v in r.items()}
        pivots[c] = r
    # back-substitution, largest pivot first
    cols = sorted(pivots)
    for c in reversed(cols):
        r = pivots[c]
        for c2 in cols:
            if c2 <= c:
                continue
            f = r.get(c2)
            if f:
                for k, v in pivots[c2].items():
                    nv = r.get(k, 0) - f * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
    return [pivots[c] for c in cols], cols


# -- kernels and the flat band ---------------------------------------------------


def kernel_dimension(torus: CubicTorus, seed: int | None = None) -> int:
    B = incidence_matrix(torus)
    return torus.n_edges - exact_rank(B, seed=seed).rank


def kernel_basis(torus: CubicTorus, seed: int | None = None) -> np.ndarray:
    """Integer basis of kern B built from face states plus winding loops.

    Faces are taken greedily in id order while they add rank; straight loops
    around the three torus directions complete the basis.
    """
    target = kernel_dimension(torus, seed=seed)
    p = random_primes(1, random.Random(seed))[0]
    ech = ModularEchelon(p)
    cols: list[np.ndarray] = []

    def offer(vec: np.ndarray):
        row = {int(e): int(vec[e]) for e in np.flatnonzero(vec)}
        if ech.add(row):
            cols.append(vec)

    for f in range(torus.n_faces):
        if ech.rank == target:
            break
        offer(torus.face_state(f).dense(torus.n_edges))
    for axis in range(3):
        for start in range(torus.n_vertices):
            if ech.rank == target:
                break
            offer(torus.winding_cycle(axis, start))
    if ech.rank != target:
        raise ArithmeticError(f"kernel basis incomplete: {ech.rank} of {target}")
    U = np.stack(cols, axis=1)
    if np.any(incidence_matrix(torus) @ U):
        raise ArithmeticError("kernel basis column not annihilated by B")
    return U


def face_span_rank(torus: CubicTorus, method: str = "modular", seed: int | None = None) -> int:
    return exact_rank(torus.face_state_matrix(), method=method, seed=seed).rank


def hopping_spectrum(torus: CubicTorus) -> np.ndarray:
    return np.linalg.eigvalsh(hopping_matrix(torus).astype(float))


def flat_band_multiplicity(torus: CubicTorus, tol: float = 1e-9) -> int:
    """Number of eigenvalues of T within ``tol`` of zero (floating cross-check)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        w = hopping_spectrum(torus)
    except np.linalg.LinAlgError as exc:
        raise EigenCheckError(f"eigensolver failed: {exc}") from exc
    if w.min() < -tol:
        raise EigenCheckError(f"T has eigenvalue {w.min():.3e} below -tol")
    return int(np.count_nonzero(np.abs(w) <= tol))


# -- permanents ----------------------------------------------------------------


def _square(m) -> list[list[int]]:
    a = dense_lists(m)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("permanent needs a square matrix")
    return a


def permanent(m, cap: int = PERMANENT_CAP) -> int:
    """Ryser's formula with Gray-code subset updates, O(2^n n)."""
    a = _square(m)
    n = len(a)
    if n > cap:
        raise CapExceeded(f"permanent of side {n} exceeds cap {cap}")
    if n == 0:
        return 1
    cols = [list(c) for c in zip(*a)]
    sums = [0] * n
    total = 0
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        col = cols[j]
        if gray >> j & 1:
            sums = [s + c for s, c in zip(sums, col)]
        else:
            sums = [s - c for s, c in zip(sums, col)]
        prod = math.prod(sums)
        if prod:
            total += -prod if gray.bit_count() & 1 else prod
    return -total if n & 1 else total


def _frontier_permanent(rows: list[dict[int, int]], max_states: int) -> int:
    """Permanent of a sparse square block by DP over used-column frontiers."""
    n = len(rows)
    # order rows breadth-first through shared columns to keep the frontier thin
    col_rows = defaultdict(list)
    for i, r in enumerate(rows):
        for c in r:
            col_rows[c].append(i)
    order, seen = [], [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        while queue:
            i = queue.pop(0)
            order.append(i)
            for c in sorted(rows[i]):
                for k in col_rows[c]:
                    if not seen[k]:
                        seen[k] = True
                        queue.append(k)
    last = {}
    for pos, i in enumerate(order):
        for c in rows[i]:
            last[c] = pos
    states = {0: 1}
    for pos, i in enumerate(order):
        new: dict[int, int] = defaultdict(int)
        items = list(rows[i].items())
        for mask, w in states.items():
            for c, v in items:
                bit = 1 << c
                if not mask & bit:
                    new[mask | bit] += w * v
        for c in rows[i]:
            if last[c] == pos:
                bit = 1 << c
                new = {m ^ bit: w for m, w in new.items() if m & bit and w}
        states = {m: w for m, w in new.items() if w}
        if len(states) > max_states:
            raise CapExceeded(f"permanent block of side {n} needs more than {max_states} DP states")
        if not states:
            return 0
    return states.get(0, 0)


def permanent_blocks(rows: list[dict[int, int]], ncols: int):
    """Split a sparse square matrix into components of its bipartite support.

    Yields ``(row_ids, col_ids)`` per component; unmatched sizes mean the
    permanent vanishes.
    """
    nrows = len(rows)
    r_idx, c_idx = [], []
    for i, r in enumerate(rows):
        for c in r:
            r_idx.append(i)
            c_idx.append(nrows + c)
    size = nrows + ncols
    g = sparse.coo_matrix((np.ones(len(r_idx)), (r_idx, c_idx)), shape=(size, size))
    _, labels = connected_components(g, directed=False)
    groups: dict[int, tuple[list, list]] = {}
    for v, lab in enumerate(labels):
        rs, cs = groups.setdefault(int(lab), ([], []))
        (rs if v < nrows else cs).append(v if v < nrows else v - nrows)
    return list(groups.values())


def sparse_block_permanent(
    rows: list[dict[int, int]],
    ncols: int | None = None,
    ryser_limit: int = RYSER_BLOCK_LIMIT,
    max_states: int = MAX_DP_STATES,
) -> int:
    if ncols is None:
        ncols = len(rows)
    if len(rows) != ncols:
        raise ValueError("permanent needs a square matrix")
    if ncols == 0:
        return 1
    result = 1
    blocks = permanent_blocks(rows, ncols)
    blocks.sort(key=lambda b: len(b[0]) + len(b[1]))
    for rs, cs in blocks:
        if len(rs) != len(cs):
            return 0
    for rs, cs in blocks:
        local = {c: k for k, c in enumerate(cs)}
        sub = [{local[c]: v for c, v in rows[i].items()} for i in rs]
        k = len(rs)
        if k == 1:
            val = sub[0][0]
        elif k <= ryser_limit:
            val = permanent([[r.get(j, 0) for j in range(k)] for r in sub], cap=ryser_limit)
        else:
            val = _frontier_permanent(sub, max_states)
        if val == 0:
            return 0
        result *= val
    return result


def block_permanent(m, ryser_limit: int = RYSER_BLOCK_LIMIT, max_states: int = MAX_DP_STATES) -> int:
    """Permanent factored over connected components of the nonzero support."""
    n, k = _shape(m)
    if n != k:
        raise ValueError("permanent needs a square matrix")
    return sparse_block_permanent(sparse_rows(m), k, ryser_limit, max_states)


def naive_permanent(m) -> int:
    """Sum over all permutations; test oracle only."""
    from itertools import permutations

    a = _square(m)
    n = len(a)
    return sum(math.prod(a[i][p[i]] for i in range(n)) for p in permutations(range(n)))
