"""4-cycle decompositions of the cubic torus.

A decomposition is a set of face ids covering every edge exactly once.  This
module builds the periodic tower decomposition, rotates columns, counts and
enumerates decompositions by exact cover (items = edges, options = faces),
and analyses single planes as dense 2x2 packings of a 2-D torus.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

from .lattice import PLANES, CubicTorus, LatticeError, build_torus, plane_axes, plane_index, normal_axis


class RotationError(ValueError):
    """The column is not in one of its two rotatable states."""


class PackingError(ValueError):
    pass


# -- decompositions ------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    faces: frozenset[int]

    def __init__(self, faces):
        object.__setattr__(self, "faces", frozenset(int(f) for f in faces))

    def __len__(self):
        return len(self.faces)

    def __iter__(self):
        return iter(sorted(self.faces))

    def __contains__(self, fid):
        return fid in self.faces

    def sorted_ids(self) -> list[int]:
        return sorted(self.faces)

    def to_json(self) -> str:
        return json.dumps({"faces": self.sorted_ids()})

    @classmethod
    def from_json(cls, text: str) -> "Decomposition":
        return cls(json.loads(text)["faces"])


@dataclass
class VerificationReport:
    valid: bool
    n_faces: int
    uncovered: list[int] = field(default_factory=list)
    overcovered: list[int] = field(default_factory=list)
    invalid_faces: list[int] = field(default_factory=list)

    def __bool__(self):
        return self.valid


def verify_decomposition(torus: CubicTorus, d) -> VerificationReport:
    faces = sorted(d.faces if isinstance(d, Decomposition) else set(d))
    bad = [f for f in faces if not 0 <= f < torus.n_faces]
    cover = Counter()
    for f in faces:
        if 0 <= f < torus.n_faces:
            cover.update(int(e) for e in torus.face_edges[f])
    uncovered = [e for e in range(torus.n_edges) if cover[e] == 0]
    over = sorted(e for e, c in cover.items() if c > 1)
    return VerificationReport(not (uncovered or over or bad), len(faces), uncovered, over, bad)


@dataclass
class ProfileReport:
    ok: bool
    n_vertices: int
    violations: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def vertex_axis_profile(torus: CubicTorus, d) -> ProfileReport:
    """Count, per vertex, the faces of each plane orientation that touch it.

    A vertex passes when it lies on exactly one XY, one YZ and one ZX face.
    """
    faces = d.faces if isinstance(d, Decomposition) else set(d)
    counts = [[0, 0, 0] for _ in range(torus.n_vertices)]
    for f in faces:
        for v in torus.face_vertices[f]:
            counts[v][f % 3] += 1
    violations = {v: tuple(c) for v, c in enumerate(counts) if c != [1, 1, 1]}
    return ProfileReport(not violations, torus.n_vertices, violations)


_TOWER_PARITY = {0: (0, 0), 1: (1, 0), 2: (1, 1)}


def tower_decomposition(torus: CubicTorus, offset=(0, 0, 0)) -> Decomposition:
    """Three interwoven sets of towers, periodic with period two in every axis.

    Plane ``p`` contributes the faces whose anchor has fixed parities along
    the two in-plane axes; ``offset`` translates the whole pattern.
    """
    faces = []
    for v in range(torus.n_vertices):
        c = torus.coords[v]
        for p in range(3):
            a1, a2 = plane_axes(p)
            want1, want2 = _TOWER_PARITY[p]
            if (c[a1] - offset[a1]) % 2 == want1 and (c[a2] - offset[a2]) % 2 == want2:
                faces.append(3 * v + p)
    return Decomposition(faces)


def translate(torus: CubicTorus, d: Decomposition, shift) -> Decomposition:
    out = []
    for f in d.faces:
        c = torus.coords[f // 3] + shift
        out.append(3 * torus.vertex_id(c) + f % 3)
    return Decomposition(out)


# -- columns -------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Column:
    """Square prism of faces wrapping the torus along ``axis``.

    ``anchor`` holds the prism's lower corner on the transverse axes
    ``(axis + 1) % 3`` and ``(axis + 2) % 3``.  At level ``i`` the walls are
    ``a`` (low second transverse coordinate), ``b`` (high first), ``c`` (high
    second) and ``d`` (low first), in cyclic order around the prism.
    """

    axis: int
    anchor: tuple[int, int]

    def walls(self, torus: CubicTorus) -> list[tuple[int, int, int, int]]:
        k = self.axis
        p, q = (k + 1) % 3, (k + 2) % 3
        u, v = self.anchor
        out = []
        for i in range(torus.extents[k]):
            def fid(dp, dq, plane):
                c = [0, 0, 0]
                c[k], c[p], c[q] = i, u + dp, v + dq
                return 3 * torus.vertex_id(c) + plane

            out.append((fid(0, 0, k), fid(1, 0, q), fid(0, 1, k), fid(0, 0, q)))
        return out

    def pattern(self, torus: CubicTorus, which: str) -> frozenset[int]:
        """``"up"``: a, c at even levels and b, d at odd levels; ``"down"`` swaps."""
        flip = {"up": 0, "down": 1}[which]
        out = []
        for i, (a, b, c, d) in enumerate(self.walls(torus)):
            out += (a, c) if (i + flip) % 2 == 0 else (b, d)
        return frozenset(out)

    def faces(self, torus: CubicTorus) -> frozenset[int]:
        return frozenset(f for w in self.walls(torus) for f in w)


def column_state(torus: CubicTorus, d: Decomposition, col: Column) -> str | None:
    up, down = col.pattern(torus, "up"), col.pattern(torus, "down")
    if up <= d.faces and not down & d.faces:
        return "up"
    if down <= d.faces and not up & d.faces:
        return "down"
    return None


def rotate_column(torus: CubicTorus, d: Decomposition, col: Column) -> Decomposition:
    state = column_state(torus, d, col)
    if state is None:
        raise RotationError(f"column {col} is not in a rotatable state")
    up, down = col.pattern(torus, "up"), col.pattern(torus, "down")
    if state == "up":
        return Decomposition((d.faces - up) | down)
    return Decomposition((d.faces - down) | up)


def rotatable_columns(torus: CubicTorus, d: Decomposition, axis: int) -> list[Column]:
    ext = torus.extents
    p, q = (axis + 1) % 3, (axis + 2) % 3
    cols = []
    for u in range(ext[p]):
        for v in range(ext[q]):
            col = Column(axis, (u, v))
            if column_state(torus, d, col) is not None:
                cols.append(col)
    return cols


def rotation_closure(torus: CubicTorus, seeds, max_size: int = 10**6) -> set[Decomposition]:
    """All decompositions reachable from ``seeds`` by single column rotations."""
    seen = set(seeds)
    frontier = list(seen)
    while frontier:
        nxt = []
        for d in frontier:
            for axis in range(3):
                for col in rotatable_columns(torus, d, axis):
                    r = rotate_column(torus, d, col)
                    if r not in seen:
                        seen.add(r)
                        nxt.append(r)
                        if len(seen) > max_size:
                            raise RuntimeError("rotation closure exceeds max_size")
        frontier = nxt
    return seen


# -- exact cover ---------------------------------------------------------------


@dataclass
class CountResult:
    spec: str
    count: int
    nodes: int
    seconds: float
    completed: bool

    CSV_FIELDS = ("spec", "count", "nodes", "seconds", "completed")

    def as_row(self) -> dict:
        return {
            "spec": self.spec,
            "count": str(self.count),
            "nodes": self.nodes,
            "seconds": round(self.seconds, 6),
            "completed": str(self.completed).lower(),
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerow(self.as_row())
        return buf.getvalue()


class BudgetExhausted(Exception):
    pass


class ExactCover:
    """Algorithm X on dict-of-sets columns.

    The item branched on is the one with fewest remaining options, ties broken
    by the smallest item; options are tried in increasing order.
    """

    def __init__(self, options: dict[int, list[int]], items=None):
        self.Y = {o: list(its) for o, its in options.items()}
        if items is None:
            items = sorted({i for its in self.Y.values() for i in its})
        self.X: dict[int, set[int]] = {i: set() for i in items}
        for o, its in self.Y.items():
            for i in its:
                self.X[i].add(o)
        self.nodes = 0
        self.max_nodes = None
        self.deadline = None

    def select(self, r):
        X, Y = self.X, self.Y
        cols = []
        for j in Y[r]:
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].discard(i)
            cols.append(X.pop(j))
        return cols

    def deselect(self, r, cols):
        X, Y = self.X, self.Y
        for j in reversed(Y[r]):
            X[j] = cols.pop()
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].add(i)

    def _tick(self):
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise BudgetExhausted
        if self.deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self.deadline:
            raise BudgetExhausted

    def _branch_item(self):
        X = self.X
        return min(X, key=lambda c: (len(X[c]), c))

    def count(self, state: list | None = None) -> int:
        """Number of exact covers; ``state[0]`` accumulates the running total."""
        if state is None:
            state = [0]
        self._tick()
        if not self.X:
            state[0] += 1
            return 1
        c = self._branch_item()
        total = 0
        for r in sorted(self.X[c]):
            cols = self.select(r)
            total += self.count(state)
            self.deselect(r, cols)
        return total

    def solutions(self, partial: list | None = None) -> Iterator[list[int]]:
        if partial is None:
            partial = []
        self._tick()
        if not self.X:
            yield list(partial)
            return
        c = self._branch_item()
        for r in sorted(self.X[c]):
            partial.append(r)
            cols = self.select(r)
            yield from self.solutions(partial)
            self.deselect(r, cols)
            partial.pop()


def face_cover_problem(torus: CubicTorus) -> ExactCover:
    options = {f: [int(e) for e in torus.face_edges[f]] for f in range(torus.n_faces)}
    return ExactCover(options, range(torus.n_edges))


def _count_subtree(args):
    extents, first, max_nodes, deadline = args
    torus = build_torus(extents)
    ec = face_cover_problem(torus)
    ec.max_nodes = max_nodes
    ec.deadline = deadline
    ec.select(first)
    state = [0]
    try:
        ec.count(state)
        return state[0], ec.nodes, True
    except BudgetExhausted:
        return state[0], ec.nodes, False


def count_decompositions(
    torus: CubicTorus,
    max_nodes: int | None = None,
    max_seconds: float | None = None,
    threads: int = 1,
) -> CountResult:
    """Exact number of 4-cycle decompositions, or a partial count on budget exhaustion.

    With ``threads > 1`` the subtrees below the first branching item are
    counted in separate processes; the total is the same exact sum.
    """
    t0 = time.monotonic()
    deadline = t0 + max_seconds if max_seconds is not None else None
    spec = str(torus.spec)
    if threads > 1:
        ec = face_cover_problem(torus)
        first = sorted(ec.X[ec._branch_item()])
        jobs = [(torus.extents, r, max_nodes, deadline) for r in first]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_count_subtree, jobs))
        return CountResult(
            spec,
            sum(p[0] for p in parts),
            1 + sum(p[1] for p in parts),
            time.monotonic() - t0,
            all(p[2] for p in parts),
        )
    ec = face_cover_problem(torus)
    ec.max_nodes = max_nodes
    ec.deadline = deadline
    state = [0]
    try:
        ec.count(state)
        completed = True
    except BudgetExhausted:
        completed = False
    return CountResult(spec, state[0], ec.nodes, time.monotonic() - t0, completed)


def enumerate_decompositions(torus: CubicTorus, limit: int | None = None) -> Iterator[Decomposition]:
    """Decompositions in the deterministic depth-first order of the solver."""
    if limit is not None and limit <= 0:
        return
    ec = face_cover_problem(torus)
    for k, sol in enumerate(ec.solutions(), start=1):
        yield Decomposition(sol)
        if limit is not None and k >= limit:
            return


# -- planes as 2-D packings ----------------------------------------------------


@dataclass(frozen=True)
class Packing2D:
    """Anchors ``(u, v)`` of unit squares on an ``La x Lb`` torus of vertices.

    Square ``(u, v)`` occupies the four vertices ``(u+du, v+dv)``, du, dv in {0, 1}.
    """

    extents: tuple[int, int]
    anchors: frozenset[tuple[int, int]]

    def __init__(self, extents, anchors):
        object.__setattr__(self, "extents", (int(extents[0]), int(extents[1])))
        object.__setattr__(self, "anchors", frozenset((int(u), int(v)) for u, v in anchors))

    def occupancy(self) -> Counter:
        La, Lb = self.extents
        occ = Counter()
        for u, v in self.anchors:
            for du in (0, 1):
                for dv in (0, 1):
                    occ[((u + du) % La, (v + dv) % Lb)] += 1
        return occ

    def is_valid(self) -> bool:
        """Every vertex covered by exactly one square (hence no two squares touch)."""
        La, Lb = self.extents
        occ = self.occupancy()
        return len(self.anchors) * 4 == La * Lb and all(
            occ[(u, v)] == 1 for u in range(La) for v in range(Lb)
        )

    def has_moore_exclusion(self) -> bool:
        La, Lb = self.extents
        for (u1, v1), (u2, v2) in itertools.combinations(self.anchors, 2):
            du = min((u1 - u2) % La, (u2 - u1) % La)
            dv = min((v1 - v2) % Lb, (v2 - v1) % Lb)
            if du <= 1 and dv <= 1:
                return False
        return True

    def to_ascii(self) -> str:
        """Rows are ``v`` (top row v = Lb-1), columns ``u``; squares are lettered."""
        La, Lb = self.extents
        label = {}
        for k, a in enumerate(sorted(self.anchors)):
            ch = chr(ord("A") + k % 26)
            u, v = a
            for du in (0, 1):
                for dv in (0, 1):
                    label[((u + du) % La, (v + dv) % Lb)] = ch
        lines = []
        for v in reversed(range(Lb)):
            lines.append(" ".join(label.get((u, v), ".") for u in range(La)))
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {"extents": list(self.extents), "anchors": [list(a) for a in sorted(self.anchors)]}

    @classmethod
    def from_json_dict(cls, obj) -> "Packing2D":
        return cls(obj["extents"], [tuple(a) for a in obj["anchors"]])


def plane_slice(torus: CubicTorus, d: Decomposition, plane, layer: int) -> Packing2D:
    p = plane_index(plane)
    a1, a2 = plane_axes(p)
    n = normal_axis(p)
    if not 0 <= layer < torus.extents[n]:
        raise LatticeError(f"layer {layer} out of range for plane {PLANES[p]}")
    anchors = []
    for f in d.faces:
        if f % 3 == p:
            c = torus.coords[f // 3]
            if c[n] == layer:
                anchors.append((c[a1], c[a2]))
    return Packing2D((torus.extents[a1], torus.extents[a2]), anchors)


def enumerate_2d_packings(La: int, Lb: int, max_sites: int = 1024) -> list[Packing2D]:
    """All perfect vertex packings of the ``La x Lb`` torus by unit squares."""
    for n in (La, Lb):
        if n < 4 or n % 2:
            raise PackingError(f"extent must be even ≥ 4 (got {n})")
    if La * Lb > max_sites:
        raise PackingError(f"{La}x{Lb} torus exceeds the enumeration cap of {max_sites} sites")

    def site(u, v):
        return (u % La) * Lb + (v % Lb)

    options = {
        site(u, v): [site(u + du, v + dv) for du in (0, 1) for dv in (0, 1)]
        for u in range(La)
        for v in range(Lb)
    }
    ec = ExactCover(options, range(La * Lb))
    out = []
    for sol in ec.solutions():
        out.append(Packing2D((La, Lb), [divmod(s, Lb) for s in sol]))
    out.sort(key=lambda p: sorted(p.anchors))
    return out


@dataclass(frozen=True)
class Classification:
    """Witness that a packing is a regular one with shifted strips.

    ``base`` is the anchor parity ``(u0, v0)`` of the regular configuration.
    ``kind`` is ``"regular"``, ``"row-shift"`` (strips of fixed v, shifted in u),
    ``"column-shift"`` (strips of fixed u, shifted in v) or ``"unclassifiable"``.
    ``shifts[k]`` says whether strip ``k`` is displaced by one site.
    """

    kind: str
    base: tuple[int, int] | None = None
    shifts: tuple[int, ...] = ()

    @property
    def classified(self) -> bool:
        return self.kind != "unclassifiable"

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "base": list(self.base) if self.base else None, "shifts": list(self.shifts)}


def _strip_shifts(anchors, La, Lb, strip_axis):
    """Shifts if all strips run along the other axis with uniform parity, else None."""
    along = 1 - strip_axis
    L_strip = (La, Lb)[strip_axis]
    L_along = (La, Lb)[along]
    levels = {a[strip_axis] for a in anchors}
    if len({lv % 2 for lv in levels}) != 1 or len(levels) != L_strip // 2:
        return None
    base_level = min(levels)
    parities = []
    for lv in sorted(levels):
        row = [a[along] for a in anchors if a[strip_axis] == lv]
        if len(row) != L_along // 2 or len({x % 2 for x in row}) != 1:
            return None
        parities.append(row[0] % 2)
    return base_level % 2, parities


def classify_2d_packing(p: Packing2D) -> Classification:
    if not p.is_valid():
        return Classification("unclassifiable")
    La, Lb = p.extents
    rows = _strip_shifts(p.anchors, La, Lb, strip_axis=1)
    cols = _strip_shifts(p.anchors, La, Lb, strip_axis=0)
    if rows is not None:
        v0, par = rows
        shifts = tuple(x ^ par[0] for x in par)
        if not any(shifts):
            return Classification("regular", (par[0], v0), tuple(0 for _ in par))
        return Classification("row-shift", (par[0], v0), shifts)
    if cols is not None:
        u0, par = cols
        shifts = tuple(x ^ par[0] for x in par)
        return Classification("column-shift", (u0, par[0]), shifts)
    return Classification("unclassifiable")


def classify_decomposition_slices(torus: CubicTorus, d: Decomposition):
    """Classify every plane slice; yields ``(plane, layer, packing, classification)``."""
    for p in range(3):
        for layer in range(torus.extents[normal_axis(p)]):
            pk = plane_slice(torus, d, p, layer)
            yield PLANES[p], layer, pk, classify_2d_packing(pk)
