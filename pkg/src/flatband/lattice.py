"""Cubic torus Q3(L1, L2, L3), its line graph and the signed face states.

Numbering conventions (all deterministic):

* vertex ``(x, y, z)`` has id ``x + L1 * (y + L2 * z)``;
* edge ``3 * v + axis`` joins ``v`` and ``v + e_axis`` (axis 0, 1, 2 = X, Y, Z);
* face ``3 * v + plane`` is the unit square anchored at ``v`` spanned by the
  axes ``plane`` and ``(plane + 1) % 3`` (plane 0, 1, 2 = XY, YZ, ZX).

A face is traversed ``v -> v+e1 -> v+e1+e2 -> v+e2 -> v``.  Every edge is
oriented from its even-parity endpoint to its odd one; the face state carries
``+1`` on edges whose orientation agrees with the traversal and ``-1``
otherwise, so the signs alternate around the square.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

AXES = ("X", "Y", "Z")
PLANES = ("XY", "YZ", "ZX")


class LatticeError(ValueError):
    """Raised for torus extents the construction does not support."""


def plane_index(plane) -> int:
    if isinstance(plane, str):
        try:
            return PLANES.index(plane.upper())
        except ValueError:
            raise LatticeError(f"unknown plane {plane!r}; expected one of {PLANES}") from None
    if plane not in (0, 1, 2):
        raise LatticeError(f"unknown plane index {plane!r}")
    return int(plane)


def plane_axes(plane: int) -> tuple[int, int]:
    """The two in-plane axes of ``plane`` in traversal order."""
    return plane, (plane + 1) % 3


def normal_axis(plane: int) -> int:
    return (plane + 2) % 3


@dataclass(frozen=True)
class TorusSpec:
    """Extents of the torus, stored sorted so that ``L1 <= L2 <= L3``."""

    L1: int
    L2: int
    L3: int

    def __post_init__(self):
        ext = (self.L1, self.L2, self.L3)
        for n in ext:
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
                raise LatticeError(f"extent must be an integer, got {n!r}")
            if n < 4 or n % 2:
                raise LatticeError(f"extent must be even ≥ 4 (got {n})")
        a, b, c = sorted(int(n) for n in ext)
        object.__setattr__(self, "L1", a)
        object.__setattr__(self, "L2", b)
        object.__setattr__(self, "L3", c)

    @classmethod
    def parse(cls, text: str) -> "TorusSpec":
        """Parse ``"4,4,6"`` (also accepts ``x`` as a separator)."""
        parts = text.replace("x", ",").split(",")
        if len(parts) != 3:
            raise LatticeError(f"size must have three extents, got {text!r}")
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise LatticeError(f"size must be integers, got {text!r}") from None
        return cls(*values)

    @property
    def extents(self) -> tuple[int, int, int]:
        return (self.L1, self.L2, self.L3)

    @property
    def n_vertices(self) -> int:
        return self.L1 * self.L2 * self.L3

    def __str__(self) -> str:
        return f"{self.L1},{self.L2},{self.L3}"


@dataclass(frozen=True, order=True)
class Face:
    """A unit square: anchor vertex id plus plane index (0=XY, 1=YZ, 2=ZX)."""

    anchor: int
    plane: int

    @property
    def id(self) -> int:
        return 3 * self.anchor + self.plane

    @classmethod
    def from_id(cls, fid: int) -> "Face":
        return cls(fid // 3, fid % 3)


@dataclass(frozen=True)
class FaceState:
    """Signed kernel vector of one face, stored on its four edges."""

    face: Face
    edges: tuple[int, int, int, int]
    signs: tuple[int, int, int, int]

    def dense(self, n_edges: int) -> np.ndarray:
        v = np.zeros(n_edges, dtype=np.int64)
        v[list(self.edges)] = self.signs
        return v


class CubicTorus:
    """The graph G = C_L1 x C_L2 x C_L3 with precomputed index tables.

    Instances are treated as immutable once built.
    """

    def __init__(self, spec: TorusSpec):
        self.spec = spec
        L = np.array(spec.extents)
        self.extents = spec.extents
        nv = spec.n_vertices
        self.n_vertices = nv
        self.n_edges = 3 * nv
        self.n_faces = 3 * nv

        ids = np.arange(nv)
        x = ids % L[0]
        y = (ids // L[0]) % L[1]
        z = ids // (L[0] * L[1])
        self.coords = np.stack([x, y, z], axis=1)
        self.parity = (x + y + z) % 2

        # shift[axis][v] = v + e_axis
        self.shift = np.empty((3, nv), dtype=np.int64)
        self.shift_back = np.empty((3, nv), dtype=np.int64)
        for ax in range(3):
            c = self.coords.copy()
            c[:, ax] = (c[:, ax] + 1) % L[ax]
            self.shift[ax] = self.vertex_id(c)
            c[:, ax] = (c[:, ax] - 2) % L[ax]
            self.shift_back[ax] = self.vertex_id(c)

        self.edge_ends = np.empty((self.n_edges, 2), dtype=np.int64)
        for ax in range(3):
            self.edge_ends[ax::3, 0] = ids
            self.edge_ends[ax::3, 1] = self.shift[ax]

        self.face_edges = np.empty((self.n_faces, 4), dtype=np.int64)
        self.face_vertices = np.empty((self.n_faces, 4), dtype=np.int64)
        for p in range(3):
            a1, a2 = plane_axes(p)
            v1 = self.shift[a1]
            v2 = self.shift[a2]
            self.face_edges[p::3] = np.stack(
                [3 * ids + a1, 3 * v1 + a2, 3 * v2 + a1, 3 * ids + a2], axis=1
            )
            self.face_vertices[p::3] = np.stack([ids, v1, self.shift[a2][v1], v2], axis=1)
        even = self.parity[self.face_vertices[:, 0]] == 0
        base = np.array([1, -1, 1, -1], dtype=np.int64)
        self.face_signs = np.where(even[:, None], base, -base)

        order = np.argsort(self.face_edges.ravel(), kind="stable")
        self.edge_faces = (order // 4).reshape(self.n_edges, 4)

    # -- coordinates ---------------------------------------------------------

    def vertex_id(self, coords) -> np.ndarray | int:
        c = np.asarray(coords)
        L1, L2, L3 = self.extents
        vid = (c[..., 0] % L1) + L1 * ((c[..., 1] % L2) + L2 * (c[..., 2] % L3))
        return int(vid) if np.ndim(vid) == 0 else vid

    def vertex_coords(self, v: int) -> tuple[int, int, int]:
        return tuple(int(c) for c in self.coords[v])

    def edge_id(self, coords, axis: int) -> int:
        return 3 * self.vertex_id(coords) + axis

    def face_id(self, coords, plane) -> int:
        return 3 * self.vertex_id(coords) + plane_index(plane)

    def face(self, coords, plane) -> Face:
        return Face(self.vertex_id(coords), plane_index(plane))

    def faces_of_edge(self, e: int) -> tuple[int, ...]:
        return tuple(int(f) for f in self.edge_faces[e])

    def face_layer(self, fid: int) -> int:
        """Coordinate of the face along its normal axis."""
        return int(self.coords[fid // 3, normal_axis(fid % 3)])

    # -- graph structure ----------------------------------------------------

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_ends.ravel(), minlength=self.n_vertices)

    def incident_edges(self, v: int) -> list[int]:
        return [3 * v + ax for ax in range(3)] + [
            3 * int(self.shift_back[ax][v]) + ax for ax in range(3)
        ]

    def is_proper_coloring(self) -> bool:
        p = self.parity
        return bool(np.all(p[self.edge_ends[:, 0]] != p[self.edge_ends[:, 1]]))

    @cached_property
    def line_graph_neighbors(self) -> list[list[int]]:
        """Adjacency lists of L(G): edges sharing exactly one endpoint."""
        inc = [self.incident_edges(v) for v in range(self.n_vertices)]
        nbrs = []
        for e in range(self.n_edges):
            a, b = self.edge_ends[e]
            nbrs.append(sorted({f for f in inc[a] + inc[b] if f != e}))
        return nbrs

    def line_graph_edges(self) -> list[tuple[int, int]]:
        return [(e, f) for e, ns in enumerate(self.line_graph_neighbors) for f in ns if e < f]

    # -- face states -------------------------------------------------------

    def enumerate_faces(self) -> list[Face]:
        return [Face.from_id(f) for f in range(self.n_faces)]

    def face_state(self, face: Face | int) -> FaceState:
        fid = face.id if isinstance(face, Face) else int(face)
        if not 0 <= fid < self.n_faces:
            raise LatticeError(f"face {fid} does not belong to this torus")
        return FaceState(
            Face.from_id(fid),
            tuple(int(e) for e in self.face_edges[fid]),
            tuple(int(s) for s in self.face_signs[fid]),
        )

    def face_state_matrix(self, faces=None) -> np.ndarray:
        """|E| x k matrix whose columns are the face states of ``faces``."""
        faces = range(self.n_faces) if faces is None else list(faces)
        faces = [f.id if isinstance(f, Face) else int(f) for f in faces]
        m = np.zeros((self.n_edges, len(faces)), dtype=np.int64)
        for j, f in enumerate(faces):
            m[self.face_edges[f], j] = self.face_signs[f]
        return m

    def winding_cycle(self, axis: int, start: int) -> np.ndarray:
        """Alternating-sign state on the straight loop through ``start`` along ``axis``."""
        v = np.zeros(self.n_edges, dtype=np.int64)
        w = start
        for k in range(self.extents[axis]):
            v[3 * w + axis] = 1 if k % 2 == 0 else -1
            w = int(self.shift[axis][w])
        return v

    # -- export ------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "spec": list(self.extents),
            "vertices": [
                {"id": v, "coords": list(self.vertex_coords(v)), "parity": int(self.parity[v])}
                for v in range(self.n_vertices)
            ],
            "edges": [
                {"id": e, "ends": [int(a), int(b)], "axis": AXES[e % 3]}
                for e, (a, b) in enumerate(self.edge_ends)
            ],
            "faces": [
                {
                    "id": f,
                    "anchor": f // 3,
                    "plane": PLANES[f % 3],
                    "edges": [int(e) for e in self.face_edges[f]],
                    "signs": [int(s) for s in self.face_signs[f]],
                }
                for f in range(self.n_faces)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_dot(self) -> str:
        lines = ["graph G {"]
        for v in range(self.n_vertices):
            x, y, z = self.vertex_coords(v)
            lines.append(f'  v{v} [label="{x},{y},{z}" parity={int(self.parity[v])}];')
        for e, (a, b) in enumerate(self.edge_ends):
            lines.append(f"  v{a} -- v{b} [id=e{e} axis={AXES[e % 3]}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def line_graph_dot(self) -> str:
        lines = ["graph LG {"]
        for e in range(self.n_edges):
            lines.append(f"  e{e};")
        for e, f in self.line_graph_edges():
            lines.append(f"  e{e} -- e{f};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_torus(spec: TorusSpec | tuple) -> CubicTorus:
    if not isinstance(spec, TorusSpec):
        spec = TorusSpec(*spec)
    return CubicTorus(spec)


def incidence_matrix(torus: CubicTorus) -> np.ndarray:
    """Unsigned |V| x |E| vertex-edge incidence matrix B."""
    B = np.zeros((torus.n_vertices, torus.n_edges), dtype=np.int64)
    cols = np.arange(torus.n_edges)
    B[torus.edge_ends[:, 0], cols] = 1
    B[torus.edge_ends[:, 1], cols] = 1
    return B


def hopping_matrix(torus: CubicTorus) -> np.ndarray:
    """T = B^t B: diagonal 2, off-diagonal 1 for edges sharing a vertex."""
    B = incidence_matrix(torus)
    return B.T @ B


def line_graph_adjacency(torus: CubicTorus) -> np.ndarray:
    """Adjacency matrix of L(G); the hopping term of the Hubbard Hamiltonian as written.

    Equals ``hopping_matrix(torus) - 2 * I``.
    """
    A = np.zeros((torus.n_edges, torus.n_edges), dtype=np.int64)
    for e, ns in enumerate(torus.line_graph_neighbors):
        A[e, ns] = 1
    return A


def enumerate_faces(torus: CubicTorus) -> list[Face]:
    return torus.enumerate_faces()


def face_state(torus: CubicTorus, face: Face | int) -> FaceState:
    return torus.face_state(face)


def vertex_cliques(torus: CubicTorus) -> list[list[int]]:
    """For every vertex of G, the six incident edges (a K6 in L(G))."""
    return [sorted(torus.incident_edges(v)) for v in range(torus.n_vertices)]


def is_clique(torus: CubicTorus, nodes) -> bool:
    nbrs = torus.line_graph_neighbors
    return all(b in nbrs[a] for a, b in itertools.combinations(nodes, 2))
