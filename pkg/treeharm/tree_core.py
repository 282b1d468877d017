"""
Combinatorial geometry of the homogeneous tree of degree q+1.

Vertices are root-anchored child-index words: the first letter picks one of
the q+1 neighbours of the root o, every later letter one of the q children
of the current vertex.  The empty word is o.  Boundary points are cut off at
a finite depth D and stored as cylinders carrying their ν-mass; heights are
exact as soon as D ≥ |x|.

All enumerations are graded lexicographic (depth first, then word), so
ball(R) is a prefix of ball(R+1).
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from treeharm.errors import InsufficientDepthError, InvalidParameterError, InvalidWordError

logger = logging.getLogger(__name__)


# ── Types ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TreeParams:
    """Branching parameter q and the constants derived from it."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool) or self.q < 2:
            raise InvalidParameterError(f"q must be an integer >= 2, got {self.q!r}")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def tau(self) -> float:
        """Period of the spectral variable, 2π/log q."""
        return 2.0 * math.pi / self.log_q

    @property
    def c_G(self) -> float:
        """Normalising constant of the inversion formula, q·log q / (4π(q+1))."""
        return self.q * self.log_q / (4.0 * math.pi * (self.q + 1))


@dataclass(frozen=True, order=False)
class Vertex:
    word: tuple[int, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def is_root(self) -> bool:
        return not self.word

    def sort_key(self) -> tuple:
        return (len(self.word), self.word)

    def __lt__(self, other: "Vertex") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return f"Vertex({list(self.word)})"


@dataclass(frozen=True)
class BoundaryCylinder:
    """Depth-D initial segment of a geodesic ray from o, with its ν-mass."""

    word: tuple[int, ...]
    nu_mass: float = field(compare=False)

    @property
    def depth(self) -> int:
        return len(self.word)

    def ray_vertex(self, j: int) -> Vertex:
        """ω_j, the j-th vertex on the ray (0 ≤ j ≤ D)."""
        return Vertex(self.word[:j])


# ── Construction ────────────────────────────────────────────────────

def _check_word(word: Sequence[int], q: int) -> tuple[int, ...]:
    out = []
    for i, letter in enumerate(word):
        letter = int(letter)
        limit = q + 1 if i == 0 else q
        if not 0 <= letter < limit:
            raise InvalidWordError(
                f"letter {letter} at position {i} out of range [0, {limit - 1}] for q={q}"
            )
        out.append(letter)
    return tuple(out)


def make_vertex(word: Iterable[int], params: TreeParams) -> Vertex:
    return Vertex(_check_word(list(word), params.q))


def make_cylinder(word: Iterable[int], params: TreeParams) -> BoundaryCylinder:
    w = _check_word(list(word), params.q)
    if not w:
        raise InvalidParameterError("a boundary cylinder needs depth D >= 1")
    return BoundaryCylinder(w, cylinder_mass(len(w), params))


ROOT = Vertex(())


# ── Metric ──────────────────────────────────────────────────────────

def _common_prefix(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for u, v in zip(a, b):
        if u != v:
            break
        n += 1
    return n


def distance(x: Vertex, y: Vertex) -> int:
    """Number of edges on the geodesic between x and y."""
    c = _common_prefix(x.word, y.word)
    return x.depth + y.depth - 2 * c


def parent(x: Vertex) -> Vertex | None:
    if x.is_root:
        return None
    return Vertex(x.word[:-1])


def children(x: Vertex, params: TreeParams) -> list[Vertex]:
    n = params.q + 1 if x.is_root else params.q
    return [Vertex(x.word + (i,)) for i in range(n)]


def neighbours(x: Vertex, params: TreeParams) -> list[Vertex]:
    p = parent(x)
    return ([p] if p is not None else []) + children(x, params)


def sphere_size(d: int, params: TreeParams) -> int:
    if d < 0:
        raise InvalidParameterError(f"sphere radius must be >= 0, got {d}")
    if d == 0:
        return 1
    return (params.q + 1) * params.q ** (d - 1)


def _words(d: int, q: int):
    if d == 0:
        yield ()
        return
    for head in range(q + 1):
        for tail in itertools.product(range(q), repeat=d - 1):
            yield (head,) + tail


def sphere(d: int, params: TreeParams) -> list[Vertex]:
    """All vertices with |x| = d, in lexicographic order."""
    if d < 0:
        raise InvalidParameterError(f"sphere radius must be >= 0, got {d}")
    return [Vertex(w) for w in _words(d, params.q)]


def ball(R: int, params: TreeParams) -> list[Vertex]:
    """All vertices with |x| ≤ R, graded lexicographic order."""
    if R < 0:
        raise InvalidParameterError(f"ball radius must be >= 0, got {R}")
    out: list[Vertex] = []
    for d in range(R + 1):
        out.extend(sphere(d, params))
    return out


def ball_size(R: int, params: TreeParams) -> int:
    q = params.q
    return 1 + (q + 1) * (q ** R - 1) // (q - 1)


def adjacency_graph(R: int, params: TreeParams) -> dict[Vertex, list[Vertex]]:
    """Explicit adjacency lists of the subgraph induced on ball(R)."""
    verts = ball(R, params)
    inside = set(verts)
    return {v: [u for u in neighbours(v, params) if u in inside] for v in verts}


def bfs_distances(source: Vertex, graph: dict[Vertex, list[Vertex]]) -> dict[Vertex, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in graph[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


# ── Boundary ────────────────────────────────────────────────────────

def cylinder_mass(D: int, params: TreeParams) -> float:
    return 1.0 / ((params.q + 1) * params.q ** (D - 1))


def boundary_cylinders(D: int, params: TreeParams) -> list[BoundaryCylinder]:
    """The (q+1)q^(D−1) depth-D cylinders, each of mass 1/((q+1)q^(D−1))."""
    if D < 1:
        raise InvalidParameterError(f"cylinder depth must be >= 1, got {D}")
    mass = cylinder_mass(D, params)
    return [BoundaryCylinder(w, mass) for w in _words(D, params.q)]


def cylinder_children(omega: BoundaryCylinder, params: TreeParams) -> list[BoundaryCylinder]:
    mass = cylinder_mass(omega.depth + 1, params)
    return [BoundaryCylinder(omega.word + (i,), mass) for i in range(params.q)]


def height(x: Vertex, omega: BoundaryCylinder) -> int:
    """Busemann height h_ω(x) = 2|x ∧ ω| − |x|."""
    if omega.depth < x.depth:
        raise InsufficientDepthError(
            f"cylinder depth {omega.depth} is smaller than |x| = {x.depth}"
        )
    return 2 * _common_prefix(x.word, omega.word) - x.depth


def poisson_power(x: Vertex, omega: BoundaryCylinder, exponent: complex, params: TreeParams) -> complex:
    """p(x, ω)^exponent = q^(exponent · h_ω(x))."""
    h = height(x, omega)
    return complex(params.q ** (exponent * h))


# ── The distinguished geodesic ω₀ ───────────────────────────────────
# ω₀⁺ is the all-zeros ray; ω₀⁻ starts with letter 1 and continues with zeros.

def geodesic_vertex(l: int, params: TreeParams) -> Vertex:
    """ω₀_l (identified with σ^l·o)."""
    if l >= 0:
        return Vertex((0,) * l)
    return Vertex((1,) + (0,) * (-l - 1))


def reference_height(x: Vertex) -> int:
    """Height with respect to the positive ray ω₀⁺ (exact at any depth)."""
    k = 0
    for letter in x.word:
        if letter != 0:
            break
        k += 1
    return 2 * k - x.depth


def horocycle(vertices: Iterable[Vertex], n: int) -> list[Vertex]:
    return [v for v in vertices if reference_height(v) == n]


# ── Matrix forms ────────────────────────────────────────────────────

def _word_array(words: Sequence[tuple[int, ...]], width: int) -> np.ndarray:
    arr = np.full((len(words), max(width, 1)), -1, dtype=np.int64)
    for i, w in enumerate(words):
        arr[i, : len(w)] = w
    return arr


def _prefix_matrix(a: Sequence[tuple[int, ...]], b: Sequence[tuple[int, ...]]) -> np.ndarray:
    width = max([len(w) for w in a] + [len(w) for w in b] + [1])
    A = _word_array(a, width)
    B = _word_array(b, width)
    eq = (A[:, None, :] == B[None, :, :]) & (A[:, None, :] >= 0)
    return np.cumprod(eq, axis=2).sum(axis=2)


def distance_matrix(vertices: Sequence[Vertex]) -> np.ndarray:
    words = [v.word for v in vertices]
    depth = np.array([len(w) for w in words], dtype=np.int64)
    cp = _prefix_matrix(words, words)
    return depth[:, None] + depth[None, :] - 2 * cp


def height_matrix(vertices: Sequence[Vertex], cylinders: Sequence[BoundaryCylinder]) -> np.ndarray:
    """H[i, j] = h_{ω_j}(x_i); every cylinder must be at least as deep as every vertex."""
    if not cylinders:
        return np.zeros((len(vertices), 0), dtype=np.int64)
    max_depth = max((v.depth for v in vertices), default=0)
    shallow = min(c.depth for c in cylinders)
    if shallow < max_depth:
        raise InsufficientDepthError(
            f"cylinder depth {shallow} is smaller than max |x| = {max_depth}"
        )
    depth = np.array([v.depth for v in vertices], dtype=np.int64)
    cp = _prefix_matrix([v.word for v in vertices], [c.word for c in cylinders])
    return 2 * cp - depth[:, None]
