"""Tree topology: validation, rooting, paths and canonical shapes.

Vertices are 1-indexed everywhere in the public interface.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BadIndex, BadShapeParam, NotATree

Edge = tuple[int, int]


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Tree:
    """Undirected tree on vertices ``1..d``.

    Build through :func:`build_tree`, which validates the edge set.
    """

    d: int
    edges: tuple[Edge, ...]

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        # index 0 unused so that neighbors[v] works with 1-indexed v
        nb: list[list[int]] = [[] for _ in range(self.d + 1)]
        for u, v in self.edges:
            nb[u].append(v)
            nb[v].append(u)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edge_set

    def degree(self, v: int) -> int:
        self.check_vertex(v)
        return len(self.neighbors[v])

    def check_vertex(self, v: int) -> None:
        if not isinstance(v, (int, np.integer)) or not 1 <= v <= self.d:
            raise BadIndex(f"vertex {v!r} outside [1, {self.d}]")

    def __repr__(self) -> str:
        return f"Tree(d={self.d}, edges={list(self.edges)})"


def build_tree(d: int, edges: Iterable[Sequence[int]]) -> Tree:
    """Validate an edge list and return a :class:`Tree`.

    Raises
    ------
    BadIndex
        An endpoint lies outside ``[1, d]``.
    NotATree
        Wrong edge count, self-loop, duplicate edge or disconnected graph.
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise NotATree(f"vertex count must be a positive integer, got {d!r}")
    d = int(d)
    normed: list[Edge] = []
    seen: set[Edge] = set()
    for e in edges:
        if len(e) != 2:
            raise NotATree(f"edge {e!r} does not have two endpoints")
        u, v = int(e[0]), int(e[1])
        for w in (u, v):
            if not 1 <= w <= d:
                raise BadIndex(f"vertex {w} outside [1, {d}]")
        if u == v:
            raise NotATree(f"self-loop at vertex {u}")
        ne = _norm(u, v)
        if ne in seen:
            raise NotATree(f"duplicate edge {ne}")
        seen.add(ne)
        normed.append(ne)
    if len(normed) != d - 1:
        raise NotATree(f"a tree on {d} vertices has {d - 1} edges, got {len(normed)}")
    tree = Tree(d, tuple(sorted(normed)))
    # d-1 edges + connected  =>  acyclic
    reached = _bfs(tree, 1)[1]
    if len(reached) != d:
        raise NotATree("graph is disconnected")
    return tree


def _bfs(tree: Tree, r: int) -> tuple[list[int], list[int]]:
    """BFS from ``r``, children in ascending index. Returns (parent, order)."""
    parent = [-1] * (tree.d + 1)
    parent[r] = 0
    order = [r]
    queue = deque([r])
    nb = tree.neighbors
    while queue:
        u = queue.popleft()
        for w in nb[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
                queue.append(w)
    return parent, order


@dataclass(frozen=True)
class RootedTree:
    """A tree with a root, a parent array and a topological vertex order.

    ``parent[v]`` is the parent of ``v`` (0 for the root); index 0 is unused.
    ``order[0]`` is the root and every parent precedes its children.
    """

    tree: Tree
    root: int
    parent: tuple[int, ...]
    order: tuple[int, ...]
    position: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.tree.d

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in range(self.d + 1)]
        for v in self.order[1:]:
            ch[self.parent[v]].append(v)
        return tuple(tuple(c) for c in ch)

    def parent_map(self) -> dict[int, int]:
        """``{child: parent}`` for every non-root vertex."""
        return {v: self.parent[v] for v in self.order[1:]}

    def descendants(self, v: int) -> list[int]:
        self.tree.check_vertex(v)
        out, stack = [], list(self.children[v])
        while stack:
            w = stack.pop()
            out.append(w)
            stack.extend(self.children[w])
        return sorted(out)


def root_tree(tree: Tree, r: int) -> RootedTree:
    """Root ``tree`` at ``r`` using BFS with ascending child order."""
    tree.check_vertex(r)
    parent, order = _bfs(tree, int(r))
    parent[0] = 0
    position = [0] * (tree.d + 1)
    for i, v in enumerate(order):
        position[v] = i
    return RootedTree(tree, int(r), tuple(parent), tuple(order), tuple(position))


def reroot(rooted: RootedTree, new_root: int) -> RootedTree:
    """Re-root by a fresh BFS; parent links flip exactly along the old root path."""
    return root_tree(rooted.tree, new_root)


def path(tree: Tree, u: int, v: int) -> list[Edge]:
    """Edges walked from ``u`` to ``v``, each written as ``(min, max)``."""
    tree.check_vertex(u)
    tree.check_vertex(v)
    if u == v:
        return []
    parent, _ = _bfs(tree, u)
    walk = [v]
    while walk[-1] != u:
        walk.append(parent[walk[-1]])
    walk.reverse()
    return [_norm(a, b) for a, b in zip(walk, walk[1:])]


def distance(tree: Tree, u: int, v: int) -> int:
    return len(path(tree, u, v))


def diameter(tree: Tree) -> int:
    _, order = _bfs(tree, 1)
    far = order[-1]
    parent, order = _bfs(tree, far)
    return distance(tree, far, order[-1])


def is_connected_subset(tree: Tree, keep: Iterable[int]) -> bool:
    keep = set(keep)
    if not keep:
        return False
    start = min(keep)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in tree.neighbors[u]:
            if w in keep and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == keep


# --- generators -------------------------------------------------------------

def star(d: int) -> Tree:
    """Vertex 1 joined to each of ``2..d``."""
    _positive(d=d)
    return build_tree(d, [(1, v) for v in range(2, d + 1)])


def series(d: int) -> Tree:
    _positive(d=d)
    return build_tree(d, [(i, i + 1) for i in range(1, d)])


def chi_nary(chi: int, xi: int) -> Tree:
    """Complete ``chi``-ary tree of radius ``xi``, labelled breadth-first from 1."""
    _positive(chi=chi)
    if not isinstance(xi, (int, np.integer)) or xi < 0:
        raise BadShapeParam(f"radius must be a nonnegative integer, got {xi!r}")
    edges = []
    frontier = [1]
    nxt = 2
    for _ in range(xi):
        new = []
        for u in frontier:
            for _ in range(chi):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return build_tree(nxt - 1, edges)


def chi_nary_size(chi: int, xi: int) -> int:
    if chi == 1:
        return xi + 1
    return (chi ** (xi + 1) - 1) // (chi - 1)


def hub_chain(hub_leaves: Sequence[int] = (7, 6, 6, 6, 20)) -> Tree:
    """Chain of hubs, each carrying pendant leaves.

    Hubs are labelled after their predecessor's leaves: with the default
    ``(7, 6, 6, 6, 20)`` the first hub is 2 with leaves 1 and 3..8, then hubs
    9, 16, 23 carry six leaves each and hub 30 carries leaves 31..50.  This is
    the 50-vertex tree of the worked numerical example.
    """
    if not hub_leaves or any(n < 0 for n in hub_leaves):
        raise BadShapeParam(f"bad hub leaf counts {hub_leaves!r}")
    edges: list[Edge] = []
    # vertex 1 hangs off the first hub; remaining leaves follow the hub label
    first = hub_leaves[0]
    hub = 2 if first >= 1 else 1
    if first >= 1:
        edges.append((1, 2))
    nxt = hub + 1
    for i, n in enumerate(hub_leaves):
        n_here = n - 1 if (i == 0 and first >= 1) else n
        for _ in range(n_here):
            edges.append((hub, nxt))
            nxt += 1
        if i + 1 < len(hub_leaves):
            edges.append((hub, nxt))
            hub = nxt
            nxt += 1
    return build_tree(nxt - 1, edges)


def example_tree_50() -> Tree:
    return hub_chain()


def _positive(**kw: int) -> None:
    for name, val in kw.items():
        if not isinstance(val, (int, np.integer)) or val < 1:
            raise BadShapeParam(f"{name} must be a positive integer, got {val!r}")


def generate(shape: str) -> Tree:
    """Build a tree from a shape string.

    Accepted: ``star:<d>``, ``series:<d>``, ``chinary:<chi>:<xi>`` and
    ``hubchain`` for the 50-vertex example tree (``paper-fig8`` is an alias).
    """
    parts = shape.strip().lower().split(":")
    kind, args = parts[0], parts[1:]
    try:
        nums = [int(a) for a in args]
    except ValueError as exc:
        raise BadShapeParam(f"non-integer parameter in {shape!r}") from exc
    if kind in ("paper-fig8", "hubchain") and not nums:
        return hub_chain()
    if kind == "star" and len(nums) == 1:
        return star(nums[0])
    if kind == "series" and len(nums) == 1:
        return series(nums[0])
    if kind in ("chinary", "chi_nary") and len(nums) == 2:
        return chi_nary(*nums)
    raise BadShapeParam(f"unknown tree shape {shape!r}")


# --- text format ------------------------------------------------------------

def parse_tree_text(text: str) -> Tree:
    """Parse ``u v`` lines with an optional ``d=<n>`` header; ``#`` starts a comment."""
    d = None
    edges = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("d="):
            d = int(line[2:])
            continue
        u, v = line.split()
        edges.append((int(u), int(v)))
    if d is None:
        d = max((max(e) for e in edges), default=1)
    return build_tree(d, edges)


def format_tree_text(tree: Tree) -> str:
    lines = [f"d={tree.d}"] + [f"{u} {v}" for u, v in tree.edges]
    return "\n".join(lines) + "\n"


# --- weighted adjacency -----------------------------------------------------

@dataclass(frozen=True)
class WeightedAdjacency:
    """Weighted adjacency matrix with rows/columns in topological order.

    ``labels[i]`` is the vertex sitting at row ``i``.
    """

    matrix: np.ndarray
    labels: tuple[int, ...]

    def parents_by_first_positive(self) -> dict[int, int]:
        """Recover ``{child: parent}`` by the first-positive-column rule.

        Only meaningful when every edge weight is strictly positive.
        """
        out = {}
        A = self.matrix
        for k in range(1, A.shape[0]):
            j = int(np.flatnonzero(A[k, :k] > 0)[0])
            out[self.labels[k]] = self.labels[j]
        return out


def weighted_adjacency(rooted: RootedTree, weight) -> WeightedAdjacency:
    """Build the matrix from ``weight(u, v)`` for edges, ones on the diagonal."""
    d = rooted.d
    pos = rooted.position
    A = np.eye(d)
    for u, v in rooted.tree.edges:
        w = weight(u, v)
        A[pos[u], pos[v]] = A[pos[v], pos[u]] = w
    return WeightedAdjacency(A, rooted.order)
