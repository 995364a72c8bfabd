"""Model container: tree, common Poisson rate and per-edge dependence."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import BadAlpha, BadLambda, MissingEdgeAlpha, NotASubtree
from .tree import (
    Edge, RootedTree, Tree, WeightedAdjacency, _norm, build_tree,
    is_connected_subset, root_tree, weighted_adjacency,
)

@lru_cache(maxsize=256)
def _cached_rooting(tree: Tree, r: int) -> RootedTree:
    return root_tree(tree, r)


AlphaSpec = Union[float, Mapping[Edge, float], Iterable[tuple[int, int, float]]]


@dataclass(frozen=True)
class Model:
    """Poisson MRF parameters.

    ``alpha`` is keyed by edges written ``(min, max)``; look-ups through
    :meth:`alpha_of` ignore direction.
    """

    tree: Tree
    lam: float
    alpha: Mapping[Edge, float]

    @property
    def d(self) -> int:
        return self.tree.d

    def alpha_of(self, u: int, v: int) -> float:
        return self.alpha[_norm(u, v)]

    @cached_property
    def alpha_sum(self) -> float:
        return float(sum(self.alpha.values()))

    def rooted(self, r: int = 1) -> RootedTree:
        return _cached_rooting(self.tree, r)

    def parent_alpha(self, rooted: RootedTree) -> np.ndarray:
        """alpha on the edge to each vertex's parent, 0 at the root (1-indexed, slot 0 unused)."""
        a = np.zeros(self.d + 1)
        for v in rooted.order[1:]:
            a[v] = self.alpha_of(rooted.parent[v], v)
        return a

    def adjacency(self, r: int = 1) -> WeightedAdjacency:
        return weighted_adjacency(self.rooted(r), self.alpha_of)

    def is_broadcast(self) -> bool:
        vals = set(self.alpha.values())
        return len(vals) <= 1

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "tree": {"d": self.d, "edges": [list(e) for e in self.tree.edges]},
            "alpha": {"edges": [[u, v, a] for (u, v), a in sorted(self.alpha.items())]},
        }

    def __repr__(self) -> str:
        if self.is_broadcast() and self.alpha:
            a = f"alpha={next(iter(self.alpha.values()))}"
        else:
            a = f"alpha={dict(self.alpha)}"
        return f"Model(d={self.d}, lam={self.lam}, {a})"


def _check_alpha(a: float, where: str) -> float:
    try:
        a = float(a)
    except (TypeError, ValueError) as exc:
        raise BadAlpha(f"alpha {where} is not a number: {a!r}") from exc
    if not math.isfinite(a) or not 0.0 <= a <= 1.0:
        raise BadAlpha(f"alpha {where} must lie in [0, 1], got {a!r}")
    return a


def new_model(tree: Tree, lam: float, alpha: AlphaSpec) -> Model:
    """Validate parameters.

    ``alpha`` is either a scalar applied to every edge, a mapping from edge
    to value, or an iterable of ``(u, v, a)`` triples.
    """
    try:
        lam = float(lam)
    except (TypeError, ValueError) as exc:
        raise BadLambda(f"lambda is not a number: {lam!r}") from exc
    if not math.isfinite(lam) or lam <= 0:
        raise BadLambda(f"lambda must be positive and finite, got {lam!r}")

    if isinstance(alpha, (int, float, np.floating, np.integer)):
        a = _check_alpha(alpha, "(broadcast)")
        amap = {e: a for e in tree.edges}
    else:
        items = alpha.items() if isinstance(alpha, Mapping) else (
            ((u, v), a) for u, v, a in alpha)
        amap = {}
        for (u, v), a in items:
            e = _norm(int(u), int(v))
            if not tree.has_edge(*e):
                raise MissingEdgeAlpha(f"alpha given for non-edge {e}")
            amap[e] = _check_alpha(a, f"on edge {e}")
        missing = [e for e in tree.edges if e not in amap]
        if missing:
            raise MissingEdgeAlpha(f"no alpha for edges {missing}")
    return Model(tree, lam, amap)


def prune(model: Model, keep: Iterable[int]) -> Model:
    """Restrict the model to a connected vertex subset, relabelled ``1..|keep|``.

    Kept vertices are relabelled in increasing order of their original
    labels, so keeping ``{1,...,k}`` leaves labels unchanged.
    """
    keep = sorted(set(int(v) for v in keep))
    for v in keep:
        model.tree.check_vertex(v)
    if not is_connected_subset(model.tree, keep):
        raise NotASubtree(f"{keep} does not induce a connected subtree")
    relabel = {v: i + 1 for i, v in enumerate(keep)}
    edges = [(relabel[u], relabel[v]) for u, v in model.tree.edges
             if u in relabel and v in relabel]
    sub = build_tree(len(keep), edges)
    amap = {_norm(relabel[u], relabel[v]): a for (u, v), a in model.alpha.items()
            if u in relabel and v in relabel}
    return Model(sub, model.lam, amap)


def model_from_dict(doc: Mapping) -> Model:
    t = doc["tree"]
    tree = build_tree(int(t["d"]), [tuple(e) for e in t["edges"]])
    a = doc["alpha"]
    if "broadcast" in a:
        alpha: AlphaSpec = a["broadcast"]
    else:
        alpha = [(int(u), int(v), float(x)) for u, v, x in a["edges"]]
    return new_model(tree, doc["lambda"], alpha)


def load_model(path) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def dump_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=1)
