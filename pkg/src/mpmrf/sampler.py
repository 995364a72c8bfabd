"""Exact sampling.

:func:`sample` walks the tree in topological order: the root gets a
Poisson(lam) draw and every other vertex gets the thinned parent count plus
an independent Poisson(lam * (1 - alpha)) innovation, i.e. ``2d - 1`` draws
per realization.

:func:`sample_splatter` is an independent construction used as a test
oracle: every vertex emits a Poisson number of events and each event spreads
down the rooted tree, crossing each edge with probability alpha.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import Model
from .tree import RootedTree

BLOCK_ROWS = 1 << 14

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SamplePanel:
    """``values[i, j]`` is the count at vertex ``j + 1`` in draw ``i``.

    ``order`` records the topological order the draws were made in.
    """

    values: np.ndarray
    seed: Optional[int]
    root: int
    order: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def to_csv(self, path) -> None:
        header = ",".join(f"v{j + 1}" for j in range(self.d))
        np.savetxt(path, self.values, fmt="%d", delimiter=",", header=header, comments="")


def _draw_block(rooted: RootedTree, lam: float, pa_alpha: np.ndarray,
                n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((n, rooted.d), dtype=np.int64)
    r = rooted.root
    out[:, r - 1] = rng.poisson(lam, n)
    for v in rooted.order[1:]:
        a = pa_alpha[v]
        b = rng.binomial(out[:, rooted.parent[v] - 1], a)
        out[:, v - 1] = b + rng.poisson(lam * (1.0 - a), n)
    return out


def sample(model: Model, root: int = 1, n: int = 1, seed: SeedLike = 0,
           threads: int = 1) -> SamplePanel:
    """Draw ``n`` independent realizations.

    Rows are produced in blocks of ``BLOCK_ROWS``, each block with its own
    child stream of ``seed``; the result for a given seed does not depend on
    ``threads``.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rooted = model.rooted(root)
    pa_alpha = model.parent_alpha(rooted)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sizes = [BLOCK_ROWS] * (n // BLOCK_ROWS)
    if n % BLOCK_ROWS:
        sizes.append(n % BLOCK_ROWS)
    children = ss.spawn(len(sizes))

    def work(i: int) -> np.ndarray:
        return _draw_block(rooted, model.lam, pa_alpha, sizes[i],
                           np.random.default_rng(children[i]))

    if threads == 1 or len(sizes) == 1:
        blocks = [work(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as ex:
            blocks = list(ex.map(work, range(len(sizes))))
    seed_val = seed if isinstance(seed, (int, np.integer)) else None
    return SamplePanel(np.vstack(blocks), seed_val, rooted.root, rooted.order)


def sample_splatter(model: Model, root: int, rng: np.random.Generator) -> np.ndarray:
    """One realization built event by event (length-``d`` array, vertex ``j+1`` at index ``j``)."""
    return _splatter(_SplatterPlan(model, root), rng)


class _SplatterPlan:
    def __init__(self, model: Model, root: int):
        rooted = model.rooted(root)
        self.d = model.d
        self.order = rooted.order
        self.children = rooted.children
        self.rates = model.lam * (1.0 - model.parent_alpha(rooted))
        self.edge_alpha = {(u, w): model.alpha_of(u, w)
                           for u in rooted.order for w in rooted.children[u]}


def _splatter(plan: _SplatterPlan, rng: np.random.Generator) -> np.ndarray:
    counts = np.zeros(plan.d, dtype=np.int64)
    for v in plan.order:
        n_events = rng.poisson(plan.rates[v])
        if n_events == 0:
            continue
        # alive[k] tracks whether event k reached the current vertex
        stack = [(v, np.ones(n_events, dtype=bool))]
        while stack:
            u, alive = stack.pop()
            counts[u - 1] += alive.sum()
            for w in plan.children[u]:
                reach = alive & (rng.random(n_events) < plan.edge_alpha[u, w])
                if reach.any():
                    stack.append((w, reach))
    return counts


def sample_splatter_panel(model: Model, root: int, n: int, seed: SeedLike = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    plan = _SplatterPlan(model, root)
    return np.array([_splatter(plan, rng) for _ in range(n)], dtype=np.int64).reshape(n, model.d)
