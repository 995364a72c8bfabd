"""Expected allocations ``E[N_v 1{M=k}]`` and what is built on them.

Rooting the tree at ``v`` makes the generating function of the allocations
of ``N_v`` equal to ``lam * eta_v(t, ..., t) * P_M(t)``; inverting it with
the FFT gives every ``k`` at once.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .aggregate import (
    DEFAULT_ALIAS_TOL, DEFAULT_NFFT, PmfVector, check_nfft, invert_pgf_values,
    sum_pgf_on_circle, sum_pmf_fft, unit_circle,
)
from .errors import BadNfft, ZeroMassAtK
from .exact import eta_scan, joint_pmf
from .model import Model
from .risk import quantile, tvar


@dataclass(frozen=True)
class AllocationTable:
    """``alloc[k] = E[N_v 1{M = k}]`` for ``k = 0..n_fft-1``, with the pmf of ``M``."""

    vertex: int
    alloc: np.ndarray
    pmf: PmfVector

    def __post_init__(self):
        if self.alloc.size != self.pmf.probs.size:
            raise BadNfft("allocation and pmf lengths differ")

    def shares(self) -> np.ndarray:
        """``E[N_v | M = k]``; NaN where ``p_M(k) = 0``."""
        p = self.pmf.probs
        out = np.full(p.size, np.nan)
        np.divide(self.alloc, p, out=out, where=p > 0)
        return out

    def total(self) -> float:
        return float(self.alloc.sum())


def ogfea_eval(model: Model, v: int, t):
    """``sum_k t^k E[N_v 1{M=k}]`` at scalar or array ``t``."""
    model.tree.check_vertex(v)
    t = np.asarray(t)
    eta_v, log_pgf, _ = eta_scan(model, model.rooted(v), lambda w: t)
    return model.lam * eta_v * np.exp(log_pgf)


def _alloc_values(model: Model, v: int, n_fft: int) -> np.ndarray:
    eta_v, log_pgf = sum_pgf_on_circle(model, v, n_fft)
    return model.lam * eta_v * np.exp(log_pgf)


def expected_allocations_fft(model: Model, v: int, n_fft: int = DEFAULT_NFFT,
                             pmf: Optional[PmfVector] = None,
                             tol: float = DEFAULT_ALIAS_TOL) -> AllocationTable:
    """All expected allocations of ``N_v`` by FFT inversion, rooted at ``v``.

    ``pmf`` may be passed in to share one pmf of ``M`` across vertices; it
    must have ``n_fft`` entries.
    """
    model.tree.check_vertex(v)
    n_fft = check_nfft(n_fft)
    if pmf is None:
        pmf = sum_pmf_fft(model, 1, n_fft, tol)
    elif pmf.probs.size != n_fft:
        raise BadNfft(f"pmf has {pmf.probs.size} entries, expected {n_fft}")
    # vals / lam is the pgf of H_v + M, whose mean drives the alias estimate
    vals = _alloc_values(model, v, n_fft)
    mean = splatter_mean(model, v) + model.lam * model.d
    raw = invert_pgf_values(vals / model.lam, mean, tol)
    return AllocationTable(v, model.lam * raw.probs, pmf)


def splatter_mean(model: Model, v: int) -> float:
    """Expected number of vertices reached by one event started at ``v``."""
    rooted = model.rooted(v)
    reach = {v: 1.0}
    for w in rooted.order[1:]:
        p = rooted.parent[w]
        reach[w] = reach[p] * model.alpha_of(p, w)
    return float(sum(reach.values()))


def splatter_pmf(model: Model, v: int, n_fft: Optional[int] = None) -> np.ndarray:
    """pmf of the number of vertices reached by one event started at ``v``.

    Its pgf is ``eta_v(t, ..., t)`` with the tree rooted at ``v``; the
    support is ``1..d``.
    """
    n = n_fft or 1 << int(np.ceil(np.log2(model.d + 1)))
    t = unit_circle(check_nfft(n))
    eta_v, _, _ = eta_scan(model, model.rooted(v), lambda w: t)
    p = np.fft.ifft(eta_v).real
    p[np.abs(p) < 1e-14] = 0.0
    return p


def expected_allocation_convolution(model: Model, v: int, k: int,
                                    n_fft: int = DEFAULT_NFFT,
                                    pmf: Optional[PmfVector] = None) -> float:
    """``lam * sum_j p_H(k - j) p_M(j)`` with ``H`` the splatter size from ``v``."""
    model.tree.check_vertex(v)
    if k < 0:
        return 0.0
    if pmf is None:
        pmf = sum_pmf_fft(model, 1, n_fft)
    p_h = splatter_pmf(model, v)
    p_m = pmf.probs
    j = np.arange(max(0, k - p_h.size + 1), min(k, p_m.size - 1) + 1)
    return float(model.lam * np.sum(p_h[k - j] * p_m[j]))


def expected_allocation_bruteforce(model: Model, v: int, k: int, root: int = 1) -> float:
    """``sum_{x : |x| = k} x_v Pr(N = x)`` over every composition of ``k``.

    Exact (no truncation) because ``M = k`` bounds every component.
    """
    d = model.d
    total = 0.0
    # stars and bars: choose d-1 cut points among k+d-1 slots
    for cuts in itertools.combinations(range(k + d - 1), d - 1):
        bounds = (-1,) + cuts + (k + d - 1,)
        x = [bounds[i + 1] - bounds[i] - 1 for i in range(d)]
        if x[v - 1]:
            total += x[v - 1] * joint_pmf(model, root, x)
    return total


def expected_allocations_bruteforce(model: Model, k_max: int, root: int = 1) -> np.ndarray:
    """Every ``E[N_v 1{M = k}]`` for ``k <= k_max`` by summing the joint pmf.

    Returns an array of shape ``(d, k_max + 1)``; row ``v - 1`` is vertex
    ``v``.  Each composition of ``k`` is evaluated once for all vertices.
    """
    d = model.d
    out = np.zeros((d, k_max + 1))
    for k in range(k_max + 1):
        for cuts in itertools.combinations(range(k + d - 1), d - 1):
            bounds = (-1,) + cuts + (k + d - 1,)
            x = np.diff(bounds) - 1
            out[:, k] += x * joint_pmf(model, root, x)
    return out


def conditional_mean_share(model: Model, v: int, k: int, n_fft: int = DEFAULT_NFFT,
                           table: Optional[AllocationTable] = None) -> float:
    """``E[N_v | M = k]``."""
    table = table or expected_allocations_fft(model, v, n_fft)
    p = table.pmf.probs[k] if k < table.pmf.probs.size else 0.0
    if p <= 0:
        raise ZeroMassAtK(f"Pr(M = {k}) is zero")
    return float(table.alloc[k] / p)


def tvar_contribution(table: AllocationTable, kappa: float, expected: float) -> float:
    """Euler contribution of one component to ``TVaR_kappa(M)``."""
    pmf = table.pmf
    q = quantile(pmf, kappa)
    p_q = pmf.probs[q]
    if p_q <= 0:
        raise ZeroMassAtK(f"Pr(M = VaR = {q}) is zero")
    F_q = float(pmf.probs[:q + 1].sum())
    below = float(table.alloc[:q + 1].sum())
    return float((expected - below + (F_q - kappa) / p_q * table.alloc[q]) / (1.0 - kappa))


@dataclass(frozen=True)
class Contributions:
    kappa: float
    tvar: float
    by_vertex: dict[int, float]

    def fractions(self) -> dict[int, float]:
        return {v: c / self.tvar for v, c in self.by_vertex.items()}


def allocation_tables(model: Model, vertices: Iterable[int], n_fft: int = DEFAULT_NFFT,
                      pmf: Optional[PmfVector] = None, threads: int = 1) -> dict[int, AllocationTable]:
    vertices = list(vertices)
    pmf = pmf or sum_pmf_fft(model, 1, n_fft)

    def one(v: int) -> AllocationTable:
        return expected_allocations_fft(model, v, n_fft, pmf)

    if threads == 1 or len(vertices) < 2:
        return {v: one(v) for v in vertices}
    with ThreadPoolExecutor(max_workers=threads or None) as ex:
        return dict(zip(vertices, ex.map(one, vertices)))


def tvar_contributions(model: Model, kappa: float, n_fft: int = DEFAULT_NFFT,
                       vertices: Optional[Sequence[int]] = None,
                       pmf: Optional[PmfVector] = None,
                       tables: Optional[dict[int, AllocationTable]] = None,
                       threads: int = 1) -> Contributions:
    """Per-vertex Euler contributions to ``TVaR_kappa(M)``.

    Every vertex shares the same pmf of ``M`` so that VaR, the cdf and the
    point mass at VaR agree across contributions.
    """
    if vertices is None:
        vertices = range(1, model.d + 1)
    pmf = pmf or sum_pmf_fft(model, 1, n_fft)
    tables = dict(tables or {})
    missing = [v for v in vertices if v not in tables]
    tables.update(allocation_tables(model, missing, n_fft, pmf, threads))
    contrib = {v: tvar_contribution(tables[v], kappa, model.lam) for v in vertices}
    return Contributions(kappa, tvar(pmf, kappa), contrib)
