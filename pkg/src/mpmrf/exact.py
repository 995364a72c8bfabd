"""Closed-form quantities: joint pmf, joint pgf and covariances.

The joint pgf is built from the per-vertex polynomial

    eta_v(t) = t_v * prod_{j in ch(v)} (1 - a_vj + a_vj * eta_j(t)),

evaluated leaves-first, and

    P_N(t) = prod_v exp(lam * (1 - a_{pa(v), v}) * (eta_v(t) - 1))

with a zero dependence parameter above the root.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlog1py, xlogy

from .errors import BadVectorLength, TooLargeForOracle
from .model import Model
from .tree import RootedTree, path

_LOGFACT_DEFAULT = 4096


class _LogFactorials:
    """Cached ``log(n!)``, grown on demand."""

    def __init__(self, size: int = _LOGFACT_DEFAULT):
        self._table = gammaln(np.arange(size + 1) + 1.0)

    def __call__(self, n):
        n = np.asarray(n)
        top = int(n.max(initial=0))
        if top >= self._table.size:
            self._table = gammaln(np.arange(2 * top + 1) + 1.0)
        return self._table[n]


log_factorial = _LogFactorials()


def _log_poisson(mean: float, k: np.ndarray) -> np.ndarray:
    return xlogy(k, mean) - mean - log_factorial(k)


def _log_binom(n: int, p: float, k: np.ndarray) -> np.ndarray:
    lc = log_factorial(n) - log_factorial(k) - log_factorial(n - k)
    return lc + xlogy(k, p) + xlog1py(n - k, -p)


def _logsumexp1d(terms: np.ndarray) -> float:
    # scipy's logsumexp carries array-API dispatch overhead that dominates
    # the short convolutions here
    m = terms.max()
    if m == -math.inf:
        return -math.inf
    return float(m + math.log(np.exp(terms - m).sum()))


def _check_x(model: Model, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (model.d,):
        raise BadVectorLength(f"expected a length-{model.d} count vector, got shape {x.shape}")
    if np.any(x < 0):
        raise ValueError("counts must be nonnegative")
    return x


def log_joint_pmf(model: Model, root: int, x) -> float:
    x = _check_x(model, x)
    rooted = model.rooted(root)
    lam = model.lam
    total = float(_log_poisson(lam, x[root - 1]))
    for v in rooted.order[1:]:
        a = model.alpha_of(rooted.parent[v], v)
        xp, xv = int(x[rooted.parent[v] - 1]), int(x[v - 1])
        k = np.arange(min(xp, xv) + 1)
        terms = _log_poisson(lam * (1.0 - a), xv - k) + _log_binom(xp, a, k)
        total += _logsumexp1d(terms)
        if total == -math.inf:
            break
    return total


def joint_pmf(model: Model, root: int, x) -> float:
    """``Pr(N = x)`` by conditioning down the tree rooted at ``root``.

    Each conditional factor is a Poisson/Binomial convolution summed in log
    space, so large counts do not underflow before the final ``exp``.
    """
    return math.exp(log_joint_pmf(model, root, x))


ORACLE_MAX_D = 6
ORACLE_MAX_COUNT = 8


def joint_pmf_bruteforce(model: Model, x) -> float:
    """``Pr(N = x)`` by enumerating every latent configuration.

    The construction is run from vertex 1: for each non-root vertex the
    number of parent events that crossed the edge is enumerated, the
    innovation count is whatever remains, and the probability of every
    configuration is the plain product of scipy Poisson/Binomial pmfs.
    """
    x = _check_x(model, x)
    if model.d > ORACLE_MAX_D or x.max(initial=0) > ORACLE_MAX_COUNT:
        raise TooLargeForOracle(
            f"enumeration limited to d <= {ORACLE_MAX_D}, counts <= {ORACLE_MAX_COUNT}")
    rooted = model.rooted(1)
    lam = model.lam
    nonroot = rooted.order[1:]
    parent = rooted.parent
    prob = float(stats.poisson.pmf(x[0], lam))
    if not nonroot:
        return prob
    ranges = [range(int(x[parent[v] - 1]) + 1) for v in nonroot]
    # one row per configuration of crossed counts
    crossed = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    weight = np.full(crossed.shape[0], prob)
    for col, v in enumerate(nonroot):
        a = model.alpha_of(parent[v], v)
        b = crossed[:, col]
        innov = x[v - 1] - b
        weight = weight * stats.binom.pmf(b, x[parent[v] - 1], a)
        if a < 1:
            weight = weight * stats.poisson.pmf(innov, lam * (1 - a))
        else:
            weight = weight * (innov == 0)
    return float(weight.sum())


# --- eta recursion and the joint pgf ----------------------------------------

def _vertex_args(model: Model, t) -> Callable[[int], np.ndarray]:
    t = np.asarray(t)
    if t.ndim == 0 or t.shape[0] != model.d:
        raise BadVectorLength(f"expected {model.d} pgf arguments, got shape {t.shape}")
    return lambda v: t[v - 1]


def eta_scan(model: Model, rooted: RootedTree, t_of: Callable[[int], np.ndarray],
             keep: bool = False):
    """Evaluate the eta recursion for every vertex, leaves first.

    ``t_of(v)`` returns the argument for vertex ``v`` (scalar or array; all
    vertices must broadcast together).  Returns ``(eta_root, log_pgf, etas)``
    where ``log_pgf = sum_v lam (1 - a_pa(v)) (eta_v - 1)`` and ``etas`` maps
    vertex to its value when ``keep`` is set (otherwise ``None``).

    Child factors are folded into a per-vertex accumulator as soon as the
    child is done, so only pending accumulators are held in memory.
    """
    acc: dict[int, np.ndarray] = {}
    etas = {} if keep else None
    log_pgf = 0.0
    parent = rooted.parent
    lam = model.lam
    eta = None
    for v in reversed(rooted.order):
        eta = t_of(v)
        if v in acc:
            eta = eta * acc.pop(v)
        if keep:
            etas[v] = eta
        if v == rooted.root:
            log_pgf = log_pgf + lam * (eta - 1.0)
        else:
            a = model.alpha_of(parent[v], v)
            log_pgf = log_pgf + lam * (1.0 - a) * (eta - 1.0)
            factor = (1.0 - a) + a * eta
            p = parent[v]
            acc[p] = acc[p] * factor if p in acc else factor
    return eta, log_pgf, etas


@dataclass
class EtaEvaluator:
    """Per-vertex eta values of ``model`` rooted at ``rooted.root`` for one argument vector."""

    model: Model
    rooted: RootedTree

    def __call__(self, t) -> dict[int, np.ndarray]:
        _, _, etas = eta_scan(self.model, self.rooted, _vertex_args(self.model, t), keep=True)
        return etas


def eta_eval(model: Model, rooted: RootedTree, v: int, t):
    """``eta_v`` of the tree rooted at ``rooted.root``, at the vector ``t`` (length d)."""
    rooted.tree.check_vertex(v)
    return EtaEvaluator(model, rooted)(t)[v]


def joint_pgf(model: Model, root: int, t):
    """``E[prod_v t_v^{N_v}]``; ``t`` may be real or complex with ``|t_v| <= 1``."""
    rooted = model.rooted(root)
    _, log_pgf, _ = eta_scan(model, rooted, _vertex_args(model, t))
    return np.exp(log_pgf)


# --- covariance --------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceMatrix:
    """``matrix[u-1, v-1] = Cov(N_u, N_v)``."""

    matrix: np.ndarray
    lam: float

    def correlation(self) -> np.ndarray:
        return self.matrix / self.lam

    def grand_sum(self) -> float:
        return float(self.matrix.sum())

    def to_csv(self, path_) -> None:
        d = self.matrix.shape[0]
        header = ",".join(str(v) for v in range(1, d + 1))
        np.savetxt(path_, self.matrix, delimiter=",", header=header, comments="", fmt="%.17g")


def max_product(a: np.ndarray, b: np.ndarray, chunk: int = 256) -> np.ndarray:
    """``(a * b)_ij = max_k a_ik b_kj`` for nonnegative matrices."""
    out = np.empty((a.shape[0], b.shape[1]))
    for s in range(0, a.shape[0], chunk):
        out[s:s + chunk] = (a[s:s + chunk, :, None] * b[None, :, :]).max(axis=1)
    return out


def max_product_power(A: np.ndarray, k: int, early_stop: bool = True) -> np.ndarray:
    """k-th max-product power of ``A`` (which has a unit diagonal).

    Powers stop changing once ``k`` reaches the tree diameter; with
    ``early_stop`` the loop exits at that point.
    """
    P = A.copy()
    for _ in range(k - 1):
        nxt = max_product(P, A)
        if early_stop and np.array_equal(nxt, P):
            break
        P = nxt
    return P


def covariance_matrix(model: Model, early_stop: bool = True) -> CovarianceMatrix:
    """``lam`` times the ``d``-th max-product power of the weighted adjacency matrix."""
    d = model.d
    A = np.eye(d)
    for (u, v), a in model.alpha.items():
        A[u - 1, v - 1] = A[v - 1, u - 1] = a
    return CovarianceMatrix(model.lam * max_product_power(A, d, early_stop), model.lam)


def correlation(model: Model, u: int, v: int) -> float:
    """Product of alpha along the path from ``u`` to ``v``."""
    edges = path(model.tree, u, v)
    return float(np.prod([model.alpha[e] for e in edges])) if edges else 1.0


def covariance_by_paths(model: Model) -> np.ndarray:
    d = model.d
    out = np.empty((d, d))
    for u in range(1, d + 1):
        for v in range(u, d + 1):
            out[u - 1, v - 1] = out[v - 1, u - 1] = model.lam * correlation(model, u, v)
    return out
