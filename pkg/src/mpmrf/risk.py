"""Risk functionals of a count distribution given as a :class:`PmfVector`."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import TailDominates, UnresolvableQuantile

if TYPE_CHECKING:
    from .aggregate import PmfVector

# entries at or below this are treated as inversion round-off in exponential moments
ENTROPIC_FLOOR = 1e-15
# the extrapolated tail beyond the last resolved entry must stay below this share
ENTROPIC_TAIL_REL = 1e-10


def _check_kappa(pmf: "PmfVector", kappa: float) -> None:
    if not 0.0 <= kappa < 1.0:
        raise UnresolvableQuantile(f"kappa must lie in [0, 1), got {kappa!r}")
    if pmf.mass_deficit >= 1.0 - kappa:
        raise UnresolvableQuantile(
            f"missing mass {pmf.mass_deficit:.3g} too large to resolve level {kappa}")


def quantile(pmf: "PmfVector", kappa: float) -> int:
    """``VaR_kappa = min{k : F(k) >= kappa}`` (no interpolation).

    At ``kappa = 0`` the smallest support point is returned.
    """
    _check_kappa(pmf, kappa)
    if kappa == 0:
        return int(np.flatnonzero(pmf.probs > 0)[0])
    F = pmf.cdf()
    idx = int(np.searchsorted(F, kappa, side="left"))
    if idx >= F.size:
        raise UnresolvableQuantile(f"cdf never reaches {kappa} on the stored support")
    return idx


def tvar(pmf: "PmfVector", kappa: float) -> float:
    """Tail value-at-risk for a discrete law, exact at atoms."""
    q = quantile(pmf, kappa)
    p = pmf.probs
    k = pmf.support
    F_q = float(p[:q + 1].sum())
    upper = float(k[q + 1:] @ p[q + 1:])
    return (upper + (F_q - kappa) * q) / (1.0 - kappa)


def entropic(pmf: "PmfVector", rho: float, floor: float = ENTROPIC_FLOOR) -> float:
    """``(1/rho) ln E[exp(rho X)]`` from the stored probabilities.

    Entries at or below ``floor`` are ignored.  The tilted terms
    ``exp(rho k) p(k)`` beyond the last resolved entry are bounded by a
    geometric series whose ratio is read off the last two resolved terms;
    :class:`TailDominates` is raised when that bound, or the missing mass
    placed at the cut, is not negligible against the result.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    p = pmf.probs
    resolved = np.flatnonzero(p > floor)
    if resolved.size == 0:
        raise TailDominates("no resolved mass")
    k = resolved.astype(float)
    log_terms = rho * k + np.log(p[resolved])
    log_total = float(logsumexp(log_terms))
    k_cut = k[-1]
    # nothing stored or missing beyond the cut: the sum is complete
    if pmf.mass_deficit == 0 and not np.any(p[resolved[-1] + 1:] > 0):
        return log_total / rho
    if resolved.size >= 2:
        log_ratio = (log_terms[-1] - log_terms[-2]) / (k[-1] - k[-2])
        if log_ratio >= 0:
            raise TailDominates(f"tilted terms still grow at the cut for rho={rho}")
        log_tail = log_terms[-1] + log_ratio - np.log1p(-np.exp(log_ratio))
        if log_tail - log_total > math.log(ENTROPIC_TAIL_REL):
            raise TailDominates(f"exponential moment at rho={rho} is not resolved by the support")
    else:
        raise TailDominates("a single resolved entry gives no tail estimate")
    if pmf.mass_deficit > 0 and (
            rho * k_cut + math.log(pmf.mass_deficit) > math.log(1e-8) + log_total):
        raise TailDominates("missing mass could dominate the exponential moment")
    return log_total / rho


def stop_loss(pmf: "PmfVector", x) -> np.ndarray | float:
    """``E[max(X - x, 0)]`` at scalar or array ``x``."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    p = pmf.probs
    k = pmf.support.astype(float)
    # pi(x) = E[X] - E[min(X, x)]
    mean = float(k @ p)
    F = np.cumsum(p)
    kp = np.cumsum(k * p)
    out = np.empty_like(x_arr)
    for i, xv in enumerate(x_arr):
        if xv < 0:
            raise ValueError("stop-loss needs x >= 0")
        j = int(math.floor(xv))
        if j >= k.size - 1:
            below_k = kp[-1]
            below_F = F[-1]
        else:
            below_k = kp[j]
            below_F = F[j]
        # E[min(X, x)] = sum_{k<=x} k p + x * Pr(X > x)
        out[i] = mean - (below_k + xv * (F[-1] - below_F))
    out = np.maximum(out, 0.0)
    return out if np.ndim(x) else float(out[0])


def variance(pmf: "PmfVector") -> float:
    return pmf.variance()


@dataclass(frozen=True)
class ConvexOrderVerdict:
    ordered: bool
    mean_gap: float
    worst_excess: float

    def __str__(self) -> str:
        return "ordered" if self.ordered else "incomparable"


def convex_order_check(pmf_a: "PmfVector", pmf_b: "PmfVector", grid: Iterable[float],
                       mean_tol: float = 1e-6, slack: float = 1e-9) -> ConvexOrderVerdict:
    """Necessary-condition check of ``a <=_cx b``: equal means and dominated stop-loss on ``grid``."""
    grid = np.asarray(list(grid), dtype=float)
    gap = abs(pmf_a.mean() - pmf_b.mean())
    excess = float(np.max(stop_loss(pmf_a, grid) - stop_loss(pmf_b, grid)))
    return ConvexOrderVerdict(gap <= mean_tol and excess <= slack, gap, excess)


@dataclass
class RiskReport:
    variance: float
    var_levels: dict[float, int] = field(default_factory=dict)
    tvar_levels: dict[float, float] = field(default_factory=dict)
    entropic: dict[float, float] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, str, float]]:
        out = [("variance", "", self.variance)]
        out += [("VaR", f"{k:g}", float(v)) for k, v in self.var_levels.items()]
        out += [("TVaR", f"{k:g}", v) for k, v in self.tvar_levels.items()]
        out += [("entropic", f"{k:g}", v) for k, v in self.entropic.items()]
        return out

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("measure,level,value\n")
            for m, lvl, val in self.rows():
                fh.write(f"{m},{lvl},{val!r}\n")


def risk_report(pmf: "PmfVector", kappas: Sequence[float] = (), rhos: Sequence[float] = (),
                entropic_fn=None) -> RiskReport:
    """Collect the standard measures.

    ``entropic_fn(rho)`` overrides the pmf-based entropic measure, e.g. with
    an exact moment generating function.
    """
    rep = RiskReport(variance(pmf))
    for kap in kappas:
        rep.var_levels[kap] = quantile(pmf, kap)
        rep.tvar_levels[kap] = tvar(pmf, kap)
    for rho in rhos:
        rep.entropic[rho] = entropic_fn(rho) if entropic_fn else entropic(pmf, rho)
    return rep


def curves_csv(pmf: "PmfVector", xs: Sequence[float], path) -> None:
    """Write ``x, F, pi`` rows."""
    F = pmf.cdf()
    sl = stop_loss(pmf, np.asarray(xs, dtype=float))
    with open(path, "w") as fh:
        fh.write("x,F,pi\n")
        for x, s in zip(xs, sl):
            j = min(int(math.floor(x)), F.size - 1)
            fh.write(f"{x:g},{float(F[j])!r},{float(s)!r}\n")
