"""Distribution of the component sum ``M = sum_v N_v``.

``M`` is compound Poisson: batches arrive at rate ``lam_M = lam (d - sum alpha)``
and a batch touches ``C_M`` vertices, where ``C_M`` mixes the per-vertex
``eta_v(t, ..., t)`` with weights ``(1 - a_pa(v)) / (d - sum alpha)``.

The pmf is recovered by evaluating ``P_M`` at the ``n_fft`` roots of unity
and inverting with the FFT.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AliasingTolerance, BadNfft, BadShapeParam
from .exact import eta_scan
from .model import Model
from .tree import chi_nary_size

DEFAULT_NFFT = 1 << 15
DEFAULT_ALIAS_TOL = 1e-10
NOISE_CLAMP = 1e-12
# inverse-DFT round-off stays below a few eps times the largest probability;
# entries under this relative floor are zeroed so that noise in the far tail
# does not bias k- and k^2-weighted moments
ROUNDOFF_REL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class PmfVector:
    """Probabilities ``p(0), ..., p(k_max)`` of a count variable.

    ``mass_deficit`` estimates probability not represented in ``probs``:
    mass that fell beyond ``k_max`` (or wrapped around in a circular
    inversion) plus any shortfall of the total from one.
    """

    probs: np.ndarray
    mass_deficit: float = 0.0

    @property
    def k_max(self) -> int:
        return self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def mean(self) -> float:
        return float(self.support @ self.probs)

    def variance(self) -> float:
        k = self.support
        m = self.mean()
        return float(((k - m) ** 2) @ self.probs)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.support, self.probs])
        np.savetxt(path, data, delimiter=",", header="k,p", comments="", fmt=["%d", "%.17g"])


@dataclass(frozen=True)
class CompoundCharacteristics:
    lambda_M: float
    mean_secondary: float


def compound_params(model: Model) -> CompoundCharacteristics:
    excess = model.d - model.alpha_sum
    # each alpha <= 1 over d-1 edges, so excess >= 1
    assert excess > 0
    return CompoundCharacteristics(model.lam * excess, model.d / excess)


def unit_circle(n_fft: int) -> np.ndarray:
    """DFT of the unit impulse at 1: the points ``exp(-2 pi i l / n_fft)``."""
    b = np.zeros(n_fft)
    b[1] = 1.0
    return np.fft.fft(b)


def check_nfft(n_fft: int) -> int:
    n = int(n_fft)
    if n != n_fft or n < 2 or n & (n - 1):
        raise BadNfft(f"n_fft must be a power of two >= 2, got {n_fft!r}")
    return n


def invert_pgf_values(values: np.ndarray, expected_mean: float | None = None,
                      tol: float = DEFAULT_ALIAS_TOL) -> PmfVector:
    """Inverse DFT of pgf values taken on :func:`unit_circle`.

    Round-off entries in ``(-NOISE_CLAMP, 0)`` are set to zero, as is
    anything smaller in magnitude than ``ROUNDOFF_REL`` times the largest
    entry; anything more negative means the support wrapped around and
    raises.  When the true mean is known, the mean defect divided by
    ``n_fft`` estimates the wrapped mass (each wrapped unit of mass moves
    down by ``n_fft``).
    """
    n = values.size
    p = np.fft.ifft(values).real
    if p.min() < -NOISE_CLAMP:
        raise AliasingTolerance(f"negative mass {p.min():.3g} after inversion; raise n_fft")
    p[(p < 0) | (np.abs(p) < ROUNDOFF_REL * np.abs(p).max())] = 0.0
    deficit = abs(1.0 - p.sum())
    if expected_mean is not None:
        wrapped = (expected_mean - float(np.arange(n) @ p)) / n
        deficit = max(deficit, wrapped)
    if deficit > tol:
        raise AliasingTolerance(f"estimated aliased mass {deficit:.3g} > {tol:g}; raise n_fft")
    return PmfVector(p, max(deficit, 0.0))


def sum_pgf_on_circle(model: Model, root: int, n_fft: int):
    """``(eta_root, log P_M)`` at every unit-circle point, rooted at ``root``."""
    t = unit_circle(check_nfft(n_fft))
    rooted = model.rooted(root)
    eta_root, log_pgf, _ = eta_scan(model, rooted, lambda v: t)
    return eta_root, log_pgf


def sum_pmf_fft(model: Model, root: int = 1, n_fft: int = DEFAULT_NFFT,
                tol: float = DEFAULT_ALIAS_TOL) -> PmfVector:
    """pmf of ``M`` on ``0..n_fft-1``."""
    _, log_pgf = sum_pgf_on_circle(model, root, n_fft)
    return invert_pgf_values(np.exp(log_pgf), model.lam * model.d, tol)


def sum_pgf(model: Model, t, root: int = 1):
    """``P_M(t)`` for scalar or array ``t``."""
    t = np.asarray(t)
    _, log_pgf, _ = eta_scan(model, model.rooted(root), lambda v: t)
    return np.exp(log_pgf)


def secondary_pgf(model: Model, t, root: int = 1):
    """pgf of the batch size ``C_M`` from the eta recursion."""
    t = np.asarray(t)
    rooted = model.rooted(root)
    _, _, etas = eta_scan(model, rooted, lambda v: t, keep=True)
    pa = model.parent_alpha(rooted)
    excess = model.d - model.alpha_sum
    return sum((1.0 - pa[v]) / excess * etas[v] for v in rooted.order)


def secondary_pmf_fft(model: Model, root: int = 1, n_fft: int | None = None) -> PmfVector:
    """pmf of ``C_M`` on ``0..d`` (a batch touches at most every vertex once)."""
    n = n_fft or 1 << int(np.ceil(np.log2(model.d + 1)))
    vals = secondary_pgf(model, unit_circle(check_nfft(n)), root)
    p = np.fft.ifft(vals).real
    p[np.abs(p) < NOISE_CLAMP] = 0.0
    return PmfVector(p[:model.d + 1], abs(1.0 - p[:model.d + 1].sum()))


def log_sum_mgf(model: Model, rho: float, root: int = 1) -> float:
    """``ln E[exp(rho M)]`` computed exactly through the eta polynomials at ``exp(rho)``."""
    _, log_pgf, _ = eta_scan(model, model.rooted(root), lambda v: np.exp(rho))
    return float(log_pgf)


# --- closed forms for equal-alpha canonical shapes ---------------------------

def psi_compose(k: int, t, alpha: float, chi: int):
    """Iterate ``y -> t (1 - alpha + alpha y)^chi`` ``k`` times starting from ``y = t``."""
    if k < 0:
        raise ValueError("composition count must be >= 0")
    t = np.asarray(t)
    y = t
    for _ in range(k):
        y = t * (1.0 - alpha + alpha * y) ** chi
    return y


def secondary_pgf_closed_form(shape: str, params: tuple[int, ...], alpha: float, t):
    """pgf of ``C_M`` for an equal-alpha star, series or chi-nary tree.

    ``shape`` is ``"star"`` or ``"series"`` with ``params = (d,)`` or
    ``"chinary"`` with ``params = (chi, xi)``.
    """
    t = np.asarray(t)
    a = float(alpha)
    if shape == "star":
        (d,) = params
        if d < 1:
            raise BadShapeParam("star needs d >= 1")
        norm = a + (1 - a) * d
        return (t * (1 - a + a * t) ** (d - 1) + (1 - a) * (d - 1) * t) / norm
    if shape == "series":
        (d,) = params
        if d < 1:
            raise BadShapeParam("series needs d >= 1")
        norm = a + (1 - a) * d
        total = 0.0
        for i in range(1, d + 1):
            inner = sum((1 - a) ** min(1, i - j) * a ** (j - 1) * t ** j
                        for j in range(1, i + 1))
            total = total + (1 - a) ** min(1, d - i) * inner
        return total / norm
    if shape in ("chinary", "chi_nary"):
        chi, xi = params
        if chi < 1 or xi < 0:
            raise BadShapeParam("chi-nary needs chi >= 1, xi >= 0")
        norm = a + (1 - a) * chi_nary_size(chi, xi)
        total = 0.0
        for i in range(xi + 1):
            w = chi ** (xi - i) * (1 - a) ** min(1, xi - i)
            total = total + w * psi_compose(i, t, a, chi)
        return total / norm
    raise BadShapeParam(f"unknown shape {shape!r}")


def compound_pmf_fft(lambda_M: float, secondary, n_fft: int = DEFAULT_NFFT,
                     expected_mean: float | None = None,
                     tol: float = DEFAULT_ALIAS_TOL) -> PmfVector:
    """Invert ``exp(lambda_M (P_C(t) - 1))`` given a callable secondary pgf."""
    t = unit_circle(check_nfft(n_fft))
    return invert_pgf_values(np.exp(lambda_M * (secondary(t) - 1.0)), expected_mean, tol)

