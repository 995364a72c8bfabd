"""Binomial thinning ``alpha o X``."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import BadAlpha


def _alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or not 0.0 <= alpha <= 1.0:
        raise BadAlpha(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


def thin(alpha: float, x, rng: np.random.Generator):
    """Draw ``alpha o x``: the number of successes among ``x`` Bernoulli(alpha) trials.

    ``x`` may be an integer or an integer array; the output has the same shape.
    """
    alpha = _alpha(alpha)
    x = np.asarray(x)
    if np.any(x < 0):
        raise ValueError("thinning needs nonnegative counts")
    out = rng.binomial(x, alpha)
    return int(out) if np.ndim(out) == 0 else out


def thinned_pgf_point(alpha: float, base_pgf: Callable, t):
    """pgf of ``alpha o X`` at ``t`` given the pgf of ``X``."""
    alpha = _alpha(alpha)
    return base_pgf(1.0 - alpha + alpha * t)


def poisson_pgf(lam: float) -> Callable:
    return lambda s: np.exp(lam * (s - 1.0))
