"""Poisson Markov random fields on trees.

Every component is Poisson(lam); dependence propagates along tree edges by
binomial thinning.  The package covers tree handling, exact sampling, the
joint pmf and pgf, covariances, the FFT-inverted distribution of the sum,
expected allocations and risk measures.
"""
from .aggregate import (
    PmfVector, compound_params, log_sum_mgf, secondary_pgf, secondary_pgf_closed_form,
    secondary_pmf_fft, sum_pgf, sum_pmf_fft,
)
from .allocation import (
    AllocationTable, Contributions, expected_allocations_fft, ogfea_eval, tvar_contributions,
)
from .errors import MPMRFError
from .exact import covariance_matrix, joint_pgf, joint_pmf, joint_pmf_bruteforce
from .model import Model, load_model, new_model, prune
from .risk import entropic, quantile, risk_report, stop_loss, tvar
from .sampler import SamplePanel, sample
from .tree import RootedTree, Tree, build_tree, generate, root_tree

__all__ = [
    "AllocationTable", "Contributions", "MPMRFError", "Model", "PmfVector", "RootedTree",
    "SamplePanel", "Tree", "build_tree", "compound_params", "covariance_matrix", "entropic",
    "expected_allocations_fft", "generate", "joint_pgf", "joint_pmf", "joint_pmf_bruteforce",
    "load_model", "log_sum_mgf", "new_model", "ogfea_eval", "prune", "quantile", "risk_report",
    "root_tree", "sample", "secondary_pgf", "secondary_pgf_closed_form", "secondary_pmf_fft",
    "stop_loss", "sum_pgf", "sum_pmf_fft", "tvar", "tvar_contributions",
]
