import functools

import numpy as np
import pytest
from hypothesis import strategies as st

from mpmrf.aggregate import sum_pmf_fft
from mpmrf.model import new_model
from mpmrf.tree import build_tree, generate

# seven-vertex tree used for the rooting examples
SEVEN_EDGES = [(1, 2), (1, 3), (3, 4), (3, 5), (4, 6), (4, 7)]
# twelve-vertex tree and its five-vertex subtree used for pruning
TWELVE_EDGES = [(1, 2), (1, 3), (2, 4), (2, 5), (1, 6), (6, 7), (7, 8), (7, 9),
              (3, 10), (3, 11), (11, 12)]
TWELVE_SUB_EDGES = [(1, 2), (1, 3), (2, 4), (2, 5)]

BETAS = (0.0, 0.3, 0.7, 0.9)


@pytest.fixture
def seven_tree():
    return build_tree(7, SEVEN_EDGES)


@pytest.fixture
def twelve_tree():
    return build_tree(12, TWELVE_EDGES)


@functools.lru_cache(maxsize=None)
def example_model(beta):
    return new_model(generate("hubchain"), 1.0, beta)


@functools.lru_cache(maxsize=None)
def example_pmf(beta, n_fft=1 << 15):
    return sum_pmf_fft(example_model(beta), 1, n_fft)


@st.composite
def random_trees(draw, min_d=1, max_d=7):
    """Random labelled tree: vertex k > 1 attaches to a uniformly chosen earlier
    vertex, then labels are shuffled."""
    d = draw(st.integers(min_d, max_d))
    parents = [draw(st.integers(1, k - 1)) for k in range(2, d + 1)]
    perm = draw(st.permutations(range(1, d + 1)))
    edges = [(perm[k - 1], perm[p - 1]) for k, p in zip(range(2, d + 1), parents)]
    return build_tree(d, edges)


@st.composite
def random_models(draw, min_d=1, max_d=7, lam=st.floats(0.2, 3.0),
                  alpha=st.floats(0.0, 1.0)):
    tree = draw(random_trees(min_d, max_d))
    alphas = {e: draw(alpha) for e in tree.edges}
    return new_model(tree, draw(lam), alphas)


def enumerate_trees(d):
    """Every labelled tree on ``d`` vertices via Pruefer sequences."""
    import itertools

    if d == 1:
        yield build_tree(1, [])
        return
    if d == 2:
        yield build_tree(2, [(1, 2)])
        return
    for seq in itertools.product(range(1, d + 1), repeat=d - 2):
        degree = [1] * (d + 1)
        for s in seq:
            degree[s] += 1
        edges = []
        seq = list(seq)
        for s in seq:
            leaf = min(v for v in range(1, d + 1) if degree[v] == 1)
            edges.append((leaf, s))
            degree[leaf] -= 1
            degree[s] -= 1
        u, w = [v for v in range(1, d + 1) if degree[v] == 1]
        edges.append((u, w))
        yield build_tree(d, edges)


def poisson_chisquare_pvalue(counts, lam):
    """Chi-square goodness of fit of integer data to Poisson(lam), pooling
    cells with expected count below 5."""
    from scipy import stats

    counts = np.asarray(counts)
    n = counts.size
    kmax = int(counts.max())
    obs = np.bincount(counts, minlength=kmax + 1).astype(float)
    probs = stats.poisson.pmf(np.arange(kmax + 1), lam)
    probs[-1] += stats.poisson.sf(kmax, lam)
    return pooled_chisquare(obs, n * probs)


def pooled_chisquare(obs, exp, min_expected=5.0, ddof=0):
    from scipy import stats

    o_cells, e_cells = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            o_cells.append(o_acc)
            e_cells.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 and e_cells:
        o_cells[-1] += o_acc
        e_cells[-1] += e_acc
    o_cells, e_cells = np.array(o_cells), np.array(e_cells)
    e_cells *= o_cells.sum() / e_cells.sum()
    return stats.chisquare(o_cells, e_cells, ddof=ddof).pvalue


def joint_cells(values, cap=6):
    """Map each row to a cell index, truncating every count at ``cap``."""
    v = np.minimum(values, cap)
    base = cap + 1
    return (v * base ** np.arange(v.shape[1])).sum(axis=1)


def two_sample_pvalue(a_cells, b_cells, min_count=10):
    """Chi-square homogeneity p-value of two samples of cell indices, pooling sparse cells."""
    from scipy import stats

    k = int(max(a_cells.max(), b_cells.max())) + 1
    table = np.vstack([np.bincount(a_cells, minlength=k), np.bincount(b_cells, minlength=k)])
    keep = table.sum(axis=0) >= min_count
    pooled = table[:, ~keep].sum(axis=1, keepdims=True)
    table = np.hstack([table[:, keep], pooled]) if pooled.sum() else table[:, keep]
    return stats.chi2_contingency(table)[1]


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``report(number, ok, detail)`` prints one pass/fail line per criterion
    and keeps it for the end-of-run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
