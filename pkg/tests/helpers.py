"""Brute-force oracles and a small tree catalog shared across the test suite.

Everything here recomputes quantities the library produces, but by exhaustive
enumeration, so it is only usable on trees with a handful of nodes.
"""

from __future__ import annotations

import numpy as np

import potts_tree as pt
from potts_tree.broadcast import UNIFORM, _symbols_from_uniforms
from potts_tree.rng import philox_stream


def _all_configs(n_slots: int, q: int, lo: int) -> np.ndarray:
    """All q**n_slots assignments as rows, symbols lo..lo+q-1."""
    grids = np.meshgrid(*([np.arange(lo, lo + q)] * n_slots), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


class GibbsOracle:
    """Exact conditional root marginal by summing over all interior configs.

    The interior assignments and their interior-edge agreement counts are
    precomputed once; conditioning on a boundary only adds the agreements on
    boundary edges.  Feasible while q ** n_free stays small.
    """

    def __init__(self, tree: pt.TreeInstance, q: int):
        if tree.depth < 1:
            raise ValueError("oracle needs depth >= 1 so the root is interior")
        self.tree = tree
        self.q = q
        boundary = tree.boundary_nodes()
        bset = set(boundary.tolist())
        free = np.array(
            [v for v in range(tree.n_nodes) if v not in bset], dtype=np.int64
        )
        self.boundary = boundary
        col = {int(v): i for i, v in enumerate(free)}
        self.configs = _all_configs(len(free), q, lo=1)
        agree = np.zeros(len(self.configs), dtype=np.int64)
        for v in range(1, tree.n_nodes):
            if v in bset:
                continue
            agree += self.configs[:, col[v]] == self.configs[:, col[int(tree.parent[v])]]
        self.fixed_agree = agree
        self.bparent_col = np.array(
            [col[int(tree.parent[v])] for v in boundary], dtype=np.int64
        )
        self.root_symbols = self.configs[:, col[0]]

    def root_marginal(self, ch: pt.PottsChannel, boundary_symbols) -> np.ndarray:
        sym = np.asarray(boundary_symbols, dtype=np.int64)
        agree = self.fixed_agree.copy()
        for c, s in zip(self.bparent_col, sym):
            agree += self.configs[:, c] == s
        lut = ch.agree_weight ** np.arange(self.tree.n_nodes, dtype=np.float64)
        w = lut[agree]
        marg = np.array([w[self.root_symbols == s].sum() for s in range(1, self.q + 1)])
        return marg / marg.sum()


def boundary_distribution(tree: pt.TreeInstance, ch: pt.PottsChannel) -> np.ndarray:
    """Exact boundary law under broadcast from a uniform root.

    Returns a flat probability vector indexed in mixed radix over the
    boundary nodes (first boundary node most significant).  Enumerates all
    q ** n_nodes configurations, so keep the trees tiny.
    """
    q = ch.q
    configs = _all_configs(tree.n_nodes, q, lo=0)
    agree = np.zeros(len(configs), dtype=np.int64)
    for v in range(1, tree.n_nodes):
        agree += configs[:, v] == configs[:, int(tree.parent[v])]
    # per-edge channel weights; the uniform 1/q root factor cancels
    w = (ch.stay_probability ** agree) * (
        ch.epsilon_per_symbol ** (tree.n_nodes - 1 - agree)
    )
    key = np.zeros(len(configs), dtype=np.int64)
    for v in tree.boundary_nodes():
        key = key * q + configs[:, int(v)]
    dist = np.bincount(key, weights=w, minlength=q ** len(tree.boundary_nodes()))
    return dist / dist.sum()


def empirical_boundary_counts(
    tree: pt.TreeInstance, ch: pt.PottsChannel, trials: int, seed: int
) -> np.ndarray:
    """Histogram of broadcast boundary configurations, same indexing as
    boundary_distribution.  Draws all trials from one stream in chunks; this
    checks the sampling law, not the per-trial stream layout."""
    q = ch.q
    boundary = tree.boundary_nodes()
    counts = np.zeros(q ** len(boundary), dtype=np.int64)
    rng = philox_stream(seed, 0)
    done = 0
    while done < trials:
        m = min(100_000, trials - done)
        sym = _symbols_from_uniforms(tree, ch, UNIFORM, rng.random((m, tree.n_nodes)))
        key = np.zeros(m, dtype=np.int64)
        for v in boundary:
            key = key * q + (sym[:, int(v)] - 1)
        counts += np.bincount(key, minlength=len(counts))
        done += m
    return counts


def oracle_tree_catalog() -> list[tuple[str, pt.TreeInstance]]:
    """Small trees (<= 13 nodes, <= 7 interior) covering regular, spherically
    symmetric, irregular, and childless-interior shapes."""
    mixed = pt.OffspringDistribution(((1, 0.5), (2, 0.5)))
    leaky = pt.OffspringDistribution(((0, 0.3), (2, 0.7)))
    return [
        ("regular-2-2", pt.regular_tree(2, 2)),
        ("regular-3-1", pt.regular_tree(3, 1)),
        ("path-4", pt.regular_tree(1, 4)),
        ("sst-2-3", pt.spherically_symmetric_tree((2, 3))),
        ("sst-3-1-2", pt.spherically_symmetric_tree((3, 1, 2))),
        ("sst-1-2-1", pt.spherically_symmetric_tree((1, 2, 1))),
        ("gw-mixed", pt.galton_watson_tree(mixed, 3, seed=3)),
        ("gw-childless-interior", pt.galton_watson_tree(leaky, 3, seed=1)),
    ]
