"""Rooted tree construction: regular, spherically symmetric, Galton-Watson.

Nodes are indexed breadth-first from the root, so each generation occupies a
contiguous index range and the children of any node are contiguous and
ordered.  The leaf-to-root sweeps in the belief-propagation code rely on both
properties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import philox_stream

__all__ = [
    "MAX_NODES",
    "TreeBudgetError",
    "OffspringDistribution",
    "TreeInstance",
    "regular_tree",
    "spherically_symmetric_tree",
    "galton_watson_tree",
    "tree_to_text",
    "tree_from_text",
]

# Hard cap on tree size; construction fails before allocating anything bigger.
MAX_NODES = 10**7


class TreeBudgetError(ValueError):
    """Requested tree would exceed the node budget."""


@dataclass(frozen=True)
class OffspringDistribution:
    """Offspring law given as (count, probability) pairs."""

    support: tuple

    def __post_init__(self) -> None:
        pairs = tuple((int(c), float(p)) for c, p in self.support)
        if not pairs:
            raise ValueError("support must be non-empty")
        counts = [c for c, _ in pairs]
        if any(c < 0 for c in counts):
            raise ValueError("offspring counts must be >= 0")
        if len(set(counts)) != len(counts):
            raise ValueError("offspring counts must be distinct")
        if any(p <= 0.0 for _, p in pairs):
            raise ValueError("probabilities must be positive")
        if abs(sum(p for _, p in pairs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {sum(p for _, p in pairs)!r}")
        object.__setattr__(self, "support", pairs)

    @classmethod
    def deterministic(cls, d: int) -> "OffspringDistribution":
        return cls(((d, 1.0),))

    @property
    def mean(self) -> float:
        return sum(c * p for c, p in self.support)

    def sample_counts(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n i.i.d. offspring counts using inverse-cdf lookup."""
        counts = np.array([c for c, _ in self.support], dtype=np.int64)
        cum = np.cumsum([p for _, p in self.support])
        cum[-1] = 1.0  # close the tiny normalization slack so u<1 always lands
        idx = np.searchsorted(cum, rng.random(n), side="right")
        return counts[idx]

    def spec_string(self) -> str:
        """Compact "c1:p1,c2:p2,..." rendering used in run metadata."""
        return ",".join(f"{c}:{p:g}" for c, p in self.support)


@dataclass(frozen=True, eq=False)
class TreeInstance:
    """Immutable rooted tree of target boundary depth ``depth``.

    ``parent[v]`` is the parent index of node v (-1 for the root) and
    ``depth_of[v]`` its distance from the root.  A Galton-Watson draw may die
    out before reaching ``depth``; such trees are valid and flagged extinct.
    """

    parent: np.ndarray
    depth_of: np.ndarray
    depth: int

    def __post_init__(self) -> None:
        parent = np.array(self.parent, dtype=np.int64)
        depth_of = np.array(self.depth_of, dtype=np.int64)
        n = parent.size
        if parent.ndim != 1 or depth_of.shape != parent.shape or n < 1:
            raise ValueError("parent and depth_of must be equal-length 1-D arrays")
        if n > MAX_NODES:
            raise TreeBudgetError(f"tree has {n} nodes, above the cap of {MAX_NODES}")
        if parent[0] != -1 or depth_of[0] != 0:
            raise ValueError("node 0 must be the root (parent -1, depth 0)")
        if n > 1:
            body = parent[1:]
            if np.any(body < 0) or np.any(body >= np.arange(1, n)):
                raise ValueError("every non-root parent index must precede its child")
            if np.any(np.diff(body) < 0):
                raise ValueError("breadth-first layout requires nondecreasing parents")
            if np.any(depth_of[1:] != depth_of[body] + 1):
                raise ValueError("child depth must equal parent depth + 1")
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 0:
            raise ValueError(f"depth must be an integer >= 0, got {self.depth!r}")
        if int(depth_of.max()) > self.depth:
            raise ValueError("depth_of exceeds the declared tree depth")
        parent.flags.writeable = False
        depth_of.flags.writeable = False
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "depth_of", depth_of)
        object.__setattr__(self, "depth", int(self.depth))

        # Derived layout tables for generation sweeps (children contiguous).
        if n > 1:
            n_children = np.bincount(parent[1:], minlength=n).astype(np.int64)
        else:
            n_children = np.zeros(n, dtype=np.int64)
        first_child = np.empty(n, dtype=np.int64)
        first_child[0] = 1
        if n > 1:
            first_child[1:] = 1 + np.cumsum(n_children[:-1])
        gen_offsets = np.searchsorted(depth_of, np.arange(self.depth + 2)).astype(np.int64)
        for arr in (n_children, first_child, gen_offsets):
            arr.flags.writeable = False
        object.__setattr__(self, "_n_children", n_children)
        object.__setattr__(self, "_first_child", first_child)
        object.__setattr__(self, "_gen_offsets", gen_offsets)

    @property
    def n_nodes(self) -> int:
        return int(self.parent.size)

    @property
    def n_children(self) -> np.ndarray:
        return self._n_children

    @property
    def first_child(self) -> np.ndarray:
        return self._first_child

    def children(self, v: int) -> np.ndarray:
        lo = self._first_child[v]
        return np.arange(lo, lo + self._n_children[v])

    def generation(self, g: int) -> np.ndarray:
        """Node indices at depth g (contiguous slice of the BFS order)."""
        if not 0 <= g <= self.depth:
            raise ValueError(f"generation must be in 0..{self.depth}, got {g}")
        return np.arange(self._gen_offsets[g], self._gen_offsets[g + 1])

    def generation_bounds(self, g: int) -> tuple:
        return int(self._gen_offsets[g]), int(self._gen_offsets[g + 1])

    def boundary_nodes(self) -> np.ndarray:
        """All nodes at the target depth (empty if the tree went extinct)."""
        return self.generation(self.depth)

    @property
    def is_extinct(self) -> bool:
        lo, hi = self.generation_bounds(self.depth)
        return hi == lo


def _from_generation_sizes(sizes_and_offspring) -> TreeInstance:
    """Assemble BFS arrays from per-generation offspring counts."""
    parents = [np.array([-1], dtype=np.int64)]
    depths = [np.array([0], dtype=np.int64)]
    total = 1
    gen_start = 0
    gen_len = 1
    depth = 0
    for g, offspring in enumerate(sizes_and_offspring):
        ids = np.arange(gen_start, gen_start + gen_len, dtype=np.int64)
        counts = np.asarray(offspring, dtype=np.int64)
        new_len = int(counts.sum())
        total += new_len
        if total > MAX_NODES:
            raise TreeBudgetError(f"tree would exceed {MAX_NODES} nodes at generation {g + 1}")
        parents.append(np.repeat(ids, counts))
        depths.append(np.full(new_len, g + 1, dtype=np.int64))
        gen_start += gen_len
        gen_len = new_len
        depth = g + 1
        if gen_len == 0:
            break
    return TreeInstance(np.concatenate(parents), np.concatenate(depths), depth)


def regular_tree(d: int, N: int) -> TreeInstance:
    """Rooted tree where every node above the boundary has exactly d children."""
    if d < 1 or N < 0:
        raise ValueError(f"regular_tree requires d >= 1 and N >= 0, got d={d}, N={N}")
    total = N + 1 if d == 1 else (d ** (N + 1) - 1) // (d - 1)
    if total > MAX_NODES:
        raise TreeBudgetError(f"regular_tree(d={d}, N={N}) would have {total} nodes, above {MAX_NODES}")
    if N == 0:
        return TreeInstance(np.array([-1]), np.array([0]), 0)
    tree = _from_generation_sizes(np.full(d ** g, d, dtype=np.int64) for g in range(N))
    return TreeInstance(tree.parent, tree.depth_of, N)


def spherically_symmetric_tree(d_per_generation: Sequence[int]) -> TreeInstance:
    """Tree whose offspring count depends only on the generation."""
    ds = [int(d) for d in d_per_generation]
    if any(d < 1 for d in ds):
        raise ValueError("all per-generation offspring counts must be >= 1")
    total, width = 1, 1
    for d in ds:
        width *= d
        total += width
        if total > MAX_NODES:
            raise TreeBudgetError(f"spherically symmetric tree would exceed {MAX_NODES} nodes")
    if not ds:
        return TreeInstance(np.array([-1]), np.array([0]), 0)

    def offspring():
        w = 1
        for d in ds:
            yield np.full(w, d, dtype=np.int64)
            w *= d

    return _from_generation_sizes(offspring())


def galton_watson_tree(q_dist: OffspringDistribution, N: int, seed: int) -> TreeInstance:
    """Tree with i.i.d. offspring counts, deterministic for a fixed seed.

    A draw may die out before depth N; the returned instance then has an empty
    boundary and ``is_extinct`` is set.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    rng = philox_stream(seed, 0)
    return galton_watson_tree_from(q_dist, N, rng)


def galton_watson_tree_from(q_dist: OffspringDistribution, N: int, rng: np.random.Generator) -> TreeInstance:
    """Galton-Watson draw consuming an externally managed generator."""
    if N == 0:
        return TreeInstance(np.array([-1]), np.array([0]), 0)

    def offspring():
        w = 1
        for _ in range(N):
            counts = q_dist.sample_counts(w, rng)
            yield counts
            w = int(counts.sum())
            if w == 0:
                return

    tree = _from_generation_sizes(offspring())
    return TreeInstance(tree.parent, tree.depth_of, N)


def tree_to_text(tree: TreeInstance) -> str:
    """Line-oriented serialization: "N <depth>" then "<index> <parent|-1> <depth>"."""
    lines = [f"N {tree.depth}"]
    for i in range(tree.n_nodes):
        lines.append(f"{i} {tree.parent[i]} {tree.depth_of[i]}")
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> TreeInstance:
    """Inverse of :func:`tree_to_text`; exact round trip."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("N "):
        raise ValueError("serialized tree must start with a 'N <depth>' line")
    depth = int(lines[0].split()[1])
    parent = np.empty(len(lines) - 1, dtype=np.int64)
    depth_of = np.empty(len(lines) - 1, dtype=np.int64)
    for row, ln in enumerate(lines[1:]):
        fields = ln.split()
        if len(fields) != 3:
            raise ValueError(f"malformed node line: {ln!r}")
        idx, par, dep = (int(f) for f in fields)
        if idx != row:
            raise ValueError(f"node lines must be in index order, got {idx} at row {row}")
        parent[row] = par
        depth_of[row] = dep
    return TreeInstance(parent, depth_of, depth)
