"""Monte-Carlo engine for the broadcast chain and its boundary statistics.

A symbol is broadcast from the root of a tree through independent copies of
the symmetric q-ary channel.  Drawing the root uniformly yields an exact
sample from the free-boundary Gibbs measure, so boundary functionals of
that measure can be estimated without any MCMC.  The leaf-to-root
log-likelihood recursion (belief propagation, exact on trees) turns each
sampled boundary into the conditional root marginal, from which two
observables are built:

* the boundary relative entropy m0(N), estimated by entropy_mc as the
  average of (1/(q-1)) * sum_i phi(q * p_i) over sampled boundaries;
* the probability that the conditional root marginal deviates from the
  uniform vector by at least eps, estimated by root_deviation_probe.

Determinism contract: trial t draws everything it needs from a
counter-based substream keyed by (seed, t), so results depend only on the
inputs and the seed, never on chunking, thread count, or schedule.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import MessageVector, PottsChannel, ProbVector
from .rng import aux_stream, philox_stream
from .tree import (
    OffspringDistribution,
    TreeInstance,
    galton_watson_tree_from,
    regular_tree,
)

__all__ = [
    "UNIFORM",
    "SpinConfiguration",
    "EntropyEstimate",
    "DeviationPoint",
    "broadcast",
    "bp_root_marginal",
    "bp_all_messages",
    "entropy_mc",
    "root_deviation_probe",
]

_LOG_FLOOR = math.log(1e-300)  # marginal entries are clamped here before logs
_CHUNK = 512  # trials per vectorized batch; never affects results


class _UniformRoot:
    """Sentinel for broadcast: draw the root symbol uniformly."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "UNIFORM"


UNIFORM = _UniformRoot()

TreeSpec = Union[TreeInstance, OffspringDistribution, int]


def _worker_count() -> int:
    """Thread cap from POTTS_TREE_THREADS; affects speed only, never output."""
    raw = os.environ.get("POTTS_TREE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, min(n, 64))


def _ordered_chunk_map(func, chunks: list) -> list:
    """Apply func to independent chunks, preserving order; optionally threaded."""
    workers = _worker_count()
    if workers == 1 or len(chunks) <= 1:
        return [func(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, chunks))


# ---------------------------------------------------------------------------
# spin configurations and broadcasting


@dataclass(frozen=True, eq=False)
class SpinConfiguration:
    """Symbols in {1, ..., q}, one per node of a tree."""

    tree: TreeInstance
    symbols: np.ndarray
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")
        symbols = np.asarray(self.symbols, dtype=np.int64)
        if symbols.shape != (self.tree.n_nodes,):
            raise ValueError(
                f"expected {self.tree.n_nodes} symbols, got shape {symbols.shape}"
            )
        if symbols.min(initial=1) < 1 or symbols.max(initial=1) > self.q:
            raise ValueError(f"symbols must lie in 1..{self.q}")
        symbols = symbols.copy()
        symbols.flags.writeable = False
        object.__setattr__(self, "symbols", symbols)

    def symbol(self, v: int) -> int:
        return int(self.symbols[v])

    def boundary_symbols(self) -> np.ndarray:
        """Symbols of the depth-N nodes, in BFS order."""
        return self.symbols[self.tree.boundary_nodes()]


def _symbols_from_uniforms(
    tree: TreeInstance,
    ch: PottsChannel,
    root_symbol,
    us: np.ndarray,
) -> np.ndarray:
    """Map i.i.d. uniforms (one per node, leading axes = batch) to symbols.

    A single uniform decides each child symbol: u below the stay probability
    keeps the parent symbol, the remainder is split evenly among the other
    q-1 symbols.
    """
    q = ch.q
    stay = ch.stay_probability
    eps = ch.epsilon_per_symbol
    syms = np.empty(us.shape, dtype=np.int64)
    if isinstance(root_symbol, _UniformRoot):
        syms[..., 0] = 1 + np.minimum((us[..., 0] * q).astype(np.int64), q - 1)
    else:
        syms[..., 0] = int(root_symbol)
    for g in range(1, tree.depth + 1):
        lo, hi = tree.generation_bounds(g)
        if lo == hi:
            break
        parent_sym = syms[..., tree.parent[lo:hi]]
        u = us[..., lo:hi]
        flip = u >= stay
        # clamp in float space first: (u - stay)/eps is huge when eps is tiny
        idx = np.clip((u - stay) / eps, 0.0, float(q - 2))
        other = idx.astype(np.int64) + 1
        other = other + (other >= parent_sym)
        syms[..., lo:hi] = np.where(flip, other, parent_sym)
    return syms


def broadcast(
    tree: TreeInstance,
    ch: PottsChannel,
    root_symbol=UNIFORM,
    seed: int = 0,
) -> SpinConfiguration:
    """Sample one spin configuration by broadcasting from the root.

    With root_symbol=UNIFORM this is an exact sample from the free-boundary
    Gibbs measure; with a fixed symbol it samples the root-conditioned
    measure.  Deterministic for a fixed seed.
    """
    if not isinstance(root_symbol, _UniformRoot):
        root_symbol = int(root_symbol)
        if not (1 <= root_symbol <= ch.q):
            raise ValueError(f"root_symbol must lie in 1..{ch.q}, got {root_symbol}")
    us = philox_stream(seed, 0).random(tree.n_nodes)
    symbols = _symbols_from_uniforms(tree, ch, root_symbol, us)
    return SpinConfiguration(tree=tree, symbols=symbols, q=ch.q)


# ---------------------------------------------------------------------------
# exact conditional root marginal (belief propagation, leaf to root)


def _boundary_array(tree: TreeInstance, q: int, boundary) -> np.ndarray:
    lo, hi = tree.generation_bounds(tree.depth)
    n_boundary = hi - lo
    if isinstance(boundary, SpinConfiguration):
        same = boundary.tree is tree or (
            boundary.tree.n_nodes == tree.n_nodes
            and np.array_equal(boundary.tree.parent, tree.parent)
        )
        if not same:
            raise ValueError("boundary configuration lives on a different tree")
        if boundary.q != q:
            raise ValueError(f"boundary has q = {boundary.q}, channel has q = {q}")
        return boundary.boundary_symbols()
    arr = np.asarray(boundary, dtype=np.int64)
    if arr.shape != (n_boundary,):
        raise ValueError(
            f"boundary must assign one symbol to each of the {n_boundary} "
            f"depth-{tree.depth} nodes, got shape {arr.shape}"
        )
    if n_boundary and (arr.min() < 1 or arr.max() > q):
        raise ValueError(f"boundary symbols must lie in 1..{q}")
    return arr


def _bp_generation_step(
    tree: TreeInstance, ch: PottsChannel, g: int, p_child: np.ndarray
) -> np.ndarray:
    """Conditional marginals of generation g from those of generation g+1.

    p_child holds normalized subtree marginals for the generation-g+1 block
    (leading axes = batch).  Children of a node are contiguous there, so the
    per-parent sums of log1p((a-1)*p) are differences of a cumulative sum;
    childless nodes get an empty segment and hence the uniform marginal.
    """
    lo, hi = tree.generation_bounds(g)
    clo, _ = tree.generation_bounds(g + 1)
    term = np.log1p((ch.agree_weight - 1.0) * p_child)
    pad_shape = term.shape[:-2] + (term.shape[-2] + 1, term.shape[-1])
    cpad = np.zeros(pad_shape, dtype=float)
    np.cumsum(term, axis=-2, out=cpad[..., 1:, :])
    starts = tree.first_child[lo:hi] - clo
    ends = starts + tree.n_children[lo:hi]
    scores = np.take(cpad, ends, axis=-2) - np.take(cpad, starts, axis=-2)
    scores -= scores.max(axis=-1, keepdims=True)
    w = np.exp(scores)
    return w / w.sum(axis=-1, keepdims=True)


def _one_hot(symbols: np.ndarray, q: int) -> np.ndarray:
    return np.eye(q, dtype=float)[symbols - 1]


def _bp_root_scores(
    tree: TreeInstance, ch: PottsChannel, boundary_batch: np.ndarray
) -> np.ndarray:
    """Gauged log-weights of the root marginal for a batch of boundaries.

    boundary_batch has shape (..., n_boundary) of symbols in 1..q; the
    return value has shape (..., q) with max entry 0.
    """
    q = ch.q
    if tree.depth == 0:
        shape = boundary_batch.shape[:-1] + (q,)
        return np.zeros(shape, dtype=float)
    p = _one_hot(boundary_batch, q)
    for g in range(tree.depth - 1, 0, -1):
        p = _bp_generation_step(tree, ch, g, p)
    term = np.log1p((ch.agree_weight - 1.0) * p)
    scores = term.sum(axis=-2)
    scores -= scores.max(axis=-1, keepdims=True)
    return scores


def bp_root_marginal(tree: TreeInstance, ch: PottsChannel, boundary) -> ProbVector:
    """Exact conditional root marginal given the depth-N boundary symbols.

    Single leaf-to-root sweep in the log domain with max gauge; entries are
    strictly positive for finite beta.  A depth-0 tree has an empty
    boundary and returns the uniform vector.
    """
    if tree.depth == 0:
        return ProbVector.uniform(ch.q)
    arr = _boundary_array(tree, ch.q, boundary)
    scores = _bp_root_scores(tree, ch, arr[np.newaxis, :])[0]
    w = np.exp(scores)
    return ProbVector(w / w.sum())


def bp_all_messages(tree: TreeInstance, ch: PottsChannel, boundary) -> list[MessageVector]:
    """Per-node gauged log-marginals of every subtree root, leaf to root.

    Index v of the returned list is the message of the subtree rooted at
    node v: a boundary node carries its one-hot constraint (zero at the
    observed symbol, -inf elsewhere), an interior node the log of its
    conditional marginal given the boundary below it.  The root entry is
    consistent with bp_root_marginal.
    """
    q = ch.q
    messages: list[MessageVector | None] = [None] * tree.n_nodes
    if tree.depth == 0:
        return [MessageVector(np.zeros(q))]
    arr = _boundary_array(tree, q, boundary)
    lo, hi = tree.generation_bounds(tree.depth)
    p = _one_hot(arr, q)
    with np.errstate(divide="ignore"):
        logs = np.log(p)
    for v, row in zip(range(lo, hi), logs):
        messages[v] = MessageVector(row)
    for g in range(tree.depth - 1, -1, -1):
        p = _bp_generation_step(tree, ch, g, p)
        glo, ghi = tree.generation_bounds(g)
        with np.errstate(divide="ignore"):
            logs = np.log(p)
        logs -= logs.max(axis=-1, keepdims=True)
        for v, row in zip(range(glo, ghi), logs):
            messages[v] = MessageVector(row)
    return messages  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Monte-Carlo estimators


@dataclass(frozen=True)
class EntropyEstimate:
    """Monte-Carlo estimate of the boundary relative entropy m0(N).

    The estimand is a relative entropy, hence nonnegative; the per-trial
    statistic is itself nonnegative, so mean >= -3*std_error is enforced as
    a sanity gate.  d_spec records the tree specification for logs.
    """

    mean: float
    std_error: float
    trials: int
    depth: int
    channel: PottsChannel
    seed: int
    d_spec: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.std_error < 0.0 or not math.isfinite(self.std_error):
            raise ValueError(f"std_error must be finite and >= 0, got {self.std_error}")
        if self.mean < -3.0 * self.std_error:
            raise ValueError(
                f"mean = {self.mean} below -3 std errors; estimand is nonnegative"
            )

    def to_json_dict(self) -> dict:
        """Documented dump schema; key order is part of the interface."""
        return {
            "q": self.channel.q,
            "beta": self.channel.beta,
            "d_spec": self.d_spec,
            "depth": self.depth,
            "trials": self.trials,
            "seed": self.seed,
            "mean": self.mean,
            "std_error": self.std_error,
        }


@dataclass(frozen=True)
class DeviationPoint:
    """Exceedance fraction of the root marginal at one depth.

    fraction is for the fixed symbol s=1; fraction_max is the maximum over
    all s (permutation symmetry makes them agree up to noise, which is the
    point of reporting both).  std_error is the binomial error of fraction.
    """

    depth: int
    fraction: float
    std_error: float
    fraction_max: float
    trials: int
    eps: float


def _entropy_stat_from_scores(scores: np.ndarray, q: int) -> np.ndarray:
    """Per-trial statistic (1/(q-1)) * sum_i phi(q*p_i) from gauged scores.

    Computed from unnormalized weights so that a flat score vector gives
    exactly 0; marginal entries are clamped at 1e-300 before the log.
    """
    w = np.exp(scores)
    z = w.sum(axis=-1, keepdims=True)
    e = (q * w - z) / z
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.maximum(np.log1p(e), _LOG_FLOOR)
    return (e * lg).sum(axis=-1) / (q - 1.0)


def _spec_tree_and_label(tree_spec: TreeSpec, depth: int, seed: int, quenched: bool):
    """Resolve a tree spec to (fixed tree or None, distribution or None, label)."""
    if isinstance(tree_spec, TreeInstance):
        if tree_spec.depth != depth:
            raise ValueError(
                f"tree has depth {tree_spec.depth}, requested depth {depth}"
            )
        return tree_spec, None, f"tree:{tree_spec.n_nodes}"
    if isinstance(tree_spec, OffspringDistribution):
        label = f"gw:{tree_spec.spec_string()}"
        if quenched:
            # one tree for the whole run, drawn off the trial streams
            tree = galton_watson_tree_from(tree_spec, depth, aux_stream(seed, 0))
            return tree, None, label + "|quenched"
        return None, tree_spec, label
    d = int(tree_spec)
    return regular_tree(d, depth), None, f"regular:{d}"


def _fixed_tree_scores(
    tree: TreeInstance,
    ch: PottsChannel,
    seed: int,
    trial_range: range,
    stream_base: int = 0,
) -> np.ndarray:
    """Gauged root scores for a block of trials on one fixed tree."""
    n = tree.n_nodes
    us = np.empty((len(trial_range), n), dtype=float)
    for row, t in enumerate(trial_range):
        us[row] = philox_stream(seed, stream_base + t).random(n)
    symbols = _symbols_from_uniforms(tree, ch, UNIFORM, us)
    lo, hi = tree.generation_bounds(tree.depth)
    return _bp_root_scores(tree, ch, symbols[:, lo:hi])


def _gw_trial_scores(
    dist: OffspringDistribution,
    ch: PottsChannel,
    depth: int,
    seed: int,
    trial_range: range,
    stream_base: int = 0,
) -> np.ndarray:
    """Gauged root scores, one fresh Galton-Watson tree per trial."""
    out = np.empty((len(trial_range), ch.q), dtype=float)
    for row, t in enumerate(trial_range):
        rng = philox_stream(seed, stream_base + t)
        tree = galton_watson_tree_from(dist, depth, rng)
        us = rng.random(tree.n_nodes)
        symbols = _symbols_from_uniforms(tree, ch, UNIFORM, us)
        lo, hi = tree.generation_bounds(tree.depth)
        out[row] = _bp_root_scores(tree, ch, symbols[np.newaxis, lo:hi])[0]
    return out


def _all_root_scores(
    tree_spec: TreeSpec,
    ch: PottsChannel,
    depth: int,
    trials: int,
    seed: int,
    quenched: bool,
    stream_base: int = 0,
) -> tuple[np.ndarray, str]:
    """Root scores for all trials, in trial order, plus the d_spec label."""
    tree, dist, label = _spec_tree_and_label(tree_spec, depth, seed, quenched)
    chunks = [range(t0, min(t0 + _CHUNK, trials)) for t0 in range(0, trials, _CHUNK)]
    if tree is not None:
        blocks = _ordered_chunk_map(
            lambda r: _fixed_tree_scores(tree, ch, seed, r, stream_base), chunks
        )
    else:
        blocks = _ordered_chunk_map(
            lambda r: _gw_trial_scores(dist, ch, depth, seed, r, stream_base), chunks
        )
    return np.concatenate(blocks, axis=0), label


def entropy_mc(
    tree_spec: TreeSpec,
    ch: PottsChannel,
    depth: int,
    trials: int,
    seed: int,
    quenched: bool = False,
) -> EntropyEstimate:
    """Estimate the boundary relative entropy at the given depth.

    Each trial broadcasts from a uniform root, conditions back on the
    sampled boundary, and evaluates (1/(q-1)) * sum_i phi(q*p_i) at the
    conditional root marginal p.  tree_spec is a fixed TreeInstance, a
    regular arity (int), or an OffspringDistribution; Galton-Watson trees
    are redrawn every trial (annealed) unless quenched=True fixes one draw.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    scores, label = _all_root_scores(tree_spec, ch, depth, trials, seed, quenched)
    values = _entropy_stat_from_scores(scores, ch.q)
    mean = float(values.mean())
    if trials > 1:
        std_error = float(values.std(ddof=1) / math.sqrt(trials))
    else:
        std_error = 0.0
    return EntropyEstimate(
        mean=mean,
        std_error=std_error,
        trials=trials,
        depth=depth,
        channel=ch,
        seed=seed,
        d_spec=label,
    )


def root_deviation_probe(
    tree_spec: TreeSpec,
    ch: PottsChannel,
    depths: Sequence[int],
    trials: int,
    seed: int,
    eps: float,
    quenched: bool = False,
) -> list[DeviationPoint]:
    """Fraction of boundaries whose conditional root marginal strays from 1/q.

    For each depth N the estimate is the fraction of trials with
    |p_1 - 1/q| >= eps at the conditional root marginal; the maximum of the
    per-symbol fractions is reported alongside.  Depth j trials use streams
    (seed, j*trials + t), so runs over different depth lists stay aligned.
    """
    q = ch.q
    if not (0.0 < eps < 1.0 - 1.0 / q):
        raise ValueError(f"eps must lie in (0, 1 - 1/q), got {eps}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    points = []
    for j, depth in enumerate(depths):
        scores, _ = _all_root_scores(
            tree_spec, ch, int(depth), trials, seed, quenched, stream_base=j * trials
        )
        w = np.exp(scores)
        p = w / w.sum(axis=-1, keepdims=True)
        exceed = np.abs(p - 1.0 / q) >= eps
        fractions = exceed.mean(axis=0)
        frac = float(fractions[0])
        points.append(
            DeviationPoint(
                depth=int(depth),
                fraction=frac,
                std_error=math.sqrt(frac * (1.0 - frac) / trials),
                fraction_max=float(fractions.max()),
                trials=trials,
                eps=eps,
            )
        )
    return points
