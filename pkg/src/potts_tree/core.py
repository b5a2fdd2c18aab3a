"""Channel parametrization and simplex arithmetic for the q-state Potts model on trees.

The symmetric channel acts edge-wise on a rooted tree: a symbol is kept with
probability e^{2*beta}/(e^{2*beta}+q-1) and switched to each one of the other
q-1 symbols with probability 1/(e^{2*beta}+q-1).  Threshold solvers, belief
propagation and the Monte-Carlo estimators all consume the derived spectral
quantities defined here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "PottsChannel",
    "ProbVector",
    "MessageVector",
    "lambda2",
    "beta_of_epsilon",
    "lambda_of_epsilon",
    "epsilon_total_of_beta",
    "channel_matrix",
    "u",
    "utilde",
    "phi",
    "symmetrize",
]

# Normalization slack accepted on simplex vectors after any public operation.
SIMPLEX_ATOL = 1e-12

# Factorial enumeration cap for the exact symmetrization operator.
SYMMETRIZE_MAX_Q = 6


@dataclass(frozen=True)
class PottsChannel:
    """Symmetric q-ary noisy channel at inverse temperature beta.

    Parameters
    ----------
    q : int
        Number of symbols, q >= 2.
    beta : float
        Inverse temperature, finite and >= 0.
    """

    q: int
    beta: float

    def __post_init__(self) -> None:
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise ValueError(f"q must be an integer >= 2, got {self.q!r}")
        if self.q < 2:
            raise ValueError(f"q must be an integer >= 2, got {self.q!r}")
        b = float(self.beta)
        if not math.isfinite(b) or b < 0.0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "beta", b)

    @property
    def agree_weight(self) -> float:
        """Boltzmann weight e^{2*beta} carried by an edge whose endpoints agree."""
        return math.exp(2.0 * self.beta)

    @property
    def theta(self) -> float:
        """tanh(beta), in [0, 1)."""
        return math.tanh(self.beta)

    @property
    def lambda2(self) -> float:
        """Second eigenvalue of the channel matrix, (e^{2b}-1)/(e^{2b}+q-1)."""
        a = self.agree_weight
        return (a - 1.0) / (a + self.q - 1.0)

    @property
    def stay_probability(self) -> float:
        """Probability that a symbol survives one edge unchanged."""
        a = self.agree_weight
        return a / (a + self.q - 1.0)

    @property
    def epsilon_per_symbol(self) -> float:
        """Probability of switching to one particular other symbol."""
        return 1.0 / (self.agree_weight + self.q - 1.0)

    @property
    def epsilon_total(self) -> float:
        """Total probability of leaving the current symbol, (q-1)*epsilon_per_symbol."""
        return (self.q - 1.0) / (self.agree_weight + self.q - 1.0)


@dataclass(frozen=True)
class ProbVector:
    """Probability vector on the q symbols; validated point of the simplex.

    Symbol labels run from 1 to q; ``entries[i]`` is the mass of symbol i+1.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("ProbVector requires a 1-D array of length >= 2")
        if not np.isfinite(arr).all() or np.any(arr < 0.0):
            raise ValueError("ProbVector entries must be finite and nonnegative")
        if abs(float(arr.sum()) - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"ProbVector entries must sum to 1, got {arr.sum()!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def q(self) -> int:
        return int(self.entries.size)

    @classmethod
    def uniform(cls, q: int) -> "ProbVector":
        return cls(np.full(q, 1.0 / q))

    @classmethod
    def delta(cls, q: int, symbol: int) -> "ProbVector":
        """Point mass on one symbol (1-based label)."""
        if not 1 <= symbol <= q:
            raise ValueError(f"symbol must be in 1..{q}, got {symbol}")
        arr = np.zeros(q)
        arr[symbol - 1] = 1.0
        return cls(arr)

    def __getitem__(self, symbol: int) -> float:
        """Mass of a symbol (1-based label)."""
        if not 1 <= symbol <= self.q:
            raise IndexError(f"symbol must be in 1..{self.q}, got {symbol}")
        return float(self.entries[symbol - 1])


@dataclass(frozen=True)
class MessageVector:
    """Per-symbol log-likelihood weights at a vertex, gauge-fixed to max entry 0.

    Only the pairwise differences logweights[j] - logweights[k] carry meaning;
    the max-entry-zero gauge makes exponentiation overflow-free.  Entries may
    be -inf (symbols excluded by a hard boundary condition).
    """

    logweights: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.logweights, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("MessageVector requires a 1-D array of length >= 2")
        if np.isnan(arr).any() or np.isposinf(arr).any():
            raise ValueError("MessageVector entries must be < +inf and not NaN")
        top = float(arr.max())
        if not math.isfinite(top):
            raise ValueError("MessageVector needs at least one finite entry")
        arr = arr - top
        arr.flags.writeable = False
        object.__setattr__(self, "logweights", arr)

    @property
    def q(self) -> int:
        return int(self.logweights.size)

    def ratio(self, j: int, k: int) -> float:
        """Log-likelihood ratio of symbol j against symbol k (1-based labels).

        Two equal entries give 0 even when both are -inf (a pair of
        impossible symbols is treated as equally weighted).
        """
        a = float(self.logweights[j - 1])
        b = float(self.logweights[k - 1])
        if a == b:
            return 0.0
        return a - b

    def to_probvector(self) -> ProbVector:
        w = np.exp(self.logweights)
        return ProbVector(w / w.sum())

    @classmethod
    def from_probvector(cls, pv: ProbVector) -> "MessageVector":
        with np.errstate(divide="ignore"):
            return cls(np.log(pv.entries))


def lambda2(ch: PottsChannel) -> float:
    """Second eigenvalue of the channel matrix; equals tanh(beta) when q=2."""
    return ch.lambda2


def epsilon_total_of_beta(beta: float, q: int) -> float:
    """Total flip probability of the channel at inverse temperature beta."""
    return PottsChannel(q, beta).epsilon_total


def beta_of_epsilon(eps: float, q: int) -> float:
    """Inverse temperature whose total flip probability equals eps.

    Inverse of :func:`epsilon_total_of_beta` on (0, (q-1)/q).
    """
    if not 0.0 < eps < (q - 1.0) / q:
        raise ValueError(f"eps must lie in (0, (q-1)/q) = (0, {(q - 1.0) / q}), got {eps}")
    return -0.5 * math.log(eps / ((q - 1.0) * (1.0 - eps)))


def lambda_of_epsilon(eps: float, q: int) -> float:
    """Second eigenvalue as a function of the total flip probability."""
    if not 0.0 <= eps <= (q - 1.0) / q:
        raise ValueError(f"eps must lie in [0, (q-1)/q], got {eps}")
    return 1.0 - q * eps / (q - 1.0)


def channel_matrix(ch: PottsChannel) -> np.ndarray:
    """q x q transition matrix: stay probability on the diagonal, rest uniform.

    Symmetric and doubly stochastic; every row is a valid ProbVector.
    """
    q = ch.q
    m = np.full((q, q), ch.epsilon_per_symbol)
    np.fill_diagonal(m, ch.stay_probability)
    return m


def u(p, ch: PottsChannel):
    """Log boundary weight log(1 + p*(e^{2*beta}-1)); scalar or elementwise."""
    return np.log1p(np.asarray(p, dtype=float) * (ch.agree_weight - 1.0))


def utilde(p, ch: PottsChannel):
    """u centered at the uniform point: utilde(p) = u(p) - u(1/q).

    Evaluated as log1p(q*lambda2*(p - 1/q)) so that utilde(1/q) is exactly 0
    and no precision is lost near the center.
    """
    p = np.asarray(p, dtype=float)
    return np.log1p(ch.q * ch.lambda2 * (p - 1.0 / ch.q))


def phi(x):
    """Entropy kernel (x-1)*log(x) for x >= 0, with phi(0) = +inf.

    Nonnegative on its whole domain and zero only at x=1.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("phi requires x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (x - 1.0) * np.log(x)
    out = np.where(x == 0.0, np.inf, out)
    if out.ndim == 0:
        return float(out)
    return out


def symmetrize(f: Callable[[np.ndarray], float], p: Union[ProbVector, Sequence[float]]) -> float:
    """Exact average of f over all q! coordinate permutations of p.

    Factorial enumeration, so only supported for q <= 6; intended for
    validating closed symmetrized forms, not for production paths.
    """
    entries = p.entries if isinstance(p, ProbVector) else np.asarray(p, dtype=float)
    q = entries.size
    if q > SYMMETRIZE_MAX_Q:
        raise ValueError(f"symmetrize supports q <= {SYMMETRIZE_MAX_Q}, got q={q}")
    total = 0.0
    for perm in itertools.permutations(entries.tolist()):
        total += f(np.array(perm))
    return total / math.factorial(q)
