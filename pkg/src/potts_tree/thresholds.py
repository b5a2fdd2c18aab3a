"""Analytic thresholds for the free-boundary Potts model on a rooted tree.

Three temperature scales matter for broadcasting a q-state symbol down a
tree with mean offspring number d:

* the ferromagnetic ordering threshold, where the scalar boundary-field
  recursion X -> d*psi(X) first acquires a strictly positive fixed point;
* the extremality (non-reconstruction) bound beta_c, the root of
  d * lambda2 * cbar = 1, where cbar is an optimized constant over the
  simplex of root frequency vectors;
* the Kesten-Stigum point, where d * lambda2**2 = 1.

The constant cbar is a supremum of a ratio of two entropy-like sums over
the probability simplex; its restriction chat to a one-parameter symmetric
slice is cheap to evaluate and is conjectured (and numerically observed)
to equal cbar.  Both ratios degenerate to 0/0 at the uniform vector, where
they are extended by their common quadratic limit lambda2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from .core import PottsChannel
from .rng import philox_stream

__all__ = [
    "OptimizerSettings",
    "DEFAULT_SETTINGS",
    "SWEEP_SETTINGS",
    "SolverError",
    "psi",
    "ferro_threshold",
    "lambda_q",
    "slice_interval",
    "slice_ratio",
    "simplex_ratio",
    "chat",
    "cbar",
    "criterion_value",
    "beta_c",
    "KestenStigumPoint",
    "kesten_stigum",
    "Table2Row",
    "reproduce_table2",
    "ExcessSweep",
    "EXCESS_BETA_GRID",
    "epsilon_excess",
    "ThresholdReport",
    "threshold_report",
]

# Default beta grid for the excess sweep: [0.05, 3.0] in steps of 0.005.
EXCESS_BETA_GRID = np.linspace(0.05, 3.0, 591)
EXCESS_BETA_GRID.flags.writeable = False

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_CENTER_RADIUS = 1e-6  # Euclidean exclusion ball around the uniform vector


class SolverError(RuntimeError):
    """A root finder or optimizer failed; carries bracketing diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs for the simplex/slice optimizers.

    grid_points controls the 1-D scan density, refine_iterations the local
    polish budget, random_restarts the number of seeded Dirichlet restarts
    of the full-simplex search.  Results are deterministic given rng_seed.
    """

    grid_points: int = 1024
    refine_iterations: int = 200
    random_restarts: int = 8
    tolerance: float = 1e-10
    rng_seed: int = 1729

    def __post_init__(self):
        if self.grid_points < 16:
            raise ValueError(f"grid_points must be >= 16, got {self.grid_points}")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be >= 0")
        if self.random_restarts < 0:
            raise ValueError("random_restarts must be >= 0")
        if not (self.tolerance > 0.0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")


DEFAULT_SETTINGS = OptimizerSettings()

# Lighter settings for dense beta sweeps; accuracy still far below the
# tolerances of interest because the slice value certifies every run.
SWEEP_SETTINGS = OptimizerSettings(
    grid_points=512, refine_iterations=120, random_restarts=2
)


# ---------------------------------------------------------------------------
# scalar boundary-field recursion


def psi(x: float, ch: PottsChannel) -> float:
    """One step of the uniform-boundary field recursion.

    psi(X) = log((q-1+a*e^X) / (q-2+a+e^X)) with a = e^{2 beta}.  psi(0)=0,
    psi is strictly increasing, psi(X) -> 2 beta as X -> +inf, and
    psi'(0) = lambda2.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    a = ch.agree_weight
    q = ch.q
    if x <= 30.0:
        # numerator - denominator = (a-1)*(e^X - 1); expm1/log1p keep
        # full precision near the fixed point X=0
        return math.log1p((a - 1.0) * math.expm1(x) / (q - 2.0 + a + math.exp(x)))
    t = math.exp(-x)
    return 2.0 * ch.beta + math.log1p((q - 1.0) * t / a) - math.log1p((q - 2.0 + a) * t)


def _psi_vec(xs: np.ndarray, ch: PottsChannel) -> np.ndarray:
    a = ch.agree_weight
    q = ch.q
    xs = np.asarray(xs, dtype=float)
    out = np.empty_like(xs)
    small = xs <= 30.0
    xs_s = xs[small]
    out[small] = np.log1p((a - 1.0) * np.expm1(xs_s) / (q - 2.0 + a + np.exp(xs_s)))
    xl = xs[~small]
    t = np.exp(-xl)
    out[~small] = 2.0 * ch.beta + np.log1p((q - 1.0) * t / a) - np.log1p((q - 2.0 + a) * t)
    return out


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, iterations: int
) -> tuple[float, float]:
    """Golden-section maximum of a unimodal f on [lo, hi]."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = f(c)
    fd = f(d)
    for _ in range(iterations):
        if fc < fd:
            lo = c
            c, fc = d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
        else:
            hi = d
            d, fd = c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        if hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
    if fc >= fd:
        return c, fc
    return d, fd


def _recursion_gap(d: int, ch: PottsChannel, n_grid: int) -> float:
    """max over X > 0 of d*psi(X) - X; positive iff a positive fixed point exists.

    The transition is first order, so a geometric scan finds the bump; every
    interior local maximum of the scan is polished because near tangency the
    bump is shallow and easily missed by refining the global grid argmax only.
    """
    hi = max(4.0 * ch.beta * d, 1.0)
    xs = np.geomspace(1e-8, hi, n_grid)
    fs = d * _psi_vec(xs, ch) - xs
    best = float(fs.max())

    def f(x: float) -> float:
        return d * psi(x, ch) - x

    interior = [i for i in range(1, n_grid - 1) if fs[i] >= fs[i - 1] and fs[i] >= fs[i + 1]]
    interior.sort(key=lambda i: -fs[i])
    for i in interior[:8]:
        _, val = _golden_max(f, xs[i - 1], xs[i + 1], 80)
        best = max(best, val)
    return best


def _ferro_threshold_info(d: int, q: int, n_grid: int = 2048) -> tuple[float, dict]:
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")

    def ordered(beta: float) -> bool:
        return _recursion_gap(d, PottsChannel(q, beta), n_grid) > 0.0

    lo = 1e-6
    if ordered(lo):
        raise SolverError(
            "positive fixed point already present at the lower bracket",
            {"d": d, "q": q, "beta_lo": lo},
        )
    hi = 1.0
    while not ordered(hi):
        lo = hi
        hi *= 2.0
        if hi > 64.0:
            raise SolverError(
                "no ordered phase found up to beta = 64",
                {"d": d, "q": q, "beta_hi": hi},
            )
    bracket = (lo, hi)
    iterations = 0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if ordered(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1
    return 0.5 * (lo + hi), {"bracket": bracket, "iterations": iterations}


def ferro_threshold(d: int, q: int) -> float:
    """Infimum of beta at which X -> d*psi(X) has a strictly positive fixed point.

    Located by scanning X for a positive recursion gap and bisecting in beta.
    Closed forms atanh(1/d) (q=2) and 0.5*log(1+2*sqrt(q-1)) (d=2) are
    recovered to well below 1e-8.
    """
    beta, _ = _ferro_threshold_info(d, q)
    return beta


# ---------------------------------------------------------------------------
# the optimized constant: 1-D slice


def lambda_q(ch: PottsChannel) -> float:
    """Slice-ratio parameter (e^{2b}-1)/(1+(e^{2b}-1)/q); equals q*lambda2."""
    return ch.q * ch.lambda2


def slice_interval(q: int) -> tuple[float, float]:
    """Domain [-1/q, 1/(q(q-1))] of the symmetric-slice coordinate."""
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    return (-1.0 / q, 1.0 / (q * (q - 1.0)))


def slice_ratio(x: float, ch: PottsChannel, center_radius: float = _CENTER_RADIUS) -> float:
    """Ratio log((1+Lx)/(1-L(q-1)x)) / log((1+qx)/(1-q(q-1)x)), L = lambda_q.

    The removable 0/0 singularity at x=0 is filled with its limit lambda2
    inside |x| < center_radius; the interval endpoints (where the
    denominator diverges) return the limit value 0.
    """
    q = ch.q
    lo, hi = slice_interval(q)
    x = float(x)
    if not (lo <= x <= hi):
        raise ValueError(f"x = {x} outside slice interval [{lo}, {hi}]")
    if abs(x) < center_radius:
        return ch.lambda2
    lam = lambda_q(ch)
    arg_lo = 1.0 + q * x
    arg_hi = 1.0 - q * (q - 1.0) * x
    if arg_lo <= 0.0 or arg_hi <= 0.0:
        return 0.0
    num = math.log1p(lam * x) - math.log1p(-lam * (q - 1.0) * x)
    den = math.log1p(q * x) - math.log1p(-q * (q - 1.0) * x)
    return num / den


def _slice_ratio_vec(xs: np.ndarray, ch: PottsChannel, center_radius: float) -> np.ndarray:
    q = ch.q
    lam = lambda_q(ch)
    xs = np.asarray(xs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.log1p(lam * xs) - np.log1p(-lam * (q - 1.0) * xs)
        den = np.log1p(q * xs) - np.log1p(-q * (q - 1.0) * xs)
        out = num / den
    out = np.where(np.abs(xs) < center_radius, ch.lambda2, out)
    return np.where(np.isfinite(out), out, 0.0)


def _chat_with_argmax(
    ch: PottsChannel,
    settings: OptimizerSettings,
    center_radius: float,
) -> tuple[float, float, dict]:
    if not (ch.beta > 0.0):
        raise ValueError(f"beta must be positive, got {ch.beta}")
    lo, hi = slice_interval(ch.q)
    xs = np.linspace(lo + 1e-9, hi - 1e-9, settings.grid_points)
    fs = _slice_ratio_vec(xs, ch, center_radius)

    def f(x: float) -> float:
        return slice_ratio(x, ch, center_radius)

    # limit value at the center is always a valid candidate
    best_val, best_x = ch.lambda2, 0.0
    i0 = int(np.argmax(fs))
    if fs[i0] > best_val:
        best_val, best_x = float(fs[i0]), float(xs[i0])
    interior = [
        i
        for i in range(1, settings.grid_points - 1)
        if fs[i] >= fs[i - 1] and fs[i] >= fs[i + 1]
    ]
    interior.sort(key=lambda i: -fs[i])
    for i in interior[:4]:
        x_ref, val = _golden_max(f, xs[i - 1], xs[i + 1], settings.refine_iterations)
        if val > best_val:
            best_val, best_x = val, x_ref
    return best_val, best_x, {"grid_points": settings.grid_points}


def chat(
    ch: PottsChannel,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
    center_radius: float = _CENTER_RADIUS,
) -> float:
    """Supremum of the slice ratio over the interior of its interval.

    Grid scan plus golden-section refinement of every interior local
    maximum; the center limit lambda2 is always included as a candidate,
    so chat >= lambda2.
    """
    val, _, _ = _chat_with_argmax(ch, settings, center_radius)
    return val


# ---------------------------------------------------------------------------
# the optimized constant: full simplex


def simplex_ratio(p, ch: PottsChannel, center_radius: float = _CENTER_RADIUS) -> float:
    """Entropy-production ratio at a frequency vector p on the q-simplex.

    With e_i = q*p_i - 1 the ratio is sum(e_i*log1p(lambda2*e_i)) over
    sum(e_i*log1p(e_i)); both sums have nonnegative terms.  Inside a
    center_radius Euclidean ball around the uniform vector the value is the
    quadratic limit lambda2; on the simplex boundary the denominator
    diverges and the value is the limit 0.
    """
    q = ch.q
    p = np.asarray(p, dtype=float)
    if p.shape != (q,):
        raise ValueError(f"p must have shape ({q},), got {p.shape}")
    if np.any(p < -1e-12) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError("p must be a probability vector")
    if float(np.linalg.norm(p - 1.0 / q)) < center_radius:
        return ch.lambda2
    e = q * p - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        num = float(np.sum(e * np.log1p(ch.lambda2 * e)))
        den = float(np.sum(np.where(e == 0.0, 0.0, e * np.log1p(e))))
    if not math.isfinite(den):
        return 0.0
    return num / den


def _simplex_ratio_batch(ps: np.ndarray, ch: PottsChannel, center_radius: float) -> np.ndarray:
    """Row-wise simplex_ratio for an (m, q) array of probability vectors."""
    q = ch.q
    e = q * ps - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.sum(e * np.log1p(ch.lambda2 * e), axis=1)
        den = np.sum(np.where(e == 0.0, 0.0, e * np.log1p(e)), axis=1)
        out = num / den
    central = np.linalg.norm(ps - 1.0 / q, axis=1) < center_radius
    out = np.where(central, ch.lambda2, out)
    return np.where(np.isfinite(out), out, 0.0)


def _slice_point(x: float, q: int) -> np.ndarray:
    """Simplex point of the symmetric slice: q-1 entries 1/q+x, one 1/q-(q-1)x."""
    p = np.full(q, 1.0 / q + x)
    p[-1] = 1.0 / q - (q - 1.0) * x
    return np.clip(p, 0.0, 1.0)


def _softmax(z: np.ndarray) -> np.ndarray:
    zfull = np.append(z, 0.0)
    zfull -= zfull.max()
    w = np.exp(zfull)
    return w / w.sum()


def _refine_on_simplex(
    p0: np.ndarray,
    ch: PottsChannel,
    settings: OptimizerSettings,
    center_radius: float,
) -> tuple[float, np.ndarray]:
    """Nelder-Mead polish in unconstrained softmax coordinates."""
    p0 = np.clip(np.asarray(p0, dtype=float), 1e-12, 1.0)
    p0 = p0 / p0.sum()
    z0 = np.log(p0[:-1] / p0[-1])

    def objective(z: np.ndarray) -> float:
        return -simplex_ratio(_softmax(z), ch, center_radius)

    res = optimize.minimize(
        objective,
        z0,
        method="Nelder-Mead",
        options={
            "maxiter": settings.refine_iterations,
            "xatol": 1e-8,
            "fatol": max(settings.tolerance, 1e-13),
            "adaptive": True,
        },
    )
    p_best = _softmax(res.x)
    return -float(res.fun), p_best


def _cbar_with_argmax(
    ch: PottsChannel,
    settings: OptimizerSettings,
    center_radius: float,
) -> tuple[float, np.ndarray, dict]:
    q = ch.q
    if not (ch.beta > 0.0):
        raise ValueError(f"beta must be positive, got {ch.beta}")
    if q > 8:
        raise ValueError(f"full-simplex search supports q <= 8, got q = {q}")

    chat_val, x_star, _ = _chat_with_argmax(ch, settings, center_radius)

    # the slice supremum is a lower-bound certificate for the simplex supremum
    best_val = max(ch.lambda2, chat_val)
    best_p = _slice_point(x_star, q)

    seeds = [best_p]
    for r in range(settings.random_restarts):
        rng = philox_stream(settings.rng_seed, r)
        batch = rng.dirichlet(np.full(q, 0.5), size=128)
        vals = _simplex_ratio_batch(batch, ch, center_radius)
        i = int(np.argmax(vals))
        seeds.append(batch[i])
        if vals[i] > best_val:
            best_val, best_p = float(vals[i]), batch[i]

    for p0 in seeds:
        val, p_ref = _refine_on_simplex(p0, ch, settings, center_radius)
        if val > best_val:
            best_val, best_p = val, p_ref

    info = {
        "chat": chat_val,
        "restarts": settings.random_restarts,
        "off_center": bool(np.linalg.norm(best_p - 1.0 / q) >= center_radius),
    }
    return best_val, best_p, info


def cbar(
    ch: PottsChannel,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
    center_radius: float = _CENTER_RADIUS,
) -> float:
    """Supremum of simplex_ratio over the probability simplex.

    Seeded Dirichlet restarts plus Nelder-Mead polish in softmax
    coordinates; the slice value chat is always a candidate, so
    cbar >= chat up to rounding.  Deterministic given settings.rng_seed.
    """
    val, _, _ = _cbar_with_argmax(ch, settings, center_radius)
    return val


# ---------------------------------------------------------------------------
# extremality criterion and thresholds


def criterion_value(
    offspring_mean: float,
    ch: PottsChannel,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> float:
    """Value of offspring_mean * lambda2 * cbar; < 1 certifies extremality."""
    if not (offspring_mean > 0.0):
        raise ValueError(f"offspring_mean must be positive, got {offspring_mean}")
    return offspring_mean * ch.lambda2 * cbar(ch, settings)


def _beta_c_info(
    offspring_mean: float,
    q: int,
    settings: OptimizerSettings,
    tolerance: float = 1e-5,
) -> tuple[float, dict]:
    if offspring_mean < 1.0:
        raise ValueError(f"offspring_mean must be >= 1, got {offspring_mean}")
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")

    trace: list[tuple[float, float]] = []

    def g(beta: float) -> float:
        val = criterion_value(offspring_mean, PottsChannel(q, beta), settings)
        trace.append((beta, val))
        return val

    lo, hi = 1e-3, 1.0
    if g(lo) >= 1.0:
        raise SolverError(
            "criterion already >= 1 at the lower bracket",
            {"offspring_mean": offspring_mean, "q": q, "beta_lo": lo},
        )
    while g(hi) < 1.0:
        lo = hi
        hi *= 2.0
        if hi > 64.0:
            raise SolverError(
                "criterion never reaches 1 up to beta = 64",
                {"offspring_mean": offspring_mean, "q": q, "trace": trace},
            )
    bracket = (lo, hi)
    iterations = 0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if g(mid) < 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1

    # the bisection assumes the criterion increases with beta: verify on
    # the evaluation trace instead of trusting it silently
    trace.sort(key=lambda t: t[0])
    for (b0, v0), (b1, v1) in zip(trace, trace[1:]):
        if v1 < v0 - 1e-7 * max(1.0, abs(v0)):
            raise SolverError(
                "criterion_value is not monotone on the bisection trace",
                {"offspring_mean": offspring_mean, "q": q, "trace": trace},
            )
    root = 0.5 * (lo + hi)
    return root, {"bracket": bracket, "iterations": iterations, "evaluations": len(trace)}


def beta_c(
    offspring_mean: float,
    q: int,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
    tolerance: float = 1e-5,
) -> float:
    """Root in beta of criterion_value = 1, by bisection to the given tolerance.

    Monotonicity of the criterion in beta is asserted on the evaluation
    trace; a violation raises SolverError with the trace attached.
    """
    root, _ = _beta_c_info(offspring_mean, q, settings, tolerance)
    return root


class KestenStigumPoint(NamedTuple):
    beta: float
    lam: float


def kesten_stigum(d_mean: float, q: int) -> KestenStigumPoint:
    """Closed-form point where d_mean * lambda2**2 = 1.

    Returns the beta solving lambda2(beta, q) = 1/sqrt(d_mean) together
    with that eigenvalue; above it the channel is reconstructable.
    """
    if not (d_mean > 1.0):
        raise ValueError(f"d_mean must be > 1, got {d_mean}")
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    lam = 1.0 / math.sqrt(d_mean)
    agree = (1.0 + lam * (q - 1.0)) / (1.0 - lam)
    return KestenStigumPoint(beta=0.5 * math.log(agree), lam=lam)


class Table2Row(NamedTuple):
    d: int
    beta_c: float
    lambda_c: float


def reproduce_table2(
    q: int = 5,
    d_list: tuple[int, ...] = (2, 3, 4, 7, 15),
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> list[Table2Row]:
    """Extremality thresholds beta_c(d, q) and lambda2 at beta_c per offspring d."""
    rows = []
    for d in d_list:
        b = beta_c(float(d), q, settings)
        rows.append(Table2Row(d=d, beta_c=b, lambda_c=PottsChannel(q, b).lambda2))
    return rows


class ExcessSweep(NamedTuple):
    excess: float
    beta: float


def epsilon_excess(
    q: int,
    settings: OptimizerSettings = SWEEP_SETTINGS,
    beta_grid: np.ndarray | None = None,
) -> ExcessSweep:
    """Maximum of cbar/lambda2 - 1 over a beta grid, with the maximizing beta.

    The excess measures how far the optimized constant sits above its
    center value; it is zero for q = 2 and strictly positive for q >= 3.
    """
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    grid = EXCESS_BETA_GRID if beta_grid is None else np.asarray(beta_grid, dtype=float)
    best = ExcessSweep(excess=-math.inf, beta=float(grid[0]))
    for beta in grid:
        ch = PottsChannel(q, float(beta))
        excess = cbar(ch, settings) / ch.lambda2 - 1.0
        if excess > best.excess:
            best = ExcessSweep(excess=excess, beta=float(beta))
    return best


# ---------------------------------------------------------------------------
# assembled report


@dataclass(frozen=True)
class ThresholdReport:
    """All thresholds for one (q, offspring mean) pair, plus solver diagnostics.

    beta_ferro is present only for deterministic integer offspring (the
    ordering recursion needs a fixed arity); when present the ordering
    beta_ferro <= beta_c <= beta_ks is validated numerically.
    """

    q: int
    offspring_mean: float
    beta_ferro: float | None
    beta_c: float
    beta_ks: float
    cbar_at_beta_c: float
    epsilon_excess: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.epsilon_excess < -1e-9:
            raise ValueError(
                f"epsilon_excess = {self.epsilon_excess} violates cbar >= lambda2"
            )
        # q=2 makes beta_c and beta_ks coincide exactly, so the ordering is
        # only checkable up to the bisection tolerance of the beta_c solver
        if self.beta_ferro is not None:
            if not (self.beta_ferro <= self.beta_c + 1e-4):
                raise ValueError(
                    f"beta_ferro = {self.beta_ferro} exceeds beta_c = {self.beta_c}"
                )
            if not (self.beta_c <= self.beta_ks + 1e-4):
                raise ValueError(
                    f"beta_c = {self.beta_c} exceeds beta_ks = {self.beta_ks}"
                )


def threshold_report(
    q: int,
    offspring_mean: float,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
    sweep_settings: OptimizerSettings = SWEEP_SETTINGS,
) -> ThresholdReport:
    """Solve every threshold for (q, offspring mean) and assemble a report."""
    diagnostics: dict = {}

    is_integer_d = (
        float(offspring_mean).is_integer() and int(offspring_mean) >= 2
    )
    beta_ferro = None
    if is_integer_d:
        beta_ferro, ferro_info = _ferro_threshold_info(int(offspring_mean), q)
        diagnostics["ferro"] = ferro_info

    bc, bc_info = _beta_c_info(offspring_mean, q, settings)
    diagnostics["beta_c"] = bc_info
    ks = kesten_stigum(offspring_mean, q)

    ch_c = PottsChannel(q, bc)
    cbar_c, argmax_p, cbar_info = _cbar_with_argmax(ch_c, settings, _CENTER_RADIUS)
    diagnostics["cbar_at_beta_c"] = {
        **cbar_info,
        "argmax": tuple(float(v) for v in argmax_p),
        "excess_at_beta_c": cbar_c / ch_c.lambda2 - 1.0,
    }

    sweep = epsilon_excess(q, sweep_settings)
    diagnostics["excess_argmax_beta"] = sweep.beta

    return ThresholdReport(
        q=q,
        offspring_mean=float(offspring_mean),
        beta_ferro=beta_ferro,
        beta_c=bc,
        beta_ks=ks.beta,
        cbar_at_beta_c=cbar_c,
        epsilon_excess=sweep.excess,
        diagnostics=diagnostics,
    )
