"""Sampled certification of forward invariance and convergence to uniform.

The certification story has three layers:

* :func:`two_step_level` — estimate the smallest level set containing the
  image of the fundamental domain under two recursion steps.  For the limit
  family the exact answer is the diagonal contraction value, which the sample
  set always contains, so the estimate is tight from below.
* :func:`contraction_sequence` — iterate that estimate from the universal
  starting level ``q+1`` down to a target, certifying that two-step images
  keep shrinking (the engine behind uniqueness of the Gibbs measure).
* :func:`convergence_experiment` — run the actual recursion on regular trees
  of growing depth and measure how fast the conditional root distribution
  approaches uniform, compared against the ``alpha**(n/2)`` rate.

Everything is seeded and chunked as described in :mod:`pottstree.reporting`,
so reports are bit-reproducible at any thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, DomainError
from .maps import (diagonal_contraction, log_ratio_map, pattern_image,
                   two_step_map, two_step_sum_limit)
from .params import INFINITY, ModelParams
from .polytope import level, polytope_vertices, sample_face, sample_fundamental
from .reporting import DEFAULT_CHUNK, chunk_sizes, format_value, parallel_chunk_map, spawn_rng

#: Additive cushion per contraction step: keeps each certified level strictly
#: above the sampled estimate so the sequence is a genuine upper bound.
STEP_CUSHION = 1e-6


@dataclass
class InvarianceReport:
    """One two-step level estimate on the fundamental domain."""

    q: int
    d: float
    alpha: float
    c_in: float
    c_out_estimate: float
    margin: float
    sample_count: int
    seed: int
    #: exact diagonal value for the limit family (None for finite degree)
    diagonal_bound: float | None
    passed: bool

    def to_text(self) -> str:
        rows = [(k, getattr(self, k)) for k in (
            "q", "d", "alpha", "c_in", "c_out_estimate", "margin",
            "sample_count", "seed", "diagonal_bound", "passed")]
        return "\n".join(f"{k}={format_value(v)}" for k, v in rows) + "\n"


def _fundamental_probe_points(c: float, q: int) -> np.ndarray:
    """Deterministic must-test points: origin, vertices, diagonal face point."""
    pts = [np.zeros(q - 1), np.full(q - 1, -c / (q - 1.0)), -c * np.eye(q - 1)]
    return np.vstack(pts)


def two_step_level(c: float, params: ModelParams, sample_count: int = 100_000,
                   seed: int = 0, threads: int = 1) -> InvarianceReport:
    """Estimate ``max level(F(F(x)))`` over the fundamental domain at level ``c``.

    The sample set is ``sample_count`` uniform draws from the fundamental
    domain plus the deterministic corner/diagonal points (where the maximum
    sits for the limit family).  ``margin = c - estimate``; a positive margin
    is evidence of strict forward invariance at this level.
    """
    if not c > 0:
        raise DomainError(f"level must be positive, got {c}")
    q = params.q
    sizes = chunk_sizes(sample_count, DEFAULT_CHUNK)

    def run_chunk(i: int) -> float:
        if i == 0:
            x = _fundamental_probe_points(c, q)
        else:
            x = sample_fundamental(c, q, sizes[i - 1], spawn_rng(seed, i - 1))
        return float(np.max(level(two_step_map(x, params))))

    peaks = parallel_chunk_map(run_chunk, len(sizes) + 1, threads)
    estimate = max(peaks)
    bound = diagonal_contraction(c, q) if params.d == INFINITY else None
    return InvarianceReport(
        q=q, d=params.d, alpha=params.alpha,
        c_in=float(c), c_out_estimate=estimate, margin=float(c - estimate),
        sample_count=sample_count + q + 1, seed=seed,
        diagonal_bound=bound, passed=bool(estimate < c),
    )


def contraction_sequence(params: ModelParams, epsilon: float, max_iters: int,
                         *, sample_count: int = 20_000, seed: int = 0,
                         threads: int = 1) -> list[float]:
    """Iterate certified levels ``c_0 = q+1, c_{k+1} = estimate(c_k) + cushion``.

    Stops once ``c_k < epsilon`` or after ``max_iters`` steps (whichever is
    first) and returns the whole sequence.  A step that fails to decrease
    raises :class:`CertificationError` — the certification claim would be
    vacuous from that point on.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if max_iters < 1:
        raise DomainError(f"max_iters must be >= 1, got {max_iters}")
    c = params.q + 1.0
    seq = [c]
    for it in range(max_iters):
        if c < epsilon:
            break
        rep = two_step_level(c, params, sample_count, seed=int(spawn_rng(seed, it).integers(2**32)),
                             threads=threads)
        c_next = rep.c_out_estimate + STEP_CUSHION
        if not c_next < c:
            raise CertificationError(
                f"two-step level failed to decrease at step {it}: "
                f"c={c} -> estimate {rep.c_out_estimate} + cushion; "
                f"params={params}, sample_count={sample_count}"
            )
        c = c_next
        seq.append(c)
    return seq


@dataclass
class MinimalityReport:
    """Check that the diagonal face point minimizes the two-step image sum."""

    q: int
    c: float
    diagonal_value: float
    min_gap: float
    min_separated_gap: float
    separation: float
    sample_count: int
    seed: int
    passed: bool


def diagonal_minimality_check(c: float, q: int, sample_count: int = 50_000,
                              seed: int = 0) -> MinimalityReport:
    """Sample the face ``{x <= 0, sum x = -c}`` and compare image sums.

    The coordinate sum of the two-step limit image must be minimal at the
    diagonal point of the face (within 1e-10), and strictly larger for
    points separated from the diagonal — that is what makes the diagonal the
    worst case for level growth.
    """
    if not c > 0:
        raise DomainError(f"level must be positive, got {c}")
    diag = np.full(q - 1, -c / (q - 1.0))
    base = float(two_step_sum_limit(diag, q))
    x = sample_face(c, q, sample_count, spawn_rng(seed))
    vals = np.asarray(two_step_sum_limit(x, q))
    gaps = vals - base
    separation = 1e-3 * c
    far = np.abs(x - diag).max(axis=-1) > separation
    min_far = float(gaps[far].min()) if far.any() else np.inf
    return MinimalityReport(
        q=q, c=float(c), diagonal_value=base,
        min_gap=float(gaps.min()), min_separated_gap=min_far,
        separation=separation, sample_count=sample_count, seed=seed,
        passed=bool(gaps.min() >= -1e-10 and min_far > 0),
    )


@dataclass
class ConvergenceReport:
    """Depth-by-depth distance from uniform for the tree recursion."""

    q: int
    d: int
    alpha: float
    n_max: int
    boundary: str
    trials: int
    seed: int
    depths: list[int] = field(default_factory=list)
    max_deviations: list[float] = field(default_factory=list)
    #: deviation ratio between depths n and n-2 (None for n <= 2)
    two_step_ratios: list[float | None] = field(default_factory=list)
    fitted_rate: float | None = None
    rate_bound: float | None = None
    passed: bool = False

    def rows(self) -> list[list]:
        return [[n, self.boundary, self.trials, dev, ratio]
                for n, dev, ratio in zip(self.depths, self.max_deviations,
                                         self.two_step_ratios)]


def _uniform_deviation_from_ratios(x: np.ndarray, q: int) -> np.ndarray:
    """``max_i |p_i - 1/q|`` for the color law with log-ratios ``x``."""
    m = np.maximum(x.max(axis=-1, keepdims=True), 0.0)
    e = np.exp(x - m)
    e0 = np.exp(-m)
    den = e.sum(axis=-1, keepdims=True) + e0
    p = np.concatenate([e, e0], axis=-1) / den
    return np.abs(p - 1.0 / q).max(axis=-1)


def convergence_experiment(q: int, d: int, alpha: float, n_max: int,
                           boundary: str = "mono", trials: int = 1,
                           seed: int = 0, color: int = 1) -> ConvergenceReport:
    """Measure the recursion's drift toward uniform on deep regular trees.

    Boundaries are *level-homogeneous*: every depth-(n-1) vertex sees the
    same multiset of leaf colors, so each level carries a single message and
    depth-``n`` results are exact even when the full tree is astronomically
    large.  ``boundary='mono'`` pins all leaves to ``color``;
    ``boundary='random'`` draws one color-count vector per trial
    (multinomial over the ``d`` leaf slots) — ``trials`` independent draws.

    The report passes when even-depth deviations decrease strictly and every
    deviation ratio two depths apart is at most ``alpha * 1.05``.  With
    ``alpha = 0`` the model is free and deviations must vanish outright.
    """
    if boundary not in ("mono", "random"):
        raise DomainError(f"unknown boundary strategy {boundary!r}")
    if not (isinstance(d, (int, np.integer)) and d >= 2):
        raise DomainError(f"d must be an integer >= 2, got {d!r}")
    if n_max < 3:
        raise DomainError("need n_max >= 3 to measure two-step ratios")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    params = ModelParams(q, int(d), alpha)
    if params.w <= 0:
        raise DomainError("convergence experiment requires w > 0")

    if boundary == "mono":
        counts = np.zeros((1, q))
        counts[0, color - 1] = d
    else:
        rng = spawn_rng(seed)
        counts = rng.multinomial(d, np.full(q, 1.0 / q), size=trials).astype(float)
    images = np.stack([pattern_image(cc, params) for cc in range(1, q + 1)])
    x = counts @ images / d  # depth-1 log-ratios, one row per trial

    depths, devs, ratios = [], [], []
    for n in range(1, n_max + 1):
        if n > 1:
            x = log_ratio_map(x, params)  # d identical children: mean is F itself
        depths.append(n)
        devs.append(float(_uniform_deviation_from_ratios(x, q).max()))
        ratios.append(devs[-1] / devs[-3] if n > 2 and devs[-3] > 0 else None)

    finite_ratios = [r for r in ratios if r is not None]
    fitted = float(np.sqrt(max(finite_ratios))) if finite_ratios else None
    bound = float(np.sqrt(alpha) * 1.05)
    even = [dev for n, dev in zip(depths, devs) if n % 2 == 0]
    if alpha == 0.0 or max(devs) == 0.0:
        # free model (or exactly uniform boundary): no drift at all
        passed = max(devs) <= 1e-14
    else:
        passed = (all(r <= alpha * 1.05 for r in finite_ratios)
                  and all(b < a for a, b in zip(even, even[1:])))
    return ConvergenceReport(
        q=q, d=int(d), alpha=alpha, n_max=n_max, boundary=boundary,
        trials=len(counts), seed=seed, depths=depths, max_deviations=devs,
        two_step_ratios=ratios, fitted_rate=fitted, rate_bound=bound,
        passed=bool(passed),
    )
