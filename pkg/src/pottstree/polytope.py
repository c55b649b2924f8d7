"""The permutation-symmetric polytope family and its fundamental domain.

For level ``c > 0`` the polytope is the simplex

    P_c = conv{ -c*e_1, ..., -c*e_{q-1}, (c, ..., c) }  in  R^{q-1},

the intersection of the half-space ``sum_i x_i >= -c`` with its images under
every color permutation.  Membership therefore reduces to ``q`` linear
constraints — the coordinate sum plus one constraint per color:

    S + c >= 0   and   S - q*x_k + c >= 0  for all k,      S = sum_i x_i,

and the *level* of a point is the smallest ``c`` containing it,

    level(x) = max(-S, q*max_k(x_k) - S).

The fundamental domain ``D_c = {x <= 0, sum x >= -c}`` tiles ``P_c`` under
the permutation action, so sampled sweeps only ever need ``D_c``.

The convexity probe asks whether midpoints of images under the recursion map
pull back inside the same level set; its negative answers (witnesses) are as
meaningful as its positive margins.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .maps import log_ratio_map, log_ratio_map_preimage
from .params import INFINITY, ModelParams
from .reporting import DEFAULT_CHUNK, CertificationReport, chunk_sizes, parallel_chunk_map, spawn_rng

WITNESS_THRESHOLD = 1e-6


def polytope_vertices(c: float, q: int) -> np.ndarray:
    """The ``q`` vertices of ``P_c`` (one permutation orbit), rows of a matrix."""
    if c <= 0:
        raise DomainError(f"level must be positive, got {c}")
    v = -c * np.eye(q - 1)
    return np.vstack([v, np.full(q - 1, c)])


def level(x: np.ndarray) -> np.ndarray | float:
    """Smallest ``c`` with ``x in P_c`` (batch-friendly)."""
    x = np.asarray(x, dtype=float)
    q = x.shape[-1] + 1
    s = x.sum(axis=-1)
    out = np.maximum(-s, q * x.max(axis=-1) - s)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MembershipReport:
    inside: bool
    margin: float
    #: 0 for the coordinate-sum constraint, else the color k in 1..q-1 whose
    #: constraint is tightest.
    tight_constraint: int


def membership(x: np.ndarray, c: float) -> MembershipReport:
    """Check ``x in P_c`` via the reduced constraint system."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("membership expects a single vector")
    if c <= 0:
        raise DomainError(f"level must be positive, got {c}")
    q = len(x) + 1
    s = x.sum()
    slacks = np.concatenate([[s + c], s - q * x + c])
    worst = int(np.argmin(slacks))
    return MembershipReport(bool(slacks[worst] >= 0), float(slacks[worst]), worst)


def fundamental_membership(x: np.ndarray, c: float) -> bool:
    """Exact test for the fundamental domain ``D_c``."""
    x = np.asarray(x, dtype=float)
    if c <= 0:
        raise DomainError(f"level must be positive, got {c}")
    return bool((x <= 0).all(axis=-1) and x.sum(axis=-1) >= -c)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return spawn_rng(int(seed))


def sample_fundamental(c: float, q: int, count: int, seed) -> np.ndarray:
    """Uniform samples of ``D_c`` (Dirichlet weights over its q vertices)."""
    if c <= 0:
        raise DomainError(f"level must be positive, got {c}")
    rng = _as_rng(seed)
    w = rng.dirichlet(np.ones(q), size=count)
    return -c * w[:, : q - 1]


def sample_face(c: float, q: int, count: int, seed) -> np.ndarray:
    """Uniform samples of the facet ``{x <= 0, sum x = -c}`` of ``D_c``."""
    if c <= 0:
        raise DomainError(f"level must be positive, got {c}")
    rng = _as_rng(seed)
    return -c * rng.dirichlet(np.ones(q - 1), size=count)


def sample_polytope(c: float, q: int, count: int, seed,
                    boundary_fraction: float = 0.0) -> np.ndarray:
    """Uniform samples of ``P_c``, optionally biased onto its boundary.

    With ``boundary_fraction > 0`` that fraction of points is resampled on a
    uniformly chosen facet (one Dirichlet weight zeroed out).
    """
    rng = _as_rng(seed)
    w = rng.dirichlet(np.ones(q), size=count)
    if boundary_fraction > 0:
        onto = rng.random(count) < boundary_fraction
        drop = rng.integers(0, q, size=count)
        w[onto, drop[onto]] = 0.0
        w /= w.sum(axis=1, keepdims=True)
    return w @ polytope_vertices(c, q)


def _midpoint_pullback_levels(x: np.ndarray, y: np.ndarray, params: ModelParams) -> np.ndarray:
    """Level of the preimage of ``(F(x)+F(y))/2``; +inf where no preimage."""
    mid = 0.5 * (log_ratio_map(x, params) + log_ratio_map(y, params))
    back, valid = log_ratio_map_preimage(mid, params)
    # level only on rows with a preimage, +inf elsewhere (a definite violation)
    out = np.full(x.shape[:-1], np.inf)
    if valid.any():
        out[valid] = level(back[valid])
    return out


def convexity_probe(c: float, params: ModelParams, pair_count: int, seed: int,
                    threads: int = 1, boundary_fraction: float = 0.5) -> CertificationReport:
    """Sampled test that midpoints of ``F(P_c)`` pull back into ``P_c``.

    Draws ``pair_count`` random pairs from ``P_c`` (plus every pair of
    polytope vertices, deterministically), maps them forward, and pulls the
    image midpoints back through the inverse map.  The report's margin is
    ``c - max(level of pullback)``; a pair whose pullback exceeds the level
    by more than 1e-6 — or has no pullback at all — is a reported witness.
    """
    q = params.q
    vx = polytope_vertices(c, q)
    pairs = list(itertools.combinations(range(q), 2))
    det_x = vx[[i for i, _ in pairs]]
    det_y = vx[[j for _, j in pairs]]

    sizes = chunk_sizes(pair_count, DEFAULT_CHUNK)

    def run_chunk(i: int):
        if i == 0:
            x, y = det_x, det_y
        else:
            rng = spawn_rng(seed, i - 1)
            n = sizes[i - 1]
            x = sample_polytope(c, q, n, rng, boundary_fraction)
            y = sample_polytope(c, q, n, rng, boundary_fraction)
        lev = _midpoint_pullback_levels(x, y, params)
        k = int(np.argmax(lev))
        return float(lev[k]), x[k], y[k]

    results = parallel_chunk_map(run_chunk, len(sizes) + 1, threads)
    worst_level, worst_x, worst_y = max(results, key=lambda r: r[0])
    violation = worst_level - c
    passed = bool(violation <= WITNESS_THRESHOLD)
    witness = None
    if not passed:
        witness = {
            "x": list(worst_x),
            "y": list(worst_y),
            "pullback_level": worst_level,
            "violation": violation,
        }
    return CertificationReport(
        kind="midpoint_convexity",
        parameters={"q": q, "d": params.d, "alpha": params.alpha, "c": c,
                    "boundary_fraction": boundary_fraction},
        sample_count=int(sum(sizes) + len(det_x)),
        seed=seed,
        min_margin=float(c - worst_level),
        passed=passed,
        witness=witness,
    )


def convexity_witness_search(params: ModelParams, c_values, pairs_per_c: int = 250_000,
                             seed: int = 0, refine_rounds: int = 12) -> dict | None:
    """Best-effort search for a genuine convexity violation.

    Scans dense point clouds on the boundary of ``P_c`` (edge grids plus
    random facet points) over all pairs, then locally refines the worst pair
    by perturbing its vertex-weight coordinates.  Returns the strongest
    witness found (violation > 1e-6) or ``None`` if the budget is exhausted
    without one.
    """
    q = params.q
    best: dict | None = None
    for ci, c in enumerate(c_values):
        vx = polytope_vertices(c, q)
        rng = spawn_rng(seed, ci)
        # point cloud on the boundary, in vertex-weight coordinates
        m = max(8, int(np.sqrt(pairs_per_c / max(1, q * (q - 1) // 2))))
        weights = []
        for i, j in itertools.combinations(range(q), 2):
            s = np.linspace(0.0, 1.0, m)
            w = np.zeros((m, q))
            w[:, i], w[:, j] = 1.0 - s, s
            weights.append(w)
        n_rand = min(pairs_per_c // 10, 2000)
        wr = spawn_rng(seed, ci, 1).dirichlet(np.ones(q), size=n_rand)
        wr[np.arange(n_rand), spawn_rng(seed, ci, 2).integers(0, q, n_rand)] = 0.0
        wr /= wr.sum(axis=1, keepdims=True)
        weights.append(wr)
        w_cloud = np.vstack(weights)
        cloud = w_cloud @ vx

        # all pairs, chunked along the first index
        n = len(cloud)
        block = max(1, DEFAULT_CHUNK // n)
        top_level, top_i, top_j = -np.inf, 0, 0
        for lo in range(0, n, block):
            xs = np.repeat(cloud[lo:lo + block], n, axis=0)
            ys = np.tile(cloud, (len(cloud[lo:lo + block]), 1))
            lev = _midpoint_pullback_levels(xs, ys, params)
            k = int(np.argmax(lev))
            if lev[k] > top_level:
                top_level = float(lev[k])
                top_i, top_j = lo + k // n, k % n
        wx, wy = w_cloud[top_i].copy(), w_cloud[top_j].copy()

        # local refinement in weight space (stays inside P_c by construction)
        sigma = 0.15
        for r in range(refine_rounds):
            rr = spawn_rng(seed, ci, 3, r)
            px = np.abs(wx + sigma * rr.standard_normal((400, q)))
            py = np.abs(wy + sigma * rr.standard_normal((400, q)))
            px = np.vstack([wx, *px]) ; py = np.vstack([wy, *py])
            px /= px.sum(axis=1, keepdims=True)
            py /= py.sum(axis=1, keepdims=True)
            lev = _midpoint_pullback_levels(px @ vx, py @ vx, params)
            k = int(np.argmax(lev))
            if lev[k] > top_level:
                top_level, wx, wy = float(lev[k]), px[k].copy(), py[k].copy()
            sigma *= 0.6

        violation = top_level - c
        if violation > WITNESS_THRESHOLD and (best is None or violation > best["violation"]):
            best = {
                "c": float(c),
                "x": list(wx @ vx),
                "y": list(wy @ vx),
                "pullback_level": top_level,
                "violation": float(violation),
            }
    return best


def limit_normal_alignment(y: np.ndarray) -> tuple[int, float]:
    """Alignment diagnostic for the image surface of the limit map.

    For ``y`` in the invertible region, let ``z`` be its pullback ratio
    coordinates and ``g(y) = prod_k z_k(y)``.  Returns ``(sign, value)`` of
    ``<grad g(y), 1>``; the sign is negative throughout the region where all
    ``z_k > 0``, which is what pins the orientation of the image's supporting
    hyperplanes relative to the diagonal.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DomainError("alignment diagnostic expects a single vector")
    q = len(y) + 1
    t = y.sum() + q
    if t <= 0:
        raise DomainError("outside the invertible region (nonpositive denominator)")
    z = 1.0 - q * y / t
    if (z <= 0).any():
        raise DomainError("outside the invertible region (nonpositive pullback ratios)")
    prod_others = np.prod(z) / z
    value = float(-(prod_others * ((q - 1) * z + 1.0)).sum() / t)
    return (int(np.sign(value)), value)
