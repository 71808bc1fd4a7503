"""Meta-gradient estimators over a recorded trajectory and validation gradient.

Writing H^k for the training-loss Hessian at iterate k and g for the
validation gradient, the exact meta-gradient is the backpropagation product

    (I - alpha H^0) (I - alpha H^1) ... (I - alpha H^{K-1}) g

applied right to left, one HVP per factor. The estimators here trade accuracy
for HVP count in different ways:

* ``full``  -- the exact product, K sequential HVPs.
* ``fo``    -- drops all curvature; the estimate is g itself.
* ``trunc`` -- keeps only the last L factors.
* ``binom`` -- expands the product into sums over strictly increasing index
  tuples and keeps every term of order <= L in alpha. Computed as L cascade
  stages of K-L+1 mutually independent HVPs each (see ``_cascade``).
* ``binom-trunc`` -- the expansion restricted to the last C steps (curvature
  before step K-C is zeroed).
* ``imaml`` -- solves (I + H/lambda) x = g at the final iterate by CG.
* ``reptile`` -- moves toward the mean adapted parameter; no HVPs at all.

``binom_oracle`` enumerates the expansion tuple by tuple and is the
deliberately unoptimized ground truth the cascades are tested against.

Every estimator is a pure function of (trajectory, g, parameters), so
invocations are safe to run concurrently across tasks. Within a binom stage
the HVPs are independent work items; the stage barrier and the fixed
descending-index summation order are the only synchronization contract, so a
parallel schedule must reproduce the sequential result bit for bit.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adaptation import DivergenceError, Trajectory
from .linalg import conjugate_gradient, strict_lower_ones
from .objectives import TaskObjective


@dataclass(frozen=True)
class CostCounters:
    """Logical cost of one estimate.

    ``hvp_total`` counts HVP evaluations actually performed,
    ``sequential_depth`` the longest chain of HVPs that must run in order,
    and ``peak_live_vectors`` the largest number of d-vectors held at once.
    """

    hvp_total: int
    sequential_depth: int
    peak_live_vectors: int

    def __post_init__(self):
        if not self.hvp_total >= self.sequential_depth >= 0:
            raise ValueError("need hvp_total >= sequential_depth >= 0")


@dataclass(frozen=True)
class MetaGradient:
    estimate: np.ndarray
    kind: str
    L: Optional[int]
    cost: CostCounters
    converged: bool = True  # only the CG-based estimate can fail to converge

    def __post_init__(self):
        if not np.all(np.isfinite(self.estimate)):
            raise DivergenceError(f"{self.kind} estimate contains NaN/Inf")


ESTIMATOR_KINDS = (
    "full",
    "fo",
    "trunc",
    "binom",
    "binom-batched",
    "binom-oracle",
    "binom-trunc",
    "imaml",
    "reptile",
)


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator selection plus its tuning knobs.

    ``L`` is the truncation (0 <= L <= K), ``C`` the curvature window for the
    hybrid estimator (L <= C <= K), ``rescale_alpha`` swaps alpha for
    L*alpha/K inside the binomial expansion, ``imaml_lambda`` the implicit
    regularization weight, and ``reptile_eps`` the interpolation step in
    (0, 1].
    """

    kind: str = "full"
    L: int = 0
    C: Optional[int] = None
    rescale_alpha: bool = False
    imaml_lambda: float = 1.0
    cg_tol: float = 1e-10
    cg_iters: Optional[int] = None
    reptile_eps: float = 1.0

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.imaml_lambda <= 0:
            raise ValueError("imaml_lambda must be positive")
        if not 0.0 < self.reptile_eps <= 1.0:
            raise ValueError("reptile_eps must lie in (0, 1]")


def _check_L(L: int, K: int):
    if not 0 <= L <= K:
        raise ValueError(f"truncation L={L} outside [0, {K}]")


def _finite_or_raise(v, where: str):
    if not np.all(np.isfinite(v)):
        raise DivergenceError(f"NaN/Inf at {where}")
    return v


def full_meta_gradient(traj: Trajectory, g) -> MetaGradient:
    """Exact product, applied right to left: v <- v - alpha * H^k v for k = K-1..0."""
    v = np.asarray(g, dtype=float)
    for k in range(traj.K - 1, -1, -1):
        v = v - traj.alpha * traj.hvp(k, v)
        _finite_or_raise(v, f"full product step k={k}")
    return MetaGradient(v, "full", None, CostCounters(traj.K, traj.K, 1))


def fo_meta_gradient(g) -> MetaGradient:
    """First-order estimate: the validation gradient unchanged, zero HVPs."""
    return MetaGradient(np.asarray(g, dtype=float), "fo", 0, CostCounters(0, 0, 0))


def trunc_meta_gradient(traj: Trajectory, g, L: int) -> MetaGradient:
    """Product of the last L factors only; L = 0 is the first-order estimate
    and L = K recovers the exact product."""
    _check_L(L, traj.K)
    v = np.asarray(g, dtype=float)
    for k in range(traj.K - 1, traj.K - L - 1, -1):
        v = v - traj.alpha * traj.hvp(k, v)
        _finite_or_raise(v, f"truncated product step k={k}")
    return MetaGradient(v, "trunc", L, CostCounters(L, L, 1))


def _effective_alpha(traj: Trajectory, L: int, rescale_alpha: bool) -> float:
    # optional stability rescaling inside the expansion: alpha' = L * alpha / K
    return traj.alpha * L / traj.K if rescale_alpha else traj.alpha


def _cascade(hvp, K: int, L: int, alpha: float, g: np.ndarray):
    """Run the L-stage expansion cascade; returns (estimate, stage seeds).

    Writing w[l, k] for the order-l expansion restricted to index tuples with
    smallest entry >= k, the recursion is

        w[l, k] = w[l, k+1] - alpha * H^k w[l-1, k+1],   w[0, .] = g,

    and the estimate is w[L, 0]. Stage l (l = 1..L) holds the window
    w[l, L-l..K-l]: its K-L+1 HVPs touch iterates L-l..K-l and depend only on
    stage l-1, so they are mutually independent; the running sums then fill
    the window in descending k. The stage seed w[l, K-l] equals the last-l
    truncated product applied to g, which is what lets each stage reuse the
    previous one instead of recomputing that product.
    """
    width = K - L + 1
    v = [g] * width
    seeds = []
    for stage in range(L):
        lo = L - 1 - stage
        u = [hvp(lo + j, v[j]) for j in range(width)]
        nxt = [None] * width
        nxt[width - 1] = v[width - 1] - alpha * u[width - 1]
        _finite_or_raise(nxt[width - 1], f"cascade stage {stage}, index {width - 1}")
        for j in range(width - 2, -1, -1):
            nxt[j] = nxt[j + 1] - alpha * u[j]
            _finite_or_raise(nxt[j], f"cascade stage {stage}, index {j}")
        seeds.append(nxt[width - 1])
        v = nxt
    return v[0], seeds


def binom_meta_gradient(traj: Trajectory, g, L: int, rescale_alpha: bool = False) -> MetaGradient:
    """Order-L binomial-expansion estimate via the stage cascade.

    L = 0 returns g (coincides with the first-order estimate); L = K is the
    exact product. Costs L*(K-L+1) HVPs at sequential depth L with K-L+1
    vectors live.
    """
    K = traj.K
    _check_L(L, K)
    g = np.asarray(g, dtype=float)
    if L == 0:
        return MetaGradient(g, "binom", 0, CostCounters(0, 0, 0))
    alpha = _effective_alpha(traj, L, rescale_alpha)
    estimate, _ = _cascade(traj.hvp, K, L, alpha, g)
    return MetaGradient(estimate, "binom", L, CostCounters(L * (K - L + 1), L, K - L + 1))


def binom_cascade_seeds(traj: Trajectory, g, L: int):
    """Stage seed vectors of the cascade; seed l equals the last-l truncated
    product applied to g (the saved-HVP reuse identity)."""
    _check_L(L, traj.K)
    _, seeds = _cascade(traj.hvp, traj.K, L, traj.alpha, np.asarray(g, dtype=float))
    return seeds


def binom_meta_gradient_batched(traj: Trajectory, g, L: int, rescale_alpha: bool = False) -> MetaGradient:
    """Matrix form of the cascade: stage windows stacked as d x (K-L+1) columns.

    The running sums become one product with a lower-triangular matrix of
    ones (the strictly-lower part plus the diagonal), so each stage is

        V <- outer(V[:, -1], 1^T) - alpha * U @ (strict_lower_ones + I).
    """
    K = traj.K
    _check_L(L, K)
    g = np.asarray(g, dtype=float)
    if L == 0:
        return MetaGradient(g, "binom-batched", 0, CostCounters(0, 0, 0))
    alpha = _effective_alpha(traj, L, rescale_alpha)
    width = K - L + 1
    suffix_sums = strict_lower_ones(width) + np.eye(width)
    ones = np.ones(width)
    v = np.tile(g[:, None], (1, width))
    for stage in range(L):
        lo = L - 1 - stage
        u = np.column_stack([traj.hvp(lo + j, v[:, j]) for j in range(width)])
        v = np.outer(v[:, -1], ones) - alpha * (u @ suffix_sums)
        _finite_or_raise(v, f"batched cascade stage {stage}")
    return MetaGradient(v[:, 0], "binom-batched", L, CostCounters(L * (K - L + 1), L, K - L + 1))


ORACLE_MAX_K = 14


def binom_oracle(traj: Trajectory, g, L: int, rescale_alpha: bool = False) -> np.ndarray:
    """Ground-truth expansion by brute-force enumeration; deliberately slow.

    Sums, over every strictly increasing tuple 0 <= k_1 < ... < k_l < K with
    l = 1..L, the product (-alpha)^l H^{k_1} ... H^{k_l} g applied right to
    left, plus the identity term g.
    """
    K = traj.K
    if K > ORACLE_MAX_K:
        raise ValueError(f"enumeration guard: K={K} exceeds {ORACLE_MAX_K}")
    _check_L(L, K)
    g = np.asarray(g, dtype=float)
    alpha = _effective_alpha(traj, L, rescale_alpha)
    total = g.copy()
    for l in range(1, L + 1):
        sign = (-alpha) ** l
        for combo in itertools.combinations(range(K), l):
            w = g
            for k in reversed(combo):
                w = traj.hvp(k, w)
            total = total + sign * w
    return total


def binomtrunc_meta_gradient(
    traj: Trajectory, g, L: int, C: int, rescale_alpha: bool = False
) -> MetaGradient:
    """Hybrid estimate: the order-L expansion over the last C steps only.

    Runs the cascade with the HVP at iterate k forced to zero for k < K-C
    (zeroed HVPs are not evaluated and not charged). C = K recovers the plain
    expansion estimate; L = C = K recovers the exact product.
    """
    K = traj.K
    _check_L(L, K)
    if not L <= C <= K:
        raise ValueError(f"need L <= C <= K, got L={L}, C={C}, K={K}")
    g = np.asarray(g, dtype=float)
    if L == 0:
        return MetaGradient(g, "binom-trunc", 0, CostCounters(0, 0, 0))
    alpha = _effective_alpha(traj, L, rescale_alpha)
    cutoff = K - C
    zero = np.zeros_like(g)
    calls = 0

    def masked_hvp(k, v):
        nonlocal calls
        if k < cutoff:
            return zero
        calls += 1
        return traj.hvp(k, v)

    estimate, _ = _cascade(masked_hvp, K, L, alpha, g)
    return MetaGradient(estimate, "binom-trunc", L, CostCounters(calls, min(L, calls), K - L + 1))


def imaml_meta_gradient(
    obj: TaskObjective,
    phi_final,
    g,
    lam: float,
    cg_tol: float = 1e-10,
    cg_iters: Optional[int] = None,
) -> MetaGradient:
    """Implicit estimate: solve (I + H/lambda) x = g at phi_final by CG.

    The map must be SPD at phi_final (true whenever the local Hessian is
    strictly above -lambda I); CG raises on non-positive curvature, and
    non-convergence is reported through the returned counters/flag rather
    than aborting. One HVP per CG iteration.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    phi_final = np.asarray(phi_final, dtype=float)
    g = np.asarray(g, dtype=float)

    def apply(v):
        return v + obj.hvp(phi_final, v) / lam

    result = conjugate_gradient(apply, g, tol=cg_tol, max_iters=cg_iters)
    # CG working set is four d-vectors (x, r, p, and the map output)
    cost = CostCounters(result.iterations, result.iterations, 4)
    return MetaGradient(result.x, "imaml", None, cost, converged=result.converged)


def reptile_direction(theta, finals) -> np.ndarray:
    """Mean displacement (1/T) sum_t (phi_t^K - theta); the caller applies eps."""
    theta = np.asarray(theta, dtype=float)
    finals = [np.asarray(f, dtype=float) for f in finals]
    if not finals:
        raise ValueError("need at least one adapted parameter")
    for f in finals:
        if f.shape != theta.shape:
            raise ValueError("dimension mismatch between theta and adapted parameters")
    return sum(f - theta for f in finals) / len(finals)


def estimation_error(estimate, exact) -> float:
    """l2 norm of the difference between two meta-gradients."""
    a = estimate.estimate if isinstance(estimate, MetaGradient) else np.asarray(estimate, dtype=float)
    b = exact.estimate if isinstance(exact, MetaGradient) else np.asarray(exact, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def estimate(traj: Trajectory, g, cfg: EstimatorConfig) -> MetaGradient:
    """Dispatch on cfg.kind. Reptile is excluded: it is a meta-update rule
    over adapted parameters, not a per-task gradient estimate."""
    if cfg.kind == "full":
        return full_meta_gradient(traj, g)
    if cfg.kind == "fo":
        return fo_meta_gradient(g)
    if cfg.kind == "trunc":
        return trunc_meta_gradient(traj, g, cfg.L)
    if cfg.kind == "binom":
        return binom_meta_gradient(traj, g, cfg.L, cfg.rescale_alpha)
    if cfg.kind == "binom-batched":
        return binom_meta_gradient_batched(traj, g, cfg.L, cfg.rescale_alpha)
    if cfg.kind == "binom-oracle":
        vec = binom_oracle(traj, g, cfg.L, cfg.rescale_alpha)
        # one HVP per tuple element; the longest tuple is the longest chain
        total = sum(l * math.comb(traj.K, l) for l in range(1, cfg.L + 1))
        return MetaGradient(vec, "binom-oracle", cfg.L, CostCounters(total, cfg.L, 2))
    if cfg.kind == "binom-trunc":
        c = traj.K if cfg.C is None else cfg.C
        return binomtrunc_meta_gradient(traj, g, cfg.L, c, cfg.rescale_alpha)
    if cfg.kind == "imaml":
        if traj.objective is None:
            raise ValueError("implicit estimate needs a trajectory backed by an objective")
        return imaml_meta_gradient(
            traj.objective, traj.final, g, cfg.imaml_lambda, cfg.cg_tol, cfg.cg_iters
        )
    raise ValueError(f"estimator kind {cfg.kind!r} has no per-task gradient estimate")


def binom_expansion_matrix(traj: Trajectory, L: int, rescale_alpha: bool = False) -> np.ndarray:
    """The order-L expansion as an explicit d x d matrix.

    Same cascade recursion run on matrices seeded with the identity; intended
    as a small-d oracle for checking that the matrix-operator and
    vector-operator forms agree.
    """
    K = traj.K
    _check_L(L, K)
    d = traj.dim
    eye = np.eye(d)
    if L == 0:
        return eye
    alpha = _effective_alpha(traj, L, rescale_alpha)
    hessians = [traj.step_hessian(k) for k in range(K)]
    estimate_mat, _ = _cascade(lambda k, m: hessians[k] @ m, K, L, alpha, eye)
    return estimate_mat
