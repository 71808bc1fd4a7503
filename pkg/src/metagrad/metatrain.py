"""Outer meta-training loop and fixed-prior error experiments.

A meta-step adapts a batch of tasks from the shared prior theta, estimates
each task's meta-gradient with the configured estimator, and applies either
the gradient rule theta' = theta - beta * mean(estimates) or the
interpolation rule theta' = theta + eps * mean(phi^K - theta).

Tasks within a batch adapt and estimate independently (they could run
concurrently); the meta-update is a single reduction in fixed task order, so
records are bitwise-reproducible given (seed, config).
"""

import io
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .adaptation import DivergenceError, gd_adapt, validation_gradient
from .estimators import (
    EstimatorConfig,
    binom_meta_gradient,
    estimate,
    estimation_error,
    full_meta_gradient,
    reptile_direction,
    trunc_meta_gradient,
)
from .objectives import (
    LogisticTask,
    TaskObjective,
    mlp_init,
    random_quadratic,
    sample_sinusoid_batch,
)

FAMILIES = ("quadratic", "logistic", "sinusoid")


@dataclass(frozen=True)
class TaskPair:
    """A task's training objective and the validation objective scoring it."""

    train: TaskObjective
    val: TaskObjective


@dataclass(frozen=True)
class MetaTrainConfig:
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    family: str = "quadratic"
    alpha: float = 0.25       # inner step size
    beta: float = 1e-3        # meta step size
    K: int = 5
    meta_batch: int = 10
    iterations: int = 100
    seed: int = 0
    shots: int = 10           # data points per side (sinusoid family)
    dim: int = 6              # parameter dimension (quadratic/logistic)
    hmax: float = 1.0         # curvature spectrum upper end (quadratic family)
    track_errors: bool = False
    resample: bool = True     # fresh task batch every iteration

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown task family {self.family!r}; expected one of {FAMILIES}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("step sizes must be positive")
        if self.meta_batch < 1:
            raise ValueError("meta_batch must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")


def _logistic_pair(rng: np.random.Generator, d: int, n: int) -> TaskPair:
    w = rng.standard_normal(d)

    def draw():
        x = rng.standard_normal((d, n))
        probs = LogisticTask._sigmoid(x.T @ w)
        y = (rng.uniform(size=n) < probs).astype(float)
        return LogisticTask(x, y)

    return TaskPair(train=draw(), val=draw())


def sample_task_batch(cfg: MetaTrainConfig, rng: np.random.Generator) -> List[TaskPair]:
    """Draw one meta-batch of (train, val) objective pairs for cfg.family."""
    if cfg.family == "quadratic":
        return [
            TaskPair(
                train=random_quadratic(rng, cfg.dim, 0.0, cfg.hmax),
                val=random_quadratic(rng, cfg.dim, 0.0, cfg.hmax),
            )
            for _ in range(cfg.meta_batch)
        ]
    if cfg.family == "logistic":
        return [_logistic_pair(rng, cfg.dim, max(2 * cfg.dim, 20)) for _ in range(cfg.meta_batch)]
    tasks = sample_sinusoid_batch(rng, cfg.meta_batch, cfg.shots)
    return [TaskPair(train=t.train_objective(), val=t.val_objective()) for t in tasks]


def initial_theta(cfg: MetaTrainConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.family == "sinusoid":
        return mlp_init(rng)
    return rng.standard_normal(cfg.dim)


@dataclass(frozen=True)
class TrainRecordRow:
    iteration: int
    meta_loss: float
    grad_norm: float
    err_fo: float
    err_tr: float
    err_bin: float
    hvp_total: int


TRAIN_CSV_HEADER = "iter,meta_loss,grad_norm,err_fo,err_tr,err_bin,hvp_total"


def train_csv(rows: Sequence[TrainRecordRow]) -> str:
    out = io.StringIO()
    out.write(TRAIN_CSV_HEADER + "\n")
    for r in rows:
        out.write(
            f"{r.iteration},{r.meta_loss!r},{r.grad_norm!r},"
            f"{r.err_fo!r},{r.err_tr!r},{r.err_bin!r},{r.hvp_total}\n"
        )
    return out.getvalue()


def meta_step(theta: np.ndarray, tasks: Sequence[TaskPair], cfg: MetaTrainConfig):
    """One outer update over a task batch; returns (theta', TrainRecordRow).

    The iteration field of the returned row is left at 0; the caller stamps it.
    """
    if not tasks:
        raise ValueError("task batch must be non-empty")
    trajectories = [gd_adapt(pair.train, theta, cfg.alpha, cfg.K) for pair in tasks]
    grads = [validation_gradient(pair.val, traj) for pair, traj in zip(tasks, trajectories)]
    meta_loss = float(np.mean([pair.val.value(traj.final) for pair, traj in zip(tasks, trajectories)]))

    hvp_total = 0
    if cfg.estimator.kind == "reptile":
        direction = reptile_direction(theta, [traj.final for traj in trajectories])
        theta_next = theta + cfg.estimator.reptile_eps * direction
        grad_norm = float(np.linalg.norm(direction))
    else:
        estimates = []
        for traj, g in zip(trajectories, grads):
            mg = estimate(traj, g, cfg.estimator)
            hvp_total += mg.cost.hvp_total
            estimates.append(mg.estimate)
        mean_estimate = sum(estimates) / len(estimates)
        theta_next = theta - cfg.beta * mean_estimate
        grad_norm = float(np.linalg.norm(mean_estimate))

    err_fo = err_tr = err_bin = math.nan
    if cfg.track_errors:
        fo_errs, tr_errs, bin_errs = [], [], []
        for traj, g in zip(trajectories, grads):
            exact = full_meta_gradient(traj, g)
            fo_errs.append(estimation_error(g, exact))
            tr_errs.append(estimation_error(trunc_meta_gradient(traj, g, cfg.estimator.L), exact))
            bin_errs.append(estimation_error(binom_meta_gradient(traj, g, cfg.estimator.L), exact))
        err_fo, err_tr, err_bin = map(lambda v: float(np.mean(v)), (fo_errs, tr_errs, bin_errs))

    row = TrainRecordRow(0, meta_loss, grad_norm, err_fo, err_tr, err_bin, hvp_total)
    return theta_next, row


def run_metatrain(cfg: MetaTrainConfig):
    """Run cfg.iterations meta-steps; returns (records, final theta)."""
    init_ss, task_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    theta = initial_theta(cfg, np.random.default_rng(init_ss))
    task_rng = np.random.default_rng(task_ss)
    fixed_batch = None if cfg.resample else sample_task_batch(cfg, task_rng)

    records = []
    for i in range(cfg.iterations):
        tasks = sample_task_batch(cfg, task_rng) if cfg.resample else fixed_batch
        try:
            theta, row = meta_step(theta, tasks, cfg)
        except DivergenceError as exc:
            raise DivergenceError(f"meta-iteration {i}: {exc}") from exc
        records.append(
            TrainRecordRow(i, row.meta_loss, row.grad_norm, row.err_fo, row.err_tr, row.err_bin, row.hvp_total)
        )
    return records, theta


@dataclass(frozen=True)
class ErrorRow:
    batch: int
    L: int
    err_fo: float
    err_tr: float
    err_bin: float


PER_BATCH_CSV_HEADER = "batch,L,err_fo,err_tr,err_bin"
AVERAGED_CSV_HEADER = "L,err_fo,err_tr,err_bin"


def run_error_experiment(cfg: MetaTrainConfig, l_values: Sequence[int], batches: int):
    """Measure actual estimator errors at a fixed prior; no outer updates.

    For every batch: adapt each task from the same theta, take the exact
    product as the reference, and record the batch-mean errors of the
    first-order, truncated, and expansion estimates at each L. Returns
    (per_batch_rows, averaged_rows).
    """
    if batches < 1:
        raise ValueError("batches must be >= 1")
    l_values = list(l_values)
    for L in l_values:
        if not 0 <= L <= cfg.K:
            raise ValueError(f"L={L} outside [0, {cfg.K}]")

    init_ss, task_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    theta = initial_theta(cfg, np.random.default_rng(init_ss))
    task_rng = np.random.default_rng(task_ss)

    per_batch = []
    sums = {L: np.zeros(3) for L in l_values}
    for b in range(batches):
        tasks = sample_task_batch(cfg, task_rng)
        errs = {L: [] for L in l_values}
        for pair in tasks:
            traj = gd_adapt(pair.train, theta, cfg.alpha, cfg.K)
            g = validation_gradient(pair.val, traj)
            exact = full_meta_gradient(traj, g)
            e_fo = estimation_error(g, exact)
            for L in l_values:
                e_tr = estimation_error(trunc_meta_gradient(traj, g, L), exact)
                e_bin = estimation_error(
                    binom_meta_gradient(traj, g, L, cfg.estimator.rescale_alpha), exact
                )
                errs[L].append((e_fo, e_tr, e_bin))
        for L in l_values:
            mean = np.mean(np.array(errs[L]), axis=0)
            sums[L] += mean
            per_batch.append(ErrorRow(b, L, float(mean[0]), float(mean[1]), float(mean[2])))

    averaged = [
        ErrorRow(-1, L, *(float(x) for x in sums[L] / batches)) for L in l_values
    ]
    return per_batch, averaged


def per_batch_csv(rows: Sequence[ErrorRow]) -> str:
    out = io.StringIO()
    out.write(PER_BATCH_CSV_HEADER + "\n")
    for r in rows:
        out.write(f"{r.batch},{r.L},{r.err_fo!r},{r.err_tr!r},{r.err_bin!r}\n")
    return out.getvalue()


def averaged_csv(rows: Sequence[ErrorRow]) -> str:
    out = io.StringIO()
    out.write(AVERAGED_CSV_HEADER + "\n")
    for r in rows:
        out.write(f"{r.L},{r.err_fo!r},{r.err_tr!r},{r.err_bin!r}\n")
    return out.getvalue()
