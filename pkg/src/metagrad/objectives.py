"""Smooth task objectives: value, gradient, and Hessian-vector products.

A task objective is anything exposing ``value``, ``gradient`` and ``hvp`` at a
parameter point. Concrete families:

* :class:`QuadraticTask` -- closed-form constant-Hessian oracle family.
* :class:`LogisticTask` -- convex NLL with an analytic HVP.
* :class:`MlpObjective` / :class:`SinusoidTask` -- small fully-connected
  regressor for few-shot sine fitting; HVPs fall back to central differences.
* :class:`PrescribedHessianSequence` -- hand-picked per-step curvature used to
  meet the error bounds with equality.

Objectives are immutable after construction and evaluation is pure, so a
single instance may be evaluated concurrently from many tasks.
"""

import abc
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import as_matrix, as_vector, is_symmetric

AMPLITUDE_RANGE = (0.1, 5.0)
PHASE_RANGE = (0.0, np.pi)
INPUT_RANGE = (-5.0, 5.0)

MLP_HIDDEN = 40  # regressor is 1 -> 40 -> 40 -> 1 with tanh activations


def hvp_finite_difference(obj, phi, v, eps: Optional[float] = None) -> np.ndarray:
    """Central-difference Hessian-vector product from two gradient calls.

    Differences along the unit direction u = v/||v|| and rescales by ||v||,
    so the result is exactly homogeneous in v. Default step is
    eps = 1e-5 * (1 + ||phi||), balancing truncation against round-off.
    """
    phi = as_vector(phi)
    v = as_vector(v)
    vnorm = float(np.linalg.norm(v))
    if vnorm < 1e-150:
        raise ValueError("direction v is zero (or denormal); HVP direction undefined")
    if eps is None:
        eps = 1e-5 * (1.0 + float(np.linalg.norm(phi)))
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = v / vnorm
    gp = obj.gradient(phi + eps * u)
    gm = obj.gradient(phi - eps * u)
    return vnorm * (gp - gm) / (2.0 * eps)


class TaskObjective(abc.ABC):
    """Contract for a smooth loss: value, gradient, HVP at any point.

    ``smoothness`` is the Lipschitz constant of the gradient when analytically
    known, else None. ``full_hessian`` is optional and only available for
    families with an explicit Hessian.
    """

    dim: int
    smoothness: Optional[float] = None

    @abc.abstractmethod
    def value(self, phi) -> float: ...

    @abc.abstractmethod
    def gradient(self, phi) -> np.ndarray: ...

    def hvp(self, phi, v) -> np.ndarray:
        return hvp_finite_difference(self, phi, v)

    def full_hessian(self, phi) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no explicit Hessian")

    @property
    def has_full_hessian(self) -> bool:
        return type(self).full_hessian is not TaskObjective.full_hessian


class QuadraticTask(TaskObjective):
    """Loss 0.5 * phi^T A phi + b^T phi with symmetric A."""

    def __init__(self, a, b):
        a = as_matrix(a)
        b = as_vector(b)
        if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent shapes A {a.shape}, b {b.shape}")
        if not is_symmetric(a):
            raise ValueError("A must be symmetric")
        self.a = a
        self.b = b
        self.dim = b.shape[0]
        self.smoothness = float(np.max(np.abs(np.linalg.eigvalsh(a))))

    def value(self, phi) -> float:
        phi = as_vector(phi)
        return float(0.5 * phi @ self.a @ phi + self.b @ phi)

    def gradient(self, phi) -> np.ndarray:
        return self.a @ as_vector(phi) + self.b

    def hvp(self, phi, v) -> np.ndarray:
        return self.a @ as_vector(v)

    def full_hessian(self, phi) -> np.ndarray:
        return self.a


class LogisticTask(TaskObjective):
    """Mean negative log-likelihood of logistic regression.

    ``x`` holds one input per column (d x N); labels are in {0, 1}. The
    Hessian (1/N) X diag(s') X^T is PSD, and the HVP is computed analytically
    as (1/N) X (s' * (X^T v)) rather than by finite differences.
    """

    def __init__(self, x, y):
        x = as_matrix(x)
        y = as_vector(y)
        if x.shape[1] != y.shape[0]:
            raise ValueError(f"inconsistent shapes X {x.shape}, y {y.shape}")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("labels must be 0 or 1")
        self.x = x
        self.y = y
        self.dim = x.shape[0]
        self.n = x.shape[1]
        # sigmoid'(z) <= 1/4, so ||Hessian|| <= lambda_max(X X^T) / (4 N)
        self.smoothness = float(np.linalg.eigvalsh(x @ x.T).max() / (4.0 * self.n))

    @staticmethod
    def _sigmoid(z):
        return 0.5 * (1.0 + np.tanh(0.5 * z))

    def value(self, phi) -> float:
        z = self.x.T @ as_vector(phi)
        # log(1 + e^z) - y z, evaluated stably
        return float(np.mean(np.logaddexp(0.0, z) - self.y * z))

    def gradient(self, phi) -> np.ndarray:
        z = self.x.T @ as_vector(phi)
        return self.x @ (self._sigmoid(z) - self.y) / self.n

    def hvp(self, phi, v) -> np.ndarray:
        z = self.x.T @ as_vector(phi)
        s = self._sigmoid(z)
        return self.x @ ((s * (1.0 - s)) * (self.x.T @ as_vector(v))) / self.n

    def full_hessian(self, phi) -> np.ndarray:
        z = self.x.T @ as_vector(phi)
        s = self._sigmoid(z)
        return (self.x * (s * (1.0 - s))) @ self.x.T / self.n


def _mlp_shapes():
    h = MLP_HIDDEN
    return (("w1", (h,)), ("b1", (h,)), ("w2", (h, h)), ("b2", (h,)), ("w3", (h,)), ("b3", (1,)))


def mlp_dim() -> int:
    return sum(int(np.prod(shape)) for _, shape in _mlp_shapes())


def _unpack(theta: np.ndarray):
    parts = {}
    offset = 0
    for name, shape in _mlp_shapes():
        size = int(np.prod(shape))
        parts[name] = theta[offset : offset + size].reshape(shape)
        offset += size
    return parts


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def mlp_init(seed) -> np.ndarray:
    """Deterministic He-style initialization of the sine regressor, flattened.

    ``seed`` is an integer seed or an already-constructed Generator.
    """
    rng = _as_rng(seed)
    h = MLP_HIDDEN
    w1 = rng.standard_normal(h) * np.sqrt(2.0 / 1.0)
    w2 = rng.standard_normal((h, h)) * np.sqrt(2.0 / h)
    w3 = rng.standard_normal(h) * np.sqrt(2.0 / h)
    zeros = np.zeros(h)
    return np.concatenate([w1, zeros, w2.ravel(), zeros, w3, np.zeros(1)])


class MlpObjective(TaskObjective):
    """Mean squared error of the fixed small tanh regressor on (x, y) data.

    Gradients are exact (hand backprop); HVPs use the central-difference
    fallback, which is the intended mode for this family.
    """

    def __init__(self, x, y):
        self.x = as_vector(x)
        self.y = as_vector(y)
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")
        self.dim = mlp_dim()
        self.smoothness = None

    def _forward(self, theta):
        p = _unpack(as_vector(theta))
        a1 = np.outer(p["w1"], self.x) + p["b1"][:, None]
        h1 = np.tanh(a1)
        a2 = p["w2"] @ h1 + p["b2"][:, None]
        h2 = np.tanh(a2)
        yhat = h2.T @ p["w3"] + p["b3"][0]
        return p, h1, h2, yhat

    def predict(self, theta, x) -> np.ndarray:
        p = _unpack(as_vector(theta))
        x = as_vector(x)
        h1 = np.tanh(np.outer(p["w1"], x) + p["b1"][:, None])
        h2 = np.tanh(p["w2"] @ h1 + p["b2"][:, None])
        return h2.T @ p["w3"] + p["b3"][0]

    def value(self, theta) -> float:
        _, _, _, yhat = self._forward(theta)
        return float(np.mean((yhat - self.y) ** 2))

    def gradient(self, theta) -> np.ndarray:
        p, h1, h2, yhat = self._forward(theta)
        n = self.x.shape[0]
        dy = 2.0 * (yhat - self.y) / n
        dw3 = h2 @ dy
        db3 = np.array([dy.sum()])
        da2 = np.outer(p["w3"], dy) * (1.0 - h2 * h2)
        dw2 = da2 @ h1.T
        db2 = da2.sum(axis=1)
        da1 = (p["w2"].T @ da2) * (1.0 - h1 * h1)
        dw1 = da1 @ self.x
        db1 = da1.sum(axis=1)
        return np.concatenate([dw1, db1, dw2.ravel(), db2, dw3, db3])


@dataclass(frozen=True)
class SinusoidTask:
    """One few-shot sine-fitting task: y = amplitude * sin(x + phase)."""

    amplitude: float
    phase: float
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray

    def train_objective(self) -> MlpObjective:
        return MlpObjective(self.x_train, self.y_train)

    def val_objective(self) -> MlpObjective:
        return MlpObjective(self.x_val, self.y_val)


def sample_sinusoid_batch(seed, batch: int, shots: int):
    """Sample ``batch`` sine tasks with ``shots`` train and val points each.

    Amplitudes are uniform on [0.1, 5.0], phases uniform on [0, pi], inputs
    uniform on [-5, 5]; the draw is deterministic given the seed (an integer,
    or a Generator advanced in place).
    """
    if batch < 1 or shots < 1:
        raise ValueError("batch and shots must be >= 1")
    rng = _as_rng(seed)
    tasks = []
    for _ in range(batch):
        amplitude = float(rng.uniform(*AMPLITUDE_RANGE))
        phase = float(rng.uniform(*PHASE_RANGE))
        x_train = rng.uniform(*INPUT_RANGE, size=shots)
        x_val = rng.uniform(*INPUT_RANGE, size=shots)
        tasks.append(
            SinusoidTask(
                amplitude=amplitude,
                phase=phase,
                x_train=x_train,
                y_train=amplitude * np.sin(x_train + phase),
                x_val=x_val,
                y_val=amplitude * np.sin(x_val + phase),
            )
        )
    return tasks


def sinusoid_batch_csv(tasks: Sequence[SinusoidTask]) -> str:
    """Serialize a task batch, one row per data point: task_id,split,x,y."""
    out = io.StringIO()
    out.write("task_id,split,x,y\n")
    for i, task in enumerate(tasks):
        for split, xs, ys in (("train", task.x_train, task.y_train), ("val", task.x_val, task.y_val)):
            for x, y in zip(xs, ys):
                out.write(f"{i},{split},{x!r},{y!r}\n")
    return out.getvalue()


@dataclass(frozen=True)
class PrescribedHessianSequence:
    """A fixed per-step curvature sequence {H^k} plus a validation gradient g.

    Stands in for a recorded optimization path when only the Hessians matter,
    e.g. when checking that an error bound is met with equality.
    """

    hessians: tuple
    g: np.ndarray
    smoothness: Optional[float] = None

    def __post_init__(self):
        hs = tuple(as_matrix(h) for h in self.hessians)
        g = as_vector(self.g)
        d = g.shape[0]
        for k, h in enumerate(hs):
            if h.shape != (d, d):
                raise ValueError(f"Hessian {k} has shape {h.shape}, expected {(d, d)}")
            if not is_symmetric(h):
                raise ValueError(f"Hessian {k} is not symmetric")
            if self.smoothness is not None:
                if float(np.linalg.norm(h, 2)) > self.smoothness * (1 + 1e-12):
                    raise ValueError(f"Hessian {k} exceeds declared smoothness bound")
        object.__setattr__(self, "hessians", hs)
        object.__setattr__(self, "g", g)

    @property
    def steps(self) -> int:
        return len(self.hessians)

    @property
    def dim(self) -> int:
        return self.g.shape[0]


SHARPNESS_KINDS = ("theorem2-neg", "theorem3-pos", "theorem3-trunc")


def sharpness_sequence(kind: str, K: int, L: int, H: float, d: int, g=None) -> PrescribedHessianSequence:
    """Curvature sequences for which the closed-form error bounds are tight.

    kind selects the construction:
      * "theorem2-neg":   H^k = -H I for every step
      * "theorem3-pos":   H^k = +H I for every step
      * "theorem3-trunc": H^k = +H I for k < K - L, zero for the last L steps
    """
    if H <= 0:
        raise ValueError("H must be positive")
    if not 0 <= L <= K:
        raise ValueError("need 0 <= L <= K")
    eye = np.eye(d)
    if kind == "theorem2-neg":
        hs = tuple(-H * eye for _ in range(K))
    elif kind == "theorem3-pos":
        hs = tuple(H * eye for _ in range(K))
    elif kind == "theorem3-trunc":
        hs = tuple(H * eye if k < K - L else np.zeros((d, d)) for k in range(K))
    else:
        raise ValueError(f"unknown sharpness kind {kind!r}; expected one of {SHARPNESS_KINDS}")
    if g is None:
        g = np.zeros(d)
        g[0] = 1.0
    return PrescribedHessianSequence(hessians=hs, g=as_vector(g), smoothness=H)


def spectral_norm(hvp, dim: int, iters: int = 50, tol: float = 1e-8, seed: int = 0) -> float:
    """Largest |eigenvalue| of a symmetric map given only matvec access.

    Power iteration on v -> hvp(v); 50 steps at tol 1e-8 by default.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    norm = 0.0
    for _ in range(iters):
        w = as_vector(hvp(v))
        new_norm = float(np.linalg.norm(w))
        if new_norm == 0.0:
            return 0.0
        v = w / new_norm
        if abs(new_norm - norm) <= tol * max(1.0, new_norm):
            return new_norm
        norm = new_norm
    return norm


def estimate_smoothness(obj: TaskObjective, points, **kwargs) -> float:
    """Max spectral norm of the Hessian over the given points.

    Concrete stand-in for the gradient-Lipschitz constant when no analytic
    value exists; uses power iteration through the objective's HVP.
    """
    return max(spectral_norm(lambda v, p=p: obj.hvp(p, v), obj.dim, **kwargs) for p in points)


def random_spd(rng: np.random.Generator, d: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Random symmetric matrix with eigenvalues uniform on [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigs = rng.uniform(lo, hi, size=d)
    return q @ np.diag(eigs) @ q.T


def random_quadratic(rng: np.random.Generator, d: int, lo: float = 0.0, hi: float = 1.0) -> QuadraticTask:
    return QuadraticTask(random_spd(rng, d, lo, hi), rng.standard_normal(d))


def random_logistic(rng: np.random.Generator, d: int, n: int) -> LogisticTask:
    x = rng.standard_normal((d, n))
    w = rng.standard_normal(d)
    probs = LogisticTask._sigmoid(x.T @ w)
    y = (rng.uniform(size=n) < probs).astype(float)
    return LogisticTask(x, y)
