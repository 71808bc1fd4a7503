import numpy as np

from metagrad import (
    PrescribedHessianSequence,
    from_hessian_sequence,
    gd_adapt,
    random_quadratic,
)


def quadratic_trajectory(rng, d=4, K=5, alpha=0.2, lo=0.0, hi=1.0):
    """Random quadratic task adapted for K steps; returns (traj, g)."""
    task = random_quadratic(rng, d, lo, hi)
    traj = gd_adapt(task, rng.standard_normal(d), alpha, K)
    return traj, rng.standard_normal(d)


def prescribed_trajectory(rng, d=4, K=5, alpha=0.25, scale=1.0):
    """Random symmetric per-step curvature wrapped as a trajectory."""
    hs = []
    for _ in range(K):
        m = rng.standard_normal((d, d)) * scale
        hs.append((m + m.T) / 2.0)
    g = rng.standard_normal(d)
    seq = PrescribedHessianSequence(hessians=tuple(hs), g=g)
    return from_hessian_sequence(seq, alpha), g


def dense_product(traj, L=None):
    """Explicit matrix (I - a H^{K-L}) ... (I - a H^{K-1}) for oracle checks."""
    K = traj.K
    if L is None:
        L = K
    d = traj.dim
    out = np.eye(d)
    for k in range(K - L, K):
        out = out @ (np.eye(d) - traj.alpha * traj.step_hessian(k))
    return out
