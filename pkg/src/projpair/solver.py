"""Conjugate-gradient solve of the normal equations, and the residual floor
predicted by a range condition.

Started from zero, the iteration converges to the minimum-norm least-squares
solution; the data-space residual norm is non-increasing at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateKernelError, DivergenceError, EvaluationError


@dataclass(frozen=True, eq=False)
class CgneState:
    """Result of a solve: final iterate and the relative residual trace."""

    iterate: np.ndarray
    residual_history: np.ndarray
    iterations: int
    stop_reason: str

    @property
    def final_residual(self) -> float:
        return float(self.residual_history[-1])


def _as_ops(A) -> tuple[Callable, Callable]:
    if isinstance(A, np.ndarray):
        if A.ndim != 2:
            raise ConfigurationError("matrix operators must be 2-d")
        return (lambda x: A @ x), (lambda y: A.T @ y)
    if hasattr(A, "forward_flat") and hasattr(A, "adjoint_flat"):
        return A.forward_flat, A.adjoint_flat
    if hasattr(A, "forward") and hasattr(A, "adjoint"):
        return A.forward, A.adjoint
    try:
        fwd, adj = A
    except Exception as exc:
        raise ConfigurationError("operator must be a matrix, (forward, adjoint) pair, or expose both methods") from exc
    return fwd, adj


def cgne_solve(
    A,
    g: np.ndarray,
    max_iter: int = 1000,
    tol: float = 0.0,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
    callback_every: int = 1,
) -> CgneState:
    """Minimize ``||A f - g||`` over iterates in the range of the adjoint.

    ``A`` may be a dense matrix, a ``(forward, adjoint)`` pair of callables
    on flat vectors, or any object exposing ``forward``/``adjoint`` (or the
    ``_flat`` variants).  Stops when the relative residual reaches ``tol``,
    when the normal residual vanishes (least-squares optimum), or after
    ``max_iter`` iterations.  ``residual_history[k]`` is the relative
    residual after ``k`` iterations; entry 0 is 1 for any nonzero target.

    Raises
    ------
    DivergenceError
        If the iterate or residual stops being finite.
    """
    fwd, adj = _as_ops(A)
    if max_iter < 0:
        raise ConfigurationError("max_iter must be nonnegative")
    g = np.asarray(g, dtype=float).ravel()
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        x0 = np.zeros_like(np.asarray(adj(g), dtype=float).ravel())
        return CgneState(iterate=x0, residual_history=np.array([0.0]), iterations=0, stop_reason="zero_target")
    r = g.copy()
    s = np.asarray(adj(r), dtype=float).ravel()
    x = np.zeros_like(s)
    p = s.copy()
    gamma = float(s @ s)
    history = [1.0]
    stop = "max_iter"
    k = 0
    while k < max_iter:
        if gamma == 0.0:
            stop = "normal_residual_zero"
            break
        q = np.asarray(fwd(p), dtype=float).ravel()
        qq = float(q @ q)
        if qq == 0.0:
            stop = "normal_residual_zero"
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        k += 1
        rel = float(np.linalg.norm(r)) / g_norm
        history.append(rel)
        if not (np.isfinite(rel) and np.all(np.isfinite(x))):
            raise DivergenceError("iteration produced non-finite values", iteration=k)
        if callback is not None and (k % max(1, callback_every) == 0):
            callback(k, x, rel)
        if rel <= tol:
            stop = "tolerance"
            break
        s = np.asarray(adj(r), dtype=float).ravel()
        gamma_new = float(s @ s)
        beta = gamma_new / gamma
        gamma = gamma_new
        p = s + beta * p
    return CgneState(iterate=x, residual_history=np.array(history), iterations=k, stop_reason=stop)


def predicted_residual_floor(target, kernels) -> float:
    """Lower bound for the achievable data residual, from a range condition.

    The kernels, sampled at the bin centers and packed as ``W = (V1, -V2)``,
    annihilate every consistent data vector; the component of the target
    along ``W`` can never be matched:

        floor = |<g, W>| / ||W||.

    A zero floor means the target is not obstructed by this condition.
    """
    if hasattr(target, "view1") and hasattr(target, "view2"):
        views: Sequence = (target.view1, target.view2)
    else:
        views = tuple(target)
    g = np.concatenate([np.asarray(v.values, float).ravel() for v in views])
    w = np.concatenate(
        [
            np.asarray(kernels.v1(views[0].grid.centers), float).ravel(),
            -np.asarray(kernels.v2(views[1].grid.centers), float).ravel(),
        ]
    )
    if not np.all(np.isfinite(w)):
        raise EvaluationError("kernel sample not finite on the detector grid")
    w_norm = float(np.linalg.norm(w))
    if w_norm < 1e-300:
        raise DegenerateKernelError("kernels vanish identically on the sampled ranges")
    return abs(float(g @ w)) / w_norm
