"""Factored gradient descent, with and without projection.

The iteration is U_{t+1} = Pi_C(U_t - eta * grad f(U_t U_t^H) @ U_t) with
the step size

    eta = C / (L_hat ||X_0||_2 + ||grad f(X_0)||_2),        C = 1/128,

fixed from the initial point ("fixed_from_init"), or recomputed every
iteration as C / (L_hat ||X_t||_2 + ||Q_U Q_U^H grad f(X_t)||_2)
("adaptive_per_iter", the step object the convergence analysis uses).
Stopping is the spectral-norm criterion
||X_{t+1} - X_t||_2 / ||X_{t+1}||_2 <= tol.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import factor_from_psd, procrustes_dist, psd_project, spectral_norm
from .problems import unconstrained

__all__ = [
    "SolverConfig",
    "SolveTrace",
    "init_point",
    "step_size",
    "projfgd_solve",
    "fgd_solve",
    "write_trace_csv",
    "summary_dict",
    "write_summary_json",
]

PROJFGD_STEP_CONSTANT = 1.0 / 128.0
FGD_STEP_CONSTANT = 1.0 / 16.0
DEFAULT_TOL = 5e-6


@dataclass
class SolverConfig:
    rank: int
    max_iters: int = 10000
    tol: float = DEFAULT_TOL
    step_size_constant: float | None = None  # None -> 1/128 ProjFGD, 1/16 FGD
    step_mode: str = "fixed_from_init"  # or "adaptive_per_iter"
    record_truth_dist: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.step_size_constant is not None and not 0 < self.step_size_constant <= 1:
            raise ValueError("step size constant must lie in (0, 1]")
        if self.step_mode not in ("fixed_from_init", "adaptive_per_iter"):
            raise ValueError(f"unknown step_mode {self.step_mode!r}")


@dataclass
class SolveTrace:
    """Per-iteration solve record.

    Row t holds the state after update t: objective f(X_t), the stopping
    quantity ||X_t - X_{t-1}||_2 / ||X_t||_2, the projection scaling
    xi_t (1 when the raw iterate was already feasible), optionally the
    factor distance to the ground truth, and the factored gradient norm
    ||grad f(X_{t-1}) U_{t-1}||_F that produced the step.
    """

    status: str = "max_iters"
    iters: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    rel_change: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    dist: list = field(default_factory=list)  # nan when not recorded
    grad_norm: list = field(default_factory=list)
    initial_objective: float = float("nan")
    initial_dist: float = float("nan")
    step_eta: float = float("nan")  # fixed step, or the first adaptive step
    elapsed_ms: float = 0.0

    @property
    def n_iters(self):
        return len(self.iters)

    def dist_series(self):
        """Distances including the initial point, for contraction fits."""
        return [self.initial_dist] + list(self.dist)


def init_point(obj, constraint, r):
    """Initial factor: X_0 = (1/L_hat) Pi_+(-grad f(0)), top-r factor,
    then projected onto the constraint set.

    Degenerate case: if -grad f(0) has no positive part the zero factor
    is returned (a documented fixed point of the iteration).
    """
    n = obj.dim
    zero = np.zeros((n, n), dtype=obj.ensemble.operators.dtype)
    g0 = obj.grad(zero)
    x0 = psd_project(-g0) / obj.smoothness()
    u0 = factor_from_psd(x0, r)
    u0, _ = constraint.project(u0)
    return u0


def step_size(obj, x0, constant=PROJFGD_STEP_CONSTANT):
    """eta = C / (L_hat ||x0||_2 + ||grad f(x0)||_2)."""
    denom = obj.smoothness() * spectral_norm(x0) + spectral_norm(obj.grad(x0))
    if denom == 0.0:
        raise ValueError("zero step-size denominator: x0 and grad f(x0) both vanish")
    return constant / denom


def _column_space_grad_norm(u, grad_x):
    # ||Q_U Q_U^H grad||_2 via an orthonormal basis of span(U); SVD-based
    # so rank-deficient (or zero) factors are handled.
    q = scipy.linalg.orth(u)
    if q.size == 0:
        return 0.0
    return float(np.linalg.norm(q.conj().T @ grad_x, 2))


def _solve(instance, cfg, constraint, default_constant, u0=None, callback=None):
    obj = instance.objective
    constant = cfg.step_size_constant if cfg.step_size_constant is not None else default_constant
    l_hat = obj.smoothness()
    t0 = time.perf_counter()

    if u0 is None:
        n = obj.dim
        zero = np.zeros((n, n), dtype=obj.ensemble.operators.dtype)
        x_ref = psd_project(-obj.grad(zero)) / l_hat
        u = factor_from_psd(x_ref, cfg.rank)
        u, _ = constraint.project(u)
    else:
        u = np.asarray(u0)
        u, _ = constraint.project(u)
        x_ref = u @ u.conj().T

    trace = SolveTrace()
    x = u @ u.conj().T
    x = 0.5 * (x + x.conj().T)
    res = obj.residual(x)
    f0 = float(res @ res)
    trace.initial_objective = f0
    if not np.isfinite(f0):
        trace.status = "diverged"
        trace.elapsed_ms = 1e3 * (time.perf_counter() - t0)
        return u, trace
    if cfg.record_truth_dist:
        trace.initial_dist = procrustes_dist(u, instance.truth_factor)
    blowup = 1e6 * (f0 + 1e-12 * (1.0 + float(instance.objective.ensemble.y @ instance.objective.ensemble.y)))

    eta = None
    if cfg.step_mode == "fixed_from_init":
        denom = l_hat * spectral_norm(x_ref) + spectral_norm(obj.grad(x_ref))
        if denom == 0.0:
            trace.status = "converged"  # zero gradient at a zero iterate: fixed point
            trace.elapsed_ms = 1e3 * (time.perf_counter() - t0)
            return u, trace
        eta = constant / denom
        trace.step_eta = eta

    for t in range(1, cfg.max_iters + 1):
        grad_x = obj.grad_from_residual(res)
        if cfg.step_mode == "adaptive_per_iter":
            denom = l_hat * spectral_norm(x) + _column_space_grad_norm(u, grad_x)
            if denom == 0.0:
                trace.status = "converged"
                break
            eta = constant / denom
            if np.isnan(trace.step_eta):
                trace.step_eta = eta
        gu = grad_x @ u
        grad_norm = float(np.linalg.norm(gu))
        u_next, xi = constraint.project(u - eta * gu)
        x_next = u_next @ u_next.conj().T
        x_next = 0.5 * (x_next + x_next.conj().T)

        res = obj.residual(x_next)
        f_val = float(res @ res)
        if not np.isfinite(f_val):
            rel_change = float("inf")  # skip spectral norms of a blown-up iterate
        else:
            denom_norm = spectral_norm(x_next)
            diff_norm = spectral_norm(x_next - x)
            if denom_norm == 0.0:
                rel_change = 0.0 if diff_norm == 0.0 else float("inf")
            else:
                rel_change = diff_norm / denom_norm
        dist = (
            procrustes_dist(u_next, instance.truth_factor)
            if cfg.record_truth_dist
            else float("nan")
        )

        trace.iters.append(t)
        trace.objective.append(f_val)
        trace.rel_change.append(rel_change)
        trace.xi.append(xi)
        trace.dist.append(dist)
        trace.grad_norm.append(grad_norm)
        if callback is not None:
            callback(
                {
                    "iter": t,
                    "objective": f_val,
                    "rel_change": rel_change,
                    "xi": xi,
                    "dist": dist,
                    "grad_norm": grad_norm,
                }
            )

        u, x = u_next, x_next
        if not np.isfinite(f_val) or f_val > blowup:
            trace.status = "diverged"
            break
        if rel_change <= cfg.tol:
            trace.status = "converged"
            break
    else:
        trace.status = "max_iters"

    trace.elapsed_ms = 1e3 * (time.perf_counter() - t0)
    return u, trace


def projfgd_solve(instance, cfg, u0=None, callback=None):
    """Projected factored gradient descent on ``instance``.

    Returns (factor, trace).  ``u0`` overrides the default initialization
    (it is projected onto the constraint set first); ``callback`` receives
    one dict per iteration as the trace is produced.
    """
    return _solve(
        instance, cfg, instance.constraint, PROJFGD_STEP_CONSTANT, u0=u0, callback=callback
    )


def fgd_solve(instance, cfg, u0=None, callback=None):
    """Unconstrained factored gradient descent baseline (identity
    projection, step constant 1/16)."""
    return _solve(instance, cfg, unconstrained(), FGD_STEP_CONSTANT, u0=u0, callback=callback)


def _fmt(x):
    # repr keeps shortest round-trip form, so reruns are byte-identical
    return repr(float(x))


def write_trace_csv(trace, path):
    """CSV with header iter,objective,rel_change,xi,dist,grad_norm.

    The dist column is empty when the solve did not record distances
    to the ground truth.
    """
    lines = ["iter,objective,rel_change,xi,dist,grad_norm"]
    for k in range(trace.n_iters):
        d = trace.dist[k]
        dist_field = "" if np.isnan(d) else _fmt(d)
        lines.append(
            ",".join(
                [
                    str(trace.iters[k]),
                    _fmt(trace.objective[k]),
                    _fmt(trace.rel_change[k]),
                    _fmt(trace.xi[k]),
                    dist_field,
                    _fmt(trace.grad_norm[k]),
                ]
            )
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def summary_dict(trace, final_rel_error=None, tol=None, seed=None):
    final_obj = trace.objective[-1] if trace.objective else trace.initial_objective
    return {
        "status": trace.status,
        "iters": trace.n_iters,
        "final_objective": final_obj,
        "final_rel_error": final_rel_error,
        "tol": tol,
        "seed": seed,
        "elapsed_ms": trace.elapsed_ms,
    }


def write_summary_json(summary, path):
    with open(path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
