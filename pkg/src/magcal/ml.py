"""Constrained maximum-likelihood calibration via a Lagrangian Newton method.

Minimizes sum_k ||y_k - T m_k - h||^2 subject to ||m_k|| = 1, over the
upper-triangular inverse shape matrix T, the offset h, the per-sample unit
field directions m_k, and one Lagrange multiplier per constraint. The full
estimate has dimension 4N+9 with the layout

    x = [six T entries, h, m_1 .. m_N, lambda_1 .. lambda_N].

The KKT Hessian is an arrowhead matrix: each (m_k, lambda_k) 4x4 block
couples only to the 9-dimensional (T, h) head. Newton steps are therefore
computed in O(N) by eliminating every per-sample block onto the head via
Schur complements. Forming and factoring the dense (4N+9)^2 system is kept
as an oracle path (``method="dense"``) for equivalence checks and timing
comparisons only.

Convergence is declared on the norm of the full Lagrangian gradient; the
data misfit alone can be tiny at infeasible points (it is ~0 at the
standard initialization) and is no use as a test.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import DivergenceError, SolverFailure
from .linalg import UPPER_VEC_INDICES
from .types import MLSolveReport, MLState, SolveOptions, as_samples

_EYE3 = np.eye(3)


def ml_objective(state: MLState, data) -> tuple[float, float]:
    """Data misfit and full Lagrangian value.

    Returns (misfit, lagrangian) where misfit = sum ||y - T m - h||^2 and
    lagrangian adds sum lambda_k (||m_k||^2 - 1).
    """
    samples = as_samples(data)
    if samples.shape[0] != state.n_samples:
        raise ValueError("state and data sample counts disagree")
    r = samples - state.offset - state.field_dirs @ state.t_matrix.T
    misfit = float(np.einsum("ij,ij->", r, r))
    constraint = np.einsum("ij,ij->i", state.field_dirs, state.field_dirs) - 1.0
    return misfit, misfit + float(state.lagrange @ constraint)


def _assemble(state: MLState, samples: np.ndarray):
    """Gradient and Hessian blocks of the Lagrangian.

    Returns (g_head, g_m, g_lam, head, coupling, diag_blocks): the 9-vector
    head gradient, per-sample gradients (N,3) and (N,), the 9x9 head
    Hessian, the (N,9,4) head-to-sample couplings, and the (N,4,4)
    per-sample KKT blocks.
    """
    t = state.t_matrix
    dirs = state.field_dirs
    lam = state.lagrange
    n = dirs.shape[0]
    u = samples - state.offset
    r = u - dirs @ t.T

    g_t = -2.0 * (r.T @ dirs).ravel(order="F")[UPPER_VEC_INDICES]
    g_h = -2.0 * r.sum(axis=0)
    g_head = np.concatenate([g_t, g_h])
    g_m = -2.0 * r @ t + 2.0 * lam[:, None] * dirs
    g_lam = np.einsum("ij,ij->i", dirs, dirs) - 1.0

    head = np.zeros((9, 9))
    h_tt = 2.0 * np.kron(dirs.T @ dirs, _EYE3)
    head[:6, :6] = h_tt[np.ix_(UPPER_VEC_INDICES, UPPER_VEC_INDICES)]
    h_th = 2.0 * np.kron(dirs.sum(axis=0)[:, None], _EYE3)
    head[:6, 6:] = h_th[UPPER_VEC_INDICES, :]
    head[6:, :6] = head[:6, 6:].T
    head[6:, 6:] = 2.0 * n * _EYE3

    # Head-to-sample coupling: rows over [T entries, h], columns [m_k, lambda_k].
    h_tm = 2.0 * (
        np.einsum("kc,rl->kcrl", dirs, t).reshape(n, 9, 3)
        - np.einsum("cl,kr->kcrl", _EYE3, r).reshape(n, 9, 3)
    )
    coupling = np.zeros((n, 9, 4))
    coupling[:, :6, :3] = h_tm[:, UPPER_VEC_INDICES, :]
    coupling[:, 6:9, :3] = 2.0 * t

    diag_blocks = np.zeros((n, 4, 4))
    diag_blocks[:, :3, :3] = 2.0 * t.T @ t + 2.0 * lam[:, None, None] * _EYE3
    diag_blocks[:, :3, 3] = 2.0 * dirs
    diag_blocks[:, 3, :3] = 2.0 * dirs

    return g_head, g_m, g_lam, head, coupling, diag_blocks


def ml_kkt_system(state: MLState, data) -> tuple[np.ndarray, np.ndarray]:
    """Full KKT gradient and dense symmetric Hessian, dimension 4N+9.

    The dense Hessian is the oracle form of the arrowhead system; the
    solver itself never builds it unless asked for the dense method.
    """
    samples = as_samples(data)
    g_head, g_m, g_lam, head, coupling, diag_blocks = _assemble(state, samples)
    n = state.n_samples
    grad = np.concatenate([g_head, g_m.ravel(), g_lam])

    dim = 4 * n + 9
    hess = np.zeros((dim, dim))
    hess[:9, :9] = head
    for k in range(n):
        mi = 9 + 3 * k
        li = 9 + 3 * n + k
        hess[:9, mi : mi + 3] = coupling[k, :, :3]
        hess[mi : mi + 3, :9] = coupling[k, :, :3].T
        hess[mi : mi + 3, mi : mi + 3] = diag_blocks[k, :3, :3]
        hess[mi : mi + 3, li] = diag_blocks[k, :3, 3]
        hess[li, mi : mi + 3] = diag_blocks[k, 3, :3]
    return grad, hess


def _step_block(g_head, g_m, g_lam, head, coupling, diag_blocks):
    """Newton step by Schur elimination of each 4x4 block onto the head."""
    n = g_lam.shape[0]
    g_tail = np.concatenate([g_m, g_lam[:, None]], axis=1)  # (N, 4)
    tail_solve = np.linalg.solve(diag_blocks, np.concatenate(
        [g_tail[:, :, None], np.transpose(coupling, (0, 2, 1))], axis=2
    ))  # (N, 4, 1+9)
    dinv_g = tail_solve[:, :, 0]
    dinv_bt = tail_solve[:, :, 1:]
    schur = head - np.einsum("kij,kjl->il", coupling, dinv_bt)
    rhs = -g_head + np.einsum("kij,kj->i", coupling, dinv_g)
    d_head = scipy.linalg.solve(schur, rhs, assume_a="sym")
    d_tail = -(dinv_g + np.einsum("kij,j->ki", dinv_bt, d_head))
    return np.concatenate([d_head, d_tail[:, :3].ravel(), d_tail[:, 3]])


def _step_dense(state, samples):
    grad, hess = ml_kkt_system(state, samples)
    return scipy.linalg.solve(hess, -grad, assume_a="sym")


def newton_step(state: MLState, data, method: str = "block") -> np.ndarray:
    """One Newton step delta for the full (4N+9) estimate vector."""
    samples = as_samples(data)
    if method == "dense":
        return _step_dense(state, samples)
    if method != "block":
        raise ValueError(f"unknown method {method!r}")
    g_head, g_m, g_lam, head, coupling, diag_blocks = _assemble(state, samples)
    return _step_block(g_head, g_m, g_lam, head, coupling, diag_blocks)


def solve_ml(
    data,
    init: MLState,
    opts: SolveOptions | None = None,
    method: str = "block",
) -> MLSolveReport:
    """Newton iteration on the full KKT system from ``init``.

    Exits when the Lagrangian gradient norm drops to gradient_tolerance or
    max_iterations is reached. Raises SolverFailure on singular systems and
    DivergenceError on non-finite values, both carrying the partial report.
    """
    if method not in ("block", "dense"):
        raise ValueError(f"unknown method {method!r}")
    opts = opts or SolveOptions()
    samples = as_samples(data)
    state = init
    n = state.n_samples
    if samples.shape[0] != n:
        raise ValueError("state and data sample counts disagree")

    misfit, _ = ml_objective(state, samples)
    constraint = np.einsum("ij,ij->i", state.field_dirs, state.field_dirs) - 1.0
    history = [misfit]
    violations = [float(np.max(np.abs(constraint)))]

    def _report(iterations, converged, final):
        warn = ()
        if np.any(np.diag(final.t_matrix) <= 0.0):
            warn = ("t_matrix diagonal not strictly positive at exit",)
        return MLSolveReport(
            objective_history=tuple(history),
            constraint_violation_history=tuple(violations),
            iterations=iterations,
            converged=converged,
            final_state=final,
            warnings=warn,
        )

    if not np.isfinite(misfit):
        raise DivergenceError("initial misfit is non-finite", _report(0, False, state))

    with np.errstate(over="ignore", invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        for iteration in range(opts.max_iterations + 1):
            g_head, g_m, g_lam, head, coupling, diag_blocks = _assemble(state, samples)
            grad_norm = np.sqrt(
                g_head @ g_head + np.einsum("ij,ij->", g_m, g_m) + g_lam @ g_lam
            )
            if grad_norm <= opts.gradient_tolerance:
                return _report(iteration, True, state)
            if iteration == opts.max_iterations:
                break
            try:
                if method == "block":
                    delta = _step_block(g_head, g_m, g_lam, head, coupling, diag_blocks)
                else:
                    delta = _step_dense(state, samples)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
                raise SolverFailure(
                    "singular KKT system in Newton step", _report(iteration, False, state)
                ) from exc
            state = MLState.from_vector(state.to_vector() + delta, n)
            misfit, _ = ml_objective(state, samples)
            history.append(misfit)
            violations.append(float(np.max(np.abs(
                np.einsum("ij,ij->i", state.field_dirs, state.field_dirs) - 1.0
            ))))
            if not np.isfinite(misfit) or not np.all(np.isfinite(delta)):
                raise DivergenceError(
                    "misfit became non-finite", _report(iteration + 1, False, state)
                )

    return _report(opts.max_iterations, False, state)
