"""Newton solver for the norm-residual (quartic) calibration estimate.

Minimizes f(R, h) = sum_k (1 - ||R (y_k - h)||^2)^2 over the six free
entries of the upper-triangular shape matrix R and the offset h, using
analytic first and second derivatives and full Newton steps. There is no
damping or line search: from a good initial estimate the iteration
converges in a handful of steps, while a poor one surfaces quickly as
divergence (which the sensitivity experiments count) instead of being
masked by globalization.

Parameter layout: x = [shape entries 11,12,13,22,23,33, offset], so the
three structurally-zero lower-triangular coordinates never enter the
iteration and R stays exactly triangular.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import DivergenceError, SolverFailure
from .linalg import UPPER_VEC_INDICES
from .types import CalibrationParams, SolveOptions, SolveReport, as_samples

_EYE3 = np.eye(3)
_FULL_INDICES = np.concatenate([UPPER_VEC_INDICES, [9, 10, 11]])


def nm_objective(params: CalibrationParams, data) -> float:
    """Sum of squared norm residuals (1 - ||R (y_k - h)||^2)^2."""
    u = as_samples(data) - params.offset
    v = u @ params.shape.T
    s = np.einsum("ij,ij->i", v, v) - 1.0
    return float(s @ s)


def nm_gradient_hessian(params: CalibrationParams, data) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient (9,) and Hessian (9, 9) of the objective.

    Derivatives are assembled over the column-stacked 9-vector vec(R) via
    Kronecker identities, then the rows/columns of the three excluded
    lower-triangular coordinates are struck, leaving the layout
    [six shape entries, offset].
    """
    shape = params.shape
    u = as_samples(data) - params.offset  # (N, 3)
    v = u @ shape.T                       # rows R u_k
    s = np.einsum("ij,ij->i", v, v) - 1.0
    rtr = shape.T @ shape
    p = u @ rtr                           # rows R'R u_k
    su = u.T @ s                          # sum s_k u_k
    sv = v.T @ s                          # sum s_k R u_k

    g_shape = 4.0 * (v * s[:, None]).T @ u        # d f / d R as a matrix
    g_offset = -4.0 * rtr @ su
    grad_full = np.concatenate([g_shape.ravel(order="F"), g_offset])

    w = (u[:, :, None] * v[:, None, :]).reshape(len(u), 9)  # rows u_k (x) R u_k
    u2 = u.T @ (u * s[:, None])                             # sum s_k u_k u_k'
    h_rr = 8.0 * w.T @ w + 4.0 * np.kron(u2, _EYE3)
    h_rh = -8.0 * w.T @ p - 4.0 * (
        np.kron(_EYE3, sv[:, None]) + np.kron(su[:, None], shape)
    )
    h_hh = 4.0 * s.sum() * rtr + 8.0 * p.T @ p

    hess_full = np.block([[h_rr, h_rh], [h_rh.T, h_hh]])
    return (
        grad_full[_FULL_INDICES],
        hess_full[np.ix_(_FULL_INDICES, _FULL_INDICES)],
    )


def solve_nm(data, init: CalibrationParams, opts: SolveOptions | None = None) -> SolveReport:
    """Newton iteration from ``init`` until the objective stalls.

    Convergence: absolute objective change <= objective_tolerance, or
    Newton-step norm <= step_tolerance. Raises SolverFailure on a singular
    Newton system and DivergenceError when the objective turns non-finite;
    both carry the partial report.
    """
    opts = opts or SolveOptions()
    samples = as_samples(data)
    params = init
    with np.errstate(over="ignore", invalid="ignore"):
        f = nm_objective(params, samples)
    history = [f]

    def _report(iterations, converged, final):
        return SolveReport(
            objective_history=tuple(history),
            iterations=iterations,
            converged=converged,
            final_params=final,
        )

    if not np.isfinite(f):
        raise DivergenceError("initial objective is non-finite", _report(0, False, params))

    x = params.to_vector()
    with np.errstate(over="ignore", invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        for iteration in range(1, opts.max_iterations + 1):
            grad, hess = nm_gradient_hessian(params, samples)
            try:
                step = scipy.linalg.solve(hess, grad, assume_a="sym")
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
                raise SolverFailure(
                    "singular Hessian in Newton step",
                    _report(iteration - 1, False, params),
                ) from exc
            x = x - step
            params = CalibrationParams.from_vector(x)
            f_new = nm_objective(params, samples)
            history.append(f_new)
            if not np.isfinite(f_new) or not np.all(np.isfinite(step)):
                raise DivergenceError(
                    "objective became non-finite",
                    _report(iteration, False, params),
                )
            if abs(f_new - f) <= opts.objective_tolerance or (
                np.linalg.norm(step) <= opts.step_tolerance
            ):
                return _report(iteration, True, params)
            f = f_new

    return _report(opts.max_iterations, False, params)
