"""Bounded nonlinear least squares and nonnegative linear least squares.

``solve_nlls`` is a damped Gauss-Newton (Levenberg-Marquardt) solver with
forward-difference Jacobians and box bounds enforced by projection.  It
is deliberately small and fully deterministic: every fit in this package
funnels through it, so results are reproducible bit for bit.

``solve_nonneg_linear`` is the classic Lawson-Hanson active-set method.
It is used wherever amplitudes must stay nonnegative (PL basis weights,
cw-ESR species amplitudes).

Conventions:
  * residual_fn maps the full parameter vector (fixed entries included,
    held at their initial values) to a 1-D residual vector.
  * the Jacobian step for parameter p is 1e-6 * max(1, |p|).
  * reported uncertainties are 1-sigma values from the residual-variance
    scaled inverse of the Gauss-Newton normal matrix J^T J.  Fixed
    parameters report exactly 0; if the normal matrix is singular the
    uncertainties are left unset (None) and the report says so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

_JAC_REL_STEP = 1e-6
_LAMBDA_INIT = 1e-4
_LAMBDA_GROW = 10.0
_LAMBDA_MAX = 1e10


@dataclass
class ParameterSpec:
    """One fit parameter: name, starting value, box bounds, fixed flag."""

    name: str
    initial: float
    lower: float = -math.inf
    upper: float = math.inf
    fixed: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("parameter name must be non-empty")
        if not (self.lower <= self.initial <= self.upper):
            raise ValueError(
                f"parameter {self.name!r}: initial {self.initial} outside "
                f"bounds [{self.lower}, {self.upper}]"
            )


@dataclass
class ParameterEstimate:
    """Fitted value and 1-sigma uncertainty (None when not determined)."""

    value: float
    sigma: float | None

    def __iter__(self):
        return iter((self.value, self.sigma))


@dataclass
class FitReport:
    """Outcome of a nonlinear least-squares fit."""

    parameters: dict[str, ParameterEstimate]
    residual_norm: float
    iterations: int
    converged: bool
    message: str = ""
    # residual norms of the accepted iterates, starting value included
    history: list[float] = field(default_factory=list)

    def values(self) -> dict[str, float]:
        return {k: est.value for k, est in self.parameters.items()}

    def __getitem__(self, name: str) -> ParameterEstimate:
        return self.parameters[name]


def _check_specs(specs: list[ParameterSpec]) -> None:
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate parameter names in {names}")


def _jacobian(residual_fn, p_full, free_idx, r0):
    """Forward-difference Jacobian over the free parameters."""
    m = r0.size
    jac = np.empty((m, len(free_idx)))
    for col, i in enumerate(free_idx):
        step = _JAC_REL_STEP * max(1.0, abs(p_full[i]))
        p_step = p_full.copy()
        p_step[i] += step
        r_step = np.asarray(residual_fn(p_step), dtype=np.float64)
        jac[:, col] = (r_step - r0) / step
    return jac


def solve_nlls(
    residual_fn,
    specs: list[ParameterSpec],
    rel_tol: float = 1e-10,
    step_tol: float = 1e-12,
    max_iterations: int = 200,
) -> FitReport:
    """Minimize ||residual_fn(p)||^2 over the free parameters in specs.

    Each iteration minimizes ||J d + r||^2 + lam ||D d||^2 with D the
    Jacobian column norms (solved as a stacked least-squares problem in
    scaled variables) and projects the update onto the bounds.  lam
    starts at 0 (a pure Gauss-Newton step, exact for linear problems);
    a rejected undamped step is first retried at shorter lengths along
    its own direction, then lam is raised tenfold.  Convergence is
    declared when an accepted step reduces the norm by a relative factor
    below rel_tol or moves the parameters by less than step_tol.
    """
    _check_specs(specs)
    p_full = np.array([s.initial for s in specs], dtype=np.float64)
    lower = np.array([s.lower for s in specs])
    upper = np.array([s.upper for s in specs])
    free_idx = [i for i, s in enumerate(specs) if not s.fixed]

    r = np.asarray(residual_fn(p_full), dtype=np.float64)
    if r.ndim != 1:
        raise ValueError("residual_fn must return a 1-D array")
    if not np.all(np.isfinite(r)):
        raise ValueError("residual is non-finite at the initial parameters")
    norm = float(np.linalg.norm(r))
    history = [norm]

    if max_iterations < 0:
        raise ValueError("max_iterations must be nonnegative")

    converged = False
    message = ""
    iterations = 0
    singular = False

    if not free_idx:
        converged = True
        message = "all parameters fixed"

    lam = 0.0
    while iterations < max_iterations and not converged and free_idx:
        iterations += 1
        jac = _jacobian(residual_fn, p_full, free_idx, r)
        # solve in unit-column scaling through a least-squares
        # factorization, not the normal equations: parameter
        # sensitivities here span many decades and the squared
        # condition number of J^T J destroys the flat directions
        col_norm = np.sqrt((jac * jac).sum(axis=0))
        col_norm[col_norm <= 0.0] = 1.0
        jac_s = jac / col_norm
        n_free = len(free_idx)

        accepted = False
        while not accepted:
            if lam == 0.0:
                a_mat, b_vec = jac_s, -r
            else:
                a_mat = np.vstack(
                    [jac_s, math.sqrt(lam) * np.eye(n_free)])
                b_vec = np.concatenate([-r, np.zeros(n_free)])
            try:
                delta_s = np.linalg.lstsq(a_mat, b_vec, rcond=None)[0]
                delta = delta_s / col_norm
            except np.linalg.LinAlgError:
                delta = None
            if delta is None or not np.all(np.isfinite(delta)):
                if lam >= _LAMBDA_MAX:
                    singular = True
                    message = "singular normal matrix"
                    break
                lam = _LAMBDA_INIT if lam == 0.0 else lam * _LAMBDA_GROW
                continue

            # On the undamped attempt a rejected step is retried at
            # shorter lengths along the same direction before raising
            # lam: damping suppresses the flattest step component first,
            # which points the step across a curved valley instead of
            # along it and can stall the solve far from the minimum.
            scales = (1.0, 0.5, 0.25, 0.125, 0.0625) if lam == 0.0 else (1.0,)
            hit = None
            for scale in scales:
                p_trial = p_full.copy()
                for col, i in enumerate(free_idx):
                    p_trial[i] += scale * delta[col]
                np.clip(p_trial, lower, upper, out=p_trial)
                step_norm = float(np.linalg.norm(p_trial - p_full))
                if step_norm == 0.0 and scale != 1.0:
                    break
                r_trial = np.asarray(residual_fn(p_trial), dtype=np.float64)
                trial_norm = (
                    float(np.linalg.norm(r_trial))
                    if np.all(np.isfinite(r_trial))
                    else math.inf
                )
                if trial_norm <= norm:
                    hit = (p_trial, r_trial, trial_norm, step_norm)
                    break
            if hit is not None:
                p_trial, r_trial, trial_norm, step_norm = hit
                reduction = (norm - trial_norm) / norm if norm > 0.0 else 0.0
                p_full = p_trial
                r = r_trial
                norm = trial_norm
                history.append(norm)
                lam = 0.0
                accepted = True
                if norm == 0.0 or reduction < rel_tol or step_norm < step_tol:
                    converged = True
            else:
                if lam >= _LAMBDA_MAX:
                    # cannot improve in any direction; treat as stalled
                    converged = True
                    message = "stalled at maximum damping"
                    break
                lam = _LAMBDA_INIT if lam == 0.0 else lam * _LAMBDA_GROW
        if singular:
            break

    if iterations >= max_iterations and not converged:
        message = message or "maximum iterations reached"

    sigmas = _covariance_sigmas(residual_fn, p_full, free_idx, r, norm)
    if sigmas is None:
        singular = True
        message = message or "singular normal matrix, uncertainties unset"

    parameters: dict[str, ParameterEstimate] = {}
    for i, s in enumerate(specs):
        if s.fixed:
            est = ParameterEstimate(p_full[i], 0.0)
        elif sigmas is None:
            est = ParameterEstimate(p_full[i], None)
        else:
            est = ParameterEstimate(p_full[i], sigmas[free_idx.index(i)])
        parameters[s.name] = est

    return FitReport(
        parameters=parameters,
        residual_norm=norm,
        iterations=iterations,
        converged=converged,
        message=message,
        history=history,
    )


def _covariance_sigmas(residual_fn, p_full, free_idx, r, norm):
    """1-sigma uncertainties from the GN normal matrix, or None if singular."""
    if not free_idx:
        return []
    jac = _jacobian(residual_fn, p_full, free_idx, r)
    # invert in unit-column scaling; see the solver loop for why
    col_norm = np.sqrt((jac * jac).sum(axis=0))
    col_norm[col_norm <= 0.0] = 1.0
    normal = (jac / col_norm).T @ (jac / col_norm)
    m, n = r.size, len(free_idx)
    dof = max(m - n, 1)
    s2 = norm * norm / dof
    try:
        cov = s2 * np.linalg.inv(normal) / np.outer(col_norm, col_norm)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(cov)):
        return None
    var = np.diag(cov)
    if np.any(var < -1e-12 * max(1.0, float(np.max(np.abs(var))))):
        return None
    return [float(math.sqrt(max(v, 0.0))) for v in var]


def solve_nonneg_linear(
    design: NDArray[np.float64], target: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float]:
    """Solve min ||design @ x - target|| subject to x >= 0.

    Lawson-Hanson active-set iteration.  Returns (x, residual_norm).
    When the unconstrained least-squares solution is already
    nonnegative, that solution is returned.
    """
    a = np.asarray(design, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("design must be a 2-D array")
    if b.ndim != 1 or b.size != a.shape[0]:
        raise ValueError(
            f"target length {b.size} does not match design rows {a.shape[0]}"
        )
    col_norms = np.linalg.norm(a, axis=0)
    if np.any(col_norms == 0.0):
        raise ValueError(
            f"design column {int(np.argmin(col_norms))} has zero norm"
        )

    m, n = a.shape
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = a.T @ b
    tol = 10.0 * np.finfo(np.float64).eps * float(np.abs(a).sum(axis=0).max()) * max(m, n)

    # outer loop adds at most one column per pass; 3n passes is generous
    for _ in range(3 * n + 10):
        if np.all(passive) or np.max(w[~passive], initial=-math.inf) <= tol:
            break
        j = int(np.argmax(np.where(passive, -math.inf, w)))
        passive[j] = True
        while True:
            z = np.zeros(n)
            cols = np.nonzero(passive)[0]
            sol, *_ = np.linalg.lstsq(a[:, cols], b, rcond=None)
            z[cols] = sol
            if np.all(z[cols] > 0.0):
                x = z
                break
            mask = passive & (z <= 0.0)
            ratios = x[mask] / (x[mask] - z[mask])
            alpha = float(np.min(ratios))
            x = x + alpha * (z - x)
            passive &= x > tol * max(1.0, float(np.max(np.abs(x))))
            x[~passive] = 0.0
        w = a.T @ (b - a @ x)

    residual_norm = float(np.linalg.norm(a @ x - b))
    return x, residual_norm
