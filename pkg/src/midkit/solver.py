"""Constrained, weighted minimum-norm least squares.

The problem: minimize ||y - X b||^2 subject to M b = 0, and among the
minimizers pick the one minimizing ||D^(1/2) b|| where D holds the design
column sums. Solved in the rescaled parameterization g = D^(1/2) b, either
exactly through an orthonormal null-space basis of the rescaled constraints
(SVD) or approximately by stacking the constraints as a quadratic penalty,
optionally through the penalty problem's normal equations and a Cholesky
factorization for speed.

Dead columns (zero column sum) are removed from the solve and their
coefficients pinned to 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .design import LinearSystem
from .errors import DataError, NumericalError

METHODS = ("nullspace_svd", "penalty", "normal_cholesky")


@dataclass
class SolverConfig:
    method: str = "nullspace_svd"
    kappa: float | None = None  # penalty factor; default 1e4 * sqrt(max column weight)
    rank_tol: float | None = None  # relative singular value cutoff; default max(shape)*eps

    def __post_init__(self):
        if self.method not in METHODS:
            raise DataError(f"unknown solver method {self.method!r}; valid: {METHODS}")
        if self.kappa is not None and not self.kappa > 1.0:
            raise DataError("kappa must be > 1")
        if self.rank_tol is not None and not (0.0 < self.rank_tol < 1.0):
            raise DataError("rank_tol must be in (0, 1)")


@dataclass
class SolveReport:
    coefficients: np.ndarray  # full-length, zeros at dead columns
    rank: int | None  # None when the method cannot determine rank
    residual_ss: float
    constraint_violation: float  # max |M b| over constraint rows
    method_used: str
    elapsed: float
    kappa: float | None = None
    ridge_applied: bool = False
    n_dead_columns: int = 0


def _prepare(system: LinearSystem, y_tilde):
    y = np.asarray(y_tilde, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != system.n_rows:
        raise DataError("response length does not match the system")
    if not np.all(np.isfinite(y)):
        raise NumericalError("non-finite response")
    if system.design.nnz and not np.all(np.isfinite(system.design.data)):
        raise NumericalError("non-finite design entries")
    live = system.live
    if not live.any():
        raise NumericalError("all design columns are dead (zero weight)")
    live_idx = np.flatnonzero(live)
    x_live = system.design.tocsc()[:, live_idx].tocsr()
    scale = 1.0 / np.sqrt(system.delta[live_idx])
    x_tilde = x_live.multiply(scale[np.newaxis, :]).tocsr()
    m_tilde = system.constraints[:, live_idx] * scale[np.newaxis, :]
    keep_rows = np.abs(m_tilde).max(axis=1) > 0.0 if m_tilde.shape[0] else np.zeros(0, bool)
    m_tilde = m_tilde[keep_rows]
    # unit row norms: same constraint set, far better conditioned penalty blocks
    if m_tilde.shape[0]:
        m_tilde = m_tilde / np.linalg.norm(m_tilde, axis=1, keepdims=True)
    return y, live_idx, x_tilde, m_tilde, scale


def _finish(system, y, live_idx, scale, gamma, rank, method, t0, kappa=None, ridge=False):
    beta = np.zeros(system.n_cols)
    beta[live_idx] = scale * gamma
    resid = y - system.design @ beta
    rss = float(resid @ resid)
    if system.constraints.shape[0]:
        violation = float(np.max(np.abs(system.constraints @ beta)))
    else:
        violation = 0.0
    return SolveReport(
        coefficients=beta,
        rank=rank,
        residual_ss=rss,
        constraint_violation=violation,
        method_used=method,
        elapsed=time.perf_counter() - t0,
        kappa=kappa,
        ridge_applied=ridge,
        n_dead_columns=int(system.n_cols - live_idx.size),
    )


def _default_kappa(system: LinearSystem, config: SolverConfig) -> float:
    if config.kappa is not None:
        return config.kappa
    return 1e4 * float(np.sqrt(system.delta.max()))


def solve_nullspace(system: LinearSystem, y_tilde, config: SolverConfig | None = None) -> SolveReport:
    """Exact constrained minimum-norm solution via an SVD null-space basis."""
    config = config or SolverConfig()
    t0 = time.perf_counter()
    y, live_idx, x_tilde, m_tilde, scale = _prepare(system, y_tilde)
    rcond = config.rank_tol  # None lets lstsq use max(shape)*eps
    if m_tilde.shape[0] == 0:
        reduced = x_tilde.toarray()
        eta, _, rank, _ = np.linalg.lstsq(reduced, y, rcond=rcond)
        gamma = eta
    else:
        sv = np.linalg.svd(m_tilde, compute_uv=False)
        tol = (config.rank_tol or max(m_tilde.shape) * np.finfo(float).eps) * sv[0]
        r = int(np.sum(sv > tol))
        _, _, vt = np.linalg.svd(m_tilde, full_matrices=True)
        z = vt[r:].T
        if z.shape[1] == 0:
            gamma = np.zeros(live_idx.size)
            rank = 0
        else:
            reduced = x_tilde @ z
            eta, _, rank, _ = np.linalg.lstsq(reduced, y, rcond=rcond)
            gamma = z @ eta
    return _finish(system, y, live_idx, scale, gamma, int(rank), "nullspace_svd", t0)


def solve_penalty(system: LinearSystem, y_tilde, config: SolverConfig | None = None) -> SolveReport:
    """Constraints enforced as a quadratic penalty with factor kappa.

    The constraint violation of the result scales as O(1/kappa^2).
    """
    config = config or SolverConfig(method="penalty")
    t0 = time.perf_counter()
    y, live_idx, x_tilde, m_tilde, scale = _prepare(system, y_tilde)
    kappa = _default_kappa(system, config)
    stacked = np.vstack([x_tilde.toarray(), kappa * m_tilde])
    target = np.concatenate([y, np.zeros(m_tilde.shape[0])])
    gamma, _, rank, _ = np.linalg.lstsq(stacked, target, rcond=config.rank_tol)
    return _finish(system, y, live_idx, scale, gamma, int(rank), "penalty", t0, kappa=kappa)


def solve_normal_cholesky(system: LinearSystem, y_tilde, config: SolverConfig | None = None) -> SolveReport:
    """Normal equations of the penalty problem, solved by Cholesky.

    Fastest at large column counts but cannot determine rank; on a
    factorization failure a single ridge of rank_tol * trace is added and
    reported.
    """
    config = config or SolverConfig(method="normal_cholesky")
    t0 = time.perf_counter()
    y, live_idx, x_tilde, m_tilde, scale = _prepare(system, y_tilde)
    kappa = _default_kappa(system, config)
    gram = (x_tilde.T @ x_tilde).toarray()
    if m_tilde.shape[0]:
        gram += (kappa * kappa) * (m_tilde.T @ m_tilde)
    rhs = x_tilde.T @ y
    ridge_applied = False
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        rank_tol = config.rank_tol or max(gram.shape[0], system.n_rows) * np.finfo(float).eps
        gram = gram + rank_tol * np.trace(gram) * np.eye(gram.shape[0])
        ridge_applied = True
        try:
            factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"Cholesky factorization failed after ridge retry: {exc}") from exc
    gamma = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    return _finish(
        system, y, live_idx, scale, gamma, None, "normal_cholesky", t0,
        kappa=kappa, ridge=ridge_applied,
    )


_SOLVERS = {
    "nullspace_svd": solve_nullspace,
    "penalty": solve_penalty,
    "normal_cholesky": solve_normal_cholesky,
}


def solve(system: LinearSystem, y_tilde, config: SolverConfig | None = None) -> SolveReport:
    config = config or SolverConfig()
    return _SOLVERS[config.method](system, y_tilde, config)
