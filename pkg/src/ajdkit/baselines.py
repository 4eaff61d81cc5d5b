"""Reference joint diagonalizers: Pham's Jadiag and Uwedge.

Both share the conventions of :func:`ajdkit.ajd.solve`: start from the
identity, rescale rows so that ``Diag(C Mbar C^H) = I`` after each iteration,
and stop on ``||C_new^-1 C_old - I||_F^2 / n <= tol``. The trace cost is the
criterion each method decreases: the weighted left-KL cost for Jadiag and the
weighted off-diagonal least-squares criterion for Uwedge.
"""

import numpy as np

from .ajd import (
    AjdProblem,
    SolveOptions,
    SolveResult,
    TraceEntry,
    _start,
    cost,
    gradient,
    normalize_rows,
    stop_statistic,
)


def _run(problem, c0, opts, callback, sweep, criterion):
    mean = problem.mean_matrix()
    c = _start(problem, c0)
    grad_problem = problem.with_alpha(1.0)

    def row(it, step, stat, note=""):
        g = np.linalg.norm(gradient(c, grad_problem))
        return TraceEntry(it, criterion(c), float(g), step, stat, note)

    trace = [row(0, 0.0, float("nan"))]
    if callback is not None:
        callback(0, c)
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        c_new = normalize_rows(sweep(c), mean)
        if not np.all(np.isfinite(c_new)):
            trace.append(TraceEntry(it, trace[-1].cost, trace[-1].grad_norm, 0.0, float("nan"), "diverged"))
            break
        stat = stop_statistic(c_new, c)
        c = c_new
        trace.append(row(it, 1.0, stat))
        if callback is not None:
            callback(it, c)
        if stat <= opts.tol:
            converged = True
            break
    return SolveResult(c=c, trace=tuple(trace), converged=converged, iterations=it)


# -- Jadiag ----------------------------------------------------------------------


def _jadiag_sweep(c, mats, w):
    d = c @ mats @ c.conj().T
    n = c.shape[0]
    for i in range(1, n):
        for j in range(i):
            c1 = np.real(d[:, i, i])
            c2 = np.real(d[:, j, j])
            g12 = np.dot(w, d[:, i, j] / c1)
            g21 = np.dot(w, d[:, i, j] / c2)
            omega21 = np.dot(w, c1 / c2)
            omega12 = np.dot(w, c2 / c1)
            omega = np.sqrt(omega12 * omega21)
            tmp = np.sqrt(omega21 / omega12)
            tmp1 = (tmp * g12 + g21) / (omega + 1)
            tmp2 = (tmp * g12 - g21) / max(omega - 1, 1e-9)
            h12 = tmp1 + tmp2
            h21 = np.conj((tmp1 - tmp2) / tmp)
            tau = 1 + 0.5j * np.imag(h12 * h21)
            tau = np.real(tau + np.sqrt(tau**2 - h12 * h21))
            t = np.array([[1, -h12 / tau], [-h21 / tau, 1]])
            idx = [i, j]
            c[idx] = t @ c[idx]
            d[:, idx, :] = t @ d[:, idx, :]
            d[:, :, idx] = d[:, :, idx] @ t.conj().T
    return c


def jadiag(problem, c0=None, opts=SolveOptions(), callback=None):
    """Pham's pairwise joint diagonalizer of HPD matrices.

    Each iteration is one sweep over all index pairs; every pair update is a
    2 x 2 transform that decreases the weighted left-KL cost.

    Parameters
    ----------
    problem : AjdProblem
        ``problem.alpha`` is ignored.
    c0 : ndarray, optional
    opts : SolveOptions
        Only ``tol`` and ``max_iter`` are used.
    callback : callable, optional
        ``callback(iteration, c)``.

    Returns
    -------
    SolveResult
    """
    w = problem.weights / problem.weights.sum()
    dtype = np.complex128 if not problem.is_real else np.float64
    mats = problem.matrices.astype(dtype)
    kl = problem.with_alpha(1.0)
    return _run(
        problem, c0, opts, callback,
        lambda c: _jadiag_sweep(c.astype(dtype), mats, w),
        lambda c: cost(c, kl),
    )


# -- Uwedge ------------------------------------------------------------------------


def off_criterion(c, problem):
    """``sum_k beta_k ||off(C M_k C^H)||_F^2``."""
    d = c @ problem.matrices @ c.conj().T
    n = c.shape[0]
    off = d * (1 - np.eye(n))
    return float(np.dot(problem.weights, np.sum(np.abs(off) ** 2, axis=(1, 2))))


def _uwedge_update(c, mats, w):
    d = c @ mats @ c.conj().T
    n = c.shape[0]
    lam = np.real(np.einsum("kii->ki", d))
    b = np.einsum("k,ki,kj->ij", w, lam, lam)
    p = np.einsum("k,kij,kj->ij", w, d, lam)
    q = np.einsum("k,kij,ki->ij", w, d, lam)
    bd = np.diag(b)
    det = np.outer(bd, bd) - b**2
    np.fill_diagonal(det, 1.0)
    e = (bd[:, None] * p - b * q) / det
    np.fill_diagonal(e, 0.0)
    return np.linalg.solve(np.eye(n) + e, c)


def uwedge(problem, c0=None, opts=SolveOptions(), callback=None):
    """Uwedge: Gauss-Newton steps on the weighted off-diagonal criterion.

    Each iteration linearizes ``C M_k C^H ~ (I + E) Lambda_k (I + E)^H``,
    solves for the off-diagonal ``E`` in closed form pair by pair, and sets
    ``C <- (I + E)^-1 C``. Arguments as :func:`jadiag`.
    """
    w = problem.weights / problem.weights.sum()
    return _run(
        problem, c0, opts, callback,
        lambda c: _uwedge_update(c, problem.matrices, w),
        lambda c: off_criterion(c, problem),
    )
