"""Closest positive-definite diagonal matrix to an HPD matrix.

The Frobenius and Kullback-Leibler projections have closed forms. The
Riemannian one is found by steepest descent on ``X -> d(A, X)^2 / 2`` and the
log-det alpha one by a damped Newton descent in ``y = log diag(X)``.

Criteria and the divergence each one minimizes over diagonal ``X``:

``"frobenius"``      ``1/2 ||A - X||_F^2``, minimizer ``Diag A``
``"kl_right"``       ``D^{+1}(A, X) = tr(X^-1 A - I) - log det(X^-1 A)``, minimizer ``Diag A``
``"kl_left"``        ``D^{-1}(A, X) = tr(A^-1 X - I) - log det(A^-1 X)``, minimizer ``Diag(A^-1)^-1``
``"kl_symmetric"``   mean of the two, minimizer ``Diag(A)^{1/2} Diag(A^-1)^{-1/2}``
``"riemannian"``     ``1/2 d_R(A, X)^2``
``"logdet_alpha"``   ``D^alpha(A, X)`` for ``alpha`` in ``(-1, 1)``
``"bhattacharyya"``  ``"logdet_alpha"`` at ``alpha = 0``
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import (
    ConvergenceWarning,
    DomainError,
    as_hpd,
    logdet_alpha_divergence,
    riemannian_distance,
    symmetrize,
)

CRITERIA = (
    "frobenius",
    "riemannian",
    "kl_right",
    "kl_left",
    "kl_symmetric",
    "logdet_alpha",
    "bhattacharyya",
)


@dataclass(frozen=True)
class IterationReport:
    iterations: int
    residual: float
    converged: bool


def _resolve(criterion, alpha):
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    if criterion == "bhattacharyya":
        return "logdet_alpha", 0.0
    if criterion == "logdet_alpha":
        if alpha is None:
            raise ValueError("criterion='logdet_alpha' needs alpha")
        alpha = float(alpha)
        if not -1.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie strictly inside (-1, 1), got {alpha}")
    return criterion, alpha


# below this relative size a predicted decrease is lost in the rounding of f
_FLAT = 1e3 * np.finfo(float).eps


def _inv_diag(a):
    return np.real(np.diag(np.linalg.inv(a)))


# -- Riemannian ---------------------------------------------------------------


def _riemann_state(ainv, x):
    """Objective ``1/2 d^2`` and ``diag(log(A^-1 X))`` at diagonal ``x``."""
    s = np.sqrt(x)
    w, v = np.linalg.eigh(symmetrize(ainv * np.outer(s, s)))
    lw = np.log(w)
    g = np.real(np.einsum("ij,j,ij->i", v, lw, v.conj()))
    return 0.5 * float(np.sum(lw**2)), g


def riemannian_residual(a, x):
    """``||Diag(log(A^-1 X))||_F`` for a diagonal matrix or vector ``x``."""
    x = np.diag(x) if np.ndim(x) == 2 else np.asarray(x, dtype=float)
    return float(np.linalg.norm(_riemann_state(np.linalg.inv(as_hpd(a)), x)[1]))


def _closest_riemannian(a, tol, max_iter, x0):
    ainv = symmetrize(np.linalg.inv(a))
    x = np.real(np.diag(a)).copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    f, g = _riemann_state(ainv, x)
    it = 0
    while np.linalg.norm(g) > tol and it < max_iter:
        gn = np.linalg.norm(g)
        flat = gn**2 <= _FLAT * max(f, 1.0)
        r = 1.0
        while True:
            step = 1.0 - r * g
            if np.all(step > 0):
                x_new = x * step
                f_new, g_new = _riemann_state(ainv, x_new)
                if f_new < f or (flat and np.linalg.norm(g_new) < gn):
                    break
            r *= 0.5
            if r < 1e-20:
                return x, IterationReport(it, float(gn), False)
        x, f, g = x_new, f_new, g_new
        it += 1
    res = float(np.linalg.norm(g))
    return x, IterationReport(it, res, res <= tol)


# -- log-det alpha --------------------------------------------------------------


def alpha_residual(a, x, alpha):
    """``||Diag(((1-alpha)/2 A + (1+alpha)/2 X)^-1) - X^-1||_F``."""
    x = np.diag(x) if np.ndim(x) == 2 else np.asarray(x, dtype=float)
    ca, cb = (1 - alpha) / 2, (1 + alpha) / 2
    p = _inv_diag(ca * as_hpd(a) + cb * np.diag(x))
    return float(np.linalg.norm(p - 1.0 / x))


def _closest_alpha(a, alpha, tol, max_iter, x0):
    ca, cb = (1 - alpha) / 2, (1 + alpha) / 2
    scale = 1.0 / (ca * cb)
    logdet_a = np.linalg.slogdet(a)[1]

    def objective(y):
        sign, ld = np.linalg.slogdet(ca * a + cb * np.diag(np.exp(y)))
        return scale * (ld - ca * logdet_a - cb * np.sum(y))

    def derivs(y):
        x = np.exp(y)
        p = np.linalg.inv(ca * a + cb * np.diag(x))
        pd = np.real(np.diag(p))
        grad = (x * pd - 1.0) / ca
        hess = (np.diag(x * pd) - cb * np.outer(x, x) * np.abs(p) ** 2) / ca
        return grad, hess, np.linalg.norm(pd - 1.0 / x)

    x = np.real(np.diag(a)) if x0 is None else np.asarray(x0, dtype=float)
    y = np.log(x)
    f = objective(y)
    grad, hess, res = derivs(y)
    it = 0
    while res > tol and it < max_iter:
        try:
            np.linalg.cholesky(hess)
            d = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            d = -grad
        slope = grad @ d
        if slope >= 0:
            d, slope = -grad, -(grad @ grad)
        if -slope <= _FLAT * max(abs(f), 1.0):
            # decrease is below the rounding of f: judge the step by the residual
            g_new, h_new, r_new = derivs(y + d)
            if r_new >= res:
                break
            y, f = y + d, objective(y + d)
            grad, hess, res = g_new, h_new, r_new
            it += 1
            continue
        t = 1.0
        while True:
            y_new = y + t * d
            f_new = objective(y_new)
            if f_new <= f + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-12:
                break
        if t < 1e-12:
            break
        y, f = y_new, f_new
        grad, hess, res = derivs(y)
        it += 1
    return np.exp(y), IterationReport(it, float(res), bool(res <= tol))


# -- public --------------------------------------------------------------------


def closest_diagonal(a, criterion, alpha=None, tol=1e-10, max_iter=500, x0=None):
    """Closest positive-definite diagonal matrix to ``a`` under ``criterion``.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        HPD matrix.
    criterion : str
        One of :data:`CRITERIA`.
    alpha : float, optional
        Needed for ``criterion="logdet_alpha"``.
    tol, max_iter : float, int
        Residual tolerance and iteration cap of the iterative criteria.
    x0 : array_like, optional
        Starting diagonal for the iterative criteria (default ``diag(a)``).

    Returns
    -------
    x : ndarray, shape (n, n)
        The diagonal minimizer.
    report : IterationReport
        ``converged=False`` with the last iterate when ``max_iter`` runs out.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    criterion, alpha = _resolve(criterion, alpha)
    a = as_hpd(a)
    d = np.real(np.diag(a))
    if criterion in ("frobenius", "kl_right"):
        return np.diag(d), IterationReport(0, 0.0, True)
    if criterion == "kl_left":
        return np.diag(1.0 / _inv_diag(a)), IterationReport(0, 0.0, True)
    if criterion == "kl_symmetric":
        return np.diag(np.sqrt(d / _inv_diag(a))), IterationReport(0, 0.0, True)
    if criterion == "riemannian":
        x, rep = _closest_riemannian(a, tol, max_iter, x0)
    else:
        x, rep = _closest_alpha(a, alpha, tol, max_iter, x0)
    return np.diag(x), rep


def divergence(a, x, criterion, alpha=None):
    """The distance or divergence paired with ``criterion``, between ``a`` and ``x``."""
    criterion, alpha = _resolve(criterion, alpha)
    a = as_hpd(a)
    if criterion == "frobenius":
        return float(0.5 * np.sum(np.abs(a - x) ** 2))
    if criterion == "riemannian":
        return 0.5 * riemannian_distance(a, x) ** 2
    if criterion == "kl_right":
        return logdet_alpha_divergence(a, x, 1.0)
    if criterion == "kl_left":
        return logdet_alpha_divergence(a, x, -1.0)
    if criterion == "kl_symmetric":
        return 0.5 * (logdet_alpha_divergence(a, x, 1.0) + logdet_alpha_divergence(a, x, -1.0))
    return logdet_alpha_divergence(a, x, alpha)


def true_diagonality(a, criterion, alpha=None, tol=1e-10, max_iter=500):
    """Divergence between ``a`` and its closest diagonal matrix.

    Emits :class:`ConvergenceWarning` when the projection did not converge.
    """
    x, rep = closest_diagonal(a, criterion, alpha=alpha, tol=tol, max_iter=max_iter)
    if not rep.converged:
        warnings.warn(
            f"{criterion} projection stopped after {rep.iterations} iterations "
            f"with residual {rep.residual:.3e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return divergence(a, x, criterion, alpha)
