"""Approximate joint diagonalization with the log-det alpha-divergence cost.

The cost of an invertible ``C`` for matrices ``M_k`` and weights ``beta_k`` is

    J(C) = sum_k beta_k * D_alpha(C M_k C^H)

where ``D_alpha`` is the log-det alpha diagonality measure (``alpha = 1`` is the
left Kullback-Leibler measure, ``alpha = -1`` the right one). It is minimized
by a modified Newton method: the exact second-order model

    J(C + tZ) ~ J(C) + t Re tr(Z^H G) + t^2/2 (z^H H z + Re z^T S z),   z = vec(Z)

is assembled densely, its real form is shifted to be positive definite and
solved for the search direction, and an Armijo line search picks the step.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .linalg import DimensionError, DomainError, as_hpd, hermitian
from .measures import _from_eigenvalues

#: derivatives switch to the exact Kullback-Leibler forms within this of |alpha| = 1
ENDPOINT_EPS = 1e-6
# below this relative size a predicted decrease is lost in the rounding of the cost
_FLAT = 1e3 * np.finfo(float).eps


# -- problem and options --------------------------------------------------------


@dataclass(frozen=True)
class AjdProblem:
    """Matrices to diagonalize jointly.

    Parameters
    ----------
    matrices : array_like, shape (K, n, n)
        HPD matrices, ``K >= 2``.
    alpha : float
        Cost parameter in ``[-1, 1]``.
    weights : array_like, shape (K,), optional
        Positive weights ``beta_k``, all one by default.
    """

    matrices: np.ndarray
    alpha: float = 0.0
    weights: np.ndarray = None

    def __post_init__(self):
        mats = [as_hpd(m) for m in self.matrices]
        if len(mats) < 2:
            raise DimensionError("need at least two matrices")
        if len({m.shape for m in mats}) != 1:
            raise DimensionError("matrices must share one dimension")
        dtype = np.complex128 if any(np.iscomplexobj(m) for m in mats) else np.float64
        object.__setattr__(self, "matrices", np.array(mats, dtype=dtype))
        alpha = float(self.alpha)
        if not -1.0 <= alpha <= 1.0:
            raise DomainError(f"alpha must lie in [-1, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        w = np.ones(len(mats)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(mats),) or np.any(w <= 0):
            raise DomainError("weights must be one positive number per matrix")
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.matrices.shape[1]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.matrices)

    def mean_matrix(self):
        """Weighted arithmetic mean of the matrices."""
        return np.tensordot(self.weights, self.matrices, axes=1) / self.weights.sum()

    def with_alpha(self, alpha):
        return AjdProblem(self.matrices, alpha, self.weights)


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-15
    max_iter: int = 200
    armijo_sigma: float = 1e-4
    armijo_beta: float = 0.5
    armijo_max_backtracks: int = 30
    hessian_shift_floor: float = 1e-8
    #: cap on ||W C^-1||_F, the size of a Newton step relative to C; None disables it
    max_relative_step: float = 1.0

    def __post_init__(self):
        if min(self.tol, self.max_iter, self.armijo_sigma, self.armijo_max_backtracks,
               self.hessian_shift_floor) <= 0:
            raise ValueError("solver options must be positive")
        if self.max_relative_step is not None and self.max_relative_step <= 0:
            raise ValueError("max_relative_step must be positive")
        if not 0.0 < self.armijo_beta < 1.0:
            raise ValueError("armijo_beta must lie in (0, 1)")


@dataclass(frozen=True)
class TraceEntry:
    iter: int
    cost: float
    grad_norm: float
    step: float
    stop_stat: float
    note: str = ""


@dataclass(frozen=True)
class SolveResult:
    c: np.ndarray
    trace: tuple
    converged: bool
    iterations: int

    @property
    def costs(self):
        return np.array([t.cost for t in self.trace])


# -- cost -----------------------------------------------------------------------


def q_alpha(c, m, alpha):
    """``(1-alpha)/2 C M C^H + (1+alpha)/2 Diag(C M C^H)``."""
    c = np.asarray(c)
    if abs(np.linalg.det(c)) == 0 or np.linalg.cond(c) > 1 / np.finfo(float).eps:
        raise DomainError("C is singular")
    q = hermitian(c @ m @ c.conj().T)
    a, b = (1 - alpha) / 2, (1 + alpha) / 2
    return a * q + b * np.diag(np.real(np.diag(q)))


def _kind(alpha):
    if alpha == 1.0:
        return "kl_left"
    if alpha == -1.0:
        return "kl_right"
    return "logdet_alpha"


def _matrix_cost(d, alpha):
    """Measure of ``d = C M C^H``; ``inf`` when it is not HPD."""
    dd = np.real(np.diag(d))
    if not np.all(dd > 0) or not np.all(np.isfinite(d)):
        return np.inf
    s = 1.0 / np.sqrt(dd)
    a_tilde = hermitian(d * np.outer(s, s))
    np.fill_diagonal(a_tilde, 0.0)
    x = np.linalg.eigvalsh(a_tilde)
    if x[0] <= -1.0:
        return np.inf
    return max(float(_from_eigenvalues(x, _kind(alpha), alpha)), 0.0)


def _congruences(c, problem):
    ch = c.conj().T
    return c @ problem.matrices @ ch


def cost(c, problem):
    """Weighted sum of the log-det alpha diagonality measures of ``C M_k C^H``.

    Returns ``inf`` when ``C`` is singular.
    """
    c = np.asarray(c)
    total = 0.0
    for beta, d in zip(problem.weights, _congruences(c, problem)):
        total += beta * _matrix_cost(d, problem.alpha)
    return float(total)


# -- derivatives ----------------------------------------------------------------
#
# All per-matrix quantities carry a leading axis over the set. With
# K = M C^H and Y = Z K, every second-order term below is a quadratic form in
# z = vec(Z). The helpers return the n^2 x n^2 matrix T, summed over the set
# with weights w, such that
#   _sigma: z^T T z = sum_k w_k tr(A_k P1(Y_k) B_k P2(Y_k))
#   _eta:   z^H T z = sum_k w_k tr(P1(Y_k)^H A_k P2(Y_k) B_k)
# where P1, P2 are the identity ("I") or the Diag operator ("D").


def _as_matrix(t):
    n = t.shape[0]
    return t.reshape(n * n, n * n)


def _diag(x):
    """``Diag`` of a stack of matrices, real part only."""
    return np.real(x) * np.eye(x.shape[-1])


def _ct(x):
    return np.swapaxes(x, -1, -2).conj()


def _sum(subscripts, w, first, *rest):
    return np.einsum(subscripts, w[:, None, None] * first, *rest, optimize=True)


def _sigma(w, k, a, b, p1, p2):
    if (p1, p2) == ("I", "I"):
        t = _sum("kcj,kdi->cidj", w, k @ b, k @ a)
    elif (p1, p2) == ("D", "I"):
        t = _sum("kci,kij,kdi->cidj", w, k, b, k @ a)
    elif (p1, p2) == ("I", "D"):
        t = _sum("kci,kij,kdi->cidj", w, k, a, k @ b)
    else:
        t = _sum("kci,kij,kdj,kji->cidj", w, k, b, k, a)
    return _as_matrix(t)


def _eta(w, k, a, b, p1, p2):
    kc = k.conj()
    if (p1, p2) == ("I", "I"):
        t = _sum("kij,kdc->cidj", w, a, k @ b @ _ct(k))
    elif (p1, p2) == ("D", "I"):
        t = _sum("kci,kij,kdi->cidj", w, kc, a, k @ b)
    elif (p1, p2) == ("I", "D"):
        t = _sum("kij,kdj,kjc->cidj", w, a, k, b @ _ct(k))
    else:
        t = _sum("kci,kij,kdj,kji->cidj", w, kc, a, k, b)
    return _as_matrix(t)


def _kron(w, m, r):
    """``sum_k w_k kron(M_k^T, R_k)``."""
    return _as_matrix(_sum("kba,kcd->acbd", w, m, r))


def _combo(fn, w, k, qi, ca, cb):
    """``fn`` applied to ``L(Y) = ca Y + cb Diag Y`` in both slots."""
    out = 0.0
    if ca:
        out = out + ca * ca * fn(w, k, qi, qi, "I", "I")
    if ca and cb:
        out = out + ca * cb * (fn(w, k, qi, qi, "D", "I") + fn(w, k, qi, qi, "I", "D"))
    if cb:
        out = out + cb * cb * fn(w, k, qi, qi, "D", "D")
    return out


def _hermitian(x):
    return (x + _ct(x)) / 2


def _logdet_terms(w, c, m, k, ca, cb, second_order):
    """Derivatives of ``sum_k w_k log det(ca C M_k C^H + cb Diag(C M_k C^H))``."""
    q = _hermitian(c @ k)
    qi = _hermitian(np.linalg.inv(ca * q + cb * _diag(q)))
    r = ca * qi + cb * _diag(qi)
    g = 2 * np.einsum("k,kij->ij", w, r @ c @ m)
    if not second_order:
        return g, None, None
    h = 2 * _kron(w, m, r) - 2 * _combo(_eta, w, k, qi, ca, cb)
    s = -2 * _combo(_sigma, w, k, qi, ca, cb)
    return g, h, s


def _trace_inv_terms(w, c, m, k, second_order):
    """Derivatives of ``sum_k w_k tr(Diag(Q_k) Q_k^-1)`` with ``Q_k = C M_k C^H``."""
    q = _hermitian(c @ k)
    qi = _hermitian(np.linalg.inv(q))
    v = _hermitian(qi @ _diag(q) @ qi)
    rg = _diag(qi) - v
    g = 2 * np.einsum("k,kij->ij", w, rg @ c @ m)
    if not second_order:
        return g, None, None
    h = 2 * _kron(w, m, rg) + 2 * (
        -_eta(w, k, qi, qi, "D", "I")
        - _eta(w, k, qi, qi, "I", "D")
        + _eta(w, k, qi, v, "I", "I")
        + _eta(w, k, v, qi, "I", "I")
    )
    s = 4 * (-_sigma(w, k, qi, qi, "D", "I") + _sigma(w, k, qi, v, "I", "I"))
    return g, h, s


def _logdet_c_terms(c, second_order):
    """Derivatives of ``2 Re log det C``, which is ``log det(C M C^H)`` up to a constant.

    Written in terms of ``C^-1`` only, so they stay accurate however badly
    conditioned the ``M_k`` are.
    """
    x = np.linalg.inv(c)
    g = 2 * x.conj().T
    if not second_order:
        return g, None, None
    # -2 Re tr(X Z X Z)
    s = -2 * _as_matrix(np.einsum("cj,di->cidj", x, x))
    return g, np.zeros_like(s), s


def _weights(alpha):
    """Coefficients of the terms whose sum is the measure of ``C M C^H``.

    Keys: a float ``a`` for ``log det Q_a``, ``"tr"`` for ``tr(Diag(Q) Q^-1)``.
    """
    if alpha >= 1 - ENDPOINT_EPS:
        return {1.0: 1.0, -1.0: -1.0}
    if alpha <= -1 + ENDPOINT_EPS:
        return {"tr": 1.0, -1.0: 1.0, 1.0: -1.0}
    return {alpha: 4 / (1 - alpha**2), -1.0: -2 / (1 + alpha), 1.0: -2 / (1 - alpha)}


def _model(c, mats, weights, alpha, second_order=True):
    """Weighted sum of the derivative terms over the set."""
    coef = _weights(alpha)
    weights = np.asarray(weights, dtype=float)
    mats = np.asarray(mats)
    k = mats @ c.conj().T
    g = h = s = 0.0
    for key, cf in coef.items():
        if key == -1.0:
            gk, hk, sk = _logdet_c_terms(c, second_order)
            cf = cf * float(np.sum(weights))
        elif key == "tr":
            gk, hk, sk = _trace_inv_terms(cf * weights, c, mats, k, second_order)
            cf = 1.0
        else:
            ca, cb = (1 - key) / 2, (1 + key) / 2
            gk, hk, sk = _logdet_terms(cf * weights, c, mats, k, ca, cb, second_order)
            cf = 1.0
        g = g + cf * gk
        if second_order:
            h = h + cf * hk
            s = s + cf * sk
    if not second_order:
        return g, None, None
    return g, (h + h.conj().T) / 2, (s + s.T) / 2


@dataclass(frozen=True)
class QuadraticModel:
    """``G`` (n x n), Hermitian ``H`` and symmetric ``S`` (n^2 x n^2)."""

    g: np.ndarray
    h: np.ndarray
    s: np.ndarray

    def directional(self, z):
        """First-order term ``Re tr(Z^H G)``."""
        return float(np.real(np.vdot(z, self.g)))

    def curvature(self, z):
        """Second-order term ``z^H H z + Re z^T S z`` for ``z = vec(Z)``."""
        v = np.asarray(z).reshape(-1, order="F")
        return float(np.real(np.vdot(v, self.h @ v)) + np.real(v @ self.s @ v))


def _as_working(c, problem):
    c = np.asarray(c)
    if not problem.is_real:
        c = c.astype(complex)
    return c


def gradient(c, problem):
    """Gradient ``G`` of :func:`cost` with ``Re tr(Z^H G)`` the derivative along ``Z``."""
    c = _as_working(c, problem)
    return _model(c, problem.matrices, problem.weights, problem.alpha, second_order=False)[0]


def quadratic_model(c, problem):
    """Exact second-order model of :func:`cost` around ``c``.

    Parameters
    ----------
    c : ndarray, shape (n, n)
        Invertible matrix.
    problem : AjdProblem

    Returns
    -------
    QuadraticModel
        Per-matrix terms summed in input order with weights ``beta_k``;
        ``h`` made Hermitian and ``s`` symmetric afterwards.
    """
    c = _as_working(c, problem)
    g, h, s = _model(c, problem.matrices, problem.weights, problem.alpha)
    return QuadraticModel(g=g, h=h, s=s)


def diag_difference_gradient(c, problem):
    """Alternative interior gradient using ``Diag(Q_alpha^-1 - Q_-1^-1)``.

    Kept only to show by finite differences that it is not the gradient of
    :func:`cost`; use :func:`gradient`.
    """
    alpha = problem.alpha
    if abs(alpha) >= 1 - ENDPOINT_EPS:
        raise DomainError("defined for |alpha| < 1 only")
    out = 0.0
    for beta, m in zip(problem.weights, problem.matrices):
        qa = q_alpha(c, m, alpha)
        qm = q_alpha(c, m, -1.0)
        dif = np.linalg.inv(qa) - np.linalg.inv(qm)
        br = (1 - alpha) * dif + (1 + alpha) * np.diag(np.diag(dif))
        out = out + beta * 4 / (1 - alpha**2) * br @ c @ m
    return out


# -- Newton step and line search --------------------------------------------------


def real_system(model, real=False):
    """Symmetric real matrix and right-hand side of the model.

    Over ``x = (Re z, Im z)`` the model reads ``gr^T x + x^T A x / 2``;
    ``real=True`` keeps ``Re z`` only.
    """
    g = model.g.reshape(-1, order="F")
    if real:
        a = np.real(model.h + model.s)
        return (a + a.T) / 2, np.real(g)
    hr, hi = np.real(model.h), np.imag(model.h)
    sr, si = np.real(model.s), np.imag(model.s)
    a = np.block([[hr + sr, -hi - si], [hi - si, hr - sr]])
    return (a + a.T) / 2, np.concatenate([np.real(g), np.imag(g)])


def newton_step(model, shift_floor=1e-8, real=False, free=None, max_norm=None):
    """Search direction from the shifted Newton system.

    The real system ``A`` is shifted by ``lambda = max(0, -lambda_min) +
    shift_floor * ||A||_2`` and solved through its eigendecomposition.

    Parameters
    ----------
    model : QuadraticModel
    shift_floor : float
    real : bool
        Solve over real directions only.
    free : ndarray of bool, shape (n, n), optional
        Entries of ``W`` to solve for; the others are held at zero.
    max_norm : float, optional
        If the step is longer than this, ``lambda`` is raised until
        ``||W||_F = max_norm``.

    Returns
    -------
    w : ndarray, shape (n, n)
    fallback : bool
        True when the solve failed and ``w = -G`` was returned.
    """
    n = model.g.shape[0]
    if not np.any(model.g):
        return np.zeros_like(model.g), False
    a, rhs = real_system(model, real=real)
    keep = np.ones(n * n, dtype=bool) if free is None else np.asarray(free).reshape(-1, order="F")
    keep = keep if real else np.concatenate([keep, keep])
    a, rhs = a[np.ix_(keep, keep)], rhs[keep]
    try:
        lam, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError:
        return -model.g, True
    norm = max(abs(lam[0]), abs(lam[-1]))
    shift = max(0.0, -lam[0]) + shift_floor * norm
    b = v.T @ rhs

    def length(t):
        return np.sqrt(np.sum((b / (lam + t)) ** 2))

    if max_norm is not None and length(shift) > max_norm:
        hi = shift + np.linalg.norm(b) / max_norm
        shift = optimize.brentq(lambda t: length(t) - max_norm, shift, hi, xtol=1e-12 * hi)
    x = np.zeros(keep.size)
    x[keep] = -(v @ (b / (lam + shift)))
    if not np.all(np.isfinite(x)):
        return -model.g, True
    if real:
        return x.reshape((n, n), order="F").astype(model.g.dtype), False
    z = x[: n * n] + 1j * x[n * n:]
    return z.reshape((n, n), order="F"), False


def armijo_search(c, w, problem, g, opts=SolveOptions(), f0=None):
    """Backtracking step along ``w``.

    Returns the first ``mu`` in ``1, beta, beta^2, ...`` with
    ``cost(c + mu w) <= cost(c) + sigma mu Re tr(w^H g)``, and a note that is
    ``""`` on success, ``"newton_tail"`` when the predicted decrease is below
    the rounding of the cost and the full step is taken, ``"rounding_floor"``
    with ``mu = 0`` when even that step is rejected, or ``"exhausted"`` with
    ``mu = 0`` when backtracking runs out.

    In the ``"newton_tail"`` regime the cost cannot tell the steps apart, so
    the full step is taken if the cost stays within rounding or the relative
    gradient ``G C^H`` shrinks.
    """
    f0 = cost(c, problem) if f0 is None else f0
    slope = float(np.real(np.vdot(w, g)))
    noise = _FLAT * max(abs(f0), 1.0)
    if -slope <= noise:
        c1 = c + w
        f1 = cost(c1, problem)
        if f1 <= f0 + noise:
            return 1.0, "newton_tail"
        if not np.isfinite(f1):
            return 0.0, "rounding_floor"
        g1 = gradient(c1, problem) @ c1.conj().T
        if np.linalg.norm(g1) < np.linalg.norm(g @ c.conj().T):
            return 1.0, "newton_tail"
        return 0.0, "rounding_floor"
    mu = 1.0
    for _ in range(opts.armijo_max_backtracks + 1):
        f1 = cost(c + mu * w, problem)
        if f1 <= f0 + opts.armijo_sigma * mu * slope:
            return mu, ""
        mu *= opts.armijo_beta
    return 0.0, "exhausted"


# -- solver -------------------------------------------------------------------------


def normalize_rows(c, mean):
    """Rescale the rows of ``c`` so that ``Diag(c mean c^H) = I``."""
    d = np.real(np.einsum("ij,jk,ik->i", c, mean, c.conj()))
    return c / np.sqrt(d)[:, None]


def stop_statistic(c_new, c_old):
    """``||C_new^-1 C_old - I||_F^2 / n``."""
    n = c_new.shape[0]
    e = np.linalg.solve(c_new, c_old) - np.eye(n)
    return float(np.sum(np.abs(e) ** 2) / n)


def _start(problem, c0):
    n = problem.n
    c = np.eye(n) if c0 is None else np.array(c0, dtype=np.result_type(c0, float))
    if c.shape != (n, n):
        raise DimensionError(f"c0 must be {n} x {n}")
    if not problem.is_real:
        c = c.astype(complex)
    return normalize_rows(c, problem.mean_matrix())


def solve(problem, c0=None, opts=SolveOptions(), callback=None):
    """Minimize :func:`cost` by the shifted Newton method.

    Each iteration builds the model of ``E -> cost((I + E) C)`` at ``E = 0``,
    solves the shifted Newton system for the off-diagonal entries of ``E``
    (the diagonal ones only rescale rows, along which the cost is constant),
    caps the step at ``||E||_F <= max_relative_step`` by raising the shift,
    and line-searches along ``W = E C``.

    Parameters
    ----------
    problem : AjdProblem
    c0 : ndarray, optional
        Starting point, the identity by default.
    opts : SolveOptions
    callback : callable, optional
        Called as ``callback(iteration, c)`` after every iteration, and once
        with the starting point as iteration 0.

    Returns
    -------
    SolveResult
        ``converged`` is True when the stop statistic reached ``tol`` or
        when no step can be told apart from rounding in the cost
        (trace note ``"rounding_floor"``). It is False when ``max_iter`` ran
        out or the line search failed; the trace is complete either way.
    """
    mean = problem.mean_matrix()
    real = problem.is_real
    c = _start(problem, c0)
    f = cost(c, problem)
    trace = [TraceEntry(0, f, float(np.linalg.norm(gradient(c, problem))), 0.0, float("nan"))]
    converged = False
    if callback is not None:
        callback(0, c)
    it = 0
    off = ~np.eye(problem.n, dtype=bool)
    for it in range(1, opts.max_iter + 1):
        # model of E -> cost((I + E) C), i.e. at the identity for the set C M_k C^H
        d = _congruences(c, problem)
        g, h, s = _model(np.eye(problem.n, dtype=c.dtype), d, problem.weights, problem.alpha)
        model = QuadraticModel(g=g, h=h, s=s)
        w, fallback = newton_step(
            model, opts.hessian_shift_floor, real=real, free=off, max_norm=opts.max_relative_step
        )
        if not np.any(w):
            converged = True
            trace.append(TraceEntry(it, f, trace[-1].grad_norm, 0.0, 0.0, "stationary"))
            break
        w = w @ c
        g_abs = g @ np.linalg.inv(c).conj().T
        mu, note = armijo_search(c, w, problem, g_abs, opts, f0=f)
        if fallback:
            note = "gradient_fallback" + (f",{note}" if note else "")
        if mu == 0.0:
            # at the rounding floor c is a minimizer to working precision
            converged = note == "rounding_floor"
            trace.append(TraceEntry(it, f, trace[-1].grad_norm, 0.0, float("nan"), note))
            break
        c_new = normalize_rows(c + mu * w, mean)
        stat = stop_statistic(c_new, c)
        c = c_new
        f = cost(c, problem)
        gnorm = float(np.linalg.norm(gradient(c, problem)))
        trace.append(TraceEntry(it, f, gnorm, mu, stat, note))
        if callback is not None:
            callback(it, c)
        if stat <= opts.tol:
            converged = True
            break
    return SolveResult(c=c, trace=tuple(trace), converged=converged, iterations=it)
