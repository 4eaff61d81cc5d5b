"""Hermitian positive-definite matrices and the matrix calculus around them.

Matrices are plain ndarrays throughout. Functions that need a Hermitian or
HPD input validate it with :func:`hermitian` / :func:`as_hpd`, which return
an exactly Hermitian copy built from the lower triangle.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla


class DomainError(ValueError):
    """Input lies outside the domain of an operation."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotHPDError(DomainError):
    """Matrix is not Hermitian positive-definite."""


class ConvergenceWarning(UserWarning):
    """An iterative method stopped before meeting its tolerance."""


def _check_square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian(a):
    """Return the Hermitian matrix stored in the lower triangle of ``a``.

    The strict lower triangle is mirrored (conjugated) into the upper one and
    the diagonal is made real, so ``h == h.conj().T`` holds bitwise.
    """
    a = _check_square(a)
    low = np.tril(a, -1)
    h = low + low.conj().T
    h = h + np.diag(np.real(np.diag(a)))
    if np.iscomplexobj(a):
        return h.astype(np.result_type(a.dtype, np.complex128))
    return h.astype(np.float64)


def symmetrize(a):
    """Hermitian part ``(a + a^H) / 2`` (exactly Hermitian in floating point)."""
    a = _check_square(a)
    return (a + a.conj().T) / 2


def as_hpd(a, check=True):
    """Validate ``a`` as Hermitian positive-definite and return it.

    The matrix is first made exactly Hermitian from its lower triangle. It is
    rejected when Cholesky fails or when its smallest eigenvalue does not
    exceed ``n * eps * ||a||_2``.

    Raises
    ------
    NotHPDError
        With the offending eigenvalue range in the message.
    """
    h = hermitian(a)
    if not check:
        return h
    if not np.all(np.isfinite(h)):
        raise NotHPDError("matrix has non-finite entries")
    n = h.shape[0]
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(h)
        raise NotHPDError(
            f"matrix is not positive-definite (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])"
        ) from None
    w = np.linalg.eigvalsh(h)
    if w[0] <= n * np.finfo(float).eps * abs(w[-1]):
        raise NotHPDError(
            f"matrix is numerically singular (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])"
        )
    return h


def is_hpd(a):
    try:
        as_hpd(a)
    except (NotHPDError, DimensionError):
        return False
    return True


def diag_part(a):
    """The Diag operator: keep the diagonal of a square matrix, zero the rest."""
    a = _check_square(a)
    return np.diag(np.diag(a))


@dataclass(frozen=True)
class CorrelationForm:
    """Diagonally scaled matrix ``a_hat`` (unit diagonal) and its hollow part."""

    a_hat: np.ndarray
    a_tilde: np.ndarray


def correlation_scale(a):
    """Scale an HPD matrix to unit diagonal.

    ``a_hat[i, j] = a[i, j] / sqrt(a[i, i] a[j, j])`` and ``a_tilde = a_hat - I``.
    The diagonal of ``a_hat`` is set to exactly one.
    """
    a = as_hpd(a)
    s = 1.0 / np.sqrt(np.real(np.diag(a)))
    a_hat = hermitian(a * np.outer(s, s))
    np.fill_diagonal(a_hat, 1.0)
    a_tilde = a_hat - np.eye(a.shape[0])
    return CorrelationForm(a_hat=a_hat, a_tilde=a_tilde)


_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
}


def matrix_function(a, f, p=None):
    """Apply a scalar function to a Hermitian matrix through its eigenvalues.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        Hermitian matrix; HPD for every ``f`` except ``"exp"``.
    f : {"exp", "log", "sqrt", "inv_sqrt", "pow"} or callable
        Function applied to the eigenvalues. A callable is applied as is and
        no positivity check is made.
    p : float, optional
        Exponent for ``f="pow"``.

    Returns
    -------
    ndarray, shape (n, n)
        ``V f(L) V^H``, exactly Hermitian.
    """
    if callable(f):
        func = f
        a = hermitian(a)
    elif f == "exp":
        func = np.exp
        a = hermitian(a)
    elif f == "pow":
        if p is None:
            raise ValueError("f='pow' needs the exponent p")
        func = lambda w: w ** p  # noqa: E731
        a = as_hpd(a)
    elif f in _FUNCS:
        func = _FUNCS[f]
        a = as_hpd(a)
    else:
        raise ValueError(f"unknown matrix function {f!r}")
    w, v = np.linalg.eigh(a)
    out = (v * func(w)) @ v.conj().T
    return symmetrize(out)


def expm(a):
    return matrix_function(a, "exp")


def logm(a):
    return matrix_function(a, "log")


def sqrtm(a):
    return matrix_function(a, "sqrt")


def invsqrtm(a):
    return matrix_function(a, "inv_sqrt")


def powm(a, p):
    return matrix_function(a, "pow", p=p)


def _check_pair(p1, p2):
    p1 = as_hpd(p1)
    p2 = as_hpd(p2)
    if p1.shape != p2.shape:
        raise DimensionError(f"shape mismatch {p1.shape} vs {p2.shape}")
    return p1, p2


def _pencil_eigvals(a, b):
    """Eigenvalues of ``a^{-1} b`` for HPD ``a``, ``b`` (real, positive)."""
    return sla.eigh(b, a, eigvals_only=True)


def riemannian_distance(p1, p2):
    """Affine-invariant distance ``||log(p1^{-1/2} p2 p1^{-1/2})||_F``."""
    p1, p2 = _check_pair(p1, p2)
    isq = invsqrtm(p1)
    w = np.linalg.eigvalsh(symmetrize(isq @ p2 @ isq))
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def _alpha_terms(lam, alpha):
    """Per-eigenvalue terms of the log-det alpha-divergence.

    ``lam`` are the eigenvalues of ``A^{-1} B``. The two algebraically equal
    forms below avoid the ``1 / (1 - alpha^2)`` cancellation at each end.
    """
    a = (1.0 - alpha) / 2.0
    b = (1.0 + alpha) / 2.0
    if alpha >= 0:
        if a == 0.0:
            return 1.0 / lam - 1.0 + np.log(lam)
        return (a * np.log(lam) + np.log1p(a * (1.0 / lam - 1.0))) / (a * b)
    if b == 0.0:
        return lam - 1.0 - np.log(lam)
    return (np.log1p(b * (lam - 1.0)) - b * np.log(lam)) / (a * b)


def logdet_alpha_divergence(a, b, alpha):
    """Log-det alpha-divergence between two HPD matrices.

    For ``|alpha| < 1``::

        4 / (1 - alpha^2) * log det((1-alpha)/2 A + (1+alpha)/2 B)
                           / (det A^((1-alpha)/2) det B^((1+alpha)/2))

    ``alpha = -1`` gives ``tr(A^-1 B - I) - log det(A^-1 B)`` and
    ``alpha = 1`` the same with ``A`` and ``B`` swapped. Evaluated from the
    generalized eigenvalues of ``(B, A)``, which keeps the value accurate as
    ``alpha`` approaches either end.
    """
    alpha = float(alpha)
    if not -1.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [-1, 1], got {alpha}")
    a, b = _check_pair(a, b)
    lam = _pencil_eigvals(a, b)
    return float(max(np.sum(_alpha_terms(lam, alpha)), 0.0))


def logdet_alpha_divergence_direct(a, b, alpha):
    """Textbook evaluation of the log-det alpha-divergence via determinants.

    Kept as an independent route for testing :func:`logdet_alpha_divergence`.
    """
    a, b = _check_pair(a, b)
    if alpha == -1:
        x = np.linalg.solve(a, b)
        return float(np.real(np.trace(x)) - a.shape[0] - np.linalg.slogdet(x)[1])
    if alpha == 1:
        x = np.linalg.solve(b, a)
        return float(np.real(np.trace(x)) - a.shape[0] - np.linalg.slogdet(x)[1])
    ca, cb = (1 - alpha) / 2, (1 + alpha) / 2
    num = np.linalg.slogdet(ca * a + cb * b)[1]
    den = ca * np.linalg.slogdet(a)[1] + cb * np.linalg.slogdet(b)[1]
    return float(4.0 / (1 - alpha**2) * (num - den))


# -- vec / Kronecker algebra -------------------------------------------------


def vec(z):
    """Stack the columns of ``z`` into a vector."""
    z = np.asarray(z)
    if z.ndim != 2:
        raise DimensionError(f"vec expects a matrix, got ndim={z.ndim}")
    return z.reshape(-1, order="F")


def unvec(v, m, n):
    """Inverse of :func:`vec` for an ``m x n`` matrix."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != m * n:
        raise DimensionError(f"cannot unvec a vector of length {v.size} into {m}x{n}")
    return v.reshape((m, n), order="F")


@dataclass(frozen=True)
class StructuredPermutation:
    """Sparse 0/1 matrix stored as an index map.

    Row ``i`` of the matrix has a single one in column ``source[i]``, or is
    all zero when ``source[i] < 0``. Commutation matrices are genuine
    permutations; the diagonal projector zeroes the off-diagonal rows.
    """

    m: int
    n: int
    source: np.ndarray

    @property
    def size(self):
        return self.source.size

    def apply(self, v):
        """Multiply a vector, or the columns of a 2-D array, without densifying."""
        v = np.asarray(v)
        out = np.zeros_like(v)
        keep = self.source >= 0
        out[keep] = v[self.source[keep]]
        return out

    def dense(self):
        p = np.zeros((self.size, self.size))
        rows = np.flatnonzero(self.source >= 0)
        p[rows, self.source[rows]] = 1.0
        return p


def commutation_matrix(m, n):
    """``P_{m x n}`` with ``P vec(Z) = vec(Z^T)`` for every ``m x n`` matrix ``Z``."""
    if m < 1 or n < 1:
        raise DimensionError("commutation matrix needs m, n >= 1")
    r, c = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    # vec(Z^T)[r + n c] = Z^T[r, c] = Z[c, r] = vec(Z)[c + m r]
    src = np.empty(m * n, dtype=np.intp)
    src[(r + n * c).ravel()] = (c + m * r).ravel()
    return StructuredPermutation(m, n, src)


def diag_projection(n):
    """``P_Diag`` with ``P_Diag vec(Z) = vec(Diag Z)`` for every ``n x n`` ``Z``."""
    if n < 1:
        raise DimensionError("diag projection needs n >= 1")
    src = np.full(n * n, -1, dtype=np.intp)
    idx = np.arange(n) * (n + 1)
    src[idx] = idx
    return StructuredPermutation(n, n, src)
