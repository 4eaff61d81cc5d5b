"""Diagonality measures of HPD matrices.

Every measure except the plain Frobenius one is a function of the
correlation form ``A_hat = Diag(A)^{-1/2} A Diag(A)^{-1/2}`` only, which makes
it invariant under congruence by permutations and by invertible diagonal
matrices.

Kinds
-----
``"frobenius"``           ``1/2 ||A - Diag A||_F^2``
``"modified_frobenius"``  ``1/2 ||A_hat - I||_F^2``
``"riemannian"``          ``1/2 ||log A_hat||_F^2``
``"kl_right"``            ``tr(A_hat^-1) - n + log det A_hat``
``"kl_left"``             ``-log det A_hat``
``"kl_symmetric"``        ``1/2 (tr(A_hat^-1) - n)``
``"logdet_alpha"``        log-det alpha-divergence between A and Diag A
``"bhattacharyya"``       ``"logdet_alpha"`` at ``alpha = 0``
"""

import math

import numpy as np

from .linalg import DomainError, _check_square, correlation_scale

KINDS = (
    "frobenius",
    "modified_frobenius",
    "riemannian",
    "kl_right",
    "kl_left",
    "kl_symmetric",
    "logdet_alpha",
    "bhattacharyya",
)

#: kinds that depend on the correlation form only
INVARIANT_KINDS = KINDS[1:]


def _resolve(kind, alpha):
    if kind not in KINDS:
        raise ValueError(f"unknown diagonality kind {kind!r}; expected one of {KINDS}")
    if kind == "bhattacharyya":
        return "logdet_alpha", 0.0
    if kind == "logdet_alpha":
        if alpha is None:
            raise ValueError("kind='logdet_alpha' needs alpha")
        alpha = float(alpha)
        if not -1.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie strictly inside (-1, 1), got {alpha}")
    return kind, alpha


def _from_eigenvalues(x, kind, alpha):
    """Invariant measures from the eigenvalues ``x`` of the hollow part.

    The correlation form has eigenvalues ``1 + x`` and ``sum(x) = 0``. Each
    term below is written so that its first-order part cancels analytically,
    which keeps nearly diagonal matrices accurate to working precision.
    """
    l1 = np.log1p(x)
    if kind == "riemannian":
        return 0.5 * np.sum(l1**2)
    if kind == "kl_right":
        return np.sum(l1 - x / (1.0 + x))
    if kind == "kl_left":
        return np.sum(x - l1)
    if kind == "kl_symmetric":
        return 0.5 * np.sum(x * x / (1.0 + x))
    if kind == "logdet_alpha":
        # D_alpha(A_hat, I), the pencil eigenvalues being 1 / (1 + x)
        a, b = (1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0
        if alpha >= 0:
            return np.sum(np.log1p(a * x) - a * l1) / (a * b)
        return np.sum(np.log1p(-b * x / (1.0 + x)) + b * l1) / (a * b)
    raise AssertionError(kind)


def diagonality(a, kind, alpha=None):
    """Diagonality measure of a matrix.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        HPD matrix. Any square matrix is accepted for ``kind="frobenius"``.
    kind : str
        One of :data:`KINDS`.
    alpha : float, optional
        Parameter in ``(-1, 1)`` for ``kind="logdet_alpha"``.

    Returns
    -------
    float
        Non-negative; zero exactly when ``a`` is diagonal.
    """
    kind, alpha = _resolve(kind, alpha)
    if kind == "frobenius":
        a = _check_square(a)
        off = a - np.diag(np.diag(a))
        return float(0.5 * np.sum(np.abs(off) ** 2))
    form = correlation_scale(a)
    if not np.any(form.a_tilde):
        return 0.0
    if kind == "modified_frobenius":
        return float(0.5 * np.sum(np.abs(form.a_tilde) ** 2))
    x = np.linalg.eigvalsh(form.a_tilde)
    return float(max(_from_eigenvalues(x, kind, alpha), 0.0))


def all_measures(a, alphas=()):
    """Every measure of ``a`` as a dict, with one ``logdet_alpha`` entry per alpha."""
    out = {k: diagonality(a, k) for k in KINDS if k != "logdet_alpha"}
    for al in alphas:
        out[f"logdet_alpha({al:g})"] = diagonality(a, "logdet_alpha", alpha=al)
    return out


# -- closed forms -------------------------------------------------------------


def _invariant_kind(kind, alpha):
    kind, alpha = _resolve(kind, alpha)
    if kind == "frobenius":
        raise ValueError("the plain Frobenius measure is not a function of the correlation form")
    return kind, alpha


def diagonality_2x2(r, kind, alpha=None):
    """Measure of a 2 x 2 HPD matrix from ``r = |a12| / sqrt(a11 a22)``."""
    kind, alpha = _invariant_kind(kind, alpha)
    r = float(r)
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    r2 = r * r
    l1 = math.log1p(-r2)
    if kind == "modified_frobenius":
        return r2
    if kind == "riemannian":
        return 0.5 * (math.log1p(r) ** 2 + math.log1p(-r) ** 2)
    if kind == "kl_right":
        return 2.0 * r2 / (1.0 - r2) + l1
    if kind == "kl_left":
        return -l1
    if kind == "kl_symmetric":
        return r2 / (1.0 - r2)
    c = (1.0 - alpha) / 2.0
    return 4.0 / (1.0 - alpha**2) * math.log1p(-(c * r) ** 2) - 2.0 / (1.0 + alpha) * l1


def invariants_3x3(a):
    """``(rho, delta)`` of a 3 x 3 HPD matrix.

    ``rho^2 = |a|^2 + |b|^2 + |c|^2`` and ``delta = Re(a b c)`` for the
    off-diagonal entries ``a = A_hat[0, 1]``, ``c = A_hat[1, 2]``,
    ``b = A_hat[2, 0]`` of the correlation form.
    """
    h = correlation_scale(a).a_hat
    if h.shape != (3, 3):
        raise ValueError("invariants_3x3 needs a 3 x 3 matrix")
    x, y, z = h[0, 1], h[2, 0], h[1, 2]
    rho = math.sqrt(abs(x) ** 2 + abs(y) ** 2 + abs(z) ** 2)
    delta = float(np.real(x * y * z))
    return rho, delta


def cardano_shifts(rho, delta):
    """Eigenvalues ``s1, s2, s3`` of the hollow 3 x 3 matrix with invariants ``(rho, delta)``."""
    if rho < 1e-14:
        return (0.0, 0.0, 0.0)
    x = 3.0 * math.sqrt(3.0) * delta / rho**3
    if abs(x) > 1.0:
        if abs(x) - 1.0 > 1e-12:
            raise DomainError(f"(rho, delta) = ({rho}, {delta}) is not realizable by a Hermitian matrix")
        x = math.copysign(1.0, x)
    phi = math.acos(x) / 3.0
    k = 2.0 * rho / math.sqrt(3.0)
    return (
        k * math.cos(phi),
        -k * math.cos(math.pi / 3.0 + phi),
        -k * math.cos(math.pi / 3.0 - phi),
    )


def diagonality_3x3(rho, delta, kind, alpha=None):
    """Measure of a 3 x 3 HPD matrix from its invariants ``(rho, delta)``."""
    kind, alpha = _invariant_kind(kind, alpha)
    rho, delta = float(rho), float(delta)
    det = 1.0 - rho**2 + 2.0 * delta
    if rho < 0 or abs(delta) >= 1.0 or det <= 0.0:
        raise DomainError(f"(rho, delta) = ({rho}, {delta}) does not come from an HPD matrix")
    if rho < 1e-14:
        return 0.0
    s = cardano_shifts(rho, delta)
    if min(s) <= -1.0:
        raise DomainError(f"(rho, delta) = ({rho}, {delta}) does not come from an HPD matrix")
    ldet = math.log(det)
    if kind == "modified_frobenius":
        return rho**2
    if kind == "riemannian":
        return 0.5 * sum(math.log1p(si) ** 2 for si in s)
    if kind == "kl_right":
        return 2.0 * (rho**2 - 3.0 * delta) / det + ldet
    if kind == "kl_left":
        return -ldet
    if kind == "kl_symmetric":
        return (rho**2 - 3.0 * delta) / det
    c = (1.0 - alpha) / 2.0
    inner = 1.0 - (c * rho) ** 2 + 2.0 * c**3 * delta
    return 4.0 / (1.0 - alpha**2) * math.log(inner) - 2.0 / (1.0 + alpha) * ldet


# -- series in the traces of the hollow part ----------------------------------


def series_coefficient(k, kind, alpha=None):
    """Coefficient of ``tr(A_tilde^k)`` in the expansion of a measure, ``k >= 2``."""
    kind, alpha = _invariant_kind(kind, alpha)
    if k < 2:
        raise ValueError("series starts at k = 2")
    sign = -1.0 if k % 2 else 1.0
    if kind == "modified_frobenius":
        return 0.5 if k == 2 else 0.0
    if kind == "riemannian":
        return sign / k * sum(1.0 / (j + 1) for j in range(k - 1))
    if kind == "kl_right":
        return sign * (k - 1) / k
    if kind == "kl_left":
        return sign / k
    if kind == "kl_symmetric":
        return sign / 2.0
    c = (1.0 - alpha) / 2.0
    return sign / k * sum(c**j for j in range(k - 1))


def diagonality_series(a, kind, order, alpha=None):
    """Truncated power series of a measure in ``tr(A_tilde^k)``, ``k = 2..order``.

    Traces are accumulated from explicit matrix powers, so this route shares
    nothing with :func:`diagonality` beyond the correlation scaling.

    Raises
    ------
    DomainError
        When the spectral radius of ``A_tilde`` is at least one.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    kind, alpha = _invariant_kind(kind, alpha)
    at = correlation_scale(a).a_tilde
    radius = np.max(np.abs(np.linalg.eigvalsh(at))) if at.size else 0.0
    if radius >= 1.0:
        raise DomainError(f"series diverges: spectral radius of the hollow part is {radius:.6f}")
    total = 0.0
    power = at.copy()
    for k in range(2, order + 1):
        power = power @ at
        total += series_coefficient(k, kind, alpha) * float(np.real(np.trace(power)))
    return total
