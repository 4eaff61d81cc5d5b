"""Geometric and power means of HPD matrices through joint diagonalization.

With ``C`` a joint diagonalizer of the ``M_k`` and ``D_k = C M_k C^H``, the mean
is ``C^-1 E C^-H`` where ``E`` is the scalar mean of the diagonals of the
``D_k``: geometric for ``p = 0`` and power ``(mean d^p)^(1/p)`` otherwise. On
sets that commute after a congruence this is exact; ``p = 1`` gives the
arithmetic mean and ``p = -1`` the harmonic one.
"""

import warnings

import numpy as np

from .ajd import AjdProblem, SolveOptions, solve
from .linalg import ConvergenceWarning, DomainError, as_hpd, hermitian


def ajd_mean(matrices, p=0.0, alpha=0.0, opts=SolveOptions(), return_result=False):
    """AJD-based mean of a set of HPD matrices.

    Parameters
    ----------
    matrices : array_like, shape (K, n, n)
        HPD matrices, ``K >= 2``.
    p : float
        Power in ``[-1, 1]``; ``0`` selects the geometric mean.
    alpha : float
        Parameter of the joint diagonalization cost.
    opts : SolveOptions
    return_result : bool
        Also return the :class:`~ajdkit.ajd.SolveResult` of the diagonalizer.

    Returns
    -------
    mean : ndarray, shape (n, n)
    result : SolveResult
        Only with ``return_result=True``.

    Warns
    -----
    ConvergenceWarning
        When the joint diagonalization did not converge.
    """
    p = float(p)
    if not -1.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [-1, 1], got {p}")
    problem = AjdProblem(matrices, alpha)
    res = solve(problem, opts=opts)
    if not res.converged:
        warnings.warn(
            f"joint diagonalization stopped after {res.iterations} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    c = res.c
    d = np.real(np.einsum("ij,kjl,il->ki", c, problem.matrices, c.conj()))
    if p == 0.0:
        e = np.exp(np.mean(np.log(d), axis=0))
    else:
        e = np.mean(d**p, axis=0) ** (1.0 / p)
    ci = np.linalg.inv(c)
    mean = as_hpd(hermitian((ci * e) @ ci.conj().T))
    return (mean, res) if return_result else mean
