import numpy as np
import pytest


def random_hpd(rng, n, complex_=False, cond=None):
    """Random HPD matrix; with ``cond`` its eigenvalues span exactly that ratio."""
    x = rng.standard_normal((n, n))
    if complex_:
        x = x + 1j * rng.standard_normal((n, n))
    if cond is None:
        a = x @ x.conj().T + n * np.eye(n)
        return (a + a.conj().T) / 2
    q, _ = np.linalg.qr(x)
    w = np.geomspace(1.0, cond, n)
    a = (q * w) @ q.conj().T
    return (a + a.conj().T) / 2


def random_invertible(rng, n, complex_=False):
    x = rng.standard_normal((n, n))
    if complex_:
        x = x + 1j * rng.standard_normal((n, n))
    return x + n * np.eye(n)


def diagonalizable_set(rng, n, k, complex_=False):
    """``M_k = A D_k A^H`` with known mixing ``A``."""
    a = rng.uniform(-1, 1, (n, n))
    if complex_:
        a = a + 1j * rng.uniform(-1, 1, (n, n))
    a /= np.linalg.norm(a, axis=0)
    d = rng.uniform(0.1, 2.0, (k, n))
    mats = np.einsum("ij,kj,lj->kil", a, d, a.conj())
    return (mats + np.swapaxes(mats, 1, 2).conj()) / 2, a


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def report(number, title, passed, detail):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
