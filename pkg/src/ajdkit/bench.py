"""Synthetic joint-diagonalization benchmark.

Data sets follow the mixing model

    R_k = A D_k A^T + nu (V_k E_k V_k^T + mu I),    k = 1..K,

with ``A`` and ``V_k`` uniform on ``[-1, 1]`` with unit-norm columns,
``D_k`` and ``E_k`` diagonal with entries ``x^2``, ``x ~ N(0, 2^-i)`` for
``i = 1..n``, ``nu mu`` fixed and ``nu`` set by the target SNR

    SNR = tr(sum_k A D_k A^T) / (nu tr(sum_k V_k E_k V_k^T + mu I)).

Separation is scored by the normalized Amari-Moreau index of ``C A``.

Every simulation draws from its own Philox stream keyed by ``(seed, i)``, so
a data set does not depend on which other simulations run, in what order or
on how many workers.
"""

import csv
import io as _io
import itertools
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .ajd import AjdProblem, SolveOptions, cost, solve
from .baselines import jadiag, off_criterion, uwedge
from .io import atomic_write, dumps, format_float
from .linalg import DomainError

ALGORITHMS = ("ldnewton", "jadiag", "uwedge")


@dataclass(frozen=True)
class ScenarioConfig:
    """One benchmark scenario, or a grid of them when ``n`` or ``snr`` is a list.

    Attributes
    ----------
    n : int or tuple of int
        Matrix dimension.
    k_matrices : int
        Matrices per set.
    snr : float or tuple of float
        Target signal-to-noise ratio.
    mu_nu_product : float
        Level ``nu mu`` of the isotropic noise.
    n_simulations : int
    seed : int
    alphas : tuple of float
        Values of alpha run with ``"ldnewton"``.
    algorithms : tuple of str
        Subset of :data:`ALGORITHMS`.
    noiseless : bool
        Drop both noise terms, giving exactly jointly diagonalizable sets.
    complex : bool
        Complex ``A`` and ``V_k`` (real and imaginary parts uniform).
    tol, max_iter : float, int
        Shared stopping rule of all algorithms.
    """

    n: tuple = (10,)
    k_matrices: int = 20
    snr: tuple = (10.0,)
    mu_nu_product: float = 1e-6
    n_simulations: int = 10
    seed: int = 0
    alphas: tuple = (-0.75, 0.0, 0.75)
    algorithms: tuple = ALGORITHMS
    noiseless: bool = False
    complex: bool = False
    tol: float = SolveOptions.tol
    max_iter: int = SolveOptions.max_iter

    def __post_init__(self):
        for name in ("n", "snr", "alphas", "algorithms"):
            value = getattr(self, name)
            value = tuple(value) if isinstance(value, (list, tuple)) else (value,)
            object.__setattr__(self, name, value)
        if any(int(n) != n or n < 2 for n in self.n):
            raise ValueError("n must be an integer >= 2")
        object.__setattr__(self, "n", tuple(int(n) for n in self.n))
        if any(not s > 0 for s in self.snr):
            raise ValueError("snr must be positive")
        object.__setattr__(self, "snr", tuple(float(s) for s in self.snr))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.k_matrices < 2:
            raise ValueError("k_matrices must be >= 2")
        if self.n_simulations < 1:
            raise ValueError("n_simulations must be >= 1")
        if not self.mu_nu_product > 0:
            raise ValueError("mu_nu_product must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad or not self.algorithms:
            raise ValueError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {sorted(bad)}")
        if "ldnewton" in self.algorithms:
            if not self.alphas:
                raise ValueError("ldnewton needs at least one alpha")
            if any(not -1.0 <= a <= 1.0 for a in self.alphas):
                raise DomainError("alpha must lie in [-1, 1]")
        SolveOptions(tol=self.tol, max_iter=self.max_iter)

    @classmethod
    def from_dict(cls, data):
        """Build from a mapping with the field names; unknown keys are an error."""
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        out = asdict(self)
        for name in ("n", "snr", "alphas", "algorithms"):
            out[name] = list(out[name])
        return out

    def cells(self):
        """The ``(n, snr)`` grid in row-major order."""
        return list(itertools.product(self.n, self.snr))

    def runs(self):
        """``(algorithm, alpha)`` pairs; alpha is None for the baselines."""
        out = []
        for algo in self.algorithms:
            if algo == "ldnewton":
                out.extend((algo, a) for a in self.alphas)
            else:
                out.append((algo, None))
        return out


@dataclass(frozen=True)
class Dataset:
    """A generated matrix set with its ground truth.

    Attributes
    ----------
    matrices : ndarray, shape (K, n, n)
        The ``R_k``.
    mixing : ndarray, shape (n, n)
        ``A``.
    nu : float
    signal : ndarray, shape (K, n, n)
        ``A D_k A^H``.
    noise : ndarray, shape (K, n, n)
        ``V_k E_k V_k^H``.
    mu_nu_product : float
    """

    matrices: np.ndarray
    mixing: np.ndarray
    nu: float
    signal: np.ndarray
    noise: np.ndarray
    mu_nu_product: float

    def realized_snr(self):
        """SNR recomputed from the stored parts."""
        k, n = self.signal.shape[:2]
        s = np.real(np.trace(self.signal, axis1=1, axis2=2).sum())
        d = self.nu * np.real(np.trace(self.noise, axis1=1, axis2=2).sum()) + self.mu_nu_product * n * k
        return float(s / d) if d > 0 else math.inf


def simulation_rng(seed, sim_index):
    """Philox generator for simulation ``sim_index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(sim_index,))))


def _mixing(rng, n, cplx):
    a = rng.uniform(-1.0, 1.0, (n, n))
    if cplx:
        a = a + 1j * rng.uniform(-1.0, 1.0, (n, n))
    return a / np.linalg.norm(a, axis=0)


def _powers(rng, k, n):
    return rng.normal(0.0, np.sqrt(2.0 ** -np.arange(1, n + 1)), (k, n)) ** 2


def generate_dataset(cfg, sim_index, n=None, snr=None):
    """Draw the data set of simulation ``sim_index``.

    Parameters
    ----------
    cfg : ScenarioConfig
    sim_index : int
    n, snr : optional
        Grid cell; default to the first entries of ``cfg.n`` and ``cfg.snr``.
        Cells share the stream of a simulation, so an SNR sweep reuses the
        same ``A``, ``D_k``, ``V_k`` and ``E_k``.

    Returns
    -------
    Dataset
    """
    n = cfg.n[0] if n is None else int(n)
    snr = cfg.snr[0] if snr is None else float(snr)
    k = cfg.k_matrices
    rng = simulation_rng(cfg.seed, sim_index)
    a = _mixing(rng, n, cfg.complex)
    d = _powers(rng, k, n)
    v = np.stack([_mixing(rng, n, cfg.complex) for _ in range(k)])
    e = _powers(rng, k, n)

    signal = np.einsum("ij,kj,lj->kil", a, d, a.conj())
    noise = np.einsum("kij,kj,klj->kil", v, e, v.conj())
    if cfg.noiseless:
        nu, iso = 0.0, 0.0
    else:
        s_sig = np.real(np.trace(signal, axis1=1, axis2=2).sum())
        s_noise = np.real(np.trace(noise, axis1=1, axis2=2).sum())
        iso = cfg.mu_nu_product
        # nu mu n K does not depend on nu, so nu solves a linear equation
        nu = (s_sig / snr - iso * n * k) / s_noise
        if nu <= 0:
            raise DomainError(f"snr={snr} cannot be reached: the isotropic noise alone exceeds it")
    mats = signal + nu * noise + iso * np.eye(n)
    mats = (mats + np.swapaxes(mats, 1, 2).conj()) / 2
    for m in mats:
        np.linalg.cholesky(m)
    return Dataset(mats, a, float(nu), signal, noise, 0.0 if cfg.noiseless else cfg.mu_nu_product)


def amari_moreau(m):
    """Normalized Amari-Moreau index of ``m``, in ``[0, 1]``.

    Zero exactly when ``m`` is a scaled permutation.

    Raises
    ------
    DomainError
        If ``m`` has a zero row or column.
    """
    m = np.abs(np.asarray(m))
    p = m.shape[0]
    if m.ndim != 2 or m.shape[1] != p or p < 2:
        raise ValueError("amari_moreau needs a square matrix of size >= 2")
    rmax, cmax = m.max(axis=1), m.max(axis=0)
    if np.any(rmax == 0) or np.any(cmax == 0):
        raise DomainError("amari_moreau is undefined for a matrix with a zero row or column")
    rows = np.sum(m / rmax[:, None]) - p
    cols = np.sum(m / cmax[None, :]) - p
    return float((rows + cols) / (2 * p * (p - 1)))


# -- records -----------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """One algorithm run on one simulated data set.

    ``pi_trace`` and ``wall_time`` are not written to ``records.csv``: the
    trace goes to the plot files and the timing to ``timings.csv``.
    """

    n: int
    snr: float
    k_matrices: int
    simulation: int
    seed: int
    algorithm: str
    alpha: float | None
    iterations: int
    converged: bool
    final_cost: float
    pi: float
    nu: float
    error: str = ""
    pi_trace: tuple = field(default=(), compare=False)
    wall_time: float = field(default=math.nan, compare=False)


CSV_COLUMNS = (
    "n", "snr", "k_matrices", "simulation", "seed", "algorithm", "alpha",
    "iterations", "converged", "final_cost", "pi", "nu", "error",
)


def _format(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def records_to_csv(records):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_format(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def records_from_csv(text):
    """Parse the output of :func:`records_to_csv`."""
    rows = list(csv.DictReader(_io.StringIO(text)))
    out = []
    for row in rows:
        out.append(
            RunRecord(
                n=int(row["n"]),
                snr=float(row["snr"]),
                k_matrices=int(row["k_matrices"]),
                simulation=int(row["simulation"]),
                seed=int(row["seed"]),
                algorithm=row["algorithm"],
                alpha=float(row["alpha"]) if row["alpha"] else None,
                iterations=int(row["iterations"]),
                converged=row["converged"] == "true",
                final_cost=float(row["final_cost"]),
                pi=float(row["pi"]),
                nu=float(row["nu"]),
                error=row["error"],
            )
        )
    return out


# -- running -----------------------------------------------------------------------


def _run_one(cfg, data, sim_index, n, snr, algo, alpha):
    problem = AjdProblem(data.matrices, alpha=0.0 if alpha is None else alpha)
    opts = SolveOptions(tol=cfg.tol, max_iter=cfg.max_iter)
    pis = []

    def score(it, c):
        pis.append(amari_moreau(c @ data.mixing))

    base = dict(n=n, snr=snr, k_matrices=cfg.k_matrices, simulation=sim_index, seed=cfg.seed,
                algorithm=algo, alpha=alpha, nu=data.nu)
    start = time.perf_counter()
    try:
        if algo == "ldnewton":
            res = solve(problem, opts=opts, callback=score)
            final = cost(res.c, problem)
        elif algo == "jadiag":
            res = jadiag(problem, opts=opts, callback=score)
            final = cost(res.c, problem.with_alpha(1.0))
        else:
            res = uwedge(problem, opts=opts, callback=score)
            final = off_criterion(res.c, problem)
        wall = time.perf_counter() - start
        note = "" if res.converged else (res.trace[-1].note or "max_iter")
        return RunRecord(**base, iterations=res.iterations, converged=res.converged,
                         final_cost=float(final), pi=pis[-1], error=note,
                         pi_trace=tuple(pis), wall_time=wall)
    except (np.linalg.LinAlgError, DomainError, FloatingPointError, ValueError) as exc:
        wall = time.perf_counter() - start
        return RunRecord(**base, iterations=0, converged=False, final_cost=math.nan,
                         pi=math.nan, error=f"{type(exc).__name__}: {exc}".replace("\n", " "),
                         pi_trace=tuple(pis), wall_time=wall)


def _simulate(cfg, sim_index):
    out = []
    for n, snr in cfg.cells():
        data = generate_dataset(cfg, sim_index, n, snr)
        for algo, alpha in cfg.runs():
            out.append(_run_one(cfg, data, sim_index, n, snr, algo, alpha))
    return out


def run_experiment(cfg, n_jobs=1):
    """Run every algorithm on every simulated data set.

    Parameters
    ----------
    cfg : ScenarioConfig
    n_jobs : int
        Worker processes. Simulations are independent and the records are
        merged by simulation index, so the records do not depend on it.

    Returns
    -------
    records : list of RunRecord
        Ordered by (n, snr), then algorithm and alpha, then simulation.
    summary : dict
        See :func:`summarize`.
    """
    sims = range(cfg.n_simulations)
    if n_jobs == 1:
        per_sim = [_simulate(cfg, i) for i in sims]
    else:
        from joblib import Parallel, delayed

        per_sim = Parallel(n_jobs=n_jobs)(delayed(_simulate)(cfg, i) for i in sims)
    order = {run: j for j, run in enumerate(cfg.runs())}
    cells = {cell: j for j, cell in enumerate(cfg.cells())}
    records = [r for batch in per_sim for r in batch]
    records.sort(key=lambda r: (cells[(r.n, r.snr)], order[(r.algorithm, r.alpha)], r.simulation))
    return records, summarize(cfg, records)


def _mean(values):
    values = [v for v in values if not math.isnan(v)]
    return math.fsum(values) / len(values) if values else math.nan


def summarize(cfg, records):
    """Per-cell means, reduced in record order with exact summation.

    A cell is one ``(algorithm, alpha, n, snr)``. ``complete`` is False when
    any run in it raised.
    """
    cells = []
    for n, snr in cfg.cells():
        for algo, alpha in cfg.runs():
            rs = [r for r in records if (r.n, r.snr, r.algorithm, r.alpha) == (n, snr, algo, alpha)]
            cells.append(
                {
                    "algorithm": algo,
                    "alpha": alpha,
                    "n": n,
                    "snr": snr,
                    "runs": len(rs),
                    "failed": sum(1 for r in rs if math.isnan(r.pi)),
                    "complete": len(rs) == cfg.n_simulations and not any(math.isnan(r.pi) for r in rs),
                    "converged_fraction": sum(r.converged for r in rs) / len(rs) if rs else math.nan,
                    "mean_pi": _mean([r.pi for r in rs]),
                    "mean_iterations": _mean([float(r.iterations) for r in rs]),
                    "mean_wall_time": _mean([r.wall_time for r in rs]),
                }
            )
    # wall times relative to the fastest cell of the same (n, snr)
    for n, snr in cfg.cells():
        group = [c for c in cells if (c["n"], c["snr"]) == (n, snr)]
        fastest = min((c["mean_wall_time"] for c in group), default=math.nan)
        for c in group:
            c["relative_wall_time"] = c["mean_wall_time"] / fastest if fastest > 0 else math.nan
    return {"config": cfg.to_dict(), "cells": cells}


# -- export ------------------------------------------------------------------------


def _label(algo, alpha):
    return algo if alpha is None else f"{algo}_alpha{alpha:+g}"


def plot_series(records):
    """Mean PI against iteration for each (algorithm, alpha, n, snr).

    Runs that stopped early hold their final PI.
    """
    groups = {}
    for r in records:
        if r.pi_trace:
            groups.setdefault((r.algorithm, r.alpha, r.n, r.snr), []).append(r.pi_trace)
    out = {}
    for key, traces in groups.items():
        length = max(len(t) for t in traces)
        padded = np.array([list(t) + [t[-1]] * (length - len(t)) for t in traces])
        out[key] = (np.arange(length), padded.mean(axis=0))
    return out


def export(records, summary, out_dir):
    """Write ``records.csv``, ``summary.json``, ``timings.csv`` and ``plots/*.dat``.

    Every file is written atomically. Returns the list of paths written.

    Raises
    ------
    OSError
        With the offending path in the message.
    """
    if not records:
        raise ValueError("no records to export")
    written = []

    def put(path, text):
        try:
            atomic_write(path, text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
        written.append(path)

    put(os.path.join(out_dir, "records.csv"), records_to_csv(records))
    put(os.path.join(out_dir, "summary.json"), dumps(summary, indent=2) + "\n")
    lines = ["n,snr,simulation,algorithm,alpha,wall_time"]
    for r in records:
        lines.append(",".join(_format(v) for v in (r.n, r.snr, r.simulation, r.algorithm, r.alpha, r.wall_time)))
    put(os.path.join(out_dir, "timings.csv"), "\n".join(lines) + "\n")
    multi = len({(r.n, r.snr) for r in records}) > 1
    for (algo, alpha, n, snr), (it, pi) in sorted(plot_series(records).items(), key=lambda kv: str(kv[0])):
        name = _label(algo, alpha) + (f"_n{n}_snr{snr:g}" if multi else "") + ".dat"
        body = "# iteration mean_pi\n" + "".join(f"{i} {format_float(p)}\n" for i, p in zip(it, pi))
        put(os.path.join(out_dir, "plots", name), body)
    return written
