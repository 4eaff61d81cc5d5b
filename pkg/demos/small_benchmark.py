"""
A small separation benchmark
============================

Runs every algorithm on a handful of simulated data sets over an SNR sweep,
prints the mean Amari-Moreau index per cell and writes the usual output
files. The same scenario can be run with ``ajdkit bench --config``.
"""

import sys
import tempfile

from ajdkit.bench import ScenarioConfig, export, run_experiment

cfg = ScenarioConfig(n=6, k_matrices=20, snr=[0.1, 1.0, 10.0], n_simulations=5, seed=42, alphas=(0.0, 0.75))
records, summary = run_experiment(cfg)

print(f"{'algorithm':18s} {'snr':>6s} {'mean PI':>9s} {'iters':>6s} {'conv':>5s} {'rel time':>9s}")
for c in summary["cells"]:
    name = c["algorithm"] + ("" if c["alpha"] is None else f"({c['alpha']:+g})")
    print(f"{name:18s} {c['snr']:6g} {c['mean_pi']:9.4f} {c['mean_iterations']:6.1f} "
          f"{c['converged_fraction']:5.0%} {c['relative_wall_time']:8.1f}x")

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="ajdkit-bench-")
for path in export(records, summary, out):
    print("wrote", path)
