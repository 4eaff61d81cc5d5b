"""
Means of HPD matrices through a joint diagonalizer
==================================================

Once ``C`` diagonalizes every ``M_k``, averaging the diagonals gives a mean
of the set. On a commuting set this reproduces the harmonic, geometric and
arithmetic means exactly.
"""

import numpy as np

from ajdkit.linalg import expm, logm
from ajdkit.means import ajd_mean

rng = np.random.default_rng(3)
v, _ = np.linalg.qr(rng.standard_normal((5, 5)))
lam = rng.uniform(0.5, 4.0, (10, 5))
mats = np.einsum("ij,kj,lj->kil", v, lam, v)

g = ajd_mean(mats, p=0.0)
log_euclid = expm(np.mean([logm(m) for m in mats], axis=0))
print("geometric mean vs log-Euclidean mean:", np.max(np.abs(g - log_euclid)))

# Harmonic <= geometric <= arithmetic in the Loewner order.
h, a = ajd_mean(mats, p=-1.0), ajd_mean(mats, p=1.0)
print("smallest eigenvalue of G - H:", np.linalg.eigvalsh(g - h)[0])
print("smallest eigenvalue of A - G:", np.linalg.eigvalsh(a - g)[0])

# The geometric mean of the inverses is the inverse of the geometric mean.
g_inv = ajd_mean(np.linalg.inv(mats), p=0.0)
print("self-duality error:", np.max(np.abs(g_inv @ g - np.eye(5))))

# On a set that does not commute the result is an approximation.
x = rng.standard_normal((10, 5, 5))
noisy = x @ np.swapaxes(x, 1, 2) + 5 * np.eye(5)
print("power means of a random set, trace for p = -1, 0, 1:",
      [round(float(np.trace(ajd_mean(noisy, p=p))), 4) for p in (-1.0, 0.0, 1.0)])
