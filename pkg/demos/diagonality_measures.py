"""
How diagonal is a matrix?
=========================

Every measure here compares an HPD matrix with its diagonal part after
rescaling to unit diagonal, so it ignores how the rows and columns are
scaled. Watch them agree for nearly diagonal matrices and part ways as the
correlation grows.
"""

import numpy as np

from ajdkit.measures import KINDS, diagonality, diagonality_2x2
from ajdkit.projections import true_diagonality

# A 2 x 2 matrix is summarized by one number, its correlation r.
print("r      " + "  ".join(f"{k:>18}" for k in KINDS if k != "logdet_alpha"))
for r in (0.01, 0.1, 0.5, 0.9, 0.99):
    a = np.array([[1.0, r], [r, 1.0]])
    row = [diagonality(a, k) for k in KINDS if k != "logdet_alpha"]
    print(f"{r:<6} " + "  ".join(f"{v:18.6g}" for v in row))

# Near r = 0 all of them behave like r^2. Near r = 1 the log-det based ones
# blow up while the Frobenius ones stay bounded.
r = 0.3
print("\nclosed form vs direct at r = 0.3:",
      diagonality_2x2(r, "riemannian"), diagonality(np.array([[1, r], [r, 1.0]]), "riemannian"))

# Rescaling rows and columns does not change the invariant measures.
rng = np.random.default_rng(0)
x = rng.standard_normal((4, 4))
a = x @ x.T + 4 * np.eye(4)
d = np.diag([1e-3, 1.0, 10.0, 1e3])
print("\nRiemannian measure of A and of D A D:",
      diagonality(a, "riemannian"), diagonality(d @ a @ d, "riemannian"))

# Half the squared distance to Diag(A) overstates half the squared distance
# to the nearest diagonal matrix, except for the Frobenius criterion.
print("\nRiemannian, to Diag(A): ", diagonality(a, "riemannian"))
print("Riemannian, to nearest:", true_diagonality(a, "riemannian"))
