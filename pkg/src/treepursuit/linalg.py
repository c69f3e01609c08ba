"""Dense linear-algebra kernel shared by every solver.

Correlation scores, deterministic top-k selection, and least-squares
projection onto a growing atom set.  Projections are maintained through an
incremental QR factorization (modified Gram-Schmidt with one
reorthogonalization pass), so search paths that share a prefix can branch
cheaply: appending one atom costs O(M*l) instead of a refactorization.
"""

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "SingularSupportError",
    "correlations",
    "top_indices",
    "project",
    "IncrementalFactorization",
]

# A column whose orthogonalized norm falls below this fraction of its
# original norm is treated as linearly dependent on the current support.
DEPENDENCY_TOL = 1e-12


class SingularSupportError(Exception):
    """The requested support set is numerically rank deficient."""


def correlations(phi, r):
    """Absolute inner products |<phi_j, r>| for every column of phi.

    No normalization by column norms is applied.

    Parameters
    ----------
    phi : (M, N) array
    r : (M,) array

    Returns
    -------
    (N,) array of nonnegative scores.
    """
    phi = np.asarray(phi, dtype=float)
    r = np.asarray(r, dtype=float)
    if phi.ndim != 2:
        raise ValueError("phi must be a 2-d array")
    if r.ndim != 1 or r.shape[0] != phi.shape[0]:
        raise ValueError("r must be a vector with one entry per row of phi")
    return np.abs(phi.T @ r)


def top_indices(scores, count, exclude=()):
    """Indices of the `count` largest scores outside `exclude`.

    Ordered by descending score; ties broken by ascending index, so the
    result is fully deterministic.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1:
        raise ValueError("scores must be a vector")
    excluded = set(exclude)
    if count < 1:
        raise ValueError("count must be a positive integer")
    if count > scores.shape[0] - len(excluded):
        raise ValueError(
            "requested %d indices but only %d are available"
            % (count, scores.shape[0] - len(excluded))
        )
    if excluded:
        scores = scores.copy()
        scores[list(excluded)] = -np.inf
    # stable sort on the negated scores keeps ties in ascending-index order
    order = np.argsort(-scores, kind="stable")
    return [int(i) for i in order[:count]]


class IncrementalFactorization:
    """QR factorization of phi restricted to an ordered support, together
    with the residue of y against that support.

    `appended` returns a new factorization and leaves the original intact,
    so factorizations are single-owner values: paths that share a prefix
    branch without aliasing.  Orthogonalization is modified Gram-Schmidt
    with one full reorthogonalization pass, float64 only.
    """

    __slots__ = ("support", "q", "rmat", "qty", "residue")

    def __init__(self, support, q, rmat, qty, residue):
        self.support = support
        self.q = q
        self.rmat = rmat
        self.qty = qty
        self.residue = residue

    @classmethod
    def empty(cls, y):
        """Factorization over the empty support; the residue is y itself."""
        y = np.asarray(y, dtype=float)
        if y.ndim != 1:
            raise ValueError("y must be a vector")
        m = y.shape[0]
        return cls((), np.empty((m, 0)), np.empty((0, 0)), np.empty(0), y.copy())

    @property
    def length(self):
        return len(self.support)

    @property
    def residue_norm(self):
        return float(np.linalg.norm(self.residue))

    def appended(self, index, column):
        """New factorization with `column` (atom `index`) appended.

        Raises SingularSupportError when the column is numerically in the
        span of the current support.
        """
        column = np.asarray(column, dtype=float)
        if column.shape != self.residue.shape:
            raise ValueError("column length must match the measurement size")
        colnorm = float(np.linalg.norm(column))
        v = column.copy()
        coef = self.q.T @ v
        v -= self.q @ coef
        extra = self.q.T @ v
        v -= self.q @ extra
        coef += extra
        vnorm = float(np.linalg.norm(v))
        if colnorm == 0.0 or vnorm < DEPENDENCY_TOL * colnorm:
            raise SingularSupportError(
                "atom %d is linearly dependent on the current support" % index
            )
        qhat = v / vnorm
        l = self.length
        rmat = np.zeros((l + 1, l + 1))
        rmat[:l, :l] = self.rmat
        rmat[:l, l] = coef
        rmat[l, l] = vnorm
        # residue is orthogonal to span(q), so <qhat, y> = <qhat, residue>
        proj = float(qhat @ self.residue)
        return IncrementalFactorization(
            self.support + (int(index),),
            np.column_stack([self.q, qhat]),
            rmat,
            np.append(self.qty, proj),
            self.residue - proj * qhat,
        )

    def coefficients(self):
        """Least-squares coefficients of y over the support, support order."""
        if self.length == 0:
            return np.empty(0)
        return solve_triangular(self.rmat, self.qty)


def project(y, phi, support):
    """Least-squares projection of y onto the given columns of phi.

    Returns (z, r) with z the coefficients in support order and
    r = y - phi[:, support] @ z.  Raises SingularSupportError when the
    columns are rank deficient, ValueError on dimension mismatch.
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or y.ndim != 1 or phi.shape[0] != y.shape[0]:
        raise ValueError("phi must be (M, N) and y length M")
    support = [int(j) for j in support]
    if len(support) > phi.shape[0]:
        raise ValueError("support larger than the measurement size")
    fact = IncrementalFactorization.empty(y)
    for j in support:
        if not 0 <= j < phi.shape[1]:
            raise ValueError("support index %d out of range" % j)
        fact = fact.appended(j, phi[:, j])
    return fact.coefficients(), fact.residue
