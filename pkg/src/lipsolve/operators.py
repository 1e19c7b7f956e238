"""Linear measurement operators: dense matrices, identity, and the
orthonormal 2-D inverse-DCT dictionary."""

from __future__ import annotations

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DimensionMismatch, SingularSystem


class LinearOperator:
    """Forward/adjoint pair between signal space and measurement space.

    Subclasses set ``signal_dim``, ``measurement_dim`` and ``kind`` and
    implement ``apply`` / ``adjoint``.
    """

    signal_dim: int
    measurement_dim: int
    kind: str

    def apply(self, h):
        raise NotImplementedError

    def adjoint(self, v):
        raise NotImplementedError

    def _check_signal(self, h):
        if h.shape != (self.signal_dim,):
            raise DimensionMismatch(
                f"expected signal of length {self.signal_dim}, got shape {h.shape}"
            )

    def _check_measurement(self, v):
        if v.shape != (self.measurement_dim,):
            raise DimensionMismatch(
                f"expected measurement of length {self.measurement_dim}, got shape {v.shape}"
            )

    @property
    def is_unitary(self):
        return False

    def gram_extreme_eigs(self):
        """(min, max) eigenvalues of adjoint∘apply."""
        raise NotImplementedError

    def op_norm(self):
        return float(np.sqrt(self.gram_extreme_eigs()[1]))


class IdentityOperator(LinearOperator):
    kind = "identity"

    def __init__(self, dim):
        self.signal_dim = int(dim)
        self.measurement_dim = int(dim)

    def apply(self, h):
        h = np.asarray(h, dtype=float)
        self._check_signal(h)
        return h.copy()

    def adjoint(self, v):
        v = np.asarray(v, dtype=float)
        self._check_measurement(v)
        return v.copy()

    @property
    def is_unitary(self):
        return True

    def gram_extreme_eigs(self):
        return (1.0, 1.0)


class DenseOperator(LinearOperator):
    kind = "dense-matrix"

    def __init__(self, matrix):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.measurement_dim, self.signal_dim = self.matrix.shape
        self._gram_eigs = None

    def apply(self, h):
        h = np.asarray(h, dtype=float)
        self._check_signal(h)
        return self.matrix @ h

    def adjoint(self, v):
        v = np.asarray(v, dtype=float)
        self._check_measurement(v)
        return self.matrix.T @ v

    def gram_extreme_eigs(self):
        if self._gram_eigs is None:
            w = np.linalg.eigvalsh(self.matrix.T @ self.matrix)
            self._gram_eigs = (float(w[0]), float(w[-1]))
        return self._gram_eigs


class InverseDct2Operator(LinearOperator):
    """Orthonormal 2-D inverse DCT on m-by-m patches, flattened row-major.

    apply = synthesis (coefficients -> pixels), adjoint = analysis.  The
    orthonormal scaling makes adjoint∘apply the identity.
    """

    kind = "inverse-dct2"

    def __init__(self, patch_side):
        self.patch_side = int(patch_side)
        self.signal_dim = self.patch_side**2
        self.measurement_dim = self.patch_side**2

    def apply(self, h):
        h = np.asarray(h, dtype=float)
        self._check_signal(h)
        m = self.patch_side
        return scipy.fft.idctn(h.reshape(m, m), norm="ortho").ravel()

    def adjoint(self, v):
        v = np.asarray(v, dtype=float)
        self._check_measurement(v)
        m = self.patch_side
        return scipy.fft.dctn(v.reshape(m, m), norm="ortho").ravel()

    @property
    def is_unitary(self):
        return True

    def gram_extreme_eigs(self):
        return (1.0, 1.0)


def load_dense_csv(path):
    """Load a dense operator from CSV: header line "rows,cols" followed by
    one comma-separated row of entries per line."""
    with open(path) as fh:
        header = fh.readline().strip()
        try:
            rows, cols = (int(tok) for tok in header.split(","))
        except ValueError as exc:
            raise ValueError(f"bad CSV operator header {header!r}") from exc
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(
            f"CSV operator body has shape {data.shape}, header says ({rows}, {cols})"
        )
    return DenseOperator(data)


def save_dense_csv(path, matrix):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{matrix.shape[0]},{matrix.shape[1]}\n")
        np.savetxt(fh, matrix, delimiter=",")


def least_squares_init(op, x, rcond=1e-12):
    """Minimum-l2-norm least squares solution of ||x - op(f)||.

    Unitary operators reduce to a single adjoint application.  Dense
    operators use a Cholesky solve of the normal equations with a
    truncated-pseudoinverse fallback near rank deficiency.
    """
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise SingularSystem("least squares initialization needs a nonzero x")
    if op.is_unitary:
        return op.adjoint(x)
    a = op.matrix
    try:
        if a.shape[0] >= a.shape[1]:
            c = scipy.linalg.cho_factor(a.T @ a)
            f = scipy.linalg.cho_solve(c, a.T @ x)
        else:
            # wide system: min-norm solution through the small Gram matrix
            c = scipy.linalg.cho_factor(a @ a.T)
            f = a.T @ scipy.linalg.cho_solve(c, x)
    except scipy.linalg.LinAlgError:
        f = np.linalg.pinv(a, rcond=rcond) @ x
    if not np.all(np.isfinite(f)):
        raise SingularSystem("normal equations produced non-finite solution")
    return f
