"""Matrix-free linear operators with explicit adjoints.

Every operator knows its shape, how to apply itself, and how to apply its
transpose.  The difference and blur operators are applied by direct index
arithmetic instead of a stored matrix; the random sparse operator is kept in
compressed-row form.
"""

import warnings

import numpy as np
from scipy import sparse


class LinearOperator:
    """Base class: a linear map ``R^cols -> R^rows`` with an explicit adjoint.

    Operators are immutable after construction, so a single instance may be
    shared by concurrent solves.
    """

    kind = "abstract"

    def __init__(self, rows, cols):
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def apply(self, x):
        raise NotImplementedError

    def apply_adjoint(self, y):
        raise NotImplementedError

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(
                f"{self.kind}: expected input of length {self.cols}, got shape {x.shape}"
            )
        return x

    def _check_output(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise ValueError(
                f"{self.kind}: expected adjoint input of length {self.rows}, got shape {y.shape}"
            )
        return y

    def __repr__(self):
        return f"<{type(self).__name__} {self.rows}x{self.cols} kind={self.kind}>"


class _Dense(LinearOperator):
    kind = "dense"

    def __init__(self, mat):
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        super().__init__(*mat.shape)
        self._mat = mat
        self._mat_t = np.ascontiguousarray(mat.T)

    def apply(self, x):
        return self._mat @ self._check_input(x)

    def apply_adjoint(self, y):
        return self._mat_t @ self._check_output(y)


class _SparseTriplet(LinearOperator):
    kind = "sparse-triplet"

    def __init__(self, rows, cols, row_idx, col_idx, values):
        super().__init__(rows, cols)
        coo = sparse.coo_array(
            (np.asarray(values, dtype=float), (row_idx, col_idx)),
            shape=(self.rows, self.cols),
        )
        self._csr = coo.tocsr()
        self._csr_t = coo.T.tocsr()

    @property
    def nnz(self):
        return self._csr.nnz

    def apply(self, x):
        return self._csr @ self._check_input(x)

    def apply_adjoint(self, y):
        return self._csr_t @ self._check_output(y)


class _ForwardDifference(LinearOperator):
    kind = "forward-difference"

    def __init__(self, n):
        if n < 2:
            raise ValueError("forward difference needs n >= 2")
        super().__init__(n - 1, n)

    def apply(self, x):
        x = self._check_input(x)
        return x[1:] - x[:-1]

    def apply_adjoint(self, y):
        y = self._check_output(y)
        out = np.zeros(self.cols)
        out[:-1] -= y
        out[1:] += y
        return out


class _BoxBlur(LinearOperator):
    """Non-uniform moving average with window half-width min(t-1, l, n-t).

    Rows with a positive half-width w average 2w+1 neighbours with weight
    1/(2w) each (row sum (2w+1)/(2w), deliberately not renormalized); rows
    whose half-width is zero pass the sample through unchanged.
    """

    kind = "nonuniform-box-blur"

    def __init__(self, n, l):
        if not 1 <= l <= n:
            raise ValueError(f"window half-width l={l} out of range for n={n}")
        super().__init__(n, n)
        t = np.arange(1, n + 1)
        w = np.minimum(np.minimum(t - 1, l), n - t)
        self._w = w
        self._lo = t - 1 - w  # first averaged index, 0-based
        self._hi = t - 1 + w  # last averaged index, 0-based
        self._wide = w > 0

    def apply(self, x):
        x = self._check_input(x)
        out = np.empty(self.rows)
        wide = self._wide
        prefix = np.concatenate(([0.0], np.cumsum(x)))
        out[wide] = (prefix[self._hi[wide] + 1] - prefix[self._lo[wide]]) / (
            2.0 * self._w[wide]
        )
        out[~wide] = x[~wide]
        return out

    def apply_adjoint(self, y):
        y = self._check_output(y)
        wide = self._wide
        # scatter each row's constant weight onto its index range via a
        # difference array, then prefix-sum
        diff = np.zeros(self.cols + 1)
        c = y[wide] / (2.0 * self._w[wide])
        np.add.at(diff, self._lo[wide], c)
        np.add.at(diff, self._hi[wide] + 1, -c)
        out = np.cumsum(diff[:-1])
        out[~wide] += y[~wide]
        return out


class _Identity(LinearOperator):
    kind = "identity"

    def __init__(self, n):
        super().__init__(n, n)

    def apply(self, x):
        return self._check_input(x).copy()

    def apply_adjoint(self, y):
        return self._check_output(y).copy()


class _Scaled(LinearOperator):
    kind = "scaled"

    def __init__(self, op, c):
        super().__init__(op.rows, op.cols)
        self._op = op
        self._c = float(c)

    def apply(self, x):
        return self._c * self._op.apply(x)

    def apply_adjoint(self, y):
        return self._c * self._op.apply_adjoint(y)


class _SumOfTwo(LinearOperator):
    kind = "sum-of-two"

    def __init__(self, a, b):
        if a.shape != b.shape:
            raise ValueError(f"summand shapes differ: {a.shape} vs {b.shape}")
        super().__init__(a.rows, a.cols)
        self._a = a
        self._b = b

    def apply(self, x):
        return self._a.apply(x) + self._b.apply(x)

    def apply_adjoint(self, y):
        return self._a.apply_adjoint(y) + self._b.apply_adjoint(y)


def dense(mat):
    """Operator backed by an explicit matrix."""
    return _Dense(mat)


def sparse_triplet(rows, cols, row_idx, col_idx, values):
    """Operator from triplet data (duplicate entries are summed)."""
    return _SparseTriplet(rows, cols, row_idx, col_idx, values)


def forward_difference(n):
    """First-order forward difference, shape (n-1) x n: (Ax)_i = x_{i+1} - x_i."""
    return _ForwardDifference(n)


def box_blur(n, l):
    """Non-uniform box blur of shape n x n with maximum half-width ``l``."""
    return _BoxBlur(n, l)


def identity(n):
    return _Identity(n)


def scaled(op, c):
    """The operator ``c * op``."""
    return _Scaled(op, c)


def op_sum(a, b):
    """The operator ``a + b``; both summands must have identical shapes."""
    return _SumOfTwo(a, b)


def random_sparse(m, n, seed):
    """Random sparse operator: entries nonzero independently with probability
    1/sqrt(m*n), nonzero values uniform on [0, 1].

    Deterministic for a fixed seed.
    """
    if m < 1 or n < 1:
        raise ValueError("need m, n >= 1")
    rng = np.random.default_rng(seed)
    mask = rng.random((m, n)) < 1.0 / np.sqrt(m * n)
    values = rng.random((m, n))
    row_idx, col_idx = np.nonzero(mask)
    return sparse_triplet(m, n, row_idx, col_idx, values[mask])


def op_norm_sq(op, max_iters=5000, tol=1e-10, seed=0):
    """Estimate ``||A^T A|| = ||A||^2`` by power iteration.

    Parameters
    ----------
    op : LinearOperator
    max_iters : int
        Iteration cap.  If the Rayleigh quotient has not stabilized by then,
        the best estimate so far is returned and a warning is emitted.
    tol : float
        Relative tolerance on the change of the Rayleigh quotient.
    seed : int
        Seed for the random start vector.

    Returns
    -------
    float
        Estimate of the largest eigenvalue of ``A^T A``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.cols)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        x = np.ones(op.cols)
        nx = np.sqrt(op.cols)
    x /= nx
    lam = 0.0
    for it in range(max_iters):
        z = op.apply_adjoint(op.apply(x))
        lam_new = float(x @ z)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            # x is in the null space; for the zero operator this is exact
            return 0.0
        x = z / nz
        if it > 0 and abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    warnings.warn(
        f"power iteration did not converge in {max_iters} iterations; "
        "returning the current Rayleigh quotient (may underestimate slightly)",
        RuntimeWarning,
    )
    return lam
