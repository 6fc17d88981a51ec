"""Matrix-free operators, test matrices and right-hand-side generators.

Random vectors come from numpy's ``PCG64`` bit generator (``default_rng``),
which produces the same stream on every platform for a given seed.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError


@dataclass(frozen=True)
class LinearOperator:
    """The action v -> A v of an n x n matrix.

    ``matrix`` keeps the backing (sparse or dense) matrix when there is one;
    solvers only ever call :meth:`apply`.
    """

    n: int
    dtype: np.dtype
    matvec: Callable[[np.ndarray], np.ndarray]
    matrix: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def is_complex(self):
        return np.issubdtype(self.dtype, np.complexfloating)

    def apply(self, v):
        v = np.asarray(v)
        if v.shape != (self.n,):
            raise InvalidInputError(f"vector has shape {v.shape}, operator is {self.n}x{self.n}")
        return self.matvec(v)

    def __matmul__(self, v):
        return self.apply(v)

    def todense(self):
        """Materialise A column by column (test oracle, small n only)."""
        if self.matrix is not None:
            M = self.matrix
            return M.toarray() if sp.issparse(M) else np.array(M)
        out = np.empty((self.n, self.n), dtype=self.dtype)
        e = np.zeros(self.n, dtype=self.dtype)
        for j in range(self.n):
            e[j] = 1
            out[:, j] = self.matvec(e)
            e[j] = 0
        return out


def from_matrix(M):
    """Wrap a dense array or scipy sparse matrix."""
    if sp.issparse(M):
        M = sp.csr_matrix(M)
    else:
        M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"operator must be square, got {M.shape}")
    dtype = np.result_type(M.dtype, np.float64)
    return LinearOperator(M.shape[0], dtype, lambda v: M @ v, matrix=M)


def apply_shifted(op, sigma, v):
    """(A - sigma I) v."""
    return op.apply(v) - sigma * np.asarray(v)


def shifted(op, sigma):
    """The operator A - sigma I."""
    dtype = np.result_type(op.dtype, np.asarray(sigma).dtype)
    M = None
    if op.matrix is not None:
        M = op.matrix - sigma * (sp.identity(op.n, format="csr") if sp.issparse(op.matrix) else np.eye(op.n))
    return LinearOperator(op.n, dtype, lambda v: op.matvec(v) - sigma * v, matrix=M)


def bidiagonal_operator(n):
    """Upper bidiagonal test matrix: diagonal 0.1, 1, 2, ..., n-1 and ones on
    the superdiagonal. Its eigenvalues are the diagonal entries."""
    if n < 2:
        raise InvalidInputError("bidiagonal operator needs n >= 2")
    diag = np.arange(n, dtype=float)
    diag[0] = 0.1
    M = sp.diags([diag, np.ones(n - 1)], [0, 1], format="csr")
    return from_matrix(M)


def planted_complex_operator(n, n_small=10, seed=0, nonnormality=0.3):
    """Sparse complex non-normal matrix with ``n_small`` small eigenvalues.

    The bulk spectrum fills a disc in the right half plane; the planted
    eigenvalues sit near the origin with varying phases so the matrix behaves
    like a near-critical Wilson-Dirac operator at desk scale. Built as an upper
    triangular matrix (eigenvalues = diagonal) and scrambled by a random
    permutation similarity.
    """
    if n <= n_small:
        raise InvalidInputError("n must exceed the number of planted eigenvalues")
    rng = np.random.default_rng(seed)
    radius = rng.uniform(0, 1, n - n_small) ** 0.5
    phase = rng.uniform(0, 2 * np.pi, n - n_small)
    bulk = 1.5 + 1.2 * radius * np.exp(1j * phase)
    small_phase = rng.uniform(-np.pi / 3, np.pi / 3, n_small)
    small = np.linspace(0.005, 0.05, n_small) * np.exp(1j * small_phase)
    diag = np.concatenate([small, bulk])
    rng.shuffle(diag)
    sup = nonnormality * (rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)) / np.sqrt(2)
    T = sp.diags([diag, sup], [0, 1], format="csr", dtype=complex)
    perm = rng.permutation(n)
    P = sp.csr_matrix((np.ones(n), (np.arange(n), perm)), shape=(n, n))
    return from_matrix(P @ T @ P.T)


def random_rhs(n, seed, field="real"):
    """Standard normal vector; complex entries have unit variance split evenly
    between real and imaginary parts."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    rng = np.random.default_rng(seed)
    if field == "real":
        return rng.standard_normal(n)
    if field == "complex":
        return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    raise InvalidInputError(f"unknown field {field!r}")


def related_rhs(b1, eps, seed):
    """b1 + eps * u with u standard normal (real or complex to match b1)."""
    b1 = np.asarray(b1)
    field = "complex" if np.iscomplexobj(b1) else "real"
    return b1 + eps * random_rhs(b1.size, seed, field)


_MM_FIELDS = {"real": float, "complex": complex, "integer": float}


def load_matrix_market(path, max_dim=2**31 - 1):
    """Read a coordinate Matrix Market file (real/complex/integer, general)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InvalidInputError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise InvalidInputError(f"{path}:1: missing %%MatrixMarket header")
    obj, fmt, fld, sym = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise InvalidInputError(f"{path}:1: only 'matrix coordinate' is supported")
    if fld not in _MM_FIELDS:
        raise InvalidInputError(f"{path}:1: unsupported field {fld!r}")
    if sym != "general":
        raise InvalidInputError(f"{path}:1: unsupported symmetry {sym!r}")
    dtype = _MM_FIELDS[fld]

    lineno = 1
    while lineno < len(lines) and (not lines[lineno].strip() or lines[lineno].lstrip().startswith("%")):
        lineno += 1
    if lineno == len(lines):
        raise InvalidInputError(f"{path}: missing size line")
    try:
        nrows, ncols, nnz = (int(t) for t in lines[lineno].split())
    except ValueError:
        raise InvalidInputError(f"{path}:{lineno + 1}: bad size line {lines[lineno]!r}") from None
    if nrows != ncols:
        raise InvalidInputError(f"{path}:{lineno + 1}: matrix is not square ({nrows}x{ncols})")
    if nrows > max_dim or nrows < 1:
        raise InvalidInputError(f"{path}:{lineno + 1}: dimension {nrows} out of range")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=dtype)
    count = 0
    width = 4 if dtype is complex else 3
    for i in range(lineno + 1, len(lines)):
        text = lines[i].strip()
        if not text or text.startswith("%"):
            continue
        tok = text.split()
        if len(tok) != width or count >= nnz:
            raise InvalidInputError(f"{path}:{i + 1}: malformed entry {text!r}")
        try:
            r, c = int(tok[0]) - 1, int(tok[1]) - 1
            v = complex(float(tok[2]), float(tok[3])) if dtype is complex else float(tok[2])
        except ValueError:
            raise InvalidInputError(f"{path}:{i + 1}: malformed entry {text!r}") from None
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise InvalidInputError(f"{path}:{i + 1}: index ({r + 1}, {c + 1}) out of range")
        rows[count], cols[count], vals[count] = r, c, v
        count += 1
    if count != nnz:
        raise InvalidInputError(f"{path}: expected {nnz} entries, found {count}")
    M = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
    return from_matrix(M)


def write_matrix_market(path, M):
    """Write a sparse or dense matrix in coordinate general format."""
    M = sp.coo_matrix(M)
    cplx = np.iscomplexobj(M.data)
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {'complex' if cplx else 'real'} general\n")
        fh.write(f"{M.shape[0]} {M.shape[1]} {M.nnz}\n")
        for r, c, v in zip(M.row, M.col, M.data):
            if cplx:
                fh.write(f"{r + 1} {c + 1} {float(v.real)!r} {float(v.imag)!r}\n")
            else:
                fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")
