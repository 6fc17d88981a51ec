"""Arnoldi factorizations A V_m = V_{m+1} Hbar_m, Ritz extraction and the
deflated restart used by the DR solvers."""

from dataclasses import dataclass

import numpy as np

from . import smallmat
from .errors import DeflationError, InvalidInputError, SingularityError

BREAKDOWN_TOL = 1e-14


@dataclass
class KrylovFactorization:
    """Storage for V (n x (mmax+1)) and Hbar ((mmax+1) x mmax).

    Only the leading ``m+1`` columns of ``V`` and the leading ``(m+1) x m``
    block of ``H`` are meaningful. ``k`` is the size of the full leading block
    left by a deflated restart (0 for plain Arnoldi).
    """

    V: np.ndarray
    H: np.ndarray
    m: int = 0
    k: int = 0
    breakdown: bool = False

    @property
    def mmax(self):
        return self.H.shape[1]

    @property
    def Vm1(self):
        return self.V[:, : self.m + 1]

    @property
    def Vm(self):
        return self.V[:, : self.m]

    @property
    def Hbar(self):
        return self.H[: self.m + 1, : self.m]

    @property
    def Hm(self):
        return self.H[: self.m, : self.m]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.V)


def start_factorization(v0, mmax, dtype=None):
    """Empty factorization with first basis vector v0/||v0||."""
    v0 = np.asarray(v0)
    dtype = np.result_type(v0.dtype, np.float64) if dtype is None else dtype
    beta = np.linalg.norm(v0)
    if beta == 0 or not np.isfinite(beta):
        raise InvalidInputError("starting vector must be finite and nonzero")
    V = np.zeros((v0.size, mmax + 1), dtype=dtype)
    V[:, 0] = v0 / beta
    return KrylovFactorization(V, np.zeros((mmax + 1, mmax), dtype=dtype))


def _orthonormal_filler(V, j, dtype):
    # Arbitrary unit vector orthogonal to V[:, :j], so V stays orthonormal
    # after a happy breakdown (its H coefficient is zero). With j = n there is
    # no room left and the column stays zero.
    if j >= V.shape[0]:
        return np.zeros(V.shape[0], dtype=dtype)
    rng = np.random.default_rng(j)
    w = rng.standard_normal(V.shape[0]).astype(dtype)
    for _ in range(2):
        w -= V[:, :j] @ (V[:, :j].conj().T @ w)
    return w / np.linalg.norm(w)


def extend_arnoldi(op, fact, target_m):
    """Grow ``fact`` in place to size ``target_m`` (classical Gram-Schmidt
    with one reorthogonalisation pass).

    Sets ``fact.breakdown`` and stops early when the new direction vanishes;
    ``fact.m`` then holds the achieved size. Returns ``fact``.
    """
    if target_m > fact.mmax:
        raise InvalidInputError(f"target size {target_m} exceeds storage {fact.mmax}")
    V, H = fact.V, fact.H
    if op.is_complex and fact.is_real:
        raise InvalidInputError("complex operator needs a complex factorization (pass dtype=complex)")
    fact.breakdown = False
    for j in range(fact.m, target_m):
        w = op.apply(V[:, j]).astype(V.dtype, copy=False)
        wnorm0 = np.linalg.norm(w)
        Vj = V[:, : j + 1]
        h = Vj.conj().T @ w
        w = w - Vj @ h
        h2 = Vj.conj().T @ w
        w -= Vj @ h2
        h += h2
        beta = np.linalg.norm(w)
        H[: j + 1, j] = h
        fact.m = j + 1
        if beta <= BREAKDOWN_TOL * max(wnorm0, np.finfo(float).tiny):
            H[j + 1, j] = 0
            V[:, j + 1] = _orthonormal_filler(V, j + 1, V.dtype)
            fact.breakdown = True
            return fact
        H[j + 1, j] = beta
        V[:, j + 1] = w / beta
    return fact


@dataclass
class RitzSet:
    """Ritz or harmonic Ritz pairs of one factorization.

    ``values`` are in the coordinates of A's spectrum, ordered by distance to
    ``shift``; ``vectors`` holds the unit coefficient vectors g_j as columns
    (the approximate eigenvectors are V_m g_j). ``selection`` indexes the kept
    pairs.
    """

    values: np.ndarray
    vectors: np.ndarray
    selection: np.ndarray
    shift: complex = 0.0
    kind: str = "harmonic"


HarmonicRitzSet = RitzSet


def _select(values, vectors, k, shift, pair_conjugates, kind):
    order = np.argsort(np.abs(values - shift), kind="stable")
    values, vectors = values[order], vectors[:, order]
    if pair_conjugates:
        # conjugate pairs must be kept together for a real restart basis
        kk = k
        kept = values[:kk]
        while kk < values.size:
            scale = max(np.abs(values).max(), 1.0)
            cplx = np.abs(kept.imag) > 1e-12 * scale
            npos, nneg = np.sum(kept.imag[cplx] > 0), np.sum(kept.imag[cplx] < 0)
            if npos == nneg:
                break
            kk += 1
            kept = values[:kk]
        k = kk
    return RitzSet(values, vectors, np.arange(k), shift, kind)


def ritz_values(fact):
    """Eigenvalues of H_m."""
    if fact.m < 1:
        raise InvalidInputError("factorization is empty")
    return smallmat.small_eig(fact.Hm)[0]


def ritz(fact, k, shift=0.0):
    """Regular Ritz pairs of H_m, the k nearest ``shift`` selected."""
    if not 1 <= k <= fact.m:
        raise InvalidInputError(f"need 1 <= k <= m, got k={k}, m={fact.m}")
    w, G = smallmat.small_eig(fact.Hm)
    real = fact.is_real and np.imag(shift) == 0
    return _select(w, G, k, shift, real, "ritz")


def harmonic_ritz(fact, k, shift=0.0):
    """Harmonic Ritz pairs of A - shift*I from the factorization.

    Solves (H + H^{-H} l^H l) g = theta g with H = H_m - shift*I and l the last
    row of Hbar_m; returns values shifted back to A's spectrum, the k smallest
    in modulus (relative to ``shift``) selected.
    """
    m = fact.m
    if not 1 <= k <= m:
        raise InvalidInputError(f"need 1 <= k <= m, got k={k}, m={m}")
    Hs = fact.Hm - shift * np.eye(m)
    last = fact.Hbar[m, :]
    try:
        f = smallmat.solve_square(Hs.conj().T, last.conj())
    except SingularityError as exc:
        raise DeflationError("H_m is singular; harmonic Ritz values undefined") from exc
    theta, G = smallmat.small_eig(Hs + np.outer(f, last))
    real = fact.is_real and np.imag(shift) == 0
    return _select(theta + shift, G, k, shift, real, "harmonic")


def _realify(G, values):
    cols = []
    scale = max(np.abs(values).max(), 1.0)
    for j, th in enumerate(values):
        if abs(th.imag) <= 1e-12 * scale:
            cols.append(G[:, j].real)
        elif th.imag > 0:
            cols.extend([G[:, j].real, G[:, j].imag])
    return np.column_stack(cols)


def deflated_restart(fact, ritzset, residual_coeffs):
    """Restart onto span{V_m g_1, ..., V_m g_k, r} in small coordinates.

    ``residual_coeffs`` is the current residual expressed in V_{m+1}. Returns
    a new factorization of size k (same storage size) with
    A V_k = V_{k+1} Hbar_k and r in span(V_{k+1}); k may exceed the requested
    count when conjugate pairs were kept together.
    """
    m = fact.m
    sel = ritzset.selection
    G = ritzset.vectors[:, sel]
    if fact.is_real:
        G = _realify(G, ritzset.values[sel])
    k = G.shape[1]
    if k >= m:
        raise InvalidInputError(f"deflation size {k} must be below m={m}")
    Pk, _ = np.linalg.qr(G)
    P = np.zeros((m + 1, k + 1), dtype=fact.V.dtype)
    P[:m, :k] = Pk
    p = np.asarray(residual_coeffs, dtype=fact.V.dtype).copy()
    for _ in range(2):
        p -= P[:, :k] @ (P[:, :k].conj().T @ p)
    pnorm = np.linalg.norm(p)
    if pnorm == 0:
        raise DeflationError("residual lies in the span of the deflation vectors")
    P[:, k] = p / pnorm

    new = KrylovFactorization(np.zeros_like(fact.V), np.zeros_like(fact.H), m=k, k=k)
    new.V[:, : k + 1] = fact.Vm1 @ P
    new.H[: k + 1, :k] = P.conj().T @ fact.Hbar @ P[:m, :k]
    return new


@dataclass(frozen=True)
class DeflationSpace:
    """Frozen A V_k = V_{k+1} Hbar_k from the first right-hand side."""

    Vk1: np.ndarray
    Hbar_k: np.ndarray

    @property
    def k(self):
        return self.Hbar_k.shape[1]

    @property
    def Vk(self):
        return self.Vk1[:, : self.k]

    @property
    def Hk(self):
        return self.Hbar_k[: self.k, :]

    @property
    def v_last(self):
        return self.Vk1[:, self.k]

    @classmethod
    def from_factorization(cls, fact):
        k = fact.m
        return cls(fact.V[:, : k + 1].copy(), fact.H[: k + 1, :k].copy())

    def eigen_residuals(self):
        """Ritz values of H_k (nearest zero first) and the residual norms
        ||A y - theta y|| of the corresponding unit approximate eigenvectors."""
        w, G = smallmat.small_eig(self.Hk)
        order = np.argsort(np.abs(w), kind="stable")
        w, G = w[order], G[:, order]
        Gp = np.vstack([G, np.zeros((1, self.k))])
        res = np.linalg.norm(self.Hbar_k @ G - Gp * w, axis=0)
        return w, res
