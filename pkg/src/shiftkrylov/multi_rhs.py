"""Second and subsequent right-hand sides: projection over the deflation
space from the first solve, alternated with GMRES(m)-Sh cycles.

Projection over approximate eigenvectors cannot keep shifted residuals
collinear. Instead the non-base residuals are kept equal to beta_i r plus a
component in the deflation basis (only along v_{k+1} when the full space is
used); that component is tracked in small coordinates, ignored while
iterating, and removed at the end with the solutions of the shifted systems
whose right-hand side is v_{k+1}.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import smallmat
from .arnoldi import DeflationSpace, extend_arnoldi, start_factorization
from .errors import DegenerateCorrectionError, InvalidInputError, SingularityError
from .operators import apply_shifted
from .shifted import (
    ConvergenceReport,
    ShiftFamilyState,
    SolverConfig,
    _shifted_hbar,
    gmres_sh_cycle,
)


class ProjectionSingularityError(SingularityError):
    """H_k - sigma_i I is singular for some shift."""


def minres_project(defl, x0, r0, shift=0.0, nvec=None):
    """Minimum-residual correction of x0 over span(V_k) for A - shift*I.

    Uses only the stored recurrence, no operator application. ``nvec``
    restricts the projection to the first ``nvec`` basis vectors.
    Returns ``(x, r, d)``.
    """
    j = defl.k if nvec is None else nvec
    c = defl.Vk1.conj().T @ r0
    M = _shifted_hbar(defl.Hbar_k[:, :j], shift)
    d, _ = smallmat.least_squares(M, c)
    x = x0 + defl.Vk1[:, :j] @ d
    r = r0 - defl.Vk1 @ (M @ d)
    return x, r, d


def shifted_project(defl, state, extra, nvec=None):
    """Project every active shifted system over the deflation space.

    The base system gets the minimum-residual projection. Each other system i
    solves the first ``nvec`` rows of (Hbar - s_i I) d_i = beta_i (Hbar - s_1 I) d_1,
    which leaves r_i = beta_i r + V_{k+1} e_i with e_i zero outside the ignored
    trailing rows. ``extra`` (ns x (k+1)) accumulates the e_i; beta is unchanged.
    Returns the per-shift e_i of this projection.
    """
    j = defl.k if nvec is None else nvec
    shifts = state.shifts
    Vk1 = defl.Vk1
    Hb = defl.Hbar_k[:, :j]
    x0 = state.x[0]
    state.x[0], state.r, d1 = minres_project(defl, x0, state.r, shifts[0], j)
    M1d1 = _shifted_hbar(Hb, shifts[0]) @ d1
    E = np.zeros((len(shifts), defl.k + 1), dtype=state.x.dtype)
    for i in state.active:
        if i == 0:
            continue
        t = state.beta[i] * M1d1
        Mi = _shifted_hbar(Hb, shifts[i])
        try:
            di = smallmat.solve_square(Mi[:j], t[:j])
        except SingularityError:
            raise ProjectionSingularityError(
                f"H_k - sigma I is singular for shift {i} (sigma={shifts[i]})", index=i) from None
        state.x[i] += Vk1[:, :j] @ di
        E[i] = t - Mi @ di
        E[i, :j] = 0
    extra += E
    return E


@dataclass(frozen=True)
class ExtraRhsSolutions:
    """Solutions s_i of (A - s_i I) s_i = v_{k+1} and their residual vectors."""

    s: np.ndarray
    residuals: np.ndarray
    gamma: np.ndarray
    matvecs: int = 0

    @property
    def residual_norms(self):
        return np.linalg.norm(self.residuals, axis=1)


def correct_solution(xtilde, r, s, v_last):
    """xtilde + (v_last^H r) s."""
    return xtilde + np.vdot(v_last, r) * s


@dataclass
class ProjSolveResult:
    x: np.ndarray
    xtilde: np.ndarray
    converged: np.ndarray
    matvecs: int
    report: ConvergenceReport
    state: ShiftFamilyState
    extra_components: np.ndarray
    final_residuals: np.ndarray
    uncorrected_residuals: np.ndarray
    correction_matvecs: int = 0
    cycles: int = 0

    @property
    def all_converged(self):
        return bool(self.converged.all())


def _explicit_residuals(op, b, state):
    return np.array([b - apply_shifted(op, s, x) for s, x in zip(state.shifts, state.x)])


def gmres_proj_sh(op, b, shifts, defl, extra, cfg, *, rhs_index=1, report=None, state=None,
                  nvec=None, correct=True, callback: Optional[Callable] = None):
    """GMRES(m)-Proj(k)-Sh for one right-hand side.

    ``defl`` may be None (plain GMRES(m)-Sh). ``extra`` (an
    :class:`ExtraRhsSolutions`) is needed for the final correction of the
    non-base systems; without it the result is left uncorrected. ``state``
    lets a caller supply collinear initial iterates (related right-hand sides).
    ``callback(state, extra_components)`` runs after every cycle.
    """
    state = state or ShiftFamilyState.initial(b, shifts)
    b = np.asarray(b, dtype=state.x.dtype)
    ns = len(state.shifts)
    report = ConvergenceReport() if report is None else report
    use_defl = defl is not None and defl.k > 0
    kk = defl.k + 1 if use_defl else 1
    E = np.zeros((ns, kk), dtype=state.x.dtype)
    cycles = 0

    def record():
        # corrected=0: residual including the tracked deflation-basis part;
        # corrected=1: what the final correction would leave at this point
        for i in range(ns):
            if i == 0 or not use_defl:
                report.add(rhs_index, i, state.matvecs, state.resnorms[i] / state.bnorm)
                continue
            ri = state.beta[i] * state.r + defl.Vk1 @ E[i]
            report.add(rhs_index, i, state.matvecs, np.linalg.norm(ri) / state.bnorm)
            if extra is not None:
                g = np.vdot(defl.v_last, ri)
                rc = ri - g * (defl.v_last - extra.residuals[i])
                report.add(rhs_index, i, state.matvecs, np.linalg.norm(rc) / state.bnorm, corrected=True)

    state.converged |= state.resnorms <= cfg.rtol * state.bnorm
    record()
    while not state.converged.all():
        if state.matvecs + cfg.m > cfg.max_matvecs:
            break
        if use_defl:
            shifted_project(defl, state, E, nvec)
        fact = start_factorization(state.r, cfg.m, dtype=state.x.dtype)
        extend_arnoldi(op, fact, cfg.m)
        state.matvecs += fact.m
        gmres_sh_cycle(op, state.shifts, state, fact)
        cycles += 1
        if callback is not None:
            callback(state, E)
        state.converged |= state.resnorms <= cfg.rtol * state.bnorm
        record()
        if fact.breakdown:
            break

    xtilde = state.x.copy()
    R = _explicit_residuals(op, b, state)
    unc = np.linalg.norm(R, axis=1)
    x = xtilde.copy()
    final = unc.copy()
    if correct and use_defl and extra is not None:
        for i in range(1, ns):
            g = np.vdot(defl.v_last, R[i])
            x[i] = xtilde[i] + g * extra.s[i]
            final[i] = np.linalg.norm(R[i] - g * (defl.v_last - extra.residuals[i]))
    for i in range(1, ns):
        report.add(rhs_index, i, state.matvecs, final[i] / state.bnorm, corrected=True)
    return ProjSolveResult(x, xtilde, state.converged.copy(), state.matvecs, report, state, E,
                           final, unc, correction_matvecs=ns, cycles=cycles)


def solve_extra_rhs(op, shifts, defl, extra_rtol, m, max_matvecs=100_000, report=None, rhs_index=-1):
    """Solve (A - s_i I) s_i = v_{k+1} for all shifts and apply the
    correction s_i = s~_i / (1 - gamma_i), gamma_i = v_{k+1}^H r_i."""
    if extra_rtol <= 0:
        raise InvalidInputError("extra_rtol must be positive")
    v = defl.v_last
    cfg = SolverConfig(m=m, rtol=extra_rtol, max_matvecs=max_matvecs)
    res = gmres_proj_sh(op, v, shifts, defl, None, cfg, rhs_index=rhs_index, report=report, correct=False)
    ns = len(res.state.shifts)
    R = _explicit_residuals(op, v, res.state)
    s = np.empty_like(res.xtilde)
    resid = np.empty_like(R)
    gamma = np.empty(ns, dtype=R.dtype)
    for i in range(ns):
        gamma[i] = np.vdot(v, R[i])
        if abs(1 - gamma[i]) < 1e-12:
            raise DegenerateCorrectionError(f"1 - gamma vanishes for shift {i}")
        s[i] = res.xtilde[i] / (1 - gamma[i])
        # residual of the corrected solution, no extra operator application
        resid[i] = (R[i] - gamma[i] * v) / (1 - gamma[i])
    return ExtraRhsSolutions(s, resid, gamma, res.matvecs)


def related_rhs_project(X, B, bj, tol=1e-12):
    """Project a new right-hand side over previous solutions.

    ``X`` has shape (ns, n, j-1) (previous solutions per shift), ``B`` is
    n x (j-1). Solves min ||bj - B d|| once (the same d serves every shift)
    and returns ``(xtilde, r, d)`` with xtilde[i] = X[i] d and the shared
    residual r = bj - B d. Trailing columns of B that make it numerically
    rank deficient are dropped with a warning.
    """
    X = np.asarray(X)
    B = np.asarray(B)
    bj = np.asarray(bj)
    if B.ndim != 2 or B.shape[0] != bj.size or X.shape[1:] != B.shape:
        raise InvalidInputError(f"inconsistent shapes X{X.shape}, B{B.shape}, b{bj.shape}")
    Q, R = scipy.linalg.qr(B, mode="economic")
    diag = np.abs(np.diag(R))
    ok = diag > tol * max(diag.max(initial=0.0), np.finfo(float).tiny)
    keep = int(np.argmin(ok)) if not ok.all() else B.shape[1]
    if keep < B.shape[1]:
        warnings.warn(f"previous right-hand sides are nearly dependent; using the first {keep} of {B.shape[1]}",
                      stacklevel=2)
    dtype = np.result_type(B, bj)
    d = np.zeros(B.shape[1], dtype=dtype)
    if keep:
        d[:keep] = scipy.linalg.solve_triangular(R[:keep, :keep], Q[:, :keep].conj().T @ bj)
    r = bj - B @ d
    xt = np.einsum("inj,j->in", X, d)
    return xt, r, d


def related_state(X, B, bj, shifts):
    """Collinear starting state (beta = 1, shared residual) from
    :func:`related_rhs_project`."""
    xt, r, d = related_rhs_project(X, B, bj)
    st = ShiftFamilyState.initial(bj, shifts)
    st.x[:] = xt
    st.r = r.astype(st.x.dtype)
    st.resnorms = np.abs(st.beta) * np.linalg.norm(st.r)
    return st, d
