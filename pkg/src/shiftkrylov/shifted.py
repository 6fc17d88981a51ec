"""Restarted GMRES and FOM for families of shifted systems (A - s_i I) x_i = b.

All shifts share one Krylov subspace per cycle, built from the residual of the
base system (index 0). GMRES variants keep the other residuals collinear with
the base residual, r_i = beta_i r_0; FOM variants get collinearity for free.
The deflated (DR) variants restart with harmonic Ritz vectors (GMRES) or
regular Ritz vectors (FOM).
"""

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import smallmat
from .arnoldi import (
    DeflationSpace,
    deflated_restart,
    extend_arnoldi,
    harmonic_ritz,
    ritz,
    start_factorization,
)
from .errors import CycleSingularityError, DeflationError, InvalidInputError, SingularityError


class ShiftDivergenceWarning(UserWarning):
    """A non-base collinearity factor grew by more than 10x in one cycle."""


@dataclass
class SolverConfig:
    m: int
    k: int = 0
    rtol: float = 1e-8
    max_matvecs: int = 100_000
    variant: str = "gmres"

    def __post_init__(self):
        if not 0 <= self.k < self.m:
            raise InvalidInputError(f"need 0 <= k < m, got m={self.m}, k={self.k}")
        if self.rtol <= 0:
            raise InvalidInputError("rtol must be positive")
        if self.variant not in ("gmres", "fom"):
            raise InvalidInputError(f"unknown variant {self.variant!r}")


class ConvergenceReport:
    """Residual traces keyed by (rhs_index, shift_index), one row per record."""

    columns = ("rhs_index", "shift_index", "matvec", "relative_residual", "corrected")

    def __init__(self, rows=None):
        self.rows = list(rows or [])

    def add(self, rhs_index, shift_index, matvec, relres, corrected=False):
        self.rows.append((int(rhs_index), int(shift_index), int(matvec), float(relres), int(bool(corrected))))

    def extend(self, other):
        self.rows.extend(other.rows)

    def trace(self, rhs_index=0, shift_index=0, corrected=False):
        """(matvecs, relative residuals) arrays for one system."""
        sel = [(mv, rr) for j, i, mv, rr, c in self.rows
               if j == rhs_index and i == shift_index and c == int(corrected)]
        if not sel:
            return np.zeros(0, dtype=int), np.zeros(0)
        mv, rr = zip(*sel)
        return np.array(mv), np.array(rr)

    def to_csv(self, fh=None):
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.columns)
        for j, i, mv, rr, c in self.rows:
            w.writerow([j, i, mv, repr(rr), c])
        return fh.getvalue() if own else None

    @classmethod
    def from_csv(cls, fh):
        rd = csv.DictReader(fh)
        return cls((int(r["rhs_index"]), int(r["shift_index"]), int(r["matvec"]),
                    float(r["relative_residual"]), int(r["corrected"])) for r in rd)


@dataclass
class ShiftFamilyState:
    """Per-shift iterates plus the shared base residual.

    The residual of system i is ``beta[i] * r`` (plus, in the multi-RHS
    solvers, a tracked component in the deflation basis).
    """

    shifts: np.ndarray
    x: np.ndarray
    r: np.ndarray
    beta: np.ndarray
    bnorm: float
    converged: np.ndarray = None
    matvecs: int = 0
    resnorms: np.ndarray = None

    def __post_init__(self):
        ns = len(self.shifts)
        if self.converged is None:
            self.converged = np.zeros(ns, dtype=bool)
        if self.resnorms is None:
            self.resnorms = np.abs(self.beta) * np.linalg.norm(self.r)

    @classmethod
    def initial(cls, b, shifts, dtype=None):
        shifts = np.atleast_1d(np.asarray(shifts))
        if shifts.size == 0:
            raise InvalidInputError("shift list is empty")
        b = np.asarray(b)
        dtype = dtype or np.result_type(b.dtype, shifts.dtype, np.float64)
        bnorm = float(np.linalg.norm(b))
        if bnorm == 0 or not np.isfinite(bnorm):
            raise InvalidInputError("right-hand side must be finite and nonzero")
        return cls(shifts.astype(dtype), np.zeros((shifts.size, b.size), dtype=dtype),
                   b.astype(dtype), np.ones(shifts.size, dtype=dtype), bnorm)

    @property
    def active(self):
        """Indices still being updated; the base stays active while any
        other system is unconverged since it drives the subspace."""
        act = ~self.converged
        if act.any():
            act[0] = True
        return np.flatnonzero(act)


def _shifted_hbar(Hbar, sigma):
    M = Hbar.astype(np.result_type(Hbar.dtype, np.asarray(sigma).dtype), copy=True)
    m = M.shape[1]
    M[np.arange(m), np.arange(m)] -= sigma
    return M


def _triangular_or_raise(R, m, normM, index, sigma):
    diag = np.abs(np.diag(R[:m, :m]))
    if normM == 0 or np.any(diag <= smallmat.RANK_TOL * normM):
        raise CycleSingularityError(
            f"shift {index} (sigma={sigma}) is numerically a (harmonic) Ritz value of this cycle",
            index=index)


def gmres_sh_cycle(op, shifts, state, fact):
    """One GMRES-Sh cycle over the factorization ``fact`` (already holding the
    base residual in its span). Updates ``state`` in place and returns the
    base residual coefficient vector s in V_{m+1} coordinates."""
    m = fact.m
    Hbar, Vm1 = fact.Hbar, fact.Vm1
    c = Vm1.conj().T @ state.r
    active = state.active
    beta_new = state.beta.copy()
    D = {}

    if fact.breakdown:
        # invariant subspace: every shifted system is solved exactly
        Hm = fact.Hm
        for i in active:
            try:
                D[i] = smallmat.solve_square(Hm - shifts[i] * np.eye(m), state.beta[i] * c[:m])
            except SingularityError:
                raise CycleSingularityError(f"shift {i} is an eigenvalue of A", index=i) from None
            beta_new[i] = 0
        s = np.zeros(m + 1, dtype=c.dtype)
        s[m] = c[m]
    else:
        M1 = _shifted_hbar(Hbar, shifts[0])
        Q, R = smallmat.qr_factor(M1)
        _triangular_or_raise(R, m, np.linalg.norm(M1), 0, shifts[0])
        qc = Q.conj().T @ c
        D[0] = scipy.linalg.solve_triangular(R[:m], qc[:m])
        # least-squares residual taken from Q so its direction is accurate
        s = Q[:, m] * qc[m]
        for i in active:
            if i == 0:
                continue
            Mi = _shifted_hbar(Hbar, shifts[i])
            Q, R = smallmat.qr_factor(Mi)
            _triangular_or_raise(R, m, np.linalg.norm(Mi), i, shifts[i])
            qc = Q.conj().T @ c
            qs = Q.conj().T @ s
            if abs(qs[m]) <= np.finfo(float).eps * np.linalg.norm(c):
                raise CycleSingularityError(f"base residual vanished; shift {i} cannot be kept collinear", index=i)
            beta_new[i] = state.beta[i] * qc[m] / qs[m]
            D[i] = scipy.linalg.solve_triangular(R[:m], state.beta[i] * qc[:m] - beta_new[i] * qs[:m])
        beta_new[0] = 1

    _apply_cycle(state, fact, c, D, beta_new, active)
    return s


def fom_sh_cycle(op, shifts, state, fact):
    """One FOM-Sh cycle: a Galerkin solve per shift. Returns the base residual
    coefficient vector (supported on the last coordinate)."""
    m = fact.m
    Hbar, Hm = fact.Hbar, fact.Hm
    c = fact.Vm1.conj().T @ state.r
    active = state.active
    last = Hbar[m, :]
    beta_new = state.beta.copy()
    D, tail = {}, {}
    for i in active:
        try:
            D[i] = smallmat.solve_square(Hm - shifts[i] * np.eye(m), state.beta[i] * c[:m])
        except SingularityError:
            raise CycleSingularityError(
                f"shift {i} (sigma={shifts[i]}) is numerically a Ritz value of this cycle", index=i) from None
        tail[i] = state.beta[i] * c[m] - last @ D[i]
    s = np.zeros(m + 1, dtype=c.dtype)
    s[m] = tail[0]
    for i in active:
        if fact.breakdown:
            beta_new[i] = 0
        elif tail[0] == 0:
            raise CycleSingularityError("base residual vanished without breakdown", index=i)
        else:
            beta_new[i] = tail[i] / tail[0]
    beta_new[0] = 1
    _apply_cycle(state, fact, c, D, beta_new, active)
    return s


def _apply_cycle(state, fact, c, D, beta_new, active):
    Vm, Vm1 = fact.Vm, fact.Vm1
    Hbar = fact.Hbar
    for i in active:
        state.x[i] += Vm @ D[i]
    state.r = state.r - Vm1 @ (_shifted_hbar(Hbar, state.shifts[0]) @ D[0])
    for i in active:
        if i and abs(beta_new[i]) > 10 * abs(state.beta[i]) and abs(state.beta[i]) > 0:
            warnings.warn(f"collinearity factor of shift {i} grew {abs(beta_new[i] / state.beta[i]):.1f}x; "
                          "the base system should be the slowest converging one",
                          ShiftDivergenceWarning, stacklevel=3)
        # shortcut residual norm ||beta_i c - (Hbar - s_i I) d_i||
        state.resnorms[i] = np.linalg.norm(state.beta[i] * c - _shifted_hbar(Hbar, state.shifts[i]) @ D[i])
    state.beta[active] = beta_new[active]


@dataclass
class ShiftedSolveResult:
    x: np.ndarray
    converged: np.ndarray
    matvecs: int
    report: ConvergenceReport
    deflation: Optional[DeflationSpace]
    state: ShiftFamilyState
    cycles: int = 0

    @property
    def all_converged(self):
        return bool(self.converged.all())


def restarted_sh(op, b, shifts, cfg, *, rhs_index=0, report=None, state=None,
                 callback: Optional[Callable] = None):
    """Restarted GMRES-Sh / FOM-Sh, deflated when ``cfg.k > 0``.

    ``callback(state, fact)`` runs after every cycle, before the restart.
    Convergence is checked at cycle ends only; converged non-base systems are
    frozen. Returns a :class:`ShiftedSolveResult`; when deflating, its
    ``deflation`` holds V_{k+1}, Hbar_k from a final restart.
    """
    state = state or ShiftFamilyState.initial(b, shifts)
    shifts = state.shifts
    report = ConvergenceReport() if report is None else report
    cycle = 0
    fom = cfg.variant == "fom"
    fact = None
    last_fact, last_s = None, None
    _check_converged(state, cfg.rtol)
    for i in range(len(shifts)):
        report.add(rhs_index, i, state.matvecs, state.resnorms[i] / state.bnorm)

    while not state.converged.all():
        if fact is None:
            fact = start_factorization(state.r, cfg.m, dtype=state.x.dtype)
        if state.matvecs + (cfg.m - fact.m) > cfg.max_matvecs:
            break
        before = fact.m
        extend_arnoldi(op, fact, cfg.m)
        state.matvecs += fact.m - before
        s = (fom_sh_cycle if fom else gmres_sh_cycle)(op, shifts, state, fact)
        cycle += 1
        if callback is not None:
            callback(state, fact)
        _check_converged(state, cfg.rtol)
        for i in range(len(shifts)):
            report.add(rhs_index, i, state.matvecs, state.resnorms[i] / state.bnorm)
        last_fact, last_s = fact, s
        if fact.breakdown:
            state.converged[:] = True
            break
        fact = _restart(fact, s, cfg, shifts[0]) if cfg.k else None

    defl = None
    if cfg.k and last_fact is not None and not last_fact.breakdown:
        final = _restart(last_fact, last_s, cfg, shifts[0])
        if final is not None:
            defl = DeflationSpace.from_factorization(final)
    return ShiftedSolveResult(state.x, state.converged.copy(), state.matvecs, report, defl, state, cycle)


def _restart(fact, s, cfg, base_shift):
    try:
        if cfg.variant == "fom":
            rs = ritz(fact, cfg.k, base_shift)
        else:
            rs = harmonic_ritz(fact, cfg.k, base_shift)
        if rs.selection.size >= fact.m:
            raise DeflationError("conjugate-pair adjustment filled the subspace")
        return deflated_restart(fact, rs, s)
    except DeflationError as exc:
        warnings.warn(f"deflated restart failed ({exc}); restarting without deflation", stacklevel=3)
        return None


def _check_converged(state, rtol):
    state.converged |= state.resnorms <= rtol * state.bnorm


def gmres_sh(op, b, shifts, m, **kw):
    """GMRES(m)-Sh."""
    return restarted_sh(op, b, shifts, SolverConfig(m=m, **kw))


def fom_sh(op, b, shifts, m, **kw):
    """FOM(m)-Sh."""
    return restarted_sh(op, b, shifts, SolverConfig(m=m, variant="fom", **kw))


def gmres_dr_sh(op, b, shifts, cfg, **kw):
    """GMRES-DR(m,k)-Sh."""
    if cfg.k < 1:
        raise InvalidInputError("GMRES-DR needs k >= 1")
    return restarted_sh(op, b, shifts, SolverConfig(cfg.m, cfg.k, cfg.rtol, cfg.max_matvecs, "gmres"), **kw)


def fom_dr_sh(op, b, shifts, cfg, **kw):
    """FOM-DR(m,k)-Sh; k = 0 gives plain FOM(m)-Sh."""
    return restarted_sh(op, b, shifts, SolverConfig(cfg.m, cfg.k, cfg.rtol, cfg.max_matvecs, "fom"), **kw)
