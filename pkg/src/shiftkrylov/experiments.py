"""Desk-scale reproductions of the shifted / multi-RHS experiments.

Every function is deterministic for a given seed and returns plain Python
data (dicts, lists, ConvergenceReport) for the CLI to write out.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .arnoldi import extend_arnoldi, harmonic_ritz, ritz, start_factorization
from .multi_rhs import gmres_proj_sh, related_state, solve_extra_rhs
from .operators import bidiagonal_operator, planted_complex_operator, random_rhs, related_rhs
from .shifted import ConvergenceReport, SolverConfig, restarted_sh

EXAMPLE_SHIFTS = (0.0, -0.4, -2.0)


def first_to(report, rhs_index, shift_index, rtol, corrected=False):
    """First matvec count at which a trace is at or below rtol (None if never)."""
    mv, rr = report.trace(rhs_index, shift_index, corrected)
    hit = np.flatnonzero(rr <= rtol)
    return int(mv[hit[0]]) if hit.size else None


def rhs_vector(n, seed, j, field="real"):
    return random_rhs(n, (seed, j), field)


def example1(seed=0, n=1000, m=25, k=10, rtol=1e-10, max_matvecs=3000, callback=None):
    """GMRES(m)-Sh versus GMRES-DR(m,k)-Sh on the bidiagonal matrix."""
    A = bidiagonal_operator(n)
    b = rhs_vector(n, seed, 0)
    dr = restarted_sh(A, b, EXAMPLE_SHIFTS, SolverConfig(m, k, rtol, max_matvecs), callback=callback)
    plain = restarted_sh(A, b, EXAMPLE_SHIFTS, SolverConfig(m, 0, rtol, max_matvecs), rhs_index=0,
                         callback=callback)
    return {"dr": dr, "plain": plain}


def ritz_dump(shift, m, cycles, n=1000, seed=0, nearest=10, target=None):
    """Per-cycle harmonic Ritz values (from GMRES(m) cycles with base ``shift``)
    and regular Ritz values (from FOM(m) cycles), the ``nearest`` of each
    closest to ``target`` (default: the base shift), in A's spectrum
    coordinates.

    Returns a list of (cycle, kind, value) tuples.
    """
    A = bidiagonal_operator(n)
    b = rhs_vector(n, seed, 0)
    target = shift if target is None else target
    rows = []
    for variant, kind in (("gmres", "harmonic"), ("fom", "ritz")):
        count = [0]

        def grab(state, fact, _kind=kind, _count=count):
            extract = harmonic_ritz if _kind == "harmonic" else ritz
            vals = extract(fact, fact.m, shift).values
            vals = vals[np.argsort(np.abs(vals - target), kind="stable")]
            rows.extend((_count[0], _kind, complex(th)) for th in vals[:nearest])
            _count[0] += 1

        cfg = SolverConfig(m, 0, 1e-300, m * cycles, variant)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            restarted_sh(A, b, [shift], cfg, callback=grab)
    return rows


def table4_1(seed=0, first_rtol=1e-10, ks=(10, 8, 6, 4, 2), n=1000, second_m=15, second_rtol=1e-10):
    """Projection over the first j approximate eigenvectors (no correction).

    Rows: (k, eigenvector residual of the k-th vector, matvecs for the base
    system of the second RHS, worst non-base uncorrected residual norm).
    """
    A = bidiagonal_operator(n)
    first = restarted_sh(A, rhs_vector(n, seed, 0), EXAMPLE_SHIFTS, SolverConfig(25, 10, first_rtol, 5000))
    defl = first.deflation
    _, eigres = defl.eigen_residuals()
    b2 = rhs_vector(n, seed, 1)
    rows = []
    for j in ks:
        res = gmres_proj_sh(A, b2, EXAMPLE_SHIFTS, defl, None, SolverConfig(second_m, 0, second_rtol, 5000),
                            nvec=j, correct=False)
        rows.append({"k": j, "eig_res": float(eigres[j - 1]), "mvps": res.matvecs,
                     "lin_res": float(res.uncorrected_residuals[1:].max())})
    return {"first_matvecs": first.matvecs, "rows": rows}


def table4_2(seed=0, rtols=(1e-6, 1e-8, 1e-10), extra_rtols=(1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1), n=1000,
             shifts=(0.0, -2.0)):
    """Accuracy of the corrected sigma=-2 second-RHS solution versus the
    tolerance of the extra right-hand side solve. Residual norms are absolute."""
    A = bidiagonal_operator(n)
    rows = []
    for rt in rtols:
        first = restarted_sh(A, rhs_vector(n, seed, 0), shifts, SolverConfig(25, 10, rt, 5000))
        defl = first.deflation
        b2 = rhs_vector(n, seed, 1)
        row = {"rtol": rt, "before": None, "after": {}}
        for ert in extra_rtols:
            extra = solve_extra_rhs(A, shifts, defl, ert, 15)
            res = gmres_proj_sh(A, b2, shifts, defl, extra, SolverConfig(15, 0, rt, 5000))
            row["before"] = float(res.uncorrected_residuals[-1])
            row["after"][ert] = float(res.final_residuals[-1])
        rows.append(row)
    return rows


@dataclass
class SequenceResult:
    report: ConvergenceReport
    first: object
    extra: object
    subsequent: list = field(default_factory=list)

    @property
    def subsequent_matvecs(self):
        return [r.matvecs for r in self.subsequent]


def solve_sequence(A, rhs, shifts, first_cfg, extra_rtol, proj_cfg, related=False, deflate=True):
    """First RHS with GMRES-DR-Sh, the extra RHS v_{k+1}, then every later RHS
    with GMRES-Proj-Sh (optionally after projecting over earlier solutions).

    Report rhs indices: 0 first, -1 extra, 1.. subsequent.
    """
    report = ConvergenceReport()
    first = restarted_sh(A, rhs[0], shifts, first_cfg, rhs_index=0, report=report)
    defl = first.deflation if deflate else None
    extra = solve_extra_rhs(A, shifts, defl, extra_rtol, proj_cfg.m, report=report) if defl is not None else None
    sols = [np.array(first.x)]
    out = []
    for j in range(1, len(rhs)):
        state = None
        if related:
            X = np.stack(sols, axis=2)
            B = np.column_stack(rhs[:j])
            state, _ = related_state(X, B, rhs[j], shifts)
        res = gmres_proj_sh(A, rhs[j], shifts, defl, extra, proj_cfg, rhs_index=j, report=report, state=state)
        sols.append(np.array(res.x))
        out.append(res)
    return SequenceResult(report, first, extra, out)


def example5(seed=0, nrhs=2, extra_rtol=1e-6, rtol=1e-6, n=1000, shifts=(0.0, -2.0), related_eps=None):
    A = bidiagonal_operator(n)
    b1 = rhs_vector(n, seed, 0)
    rhs = [b1]
    for j in range(1, nrhs):
        rhs.append(related_rhs(b1, related_eps, (seed, j)) if related_eps is not None else rhs_vector(n, seed, j))
    return solve_sequence(A, rhs, shifts, SolverConfig(25, 10, rtol, 5000), extra_rtol,
                          SolverConfig(15, 0, rtol, 5000), related=related_eps is not None)


def example8(seed=0, nrhs=10, eps=1e-4, rtol=1e-6, extra_rtol=1e-3, n=1000, shifts=(0.0, -2.0)):
    """Related right-hand sides with and without projection over previous solutions."""
    A = bidiagonal_operator(n)
    b1 = rhs_vector(n, seed, 0)
    rhs = [b1] + [related_rhs(b1, eps, (seed, j)) for j in range(1, nrhs)]
    first_cfg = SolverConfig(25, 10, rtol, 5000)
    proj_cfg = SolverConfig(15, 0, rtol, 5000)
    return {"related": solve_sequence(A, rhs, shifts, first_cfg, extra_rtol, proj_cfg, related=True),
            "plain": solve_sequence(A, rhs, shifts, first_cfg, extra_rtol, proj_cfg, related=False)}


def qcd_substitute(seed=0, n=2000, shifts=(0.0, -0.3, -0.5), rtol=1e-7):
    """Stand-in for the Wilson-Dirac run: complex non-normal matrix with ten
    small planted eigenvalues; second RHS with GMRES(20)-Proj(30)-Sh versus
    GMRES(20)-Sh."""
    A = planted_complex_operator(n, 10, seed)
    rhs = [rhs_vector(n, seed, j, "complex") for j in range(2)]
    first_cfg = SolverConfig(50, 30, 1e-8, 20000)
    proj = solve_sequence(A, rhs, shifts, first_cfg, 1e-7, SolverConfig(20, 0, rtol, 20000))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plain = restarted_sh(A, rhs[1], shifts, SolverConfig(20, 0, rtol, 20000), rhs_index=1)
    return {"proj": proj, "plain": plain}
