"""Experiment specs: a flat ``key = value`` text format plus CLI overrides."""

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .experiments import rhs_vector, solve_sequence
from .multi_rhs import gmres_proj_sh
from .operators import bidiagonal_operator, load_matrix_market, planted_complex_operator, related_rhs
from .shifted import ConvergenceReport, SolverConfig, restarted_sh


@dataclass
class ExperimentSpec:
    matrix: str = "builtin:bidiag:1000"
    shifts: list = field(default_factory=lambda: [0.0, -0.4, -2.0])
    m: int = 25
    k: int = 10
    rtol: float = 1e-10
    max_mv: int = 10000
    nrhs: int = 1
    rhs_kind: str = "random"
    seed: int = 0
    extra_rtol: float = 1e-3
    proj_m: int = 15
    out: str = "report.csv"
    parallel_rhs: bool = False

    _types = {"matrix": str, "m": int, "k": int, "rtol": float, "max_mv": int, "nrhs": int,
              "rhs_kind": str, "seed": int, "extra_rtol": float, "proj_m": int, "out": str}

    def validate(self):
        if not self.shifts:
            raise InvalidInputError("shift list is empty")
        if self.nrhs < 1:
            raise InvalidInputError("nrhs must be >= 1")
        if not 0 <= self.k < self.m:
            raise InvalidInputError(f"need 0 <= k < m (m={self.m}, k={self.k})")
        if self.nrhs > 1 and self.k == 0:
            raise InvalidInputError("multiple right-hand sides need a deflation space (k >= 1)")
        if self.rtol <= 0 or self.extra_rtol <= 0:
            raise InvalidInputError("tolerances must be positive")
        self.related_eps()
        kind, _, rest = self.matrix.partition(":")
        if kind == "mm" and not os.path.exists(rest):
            raise InvalidInputError(f"matrix file {rest!r} does not exist")
        if kind not in ("mm", "builtin"):
            raise InvalidInputError(f"unknown matrix source {self.matrix!r}")
        return self

    def related_eps(self):
        if self.rhs_kind == "random":
            return None
        if self.rhs_kind.startswith("related:"):
            try:
                return float(self.rhs_kind.split(":", 1)[1])
            except ValueError:
                pass
        raise InvalidInputError(f"bad rhs kind {self.rhs_kind!r} (random | related:EPS)")

    def to_text(self):
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "shifts":
                v = ",".join(repr(complex(s)) if isinstance(s, complex) else repr(float(s)) for s in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, **overrides):
        kw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"line {lineno}: expected key = value")
            key, val = (t.strip() for t in line.split("=", 1))
            key = key.replace("-", "_")
            kw[key] = val
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(kw)

    @classmethod
    def from_mapping(cls, kw):
        spec = cls()
        for key, val in kw.items():
            if key == "shifts":
                spec.shifts = parse_shifts(val) if isinstance(val, str) else list(val)
            elif key == "parallel_rhs":
                spec.parallel_rhs = val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes")
            elif key in cls._types:
                try:
                    setattr(spec, key, cls._types[key](val))
                except ValueError:
                    raise InvalidInputError(f"bad value for {key}: {val!r}") from None
            else:
                raise InvalidInputError(f"unknown key {key!r}")
        return spec


def parse_shifts(text):
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            z = complex(tok.replace("i", "j"))
        except ValueError:
            raise InvalidInputError(f"bad shift {tok!r}") from None
        out.append(z.real if z.imag == 0 else z)
    return out


def build_operator(source, seed=0):
    kind, _, rest = source.partition(":")
    if kind == "mm":
        return load_matrix_market(rest)
    if kind == "builtin":
        name, _, size = rest.partition(":")
        try:
            n = int(size) if size else None
        except ValueError:
            raise InvalidInputError(f"bad size in {source!r}") from None
        if name == "bidiag":
            return bidiagonal_operator(n or 1000)
        if name == "planted":
            return planted_complex_operator(n or 2000, 10, seed)
    raise InvalidInputError(f"unknown matrix source {source!r}")


def run_spec(spec):
    """Solve every right-hand side described by ``spec``.

    Returns ``(report, all_converged)``.
    """
    spec.validate()
    A = build_operator(spec.matrix, spec.seed)
    field = "complex" if A.is_complex or any(isinstance(s, complex) for s in spec.shifts) else "real"
    eps = spec.related_eps()
    b1 = rhs_vector(A.n, spec.seed, 0, field)
    rhs = [b1] + [related_rhs(b1, eps, (spec.seed, j)) if eps is not None else rhs_vector(A.n, spec.seed, j, field)
                  for j in range(1, spec.nrhs)]
    first_cfg = SolverConfig(spec.m, spec.k, spec.rtol, spec.max_mv)
    if spec.nrhs == 1:
        res = restarted_sh(A, b1, spec.shifts, first_cfg)
        return res.report, res.all_converged
    proj_cfg = SolverConfig(spec.proj_m, 0, spec.rtol, spec.max_mv)
    if spec.parallel_rhs and eps is None:
        seq = solve_sequence(A, rhs[:1], spec.shifts, first_cfg, spec.extra_rtol, proj_cfg)
        defl, extra = seq.first.deflation, seq.extra

        def one(j):
            return gmres_proj_sh(A, rhs[j], spec.shifts, defl, extra, proj_cfg, rhs_index=j,
                                 report=ConvergenceReport())
        with ThreadPoolExecutor() as pool:
            outs = list(pool.map(one, range(1, spec.nrhs)))
        for o in outs:
            seq.report.extend(o.report)
        seq.subsequent = outs
    else:
        seq = solve_sequence(A, rhs, spec.shifts, first_cfg, spec.extra_rtol, proj_cfg, related=eps is not None)
    ok = seq.first.all_converged and all(r.all_converged for r in seq.subsequent)
    if seq.first.deflation is None:
        ok = False
    # corrected residuals must meet the tolerance too
    ok = ok and all(np.all(r.final_residuals <= 10 * spec.rtol * r.state.bnorm) for r in seq.subsequent)
    return seq.report, ok
