"""Declarative SDPs over block-supported matrix variables.

Problems are plain data; :func:`solve` hands them to one reference conic
backend (CLARABEL via cvxpy) and then re-checks every constraint of the
declared problem by direct arithmetic on the returned matrices.  A solver
status is never reported to callers unless the re-check agrees, so a
``Numerical`` outcome is the worst that bad conditioning can produce.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

EPS_PSD = 1e-7
EPS_EQ = 1e-7
TAU = 1e-6


class SdpError(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NUMERICAL = "numerical"


@dataclass(frozen=True)
class MatrixVariable:
    """Symmetric (or Hermitian) variable living on a principal submatrix.

    Entries outside ``support`` × ``support`` are identically zero.
    """

    name: str
    support: tuple[int, ...]
    psd: bool = True
    hermitian: bool = False


@dataclass(frozen=True)
class EqualityConstraint:
    """sum_i coef_i · X_{name_i} == constant, over the full ambient matrix."""

    terms: tuple[tuple[float, str], ...]
    constant: np.ndarray


@dataclass(frozen=True)
class ZeroEntries:
    """X_name restricted to rows × cols must vanish (plus the transpose
    block, which follows from symmetry)."""

    name: str
    rows: tuple[int, ...]
    cols: tuple[int, ...]


@dataclass(frozen=True)
class NsdSubmatrix:
    """Principal submatrix of X_name on ``indices`` must be NSD."""

    name: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class TraceLowerBound:
    name: str
    bound: float


@dataclass(frozen=True)
class Objective:
    """maximize (or minimize) Tr(F · X_name)."""

    F: np.ndarray
    name: str
    maximize: bool = True


@dataclass(frozen=True)
class SdpProblem:
    ambient_dim: int
    variables: tuple[MatrixVariable, ...]
    equalities: tuple[EqualityConstraint, ...] = ()
    zero_entries: tuple[ZeroEntries, ...] = ()
    nsd_submatrices: tuple[NsdSubmatrix, ...] = ()
    trace_lower_bounds: tuple[TraceLowerBound, ...] = ()
    objective: Objective | None = None

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SdpError("variable names must be unique")
        for v in self.variables:
            if any(not (0 <= i < self.ambient_dim) for i in v.support):
                raise SdpError(f"variable {v.name}: support index out of range")

    def variable(self, name: str) -> MatrixVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    values: dict[str, np.ndarray] = field(default_factory=dict)
    objective_value: float | None = None
    message: str = ""


# ---------------------------------------------------------------------------
# Backend adapter.

def _selection(ambient: int, indices: tuple[int, ...]) -> np.ndarray:
    S = np.zeros((ambient, len(indices)))
    for col, row in enumerate(indices):
        S[row, col] = 1.0
    return S


def _build(problem: SdpProblem):
    exprs: dict[str, cp.Expression] = {}
    cvx_vars: dict[str, cp.Variable] = {}
    constraints = []
    for v in problem.variables:
        k = len(v.support)
        if v.hermitian:
            X = cp.Variable((k, k), hermitian=True, name=v.name)
        else:
            X = cp.Variable((k, k), symmetric=True, name=v.name)
        if v.psd:
            constraints.append(X >> 0)
        S = _selection(problem.ambient_dim, v.support)
        cvx_vars[v.name] = X
        exprs[v.name] = S @ X @ S.T
    for z in problem.zero_entries:
        expr = exprs[z.name][np.ix_(list(z.rows), list(z.cols))]
        constraints.append(expr == 0)
    for eq in problem.equalities:
        lhs = sum(c * exprs[n] for c, n in eq.terms)
        constraints.append(lhs == eq.constant)
    for nsd in problem.nsd_submatrices:
        sub = exprs[nsd.name][np.ix_(list(nsd.indices), list(nsd.indices))]
        constraints.append(sub << 0)
    def _as_real(expr):
        return cp.real(expr) if expr.is_complex() else expr

    for tb in problem.trace_lower_bounds:
        constraints.append(_as_real(cp.trace(exprs[tb.name])) >= tb.bound)
    if problem.objective is not None:
        term = _as_real(cp.trace(problem.objective.F @ exprs[problem.objective.name]))
        sense = cp.Maximize(term) if problem.objective.maximize else cp.Minimize(term)
    else:
        sense = cp.Minimize(0)
    return cp.Problem(sense, constraints), cvx_vars


def _ambient_value(problem: SdpProblem, v: MatrixVariable, raw: np.ndarray) -> np.ndarray:
    S = _selection(problem.ambient_dim, v.support)
    raw = np.asarray(raw)
    full = S @ raw @ S.T
    if v.hermitian:
        full = (full + full.conj().T) / 2
    else:
        full = (full.real + full.real.T) / 2
    return full


def verify_outcome(problem: SdpProblem, values: dict[str, np.ndarray]) -> list[str]:
    """Deterministic constraint audit; returns a list of violations."""
    bad = []
    for v in problem.variables:
        X = values[v.name]
        comp = np.setdiff1d(np.arange(problem.ambient_dim), np.array(v.support, dtype=int))
        if comp.size and np.abs(X[np.ix_(comp, np.arange(problem.ambient_dim))]).max() > 0:
            bad.append(f"{v.name}: support violated")
        if v.psd:
            lo = np.linalg.eigvalsh(X).min()
            if lo < -EPS_PSD:
                bad.append(f"{v.name}: min eigenvalue {lo:.2e} < -{EPS_PSD}")
    for z in problem.zero_entries:
        mx = np.abs(values[z.name][np.ix_(list(z.rows), list(z.cols))]).max()
        if mx > EPS_EQ:
            bad.append(f"{z.name}: masked entries up to {mx:.2e}")
    for eq in problem.equalities:
        lhs = sum(c * values[n] for c, n in eq.terms)
        res = np.abs(lhs - eq.constant).max()
        if res > EPS_EQ:
            bad.append(f"equality residual {res:.2e}")
    for nsd in problem.nsd_submatrices:
        sub = values[nsd.name][np.ix_(list(nsd.indices), list(nsd.indices))]
        hi = np.linalg.eigvalsh(sub).max()
        if hi > EPS_PSD:
            bad.append(f"{nsd.name}[{nsd.indices}]: max eigenvalue {hi:.2e}")
    for tb in problem.trace_lower_bounds:
        tr = float(np.trace(values[tb.name]).real)
        if tr < tb.bound - EPS_EQ:
            bad.append(f"{tb.name}: trace {tr:.6g} < {tb.bound}")
    return bad


def solve(problem: SdpProblem, solver: str = "CLARABEL") -> SolveOutcome:
    cvx_problem, cvx_vars = _build(problem)
    try:
        # inaccurate-solution warnings are redundant here: every returned
        # matrix is audited against the declared constraints below
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            cvx_problem.solve(solver=solver)
    except Exception as exc:  # backend blowups are inconclusive, never a verdict
        return SolveOutcome(Status.NUMERICAL, message=f"solver raised: {exc}")
    if cvx_problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return SolveOutcome(Status.INFEASIBLE, message=cvx_problem.status)
    if cvx_problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return SolveOutcome(Status.NUMERICAL, message=str(cvx_problem.status))
    values = {}
    for v in problem.variables:
        raw = cvx_vars[v.name].value
        if raw is None:
            return SolveOutcome(Status.NUMERICAL, message=f"{v.name} has no value")
        values[v.name] = _ambient_value(problem, v, raw)
    violations = verify_outcome(problem, values)
    if violations:
        return SolveOutcome(Status.NUMERICAL, values=values,
                            message="; ".join(violations))
    obj = None
    if problem.objective is not None:
        obj = float(np.trace(problem.objective.F @ values[problem.objective.name]).real)
        status = Status.OPTIMAL
    else:
        status = Status.FEASIBLE
    return SolveOutcome(status, values=values, objective_value=obj)


# ---------------------------------------------------------------------------
# Hermitian-to-real embedding.

def hermitian_real_embedding(H: np.ndarray) -> np.ndarray:
    """[[X, −Y], [Y, X]] for H = X + iY; PSD iff H is, spectrum doubled."""
    H = np.asarray(H)
    X, Y = H.real, H.imag
    if np.abs(X - X.T).max() > EPS_EQ or np.abs(Y + Y.T).max() > EPS_EQ:
        raise SdpError("input is not Hermitian")
    return np.block([[X, -Y], [Y, X]])
