"""Hermitian semi-definite programs and their independent verification.

A ConicProgram is a declarative description: named Hermitian variables, a
real linear objective, affine PSD-cone constraints, and scalar affine
equalities/inequalities.  `solve` hands the program to an interior-point
backend (CLARABEL via cvxpy by default); `verify_feasible` re-checks a
candidate point by direct eigendecomposition and never trusts solver
residuals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .errors import DimensionMismatchError, DomainError, SolverFailureError
from .operators import herm_part, min_eig, pt_matrix


def embed_hermitian(x: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re X, -Im X], [Im X, Re X]] of a Hermitian X.

    The embedding doubles every eigenvalue's multiplicity (so PSD-ness is
    preserved both ways) and doubles the trace; callers routing objectives
    through it must compensate with a single factor 1/2.
    """
    re, im = x.real, x.imag
    return np.block([[re, -im], [im, re]])


@dataclass(frozen=True)
class LinOp:
    """A structured linear map applied to one Hermitian matrix variable.

    kind:
      'id'         -> coeff * X
      'pt'         -> coeff * partial transpose of X over `axis` (0=A, 1=B)
      'kron_left'  -> coeff * (const (x) X)
      'kron_right' -> coeff * (X (x) const)
    """

    kind: str
    coeff: float = 1.0
    const: np.ndarray | None = None
    dims: tuple[int, int] | None = None
    axis: int | None = None

    def out_dim(self, in_dim: int) -> int:
        if self.kind in ("id", "pt"):
            return in_dim
        return in_dim * self.const.shape[0]

    def apply(self, x):
        numeric = isinstance(x, np.ndarray)
        if self.kind == "id":
            y = x
        elif self.kind == "pt":
            if numeric:
                y = pt_matrix(x, self.dims[0], self.dims[1], "A" if self.axis == 0 else "B")
            else:
                y = cp.partial_transpose(x, list(self.dims), self.axis)
        elif self.kind == "kron_left":
            y = np.kron(self.const, x) if numeric else cp.kron(self.const, x)
        elif self.kind == "kron_right":
            y = np.kron(x, self.const) if numeric else cp.kron(x, self.const)
        else:
            raise DomainError(f"unknown LinOp kind {self.kind!r}")
        return self.coeff * y


@dataclass
class AffineExpr:
    """const + sum of LinOps applied to registered variables."""

    terms: list[tuple[str, LinOp]]
    const: np.ndarray
    name: str = ""

    def evaluate(self, assignment: dict):
        out = self.const
        for var, op in self.terms:
            out = out + op.apply(assignment[var])
        return out


@dataclass
class LinearFunctional:
    """value(X) = const + sum_v Re Tr[coeffs[v] @ X_v], real by Hermiticity."""

    coeffs: dict[str, np.ndarray]
    const: float = 0.0

    def evaluate(self, assignment: dict):
        total = self.const
        for var, c in self.coeffs.items():
            x = assignment[var]
            if isinstance(x, np.ndarray):
                total = total + float(np.trace(c @ x).real)
            else:
                total = total + cp.real(cp.trace(c @ x))
        return total


@dataclass
class LinearConstraint:
    functional: LinearFunctional
    sense: str  # '<=' or '=='
    rhs: float
    name: str = ""


@dataclass
class ConicProgram:
    """Registry of Hermitian variables plus objective and constraints."""

    variables: dict[str, int] = field(default_factory=dict)
    objective: LinearFunctional | None = None
    psd_constraints: list[AffineExpr] = field(default_factory=list)
    linear_constraints: list[LinearConstraint] = field(default_factory=list)

    def add_variable(self, name: str, dim: int) -> str:
        if name in self.variables:
            raise DomainError(f"variable {name!r} already registered")
        self.variables[name] = dim
        return name

    def set_objective(self, coeffs: dict[str, np.ndarray], const: float = 0.0) -> None:
        for var, c in coeffs.items():
            self._check_var(var, c.shape[0])
            if np.linalg.norm(c - c.conj().T) > 1e-10 * max(np.linalg.norm(c), 1.0):
                raise DomainError(f"objective coefficient for {var!r} is not Hermitian")
        self.objective = LinearFunctional(dict(coeffs), const)

    def add_psd(self, terms, const: np.ndarray, name: str = "") -> None:
        dim = const.shape[0]
        for var, op in terms:
            self._check_var(var)
            if op.out_dim(self.variables[var]) != dim:
                raise DimensionMismatchError(
                    f"term for {var!r} maps to dim {op.out_dim(self.variables[var])}, constraint has {dim}"
                )
        self.psd_constraints.append(AffineExpr(list(terms), const, name))

    def add_linear(self, coeffs: dict[str, np.ndarray], sense: str, rhs: float, name: str = "") -> None:
        if sense not in ("<=", "=="):
            raise DomainError(f"sense must be '<=' or '==', got {sense!r}")
        for var, c in coeffs.items():
            self._check_var(var, c.shape[0])
        self.linear_constraints.append(LinearConstraint(LinearFunctional(dict(coeffs)), sense, rhs, name))

    def _check_var(self, name: str, dim: int | None = None) -> None:
        if name not in self.variables:
            raise DomainError(f"variable {name!r} is not registered")
        if dim is not None and self.variables[name] != dim:
            raise DimensionMismatchError(f"variable {name!r} has dim {self.variables[name]}, got {dim}")

    def describe(self) -> str:
        """Plain-text dump of the block and constraint structure."""
        lines = ["variables:"]
        for name, dim in self.variables.items():
            lines.append(f"  {name}: hermitian {dim}x{dim}")
        lines.append("objective terms: " + ", ".join(self.objective.coeffs) if self.objective else "objective: none")
        lines.append("psd constraints:")
        for i, c in enumerate(self.psd_constraints):
            parts = " + ".join(f"{op.coeff:+g}*{op.kind}({v})" for v, op in c.terms)
            lines.append(f"  [{i}] {c.name or '<unnamed>'}: {parts} + const >> 0 (dim {c.const.shape[0]})")
        lines.append("linear constraints:")
        for i, c in enumerate(self.linear_constraints):
            lines.append(f"  [{i}] {c.name or '<unnamed>'}: <{', '.join(c.functional.coeffs)}> {c.sense} {c.rhs:g}")
        return "\n".join(lines)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iters: int = 200
    solver: str = "CLARABEL"
    verbose: bool = False
    debug_dump: bool = False


@dataclass
class SolverReport:
    status: str  # Optimal | Infeasible | Unbounded | NumericalTrouble | IterationLimit
    objective_value: float
    primal: dict[str, np.ndarray]
    dual_objective: float | None
    residuals: dict[str, float]

    @property
    def ok(self) -> bool:
        return self.status == "Optimal"


_STATUS_MAP = {
    cp.OPTIMAL: "Optimal",
    cp.INFEASIBLE: "Infeasible",
    cp.UNBOUNDED: "Unbounded",
    cp.OPTIMAL_INACCURATE: "NumericalTrouble",
    cp.INFEASIBLE_INACCURATE: "NumericalTrouble",
    cp.UNBOUNDED_INACCURATE: "NumericalTrouble",
    cp.USER_LIMIT: "IterationLimit",
}


def _residuals(prog: ConicProgram, primal: dict, psd_cons, lin_cons) -> dict[str, float]:
    max_eig_violation = 0.0
    for expr in prog.psd_constraints:
        val = expr.evaluate(primal)
        max_eig_violation = max(max_eig_violation, -min(min_eig(val), 0.0))
    lin_violation = 0.0
    for con in prog.linear_constraints:
        lhs = con.functional.evaluate(primal)
        viol = abs(lhs - con.rhs) if con.sense == "==" else max(lhs - con.rhs, 0.0)
        lin_violation = max(lin_violation, viol)
    # complementarity residual: equals the duality gap at a stationary point
    gap = 0.0
    for expr, con in zip(prog.psd_constraints, psd_cons):
        y = con.dual_value
        if y is not None:
            gap += abs(float(np.trace(expr.evaluate(primal) @ y).real))
    for lc, con in zip(prog.linear_constraints, lin_cons):
        y = con.dual_value
        if y is not None and lc.sense == "<=":
            gap += abs(float(y) * (lc.rhs - lc.functional.evaluate(primal)))
    return {
        "maxEigViolation": max_eig_violation,
        "linearViolation": lin_violation,
        "dualityGap": gap,
    }


def solve(prog: ConicProgram, opts: SolverOptions | None = None) -> SolverReport:
    """Solve the program; failures surface via report.status, never silently."""
    opts = opts or SolverOptions()
    if opts.debug_dump:
        print(prog.describe())
    cvx_vars = {name: cp.Variable((d, d), hermitian=True, name=name) for name, d in prog.variables.items()}
    psd_cons = [expr.evaluate(cvx_vars) >> 0 for expr in prog.psd_constraints]
    lin_cons = []
    for con in prog.linear_constraints:
        lhs = con.functional.evaluate(cvx_vars)
        lin_cons.append(lhs <= con.rhs if con.sense == "<=" else lhs == con.rhs)
    objective = cp.Minimize(prog.objective.evaluate(cvx_vars))
    problem = cp.Problem(objective, psd_cons + lin_cons)
    solver_kwargs = {}
    if opts.solver == "CLARABEL":
        solver_kwargs = {"max_iter": max(opts.max_iters, 1)}
    try:
        with warnings.catch_warnings():
            # inaccurate-solution warnings are redundant with our own
            # residual check below
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=opts.solver, verbose=opts.verbose, **solver_kwargs)
    except cp.error.SolverError as exc:
        return SolverReport("NumericalTrouble", float("nan"), {}, None, {"error": str(exc)})

    status = _STATUS_MAP.get(problem.status, "NumericalTrouble")
    primal = {name: herm_part(np.asarray(v.value)) if v.value is not None else None for name, v in cvx_vars.items()}
    if any(v is None for v in primal.values()):
        return SolverReport(status if status != "Optimal" else "NumericalTrouble", float("nan"), {}, None, {})

    residuals = _residuals(prog, primal, psd_cons, lin_cons)
    obj = float(problem.value)
    scale = max(1.0, max(np.linalg.norm(m) for m in primal.values()))
    within_tol = (residuals["maxEigViolation"] <= 1e-7 * scale
                  and residuals["linearViolation"] <= 1e-7 * scale
                  and residuals["dualityGap"] <= 1e-6 * (1 + abs(obj)))
    if status == "Optimal" and not within_tol:
        status = "NumericalTrouble"
    elif problem.status == cp.OPTIMAL_INACCURATE and within_tol:
        # the backend hedges near its own stopping criterion; trust our
        # independent residual check instead of the reported status
        status = "Optimal"
    dual_obj = obj - residuals.get("dualityGap", 0.0)
    return SolverReport(status, obj, primal, dual_obj, residuals)


def solve_or_raise(prog: ConicProgram, opts: SolverOptions | None = None) -> SolverReport:
    report = solve(prog, opts)
    if not report.ok:
        raise SolverFailureError(f"solver returned status {report.status}", report)
    return report


def verify_feasible(K: np.ndarray, L: np.ndarray, V: np.ndarray, sigma: np.ndarray,
                    dA: int, dB: int, tol: float) -> tuple[bool, dict[str, float]]:
    """Independently check the (K, L, V) constraint system against sigma.

    Recomputes the minimum eigenvalues of T_B(V +/- sigma) and K(x)L +/- V by
    eigendecomposition; ok iff all are >= -tol.
    """
    n = dA * dB
    if K.shape != (dA, dA) or L.shape != (dB, dB) or V.shape != (n, n) or sigma.shape != (n, n):
        raise DimensionMismatchError("triple/sigma dimensions are inconsistent")
    kl = np.kron(K, L)
    residuals = {
        "tb_plus": min_eig(pt_matrix(V + sigma, dA, dB, "B")),
        "tb_minus": min_eig(pt_matrix(V - sigma, dA, dB, "B")),
        "kl_plus": min_eig(kl + V),
        "kl_minus": min_eig(kl - V),
    }
    ok = all(v >= -tol for v in residuals.values())
    return ok, residuals
