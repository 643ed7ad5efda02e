"""Classical-correlation measures over the partial-transpose constraint system.

The core object is a feasible triple (K on A, L on B, V on AB) witnessing
    T_B(V +/- sigma) >= 0,   K (x) L +/- V >= 0,
whose objective Tr[K] * Tr[L] upper-bounds the bilinear correlation measure
of sigma.  Fixing one of K or L turns the problem into an exact SDP (the
beta restrictions); the bilinear problem itself is handled by an
alternating heuristic that only ever reports independently verified upper
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import conic
from .conic import ConicProgram, LinOp, SolverOptions, solve, solve_or_raise
from .errors import (
    DimensionMismatchError,
    DomainError,
    NotPSDError,
    SolverFailureError,
    ViolationDetectedError,
)
from .operators import (
    BipartiteOperator,
    DensityMatrix,
    fidelity,
    herm_part,
    min_eig,
    pinch_matrix,
    pt_matrix,
    ptrace_matrix,
)
from .states import QuantumChannel, CQState, max_classically_correlated, regroup

TRIPLE_TOL = 1e-7


@dataclass
class FeasibleTriple:
    """A verified (K, L, V) certificate for one sigma."""

    K: np.ndarray
    L: np.ndarray
    V: np.ndarray
    dA: int
    dB: int
    value: float
    residuals: dict[str, float] = field(default_factory=dict)

    @classmethod
    def build(cls, K, L, V, sigma, dA, dB, tol: float = TRIPLE_TOL) -> "FeasibleTriple":
        K, L, V = herm_part(np.asarray(K)), herm_part(np.asarray(L)), herm_part(np.asarray(V))
        ok, residuals = conic.verify_feasible(K, L, V, np.asarray(sigma), dA, dB, tol)
        if not ok:
            raise ViolationDetectedError(f"triple fails feasibility verification: {residuals}")
        value = float(np.trace(K).real * np.trace(L).real)
        return cls(K, L, V, dA, dB, value, residuals)

    def verify(self, sigma, tol: float = TRIPLE_TOL) -> tuple[bool, dict[str, float]]:
        return conic.verify_feasible(self.K, self.L, self.V, np.asarray(sigma), self.dA, self.dB, tol)


@dataclass
class BoundResult:
    """A bound value with its method tag and certificate.

    For the linear-scale methods (betaA/betaB/gammaHeuristic) `raw_value`
    holds the measure itself and `value_bits` its log2; for the entropic
    methods the value is native bits and `raw_value` is None.
    """

    value_bits: float
    method: str
    raw_value: float | None = None
    certificate: object | None = None
    fw_gap_bits: float | None = None
    solver_stats: dict = field(default_factory=dict)
    warning: str | None = None

    def to_jsonable(self) -> dict:
        out = {
            "value_bits": self.value_bits,
            "method": self.method,
            "raw_value": self.raw_value,
            "fw_gap_bits": self.fw_gap_bits,
            "solver_stats": self.solver_stats,
            "warning": self.warning,
        }
        cert = self.certificate
        if isinstance(cert, FeasibleTriple):
            out["certificate"] = {
                "kind": "triple",
                "value": cert.value,
                "residuals": cert.residuals,
            }
        elif isinstance(cert, np.ndarray):
            out["certificate"] = {
                "kind": "sigma",
                "fingerprint": _fingerprint(cert),
                "trace": float(np.trace(cert).real),
            }
        return out


def _fingerprint(mat: np.ndarray) -> str:
    import hashlib

    return hashlib.sha256(np.ascontiguousarray(mat.round(12)).tobytes()).hexdigest()[:16]


def _as_bip(sigma) -> tuple[np.ndarray, int, int]:
    if isinstance(sigma, DensityMatrix):
        sigma = sigma.bip
    if isinstance(sigma, BipartiteOperator):
        return sigma.mat, sigma.dA, sigma.dB
    raise DimensionMismatchError("expected a BipartiteOperator or bipartite DensityMatrix")


def _as_single(op, dim: int, what: str) -> np.ndarray:
    mat = op.mat if hasattr(op, "mat") else np.asarray(op, dtype=complex)
    if mat.shape != (dim, dim):
        raise DimensionMismatchError(f"{what} has shape {mat.shape}, expected ({dim}, {dim})")
    return mat


def _check_psd(mat: np.ndarray, what: str, tol: float = 1e-9) -> None:
    if min_eig(mat) < -tol * max(abs(np.trace(mat).real), 1.0):
        raise NotPSDError(f"{what} is not PSD (min eig {min_eig(mat):.3e})")


def _beta_program(sigma: np.ndarray, dA: int, dB: int, fixed_side: str, fixed_op: np.ndarray) -> ConicProgram:
    """The exact SDP with one of K/L pinned to fixed_op."""
    n = dA * dB
    prog = ConicProgram()
    prog.add_variable("V", n)
    tb_sigma = pt_matrix(sigma, dA, dB, "B")
    pt_op = LinOp("pt", 1.0, dims=(dA, dB), axis=1)
    prog.add_psd([("V", pt_op)], tb_sigma, name="T_B(V + sigma)")
    prog.add_psd([("V", pt_op)], -tb_sigma, name="T_B(V - sigma)")
    if fixed_side == "A":
        prog.add_variable("L", dB)
        kl = LinOp("kron_left", 1.0, const=fixed_op)
        prog.add_psd([("L", kl), ("V", LinOp("id", 1.0))], np.zeros((n, n)), name="K(x)L + V")
        prog.add_psd([("L", kl), ("V", LinOp("id", -1.0))], np.zeros((n, n)), name="K(x)L - V")
        prog.set_objective({"L": float(np.trace(fixed_op).real) * np.eye(dB, dtype=complex)})
    else:
        prog.add_variable("K", dA)
        kl = LinOp("kron_right", 1.0, const=fixed_op)
        prog.add_psd([("K", kl), ("V", LinOp("id", 1.0))], np.zeros((n, n)), name="K(x)L + V")
        prog.add_psd([("K", kl), ("V", LinOp("id", -1.0))], np.zeros((n, n)), name="K(x)L - V")
        prog.set_objective({"K": float(np.trace(fixed_op).real) * np.eye(dA, dtype=complex)})
    return prog


def beta_a(sigma, rhoA, opts: SolverOptions | None = None) -> BoundResult:
    """Exact SDP value of the restriction with K pinned to rhoA."""
    smat, dA, dB = _as_bip(sigma)
    _check_psd(smat, "sigma")
    k_fixed = _as_single(rhoA, dA, "rhoA")
    prog = _beta_program(smat, dA, dB, "A", k_fixed)
    report = solve_or_raise(prog, opts)
    triple = FeasibleTriple.build(k_fixed, report.primal["L"], report.primal["V"], smat, dA, dB)
    return BoundResult(
        value_bits=math.log2(triple.value) if triple.value > 0 else float("-inf"),
        method="betaA",
        raw_value=triple.value,
        certificate=triple,
        solver_stats={"objective": report.objective_value, "residuals": report.residuals},
    )


def beta_b(sigma, rhoB, opts: SolverOptions | None = None) -> BoundResult:
    """Mirror of beta_a with L pinned to rhoB and K free."""
    smat, dA, dB = _as_bip(sigma)
    _check_psd(smat, "sigma")
    l_fixed = _as_single(rhoB, dB, "rhoB")
    prog = _beta_program(smat, dA, dB, "B", l_fixed)
    report = solve_or_raise(prog, opts)
    triple = FeasibleTriple.build(report.primal["K"], l_fixed, report.primal["V"], smat, dA, dB)
    return BoundResult(
        value_bits=math.log2(triple.value) if triple.value > 0 else float("-inf"),
        method="betaB",
        raw_value=triple.value,
        certificate=triple,
        solver_stats={"objective": report.objective_value, "residuals": report.residuals},
    )


def gamma_heuristic(sigma, max_rounds: int = 50, tol: float = 1e-7,
                    opts: SolverOptions | None = None, init: np.ndarray | None = None) -> BoundResult:
    """Certified upper bound on the bilinear measure by alternating SDPs.

    Alternates (K fixed -> solve L, V) and (L fixed -> solve K, V), with
    Tr K renormalized to 1 each round so the two halves cannot drift in
    scale.  Returns the best independently verified triple seen; the value
    sequence is non-increasing up to solver tolerance.
    """
    smat, dA, dB = _as_bip(sigma)
    _check_psd(smat, "sigma")
    marginal = ptrace_matrix(smat, dA, dB, "B")
    tr = float(np.trace(marginal).real)
    inits = []
    if init is not None:
        inits.append(_as_single(init, dA, "init"))
    else:
        if tr > 0:
            inits.append(marginal / tr)
        inits.append(np.eye(dA, dtype=complex) / dA)

    best: FeasibleTriple | None = None
    warning = None
    stats = {"rounds": 0, "solves": 0}
    for k0 in inits:
        K = k0
        prev = float("inf")
        for _ in range(max_rounds):
            stats["rounds"] += 1
            # half-step 1: K fixed, optimize (L, V)
            rep1 = solve(_beta_program(smat, dA, dB, "A", K), opts)
            stats["solves"] += 1
            if not rep1.ok:
                warning = f"solver status {rep1.status} during alternation"
                break
            L = rep1.primal["L"]
            # half-step 2: L fixed, optimize (K, V)
            rep2 = solve(_beta_program(smat, dA, dB, "B", L), opts)
            stats["solves"] += 1
            if not rep2.ok:
                warning = f"solver status {rep2.status} during alternation"
                # keep the verified half-step result
                try:
                    cand = FeasibleTriple.build(K, L, rep1.primal["V"], smat, dA, dB)
                    if best is None or cand.value < best.value:
                        best = cand
                except ViolationDetectedError:
                    pass
                break
            K, V = rep2.primal["K"], rep2.primal["V"]
            try:
                cand = FeasibleTriple.build(K, L, V, smat, dA, dB)
                if best is None or cand.value < best.value:
                    best = cand
            except ViolationDetectedError:
                warning = "an alternation iterate failed independent verification"
            value = rep2.objective_value
            # renormalize Tr K = 1 (scale moves between K and L, V untouched)
            c = float(np.trace(K).real)
            if c <= 0:
                break
            K = K / c
            if prev - value < tol:
                break
            prev = value
    if best is None:
        raise SolverFailureError("alternating heuristic produced no verified triple")
    return BoundResult(
        value_bits=math.log2(best.value) if best.value > 0 else float("-inf"),
        method="gammaHeuristic",
        raw_value=best.value,
        certificate=best,
        solver_stats=stats,
        warning=warning,
    )


def c_gamma(value: float) -> float:
    """log2 of a positive measure value, in bits."""
    if value <= 0:
        raise DomainError(f"measure value must be positive, got {value}")
    return math.log2(value)


c_beta = c_gamma


def product_feasible_point(sigmaA: np.ndarray, tauB: np.ndarray) -> FeasibleTriple:
    """The exact certificate (sigmaA, tauB, sigmaA (x) tauB) for a product operator.

    Choosing V equal to the product operator itself keeps all four cone
    constraints valid for complex factors as well (V = T_B(product) only
    works when the B factor is transposition-invariant).
    """
    sigmaA = herm_part(np.asarray(sigmaA, dtype=complex))
    tauB = herm_part(np.asarray(tauB, dtype=complex))
    sigma = np.kron(sigmaA, tauB)
    return FeasibleTriple.build(sigmaA, tauB, sigma, sigma, sigmaA.shape[0], tauB.shape[0])


def dimension_feasible_point(rho, side: str) -> FeasibleTriple:
    """The always-feasible point pinning one side to the marginal, other to I."""
    rmat, dA, dB = _as_bip(rho)
    if side == "A":
        K = ptrace_matrix(rmat, dA, dB, "B")
        L = np.eye(dB, dtype=complex)
    elif side == "B":
        K = np.eye(dA, dtype=complex)
        L = ptrace_matrix(rmat, dA, dB, "A")
    else:
        raise DomainError(f"side must be 'A' or 'B', got {side!r}")
    V = np.kron(K, L)
    return FeasibleTriple.build(K, L, V, rmat, dA, dB)


def dp_map_triple(triple: FeasibleTriple, sigma, chan_a: QuantumChannel, chan_b: QuantumChannel) -> FeasibleTriple:
    """Push a triple through local channels; the objective value is preserved."""
    smat, dA, dB = _as_bip(sigma)
    if chan_a.d_in != dA or chan_b.d_in != dB or triple.dA != dA or triple.dB != dB:
        raise DimensionMismatchError("channel/triple dimensions do not match sigma")
    mapped_sigma = _apply_channels(smat, dA, dB, chan_a, chan_b)
    K2 = chan_a.apply(triple.K)
    L2 = chan_b.apply(triple.L)
    V2 = _apply_channels(triple.V, dA, dB, chan_a, chan_b)
    return FeasibleTriple.build(K2, L2, V2, mapped_sigma, chan_a.d_out, chan_b.d_out)


def _apply_channels(mat: np.ndarray, dA: int, dB: int, chan_a: QuantumChannel, chan_b: QuantumChannel) -> np.ndarray:
    out = np.zeros((chan_a.d_out * chan_b.d_out,) * 2, dtype=complex)
    for ka in chan_a.kraus:
        for kb in chan_b.kraus:
            k = np.kron(ka, kb)
            out += k @ mat @ k.conj().T
    return herm_part(out)


def comm_bound_map_triple(triple: FeasibleTriple, cq: CQState) -> FeasibleTriple:
    """Move the classical register from the B side to the A side.

    Input triple certifies the (A; BX) grouping of the cq state; the output
    certifies the (AX; B) grouping with objective exactly dX times larger:
    K' = K (x) I_X, L' = Tr_X[L], V' = the X-dephased V, reindexed.
    """
    dA, dB, dX = cq.dA, cq.dB, cq.dX
    if triple.dA != dA or triple.dB != dB * dX:
        raise DimensionMismatchError("triple does not match the (A; BX) grouping")
    K2 = np.kron(triple.K, np.eye(dX, dtype=complex))
    L2 = ptrace_matrix(triple.L, dB, dX, "B")  # L lives on (B, X) with X trailing
    v_pinched = pinch_matrix(triple.V, (dA, dB, dX), 2)
    V2 = regroup(v_pinched, dA, dB, dX, "AX;B")
    sigma2 = cq.view("AX;B").mat
    return FeasibleTriple.build(K2, L2, V2, sigma2, dA * dX, dB)


def reorder_pair_product(mat: np.ndarray, dA1: int, dB1: int, dA2: int, dB2: int) -> np.ndarray:
    """Reindex (A1 B1) (x) (A2 B2) into the grouping (A1 A2; B1 B2)."""
    n = dA1 * dB1 * dA2 * dB2
    t = mat.reshape(dA1, dB1, dA2, dB2, dA1, dB1, dA2, dB2)
    return t.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(n, n)


def tensor_triple(t1: FeasibleTriple, sigma1, t2: FeasibleTriple, sigma2) -> FeasibleTriple:
    """Tensor two certificates; the objective is exactly multiplicative."""
    s1, dA1, dB1 = _as_bip(sigma1)
    s2, dA2, dB2 = _as_bip(sigma2)
    K = np.kron(t1.K, t2.K)
    L = np.kron(t1.L, t2.L)
    V = reorder_pair_product(np.kron(t1.V, t2.V), dA1, dB1, dA2, dB2)
    sigma = reorder_pair_product(np.kron(s1, s2), dA1, dB1, dA2, dB2)
    return FeasibleTriple.build(K, L, V, sigma, dA1 * dA2, dB1 * dB2)


def fidelity_bound_check(sigma, g: float, d: int) -> dict[str, float]:
    """Check the fidelity ceiling 1/d against sigma normalized by its bound g.

    g must be a certified upper bound on the bilinear measure of sigma, so
    that sigma/g lands inside the unit-measure set.  A violation beyond
    tolerance signals a bug in the caller's certificate, not a math failure.
    """
    smat, dA, dB = _as_bip(sigma)
    if dA != d or dB != d:
        raise DimensionMismatchError(f"sigma must live on a {d}x{d} bipartition")
    if g <= 0:
        raise DomainError("the certified bound g must be positive")
    target = max_classically_correlated(d).mat
    observed = fidelity(target, smat / g)
    bound = 1.0 / d
    if observed > bound + 1e-6:
        raise ViolationDetectedError(f"fidelity {observed} exceeds ceiling {bound}")
    return {"bound": bound, "observed": observed}
