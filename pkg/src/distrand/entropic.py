"""Entropic quantities and the conditional-gradient optimization layer.

The upper bounds on distillable randomness are computed by minimizing the
quantum relative entropy D(rho || sigma) over the SDP-representable set of
operators whose one-sided restriction of the correlation measure is at
most 1.  Frank-Wolfe with an SDP linear minimization oracle keeps every
iterate feasible, so any iterate's divergence is already a valid upper
bound, and the duality gap of the linearization certifies suboptimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conic import ConicProgram, LinOp, SolverOptions, solve_or_raise
from .errors import DomainError, NotPSDError, SolverFailureError
from .measures import BoundResult, _as_bip, beta_a, beta_b
from .operators import (
    herm_part,
    min_eig,
    pt_matrix,
    ptrace_matrix,
    schatten_norm,
    support_projector,
)
from .states import validate_povm

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------

def _psd_eigh(mat: np.ndarray, what: str, tol: float = 1e-9):
    w, v = np.linalg.eigh(herm_part(np.asarray(mat)))
    tr = max(float(w.sum()), 0.0)
    if w.min() < -tol * max(tr, 1.0):
        raise NotPSDError(f"{what} is not PSD (min eig {w.min():.3e})")
    return np.clip(w, 0.0, None), v


def _support_ok(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-10) -> bool:
    proj = support_projector(sigma)
    out = (np.eye(len(rho)) - proj) @ rho @ (np.eye(len(rho)) - proj)
    return schatten_norm(out, 1) <= tol


def relative_entropy(rho, sigma) -> float:
    """D(rho||sigma) in bits; +inf when rho's support leaves sigma's."""
    rmat = rho.mat if hasattr(rho, "mat") else np.asarray(rho)
    smat = sigma.mat if hasattr(sigma, "mat") else np.asarray(sigma)
    wr, vr = _psd_eigh(rmat, "rho")
    ws, vs = _psd_eigh(smat, "sigma")
    if not _support_ok(rmat, smat):
        return float("inf")
    cut_r = 1e-15 * max(wr.max(), 1e-300)
    term1 = float(sum(w * math.log2(w) for w in wr if w > cut_r))
    cut_s = 1e-15 * max(ws.max(), 1e-300)
    logws = np.where(ws > cut_s, np.log2(np.where(ws > cut_s, ws, 1.0)), 0.0)
    log_sigma = (vs * logws) @ vs.conj().T
    return term1 - float(np.trace(rmat @ log_sigma).real)


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    """The alpha-sandwiched divergence in bits, via singular values."""
    if alpha <= 0 or alpha == 1.0:
        raise DomainError(f"alpha must lie in (0,1) or (1,inf), got {alpha}")
    rmat = rho.mat if hasattr(rho, "mat") else np.asarray(rho)
    smat = sigma.mat if hasattr(sigma, "mat") else np.asarray(sigma)
    wr, vr = _psd_eigh(rmat, "rho")
    ws, vs = _psd_eigh(smat, "sigma")
    if alpha > 1 and not _support_ok(rmat, smat):
        return float("inf")
    q = (1.0 - alpha) / (2.0 * alpha)
    cut = 1e-15 * max(ws.max(), 1e-300)
    ws_pow = np.where(ws > cut, np.where(ws > cut, ws, 1.0) ** q, 0.0)
    sig_q = (vs * ws_pow) @ vs.conj().T
    rho_half = (vr * np.sqrt(wr)) @ vr.conj().T
    norm = schatten_norm(sig_q @ rho_half, 2.0 * alpha)
    if norm <= 0:
        return float("inf")
    return (2.0 * alpha / (alpha - 1.0)) * math.log2(norm)


def von_neumann_entropy(mat: np.ndarray) -> float:
    w, _ = _psd_eigh(mat, "entropy argument")
    cut = 1e-15 * max(w.max(), 1e-300)
    return -float(sum(x * math.log2(x) for x in w if x > cut))


def holevo_of_measured_ensemble(rho, povm) -> float:
    """Holevo information of the B-side ensemble induced by measuring A."""
    rmat, dA, dB = _as_bip(rho)
    effects = validate_povm(povm, dA)
    probs, cond = [], []
    for e in effects:
        eb = np.kron(e, np.eye(dB))
        unnorm = ptrace_matrix(eb @ rmat, dA, dB, "A")
        p = float(np.trace(unnorm).real)
        if p < 1e-12:
            continue
        probs.append(p)
        cond.append(herm_part(unnorm / p))
    avg = sum(p * c for p, c in zip(probs, cond))
    return von_neumann_entropy(avg) - sum(p * von_neumann_entropy(c) for p, c in zip(probs, cond))


def isotropic_holevo_closed_form(d: int, p: float) -> float:
    """Computational-basis Holevo information of the isotropic family."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    big = 1.0 - p + p / d
    small = p / d
    out = math.log2(d)
    if big > 0:
        out += big * math.log2(big)
    if small > 0:
        out += (d - 1) * small * math.log2(small)
    return out


# ---------------------------------------------------------------------------
# Frank-Wolfe over the unit-measure feasible set
# ---------------------------------------------------------------------------

@dataclass
class FWConfig:
    max_iters: int = 500
    gap_tol_bits: float = 1e-4
    support_guard: float = 1e-8
    line_search_iters: int = 40
    lmo_opts: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if min(self.max_iters, self.line_search_iters) < 1 or min(self.gap_tol_bits, self.support_guard) <= 0:
            raise DomainError("FWConfig fields must be positive")
        if self.support_guard > 1e-4:
            raise DomainError("support guard must be <= 1e-4")


@dataclass
class UpsilonResult:
    value_bits: float
    sigma_star: np.ndarray
    fw_gap_bits: float
    beta_of_sigma: float
    iterations: int
    side: str
    lmo_calls: int = 0
    status: str = "Converged"


def divergence_gradient(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Gradient of D(rho||sigma) in sigma, in bits per unit perturbation.

    First divided difference of ln at sigma's eigenvalues, contracted with
    rho in sigma's eigenbasis; near-degenerate differences fall back to
    1/lambda to avoid cancellation.
    """
    w, u = np.linalg.eigh(herm_part(sigma))
    w = np.clip(w, 1e-300, None)
    rho_t = u.conj().T @ rho @ u
    diff = np.subtract.outer(w, w)
    logdiff = np.subtract.outer(np.log(w), np.log(w))
    wmax = float(w.max())
    degenerate = np.abs(diff) <= 1e-12 * wmax
    with np.errstate(divide="ignore", invalid="ignore"):
        frechet = np.where(degenerate, 0.0, logdiff / np.where(degenerate, 1.0, diff))
    frechet = np.where(degenerate, (1.0 / w)[:, None], frechet)
    grad = u @ (rho_t * frechet) @ u.conj().T
    return -herm_part(grad) / LN2


def _lmo_program(grad: np.ndarray, rho: np.ndarray, dA: int, dB: int,
                 side: str, marginal: np.ndarray, mu: float) -> ConicProgram:
    """min Tr[grad * sigma] over the guarded unit-measure feasible set."""
    n = dA * dB
    prog = ConicProgram()
    prog.add_variable("S", n)
    prog.add_variable("V", n)
    pt_op = LinOp("pt", 1.0, dims=(dA, dB), axis=1)
    pt_neg = LinOp("pt", -1.0, dims=(dA, dB), axis=1)
    zeros = np.zeros((n, n))
    prog.add_psd([("V", pt_op), ("S", pt_op)], zeros, name="T_B(V + sigma)")
    prog.add_psd([("V", pt_op), ("S", pt_neg)], zeros, name="T_B(V - sigma)")
    if side == "A":
        prog.add_variable("L", dB)
        kl = LinOp("kron_left", 1.0, const=marginal)
        witness = "L"
        w_dim = dB
    else:
        prog.add_variable("K", dA)
        kl = LinOp("kron_right", 1.0, const=marginal)
        witness = "K"
        w_dim = dA
    prog.add_psd([(witness, kl), ("V", LinOp("id", 1.0))], zeros, name="K(x)L + V")
    prog.add_psd([(witness, kl), ("V", LinOp("id", -1.0))], zeros, name="K(x)L - V")
    prog.add_linear({witness: float(np.trace(marginal).real) * np.eye(w_dim, dtype=complex)}, "<=", 1.0,
                    name="measure cap")
    prog.add_psd([("S", LinOp("id", 1.0))], -mu * rho, name="support guard")
    prog.set_objective({"S": herm_part(grad)})
    return prog


def _upsilon(rho, side: str, cfg: FWConfig | None = None) -> UpsilonResult:
    cfg = cfg or FWConfig()
    rmat, dA, dB = _as_bip(rho)
    rho_a = ptrace_matrix(rmat, dA, dB, "B")
    rho_b = ptrace_matrix(rmat, dA, dB, "A")
    marginal = rho_a if side == "A" else rho_b
    mu = cfg.support_guard

    sigma = np.kron(rho_a, rho_b)
    if min_eig(sigma - mu * rmat) < -1e-12:
        # guard dominates the product start only in pathological cases; mix
        # toward the state itself, which trivially satisfies sigma >= mu*rho
        sigma = (1.0 - 2.0 * mu) * sigma + 2.0 * mu * rmat

    gap = float("inf")
    status = "IterationLimit"
    lmo_calls = 0
    iterations = 0
    for iterations in range(cfg.max_iters):
        grad = divergence_gradient(rmat, sigma)
        # the LMO argmin is invariant under positive scaling of the
        # objective; normalizing keeps the SDP well conditioned once the
        # gradient norm grows near the support-guard boundary
        gscale = max(float(np.linalg.norm(grad)), 1.0)
        prog = _lmo_program(grad / gscale, rmat, dA, dB, side, marginal, mu)
        report = solve_or_raise(prog, cfg.lmo_opts)
        lmo_calls += 1
        vertex = report.primal["S"]
        gap = max(float(np.trace(grad @ (sigma - vertex)).real), 0.0)
        if gap <= cfg.gap_tol_bits:
            status = "Converged"
            break
        direction = vertex - sigma

        def slope(t: float) -> float:
            return float(np.trace(divergence_gradient(rmat, sigma + t * direction) @ direction).real)

        t_hi = 1.0 - 2.0**-40
        if slope(t_hi) <= 0.0:
            step = t_hi
        else:
            lo, hi = 0.0, t_hi
            for _ in range(cfg.line_search_iters):
                mid = 0.5 * (lo + hi)
                if slope(mid) > 0.0:
                    hi = mid
                else:
                    lo = mid
            step = 0.5 * (lo + hi)
        sigma = herm_part(sigma + step * direction)

    value = relative_entropy(rmat, sigma)
    # independent certification: re-solve the exact restriction at sigma*
    check = beta_a(_wrap(sigma, dA, dB), marginal) if side == "A" else beta_b(_wrap(sigma, dA, dB), marginal)
    if check.raw_value > 1.0 + 1e-7:
        raise SolverFailureError(
            f"returned sigma* fails the measure certificate: beta = {check.raw_value}"
        )
    if min_eig(sigma - mu * rmat) < -1e-9:
        raise SolverFailureError("returned sigma* violates the support guard")
    return UpsilonResult(
        value_bits=value,
        sigma_star=sigma,
        fw_gap_bits=gap,
        beta_of_sigma=check.raw_value,
        iterations=iterations,
        side=side,
        lmo_calls=lmo_calls,
        status=status,
    )


def _wrap(mat: np.ndarray, dA: int, dB: int):
    from .operators import BipartiteOperator

    return BipartiteOperator(herm_part(mat), dA, dB)


def upsilon_a(rho, cfg: FWConfig | None = None) -> UpsilonResult:
    """Upper bound with the A-side marginal pinned in the restriction."""
    return _upsilon(rho, "A", cfg)


def upsilon_b(rho, cfg: FWConfig | None = None) -> UpsilonResult:
    """Upper bound with the B-side marginal pinned in the restriction."""
    return _upsilon(rho, "B", cfg)


def upper_bound_min(rho, cfg: FWConfig | None = None) -> BoundResult:
    """min of the two one-sided upper bounds, both certificates retained."""
    res_a = upsilon_a(rho, cfg)
    res_b = upsilon_b(rho, cfg)
    best = res_a if res_a.value_bits <= res_b.value_bits else res_b
    return BoundResult(
        value_bits=best.value_bits,
        method="upsilon" + best.side,
        certificate=best.sigma_star,
        fw_gap_bits=best.fw_gap_bits,
        solver_stats={
            "upsilonA": res_a.value_bits,
            "upsilonB": res_b.value_bits,
            "fw_gap_A": res_a.fw_gap_bits,
            "fw_gap_B": res_b.fw_gap_bits,
            "iterations_A": res_a.iterations,
            "iterations_B": res_b.iterations,
            "results": (res_a, res_b),
        },
    )


def one_shot_penalty(eps: float, alpha: float) -> float:
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    if alpha <= 1.0:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    return (alpha / (alpha - 1.0)) * math.log2(1.0 / (1.0 - eps))


def one_shot_upper_bound(rho, eps: float, alpha: float, cfg: FWConfig | None = None) -> BoundResult:
    """Finite-error bound: min over sides of the alpha-divergence at sigma*,
    plus the error penalty (alpha/(alpha-1)) log2(1/(1-eps))."""
    penalty = one_shot_penalty(eps, alpha)
    rmat, dA, dB = _as_bip(rho)
    res_a = upsilon_a(rho, cfg)
    res_b = upsilon_b(rho, cfg)
    d_a = sandwiched_renyi(rmat, res_a.sigma_star, alpha)
    d_b = sandwiched_renyi(rmat, res_b.sigma_star, alpha)
    base = min(d_a, d_b)
    side = "A" if d_a <= d_b else "B"
    best = res_a if side == "A" else res_b
    return BoundResult(
        value_bits=base + penalty,
        method="oneShot",
        certificate=best.sigma_star,
        fw_gap_bits=best.fw_gap_bits,
        solver_stats={
            "penalty_bits": penalty,
            "renyi_A": d_a,
            "renyi_B": d_b,
            "alpha": alpha,
            "eps": eps,
            "side": side,
        },
    )
