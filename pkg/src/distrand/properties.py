"""Deterministic property suite: every mathematically guaranteed identity
or inequality in the package, instantiated on seeded random inputs.

Each check returns its worst residual (how far the property was from
failing); a residual above the property's tolerance is a build bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic, entropic, measures, operators, states


@dataclass
class PropertyResult:
    name: str
    ok: bool
    max_residual: float
    tolerance: float
    detail: str = ""


def _result(name, residual, tol, detail=""):
    return PropertyResult(name, residual <= tol, float(residual), tol, detail)


def check_pt_involution(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        w = states.random_hermitian(6, seed + i)
        bip = operators.BipartiteOperator(w, 2, 3)
        back = operators.partial_transpose(operators.partial_transpose(bip, "B"), "B")
        worst = max(worst, float(np.abs(back.mat - bip.mat).max()))
        worst = max(worst, abs(operators.partial_transpose(bip, "B").trace - bip.trace))
    return _result("partial_transpose_involution_and_trace", worst, 0.0)


def check_pt_side_equivalence(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        w = states.random_hermitian(6, seed + 1000 + i)
        bip = operators.BipartiteOperator(w, 2, 3)
        ma = operators.partial_transpose(bip, "A").op.min_eig()
        mb = operators.partial_transpose(bip, "B").op.min_eig()
        worst = max(worst, abs(ma - mb))
    return _result("pt_side_min_eig_equivalence", worst, 1e-9)


def check_schatten_vs_trace(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        w = states.random_hermitian(5, seed + 2000 + i)
        worst = max(worst, abs(w.trace) - operators.schatten_norm(w, 1))
    return _result("schatten1_dominates_trace", max(worst, 0.0), 1e-10)


def check_sqrt_square_roundtrip(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        x = states.random_psd(5, seed + 3000 + i)
        back = operators.matrix_power(operators.matrix_sqrt(x), 2.0)
        worst = max(worst, float(np.abs(back.mat - x.mat).max()) / max(np.linalg.norm(x.mat), 1e-300))
    return _result("sqrt_then_square_roundtrip", worst, 1e-8)


def check_fidelity_symmetry_and_dephasing(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    d = 2
    target = states.max_classically_correlated(d)
    for i in range(trials):
        rho = states.random_bipartite_density_matrix(d, d, seed + 4000 + i)
        sig = states.random_bipartite_density_matrix(d, d, seed + 4500 + i)
        worst = max(worst, abs(operators.fidelity(rho, sig) - operators.fidelity(sig, rho)))
        # joint dephasing can only raise the fidelity with the diagonal target
        raw = operators.fidelity(target, sig)
        deph = operators.fidelity(target, operators.dephase(sig.bip, "both"))
        worst = max(worst, raw - deph)
    return _result("fidelity_symmetry_and_dephasing_monotonicity", max(worst, 0.0), 1e-9)


def check_isotropic_affine(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    rng = np.random.default_rng(seed + 5000)
    ends = (states.isotropic(2, 0.0).mat, states.isotropic(2, 1.0).mat)
    for _ in range(trials):
        p = float(rng.uniform())
        mix = (1 - p) * ends[0] + p * ends[1]
        worst = max(worst, float(np.abs(states.isotropic(2, p).mat - mix).max()))
    return _result("isotropic_affine_in_p", worst, 0.0)


def check_channel_spectator(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        rho = states.random_bipartite_density_matrix(2, 2, seed + 6000 + i)
        chan = states.random_channel(2, 2, 2, seed + 6500 + i)
        ident = states.identity_channel(2)
        out = states.apply_local_channels(rho.bip, chan, ident)
        # same channel acting on the A factor directly
        direct = sum(
            np.kron(k, np.eye(2)) @ rho.mat @ np.kron(k, np.eye(2)).conj().T for k in chan.kraus
        )
        worst = max(worst, float(np.abs(out.mat - direct).max()))
    return _result("local_channel_commutes_with_spectator", worst, 1e-12)


def check_cq_view_roundtrip(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        rng = np.random.default_rng(seed + 7000 + i)
        probs = rng.dirichlet(np.ones(2))
        cq = states.CQState(probs, [states.random_bipartite_density_matrix(2, 2, seed + 7100 + i + 31 * x)
                                    for x in range(2)])
        v1 = cq.view("A;BX").mat
        v2 = cq.view("AX;B").mat
        back = states.regroup(v2, 2, 2, 2, "A;BX")
        worst = max(worst, float(np.abs(back - v1).max()))
    return _result("cq_view_permutation_roundtrip", worst, 0.0)


def check_embedding_spectrum(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    for i in range(trials):
        x = states.random_hermitian(4, seed + 8000 + i)
        emb = conic.embed_hermitian(x.mat)
        ex = np.linalg.eigvalsh(x.mat)
        ee = np.linalg.eigvalsh(emb)
        worst = max(worst, float(np.abs(np.sort(np.repeat(ex, 2)) - np.sort(ee)).max()))
        worst = max(worst, abs(np.trace(emb) - 2 * x.trace))
    return _result("real_embedding_doubles_spectrum", worst, 1e-10)


def check_beta_gamma_sandwich(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    n = min(trials, 8)
    for i in range(n):
        rho = states.random_bipartite_density_matrix(2, 2, seed + 9000 + i)
        rho_a = operators.partial_trace(rho.bip, "B").mat
        beta = measures.beta_a(rho, rho_a).raw_value
        gamma = measures.gamma_heuristic(rho).raw_value
        worst = max(worst, gamma - beta)          # beta >= gamma
        worst = max(worst, 1.0 - gamma)           # gamma >= Tr(rho) = 1
        worst = max(worst, gamma - 2.0)           # gamma <= min(dA, dB)
    return _result("beta_gamma_value_sandwich", max(worst, 0.0), 1e-6)


def check_swap_covariance(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    n = min(trials, 8)
    for i in range(n):
        rho = states.random_bipartite_density_matrix(2, 3, seed + 9500 + i)
        triple = measures.dimension_feasible_point(rho, "A")
        # swap A and B everywhere; the swapped triple must verify with equal value
        dA, dB = 2, 3
        perm = operators.BipartiteOperator(
            _swap_sides(rho.mat, dA, dB), dB, dA
        )
        swapped = measures.FeasibleTriple.build(
            triple.L, triple.K, _swap_sides(triple.V, dA, dB), perm.mat, dB, dA
        )
        worst = max(worst, abs(swapped.value - triple.value))
    return _result("triple_swap_covariance", worst, 1e-9)


def _swap_sides(mat: np.ndarray, dA: int, dB: int) -> np.ndarray:
    n = dA * dB
    return mat.reshape(dA, dB, dA, dB).transpose(1, 0, 3, 2).reshape(n, n)


def check_certificate_maps(seed: int, trials: int, corrupt: bool = False) -> PropertyResult:
    worst = 0.0
    detail = ""
    n = min(trials, 10)
    for i in range(n):
        rho = states.random_bipartite_density_matrix(2, 2, seed + 10000 + i)
        triple = measures.dimension_feasible_point(rho, "A")
        if corrupt and i == 0:
            bad_v = triple.V + 0.5 * np.eye(4)
            ok, _ = conic.verify_feasible(triple.K, triple.L, bad_v, rho.mat, 2, 2, measures.TRIPLE_TOL)
            if ok:
                worst = max(worst, 1.0)
                detail = "injected corruption went undetected"
            continue
        # local-channel map preserves the objective exactly
        na = states.random_channel(2, 2, 2, seed + 10100 + i)
        mb = states.random_channel(2, 2, 2, seed + 10200 + i)
        mapped = measures.dp_map_triple(triple, rho, na, mb)
        worst = max(worst, abs(mapped.value - triple.value))
        # tensor map is exactly multiplicative
        t2 = measures.dimension_feasible_point(rho, "B")
        prod = measures.tensor_triple(triple, rho, t2, rho)
        worst = max(worst, abs(prod.value - triple.value * t2.value))
        # classical-register move multiplies the objective by dX
        rng = np.random.default_rng(seed + 10300 + i)
        cq = states.CQState(rng.dirichlet(np.ones(2)),
                            [states.random_bipartite_density_matrix(2, 2, seed + 10400 + i + 7 * x)
                             for x in range(2)])
        base = measures.dimension_feasible_point(
            operators.DensityMatrix(cq.view("A;BX")), "A")
        moved = measures.comm_bound_map_triple(base, cq)
        worst = max(worst, abs(moved.value - 2.0 * base.value))
    return _result("certificate_map_objectives", worst, 1e-7, detail)


def check_fidelity_ceiling(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    d = 2
    n = min(trials, 10)
    for i in range(n):
        sig = states.random_psd(d * d, seed + 11000 + i)
        bip = operators.BipartiteOperator(sig, d, d)
        g = measures.gamma_heuristic(bip).raw_value
        out = measures.fidelity_bound_check(bip, g, d)
        worst = max(worst, out["observed"] - out["bound"])
    return _result("fidelity_ceiling_after_normalization", max(worst, 0.0), 1e-6)


def check_gradient_finite_difference(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    n = min(trials, 10)
    h = 1e-5
    for i in range(n):
        rho = states.random_density_matrix(4, 4, seed + 12000 + i).mat
        sig = states.random_psd(4, seed + 12100 + i).mat + 0.2 * np.eye(4)
        direction = states.random_hermitian(4, seed + 12200 + i).mat
        grad = entropic.divergence_gradient(rho, sig)
        analytic = float(np.trace(grad @ direction).real)
        plus = entropic.relative_entropy(rho, sig + h * direction)
        minus = entropic.relative_entropy(rho, sig - h * direction)
        numeric = (plus - minus) / (2 * h)
        worst = max(worst, abs(analytic - numeric) / max(abs(numeric), 1e-12))
    return _result("divergence_gradient_vs_finite_difference", worst, 1e-5)


def check_renyi_oracles(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    rng = np.random.default_rng(seed + 13000)
    grid = (1.1, 1.5, 2.0, 3.0, 5.0)
    for i in range(trials):
        # commuting pair: classical Renyi formula is the oracle
        p = rng.dirichlet(np.ones(4))
        q = rng.dirichlet(np.ones(4))
        alpha = float(rng.uniform(1.2, 4.0))
        quantum = entropic.sandwiched_renyi(np.diag(p), np.diag(q), alpha)
        classical = math.log2(float(np.sum(p**alpha * q ** (1 - alpha)))) / (alpha - 1)
        worst = max(worst, abs(quantum - classical))
        # alpha-monotonicity on a full-rank quantum pair
        rho = states.random_density_matrix(4, 4, seed + 13100 + i).mat
        sig = states.random_density_matrix(4, 4, seed + 13200 + i).mat
        values = [entropic.sandwiched_renyi(rho, sig, a) for a in grid]
        worst = max(worst, max(values[j] - values[j + 1] for j in range(len(values) - 1)))
        # scaling identity for the relative entropy
        c = float(rng.uniform(0.2, 3.0))
        worst = max(worst, abs(entropic.relative_entropy(rho, c * rho) + math.log2(c)))
    return _result("renyi_and_relative_entropy_oracles", max(worst, 0.0), 1e-9)


def check_bound_chain(seed: int, trials: int) -> PropertyResult:
    worst = 0.0
    n = min(trials, 4)
    povm = states.computational_povm(2)
    # every feasible iterate certifies an upper bound, so a small iteration
    # budget keeps this check cheap without weakening it
    cfg = entropic.FWConfig(max_iters=40)
    for i in range(n):
        rho = states.random_bipartite_density_matrix(2, 2, seed + 14000 + i)
        upper = entropic.upper_bound_min(rho, cfg).value_bits
        lower = entropic.holevo_of_measured_ensemble(rho, povm)
        worst = max(worst, lower - upper)
    return _result("upper_bound_dominates_holevo_lower", max(worst, 0.0), 1e-6)


ALL_CHECKS = [
    check_pt_involution,
    check_pt_side_equivalence,
    check_schatten_vs_trace,
    check_sqrt_square_roundtrip,
    check_fidelity_symmetry_and_dephasing,
    check_isotropic_affine,
    check_channel_spectator,
    check_cq_view_roundtrip,
    check_embedding_spectrum,
    check_beta_gamma_sandwich,
    check_swap_covariance,
    check_certificate_maps,
    check_fidelity_ceiling,
    check_gradient_finite_difference,
    check_renyi_oracles,
    check_bound_chain,
]


def run_suite(seed: int, trials: int, corrupt: bool = False) -> list[PropertyResult]:
    results = []
    for fn in ALL_CHECKS:
        if fn is check_certificate_maps:
            results.append(fn(seed, trials, corrupt=corrupt))
        else:
            results.append(fn(seed, trials))
    return results
