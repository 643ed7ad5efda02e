import numpy as np
import pytest

from distrand import states
from distrand.errors import DomainError, ViolationDetectedError
from distrand.measures import (
    FeasibleTriple,
    beta_a,
    beta_b,
    c_beta,
    c_gamma,
    comm_bound_map_triple,
    dimension_feasible_point,
    dp_map_triple,
    fidelity_bound_check,
    gamma_heuristic,
    product_feasible_point,
    reorder_pair_product,
    tensor_triple,
)
from distrand.operators import partial_trace


def _marginal(rho, side):
    return partial_trace(rho.bip, "B" if side == "A" else "A").mat


class TestBeta:
    def test_classically_correlated_value_is_d(self):
        for d in (2, 3):
            rho = states.max_classically_correlated(d)
            res = beta_a(rho, np.eye(d) / d)
            assert abs(res.raw_value - d) < 1e-5

    def test_product_value_is_one(self):
        rho = states.random_bipartite_density_matrix(2, 2, 3, rank=1)
        a = states.random_density_matrix(2, 2, 30).mat
        b = states.random_density_matrix(2, 2, 31).mat
        prod = states.BipartiteOperator(np.kron(a, b), 2, 2)
        res = beta_a(prod, a)
        assert abs(res.raw_value - 1.0) < 1e-6

    def test_scale_covariance(self):
        rho = states.random_bipartite_density_matrix(2, 2, 17)
        base = beta_a(rho, _marginal(rho, "A")).raw_value
        for c in (0.5, 2.0):
            scaled = states.BipartiteOperator(c * rho.mat, 2, 2)
            val = beta_a(scaled, _marginal(rho, "A")).raw_value
            assert abs(val - c * base) < 1e-6 * max(c * base, 1.0)

    def test_sides_agree_on_swap_symmetric_state(self):
        rho = states.isotropic(2, 0.3)
        va = beta_a(rho, _marginal(rho, "A")).raw_value
        vb = beta_b(rho, _marginal(rho, "B")).raw_value
        assert abs(va - vb) < 1e-6

    def test_certificate_attached_and_verified(self):
        rho = states.isotropic(2, 0.5)
        res = beta_a(rho, _marginal(rho, "A"))
        triple = res.certificate
        assert isinstance(triple, FeasibleTriple)
        ok, _ = triple.verify(rho.mat)
        assert ok
        assert abs(triple.value - res.raw_value) < 1e-6


class TestGammaHeuristic:
    def test_product_close_to_one(self):
        a = states.random_density_matrix(2, 2, 40).mat
        b = states.random_density_matrix(2, 2, 41).mat
        prod = states.BipartiteOperator(np.kron(a, b), 2, 2)
        res = gamma_heuristic(prod)
        assert res.raw_value <= 1.0 + 1e-6

    def test_never_exceeds_beta(self):
        rho = states.random_bipartite_density_matrix(2, 2, 42)
        g = gamma_heuristic(rho.bip).raw_value
        bta = beta_a(rho, _marginal(rho, "A")).raw_value
        assert g <= bta + 1e-6

    def test_certificate_is_verifiable(self):
        rho = states.isotropic(2, 0.4)
        res = gamma_heuristic(rho.bip)
        ok, _ = res.certificate.verify(rho.mat)
        assert ok


def test_log_scale_helpers():
    assert np.isclose(c_gamma(2.0), 1.0)
    assert np.isclose(c_beta(1.0), 0.0)
    with pytest.raises(DomainError):
        c_gamma(0.0)
    with pytest.raises(DomainError):
        c_beta(-1.0)


class TestFeasiblePoints:
    def test_product_point_value_is_trace_product(self):
        a = states.random_psd(2, 50).mat
        b = states.random_psd(3, 51).mat
        triple = product_feasible_point(a, b)
        assert np.isclose(triple.value, np.trace(a).real * np.trace(b).real, atol=1e-9)
        ok, _ = triple.verify(np.kron(a, b))
        assert ok

    def test_dimension_point_values(self):
        rho = states.random_bipartite_density_matrix(2, 3, 52)
        assert np.isclose(dimension_feasible_point(rho, "A").value, 3.0, atol=1e-9)
        assert np.isclose(dimension_feasible_point(rho, "B").value, 2.0, atol=1e-9)

    def test_build_rejects_infeasible(self):
        rho = states.random_bipartite_density_matrix(2, 2, 53)
        good = dimension_feasible_point(rho, "A")
        with pytest.raises(ViolationDetectedError):
            FeasibleTriple.build(good.K, good.L, good.V + 0.5 * np.eye(4), rho.mat, 2, 2)


class TestCertificateMaps:
    def test_local_channels_preserve_value(self):
        rho = states.random_bipartite_density_matrix(2, 2, 60)
        triple = dimension_feasible_point(rho, "A")
        na = states.random_channel(2, 2, 2, 61)
        mb = states.random_channel(2, 2, 2, 62)
        mapped = dp_map_triple(triple, rho, na, mb)
        assert np.isclose(mapped.value, triple.value, atol=1e-9)

    def test_tensor_is_multiplicative(self):
        r1 = states.random_bipartite_density_matrix(2, 2, 63)
        r2 = states.random_bipartite_density_matrix(2, 2, 64)
        t1 = dimension_feasible_point(r1, "A")
        t2 = dimension_feasible_point(r2, "B")
        prod = tensor_triple(t1, r1, t2, r2)
        assert np.isclose(prod.value, t1.value * t2.value, atol=1e-9)
        assert prod.dA == 4 and prod.dB == 4

    def test_classical_register_move_scales_by_dx(self):
        conds = [states.random_bipartite_density_matrix(2, 2, 70 + x) for x in range(3)]
        cq = states.CQState([0.2, 0.5, 0.3], conds)
        base = dimension_feasible_point(
            states.DensityMatrix(cq.view("A;BX")), "A")
        moved = comm_bound_map_triple(base, cq)
        assert np.isclose(moved.value, 3.0 * base.value, atol=1e-8)
        ok, _ = moved.verify(cq.view("AX;B").mat)
        assert ok

    def test_reorder_pair_product_on_kron(self):
        a1 = states.random_hermitian(2, 80).mat
        b1 = states.random_hermitian(2, 81).mat
        a2 = states.random_hermitian(2, 82).mat
        b2 = states.random_hermitian(2, 83).mat
        mixed = np.kron(np.kron(a1, b1), np.kron(a2, b2))
        sorted_ = np.kron(np.kron(a1, a2), np.kron(b1, b2))
        assert np.allclose(reorder_pair_product(mixed, 2, 2, 2, 2), sorted_)


class TestFidelityCeiling:
    def test_saturation_cases(self):
        d = 2
        # both reference points already have unit measure, so g = 1
        half_phibar = states.BipartiteOperator(states.max_classically_correlated(d).mat / d, d, d)
        out = fidelity_bound_check(half_phibar, 1.0, d)
        assert abs(out["observed"] - 1.0 / d) < 1e-9
        uniform = states.BipartiteOperator(np.eye(d * d) / d**2, d, d)
        out = fidelity_bound_check(uniform, 1.0, d)
        assert abs(out["observed"] - 1.0 / d) < 1e-9

    def test_violation_raises(self):
        d = 2
        phibar = states.BipartiteOperator(states.max_classically_correlated(d).mat, d, d)
        with pytest.raises(ViolationDetectedError):
            fidelity_bound_check(phibar, 0.1, d)
