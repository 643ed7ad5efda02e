import json

import numpy as np
import pytest

from distrand import states
from distrand.errors import DimensionMismatchError, DomainError, InvalidPOVMError
from distrand.states import (
    CQState,
    QuantumChannel,
    apply_local_channels,
    computational_povm,
    dephasing_channel,
    identity_channel,
    isotropic,
    load_state,
    max_classically_correlated,
    max_entangled,
    random_bipartite_density_matrix,
    random_channel,
    random_density_matrix,
    regroup,
    replacer_channel,
    save_state,
    validate_povm,
)


class TestNamedStates:
    def test_classically_correlated_diagonal(self):
        rho = max_classically_correlated(3)
        diag = np.diag(rho.mat).real
        assert np.isclose(diag[[0, 4, 8]].sum(), 1.0)
        assert np.allclose(rho.mat, np.diag(diag))

    def test_max_entangled_rank_one(self):
        phi = max_entangled(3)
        w = np.linalg.eigvalsh(phi.mat)
        assert np.isclose(w[-1], 1.0) and np.isclose(w[:-1].sum(), 0.0, atol=1e-12)

    def test_isotropic_endpoints(self):
        assert np.allclose(isotropic(2, 0.0).mat, max_entangled(2).mat)
        assert np.allclose(isotropic(2, 1.0).mat, np.eye(4) / 4)

    def test_isotropic_rejects_bad_p(self):
        with pytest.raises(DomainError):
            isotropic(2, 1.5)


class TestChannels:
    def test_rejects_incomplete_kraus(self):
        with pytest.raises(DomainError):
            QuantumChannel([0.5 * np.eye(2)])

    def test_replacer_outputs_target(self):
        tau = random_density_matrix(2, 2, 0).mat
        ch = replacer_channel(tau)
        rho = random_density_matrix(2, 2, 1).mat
        assert np.allclose(ch.apply(rho), tau, atol=1e-12)

    def test_dephasing_kills_coherence(self):
        rho = max_entangled(2).mat  # treat as a 4-dim single system
        out = dephasing_channel(4).apply(rho)
        assert np.allclose(out, np.diag(np.diag(rho)))

    def test_random_channel_deterministic_and_tp(self):
        c1 = random_channel(2, 3, 2, 42)
        c2 = random_channel(2, 3, 2, 42)
        for k1, k2 in zip(c1.kraus, c2.kraus):
            assert np.array_equal(k1, k2)
        comp = sum(k.conj().T @ k for k in c1.kraus)
        assert np.allclose(comp, np.eye(2), atol=1e-12)

    def test_local_identity_is_noop(self):
        rho = random_bipartite_density_matrix(2, 3, 5)
        out = apply_local_channels(rho.bip, identity_channel(2), identity_channel(3))
        assert np.allclose(out.mat, rho.mat)

    def test_local_channel_dim_mismatch(self):
        rho = random_bipartite_density_matrix(2, 2, 6)
        with pytest.raises(DimensionMismatchError):
            apply_local_channels(rho.bip, identity_channel(3), identity_channel(2))


class TestRandomStates:
    def test_density_matrix_properties(self):
        rho = random_density_matrix(4, 4, 7)
        assert np.isclose(np.trace(rho.mat).real, 1.0)
        assert np.linalg.eigvalsh(rho.mat).min() > -1e-12

    def test_seed_determinism(self):
        a = random_density_matrix(3, 3, 11).mat
        b = random_density_matrix(3, 3, 11).mat
        assert np.array_equal(a, b)

    def test_rank_control(self):
        rho = random_density_matrix(4, 2, 13)
        w = np.linalg.eigvalsh(rho.mat)
        assert (w > 1e-10).sum() == 2


class TestCQState:
    def test_views_are_permutations(self):
        conds = [random_bipartite_density_matrix(2, 2, 100 + x) for x in range(3)]
        cq = CQState([0.5, 0.3, 0.2], conds)
        abx = cq.view("A;BX").mat
        axb = cq.view("AX;B").mat
        assert np.allclose(regroup(abx, 2, 2, 3, "AX;B"), axb)
        assert np.allclose(regroup(axb, 2, 2, 3, "A;BX"), abx)
        assert np.isclose(np.trace(abx).real, 1.0)

    def test_marginal_on_x_recovers_probs(self):
        conds = [random_bipartite_density_matrix(2, 2, 200 + x) for x in range(2)]
        cq = CQState([0.7, 0.3], conds)
        abx = cq.view("A;BX").mat.reshape(2, 4, 2, 4)
        px = np.einsum("abab->b", abx).real.reshape(2, 2).sum(axis=0)
        assert np.allclose(px, [0.7, 0.3])

    def test_rejects_bad_probs(self):
        conds = [random_bipartite_density_matrix(2, 2, 1)]
        with pytest.raises(DomainError):
            CQState([0.5], conds)


class TestPOVM:
    def test_computational_is_valid(self):
        validate_povm(computational_povm(3), 3)

    def test_rejects_incomplete(self):
        with pytest.raises(InvalidPOVMError):
            validate_povm([np.eye(2) * 0.5], 2)

    def test_rejects_negative_effect(self):
        with pytest.raises(InvalidPOVMError):
            validate_povm([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])], 2)


class TestStateIO:
    def test_roundtrip(self, tmp_path):
        rho = random_bipartite_density_matrix(2, 3, 21)
        path = tmp_path / "state.json"
        save_state(path, rho.bip)
        back = load_state(path)
        assert back.dA == 2 and back.dB == 3
        assert np.allclose(back.mat, rho.mat, atol=1e-15)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dA": 2, "dB": 2}))
        with pytest.raises(DomainError):
            load_state(path)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dA": 2, "dB": 2, "matrix": [[[1.0, 0.0]]]}))
        with pytest.raises(DimensionMismatchError):
            load_state(path)
