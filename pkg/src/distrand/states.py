"""Factories for named states, channels, and seeded random instances.

Random generation is deterministic per call: every generator takes an
explicit seed and uses numpy's PCG64 stream, so identical seeds give
bit-identical instances on any platform.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DimensionMismatchError, DomainError, InvalidPOVMError
from .operators import (
    BipartiteOperator,
    DensityMatrix,
    HermitianOperator,
    herm_part,
)

COMPLETENESS_TOL = 1e-9


class QuantumChannel:
    """A completely positive trace-preserving map given by Kraus operators."""

    __slots__ = ("d_in", "d_out", "kraus")

    def __init__(self, kraus):
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        if not ops:
            raise DimensionMismatchError("a channel needs at least one Kraus operator")
        d_out, d_in = ops[0].shape
        for k in ops:
            if k.shape != (d_out, d_in):
                raise DimensionMismatchError("Kraus operators must share a common shape")
        comp = sum(k.conj().T @ k for k in ops)
        if np.linalg.norm(comp - np.eye(d_in)) > COMPLETENESS_TOL * d_in:
            raise DomainError("Kraus operators do not satisfy the completeness relation")
        self.kraus = ops
        self.d_in = d_in
        self.d_out = d_out

    def apply(self, mat: np.ndarray) -> np.ndarray:
        return sum(k @ mat @ k.conj().T for k in self.kraus)

    def __repr__(self):
        return f"QuantumChannel({self.d_in}->{self.d_out}, {len(self.kraus)} Kraus ops)"


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel([np.eye(d)])


def replacer_channel(target: np.ndarray) -> QuantumChannel:
    """The map X -> Tr[X] * target, for a target state."""
    t = np.asarray(target, dtype=complex)
    d_in = t.shape[0]
    w, v = np.linalg.eigh(herm_part(t))
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    # Kraus ops sqrt(target)|e_k><j|: one per (k, j) pair
    kraus = []
    for j in range(d_in):
        for k in range(t.shape[0]):
            op = np.zeros((t.shape[0], d_in), dtype=complex)
            op[:, j] = sq[:, k]
            kraus.append(op)
    return QuantumChannel(kraus)


def dephasing_channel(d: int) -> QuantumChannel:
    return QuantumChannel([np.diag((np.arange(d) == m).astype(complex)) for m in range(d)])


def max_classically_correlated(d: int) -> DensityMatrix:
    """Uniform mixture of |mm><mm| on a d x d bipartition."""
    if d < 1:
        raise DomainError("d must be >= 1")
    m = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        m[k * d + k, k * d + k] = 1.0 / d
    return DensityMatrix(m, d, d)


def max_entangled(d: int) -> DensityMatrix:
    """Rank-one projector onto (1/sqrt(d)) sum_i |ii>."""
    if d < 1:
        raise DomainError("d must be >= 1")
    vec = np.zeros(d * d, dtype=complex)
    for i in range(d):
        vec[i * d + i] = 1.0
    vec /= np.sqrt(d)
    return DensityMatrix(np.outer(vec, vec.conj()), d, d)


def isotropic(d: int, p: float) -> DensityMatrix:
    """(1-p) * maximally entangled + p * I/d^2."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    phi = max_entangled(d).mat
    m = (1.0 - p) * phi + p * np.eye(d * d) / d**2
    return DensityMatrix(m, d, d)


class CQState:
    """A classical-quantum state sum_x p(x)|x><x|_X (x) rho^x_AB.

    The X register can be grouped with either side; `view` returns a
    BipartiteOperator under the grouping (A; BX) or (AX; B), with X placed
    as the trailing factor of its side.  The two views are related by the
    index permutation (a, b, x) <-> (a, x, b).
    """

    __slots__ = ("probs", "cond_states", "dX", "dA", "dB")

    def __init__(self, probs, cond_states):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or len(probs) != len(cond_states):
            raise DimensionMismatchError("probs and cond_states must have equal length")
        if probs.min() < -1e-12 or abs(probs.sum() - 1.0) > 1e-9:
            raise DomainError("probs must be a probability vector")
        dims = {(s.dA, s.dB) for s in cond_states}
        if len(dims) != 1 or None in next(iter(dims)):
            raise DimensionMismatchError("conditional states must share a bipartite shape")
        self.probs = probs
        self.cond_states = list(cond_states)
        self.dX = len(probs)
        self.dA, self.dB = next(iter(dims))

    def view(self, grouping: str) -> BipartiteOperator:
        dA, dB, dX = self.dA, self.dB, self.dX
        n = dA * dB * dX
        # build with factor order (a, b, x), then permute as needed
        t = np.zeros((dA, dB, dX, dA, dB, dX), dtype=complex)
        for x, (p, s) in enumerate(zip(self.probs, self.cond_states)):
            t[:, :, x, :, :, x] = p * s.mat.reshape(dA, dB, dA, dB)
        if grouping == "A;BX":
            m = t.reshape(n, n)
            return BipartiteOperator(m, dA, dB * dX)
        if grouping == "AX;B":
            m = t.transpose(0, 2, 1, 3, 5, 4).reshape(n, n)
            return BipartiteOperator(m, dA * dX, dB)
        raise DomainError(f"grouping must be 'A;BX' or 'AX;B', got {grouping!r}")


def regroup(mat: np.ndarray, dA: int, dB: int, dX: int, to: str) -> np.ndarray:
    """Permute a matrix between the (A;BX) ordering (a,b,x) and (AX;B) ordering (a,x,b)."""
    n = dA * dB * dX
    if to == "AX;B":
        t = mat.reshape(dA, dB, dX, dA, dB, dX).transpose(0, 2, 1, 3, 5, 4)
    elif to == "A;BX":
        t = mat.reshape(dA, dX, dB, dA, dX, dB).transpose(0, 2, 1, 3, 5, 4)
    else:
        raise DomainError(f"unknown grouping {to!r}")
    return t.reshape(n, n)


def random_density_matrix(d: int, rank: int, seed: int) -> DensityMatrix:
    """Normalized G G^dag for a d x rank complex Gaussian matrix G."""
    if not 1 <= rank <= d:
        raise DomainError(f"rank must satisfy 1 <= rank <= d, got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_bipartite_density_matrix(dA: int, dB: int, seed: int, rank: int | None = None) -> DensityMatrix:
    d = dA * dB
    rho = random_density_matrix(d, rank if rank is not None else d, seed)
    return DensityMatrix(BipartiteOperator(rho.op, dA, dB))


def random_psd(d: int, seed: int, rank: int | None = None) -> HermitianOperator:
    """Unnormalized seeded PSD operator (trace equals what the draw gives)."""
    rng = np.random.default_rng(seed)
    r = rank if rank is not None else d
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    return HermitianOperator(g @ g.conj().T / d)


def random_hermitian(d: int, seed: int) -> HermitianOperator:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return HermitianOperator(herm_part(g))


def random_channel(d_in: int, d_out: int, env_dim: int, seed: int) -> QuantumChannel:
    """Kraus operators sliced from a seeded Haar-ish random isometry."""
    if d_out * env_dim < d_in:
        raise DomainError(f"need d_out * env_dim >= d_in, got {d_out * env_dim} < {d_in}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d_out * env_dim, d_in)) + 1j * rng.standard_normal((d_out * env_dim, d_in))
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity so the isometry is a deterministic function of the seed
    q = q * np.sign(np.diag(r).real + (np.diag(r).real == 0))
    kraus = [q[e * d_out : (e + 1) * d_out, :] for e in range(env_dim)]
    return QuantumChannel(kraus)


def apply_local_channels(rho: BipartiteOperator, chan_a: QuantumChannel, chan_b: QuantumChannel) -> BipartiteOperator:
    """(N (x) M)(rho) via the Kraus sums of both channels."""
    if chan_a.d_in != rho.dA or chan_b.d_in != rho.dB:
        raise DimensionMismatchError(
            f"channel inputs ({chan_a.d_in}, {chan_b.d_in}) do not match state dims ({rho.dA}, {rho.dB})"
        )
    out = np.zeros((chan_a.d_out * chan_b.d_out,) * 2, dtype=complex)
    for ka in chan_a.kraus:
        for kb in chan_b.kraus:
            k = np.kron(ka, kb)
            out += k @ rho.mat @ k.conj().T
    return BipartiteOperator(herm_part(out), chan_a.d_out, chan_b.d_out)


def computational_povm(d: int) -> list[np.ndarray]:
    return [np.diag((np.arange(d) == x).astype(complex)) for x in range(d)]


def validate_povm(effects, d: int) -> list[np.ndarray]:
    mats = [np.asarray(e, dtype=complex) for e in effects]
    total = sum(mats)
    if np.linalg.norm(total - np.eye(d)) > 1e-9 * d:
        raise InvalidPOVMError("effects do not sum to the identity")
    for e in mats:
        if np.linalg.eigvalsh(herm_part(e)).min() < -1e-9:
            raise InvalidPOVMError("an effect is not PSD")
    return mats


# ---------------------------------------------------------------------------
# state file format: {"dA": int, "dB": int, "matrix": [[[re, im], ...], ...]}
# row-major, A-major index convention; Hermiticity validated on load.
# ---------------------------------------------------------------------------

def state_to_json_dict(rho: BipartiteOperator) -> dict:
    return {
        "dA": rho.dA,
        "dB": rho.dB,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho.mat],
    }


def save_state(path, rho: BipartiteOperator) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json_dict(rho), fh)


def load_state(path) -> BipartiteOperator:
    with open(path) as fh:
        data = json.load(fh)
    return state_from_json_dict(data)


def state_from_json_dict(data: dict) -> BipartiteOperator:
    for key in ("dA", "dB", "matrix"):
        if key not in data:
            raise DomainError(f"state file is missing the {key!r} field")
    dA, dB = int(data["dA"]), int(data["dB"])
    rows = data["matrix"]
    n = dA * dB
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DimensionMismatchError(f"matrix must be {n} x {n} for dA={dA}, dB={dB}")
    mat = np.array([[complex(c[0], c[1]) for c in row] for row in rows])
    return BipartiteOperator(mat, dA, dB)
