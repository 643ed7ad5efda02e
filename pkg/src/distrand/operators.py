"""Dense Hermitian operator algebra on bipartite systems.

All bipartite indexing follows the A-major convention: the composite basis
index is i = a * dB + b.  Everything here is a pure function of its inputs;
wrapped matrices are frozen after construction.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, DomainError, NotPSDError, SingularLogError

HERMITICITY_RTOL = 1e-10
PSD_RTOL = 1e-9
SUPPORT_RTOL = 1e-12


def herm_part(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.conj().T) / 2


def pt_matrix(mat: np.ndarray, dA: int, dB: int, system: str) -> np.ndarray:
    """Partial transpose of a (dA*dB) x (dA*dB) matrix over the named factor."""
    t = mat.reshape(dA, dB, dA, dB)
    if system == "B":
        t = t.transpose(0, 3, 2, 1)
    elif system == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise DomainError(f"system must be 'A' or 'B', got {system!r}")
    return t.reshape(dA * dB, dA * dB)


def ptrace_matrix(mat: np.ndarray, dA: int, dB: int, system: str) -> np.ndarray:
    """Trace out the named factor, returning the marginal on the other one."""
    t = mat.reshape(dA, dB, dA, dB)
    if system == "B":
        return np.trace(t, axis1=1, axis2=3)
    if system == "A":
        return np.trace(t, axis1=0, axis2=2)
    raise DomainError(f"system must be 'A' or 'B', got {system!r}")


def pinch_matrix(mat: np.ndarray, dims: tuple[int, ...], which: int) -> np.ndarray:
    """Completely dephase the `which`-th tensor factor in the computational basis.

    Zeroes every entry whose row and column indices differ on that factor.
    """
    n = int(np.prod(dims))
    if mat.shape != (n, n):
        raise DimensionMismatchError(f"matrix shape {mat.shape} != dims {dims}")
    t = mat.reshape(*dims, *dims)
    k = len(dims)
    idx_row = np.arange(dims[which])
    mask = np.zeros((dims[which], dims[which]), dtype=bool)
    mask[idx_row, idx_row] = True
    shape = [1] * (2 * k)
    shape[which] = dims[which]
    shape[k + which] = dims[which]
    t = t * mask.reshape(shape)
    return t.reshape(n, n)


def min_eig(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(herm_part(mat)).min())


class HermitianOperator:
    """A dense complex Hermitian matrix with its dimension.

    Inputs with relative asymmetry up to 1e-10 are symmetrized on ingest;
    anything worse is rejected rather than silently repaired.
    """

    __slots__ = ("mat", "dim")

    def __init__(self, entries):
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatchError("dimension must be >= 1")
        scale = max(np.linalg.norm(arr), 1.0)
        asym = np.linalg.norm(arr - arr.conj().T)
        if asym > HERMITICITY_RTOL * scale:
            raise DomainError(f"matrix is not Hermitian (relative asymmetry {asym / scale:.3e})")
        mat = herm_part(arr)
        mat.setflags(write=False)
        self.mat = mat
        self.dim = arr.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.mat).min())

    def is_psd(self, rtol: float = PSD_RTOL) -> bool:
        return self.min_eig() >= -rtol * max(abs(self.trace), 1.0)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class BipartiteOperator:
    """A HermitianOperator carrying a (dA, dB) tensor factorization."""

    __slots__ = ("op", "dA", "dB")

    def __init__(self, op, dA: int, dB: int):
        if not isinstance(op, HermitianOperator):
            op = HermitianOperator(op)
        if dA < 1 or dB < 1:
            raise DimensionMismatchError("factor dimensions must be >= 1")
        if dA * dB != op.dim:
            raise DimensionMismatchError(f"dA*dB = {dA * dB} != dim {op.dim}")
        self.op = op
        self.dA = dA
        self.dB = dB

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def trace(self) -> float:
        return self.op.trace

    def __repr__(self):
        return f"BipartiteOperator(dA={self.dA}, dB={self.dB})"


class DensityMatrix:
    """A unit-trace PSD operator, bipartite when factor dims are supplied."""

    __slots__ = ("op", "dA", "dB")

    def __init__(self, op, dA: int | None = None, dB: int | None = None):
        if isinstance(op, BipartiteOperator):
            dA, dB = op.dA, op.dB
            op = op.op
        elif not isinstance(op, HermitianOperator):
            op = HermitianOperator(op)
        tr = op.trace
        if abs(tr - 1.0) > 1e-9:
            raise DomainError(f"trace = {tr}, expected 1")
        if op.min_eig() < -PSD_RTOL * tr:
            raise NotPSDError(f"minimum eigenvalue {op.min_eig():.3e} below tolerance")
        self.op = op
        self.dA = dA
        self.dB = dB

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def bip(self) -> BipartiteOperator:
        if self.dA is None:
            raise DimensionMismatchError("density matrix has no bipartite structure")
        return BipartiteOperator(self.op, self.dA, self.dB)

    def __repr__(self):
        if self.dA is not None:
            return f"DensityMatrix(dA={self.dA}, dB={self.dB})"
        return f"DensityMatrix(dim={self.dim})"


def _matrix_of(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x
    return x.mat


def tensor(x, y) -> BipartiteOperator:
    """Kronecker product under the A-major convention."""
    xm, ym = _matrix_of(x), _matrix_of(y)
    return BipartiteOperator(np.kron(xm, ym), xm.shape[0], ym.shape[0])


def partial_transpose(x: BipartiteOperator, system: str) -> BipartiteOperator:
    return BipartiteOperator(pt_matrix(x.mat, x.dA, x.dB, system), x.dA, x.dB)


def partial_trace(x: BipartiteOperator, system: str) -> HermitianOperator:
    return HermitianOperator(ptrace_matrix(x.mat, x.dA, x.dB, system))


def dephase(x: BipartiteOperator, system: str) -> BipartiteOperator:
    """Pinch one factor (or both) to the computational basis. Idempotent."""
    if system == "A":
        out = pinch_matrix(x.mat, (x.dA, x.dB), 0)
    elif system == "B":
        out = pinch_matrix(x.mat, (x.dA, x.dB), 1)
    elif system == "both":
        out = pinch_matrix(pinch_matrix(x.mat, (x.dA, x.dB), 0), (x.dA, x.dB), 1)
    else:
        raise DomainError(f"system must be 'A', 'B' or 'both', got {system!r}")
    return BipartiteOperator(out, x.dA, x.dB)


def _psd_eig(mat: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(herm_part(mat))
    tr = max(float(w.sum()), 0.0)
    if w.min() < -PSD_RTOL * max(tr, 1.0):
        raise NotPSDError(f"{what}: minimum eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None), v


def fidelity(rho, sigma) -> float:
    """Squared trace norm of sqrt(rho) sqrt(sigma); 1 for identical states."""
    rm, sm = _matrix_of(rho), _matrix_of(sigma)
    wr, vr = _psd_eig(rm, "fidelity: first argument")
    ws, vs = _psd_eig(sm, "fidelity: second argument")
    sqr = (vr * np.sqrt(wr)) @ vr.conj().T
    sqs = (vs * np.sqrt(ws)) @ vs.conj().T
    sv = np.linalg.svd(sqr @ sqs, compute_uv=False)
    return float(sv.sum() ** 2)


def schatten_norm(x, p: float) -> float:
    """(sum_i s_i^p)^(1/p) over singular values; p may be any real >= 1."""
    if p < 1:
        raise DomainError(f"Schatten norm requires p >= 1, got {p}")
    sv = np.linalg.svd(_matrix_of(x), compute_uv=False)
    if p == np.inf:
        return float(sv.max())
    return float(np.sum(sv**p) ** (1.0 / p))


def matrix_sqrt(x) -> HermitianOperator:
    w, v = _psd_eig(_matrix_of(x), "matrix_sqrt")
    return HermitianOperator((v * np.sqrt(w)) @ v.conj().T)


def matrix_power(x, r: float) -> HermitianOperator:
    if r <= 0:
        raise DomainError(f"matrix_power requires r > 0, got {r}")
    w, v = _psd_eig(_matrix_of(x), "matrix_power")
    return HermitianOperator((v * w**r) @ v.conj().T)


def matrix_log2(x, support_only: bool = False) -> HermitianOperator:
    """log2 in the eigenbasis; singular input needs support_only=True.

    With support_only the function is applied on eigenvalues above
    1e-12 * lambda_max and the kernel block is left at zero.  Callers that
    need +infinity semantics (relative entropy) must test support inclusion
    themselves.
    """
    w, v = _psd_eig(_matrix_of(x), "matrix_log2")
    wmax = float(w.max())
    cutoff = SUPPORT_RTOL * wmax
    if np.any(w <= cutoff):
        if not support_only:
            raise SingularLogError("log2 of a singular operator requires support_only=True")
        logw = np.where(w > cutoff, np.log2(np.where(w > cutoff, w, 1.0)), 0.0)
    else:
        logw = np.log2(w)
    return HermitianOperator((v * logw) @ v.conj().T)


def matrix_function(x, f: str, r: float | None = None, support_only: bool = False) -> HermitianOperator:
    """Dispatcher over {sqrt, log2, power(r)} applied on the eigenvalues."""
    if f == "sqrt":
        return matrix_sqrt(x)
    if f == "log2":
        return matrix_log2(x, support_only=support_only)
    if f == "power":
        if r is None:
            raise DomainError("power requires an exponent r")
        return matrix_power(x, r)
    raise DomainError(f"unknown matrix function {f!r}")


def support_projector(mat: np.ndarray, rtol: float = SUPPORT_RTOL) -> np.ndarray:
    """Orthogonal projector onto the eigenspaces above rtol * lambda_max."""
    w, v = np.linalg.eigh(herm_part(mat))
    wmax = max(float(w.max()), 0.0)
    keep = w > rtol * max(wmax, 1e-300)
    vk = v[:, keep]
    return vk @ vk.conj().T
