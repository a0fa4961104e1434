"""Dense complex linear algebra and quantum-state primitives.

Everything downstream (weak measurements, spin baths, error correction,
holonomies) runs on plain ``numpy`` complex arrays.  Qubit 0 is the most
significant tensor factor throughout: ``|abc>`` has flat index
``a*4 + b*2 + c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIM_CAP = 4096

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DimensionError(ValueError):
    """Incompatible or over-cap matrix dimensions."""


class ShapeError(ValueError):
    """Tensor-factor bookkeeping does not match the matrix shape."""


class NotHermitianError(ValueError):
    """Operator fails the Hermiticity tolerance."""


class NotPSDError(ValueError):
    """Operator has an eigenvalue below the PSD tolerance."""


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={a.ndim}")
    return a


def require_finite(m: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix contains NaN or Inf")
    return m


def require_hermitian(m, tol: float = TOL_HERM) -> np.ndarray:
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"not square: {a.shape}")
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise NotHermitianError(f"Hermiticity deviation {dev:.3e} > {tol:.1e}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product, left factor most significant."""
    out = np.array([[1.0 + 0j]])
    for o in ops:
        o = np.asarray(o, dtype=complex)
        if out.shape[0] * o.shape[0] > DIM_CAP:
            raise DimensionError(
                f"tensor dimension {out.shape[0] * o.shape[0]} exceeds cap {DIM_CAP}"
            )
        out = np.kron(out, o)
    return out


def kets(*bits) -> np.ndarray:
    """Computational-basis column vector |b0 b1 ...> (qubit 0 most significant)."""
    n = len(bits)
    v = np.zeros(2**n, dtype=complex)
    v[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return v


def proj(vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def partial_trace(rho: np.ndarray, dims, keep) -> np.ndarray:
    """Reduced matrix over the kept factors; ``dims`` lists every factor dim."""
    rho = _as_matrix(rho)
    dims = list(dims)
    d = int(np.prod(dims))
    if rho.shape != (d, d):
        raise ShapeError(f"dims {dims} do not match matrix shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ShapeError("keep must be nonempty")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    r = rho.reshape(dims + dims)
    # trace out factors not kept, highest axis first so indices stay valid
    for ax in sorted((i for i in range(n) if i not in keep), reverse=True):
        r = np.trace(r, axis1=ax, axis2=ax + r.ndim // 2)
    dk = int(np.prod([dims[k] for k in keep]))
    return r.reshape(dk, dk)


def eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, eigenvalues ascending."""
    a = require_hermitian(m)
    w, v = np.linalg.eigh(a)
    return w, v


def eig_general(m) -> np.ndarray:
    """All eigenvalues of a general square matrix."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"not square: {a.shape}")
    return np.linalg.eigvals(a)


def sqrtm_psd(m, tol: float = TOL_PSD) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-tol, 0) are clipped to zero (ODE / round-off slack);
    anything below -tol raises :class:`NotPSDError`.
    """
    w, v = eigh(m)
    if w.size and w[0] < -tol:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -{tol:.1e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def expm_skew(h, t: float = 1.0) -> np.ndarray:
    """Unitary exp(-i h t) for Hermitian h."""
    w, v = eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def fidelity(tau, ups) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(tau) ups sqrt(tau)), in [0, 1]."""
    a = _as_matrix(tau)
    b = _as_matrix(ups)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch {a.shape} vs {b.shape}")
    ra = sqrtm_psd(a)
    inner = ra @ b @ ra
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(w))))


def trace_distance(a, b) -> float:
    """(1/2) Tr |a - b| for Hermitian a, b."""
    diff = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(w)))


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = _as_matrix(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated Hermitian, PSD, trace-1 state.  The array is frozen."""

    mat: np.ndarray

    def __post_init__(self):
        a = _as_matrix(self.mat)
        require_finite(a)
        require_hermitian(a, TOL_HERM)
        tr = np.trace(a).real
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValueError(f"trace {tr} != 1 beyond {TOL_TRACE:.1e}")
        w = np.linalg.eigvalsh(a)
        if w[0] < -1e-10:
            raise NotPSDError(f"state eigenvalue {w[0]:.3e} < -1e-10")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_bloch(cls, vx: float, vy: float, vz: float) -> "DensityMatrix":
        return cls(0.5 * (I2 + vx * X + vy * Y + vz * Z))

    def bloch(self) -> tuple[float, float, float]:
        if self.dim != 2:
            raise DimensionError("Bloch vector needs a qubit state")
        m = self.mat
        return (
            float(np.trace(X @ m).real),
            float(np.trace(Y @ m).real),
            float(np.trace(Z @ m).real),
        )


@dataclass(frozen=True)
class Decomposition:
    """Hilbert-space split H = H^A (x) H^B (+) K.

    The first ``d_a * d_b`` basis vectors span the AB subspace (A-major),
    the last ``d_k`` span K.
    """

    d_a: int
    d_b: int
    d_k: int

    def __post_init__(self):
        if self.d_a < 1 or self.d_b < 1 or self.d_k < 0:
            raise ValueError("need d_a, d_b >= 1 and d_k >= 0")

    @property
    def d_ab(self) -> int:
        return self.d_a * self.d_b

    @property
    def dim(self) -> int:
        return self.d_ab + self.d_k

    def p_ab(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        p[: self.d_ab, : self.d_ab] = np.eye(self.d_ab)
        return p

    def p_k(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        if self.d_k:
            p[self.d_ab :, self.d_ab :] = np.eye(self.d_k)
        return p

    def ab_block(self, m: np.ndarray) -> np.ndarray:
        return np.asarray(m)[: self.d_ab, : self.d_ab]

    def k_block(self, m: np.ndarray) -> np.ndarray:
        return np.asarray(m)[self.d_ab :, self.d_ab :]

    def embed_ab(self, op_ab: np.ndarray) -> np.ndarray:
        """Lift an operator on H^A (x) H^B to the full space (zero on K)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[: self.d_ab, : self.d_ab] = op_ab
        return out

    def trace_out_b(self, m_ab: np.ndarray) -> np.ndarray:
        """Partial trace over B of an operator living on the AB block."""
        r = np.asarray(m_ab).reshape(self.d_a, self.d_b, self.d_a, self.d_b)
        return np.trace(r, axis1=1, axis2=3)

    def trace_out_a(self, m_ab: np.ndarray) -> np.ndarray:
        """Partial trace over A of an operator living on the AB block."""
        r = np.asarray(m_ab).reshape(self.d_a, self.d_b, self.d_a, self.d_b)
        return np.trace(r, axis1=0, axis2=2)

    def reduced_a(self, rho: np.ndarray) -> tuple[np.ndarray, float]:
        """(unnormalized Tr_B of the AB block, its trace weight)."""
        blk = self.ab_block(rho)
        red = self.trace_out_b(blk)
        return red, float(np.trace(red).real)


# ---------------------------------------------------------------------------
# random-object helpers (Haar-ish sampling used across the test harness and
# Monte-Carlo experiments; explicit Generator in, deterministic out)
# ---------------------------------------------------------------------------


def rand_state_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def rand_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = rank or dim
    a = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = a @ a.conj().T
    return m / np.trace(m).real


def rand_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def rand_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_kraus_channel(dim: int, n_ops: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random CPTP channel: raw Gaussian blocks, completeness enforced."""
    ops = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(n_ops)]
    s = sum(dagger(k) @ k for k in ops)
    w, v = np.linalg.eigh(s)
    s_inv_rt = (v / np.sqrt(w)) @ v.conj().T
    return [k @ s_inv_rt for k in ops]


def apply_channel(kraus_ops, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ dagger(k) for k in kraus_ops)


def choi_matrix(kraus_ops, dim: int) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) E(|i><j|)."""
    c = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in kraus_ops:
        vec = np.asarray(k).T.reshape(-1)  # (I (x) K) |Omega>
        c += np.outer(vec, vec.conj())
    return c
