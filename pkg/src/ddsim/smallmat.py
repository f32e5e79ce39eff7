"""
Dense complex linear algebra for small Hilbert spaces (dimension <= 32).

Matrices are plain ``numpy`` arrays of dtype ``complex128``; stacks of
matrices with shape ``(..., d, d)`` are accepted wherever it is cheap to do
so. Storage is row-major and Kronecker products use the first factor as the
slowest index, i.e. ``kron(A, B)[i*dB + k, j*dB + l] = A[i, j] * B[k, l]``.

Units: Hamiltonians carry angular frequencies (rad/s) and times are seconds,
so ``hermitian_expm(h, t)`` is ``exp(-i h t)``.
"""

import numpy as np

__all__ = [
    "SX", "SY", "SZ", "I2",
    "as_matrix", "matmul", "kron", "dagger",
    "is_hermitian", "is_unitary", "unitarity_error",
    "hermitian_expm", "strip_global_phase",
    "normalize_state", "plus_x", "survival_probability",
]

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


I2 = _frozen([[1, 0], [0, 1]])
SX = _frozen([[0, 1], [1, 0]])
SY = _frozen([[0, -1j], [1j, 0]])
SZ = _frozen([[1, 0], [0, -1]])


def as_matrix(a):
    """Return ``a`` as a complex square matrix (or stack), raising on bad shape."""
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a @ b


def kron(*factors):
    """Kronecker product of one or more matrices, first factor slowest."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _scale(a):
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def is_hermitian(h, tol=HERMITIAN_TOL):
    """True when ``max|H - H^dagger| < tol * max(1, max|H|)``."""
    h = as_matrix(h)
    return bool(np.max(np.abs(h - dagger(h))) < tol * _scale(h))


def unitarity_error(u):
    u = as_matrix(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(dagger(u) @ u - eye)))


def is_unitary(u, tol=UNITARY_TOL):
    return unitarity_error(u) < tol


def hermitian_expm(h, t):
    """
    Compute ``exp(-i h t)`` for a Hermitian generator ``h``.

    Uses the eigendecomposition ``h = V diag(w) V^dagger`` so the accuracy does
    not degrade with ``||h|| t`` the way a truncated series would.

    Parameters
    ----------
    h : array_like, shape (..., d, d)
        Hermitian generator in rad/s. Stacks are propagated independently.
    t : float
        Evolution time in seconds.

    Returns
    -------
    numpy.ndarray
        Unitary propagator(s) with the shape of ``h``.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise ValueError("hermitian_expm requires a Hermitian generator")
    # symmetrize so eigh sees exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    phases = np.exp(-1j * w * t)
    return (v * phases[..., None, :]) @ dagger(v)


def strip_global_phase(u):
    """Remove the global phase of a near-identity propagator using its trace."""
    u = as_matrix(u)
    tr = np.trace(u, axis1=-2, axis2=-1)
    mag = np.abs(tr)
    phase = np.where(mag > 0, np.conj(tr) / np.where(mag > 0, mag, 1.0), 1.0)
    return u * phase[..., None, None]


def normalize_state(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero vector cannot be normalized")
    return psi / norm


def plus_x():
    """The +1 eigenstate of sigma_x, used as the initial sensor state."""
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


def survival_probability(u, psi0):
    """Return ``|<psi0| U |psi0>|^2``."""
    u = as_matrix(u)
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.shape[0] != u.shape[-1]:
        raise ValueError(f"dimension mismatch: state {psi0.shape[0]} vs matrix {u.shape[-1]}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    amp = np.einsum("i,...ij,j->...", np.conj(psi0), u, psi0)
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)
