"""Small dense complex linear algebra.

Everything here works on plain ``numpy`` complex arrays of shape ``(d, d)``,
stored row-major.  The matrix exponential is only ever needed for
``exp(-i t H)`` with ``H`` Hermitian, so it is built on a Hermitian
eigendecomposition, which keeps the result unitary up to roundoff.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinAlgError",
    "NotHermitianError",
    "pauli",
    "pauli_string",
    "kron",
    "dagger",
    "is_hermitian",
    "is_unitary",
    "is_skew_hermitian",
    "hermitian_residual",
    "unitarity_residual",
    "hermitian_eig",
    "expm_skew",
    "nuclear_norm",
    "random_unitary",
]

HERMITIAN_TOL = 1e-10
JACOBI_MAX_SWEEPS = 60

_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class LinAlgError(ArithmeticError):
    """Raised when an iterative routine fails to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotHermitianError(ValueError):
    """Raised when a routine that requires a Hermitian matrix gets something else."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def pauli(which: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix named by ``which`` (one of I, X, Y, Z)."""
    try:
        return _PAULI[which.upper()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli matrix {which!r}; expected one of I, X, Y, Z") from None


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of Pauli matrices, leftmost factor first.

    >>> pauli_string("XZ").shape
    (4, 4)
    """
    if not label:
        raise ValueError("empty Pauli string")
    out = pauli(label[0])
    for ch in label[1:]:
        out = kron(out, pauli(ch))
    return out


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_residual(h) -> float:
    """Frobenius norm of ``h - h^dagger``."""
    h = _as_square(h)
    return float(np.linalg.norm(h - dagger(h)))


def unitarity_residual(u) -> float:
    """Frobenius norm of ``u^dagger u - I``."""
    u = _as_square(u)
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])))


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_residual(h) <= tol


def is_skew_hermitian(x, tol: float = HERMITIAN_TOL) -> bool:
    x = _as_square(x)
    return float(np.linalg.norm(x + dagger(x))) <= tol


def is_unitary(u, tol: float = 1e-10) -> bool:
    return unitarity_residual(u) <= tol


def _check_hermitian(h, tol):
    h = _as_square(h)
    res = hermitian_residual(h)
    if res > tol:
        raise NotHermitianError(f"matrix is not Hermitian: ||h - h^H||_F = {res:.3e} > {tol:.1e}", res)
    return h


def hermitian_eig(h, tol: float = HERMITIAN_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` in ascending order and the
    eigenvectors as the columns of the unitary ``v``, so that
    ``h = v @ diag(w) @ v^H``.

    Each rotation first rephases column ``q`` so that the pivot ``a[p, q]``
    becomes real and positive, then applies the classical real Jacobi
    rotation to annihilate it.

    Raises
    ------
    NotHermitianError
        If ``h`` is not Hermitian within ``tol``.
    LinAlgError
        If the off-diagonal mass has not vanished after ``max_sweeps``
        sweeps.  The remaining off-diagonal norm is attached as ``residual``.
    """
    h = _check_hermitian(h, tol)
    d = h.shape[0]
    a = 0.5 * (h + dagger(h))
    v = np.eye(d, dtype=complex)
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    target = np.finfo(float).eps * scale

    offdiag = ~np.eye(d, dtype=bool)

    def off(m):
        return float(np.linalg.norm(m[offdiag]))

    for _ in range(max_sweeps):
        if off(a) <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 0.1 * target / d:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # rephase column q, then real rotation in the (p, q) plane
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = dagger(j) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ j
    else:
        res = off(a)
        if res > target:
            raise LinAlgError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-diagonal norm {res:.3e})",
                res,
            )

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def expm_skew(h, t: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Compute ``exp(-i t h)`` for Hermitian ``h``.

    >>> np.allclose(expm_skew(pauli("Z"), np.pi), -np.eye(2))
    True
    """
    w, v = hermitian_eig(h, tol=tol)
    return (v * np.exp(-1j * t * w)) @ dagger(v)


def nuclear_norm(b) -> float | np.ndarray:
    """Sum of singular values.  Accepts a single matrix or a stack ``(..., d, d)``."""
    b = np.asarray(b, dtype=complex)
    total = np.linalg.svd(b, compute_uv=False).sum(axis=-1)
    return float(total) if b.ndim == 2 else total


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Draw a special-unitary matrix from the Haar measure.

    A complex Gaussian matrix is orthonormalised by QR (with the usual phase
    correction of ``r``'s diagonal), then divided by a ``dim``-th root of its
    determinant so that ``det(u) == 1``.  ``seed`` may be an integer or an
    existing ``numpy.random.Generator``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    det = np.linalg.det(q)
    return q / det ** (1.0 / dim)
