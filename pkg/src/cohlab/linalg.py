"""Dense complex linear algebra on small matrices.

Matrices are plain :class:`numpy.ndarray` objects of dtype ``complex128``.
Everything here is pure and deterministic; spectra are always returned in
descending order.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .exceptions import (
    BadExponentError,
    NotDistributionError,
    NotHermitianError,
    NotSquareError,
    NotStateError,
)

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-8


class HermitianEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(X) -> np.ndarray:
    """Return ``X`` as a finite 2-D complex array (a copy)."""
    M = np.array(X, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def check_square(X) -> np.ndarray:
    M = as_matrix(X)
    if M.shape[0] != M.shape[1]:
        raise NotSquareError(f"matrix of shape {M.shape} is not square")
    return M


def hermiticity_residual(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def check_hermitian(X, tol: float = HERMITIAN_TOL) -> np.ndarray:
    M = check_square(X)
    res = hermiticity_residual(M)
    if res > tol:
        raise NotHermitianError(f"max |H - H^dag| = {res:.3e} exceeds {tol:.1e}")
    return M


def dagger(X) -> np.ndarray:
    return np.asarray(X).conj().T


def offdiagonal(X) -> np.ndarray:
    """``X - diag(X)``."""
    M = np.array(X, dtype=complex)
    np.fill_diagonal(M, 0.0)
    return M


# --------------------------------------------------------------------------
# eigen-solvers


def _jacobi_symmetric(S: np.ndarray, tol: float, max_sweeps: int):
    """Cyclic Jacobi for a real symmetric matrix; returns (w, V) unsorted."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V


def jacobi_eigh(H, tol: float = 1e-12, max_sweeps: int = 100) -> HermitianEigen:
    """Eigen-decomposition by cyclic Jacobi on the real embedding.

    ``H = A + iB`` is mapped to ``[[A, -B], [B, A]]`` whose spectrum is that of
    ``H`` with every eigenvalue doubled.  Complex eigenvectors are recovered
    from the real ones as ``u + iv`` and re-orthonormalised inside each
    degenerate cluster.
    """
    M = check_hermitian(H)
    d = M.shape[0]
    A, B = M.real, M.imag
    S = np.block([[A, -B], [B, A]])
    S = 0.5 * (S + S.T)
    w, V = _jacobi_symmetric(S, tol, max_sweeps)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    Z = V[:d, :] + 1j * V[d:, :]

    gap = 1e-8 * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    vals, vecs = [], []
    i = 0
    while i < 2 * d:
        j = i + 1
        while j < 2 * d and w[j - 1] - w[j] <= gap:
            j += 1
        basis = []
        for k in range(i, j):
            z = Z[:, k].copy()
            for b in basis:
                z -= (b.conj() @ z) * b
            nz = np.linalg.norm(z)
            if nz > 0.5:
                basis.append(z / nz)
            if len(basis) == (j - i) // 2:
                break
        vals.extend([float(np.mean(w[i:j]))] * len(basis))
        vecs.extend(basis)
        i = j
    return HermitianEigen(np.array(vals), np.column_stack(vecs))


def hermitian_eig(H, method: str = "lapack") -> HermitianEigen:
    """Full spectrum of a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    H : array_like
        Square matrix, Hermitian to within ``1e-9`` (max entry).
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls :func:`numpy.linalg.eigh`; ``"jacobi"`` uses the
        dependency-free :func:`jacobi_eigh`.

    Returns
    -------
    HermitianEigen
        ``eigenvalues`` (descending) and ``eigenvectors`` with column ``i``
        paired to eigenvalue ``i``.
    """
    M = check_hermitian(H)
    if method == "jacobi":
        return jacobi_eigh(M)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    return HermitianEigen(w[::-1].copy(), V[:, ::-1].copy())


def eigvalsh_desc(H) -> np.ndarray:
    M = np.asarray(H)
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))[::-1]


# --------------------------------------------------------------------------
# norms


def singular_values(X) -> np.ndarray:
    """Singular values of ``X`` in descending order."""
    M = as_matrix(X)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def trace_norm(X) -> float:
    M = check_square(X)
    return float(np.sum(singular_values(M)))


def _check_exponent(p: float) -> float:
    p = float(p)
    if not p >= 1.0 or not np.isfinite(p):
        raise BadExponentError(f"exponent must satisfy 1 <= p < inf, got {p}")
    return p


def _power_sum_norm(values: np.ndarray, p: float) -> float:
    if values.size == 0:
        return 0.0
    top = float(np.max(values))
    if top == 0.0:
        return 0.0
    # scale first so large p does not overflow
    return top * float(np.sum((values / top) ** p)) ** (1.0 / p)


def schatten_p_norm(X, p: float) -> float:
    """``(sum_i sigma_i^p)^(1/p)``."""
    p = _check_exponent(p)
    M = check_square(X)
    return _power_sum_norm(singular_values(M), p)


def lp_entrywise_norm(X, p: float) -> float:
    """``(sum_ij |x_ij|^p)^(1/p)``."""
    p = _check_exponent(p)
    M = as_matrix(X)
    return _power_sum_norm(np.abs(M).ravel(), p)


# --------------------------------------------------------------------------
# entropies


def _xlogx(values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values, dtype=float)
    pos = values > 0
    out[pos] = values[pos] * np.log2(values[pos])
    return out


def state_eigenvalues(rho) -> np.ndarray:
    """Eigenvalues of a density matrix with tiny negatives clamped to zero."""
    M = check_hermitian(rho)
    tr = float(np.real(np.trace(M)))
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotStateError(f"trace {tr!r} differs from 1 by more than {TRACE_TOL}")
    w = eigvalsh_desc(M)
    if w.size and w[-1] < -PSD_TOL:
        raise NotStateError(f"eigenvalue {w[-1]:.3e} below -{PSD_TOL}")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho) -> float:
    """``-tr(rho log2 rho)`` in bits."""
    w = state_eigenvalues(rho)
    return float(max(-np.sum(_xlogx(w)), 0.0))


def check_distribution(p, tol: float = TRACE_TOL) -> np.ndarray:
    v = np.asarray(p, dtype=float).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise NotDistributionError("probability vector must be finite and non-empty")
    if np.any(v < -tol):
        raise NotDistributionError(f"negative entry {v.min():.3e}")
    if abs(v.sum() - 1.0) > tol:
        raise NotDistributionError(f"entries sum to {v.sum()!r}, not 1")
    return np.clip(v, 0.0, None)


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    v = check_distribution(p)
    return float(max(-np.sum(_xlogx(v)), 0.0))


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


# --------------------------------------------------------------------------
# assembly


def direct_sum(blocks: Sequence) -> np.ndarray:
    mats = [check_square(b) for b in blocks]
    if not mats:
        return np.zeros((0, 0), dtype=complex)
    return scipy.linalg.block_diag(*mats).astype(complex)


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}``.

    Sort-based algorithm: the projection is ``max(v - tau, 0)`` with ``tau``
    the unique threshold that makes the result sum to one.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def project_simplex_rows(V: np.ndarray) -> np.ndarray:
    """Row-wise :func:`project_simplex` for a 2-D batch."""
    V = np.asarray(V, dtype=float)
    n, d = V.shape
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    k = np.arange(1, d + 1)
    cond = U - css / k > 0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(n), rho] / (rho + 1.0)
    return np.maximum(V - tau[:, None], 0.0)
