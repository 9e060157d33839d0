"""Density matrices, pure states and the special state families.

States are plain numpy arrays: a density matrix is a ``(d, d)`` complex
array, a pure state is a 1-D amplitude vector and an incoherent state is a
1-D probability vector.
"""

from __future__ import annotations

import numpy as np

from .exceptions import (
    BadRankError,
    LengthMismatchError,
    NotHermitianError,
    NotPSDError,
    OutOfRangeError,
    TraceNotOneError,
)
from .linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    TRACE_TOL,
    check_distribution,
    check_square,
    eigvalsh_desc,
    hermiticity_residual,
)

PURE_NORM_TOL = 1e-10


def validate_density(M) -> np.ndarray:
    """Check that ``M`` is a density matrix and return a Hermitian copy.

    Raises
    ------
    NotHermitianError, NotPSDError, TraceNotOneError
        With the measured residual in the message.
    """
    R = check_square(M)
    res = hermiticity_residual(R)
    if res > HERMITIAN_TOL:
        raise NotHermitianError(f"not Hermitian: max |M - M^dag| = {res:.3e}")
    R = 0.5 * (R + R.conj().T)
    tr = float(np.real(np.trace(R)))
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOneError(f"trace is {tr:.12g}, residual {abs(tr - 1.0):.3e}")
    lowest = float(eigvalsh_desc(R)[-1])
    if lowest < -PSD_TOL:
        raise NotPSDError(f"smallest eigenvalue {lowest:.3e} < -{PSD_TOL:.0e}")
    return R


def is_density(M) -> bool:
    try:
        validate_density(M)
    except ValueError:
        return False
    return True


def as_pure(psi) -> np.ndarray:
    v = np.array(psi, dtype=complex).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ValueError("amplitudes must be finite and non-empty")
    norm2 = float(np.sum(np.abs(v) ** 2))
    if abs(norm2 - 1.0) > PURE_NORM_TOL:
        raise ValueError(f"pure state has squared norm {norm2!r}")
    return v


def pure_to_density(psi) -> np.ndarray:
    v = as_pure(psi)
    return np.outer(v, v.conj())


def strip_phases(psi) -> np.ndarray:
    """Remove amplitude phases with a diagonal unitary (an incoherent map)."""
    return np.abs(as_pure(psi)).astype(complex)


def as_diagonal_state(probs) -> np.ndarray:
    return check_distribution(probs, tol=PURE_NORM_TOL)


def diagonal_to_density(probs) -> np.ndarray:
    return np.diag(as_diagonal_state(probs)).astype(complex)


def maximally_coherent(d: int) -> np.ndarray:
    if d < 1:
        raise OutOfRangeError(f"dimension must be >= 1, got {d}")
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def qutrit_from_xy(x: float, y: float) -> np.ndarray:
    """Qutrit with populations ``x, (1-x)y, (1-x)(1-y)``; covers all real qutrits."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise OutOfRangeError(f"(x, y) = ({x}, {y}) not in [0, 1]^2")
    lam = np.array([x, (1.0 - x) * y, (1.0 - x) * (1.0 - y)])
    return np.sqrt(lam).astype(complex)


def x_state(diag, antidiag, n: int | None = None) -> np.ndarray:
    """Matrix supported on the diagonal and anti-diagonal.

    ``diag`` holds the ``n`` diagonal entries.  ``antidiag`` holds the
    anti-diagonal entries ``x[i, n-1-i]`` in row order, skipping the centre
    element for odd ``n`` (it is already on the diagonal), so it has length
    ``2 * (n // 2)``.  No Hermiticity is imposed.
    """
    dg = np.asarray(diag, dtype=complex).ravel()
    ad = np.asarray(antidiag, dtype=complex).ravel()
    if n is None:
        n = dg.size
    if dg.size != n or ad.size != 2 * (n // 2):
        raise LengthMismatchError(
            f"n={n} needs {n} diagonal and {2 * (n // 2)} anti-diagonal entries, "
            f"got {dg.size} and {ad.size}"
        )
    X = np.diag(dg)
    rows = [i for i in range(n) if n - 1 - i != i]
    for i, val in zip(rows, ad):
        X[i, n - 1 - i] = val
    return X


def two_pair_state(a: complex, b: complex) -> np.ndarray:
    """4x4 state with coherence ``a/4`` on levels (0, 2) and ``b/4`` on (1, 3).

    This is a valid state iff ``|a|, |b| <= 1``.
    """
    if abs(a) > 1 + 1e-12 or abs(b) > 1 + 1e-12:
        raise OutOfRangeError(f"need |a|, |b| <= 1, got {abs(a)}, {abs(b)}")
    rho = np.eye(4, dtype=complex)
    rho[0, 2], rho[2, 0] = a, np.conj(a)
    rho[1, 3], rho[3, 1] = b, np.conj(b)
    return rho / 4.0


def _rng(seed):
    return np.random.default_rng(seed)


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Induced-measure random state ``G G^dag / tr(G G^dag)``.

    ``G`` is ``d x rank`` with i.i.d. standard complex Gaussian entries.
    ``seed`` may be an int or a :class:`numpy.random.Generator`.
    """
    if rank is None:
        rank = d
    if not 1 <= rank <= d:
        raise BadRankError(f"rank must be in [1, {d}], got {rank}")
    rng = _rng(seed)
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


def random_pure(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_probabilities(d: int, seed=None) -> np.ndarray:
    return _rng(seed).dirichlet(np.ones(d))
