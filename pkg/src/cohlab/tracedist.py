"""Trace-distance coherence ``C_tr(rho) = min_{delta incoherent} ||rho - delta||_1``.

Backends
--------
QUBIT
    Any 2x2 matrix: the closest diagonal matrix is ``diag(A)``.
BLOCKSUM / XSTATE
    Matrices permutation-similar to a direct sum of 2x2 blocks and scalars
    (X-states included); the value is the off-diagonal l1 mass.
PURE
    Rank-one states: twice the minimum over the simplex of the largest root
    of the secular equation ``sum_i lam_i / (x + delta_i) = 1``.
GENERAL
    Projected subgradient on the simplex, polished by a smoothed
    continuation and certified by a dual lower bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from . import _optim
from .exceptions import (
    BadPartitionError,
    BadRankError,
    DegenerateInputError,
    NoConvergenceError,
    WrongDimError,
)
from .linalg import (
    check_square,
    eigvalsh_desc,
    offdiagonal,
    project_simplex,
    project_simplex_rows,
)
from .states import as_pure, is_density, validate_density

ZERO_AMPLITUDE = 1e-12
RANK_ONE_TOL = 1e-9
BLOCK_ATOL = 1e-14


class Backend(str, Enum):
    QUBIT = "QUBIT"
    BLOCKSUM = "BLOCKSUM"
    XSTATE = "XSTATE"
    PURE = "PURE"
    GENERAL = "GENERAL"


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the iterative solvers.

    ``tol`` is the target duality gap, ``max_gap`` the gap above which a
    solver gives up with :class:`NoConvergenceError`.
    """

    tol: float = 1e-7
    max_iters: int = 5000
    restarts: int = 16
    seed: int = 0
    subgradient_iters: int = 100
    max_gap: float = 1e-4

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class TraceDistResult:
    value: float
    minimizer: np.ndarray
    backend: Backend
    certificate: float = 0.0
    iterations: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        m = np.asarray(self.minimizer)
        if np.iscomplexobj(m) and not np.any(m.imag):
            m = m.real
        return {
            "measure": "trace",
            "value": float(self.value),
            "backend": self.backend.value,
            "minimizer": m.tolist() if not np.iscomplexobj(m) else [[z.real, z.imag] for z in m],
            "certificate": float(self.certificate),
            "iterations": int(self.iterations),
        }


def _l1_offdiag(M):
    return float(np.sum(np.abs(offdiagonal(M))))


def _state_diagonal(M):
    """``diag(M)`` as a probability vector (``M`` assumed to be a state)."""
    return project_simplex(np.real(np.diag(M)))


# --------------------------------------------------------------------------
# closed forms


def c_tr_qubit(A) -> TraceDistResult:
    """Closed form for any 2x2 complex matrix: ``|b| + |c|`` at ``D = diag(A)``."""
    M = check_square(A)
    if M.shape != (2, 2):
        raise WrongDimError(f"qubit backend needs a 2x2 matrix, got {M.shape}")
    value = abs(M[0, 1]) + abs(M[1, 0])
    minimizer = _state_diagonal(M) if is_density(M) else np.diag(M).copy()
    return TraceDistResult(float(value), minimizer, Backend.QUBIT)


def detect_blocks(M, atol: float = BLOCK_ATOL):
    """Connected components of the off-diagonal support graph.

    Returns a list of index tuples when every component has at most two
    vertices (so ``M`` is permutation-similar to a direct sum of 2x2 blocks
    and scalars), otherwise ``None``.
    """
    A = check_square(M)
    n = A.shape[0]
    support = (np.abs(A) > atol) | (np.abs(A.T) > atol)
    np.fill_diagonal(support, False)
    seen = [False] * n
    parts = []
    for start in range(n):
        if seen[start]:
            continue
        comp, stack = [], [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.nonzero(support[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        if len(comp) > 2:
            return None
        parts.append(tuple(sorted(comp)))
    return parts


def _check_partition(M, partition, atol=BLOCK_ATOL):
    n = M.shape[0]
    flat = sorted(i for block in partition for i in block)
    if flat != list(range(n)) or any(len(b) > 2 for b in partition):
        raise BadPartitionError(f"{partition!r} is not a partition of range({n}) into pairs")
    label = np.empty(n, dtype=int)
    for k, block in enumerate(partition):
        label[list(block)] = k
    rows, cols = np.nonzero(np.abs(M) > atol)
    if np.any(label[rows] != label[cols]):
        raise BadPartitionError("matrix has support between different blocks")


def c_tr_blocksum(M, partition=None) -> TraceDistResult:
    """Direct sums of 2x2 blocks and scalars: each block contributes ``|b| + |c|``."""
    A = check_square(M)
    if partition is None:
        partition = detect_blocks(A)
        if partition is None:
            raise BadPartitionError("matrix is not a direct sum of 2x2 blocks")
    else:
        _check_partition(A, partition)
    value = 0.0
    for block in partition:
        if len(block) == 2:
            i, j = block
            value += abs(A[i, j]) + abs(A[j, i])
    minimizer = _state_diagonal(A) if is_density(A) else np.diag(A).copy()
    return TraceDistResult(float(value), minimizer, Backend.BLOCKSUM,
                           details={"partition": [list(b) for b in partition]})


def is_x_shaped(M, atol: float = BLOCK_ATOL) -> bool:
    A = check_square(M)
    n = A.shape[0]
    mask = np.eye(n, dtype=bool) | np.fliplr(np.eye(n, dtype=bool))
    return not np.any(np.abs(A[~mask]) > atol)


def c_tr_xstate(X) -> TraceDistResult:
    """X-shaped matrices: nearest diagonal matrix is ``diag(X)``."""
    A = check_square(X)
    if not is_x_shaped(A):
        raise BadPartitionError("matrix has support off the diagonal and anti-diagonal")
    n = A.shape[0]
    partition = [(i, n - 1 - i) for i in range(n // 2)]
    if n % 2:
        partition.append((n // 2,))
    res = c_tr_blocksum(A, partition)
    res.backend = Backend.XSTATE
    return res


# --------------------------------------------------------------------------
# pure states


def _secular(lam, delta, x):
    return float(np.sum(lam / (x + delta)))


def largest_root(lam, delta) -> float:
    """Largest root ``x >= 0`` of ``sum_i lam_i / (x + delta_i) = 1``.

    Newton iterations from the left of the root, where the convex decreasing
    secular function makes them monotone, kept inside a bisection bracket.
    Components with ``lam_i <= 1e-12`` are dropped first.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    delta = np.asarray(delta, dtype=float).ravel()
    if lam.shape != delta.shape:
        raise ValueError("lam and delta must have equal length")
    if np.any(lam < 0) or np.any(delta < 0):
        raise ValueError("lam and delta must be non-negative")
    keep = lam > ZERO_AMPLITUDE
    if not np.any(keep):
        raise DegenerateInputError("all weights are zero")
    lam, delta = lam[keep], delta[keep]

    zero = delta <= 0.0
    if np.any(zero):
        lo = float(np.max(lam[zero]))
    else:
        lo = 0.0
        if _secular(lam, delta, 0.0) <= 1.0:
            return 0.0
    hi = max(1.0, 2.0 * lo)
    while _secular(lam, delta, hi) > 1.0:
        hi *= 2.0

    x = lo
    for _ in range(200):
        terms = lam / (x + delta)
        fx = float(np.sum(terms)) - 1.0
        if fx > 0:
            lo = x
        else:
            hi = x
        if abs(fx) <= 1e-15 or hi - lo <= 1e-16 * max(1.0, hi):
            break
        slope = float(np.sum(terms / (x + delta)))
        step = x + fx / slope if slope > 0 else hi
        x = step if lo < step < hi else 0.5 * (lo + hi)
    return float(x)


def largest_root_gradient(lam, delta, x=None):
    """Implicit gradient ``dx/d delta_i = -(lam_i/(x+delta_i)^2) / sum_j lam_j/(x+delta_j)^2``."""
    lam = np.asarray(lam, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if x is None:
        x = largest_root(lam, delta)
    q = lam / (x + delta) ** 2
    return -q / np.sum(q)


def characteristic_determinant(lam, delta, x) -> float:
    """``det(xI - H)`` for ``H = |psi><psi| - diag(delta)`` via the rank-one update formula."""
    lam = np.asarray(lam, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return float((1.0 - np.sum(lam / (x + delta))) * np.prod(x + delta))


def root_to_program(lam, delta, x):
    """Map ``(x, delta)`` of the min-max form to the variables of the ratio program."""
    return np.asarray(lam, dtype=float) / (x + np.asarray(delta, dtype=float))


def program_to_root(lam, dtilde):
    """Inverse map: ratio-program variables back to ``(x, delta)``."""
    lam = np.asarray(lam, dtype=float)
    ratio = lam / np.asarray(dtilde, dtype=float)
    x = (ratio.sum() - 1.0) / lam.size
    return float(x), ratio - x


def program_objective(lam, dtilde) -> float:
    lam = np.asarray(lam, dtype=float)
    return float(2.0 / lam.size * (np.sum(lam / dtilde) - 1.0))


def pure_program_value(lam, x0=None):
    """Solve the ratio program over ``dtilde`` for strictly positive ``lam``.

    minimise ``(2/d)(sum lam_i/dtilde_i - 1)`` subject to
    ``lam_i/dtilde_i >= (1/d)(sum lam_j/dtilde_j - 1)``, ``sum dtilde <= 1``,
    ``dtilde >= 0``.  Feasible optima satisfy ``dtilde_i >= lam_i / 2``.  In
    the ratios ``r_i = lam_i / dtilde_i`` the objective and the first
    constraints are linear and ``sum lam_i / r_i <= 1`` is convex, so SLSQP
    is run on ``r`` from the feasible start ``r = 2``.  ``x0`` is an optional
    starting ``dtilde``.  Returns ``(value, dtilde)``.
    """
    lam = np.asarray(lam, dtype=float)
    d = lam.size
    if d == 1:
        return 0.0, lam.copy()
    r0 = np.full(d, 2.0) if x0 is None else np.clip(lam / np.asarray(x0, dtype=float), lam, 2.0)

    def obj(r):
        return 2.0 / d * (np.sum(r) - 1.0)

    # SLSQP may step slightly outside the bounds and clip; that is harmless here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            obj, r0, jac=lambda r: np.full(d, 2.0 / d), method="SLSQP",
            bounds=[(li, 2.0) for li in lam],
            constraints=[
                {"type": "ineq", "fun": lambda r: r - (r.sum() - 1.0) / d,
                 "jac": lambda r: np.eye(d) - 1.0 / d},
                {"type": "ineq", "fun": lambda r: 1.0 - np.sum(lam / r), "jac": lambda r: lam / r**2},
            ],
            options={"ftol": 1e-15, "maxiter": 1000},
        )
    z = lam / np.clip(res.x, lam, 2.0)
    # undo a slight overshoot of sum(dtilde) <= 1 left by SLSQP
    z = z / max(z.sum(), 1.0)
    return float(program_objective(lam, z)), z


def _pure_weights(psi):
    lam = np.abs(as_pure(psi)) ** 2
    keep = np.nonzero(lam > ZERO_AMPLITUDE)[0]
    sub = lam[keep] / lam[keep].sum()
    return lam, keep, sub


def c_tr_pure(psi, opts: SolverOptions | None = None, cross_check: bool = True) -> TraceDistResult:
    """Trace-distance coherence of a pure state.

    Minimises the largest secular root over the simplex by projected
    gradient using the implicit derivative, then certifies the result with
    the dual bound and (optionally) against the ratio program.
    """
    opts = opts or SolverOptions()
    lam, keep, sub = _pure_weights(psi)
    d = lam.size
    if keep.size <= 1:
        minimizer = np.zeros(d)
        minimizer[keep] = 1.0
        return TraceDistResult(0.0, minimizer, Backend.PURE)

    def fun_grad(delta):
        x = largest_root(sub, delta)
        return x, largest_root_gradient(sub, delta, x)

    rng = np.random.default_rng(opts.seed)
    rho = np.outer(np.sqrt(lam), np.sqrt(lam)).astype(complex)
    starts = [sub.copy()]
    best = None
    total = 0
    gap = np.inf
    for k in range(opts.restarts):
        if k >= len(starts):
            starts.append(rng.dirichlet(np.ones(keep.size)))
        delta, x, its = _optim.projected_gradient(fun_grad, starts[k], opts.max_iters)
        total += its
        if best is None or x < best[1]:
            best = (delta, x)
        full = np.zeros(d)
        full[keep] = best[0]
        gap = 2.0 * best[1] - _optim.spectral_lower_bound(rho, full)
        if gap <= opts.tol:
            break
    delta, x = best
    value = 2.0 * x
    minimizer = np.zeros(d)
    minimizer[keep] = delta
    certificate = max(gap, 0.0)
    details = {}
    if cross_check:
        prog, _ = pure_program_value(sub, root_to_program(sub, delta, x))
        diff = abs(prog - value)
        details = {"program_value": prog, "program_residual": diff}
        if diff > 10 * max(opts.tol, certificate):
            raise NoConvergenceError(
                f"pure solver {value:.10g} and ratio program {prog:.10g} disagree",
                value=value, gap=diff,
            )
    if certificate > opts.max_gap:
        raise NoConvergenceError(f"pure solver gap {certificate:.3e}", value=value, gap=certificate)
    return TraceDistResult(value, minimizer, Backend.PURE, certificate, total, details)


# --------------------------------------------------------------------------
# general states


def _batch_subgradient(rho, starts, iters, tol):
    """Projected subgradient on a batch of starting points.

    Step ``c / sqrt(k)`` along the normalised subgradient, with
    ``c = ||rho - diag(rho)||_1``; the best iterate of every start is kept.
    """
    d = rho.shape[0]
    X = np.array(starts, dtype=float)
    c = float(np.sum(np.abs(eigvalsh_desc(offdiagonal(rho)))))
    best_x = X.copy()
    best_f = np.full(X.shape[0], np.inf)
    idx = np.arange(d)
    k = 0
    for k in range(1, iters + 1):
        H = np.repeat(rho[None], X.shape[0], axis=0)
        H[:, idx, idx] -= X
        w, U = np.linalg.eigh(H)
        f = np.abs(w).sum(axis=1)
        better = f < best_f
        best_f[better] = f[better]
        best_x[better] = X[better]
        S = np.sign(w)
        g = -np.einsum("rij,rj->ri", np.abs(U) ** 2, S)
        if k % 25 == 1:
            r = int(np.argmin(best_f))
            if better[r]:
                W = (U[r] * S[r]) @ U[r].conj().T
                if best_f[r] - _optim.sign_lower_bound(rho, W) <= tol:
                    break
        norm = np.linalg.norm(g, axis=1, keepdims=True)
        norm[norm == 0] = 1.0
        X = project_simplex_rows(X - (c / np.sqrt(k)) * g / norm)
    return best_x, best_f, k


def _smoothed(rho, mu):
    d = rho.shape[0]

    def fun_grad(x):
        H = rho - np.diag(x)
        w, U = np.linalg.eigh(H)
        s = np.sqrt(w * w + mu * mu)
        g = -np.real(np.einsum("ij,j,ij->i", U, w / s, U.conj()))
        return float(s.sum()), g

    def dual(x):
        w, U = np.linalg.eigh(rho - np.diag(x))
        return (U * (w / np.sqrt(w * w + mu * mu))) @ U.conj().T

    return fun_grad, dual


def _trace_obj(rho, x):
    return float(np.sum(np.abs(np.linalg.eigvalsh(rho - np.diag(x)))))


def c_tr_general(rho, opts: SolverOptions | None = None) -> TraceDistResult:
    """Trace-distance coherence of an arbitrary density matrix.

    1. projected subgradient from ``diag(rho)`` and ``restarts - 1`` random
       simplex points (run as one batch);
    2. continuation on the smoothed objective ``sum_i sqrt(lam_i^2 + mu^2)``
       (projected gradient at each ``mu``);
    3. every candidate is scored against dual lower bounds, so the returned
       ``certificate`` bounds ``value - C_tr(rho)``.
    """
    opts = opts or SolverOptions()
    R = validate_density(rho)
    d = R.shape[0]
    diag = _state_diagonal(R)
    if d == 1 or not np.any(np.abs(offdiagonal(R)) > 0):
        return TraceDistResult(0.0, diag, Backend.GENERAL)

    rng = np.random.default_rng(opts.seed)
    starts = [diag] + [rng.dirichlet(np.ones(d)) for _ in range(opts.restarts - 1)]
    best_x, best_f, its = _batch_subgradient(R, starts, opts.subgradient_iters, opts.tol)
    r = int(np.argmin(best_f))
    x, ub = best_x[r], float(best_f[r])
    lb = _optim.spectral_lower_bound(R, x)
    total = its

    if ub - lb > opts.tol:
        mu_min = opts.tol / (10.0 * d)
        mu = max(1e-2 * ub, 10 * mu_min)
        cur = x.copy()
        while True:
            fun_grad, dual = _smoothed(R, mu)
            cur, _, n = _optim.projected_gradient(fun_grad, cur, opts.max_iters, gtol=0.1 * mu)
            total += n
            f = _trace_obj(R, cur)
            if f < ub:
                ub, x = f, cur.copy()
            lb = max(lb, _optim.sign_lower_bound(R, dual(cur)),
                     _optim.spectral_lower_bound(R, cur))
            if ub - lb <= opts.tol or mu <= mu_min:
                break
            mu = max(mu / 10.0, mu_min)

    gap = max(ub - lb, 0.0)
    if gap > opts.max_gap:
        raise NoConvergenceError(f"general solver gap {gap:.3e} exceeds {opts.max_gap:.1e}",
                                 value=ub, gap=gap)
    return TraceDistResult(ub, x, Backend.GENERAL, gap, total, {"lower_bound": lb})


# --------------------------------------------------------------------------
# dispatcher


def c_tr(M, opts: SolverOptions | None = None, backend: str = "auto") -> TraceDistResult:
    """Trace-distance coherence with automatic backend selection.

    Order: QUBIT, BLOCKSUM (covers X-states), PURE (rank one), GENERAL.
    ``backend`` forces one of ``"qubit"``, ``"blocksum"``, ``"xstate"``,
    ``"pure"`` or ``"general"``.
    """
    A = check_square(M)
    backend = backend.lower()
    if backend == "qubit":
        return c_tr_qubit(A)
    if backend == "blocksum":
        return c_tr_blocksum(A)
    if backend == "xstate":
        return c_tr_xstate(A)
    if backend == "general":
        return c_tr_general(A, opts)
    if backend == "pure":
        R = validate_density(A)
        if R.shape[0] > 1 and eigvalsh_desc(R)[1] > RANK_ONE_TOL:
            raise BadRankError("pure backend needs a rank-one state")
        return c_tr_pure(_top_vector(R), opts)
    if backend != "auto":
        raise ValueError(f"unknown backend {backend!r}")

    if A.shape[0] == 1:
        return TraceDistResult(0.0, np.ones(1), Backend.BLOCKSUM)
    if A.shape == (2, 2):
        return c_tr_qubit(A)
    if detect_blocks(A) is not None:
        return c_tr_blocksum(A)
    R = validate_density(A)
    w = eigvalsh_desc(R)
    if w[1] <= RANK_ONE_TOL:
        return c_tr_pure(_top_vector(R), opts)
    return c_tr_general(R, opts)


def _top_vector(R):
    w, V = np.linalg.eigh(R)
    v = V[:, -1]
    return v / np.linalg.norm(v)
