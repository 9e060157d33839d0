"""Coherence quantifiers other than trace distance, plus the entropic bounds.

``c_l1``, ``c_r`` and ``c_lp`` are closed forms.  ``c_p`` (Schatten-p
distance to the incoherent set) is a convex program over the simplex solved
by projected gradient with restarts.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass

import numpy as np

from . import _optim
from .exceptions import (
    BadExponentError,
    DimensionMismatchError,
    NoConvergenceError,
    NotDistributionError,
)
from .linalg import (
    check_distribution,
    check_square,
    lp_entrywise_norm,
    offdiagonal,
    shannon_entropy,
    von_neumann_entropy,
)
from .states import validate_density
from .tracedist import SolverOptions, c_tr

FANNES_CONSTANT = 1.0 / (math.e * math.log(2.0))
NEGATIVE_CLAMP = 1e-9
CP_RESTARTS = 20


# --------------------------------------------------------------------------
# measure identifiers


@dataclass(frozen=True)
class MeasureId:
    """One of ``L1``, ``RELENT``, ``LP``, ``SCHATTEN``, ``TRACE``.

    ``LP`` and ``SCHATTEN`` carry an exponent ``p > 1``; at ``p = 1`` they
    alias ``L1`` and ``TRACE``.
    """

    tag: str
    p: float | None = None

    def __post_init__(self):
        if self.tag not in {"L1", "RELENT", "LP", "SCHATTEN", "TRACE"}:
            raise ValueError(f"unknown measure tag {self.tag!r}")
        if self.tag in {"LP", "SCHATTEN"}:
            if self.p is None or not self.p > 1 or not math.isfinite(self.p):
                raise BadExponentError(f"{self.tag} needs 1 < p < inf, got {self.p}")
        elif self.p is not None:
            raise ValueError(f"{self.tag} takes no exponent")

    @classmethod
    def parse(cls, text: str) -> "MeasureId":
        """Parse ``l1``, ``relent``, ``trace``, ``lp:<p>`` or ``schatten:<p>``."""
        m = re.fullmatch(r"\s*([a-zA-Z0-9_]+)\s*(?::\s*([0-9.eE+-]+))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse measure {text!r}")
        name, p = m.group(1).lower(), m.group(2)
        simple = {"l1": "L1", "relent": "RELENT", "cr": "RELENT", "trace": "TRACE", "tr": "TRACE"}
        if name in simple and p is None:
            return cls(simple[name])
        if name in {"lp", "schatten"} and p is not None:
            return cls.lp_or_schatten(name == "lp", float(p))
        raise ValueError(f"cannot parse measure {text!r}")

    @classmethod
    def lp_or_schatten(cls, entrywise: bool, p: float) -> "MeasureId":
        if p == 1.0:
            return cls("L1" if entrywise else "TRACE")
        return cls("LP" if entrywise else "SCHATTEN", float(p))

    def __str__(self):
        if self.p is None:
            return {"L1": "l1", "RELENT": "relent", "TRACE": "trace"}[self.tag]
        return f"{'lp' if self.tag == 'LP' else 'schatten'}:{self.p:g}"

    @property
    def iterative(self) -> bool:
        return self.tag in {"SCHATTEN", "TRACE"}


def evaluate(measure, rho, opts: SolverOptions | None = None) -> float:
    """Value of ``measure`` (a :class:`MeasureId` or its string form) on ``rho``."""
    if isinstance(measure, str):
        measure = MeasureId.parse(measure)
    R = validate_density(rho)
    if R.shape[0] == 1:
        return 0.0
    if measure.tag == "L1":
        return c_l1(R)
    if measure.tag == "RELENT":
        return c_r(R)
    if measure.tag == "LP":
        return c_lp(R, measure.p)
    if measure.tag == "SCHATTEN":
        return c_p(R, measure.p, opts)
    return c_tr(R, opts).value


# --------------------------------------------------------------------------
# closed forms


def c_l1(M) -> float:
    """Sum of off-diagonal moduli; defined for any square matrix."""
    A = check_square(M)
    return float(np.sum(np.abs(offdiagonal(A))))


def c_r(rho) -> float:
    """Relative entropy of coherence ``S(diag rho) - S(rho)`` in bits."""
    R = validate_density(rho)
    value = shannon_entropy(np.clip(np.real(np.diag(R)), 0.0, None) / np.real(np.trace(R)))
    value -= von_neumann_entropy(R)
    if value < -NEGATIVE_CLAMP:
        raise ArithmeticError(f"negative relative entropy {value:.3e}")
    return max(value, 0.0)


def c_lp(rho, p: float) -> float:
    """Entrywise l_p distance to the incoherent set.

    ``delta = diag(rho)`` is feasible and zeroes every delta-dependent term,
    so the minimum is the off-diagonal l_p mass.
    """
    if not p > 1:
        raise BadExponentError(f"c_lp needs p > 1, got {p}")
    R = validate_density(rho)
    return lp_entrywise_norm(offdiagonal(R), p)


# --------------------------------------------------------------------------
# Schatten-p


@dataclass
class SchattenResult:
    value: float
    minimizer: np.ndarray
    certificate: float
    spread: float
    iterations: int


def _schatten_parts(rho, x, p, mu=0.0):
    """Objective ``||H||_p`` (smoothed when ``mu > 0``) and its dual matrix."""
    H = rho - np.diag(x)
    w, U = np.linalg.eigh(H)
    a = np.sqrt(w * w + mu * mu) if mu else np.abs(w)
    top = float(a.max())
    if top == 0.0:
        return 0.0, np.zeros_like(U)
    norm = top * float(np.sum((a / top) ** p)) ** (1.0 / p)
    s = (a / norm) ** (p - 1) * (w / a if mu else np.sign(w))
    return norm, (U * s) @ U.conj().T


def _schatten_fun_grad(rho, p, mu=0.0):
    def fun_grad(x):
        f, W = _schatten_parts(rho, x, p, mu)
        return f, -np.real(np.diag(W))

    return fun_grad


def _schatten_lower_bound(rho, x, p):
    _, W = _schatten_parts(rho, x, p)
    if not np.any(W):
        return 0.0
    q = p / (p - 1.0)
    wq = float(np.sum(np.abs(np.linalg.eigvalsh(W)) ** q) ** (1.0 / q))
    return _optim.sign_lower_bound(rho, W / max(wq, 1.0))


def _schatten_single(rho, p, x0, opts):
    d = rho.shape[0]
    fg = _schatten_fun_grad(rho, p)
    x, ub, its = _optim.projected_gradient(fg, x0, opts.max_iters)
    lb = _schatten_lower_bound(rho, x, p)
    if ub - lb > opts.tol:
        # near-singular differences make the plain objective stall for p close to 1
        mu_min = opts.tol / (10.0 * d)
        mu = max(1e-2 * ub, 10 * mu_min)
        cur = x.copy()
        while True:
            cur, _, n = _optim.projected_gradient(_schatten_fun_grad(rho, p, mu), cur,
                                                  opts.max_iters, gtol=0.1 * mu)
            its += n
            f = fg(cur)[0]
            if f < ub:
                ub, x = f, cur.copy()
            lb = max(lb, _schatten_lower_bound(rho, cur, p))
            if ub - lb <= opts.tol or mu <= mu_min:
                break
            mu = max(mu / 10.0, mu_min)
    return x, ub, max(ub - lb, 0.0), its


def schatten_distance(rho, p: float, opts: SolverOptions | None = None,
                      restarts: int | None = None) -> SchattenResult:
    """Minimise ``||rho - diag(delta)||_p`` over the simplex.

    Runs from ``diag(rho)`` and ``restarts`` random simplex points; the best
    run is returned, ``spread`` is the range of the restart optima.

    Raises
    ------
    NoConvergenceError
        If the restarts disagree by more than ``10 * opts.tol``.
    """
    if not p > 1:
        raise BadExponentError(f"Schatten distance needs p > 1, got {p}")
    opts = opts or SolverOptions()
    restarts = CP_RESTARTS if restarts is None else restarts
    R = validate_density(rho)
    d = R.shape[0]
    diag = np.real(np.diag(R)).copy()
    if d == 1 or not np.any(offdiagonal(R)):
        return SchattenResult(0.0, diag, 0.0, 0.0, 0)
    rng = np.random.default_rng(opts.seed)
    starts = [diag] + [rng.dirichlet(np.ones(d)) for _ in range(restarts)]
    runs = [_schatten_single(R, p, x0, opts) for x0 in starts]
    values = np.array([r[1] for r in runs])
    k = int(np.argmin(values))
    spread = float(values.max() - values.min())
    x, value, gap, _ = runs[k]
    its = sum(r[3] for r in runs)
    if spread > 10 * opts.tol:
        raise NoConvergenceError(f"Schatten-{p:g} restarts disagree by {spread:.3e}",
                                 value=value, gap=spread)
    return SchattenResult(float(value), x, float(gap), spread, its)


def c_p(rho, p: float, opts: SolverOptions | None = None) -> float:
    """Schatten-p distance to the incoherent set."""
    return schatten_distance(rho, p, opts).value


def schatten_objective(rho, delta, p: float) -> float:
    return _schatten_parts(np.asarray(rho, dtype=complex), np.asarray(delta, dtype=float), p)[0]


# --------------------------------------------------------------------------
# entropic quantities


def holevo_chi(ensemble) -> float:
    """``S(sum_i p_i rho_i) - sum_i p_i S(rho_i)`` for ``[(p_i, rho_i), ...]``."""
    if not ensemble:
        raise NotDistributionError("empty ensemble")
    weights = check_distribution([w for w, _ in ensemble])
    states = [validate_density(r) for _, r in ensemble]
    if len({s.shape for s in states}) != 1:
        raise DimensionMismatchError("ensemble members have different dimensions")
    avg = sum(w * s for w, s in zip(weights, states))
    chi = von_neumann_entropy(avg) - sum(w * von_neumann_entropy(s) for w, s in zip(weights, states))
    return max(float(chi), 0.0) if chi > -NEGATIVE_CLAMP else float(chi)


def dephasing_unitaries(d: int) -> list[np.ndarray]:
    """``U^k`` for ``k < d`` with ``U = diag(1, w, ..., w^(d-1))``, ``w = exp(2 pi i / d)``."""
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    return [np.diag(phases**k) for k in range(d)]


def sign_flip_unitaries(d: int) -> list[np.ndarray]:
    """All ``2^d`` diagonal sign matrices (second dephasing family, small ``d`` only)."""
    if d > 10:
        raise ValueError("sign-flip family is limited to d <= 10")
    signs = 1 - 2 * ((np.arange(2**d)[:, None] >> np.arange(d)) & 1)
    return [np.diag(row.astype(complex)) for row in signs]


def twirl(X, unitaries) -> np.ndarray:
    """Uniform average ``(1/r) sum_k U_k X U_k^dag``."""
    A = check_square(X)
    return sum(U @ A @ U.conj().T for U in unitaries) / len(unitaries)


def dephasing_twirl(X) -> np.ndarray:
    """Average over the cyclic phase group; equals ``diag(X)``."""
    A = check_square(X)
    return twirl(A, dephasing_unitaries(A.shape[0]))


def entropy_chain(lam):
    """The three terms ``H(lam)/2 <= sum_i sqrt(lam_i tail_i) <= sum_i sqrt(lam_i) sum_{j>i} sqrt(lam_j)``."""
    v = check_distribution(lam)
    tails = np.cumsum(v[::-1])[::-1]
    roots = np.sqrt(v)
    root_tails = np.cumsum(roots[::-1])[::-1]
    middle = float(np.sum(np.sqrt(v[:-1] * tails[1:])))
    right = float(np.sum(roots[:-1] * root_tails[1:]))
    return 0.5 * shannon_entropy(v), middle, right


@dataclass
class BoundReport:
    c_l1: float
    c_r: float
    pure_lower: float
    fannes_upper: float
    logd_upper: float
    conjecture_gap: float

    def to_dict(self):
        out = asdict(self)
        out["fannes_label"] = "loose"
        return out


def bounds_report(rho) -> BoundReport:
    """C_l1, C_r and the bounds connecting them.

    ``pure_lower = 2^C_r - 1`` (valid for pure states), ``fannes_upper =
    C_l1 log2 d + 1/(e ln 2)`` (a loose upper bound on C_r),
    ``logd_upper = log2(d) C_l1`` (upper bound on C_r for every state) and
    ``conjecture_gap = C_l1 - C_r``.
    """
    R = validate_density(rho)
    d = R.shape[0]
    l1 = c_l1(R)
    cr = c_r(R)
    logd = math.log2(d) if d > 1 else 0.0
    return BoundReport(
        c_l1=l1,
        c_r=cr,
        pure_lower=2.0**cr - 1.0,
        fannes_upper=l1 * logd + FANNES_CONSTANT,
        logd_upper=logd * l1,
        conjecture_gap=l1 - cr,
    )
