"""Incoherent Kraus channels and the (strong) monotonicity harness."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InfeasibleShapeError,
    MixedOutputDimsError,
    NotCoherentError,
    NotCompleteError,
    NotIncoherentError,
    OutOfRangeError,
)
from .linalg import as_matrix, kron
from .measures import MeasureId, c_l1, c_lp, evaluate, schatten_distance
from .states import (
    maximally_coherent,
    pure_to_density,
    random_density,
    two_pair_state,
    validate_density,
)
from .tracedist import SolverOptions, c_tr

INCOHERENCE_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-9
PROB_FLOOR = 1e-12
CLOSED_FORM_THRESHOLD = -1e-9
SOLVER_THRESHOLD = -1e-6


@dataclass(frozen=True)
class IncoherentChannel:
    """Validated list of incoherent Kraus operators (build with :func:`validate_channel`)."""

    kraus: tuple

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_outs(self) -> tuple:
        return tuple(K.shape[0] for K in self.kraus)

    def __len__(self):
        return len(self.kraus)


@dataclass
class Outcome:
    prob: float
    state: np.ndarray


@dataclass
class MonotonicityReport:
    measure: str
    c_in: float
    c_avg_out: float
    c_det_out: float | None
    strong_gap: float
    weak_gap: float | None

    def violation(self, threshold: float = CLOSED_FORM_THRESHOLD) -> bool:
        return self.strong_gap < threshold

    def weak_violation(self, threshold: float = CLOSED_FORM_THRESHOLD) -> bool:
        return self.weak_gap is not None and self.weak_gap < threshold

    def to_dict(self):
        return asdict(self)


@dataclass
class PairedReport:
    """The entrywise (``lp``) and Schatten reports of one construction."""

    lp: MonotonicityReport
    schatten: MonotonicityReport
    violation: bool


def threshold_for(measure: MeasureId) -> float:
    return SOLVER_THRESHOLD if measure.iterative else CLOSED_FORM_THRESHOLD


def is_incoherent_operator(K, atol: float = INCOHERENCE_ATOL) -> bool:
    return bool(np.all(np.sum(np.abs(as_matrix(K)) > atol, axis=0) <= 1))


def validate_channel(ops: Sequence, atol: float = COMPLETENESS_ATOL) -> IncoherentChannel:
    """Check incoherence of every operator and ``sum K^dag K = 1``."""
    mats = [as_matrix(K) for K in ops]
    if not mats:
        raise DimensionMismatchError("a channel needs at least one Kraus operator")
    d_in = mats[0].shape[1]
    if any(K.shape[1] != d_in for K in mats):
        raise DimensionMismatchError("Kraus operators must share their column count")
    for n, K in enumerate(mats):
        counts = np.sum(np.abs(K) > INCOHERENCE_ATOL, axis=0)
        bad = np.nonzero(counts > 1)[0]
        if bad.size:
            raise NotIncoherentError(n, int(bad[0]), int(counts[bad[0]]))
    total = sum(K.conj().T @ K for K in mats)
    residual = float(np.max(np.abs(total - np.eye(d_in))))
    if residual > atol:
        raise NotCompleteError(residual)
    return IncoherentChannel(tuple(mats))


def _as_channel(ch) -> IncoherentChannel:
    return ch if isinstance(ch, IncoherentChannel) else validate_channel(ch)


def apply(ch, rho, return_dropped: bool = False):
    """Selective application: outcomes ``(p_n, K_n rho K_n^dag / p_n)``.

    Outcomes with ``p_n < 1e-12`` are dropped; their total mass is returned
    as a second value when ``return_dropped`` is set.
    """
    ch = _as_channel(ch)
    R = validate_density(rho)
    if R.shape[0] != ch.d_in:
        raise DimensionMismatchError(f"channel acts on dimension {ch.d_in}, state has {R.shape[0]}")
    outcomes, dropped = [], 0.0
    for K in ch.kraus:
        out = K @ R @ K.conj().T
        prob = float(np.real(np.trace(out)))
        if prob < PROB_FLOOR:
            dropped += max(prob, 0.0)
            continue
        out = out / prob
        outcomes.append(Outcome(prob, 0.5 * (out + out.conj().T)))
    if return_dropped:
        return outcomes, dropped
    return outcomes


def deterministic_apply(ch, rho) -> np.ndarray:
    """``sum_n K_n rho K_n^dag`` (all operators must share their output dimension)."""
    ch = _as_channel(ch)
    if len(set(ch.d_outs)) != 1:
        raise MixedOutputDimsError(f"output dimensions differ: {ch.d_outs}")
    R = validate_density(rho)
    if R.shape[0] != ch.d_in:
        raise DimensionMismatchError(f"channel acts on dimension {ch.d_in}, state has {R.shape[0]}")
    out = sum(K @ R @ K.conj().T for K in ch.kraus)
    return 0.5 * (out + out.conj().T)


# --------------------------------------------------------------------------
# channel families


def erasure_channel(d: int) -> IncoherentChannel:
    """``K_i = |0><i|``: sends every incoherent state to ``|0><0|``."""
    ops = []
    for i in range(d):
        K = np.zeros((d, d), dtype=complex)
        K[0, i] = 1.0
        ops.append(K)
    return validate_channel(ops)


def ancilla_erasure_channel(d_sys: int, d_anc: int) -> IncoherentChannel:
    """``1 (x) K_i`` with ``K_i`` the erasure operators on the ancilla."""
    return validate_channel([kron(np.eye(d_sys), K) for K in erasure_channel(d_anc).kraus])


def pair_swap_channel() -> IncoherentChannel:
    """The two 4x4 Kraus operators that split the two-pair state into its pairs."""
    K1 = np.zeros((4, 4), dtype=complex)
    K1[1, 0] = K1[3, 2] = 1.0
    K2 = np.zeros((4, 4), dtype=complex)
    K2[0, 1] = K2[2, 3] = 1.0
    return validate_channel([K1, K2])


def dephasing_channel(d: int) -> IncoherentChannel:
    """Kraus operators ``U^k / sqrt(d)`` of the cyclic phase group."""
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    return validate_channel([np.diag(phases**k) / np.sqrt(d) for k in range(d)])


def permutation_channel(perm) -> IncoherentChannel:
    perm = list(perm)
    P = np.zeros((len(perm), len(perm)), dtype=complex)
    P[perm, np.arange(len(perm))] = 1.0
    return validate_channel([P])


def random_incoherent_channel(d_in: int, n_ops: int, d_out=None, seed=None) -> IncoherentChannel:
    """Random incoherent channel with exact completeness.

    Every operator maps its column support injectively into its rows, so the
    off-diagonal entries of ``sum K^dag K`` vanish; the amplitudes of each
    column across operators form a random complex unit vector.  Each column
    is covered by at least one operator.  ``d_out`` is an int, a sequence
    (one entry per operator) or ``None`` for ``d_in``.
    """
    if n_ops < 1:
        raise InfeasibleShapeError("need at least one Kraus operator")
    rng = np.random.default_rng(seed)
    if d_out is None:
        d_out = d_in
    d_outs = [int(d_out)] * n_ops if np.isscalar(d_out) else [int(v) for v in d_out]
    if len(d_outs) != n_ops or min(d_outs) < 1:
        raise InfeasibleShapeError(f"bad output dimensions {d_outs!r}")
    if sum(d_outs) < d_in:
        raise InfeasibleShapeError(f"outputs {d_outs} cannot cover {d_in} input levels")

    supports = [set() for _ in range(n_ops)]
    slots = [n for n in range(n_ops) for _ in range(d_outs[n])]
    slots = [slots[i] for i in rng.permutation(len(slots))]
    for col in range(d_in):
        supports[slots[col]].add(col)
    for n in range(n_ops):
        for col in rng.permutation(d_in):
            if len(supports[n]) >= d_outs[n]:
                break
            if col not in supports[n] and rng.random() < 0.5:
                supports[n].add(int(col))

    amps = rng.standard_normal((n_ops, d_in)) + 1j * rng.standard_normal((n_ops, d_in))
    mask = np.zeros((n_ops, d_in), dtype=bool)
    for n, cols in enumerate(supports):
        mask[n, sorted(cols)] = True
    amps = np.where(mask, amps, 0.0)
    amps /= np.linalg.norm(amps, axis=0, keepdims=True)

    ops = []
    for n, cols in enumerate(supports):
        K = np.zeros((d_outs[n], d_in), dtype=complex)
        cols = sorted(cols)
        rows = rng.permutation(d_outs[n])[: len(cols)]
        K[rows, cols] = amps[n, cols]
        ops.append(K)
    return validate_channel(ops)


def random_channel_shape(d_in: int, rng, max_ops: int = 4, n_ops: int | None = None):
    """Random ``(n_ops, d_outs)`` with output dimensions up to ``d_in + 1``."""
    if n_ops is None:
        n_ops = int(rng.integers(1, max_ops + 1))
    d_outs = [int(v) for v in rng.integers(1, d_in + 2, size=n_ops)]
    while sum(d_outs) < d_in:
        d_outs[int(rng.integers(n_ops))] += 1
    return n_ops, d_outs


# --------------------------------------------------------------------------
# harness


def monotonicity_report(measure, rho, ch, opts: SolverOptions | None = None) -> MonotonicityReport:
    """Both sides of monotonicity and strong monotonicity for one pair.

    ``c_det_out`` (and ``weak_gap``) are ``None`` when the operators have
    different output dimensions, since the summed output is then undefined.
    """
    if isinstance(measure, str):
        measure = MeasureId.parse(measure)
    ch = _as_channel(ch)
    R = validate_density(rho)
    c_in = evaluate(measure, R, opts)
    outcomes, dropped = apply(ch, R, return_dropped=True)
    if dropped > 1e-9:
        raise ArithmeticError(f"dropped outcome mass {dropped:.3e}")
    c_avg = sum(o.prob * evaluate(measure, o.state, opts) for o in outcomes)
    c_det = weak = None
    if len(set(ch.d_outs)) == 1:
        c_det = evaluate(measure, deterministic_apply(ch, R), opts)
        weak = c_in - c_det
    return MonotonicityReport(str(measure), c_in, c_avg, c_det, c_in - c_avg, weak)


def lp_counterexample(a: complex, b: complex, p: float, opts: SolverOptions | None = None) -> PairedReport:
    """Strong monotonicity of C_lp and C_p on the two-pair state and channel.

    The strong-monotonicity inequality reduces to
    ``(|a| + |b|)^p <= |a|^p + |b|^p``, which fails whenever ``ab != 0`` and
    ``p > 1``.
    """
    if abs(a) > 1 or abs(b) > 1:
        raise OutOfRangeError(f"need |a|, |b| <= 1, got {abs(a)}, {abs(b)}")
    if p < 1:
        raise OutOfRangeError(f"need p >= 1, got {p}")
    rho = two_pair_state(a, b)
    ch = pair_swap_channel()
    lp = monotonicity_report(MeasureId.lp_or_schatten(True, p), rho, ch, opts)
    sch = monotonicity_report(MeasureId.lp_or_schatten(False, p), rho, ch, opts)
    violation = lp.strong_gap < CLOSED_FORM_THRESHOLD or sch.strong_gap < SOLVER_THRESHOLD
    return PairedReport(lp, sch, violation)


def tensor_monotonicity_violation(rho, d_anc: int, p: float,
                                  opts: SolverOptions | None = None) -> PairedReport:
    """Monotonicity of C_lp / C_p under erasure of a maximally mixed ancilla.

    ``rho (x) 1/d_anc`` is mapped to ``rho (x) |0><0|`` by an incoherent
    channel; for ``p > 1`` the coherence goes up.  The entrywise side uses
    the exact scaling ``C_lp(rho (x) 1/d) = d^(1/p - 1) C_lp(rho)``.
    """
    R = validate_density(rho)
    if c_l1(R) <= 1e-9:
        raise NotCoherentError("input state is incoherent")
    if d_anc < 2:
        raise OutOfRangeError("ancilla dimension must be >= 2")
    if p < 1:
        raise OutOfRangeError(f"need p >= 1, got {p}")
    d = R.shape[0]
    ch = ancilla_erasure_channel(d, d_anc)
    big = kron(R, np.eye(d_anc) / d_anc)
    out = deterministic_apply(ch, big)

    if p == 1.0:
        base = c_l1(R)
        lp_in, lp_out = base, c_l1(out)
    else:
        base = c_lp(R, p)
        lp_in, lp_out = d_anc ** (1.0 / p - 1.0) * base, c_lp(out, p)
    # every erasure outcome equals the summed output, so both gaps coincide
    lp = MonotonicityReport(str(MeasureId.lp_or_schatten(True, p)), lp_in, lp_out,
                            lp_out, lp_in - lp_out, lp_in - lp_out)

    if p == 1.0:
        s_in, s_out = c_tr(big, opts).value, c_tr(out, opts).value
    else:
        s_in = schatten_distance(big, p, opts).value
        s_out = schatten_distance(out, p, opts).value
    sch = MonotonicityReport(str(MeasureId.lp_or_schatten(False, p)), s_in, s_out,
                             s_out, s_in - s_out, s_in - s_out)
    violation = lp.weak_gap < CLOSED_FORM_THRESHOLD or sch.weak_gap < SOLVER_THRESHOLD
    return PairedReport(lp, sch, violation)


def flagged_state(ensemble) -> np.ndarray:
    """``sum_i p_i rho_i (x) |i><i|`` for an ensemble of equal-dimension states."""
    states = [validate_density(r) for _, r in ensemble]
    if len({s.shape for s in states}) != 1:
        raise DimensionMismatchError("ensemble members have different dimensions")
    n = len(states)
    out = 0
    for i, (w, s) in enumerate(zip([w for w, _ in ensemble], states)):
        flag = np.zeros((n, n))
        flag[i, i] = 1.0
        out = out + w * np.kron(s, flag)
    return out


def flag_check(ensemble, reference=None, opts: SolverOptions | None = None) -> float:
    """``C_tr(sum_i p_i rho_i (x) |i><i|) - C_tr(reference)``.

    ``reference`` defaults to the ensemble average ``sum_i p_i rho_i``; in
    that case the difference is never negative, since discarding the flag
    register is an incoherent operation.  Passing the pre-measurement state
    ``rho`` (see :func:`flag_check_channel`) gives the flag condition proper,
    which is non-positive whenever C_tr is monotone.
    """
    weights = np.asarray([w for w, _ in ensemble], dtype=float)
    if np.any(weights < -1e-12) or abs(weights.sum() - 1.0) > 1e-9:
        raise OutOfRangeError("ensemble weights must form a distribution")
    flagged = flagged_state(ensemble)
    if reference is None:
        reference = sum(w * validate_density(r) for w, r in ensemble)
    return c_tr(flagged, opts).value - c_tr(validate_density(reference), opts).value


def flag_check_channel(rho, ch, opts: SolverOptions | None = None) -> float:
    """Flag condition for the outcomes of ``ch`` on ``rho``."""
    ch = _as_channel(ch)
    if len(set(ch.d_outs)) != 1:
        raise DimensionMismatchError("flagging needs a common output dimension")
    outcomes = apply(ch, rho)
    return flag_check([(o.prob, o.state) for o in outcomes], reference=rho, opts=opts)


def monotonicity_scan(measure, dims=(2, 4), samples: int = 100, seed: int = 0,
                      opts: SolverOptions | None = None, max_ops: int = 4):
    """Strong/weak monotonicity gaps on random (state, channel) pairs.

    Pair ``i`` draws from its own stream ``SeedSequence(seed).spawn`` so rows
    do not depend on evaluation order.  Returns a list of row dicts.
    """
    if isinstance(measure, str):
        measure = MeasureId.parse(measure)
    lo, hi = dims
    threshold = threshold_for(measure)
    rows = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(samples)):
        rng = np.random.default_rng(child)
        d = int(rng.integers(lo, hi + 1))
        rank = int(rng.integers(1, d + 1))
        rho = random_density(d, rank, rng)
        n_ops, d_outs = random_channel_shape(d, rng, max_ops)
        ch = random_incoherent_channel(d, n_ops, d_outs, rng)
        rep = monotonicity_report(measure, rho, ch, opts)
        rows.append({
            "index": i, "d": d, "rank": rank, "n_ops": n_ops,
            "d_outs": " ".join(map(str, d_outs)),
            "c_in": rep.c_in, "c_avg_out": rep.c_avg_out,
            "c_det_out": rep.c_det_out, "strong_gap": rep.strong_gap,
            "weak_gap": rep.weak_gap,
            "violation": rep.strong_gap < threshold,
        })
    return rows


def maximally_coherent_density(d: int) -> np.ndarray:
    return pure_to_density(maximally_coherent(d))
