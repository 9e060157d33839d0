import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cohlab.exceptions import BadExponentError, DimensionMismatchError, NotDistributionError
from cohlab.linalg import kron, lp_entrywise_norm, shannon_entropy
from cohlab.measures import (
    FANNES_CONSTANT,
    MeasureId,
    bounds_report,
    c_l1,
    c_lp,
    c_p,
    c_r,
    dephasing_twirl,
    dephasing_unitaries,
    entropy_chain,
    evaluate,
    holevo_chi,
    schatten_distance,
    schatten_objective,
    sign_flip_unitaries,
    twirl,
)
from cohlab.states import (
    maximally_coherent,
    pure_to_density,
    qutrit_from_xy,
    random_density,
    random_pure,
    two_pair_state,
)


def qubit(q, p0=0.5):
    return np.array([[p0, q], [np.conj(q), 1 - p0]])


# ############################################################################
# MEASURE IDENTIFIERS
# ############################################################################


@pytest.mark.parametrize("text, tag, p", [
    ("l1", "L1", None),
    ("relent", "RELENT", None),
    ("trace", "TRACE", None),
    ("lp:2", "LP", 2.0),
    ("schatten:1.5", "SCHATTEN", 1.5),
    ("lp:1", "L1", None),
    ("schatten:1", "TRACE", None),
])
def test_parse(text, tag, p):
    m = MeasureId.parse(text)
    assert (m.tag, m.p) == (tag, p)
    assert MeasureId.parse(str(m)) == m


@pytest.mark.parametrize("text", ["lp", "l1:2", "foo", "lp:x"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        MeasureId.parse(text)


def test_bad_exponent_tag():
    with pytest.raises(BadExponentError):
        MeasureId("LP", 0.5)


# ############################################################################
# CLOSED FORMS
# ############################################################################


def test_c_l1_examples():
    for d in range(1, 6):
        assert c_l1(pure_to_density(maximally_coherent(d))) == pytest.approx(d - 1)
    assert c_l1(qubit(0.3j)) == pytest.approx(0.6)
    assert c_l1(two_pair_state(0.6, -0.8j)) == pytest.approx((0.6 + 0.8) / 2)
    assert c_l1(np.diag([0.2, 0.8])) == 0


def test_c_r_examples():
    assert c_r(np.diag([0.2, 0.3, 0.5])) == 0
    for d in (2, 3, 5):
        assert c_r(pure_to_density(maximally_coherent(d))) == pytest.approx(math.log2(d))
    rho = pure_to_density(qutrit_from_xy(1 / 500, 1 / 5))
    assert c_r(rho) == pytest.approx(0.7413, abs=5e-4)


def test_c_lp_examples():
    rho = two_pair_state(1, 1)
    assert c_lp(rho, 2) == pytest.approx(0.5)
    a, b = 0.6, 0.3
    assert c_lp(two_pair_state(a, b), 2) == pytest.approx(math.sqrt((a**2 + b**2) / 8))
    assert c_lp(np.diag([0.5, 0.5]), 3) == 0
    with pytest.raises(BadExponentError):
        c_lp(rho, 1)


def test_c_lp_matches_grid_oracle():
    # diagonal perturbations delta = diag(rho) + t on a grid with sum(t) = 0
    rho = two_pair_state(0.9, 0.4j)
    base = np.real(np.diag(rho))
    axis = np.linspace(-0.25, 0.25, 11)
    for p in (1.5, 2.0, 3.0):
        best = np.inf
        for t in itertools.product(axis, axis, axis):
            delta = base + np.array([*t, -sum(t)])
            if np.all(delta >= 0):
                best = min(best, lp_entrywise_norm(rho - np.diag(delta), p))
        assert c_lp(rho, p) == pytest.approx(best, abs=1e-12)


def test_c_lp_kron_scaling():
    rho = random_density(3, None, 0)
    for d, p in itertools.product((2, 3), (1.5, 2.0, 4.0)):
        lhs = c_lp(kron(rho, np.eye(d) / d), p)
        assert lhs == pytest.approx(d ** (1 / p - 1) * c_lp(rho, p), rel=1e-12)


# ############################################################################
# SCHATTEN-P
# ############################################################################


@pytest.mark.parametrize("p", [1.25, 1.5, 2.0, 3.0, 5.0])
def test_c_p_qubit_closed_form(p):
    rng = np.random.default_rng(1)
    for _ in range(5):
        rho = random_density(2, None, rng)
        q = abs(rho[0, 1])
        assert c_p(rho, p) == pytest.approx(2 ** (1 / p) * q, abs=1e-7)


def test_c_p_qubit_matches_grid():
    rho = qubit(0.2 + 0.1j, 0.65)
    grid = np.linspace(0, 1, 20001)
    for p in (1.5, 3.0):
        best = min(schatten_objective(rho, [t, 1 - t], p) for t in grid)
        assert c_p(rho, p) == pytest.approx(best, abs=1e-8)


def test_c_p_equals_c_lp_for_hermitian_block_shapes():
    for p in (1.5, 2.0, 3.0):
        rho = two_pair_state(0.7, 0.2)
        assert c_p(rho, p) == pytest.approx(c_lp(rho, p), abs=1e-7)


def test_c_p_diagonal_and_errors():
    assert c_p(np.diag([0.3, 0.7]), 2) == 0
    with pytest.raises(BadExponentError):
        c_p(np.eye(2) / 2, 1)


def test_c_p_near_one_certified():
    rho = random_density(4, None, 2)
    res = schatten_distance(rho, 1.1)
    assert res.certificate <= 1e-6
    assert res.spread <= 1e-6


def test_schatten_convexity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        rho = random_density(d, None, rng)
        d1, d2 = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        for p in (1.5, 2.0, 4.0):
            mid = schatten_objective(rho, 0.5 * (d1 + d2), p)
            avg = 0.5 * (schatten_objective(rho, d1, p) + schatten_objective(rho, d2, p))
            assert mid <= avg + 1e-10


def test_c_p_monotone_in_p():
    rho = random_density(3, None, 4)
    values = [c_p(rho, p) for p in (1.25, 1.5, 2.0, 3.0, 5.0)]
    assert all(b <= a + 1e-7 for a, b in zip(values, values[1:]))


def test_evaluate_dispatch():
    rho = random_density(3, None, 5)
    assert evaluate("l1", rho) == pytest.approx(c_l1(rho))
    assert evaluate("relent", rho) == pytest.approx(c_r(rho))
    assert evaluate("lp:2", rho) == pytest.approx(c_lp(rho, 2))
    assert evaluate(MeasureId("SCHATTEN", 2.0), rho) == pytest.approx(c_p(rho, 2))
    assert evaluate("trace", np.ones((1, 1))) == 0


# ############################################################################
# ENTROPIC QUANTITIES
# ############################################################################


def test_holevo_examples():
    rho = random_density(3, None, 6)
    assert holevo_chi([(0.3, rho), (0.7, rho)]) == pytest.approx(0, abs=1e-12)
    assert holevo_chi([(0.5, np.diag([1, 0])), (0.5, np.diag([0, 1]))]) == pytest.approx(1)
    with pytest.raises(DimensionMismatchError):
        holevo_chi([(0.5, np.eye(2) / 2), (0.5, np.eye(3) / 3)])
    with pytest.raises(NotDistributionError):
        holevo_chi([(0.5, np.eye(2) / 2), (0.6, np.eye(2) / 2)])


def test_holevo_bounded_by_entropy_times_distance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(n))
        states = [random_density(d, None, rng) for _ in range(n)]
        t = max(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum() for a in states for b in states)
        assert holevo_chi(list(zip(p, states))) <= shannon_entropy(p) * t + 1e-9


def test_twirl_examples():
    assert_allclose(dephasing_twirl(np.diag([1.0, 2.0, 3.0])), np.diag([1.0, 2.0, 3.0]))
    rho = pure_to_density(maximally_coherent(3))
    assert_allclose(dephasing_twirl(rho), np.eye(3) / 3, atol=1e-15)
    rng = np.random.default_rng(8)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.max(np.abs(dephasing_twirl(X) - np.diag(np.diag(X)))) <= 1e-12


def test_sign_flip_family():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert len(sign_flip_unitaries(5)) == 32
    assert_allclose(twirl(X, sign_flip_unitaries(5)), np.diag(np.diag(X)), atol=1e-13)
    assert len(dephasing_unitaries(5)) == 5
    with pytest.raises(ValueError):
        sign_flip_unitaries(11)


@settings(max_examples=300)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_entropy_chain(d, seed):
    lam = np.random.default_rng(seed).dirichlet(np.ones(d))
    low, mid, high = entropy_chain(lam)
    assert low <= mid + 1e-12
    assert mid <= high + 1e-12


# ############################################################################
# BOUNDS
# ############################################################################


def test_bounds_report_reference_qutrit():
    b = bounds_report(pure_to_density(qutrit_from_xy(1 / 500, 1 / 5)))
    assert b.c_l1 == pytest.approx(0.9182, abs=5e-4)
    assert b.c_r == pytest.approx(0.7413, abs=5e-4)
    assert b.pure_lower == pytest.approx(0.6717, abs=5e-4)
    assert b.fannes_upper == pytest.approx(b.c_l1 * math.log2(3) + FANNES_CONSTANT)
    assert b.to_dict()["fannes_label"] == "loose"


def test_bounds_report_maximally_coherent_tight():
    for d in range(2, 7):
        b = bounds_report(pure_to_density(maximally_coherent(d)))
        assert b.pure_lower == pytest.approx(b.c_l1, abs=1e-12)


def test_bounds_report_qubits():
    rng = np.random.default_rng(10)
    for _ in range(200):
        b = bounds_report(random_density(2, None, rng))
        assert b.logd_upper == pytest.approx(b.c_l1)
        assert b.c_r <= b.c_l1 + 1e-9
        assert all(math.isfinite(v) for v in (b.c_l1, b.c_r, b.pure_lower, b.fannes_upper))
        assert b.pure_lower >= 0


def test_pure_state_bounds():
    rng = np.random.default_rng(11)
    for _ in range(500):
        rho = pure_to_density(random_pure(int(rng.integers(2, 9)), rng))
        l1, cr = c_l1(rho), c_r(rho)
        assert l1 >= max(cr, 2**cr - 1) - 1e-9
