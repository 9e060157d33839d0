import numpy as np
import pytest
from numpy.testing import assert_allclose

from cohlab.exceptions import (
    BadPartitionError,
    BadRankError,
    DegenerateInputError,
    WrongDimError,
)
from cohlab.linalg import trace_norm
from cohlab.measures import c_l1
from cohlab.states import (
    maximally_coherent,
    pure_to_density,
    random_density,
    random_pure,
    two_pair_state,
    x_state,
)
from cohlab.tracedist import (
    Backend,
    SolverOptions,
    c_tr,
    c_tr_blocksum,
    c_tr_general,
    c_tr_pure,
    c_tr_qubit,
    c_tr_xstate,
    characteristic_determinant,
    detect_blocks,
    largest_root,
    largest_root_gradient,
    program_objective,
    program_to_root,
    pure_program_value,
    root_to_program,
)

# C_tr of random_density(d, rank, seed) from an SDP solved with cvxpy/CLARABEL
# over complex Hermitian P, N (see tests/test_sdpa.py for the live cross-check)
SDP_VALUES = {
    (3, 3, 11): 0.6329821939,
    (3, 2, 12): 0.8736158577,
    (4, 4, 13): 0.5260415067,
    (4, 2, 14): 0.7168150729,
    (5, 5, 15): 0.7464327885,
    (6, 3, 16): 1.0476505635,
}


def random_x_state(rng, n):
    """Random X-shaped density matrix: 2x2 PSD blocks on levels (i, n-1-i)."""
    p = rng.dirichlet(np.ones(n))
    X = np.diag(p).astype(complex)
    for i in range(n // 2):
        j = n - 1 - i
        z = np.sqrt(p[i] * p[j]) * rng.random() * np.exp(2j * np.pi * rng.random())
        X[i, j], X[j, i] = z, np.conj(z)
    return X


# ############################################################################
# CLOSED FORMS
# ############################################################################


def test_qubit_closed_form():
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    res = c_tr_qubit(rho)
    assert res.value == pytest.approx(2 * abs(0.2 - 0.1j))
    assert_allclose(res.minimizer, [0.7, 0.3])
    assert res.backend is Backend.QUBIT
    assert c_tr_qubit(np.diag([0.4, 0.6])).value == 0
    assert c_tr_qubit([[0, 1], [0, 0]]).value == 1
    with pytest.raises(WrongDimError):
        c_tr_qubit(np.eye(3) / 3)


def test_qubit_non_normal_matches_grid():
    # dense grid over complex diagonal D for A = [[0, 1], [0, 0]]
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    axis = np.linspace(-1, 1, 21)
    best = min(
        trace_norm(A - np.diag([a + 1j * b, c + 1j * e]))
        for a in axis for b in axis for c in axis for e in axis
    )
    assert c_tr_qubit(A).value == pytest.approx(best, abs=1e-12)


def test_detect_blocks():
    X = x_state([0.25] * 4, [0.1, 0.1, 0.1, 0.1])
    assert detect_blocks(X) == [(0, 3), (1, 2)]
    assert detect_blocks(two_pair_state(0.5, 0.5)) == [(0, 2), (1, 3)]
    assert detect_blocks(np.ones((3, 3)) / 3) is None


def test_blocksum_values():
    a, b = 0.8, 0.3j
    res = c_tr_blocksum(two_pair_state(a, b))
    assert res.value == pytest.approx((abs(a) + abs(b)) / 2)
    assert res.value == pytest.approx(c_tr_general(two_pair_state(a, b)).value, abs=1e-6)
    assert c_tr_blocksum(np.diag([0.5, 0.25, 0.25])).value == 0
    with pytest.raises(BadPartitionError):
        c_tr_blocksum(np.ones((3, 3)) / 3)
    with pytest.raises(BadPartitionError):
        c_tr_blocksum(two_pair_state(a, b), [(0, 1), (2, 3)])


def test_xstate_equals_l1():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5, 6):
        X = random_x_state(rng, n)
        res = c_tr_xstate(X)
        assert res.backend is Backend.XSTATE
        assert res.value == pytest.approx(c_l1(X), abs=1e-14)
    with pytest.raises(BadPartitionError):
        c_tr_xstate(np.ones((3, 3)) / 3)


def test_xstate_accepts_non_hermitian():
    X = x_state([1, 2, 3, 4], [1, 2j, 3, -4])
    assert c_tr_xstate(X).value == pytest.approx(10)


# ############################################################################
# PURE-STATE MACHINERY
# ############################################################################


def test_largest_root_examples():
    assert largest_root([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)
    assert largest_root([1.0], [1.0]) == 0.0
    with pytest.raises(DegenerateInputError):
        largest_root([0.0, 0.0], [0.5, 0.5])


def test_largest_root_is_positive_eigenvalue():
    rng = np.random.default_rng(1)
    for _ in range(300):
        d = int(rng.integers(2, 7))
        psi = np.abs(random_pure(d, rng))
        lam = psi**2
        delta = rng.dirichlet(np.ones(d))
        H = np.outer(psi, psi) - np.diag(delta)
        w = np.linalg.eigvalsh(H)
        x = largest_root(lam, delta)
        assert x == pytest.approx(w[-1], abs=1e-12)
        assert np.sum(lam / (x + delta)) == pytest.approx(1, abs=1e-12)
        assert 2 * x == pytest.approx(trace_norm(H), abs=1e-10)


def test_largest_root_with_zero_delta():
    lam = np.array([0.5, 0.3, 0.2])
    delta = np.array([0.0, 0.6, 0.4])
    psi = np.sqrt(lam)
    w = np.linalg.eigvalsh(np.outer(psi, psi) - np.diag(delta))
    assert largest_root(lam, delta) == pytest.approx(w[-1], abs=1e-12)


def test_characteristic_determinant():
    rng = np.random.default_rng(2)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        psi = np.abs(random_pure(d, rng))
        delta = rng.dirichlet(np.ones(d))
        H = np.outer(psi, psi) - np.diag(delta)
        x = rng.random() + 0.1
        expected = np.linalg.det(x * np.eye(d) - H)
        assert characteristic_determinant(psi**2, delta, x) == pytest.approx(expected, rel=1e-9)


def test_implicit_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    lam = rng.dirichlet(np.ones(4))
    delta = rng.dirichlet(np.ones(4))
    g = largest_root_gradient(lam, delta)
    h = 1e-7
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fd = (largest_root(lam, delta + e) - largest_root(lam, delta - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-6)


def test_program_maps_roundtrip():
    rng = np.random.default_rng(4)
    lam = rng.dirichlet(np.ones(4))
    delta = rng.dirichlet(np.ones(4))
    x = largest_root(lam, delta)
    z = root_to_program(lam, delta, x)
    assert z.sum() == pytest.approx(1, abs=1e-12)
    x2, delta2 = program_to_root(lam, z)
    assert x2 == pytest.approx(x, abs=1e-12)
    assert_allclose(delta2, delta, atol=1e-12)
    assert program_objective(lam, z) == pytest.approx(2 * x, abs=1e-12)


def test_pure_qutrit_closest_state():
    psi = np.array([2, 2, 1]) / 3
    rho = pure_to_density(psi)
    half = trace_norm(rho - np.diag([0.5, 0.5, 0.0]))
    dephased = trace_norm(rho - np.diag(np.diag(rho)))
    # eigensolver values, frozen
    assert half == pytest.approx(1.1871842709, abs=1e-9)
    assert dephased == pytest.approx(1.2142448034, abs=1e-9)
    res = c_tr_pure(psi)
    assert res.value <= half + 1e-6
    assert res.value == pytest.approx(half, abs=1e-8)
    assert_allclose(res.minimizer, [0.5, 0.5, 0.0], atol=1e-5)


def test_pure_examples():
    assert c_tr_pure(maximally_coherent(2)).value == pytest.approx(1, abs=1e-9)
    assert c_tr_pure([0, 1, 0]).value == 0


def test_pure_matches_program_and_general():
    rng = np.random.default_rng(5)
    for _ in range(20):
        psi = random_pure(3, rng)
        res = c_tr_pure(psi)
        assert res.details["program_residual"] <= 1e-6
        assert res.value == pytest.approx(c_tr_general(pure_to_density(psi)).value, abs=1e-4)


def test_program_value_directly():
    lam = np.array([4, 4, 1]) / 9
    value, _ = pure_program_value(lam)
    assert value == pytest.approx(1.1871842709, abs=1e-7)


# ############################################################################
# GENERAL SOLVER AND DISPATCH
# ############################################################################


@pytest.mark.parametrize("key", sorted(SDP_VALUES))
def test_general_matches_sdp_oracle(key):
    res = c_tr_general(random_density(*key))
    assert res.value == pytest.approx(SDP_VALUES[key], abs=1e-6)
    assert res.certificate <= 1e-6
    assert res.minimizer.sum() == pytest.approx(1)
    assert np.all(res.minimizer >= 0)


def test_general_on_qubits():
    rng = np.random.default_rng(6)
    for _ in range(50):
        rho = random_density(2, None, rng)
        assert c_tr_general(rho).value == pytest.approx(2 * abs(rho[0, 1]), abs=1e-6)


def test_general_on_x_states():
    rng = np.random.default_rng(7)
    for _ in range(10):
        X = random_x_state(rng, 4)
        assert c_tr_general(X).value == pytest.approx(c_l1(X), abs=1e-4)


def test_general_diagonal():
    res = c_tr_general(np.diag([0.2, 0.3, 0.5]))
    assert res.value == 0
    assert_allclose(res.minimizer, [0.2, 0.3, 0.5])


def test_sandwich():
    rng = np.random.default_rng(8)
    for _ in range(20):
        rho = random_density(int(rng.integers(2, 6)), None, rng)
        v = c_tr(rho).value
        dephased = trace_norm(rho - np.diag(np.diag(rho)))
        assert 0 <= v <= dephased + 1e-9
        assert dephased <= c_l1(rho) + 1e-12


def test_dispatch():
    assert c_tr(random_density(2, None, 0)).backend is Backend.QUBIT
    assert c_tr(x_state([0.25] * 4, [0.1] * 4)).backend is Backend.BLOCKSUM
    assert c_tr(random_density(3, 3, 1)).backend is Backend.GENERAL
    assert c_tr(pure_to_density(random_pure(3, 2))).backend is Backend.PURE
    res = c_tr(random_density(3, 3, 1), backend="general")
    assert res.backend is Backend.GENERAL
    with pytest.raises(BadRankError):
        c_tr(random_density(3, 3, 1), backend="pure")
    with pytest.raises(ValueError):
        c_tr(np.eye(2) / 2, backend="nope")


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol=0)
    with pytest.raises(ValueError):
        SolverOptions(restarts=0)


def test_result_to_dict():
    d = c_tr(random_density(3, 3, 1)).to_dict()
    assert d["backend"] == "GENERAL" and len(d["minimizer"]) == 3
