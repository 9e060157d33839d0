"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``; the verdict lines
are printed outside pytest's capture so they show up without ``-s``.
"""

import math
import time

import numpy as np
import pytest

from cohlab.channels import (
    lp_counterexample,
    maximally_coherent_density,
    monotonicity_scan,
    tensor_monotonicity_violation,
)
from cohlab.experiments import ExperimentConfig, run_experiment
from cohlab.linalg import trace_norm
from cohlab.measures import c_l1, c_lp, c_r, dephasing_twirl, schatten_distance
from cohlab.states import (
    maximally_coherent,
    pure_to_density,
    qutrit_from_xy,
    random_density,
    random_pure,
)
from cohlab.tracedist import (
    SolverOptions,
    c_tr_blocksum,
    c_tr_general,
    c_tr_pure,
    c_tr_qubit,
    c_tr_xstate,
    largest_root,
    pure_program_value,
)


@pytest.fixture
def verdict(capsys):
    """``verdict(n, ok, text)`` prints the criterion line and asserts ``ok``."""

    def emit(n, ok, text):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {text}")
        assert ok, text

    return emit


def random_x_state(rng, n):
    p = rng.dirichlet(np.ones(n))
    X = np.diag(p).astype(complex)
    for i in range(n // 2):
        j = n - 1 - i
        z = np.sqrt(p[i] * p[j]) * rng.random() * np.exp(2j * np.pi * rng.random())
        X[i, j], X[j, i] = z, np.conj(z)
    return X


def random_block_sum(rng, n):
    """Density matrix that is a direct sum of 2x2 blocks on randomly paired levels."""
    p = rng.dirichlet(np.ones(n))
    levels = rng.permutation(n)
    R = np.diag(p).astype(complex)
    for k in range(n // 2):
        i, j = levels[2 * k], levels[2 * k + 1]
        z = np.sqrt(p[i] * p[j]) * rng.random() * np.exp(2j * np.pi * rng.random())
        R[i, j], R[j, i] = z, np.conj(z)
    return R


def test_criterion_01_qubit_closed_form(verdict):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    err_general = err_qubit = 0.0
    for _ in range(1000):
        rho = random_density(2, None, rng)
        q = abs(rho[0, 1])
        err_general = max(err_general, abs(c_tr_general(rho).value - 2 * q))
        err_qubit = max(err_qubit, abs(c_tr_qubit(rho).value - 2 * q))
    elapsed = time.perf_counter() - t0
    ok = err_general <= 1e-6 and err_qubit <= 1e-12 and elapsed < 5
    verdict(1, ok, f"1000 qubits, general err {err_general:.2e}, qubit err {err_qubit:.2e}, {elapsed:.2f} s")


def test_criterion_02_pure_qutrit_ordering(verdict):
    psi = np.array([2, 2, 1]) / 3
    rho = pure_to_density(psi)
    half = trace_norm(rho - np.diag([0.5, 0.5, 0.0]))
    dephased = trace_norm(rho - np.diag(np.diag(rho)))
    value = c_tr_pure(psi).value
    ok = dephased - half > 0 and value <= min(half, dephased) + 1e-6
    verdict(2, ok, f"diag(1/2,1/2,0) gives {half:.10f} < {dephased:.10f}, c_tr_pure {value:.10f}")


def test_criterion_03_reference_numbers(verdict):
    t0 = time.perf_counter()
    rho = pure_to_density(qutrit_from_xy(1 / 500, 1 / 5))
    l1, cr = c_l1(rho), c_r(rho)
    lower = 2**cr - 1
    elapsed = time.perf_counter() - t0
    ok = (abs(l1 - 0.9182) <= 5e-4 and abs(cr - 0.7413) <= 5e-4
          and abs(lower - 0.6717) <= 5e-4 and elapsed < 1)
    verdict(3, ok, f"C_l1 {l1:.5f}, C_r {cr:.5f}, 2^C_r - 1 {lower:.5f}")


def test_criterion_04_pure_state_bounds(verdict):
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    worst = np.inf
    for _ in range(10000):
        rho = pure_to_density(random_pure(int(rng.integers(2, 9)), rng))
        l1, cr = c_l1(rho), c_r(rho)
        worst = min(worst, l1 - max(cr, 2**cr - 1))
    equality = max(
        abs(c_l1(R) - (2 ** c_r(R) - 1))
        for R in (pure_to_density(maximally_coherent(d)) for d in range(2, 9))
    )
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and equality <= 1e-9 and elapsed < 30
    verdict(4, ok, f"10^4 pure states, min slack {worst:.2e}, max-coherent equality err {equality:.2e}, "
                   f"{elapsed:.1f} s")


def test_criterion_05_log_d_bound(verdict):
    rng = np.random.default_rng(105)
    t0 = time.perf_counter()
    worst = worst_qubit = np.inf
    for _ in range(10000):
        d = int(rng.integers(2, 7))
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        l1, cr = c_l1(rho), c_r(rho)
        worst = min(worst, math.log2(d) * l1 - cr)
        if d == 2:
            worst_qubit = min(worst_qubit, l1 - cr)
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and worst_qubit >= -1e-9 and elapsed < 60
    verdict(5, ok, f"10^4 mixed states, min slack {worst:.2e}, qubit slack {worst_qubit:.2e}, {elapsed:.1f} s")


def test_criterion_06_twirl(verdict):
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        worst = max(worst, float(np.max(np.abs(dephasing_twirl(X) - np.diag(np.diag(X))))))
    verdict(6, worst <= 1e-12, f"10^3 matrices, max entry error {worst:.2e}")


def test_criterion_07_lp_table(verdict):
    t0 = time.perf_counter()
    table = {p: lp_counterexample(1, 1, p) for p in (1.0, 1.25, 1.5, 2.0, 3.0, 5.0)}
    elapsed = time.perf_counter() - t0
    at1, at2 = table[1.0], table[2.0]
    ok = (at1.lp.strong_gap >= -1e-9 and at1.schatten.strong_gap >= -1e-9
          and at2.lp.strong_gap <= -0.2 and at2.schatten.strong_gap <= -0.2
          and all(rep.violation for p, rep in table.items() if p > 1)
          and elapsed < 5)
    gaps = ", ".join(f"p={p:g}: {rep.lp.strong_gap:.4f}/{rep.schatten.strong_gap:.4f}"
                     for p, rep in table.items())
    verdict(7, ok, f"strong gaps (lp/schatten) {gaps}, {elapsed:.2f} s")


def test_criterion_08_tensor_violation(verdict):
    t0 = time.perf_counter()
    rho = maximally_coherent_density(3)
    rep = tensor_monotonicity_violation(rho, 2, 2.0, SolverOptions(tol=1e-9))
    base_lp = c_lp(rho, 2.0)
    base_p = schatten_distance(rho, 2.0, SolverOptions(tol=1e-9)).value
    elapsed = time.perf_counter() - t0
    scale = 1 / math.sqrt(2)
    ok = (rep.lp.c_det_out > rep.lp.c_in and rep.schatten.c_det_out > rep.schatten.c_in
          and abs(rep.lp.c_in / base_lp - scale) <= 1e-6
          and abs(rep.schatten.c_in / base_p - scale) <= 1e-6
          and abs(rep.lp.c_in / rep.lp.c_det_out - scale) <= 1e-6
          and abs(rep.schatten.c_in / rep.schatten.c_det_out - scale) <= 1e-5
          and elapsed < 10)
    verdict(8, ok, f"C_lp {rep.lp.c_in:.8f} -> {rep.lp.c_det_out:.8f}, "
                   f"C_p {rep.schatten.c_in:.8f} -> {rep.schatten.c_det_out:.8f}, {elapsed:.2f} s")


def test_criterion_09_strong_monotone_theorems(verdict):
    t0 = time.perf_counter()
    worst = {}
    for name, seed in (("l1", 109), ("relent", 209)):
        rows = monotonicity_scan(name, (2, 4), samples=10000, seed=seed)
        worst[name] = min(r["strong_gap"] for r in rows)
    elapsed = time.perf_counter() - t0
    ok = min(worst.values()) >= -1e-9 and elapsed < 300
    verdict(9, ok, f"10^4 pairs each, min strong gap l1 {worst['l1']:.2e}, "
                   f"relent {worst['relent']:.2e}, {elapsed:.1f} s")


def test_criterion_10_conjecture_scans(verdict, tmp_path):
    results = {}
    for name in ("sm_scan_tr", "conjecture_cl1_cr"):
        report, code = run_experiment(ExperimentConfig(name=name, output_path=str(tmp_path)))
        files = [(tmp_path / f"{name}.csv").exists(), (tmp_path / f"{name}.json").exists()]
        results[name] = (code, len(report.violations), all(files), len(report.rows))
    ok = all(code == 0 and nviol == 0 and files for code, nviol, files, _ in results.values())
    text = ", ".join(f"{k}: {n} rows, {v} violations" for k, (_, v, _, n) in results.items())
    verdict(10, ok, text)


def test_criterion_11_backend_coherence(verdict):
    rng = np.random.default_rng(111)
    t0 = time.perf_counter()
    err_x = err_b = 0.0
    for _ in range(500):
        X = random_x_state(rng, int(rng.integers(3, 7)))
        err_x = max(err_x, abs(c_tr_xstate(X).value - c_tr_general(X).value))
        B = random_block_sum(rng, int(rng.integers(3, 7)))
        err_b = max(err_b, abs(c_tr_blocksum(B).value - c_tr_general(B).value))
    elapsed = time.perf_counter() - t0
    ok = err_x <= 1e-4 and err_b <= 1e-4
    verdict(11, ok, f"500 X-states err {err_x:.2e}, 500 block sums err {err_b:.2e}, {elapsed:.1f} s")


def test_criterion_12_pure_state_machinery(verdict):
    rng = np.random.default_rng(112)
    root_err = prog_err = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        psi = np.abs(random_pure(d, rng))
        lam = psi**2
        delta = rng.dirichlet(np.ones(d))
        top = np.linalg.eigvalsh(np.outer(psi, psi) - np.diag(delta))[-1]
        root_err = max(root_err, abs(largest_root(lam, delta) - top))
        minmax = c_tr_pure(psi, cross_check=False).value
        program, _ = pure_program_value(lam)
        prog_err = max(prog_err, abs(program - minmax))
    ok = root_err <= 1e-9 and prog_err <= 1e-6
    verdict(12, ok, f"10^3 pure states, root err {root_err:.2e}, program vs 2 min-max err {prog_err:.2e}")
