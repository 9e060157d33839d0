"""Small first-order routines over the probability simplex."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .linalg import project_simplex

ARMIJO_SIGMA = 1e-4


def projected_gradient(fun_grad, x0, max_iters=5000, gtol=1e-12):
    """Minimise a smooth convex function over the simplex.

    Projected gradient with Barzilai-Borwein trial steps and Armijo
    backtracking along the projection arc.  ``fun_grad(x)`` returns
    ``(f, grad)``.  Returns ``(x, f, iterations)``.
    """
    x = project_simplex(x0)
    f, g = fun_grad(x)
    alpha = 1.0
    it = 0
    for it in range(1, max_iters + 1):
        if np.max(np.abs(project_simplex(x - g) - x)) <= gtol:
            break
        while True:
            xt = project_simplex(x - alpha * g)
            ft, gt = fun_grad(xt)
            if ft <= f + ARMIJO_SIGMA * (g @ (xt - x)) or alpha < 1e-20:
                break
            alpha *= 0.5
        s = xt - x
        if ft > f or np.max(np.abs(s)) < 1e-16:
            # no representable decrease left
            if ft <= f:
                x, f, g = xt, ft, gt
            break
        y = gt - g
        x, f, g = xt, ft, gt
        sy = float(s @ y)
        alpha = float(s @ s) / sy if sy > 1e-300 else 1.0
        alpha = min(max(alpha, 1e-12), 1e6)
    return x, float(f), it


def spectral_lower_bound(rho, delta):
    """Dual bound ``tr(W rho) - max_i W_ii`` optimised over ``W = U diag(s) U^dag``.

    ``U`` is the eigenbasis of ``rho - diag(delta)`` and ``s`` ranges over
    ``[-1, 1]^d``, so every candidate has operator norm at most one and the
    returned number is a valid lower bound on the minimum of
    ``||rho - diag(x)||_1`` over the simplex.  The LP only chooses ``s``; the
    bound itself is re-evaluated exactly from the clipped ``s``.
    """
    d = rho.shape[0]
    H = rho - np.diag(delta)
    w, U = np.linalg.eigh(0.5 * (H + H.conj().T))
    a = np.real(np.einsum("ij,ik,kj->j", U.conj(), rho, U))
    B = np.abs(U) ** 2
    s0 = np.sign(w)
    best = float(a @ s0 - np.max(B @ s0))
    res = linprog(
        np.concatenate([-a, [1.0]]),
        A_ub=np.hstack([B, -np.ones((d, 1))]),
        b_ub=np.zeros(d),
        bounds=[(-1.0, 1.0)] * d + [(None, None)],
        method="highs",
    )
    if res.status == 0:
        s = np.clip(res.x[:d], -1.0, 1.0)
        best = max(best, float(a @ s - np.max(B @ s)))
    return best


def sign_lower_bound(rho, W):
    """``tr(W rho) - max_i W_ii`` for a dual-feasible ``W``."""
    return float(np.real(np.vdot(W, rho)) - np.max(np.real(np.diag(W))))
