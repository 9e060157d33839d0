"""SDPA sparse (``.dat-s``) export of the trace-distance coherence program.

The program ``min tr(P) + tr(N)`` subject to ``P - N = rho - diag(delta)``,
``P, N >= 0``, ``delta >= 0``, ``sum(delta) = 1`` is written over the real
symmetric embedding ``H -> [[Re H, -Im H], [Im H, Re H]]``.  The embedding
doubles trace norms, hence the factor 1/2 in the objective.

SDPA's standard dual form is ``max tr(F0 Y)`` subject to ``tr(Fi Y) = ci``
and ``Y >= 0``; with ``Y = P (+) N (+) diag(delta)`` and ``F0 = -I/2`` on the
first two blocks the optimum equals ``-C_tr(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .states import validate_density

HEADER = "d-embedded trace-distance coherence"


def real_embedding(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


@dataclass
class SDPAProblem:
    """An SDP in SDPA dual standard form, with dense blocks.

    ``F[k][b]`` is block ``b`` of matrix ``F_k`` (``k = 0`` is the objective).
    Negative entries of ``block_struct`` denote diagonal blocks; their
    matrices are stored as full diagonal matrices.
    """

    c: np.ndarray
    block_struct: list
    F: list
    comments: list


def build_problem(rho) -> SDPAProblem:
    R = validate_density(rho)
    d = R.shape[0]
    n = 2 * d
    E = real_embedding(R)

    def zero():
        return [np.zeros((n, n)), np.zeros((n, n)), np.zeros((d, d))]

    F0 = zero()
    F0[0] -= 0.5 * np.eye(n)
    F0[1] -= 0.5 * np.eye(n)
    F, c = [F0], []
    for i in range(n):
        for j in range(i, n):
            Fi = zero()
            if i == j:
                Fi[0][i, i], Fi[1][i, i] = 1.0, -1.0
                Fi[2][i % d, i % d] = 1.0
            else:
                Fi[0][i, j] = Fi[0][j, i] = 0.5
                Fi[1][i, j] = Fi[1][j, i] = -0.5
            F.append(Fi)
            c.append(E[i, j])
    Fs = zero()
    Fs[2] = np.eye(d)
    F.append(Fs)
    c.append(1.0)
    return SDPAProblem(np.array(c), [n, n, -d], F, [HEADER])


def _fmt(x: float) -> str:
    return repr(float(x) + 0.0)


def write_sdpa(problem: SDPAProblem, path) -> Path:
    path = Path(path)
    lines = [f"* {line}" for line in problem.comments]
    lines.append(str(len(problem.c)))
    lines.append(str(len(problem.block_struct)))
    lines.append(" ".join(str(b) for b in problem.block_struct))
    lines.append(" ".join(_fmt(v) for v in problem.c))
    for k, blocks in enumerate(problem.F):
        for b, M in enumerate(blocks):
            rows, cols = np.nonzero(np.triu(M))
            for i, j in zip(rows, cols):
                lines.append(f"{k} {b + 1} {i + 1} {j + 1} {_fmt(M[i, j])}")
    path.write_text("\n".join(lines) + "\n")
    return path


def export_sdpa(rho, path) -> Path:
    """Write the trace-distance coherence SDP of ``rho`` to ``path``.

    The file's optimum (in SDPA's ``max tr(F0 Y)`` convention) is
    ``-C_tr(rho)``.
    """
    return write_sdpa(build_problem(rho), path)


def read_sdpa(path) -> SDPAProblem:
    """Parse a sparse SDPA file (comments start with ``*`` or ``"``)."""
    comments, body = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] in '*"':
            comments.append(line[1:].strip())
            continue
        body.append(line.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))
    m = int(body[0].split()[0])
    nblocks = int(body[1].split()[0])
    block_struct = [int(v) for v in body[2].split()[:nblocks]]
    tokens, idx = [], 3
    while len(tokens) < m:
        tokens += body[idx].split()
        idx += 1
    c = np.array([float(v) for v in tokens[:m]])
    F = [[np.zeros((abs(b), abs(b))) for b in block_struct] for _ in range(m + 1)]
    for line in body[idx:]:
        k, b, i, j, v = line.split()[:5]
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        F[k][b][i, j] = v
        F[k][b][j, i] = v
    return SDPAProblem(c, block_struct, F, comments)
