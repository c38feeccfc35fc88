"""Shared builders and independent oracles for the test suite.

Everything here deliberately avoids the library's own enumeration and
optimization code paths, so the tests compare two genuinely different
computations.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from subeq.cocycle import build_cocycle
from subeq.sft import build_sft

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

FULL2 = [[1, 1], [1, 1]]
GOLDEN_MEAN = [[1, 1], [1, 0]]


def brute_force_words(T, n):
    """All admissible n-words by filtering the full product space."""
    T = np.asarray(T)
    q = T.shape[0]
    out = []
    for w in itertools.product(range(q), repeat=n):
        if all(T[w[j], w[j + 1]] == 1 for j in range(n - 1)):
            out.append(w)
    return out


def scalar_cocycle(sft, values, alpha=1.0):
    """Locally constant 1x1 cocycle with value values[a] at symbol a."""
    table = {(a,): [[float(values[a])]] for a in range(sft.q)}
    return build_cocycle(sft, 1, 0, alpha, table)


def constant_cocycle(sft, M, alpha=1.0):
    """Locally constant cocycle using the same matrix at every symbol."""
    M = np.asarray(M, dtype=float)
    table = {(a,): M for a in range(sft.q)}
    return build_cocycle(sft, M.shape[0], 0, alpha, table)


def full2_sft():
    return build_sft(FULL2)


def golden_sft():
    return build_sft(GOLDEN_MEAN)


def assignment_dbar(mu_units: dict, nu_units: dict, n: int, D: int) -> float:
    """Exact d-bar for rational distributions with denominator D.

    Each distribution is given as integer unit counts summing to D; the
    transportation optimum is the minimum-cost perfect matching of the D
    mass units (Hungarian algorithm), which is exact for rational data.
    """
    left = [seq for seq, c in sorted(mu_units.items()) for _ in range(c)]
    right = [seq for seq, c in sorted(nu_units.items()) for _ in range(c)]
    assert len(left) == D and len(right) == D
    C = np.empty((D, D))
    for i, x in enumerate(left):
        for j, y in enumerate(right):
            C[i, j] = sum(a != b for a, b in zip(x, y)) / n
    rows, cols = linear_sum_assignment(C)
    return float(C[rows, cols].sum()) / D


def family_reducible_over_C(mats, tol=1e-8) -> bool:
    """Whether a family of 2x2 matrices has a common complex eigenvector.

    Candidates are the eigenvectors of the first non-scalar member; a family
    of scalar matrices is trivially reducible.
    """
    mats = [np.asarray(M, dtype=complex) for M in mats]
    pivot = None
    for M in mats:
        if np.abs(M - M[0, 0] * np.eye(2)).max() > tol * max(1.0, np.abs(M).max()):
            pivot = M
            break
    if pivot is None:
        return True
    vals, vecs = np.linalg.eig(pivot)
    for i in range(2):
        v = vecs[:, i]
        if all(_is_eigvec(M, v, tol) for M in mats):
            return True
    return False


def _is_eigvec(M, v, tol) -> bool:
    w = M @ v
    lam = (np.conj(v) @ w) / (np.conj(v) @ v)
    scale = max(1.0, float(np.abs(M).max()))
    return bool(np.abs(w - lam * v).max() <= tol * scale)


def perron(M):
    """Leading eigenvalue and positive eigenvector of a primitive matrix."""
    vals, vecs = np.linalg.eig(np.asarray(M, dtype=float))
    i = int(np.argmax(vals.real))
    v = np.abs(vecs[:, i].real)
    return float(vals[i].real), v


def log_phi_s_oracle(M, s):
    """phi^s via eigenvalues of M^T M, independent of the library's SVD."""
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    if s > d:
        return (s / d) * math.log(abs(np.linalg.det(M)))
    ev = np.sort(np.linalg.eigvalsh(M.T @ M))[::-1]
    sv = np.sqrt(np.clip(ev, 0.0, None))
    m = math.floor(s)
    out = float(np.log(sv[:m]).sum())
    if s > m:
        out += (s - m) * math.log(sv[m])
    return out
