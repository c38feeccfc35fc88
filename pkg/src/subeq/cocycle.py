"""Finite-range matrix cocycles over a subshift of finite type.

The generator at a point depends on the forward window ``x_0 ... x_k``
(window radius k), so the cocycle is stored as a table mapping admissible
(k+1)-words to invertible d x d matrices. Radius 0 recovers locally constant
cocycles. Tables are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .sft import Sft, SftError, Word, enumerate_words

MAX_DIMENSION = 32  # exterior powers explode combinatorially beyond this
DET_RTOL = 1e-12


class CocycleError(ValueError):
    """Raised for malformed cocycle tables or out-of-contract requests."""


@dataclass(frozen=True)
class FiniteRangeCocycle:
    """Window-indexed table of invertible matrices plus a Hoelder exponent.

    ``alpha`` is recorded as declared; it only enters bunching thresholds.
    """

    sft: Sft
    d: int
    k: int
    alpha: float
    table: dict[Word, np.ndarray] = field(repr=False)

    @property
    def locally_constant(self) -> bool:
        return self.k == 0

    def generator(self, window) -> np.ndarray:
        w = tuple(window)
        try:
            return self.table[w]
        except KeyError:
            raise CocycleError(f"no generator for window {w}") from None


def build_cocycle(sft: Sft, d: int, k: int, alpha: float,
                  table: dict) -> FiniteRangeCocycle:
    """Validate and freeze a cocycle table.

    Requires an entry for every admissible (k+1)-word, invertibility of every
    matrix (|det| relative to the norm scale above ``DET_RTOL``), and
    1 <= d <= 32, k >= 0, 0 < alpha <= 1.
    """
    if not 1 <= d <= MAX_DIMENSION:
        raise CocycleError(f"dimension d={d} outside [1, {MAX_DIMENSION}]")
    if k < 0:
        raise CocycleError(f"window radius k={k} must be >= 0")
    if not 0 < alpha <= 1:
        raise CocycleError(f"Hoelder exponent alpha={alpha} outside (0, 1]")

    frozen: dict[Word, np.ndarray] = {}
    for w, A in table.items():
        w = tuple(int(s) for s in w)
        M = np.asarray(A, dtype=float)
        if M.shape != (d, d):
            raise CocycleError(f"matrix for window {w} has shape {M.shape}, "
                               f"expected ({d}, {d})")
        if not np.isfinite(M).all():
            raise CocycleError(f"non-finite entry in matrix for window {w}")
        scale = max(np.abs(M).max(), 1.0)
        if abs(np.linalg.det(M)) <= DET_RTOL * scale**d:
            raise CocycleError(f"matrix for window {w} is singular")
        M.setflags(write=False)
        frozen[w] = M

    for w in enumerate_words(sft, k + 1):
        if w not in frozen:
            raise CocycleError(f"missing table entry for admissible window {w}")

    return FiniteRangeCocycle(sft=sft, d=d, k=k, alpha=alpha, table=frozen)


def word_product(coc: FiniteRangeCocycle, word) -> np.ndarray:
    """Product of generators along a word, later-time factors on the left.

    For |word| = n + k this is the n-step cocycle product read off the first
    n windows of the word.
    """
    w = tuple(word)
    if len(w) < coc.k + 1:
        raise CocycleError(
            f"word of length {len(w)} shorter than window size {coc.k + 1}")
    if not coc.sft.is_admissible(w):
        raise CocycleError(f"inadmissible word {w}")
    n = len(w) - coc.k
    out = np.eye(coc.d)
    for j in range(n):
        out = coc.generator(w[j:j + coc.k + 1]) @ out
    return out


def cyclic_product(coc: FiniteRangeCocycle, word) -> np.ndarray:
    """Product of generators along one period of a cyclically admissible word.

    Windows wrap around the end of the word, so this is the return map of the
    periodic point the word encodes.
    """
    w = tuple(word)
    p = len(w)
    if p < 1:
        raise CocycleError("empty periodic word")
    if not coc.sft.is_admissible(w) or coc.sft.T[w[-1], w[0]] != 1:
        raise CocycleError(f"word {w} is not cyclically admissible")
    ext = w + w * (coc.k // p + 1)
    out = np.eye(coc.d)
    for j in range(p):
        out = coc.generator(ext[j:j + coc.k + 1]) @ out
    return out


def _compound(M: np.ndarray, t: int) -> np.ndarray:
    idx = list(combinations(range(M.shape[0]), t))
    C = np.empty((len(idx), len(idx)))
    for i, rows in enumerate(idx):
        for j, cols in enumerate(idx):
            C[i, j] = np.linalg.det(M[np.ix_(rows, cols)])
    return C


def exterior_power(coc: FiniteRangeCocycle, t: int) -> FiniteRangeCocycle:
    """The t-th exterior power cocycle, of dimension binom(d, t).

    Table entries are the t-th compound matrices of the originals;
    word products commute with taking exterior powers.
    """
    if not 1 <= t <= coc.d:
        raise CocycleError(f"exterior power t={t} outside [1, {coc.d}]")
    if t == 1:
        return coc
    table = {w: _compound(M, t) for w, M in coc.table.items()}
    return FiniteRangeCocycle(sft=coc.sft, d=math.comb(coc.d, t), k=coc.k,
                              alpha=coc.alpha, table=table)


def singular_values(A) -> np.ndarray:
    """Singular values of A in decreasing order."""
    return np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)


def operator_norm(A) -> float:
    return float(singular_values(A)[0])


def phi_s(A, s: float) -> float:
    """The singular-value function: sigma_1 ... sigma_floor(s) *
    sigma_ceil(s)^{s - floor(s)} for s <= d, and |det A|^{s/d} for s > d.
    """
    return math.exp(log_phi_s(A, s))


def log_phi_s(A, s: float) -> float:
    """log of :func:`phi_s`, computed without over/underflow."""
    if s < 0:
        raise CocycleError(f"singular-value parameter s={s} must be >= 0")
    M = np.asarray(A, dtype=float)
    d = M.shape[0]
    if s > d:
        sign, logdet = np.linalg.slogdet(M)
        if sign == 0:
            raise CocycleError("singular matrix in phi_s")
        return (s / d) * logdet
    sv = singular_values(M)
    if sv[-1] <= 0:
        raise CocycleError("singular matrix in phi_s")
    m = math.floor(s)
    out = float(np.log(sv[:m]).sum())
    if s > m:
        out += (s - m) * math.log(sv[m])
    return out
