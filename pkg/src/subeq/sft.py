"""Subshift-of-finite-type combinatorics.

Symbols are 0-based integers ``{0, ..., q-1}``. Words are tuples of symbols.
All operations are pure and the :class:`Sft` object is immutable after
construction, so everything here is safe to share across threads.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

Word = tuple[int, ...]

#: Default memory guard for word enumeration.
DEFAULT_ENUMERATION_CAP = 2**22

#: Contraction factor of the standard metric d(x, y) = 2^{-k}: one shift of a
#: stable pair doubles the agreement radius, so distances halve.
METRIC_CONTRACTION = 0.5
METRIC_BASE = 2


class SftError(ValueError):
    """Raised for invalid adjacency data or out-of-contract word requests."""


@dataclass(frozen=True)
class Sft:
    """A primitive subshift of finite type given by a 0/1 adjacency matrix.

    ``primitivity_power`` is the smallest N with all entries of T^N positive.
    """

    q: int
    T: np.ndarray
    primitivity_power: int
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    _successors: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    def is_admissible(self, word) -> bool:
        w = tuple(word)
        if not w:
            return True
        if any(s < 0 or s >= self.q for s in w):
            return False
        return all(self.T[w[j], w[j + 1]] == 1 for j in range(len(w) - 1))

    def successors(self, a: int) -> tuple[int, ...]:
        return self._successors[a]


def build_sft(T, enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> Sft:
    """Validate a 0/1 adjacency matrix and compute its primitivity power.

    Rejects non-square or non-binary input, dead symbols (no outgoing or no
    incoming edge), and matrices that are not primitive. The primitivity
    search is capped at q^2: by Wielandt's bound a primitive q x q matrix
    satisfies N <= (q-1)^2 + 1 <= q^2, so failure at the cap certifies
    non-primitivity.
    """
    M = np.asarray(T)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SftError(f"adjacency matrix must be square, got shape {M.shape}")
    if M.size == 0:
        raise SftError("adjacency matrix is empty")
    if not np.isin(M, (0, 1)).all():
        bad = np.argwhere(~np.isin(M, (0, 1)))[0]
        raise SftError(f"non-binary entry T[{bad[0]},{bad[1]}] = {M[tuple(bad)]}")
    M = M.astype(np.int64)
    q = M.shape[0]
    row = M.sum(axis=1)
    col = M.sum(axis=0)
    for i in range(q):
        if row[i] == 0:
            raise SftError(f"dead symbol {i}: no outgoing edge")
        if col[i] == 0:
            raise SftError(f"dead symbol {i}: no incoming edge")

    cap = q * q
    power = np.eye(q, dtype=bool)
    N = None
    for n in range(1, cap + 1):
        power = power @ M.astype(bool)
        if power.all():
            N = n
            break
    if N is None:
        i, j = map(int, np.argwhere(~power)[0])
        raise SftError(
            f"matrix is not primitive: entry ({i},{j}) of T^{cap} is zero"
        )

    succ = tuple(tuple(int(b) for b in range(q) if M[a, b]) for a in range(q))
    M.setflags(write=False)
    return Sft(q=q, T=M, primitivity_power=N, enumeration_cap=enumeration_cap,
               _successors=succ)


def enumerate_words(sft: Sft, n: int) -> list[Word]:
    """All admissible words of length n, in lexicographic order."""
    if n < 1:
        raise SftError(f"word length must be >= 1, got {n}")
    count = word_count(sft, n)
    if count > sft.enumeration_cap:
        raise SftError(
            f"enumeration of {count} words exceeds cap {sft.enumeration_cap}"
        )
    words: list[Word] = []
    stack: list[Word] = [(a,) for a in reversed(range(sft.q))]
    while stack:
        w = stack.pop()
        if len(w) == n:
            words.append(w)
        else:
            for b in reversed(sft.successors(w[-1])):
                stack.append(w + (b,))
    return words


def word_count(sft: Sft, n: int) -> int:
    """|L(n)| = sum of the entries of T^(n-1), computed in exact integers."""
    if n < 1:
        raise SftError(f"word length must be >= 1, got {n}")
    P = np.eye(sft.q, dtype=object)
    for _ in range(n - 1):
        P = P @ sft.T.astype(object)
    return int(P.sum())


def periodic_words(sft: Sft, p: int) -> list[Word]:
    """Length-p words that are cyclically admissible; count equals trace(T^p)."""
    if p < 1:
        raise SftError(f"period must be >= 1, got {p}")
    return [w for w in enumerate_words(sft, p) if sft.T[w[-1], w[0]] == 1]


def bridge_word(sft: Sft, a: int, b: int, max_len: int | None = None) -> Word:
    """Shortest word K (possibly empty) with a K b admissible, by BFS.

    For a primitive SFT a connector of length <= primitivity_power always
    exists; ``max_len`` defaults to that bound.
    """
    for s in (a, b):
        if not 0 <= s < sft.q:
            raise SftError(f"symbol {s} out of range for alphabet size {sft.q}")
    if max_len is None:
        max_len = sft.primitivity_power
    if sft.T[a, b]:
        return ()
    # BFS over middle symbols, tracking the path.
    queue: deque[Word] = deque()
    if max_len >= 1:
        queue.extend((c,) for c in sft.successors(a))
    while queue:
        path = queue.popleft()
        if sft.T[path[-1], b]:
            return path
        if len(path) < max_len:
            for c in sft.successors(path[-1]):
                queue.append(path + (c,))
    raise SftError(f"no connector of length <= {max_len} from {a} to {b}")


def words_to_csv(words: list[Word], path) -> None:
    """Write a word list as CSV, one word per row, symbols comma-separated."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for w in words:
            writer.writerow(list(w))
