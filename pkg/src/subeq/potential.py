"""Submultiplicative word potentials.

A potential assigns a positive value phi(I) to every admissible word. For a
finite-range cocycle the value on an n-word is the exact maximum of the
singular-value function over all admissible k-symbol right-extensions, which
realizes the sup over the cylinder without any approximation (the n-step
product depends only on the first n+k symbols). Custom word tables are
supported, mainly to feed adversarial cases to the audits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cocycle import FiniteRangeCocycle, log_phi_s, word_product
from .sft import Sft, Word, enumerate_words

SUBMULT_RTOL = 1e-10


class PotentialError(ValueError):
    pass


def _extensions(sft: Sft, last: int, k: int) -> list[Word]:
    """Admissible k-words continuing a word ending in ``last``."""
    if k == 0:
        return [()]
    exts: list[Word] = []
    stack: list[Word] = [(b,) for b in reversed(sft.successors(last))]
    while stack:
        e = stack.pop()
        if len(e) == k:
            exts.append(e)
        else:
            for b in reversed(sft.successors(e[-1])):
                stack.append(e + (b,))
    return exts


class WordPotential:
    """Evaluator phi over admissible words; values handled in log space."""

    kind = "custom"
    cocycle: FiniteRangeCocycle | None = None

    def __init__(self, sft: Sft):
        self.sft = sft

    def log_value(self, word) -> float:
        raise NotImplementedError

    def value(self, word) -> float:
        return math.exp(self.log_value(word))


class SingularValuePotential(WordPotential):
    """phi(I) = max over k-extensions E of phi^s(product along I E).

    s = 1 is the norm potential.
    """

    def __init__(self, coc: FiniteRangeCocycle, s: float = 1.0):
        super().__init__(coc.sft)
        if s < 0:
            raise PotentialError(f"s={s} must be >= 0")
        self.cocycle = coc
        self.s = float(s)
        self.kind = "norm" if s == 1.0 else f"sv:{s}"
        self._cache: dict[Word, float] = {}

    def log_value(self, word) -> float:
        w = tuple(word)
        if w in self._cache:
            return self._cache[w]
        coc = self.cocycle
        if not self.sft.is_admissible(w) or not w:
            raise PotentialError(f"inadmissible word {w}")
        best = -math.inf
        for ext in _extensions(self.sft, w[-1], coc.k):
            best = max(best, log_phi_s(word_product(coc, w + ext), self.s))
        self._cache[w] = best
        return best

    def pointwise_log_values(self, word) -> list[float]:
        """log phi_n over each k-extension separately (the per-cylinder
        pointwise values behind the sup)."""
        coc = self.cocycle
        w = tuple(word)
        return [log_phi_s(word_product(coc, w + ext), self.s)
                for ext in _extensions(self.sft, w[-1], coc.k)]


def make_potential(coc: FiniteRangeCocycle, kind: str = "norm") -> WordPotential:
    """Build a norm or singular-value potential. ``kind`` is ``"norm"`` or
    ``"sv:S"`` with S a decimal."""
    if kind == "norm":
        return SingularValuePotential(coc, 1.0)
    if kind.startswith("sv:"):
        return SingularValuePotential(coc, float(kind[3:]))
    raise PotentialError(f"unknown potential kind {kind!r}")


class TablePotential(WordPotential):
    """Potential backed by an explicit word table or a word function."""

    kind = "custom"

    def __init__(self, sft: Sft, fn):
        super().__init__(sft)
        self._fn = fn

    def log_value(self, word) -> float:
        w = tuple(word)
        if not self.sft.is_admissible(w) or not w:
            raise PotentialError(f"inadmissible word {w}")
        v = self._fn(w)
        if not v > 0:
            raise PotentialError(f"nonpositive potential value {v} at {w}")
        return math.log(v)


@dataclass(frozen=True)
class SubmultReport:
    """Result of an exhaustive submultiplicativity audit."""

    n_max: int
    pairs_checked: int
    worst_ratio: float          # max of phi(IJ) / (phi(I) phi(J))
    worst_pair: tuple[Word, Word] | None
    violations: list[tuple[Word, Word, float]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_submultiplicativity(pot: WordPotential, n_max: int) -> SubmultReport:
    """Check phi(IJ) <= phi(I) phi(J) over all admissible concatenations with
    |I| + |J| <= n_max; ratios above 1 + 1e-10 are reported as violations."""
    sft = pot.sft
    worst = -math.inf
    worst_pair = None
    violations = []
    checked = 0
    for ni in range(1, n_max):
        for I in enumerate_words(sft, ni):
            for nj in range(1, n_max - ni + 1):
                for J in enumerate_words(sft, nj):
                    if sft.T[I[-1], J[0]] != 1:
                        continue
                    checked += 1
                    log_ratio = (pot.log_value(I + J)
                                 - pot.log_value(I) - pot.log_value(J))
                    ratio = math.exp(log_ratio)
                    if ratio > worst:
                        worst, worst_pair = ratio, (I, J)
                    if ratio > 1 + SUBMULT_RTOL:
                        violations.append((I, J, ratio))
    return SubmultReport(n_max=n_max, pairs_checked=checked, worst_ratio=worst,
                         worst_pair=worst_pair, violations=violations)


def distortion_constant(pot: WordPotential, n: int) -> float:
    """Exact bounded-distortion constant at level n.

    For a cocycle-backed potential this is the max over n-words of
    (max / min) of the pointwise value over the word's k-extensions; it is
    identically 1 for locally constant cocycles and for table potentials
    (which are constant on cylinders by construction).
    """
    coc = pot.cocycle
    if coc is None or coc.k == 0:
        return 1.0
    worst = 1.0
    for w in enumerate_words(pot.sft, n):
        vals = pot.pointwise_log_values(w)
        worst = max(worst, math.exp(max(vals) - min(vals)))
    return worst
