"""Pressure estimation, Gibbs cylinder weights, quasi-multiplicativity
certificates, and the local-product-structure ratio check.

Partition sums are accumulated in log-sum-exp form throughout: Z_n overflows
double range near n ~ 300 for growing potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .cocycle import cyclic_product, log_phi_s
from .potential import SingularValuePotential, WordPotential
from .sft import Sft, SftError, Word, enumerate_words, periodic_words

WEIGHT_SUM_TOL = 1e-12


class ThermoError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Cylinder weights


@dataclass(frozen=True)
class CylinderWeights:
    """Probability weights on the admissible words of one level.

    ``provenance`` is one of gibbs / bernoulli / markov / parry / custom.
    """

    sft: Sft
    level: int
    weights: dict[Word, float] = field(repr=False)
    provenance: str = "custom"

    def __post_init__(self):
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ThermoError(f"weights sum to {total}, not 1")
        if any(v < 0 for v in self.weights.values()):
            raise ThermoError("negative weight")
        for w in self.weights:
            if len(w) != self.level or not self.sft.is_admissible(w):
                raise ThermoError(f"bad word {w} at level {self.level}")

    def mass(self, word) -> float:
        return self.weights.get(tuple(word), 0.0)

    def marginal(self, level: int) -> "CylinderWeights":
        """Marginalize onto the first ``level`` coordinates."""
        if level > self.level:
            raise ThermoError(f"cannot refine level {self.level} to {level}")
        if level == self.level:
            return self
        out: dict[Word, float] = {}
        for w, v in self.weights.items():
            key = w[:level]
            out[key] = out.get(key, 0.0) + v
        total = math.fsum(out.values())
        out = {w: v / total for w, v in out.items()}
        return CylinderWeights(self.sft, level, out, self.provenance)

    def refinement_defect(self, finer: "CylinderWeights") -> float:
        """max over level-n words I of |w(I) - sum_j w'(Ij)|."""
        if finer.level != self.level + 1:
            raise ThermoError("refinement defect needs level n+1 weights")
        agg: dict[Word, float] = {}
        for w, v in finer.weights.items():
            agg[w[:-1]] = agg.get(w[:-1], 0.0) + v
        keys = set(agg) | set(self.weights)
        return max(abs(self.weights.get(k, 0.0) - agg.get(k, 0.0)) for k in keys)

    def shift_defect(self, finer: "CylinderWeights") -> float:
        """max over level-n words I of |w(I) - sum_i w'(iI)|."""
        if finer.level != self.level + 1:
            raise ThermoError("shift defect needs level n+1 weights")
        agg: dict[Word, float] = {}
        for w, v in finer.weights.items():
            agg[w[1:]] = agg.get(w[1:], 0.0) + v
        keys = set(agg) | set(self.weights)
        return max(abs(self.weights.get(k, 0.0) - agg.get(k, 0.0)) for k in keys)


def bernoulli_weights(sft: Sft, probs, level: int) -> CylinderWeights:
    """Product weights for a full shift; rejects SFTs with forbidden words."""
    p = np.asarray(probs, dtype=float)
    if not sft.T.all():
        raise ThermoError("Bernoulli weights require the full shift")
    if p.shape != (sft.q,) or abs(p.sum() - 1) > 1e-12 or (p < 0).any():
        raise ThermoError("probs must be a probability vector over the alphabet")
    out = {w: float(np.prod(p[list(w)])) for w in enumerate_words(sft, level)}
    total = math.fsum(out.values())
    out = {w: v / total for w, v in out.items()}
    return CylinderWeights(sft, level, out, "bernoulli")


def markov_weights(sft: Sft, P, level: int, pi=None) -> CylinderWeights:
    """Stationary Markov weights: w(i_0...i_{n-1}) = pi_{i_0} prod P steps.

    ``P`` must be row-stochastic and supported on the adjacency matrix;
    ``pi`` defaults to the stationary distribution of P.
    """
    P = np.asarray(P, dtype=float)
    if P.shape != (sft.q, sft.q):
        raise ThermoError("transition matrix shape mismatch")
    if np.any((P > 0) & (sft.T == 0)):
        raise ThermoError("transition matrix supported off the adjacency matrix")
    if not np.allclose(P.sum(axis=1), 1.0, atol=1e-10):
        raise ThermoError("transition matrix is not row-stochastic")
    if pi is None:
        vals, vecs = np.linalg.eig(P.T)
        i = int(np.argmin(np.abs(vals - 1)))
        pi = np.real(vecs[:, i])
        pi = pi / pi.sum()
    pi = np.asarray(pi, dtype=float)
    out: dict[Word, float] = {}
    for w in enumerate_words(sft, level):
        v = pi[w[0]]
        for j in range(len(w) - 1):
            v *= P[w[j], w[j + 1]]
        if v > 0:
            out[w] = float(v)
    total = math.fsum(out.values())
    out = {w: v / total for w, v in out.items()}
    return CylinderWeights(sft, level, out, "markov")


def parry_weights(sft: Sft, level: int) -> CylinderWeights:
    """The measure of maximal entropy, from Perron eigendata of T."""
    T = sft.T.astype(float)
    lam, v = _perron(T)
    _, u = _perron(T.T)
    P = T * v[None, :] / (lam * v[:, None])
    pi = u * v
    pi = pi / pi.sum()
    cw = markov_weights(sft, P, level, pi=pi)
    return CylinderWeights(sft, level, cw.weights, "parry")


def _perron(M: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(M)
    i = int(np.argmax(np.real(vals)))
    lam = float(np.real(vals[i]))
    v = np.real(vecs[:, i])
    if v.sum() < 0:
        v = -v
    return lam, np.abs(v)


def custom_weights(sft: Sft, table: dict, level: int) -> CylinderWeights:
    out = {tuple(w): float(v) for w, v in table.items() if v != 0}
    return CylinderWeights(sft, level, out, "custom")


# ---------------------------------------------------------------------------
# Pressure


@dataclass(frozen=True)
class PressureReport:
    """Partition-sum pressure estimates with rigorous two-sided bounds.

    ``upper_bound`` = min_n (1/n) log Z_n is rigorous because log Z is
    subadditive on an SFT for submultiplicative word potentials; the lower
    bound comes from periodic-orbit growth rates. The Aitken extrapolation is
    reported separately and never enters verdicts.
    """

    n_values: list[int]
    log_partition_sums: list[float]
    estimates: list[float]                 # P_n = log(Z_n) / n
    upper_bound: float
    lower_bound: float | None
    extrapolated: float | None
    periodic_orbit_data: dict[int, float] = field(default_factory=dict)


def _periodic_lower_bound(pot: WordPotential, p_max: int):
    """max over periods p <= p_max of the exact orbit growth rate.

    For a cocycle-backed potential the rate along a period-p orbit is read
    off the eigenvalue moduli of the one-period cyclic product: the limit of
    (1/(mp)) log phi^s of its m-th power. Only available when a cocycle backs
    the potential.
    """
    coc = pot.cocycle
    if coc is None:
        return None, {}
    s = pot.s if isinstance(pot, SingularValuePotential) else 1.0
    per_period: dict[int, float] = {}
    best = -math.inf
    for p in range(1, p_max + 1):
        rates = []
        for w in periodic_words(pot.sft, p):
            M = cyclic_product(coc, w)
            moduli = np.sort(np.abs(np.linalg.eigvals(M)))[::-1]
            d = coc.d
            if s > d:
                rate = (s / d) * float(np.log(moduli).sum())
            else:
                m = math.floor(s)
                rate = float(np.log(moduli[:m]).sum())
                if s > m:
                    rate += (s - m) * math.log(moduli[m])
            rates.append(rate / p)
        if rates:
            per_period[p] = max(rates)
            best = max(best, per_period[p])
    return (best if best > -math.inf else None), per_period


def _aitken(seq: list[float]) -> float | None:
    """Last Aitken delta-squared accelerant; falls back to the final term
    when second differences vanish (already-converged sequences)."""
    if not seq:
        return None
    out = seq[-1]
    for i in range(len(seq) - 2):
        x0, x1, x2 = seq[i], seq[i + 1], seq[i + 2]
        denom = x2 - 2 * x1 + x0
        if abs(denom) > 1e-13 * max(abs(x0), abs(x1), abs(x2), 1.0):
            out = x2 - (x2 - x1) ** 2 / denom
    return out


def pressure_estimate(pot: WordPotential, n_max: int,
                      p_max: int | None = None) -> PressureReport:
    """Partition sums Z_n = sum over L(n) of phi(I), for n = 1..n_max."""
    if n_max < 2:
        raise ThermoError(f"n_max={n_max} must be >= 2")
    sft = pot.sft
    log_Z: list[float] = []
    P_n: list[float] = []
    for n in range(1, n_max + 1):
        logs = [pot.log_value(w) for w in enumerate_words(sft, n)]
        lz = float(logsumexp(logs))
        log_Z.append(lz)
        P_n.append(lz / n)
    upper = min(P_n)
    if p_max is None:
        p_max = min(n_max, 6)
    lower, per_period = _periodic_lower_bound(pot, p_max)
    # Extrapolate from the increments of log Z, which converge geometrically
    # to the pressure; P_n itself only converges like 1/n.
    increments = [log_Z[i + 1] - log_Z[i] for i in range(len(log_Z) - 1)]
    return PressureReport(
        n_values=list(range(1, n_max + 1)),
        log_partition_sums=log_Z,
        estimates=P_n,
        upper_bound=upper,
        lower_bound=lower,
        extrapolated=_aitken(increments) if increments else _aitken(P_n),
        periodic_orbit_data=per_period,
    )


# ---------------------------------------------------------------------------
# Gibbs weights


@dataclass(frozen=True)
class GibbsReport:
    weights: CylinderWeights
    pressure: float
    gibbs_constant: float          # max(Z~, 1/Z~) for Z~ = sum e^{-nP} phi(I)
    refinement_defect: float | None = None
    shift_defect: float | None = None


def gibbs_weights(pot: WordPotential, n: int, P: float,
                  with_defects: bool = False) -> GibbsReport:
    """Gibbs approximation w(I) proportional to e^{-nP} phi(I).

    The empirical Gibbs constant compares the normalized weights against the
    unnormalized targets e^{-nP} phi(I); it is exactly 1 whenever phi is
    multiplicative and P is the exact pressure.
    """
    if not math.isfinite(P):
        raise ThermoError(f"pressure value {P} is not finite")
    cw = _gibbs_level(pot, n, P)
    logs = [pot.log_value(w) - n * P for w in cw.weights]
    log_norm = float(logsumexp(logs))
    c_hat = math.exp(abs(log_norm))
    ref = shf = None
    if with_defects:
        finer = _gibbs_level(pot, n + 1, P)
        ref = cw.refinement_defect(finer)
        shf = cw.shift_defect(finer)
    return GibbsReport(weights=cw, pressure=P, gibbs_constant=c_hat,
                       refinement_defect=ref, shift_defect=shf)


def _gibbs_level(pot: WordPotential, n: int, P: float) -> CylinderWeights:
    words = enumerate_words(pot.sft, n)
    logs = np.array([pot.log_value(w) for w in words]) - n * P
    logs -= logsumexp(logs)
    w = np.exp(logs)
    w /= math.fsum(w)
    return CylinderWeights(pot.sft, n, dict(zip(words, map(float, w))), "gibbs")


# ---------------------------------------------------------------------------
# Quasi-multiplicativity


@dataclass(frozen=True)
class QmCertificate:
    """Certificate phi(I K J) >= c phi(I) phi(J) with |K| <= k, audited over
    all ordered pairs of n-words."""

    n: int
    k: int
    c: float
    worst_pair: tuple[Word, Word]
    worst_connector: Word
    failures: list[tuple[Word, Word]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.c > 1e-12


def qm_search(pot: WordPotential, n: int, k_max: int) -> QmCertificate:
    """For every ordered pair of n-words, maximize phi(IKJ)/(phi(I)phi(J))
    over connectors K with |K| <= k_max (shortest maximizing K kept)."""
    sft = pot.sft
    words = enumerate_words(sft, n)
    connectors: list[Word] = [()]
    for L in range(1, k_max + 1):
        connectors.extend(enumerate_words(sft, L))

    c = math.inf
    worst_pair = None
    worst_conn: Word = ()
    k_used = 0
    failures: list[tuple[Word, Word]] = []
    for I in words:
        lI = pot.log_value(I)
        for J in words:
            lJ = pot.log_value(J)
            best = -math.inf
            best_K: Word | None = None
            for K in connectors:
                mid = I + K + J
                if not sft.is_admissible(mid):
                    continue
                r = pot.log_value(mid) - lI - lJ
                # connectors come in length order, so ties keep the shortest
                if best_K is None or r > best + 1e-12:
                    best, best_K = r, K
            if best_K is None:
                failures.append((I, J))
                continue
            k_used = max(k_used, len(best_K))
            ratio = math.exp(best)
            if ratio < c:
                c, worst_pair, worst_conn = ratio, (I, J), best_K
    if worst_pair is None:
        raise ThermoError("no connectable pair found")
    return QmCertificate(n=n, k=k_used, c=c, worst_pair=worst_pair,
                         worst_connector=worst_conn, failures=failures)


# ---------------------------------------------------------------------------
# Local product structure


@dataclass(frozen=True)
class LpsReport:
    """Ratios w2(JI) / (w-(J) w+(I)) over all admissible half-word pairs.

    ``ratios`` maps (J, I) with J the past (left) half. The transposed table
    swaps the roles of the two marginals, covering the other coordinate
    anchoring of the past measure.
    """

    n: int
    max_ratio: float
    min_ratio: float
    worst_pair: tuple[Word, Word]
    transposed_max: float
    transposed_min: float
    bound: float | None
    verdict: str
    ratios: dict[tuple[Word, Word], float] = field(repr=False, default_factory=dict)


def lps_check(weights2: CylinderWeights,
              weights_plus: CylinderWeights | None = None,
              weights_minus: CylinderWeights | None = None,
              gibbs_constant: float | None = None,
              slack: float = 1e-9) -> LpsReport:
    """Compare level-2n masses against the product of half-level marginals.

    The future marginal w+ lives on second halves (sum over pasts), the past
    marginal w- on first halves (sum over futures); both are computed from
    ``weights2`` when not supplied. PASS requires max ratio <= C^2 (1+slack)
    with C the supplied Gibbs constant; without a constant the verdict only
    reports the band.
    """
    if weights2.level % 2 != 0:
        raise ThermoError("lps_check needs an even-level weight family")
    n = weights2.level // 2
    sft = weights2.sft

    minus: dict[Word, float] = {}
    plus: dict[Word, float] = {}
    for w, v in weights2.weights.items():
        minus[w[:n]] = minus.get(w[:n], 0.0) + v
        plus[w[n:]] = plus.get(w[n:], 0.0) + v
    if weights_minus is not None:
        minus = weights_minus.weights
    if weights_plus is not None:
        plus = weights_plus.weights

    ratios: dict[tuple[Word, Word], float] = {}
    t_ratios: list[float] = []
    for w, v in weights2.weights.items():
        if v == 0:
            continue
        J, I = w[:n], w[n:]
        if J not in minus or minus[J] == 0 or I not in plus or plus[I] == 0:
            raise ThermoError(f"zero marginal under concatenation {w}")
        ratios[(J, I)] = v / (minus[J] * plus[I])
        # same masses read with the marginal roles swapped
        if plus.get(J, 0.0) > 0 and minus.get(I, 0.0) > 0:
            t_ratios.append(v / (plus[J] * minus[I]))

    if not ratios:
        raise ThermoError("no positive-mass concatenations")
    if not t_ratios:
        t_ratios = list(ratios.values())
    max_r = max(ratios.values())
    min_r = min(ratios.values())
    worst = max(ratios, key=lambda p: ratios[p])
    bound = None
    verdict = "REPORT-ONLY"
    if gibbs_constant is not None:
        bound = gibbs_constant**2 * (1 + slack)
        verdict = "PASS" if max_r <= bound else "FAIL"
    return LpsReport(n=n, max_ratio=max_r, min_ratio=min_r, worst_pair=worst,
                     transposed_max=max(t_ratios), transposed_min=min(t_ratios),
                     bound=bound, verdict=verdict, ratios=ratios)
