"""Bunching certificates, holonomies, typicality, irreducibility, Lyapunov
spectrum estimates.

Points of the shift space never materialize as infinite sequences: they are
described by :class:`PointSpec`, a periodic background plus a finite core
word, which is enough to evaluate arbitrarily long cocycle products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .cocycle import (CocycleError, FiniteRangeCocycle, cyclic_product,
                      exterior_power, operator_norm, singular_values,
                      word_product)
from .sft import Sft, Word
from .thermo import CylinderWeights

EIG_GAP_TOL = 1e-8
GENERAL_POSITION_TOL = 1e-9


class BunchingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Point specifications


@dataclass(frozen=True)
class PointSpec:
    """Eventually-periodic point: background cycle plus a finite core word.

    ``symbol(i)`` is ``core[i - core_start]`` inside the core and
    ``cycle[(i + phase) mod len(cycle)]`` outside it.
    """

    sft: Sft
    cycle: Word
    core: Word = ()
    core_start: int = 0
    phase: int = 0

    def __post_init__(self):
        p = len(self.cycle)
        if p < 1:
            raise BunchingError("empty background cycle")
        if not self.sft.is_admissible(self.cycle) or \
                self.sft.T[self.cycle[-1], self.cycle[0]] != 1:
            raise BunchingError(f"cycle {self.cycle} not cyclically admissible")
        lo = self.core_start - 1
        hi = self.core_start + len(self.core) + 1
        for i in range(lo, hi):
            if self.sft.T[self.symbol(i), self.symbol(i + 1)] != 1:
                raise BunchingError(
                    f"inadmissible transition at coordinate {i}")

    def symbol(self, i: int) -> int:
        off = i - self.core_start
        if 0 <= off < len(self.core):
            return self.core[off]
        p = len(self.cycle)
        return self.cycle[(i + self.phase) % p]

    def word(self, start: int, stop: int) -> Word:
        return tuple(self.symbol(i) for i in range(start, stop))

    def shift(self, m: int) -> "PointSpec":
        """The spec of sigma^m applied to this point."""
        return PointSpec(self.sft, self.cycle, self.core,
                         self.core_start - m, self.phase + m)

    @staticmethod
    def periodic(sft: Sft, cycle) -> "PointSpec":
        return PointSpec(sft, tuple(cycle))

    @staticmethod
    def homoclinic(sft: Sft, cycle, bridge) -> "PointSpec":
        """Past and future follow the periodic point's own phase, with the
        bridge occupying coordinates 1..|bridge|; this puts the point in both
        the stable and unstable set of the periodic point."""
        return PointSpec(sft, tuple(cycle), tuple(bridge), core_start=1)

    @staticmethod
    def homoclinic_past(sft: Sft, cycle, bridge) -> "PointSpec":
        """Same, but with the bridge in coordinates -|bridge|..-1, so the
        point agrees with the periodic point on all i >= 0."""
        b = tuple(bridge)
        return PointSpec(sft, tuple(cycle), b, core_start=-len(b))


def _agree_on_ray(x: PointSpec, y: PointSpec, forward: bool) -> bool:
    """Whether the specs agree on all i >= 0 (forward) or i <= 0."""
    p = len(x.cycle) * len(y.cycle)
    lo = min(x.core_start, y.core_start, 0)
    hi = max(x.core_start + len(x.core), y.core_start + len(y.core), 0)
    if forward:
        rng = range(0, hi + p + 1)
    else:
        rng = range(lo - p - 1, 1)
    return all(x.symbol(i) == y.symbol(i) for i in rng)


# ---------------------------------------------------------------------------
# Bunching margins


@dataclass(frozen=True)
class BunchingReport:
    mode: str
    worst_product: float      # max over generators of ||A|| * ||A^{-1}||
    worst_window: Word
    threshold: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.margin > 0


def bunching_margin(coc: FiniteRangeCocycle, mode: str = "fiber") -> BunchingReport:
    """Fiber bunching requires ||A|| ||A^{-1}|| < 2^alpha on every generator;
    strong bunching tightens to 2^{alpha/3} when d >= 3."""
    if mode not in ("fiber", "strong"):
        raise BunchingError(f"unknown bunching mode {mode!r}")
    worst = -math.inf
    worst_w: Word = ()
    for w, A in coc.table.items():
        sv = singular_values(A)
        prod = float(sv[0] / sv[-1])
        if prod > worst:
            worst, worst_w = prod, w
    if mode == "strong" and coc.d >= 3:
        threshold = 2 ** (coc.alpha / 3)
    else:
        threshold = 2 ** coc.alpha
    return BunchingReport(mode=mode, worst_product=worst, worst_window=worst_w,
                          threshold=threshold, margin=threshold - worst)


# ---------------------------------------------------------------------------
# Holonomies


@dataclass(frozen=True)
class HolonomyApprox:
    """Approximants h_n of a canonical holonomy along a stable or unstable
    pair, with increment norms and a fitted geometric decay ratio.

    Finite-range cocycles stabilize exactly after finitely many steps, so the
    increments typically hit zero; the fitted ratio is then 0.
    """

    side: str
    n_max: int
    estimate: np.ndarray
    increments: list[float]
    fitted_ratio: float
    fit_residual: float
    error_estimate: float
    approximants: list[np.ndarray] = field(repr=False, default_factory=list)


def _forward_product(coc: FiniteRangeCocycle, spec: PointSpec, n: int,
                     start: int = 0) -> np.ndarray:
    out = np.eye(coc.d)
    for j in range(start, start + n):
        out = coc.generator(spec.word(j, j + coc.k + 1)) @ out
    return out


def _fit_ratio(increments: list[float]) -> tuple[float, float]:
    floor = 64 * np.finfo(float).eps * max(increments, default=0.0)
    floor = max(floor, 1e-15)
    pts = [(i, v) for i, v in enumerate(increments) if v > floor]
    if len(pts) < 2:
        return 0.0, 0.0
    xs = np.array([i for i, _ in pts], dtype=float)
    ys = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return float(np.exp(slope)), resid


def holonomy(coc: FiniteRangeCocycle, x_spec: PointSpec, y_spec: PointSpec,
             side: str = "stable", n_max: int = 40) -> HolonomyApprox:
    """Approximant sequence for the canonical holonomy H_{x,y}.

    Stable: h_n = A^n(y)^{-1} A^n(x), for y agreeing with x on i >= 0.
    Unstable: the sigma^{-1} analog, for agreement on i <= 0.
    """
    if side not in ("stable", "unstable"):
        raise BunchingError(f"unknown holonomy side {side!r}")
    # Locally constant cocycles have trivial holonomies with or without
    # bunching, so the bunching gate only applies to k >= 1.
    if coc.k > 0 and not bunching_margin(coc, "fiber").ok:
        raise BunchingError("cocycle is not fiber-bunched")
    if not _agree_on_ray(x_spec, y_spec, forward=(side == "stable")):
        raise BunchingError(
            f"specs are not in the required {side} relation")

    # With forward-looking windows the products share all factors beyond a
    # finite horizon, which cancel telescopically: h_n is exactly constant
    # once n reaches the horizon. Computing the long products directly would
    # only amplify round-off, so the stabilized value is reused verbatim.
    horizon = 0 if side == "stable" else max(coc.k - 1, 0)

    def _approximant(n: int) -> np.ndarray:
        if side == "stable":
            return np.linalg.solve(_forward_product(coc, y_spec, n),
                                   _forward_product(coc, x_spec, n))
        return _forward_product(coc, y_spec, n, start=-n) @ \
            np.linalg.inv(_forward_product(coc, x_spec, n, start=-n))

    stabilized = np.eye(coc.d) if horizon == 0 else _approximant(horizon)
    approx: list[np.ndarray] = []
    for n in range(1, n_max + 1):
        approx.append(_approximant(n) if n < horizon else stabilized)
    increments = [operator_norm(approx[i + 1] - approx[i])
                  for i in range(len(approx) - 1)]
    ratio, resid = _fit_ratio(increments)
    if ratio >= 1:
        raise BunchingError(
            f"holonomy increments diverge (fitted ratio {ratio:.4f})")
    last = increments[-1] if increments else 0.0
    err = last / (1 - ratio)
    return HolonomyApprox(side=side, n_max=n_max, estimate=approx[-1],
                          increments=increments, fitted_ratio=ratio,
                          fit_residual=resid, error_estimate=err,
                          approximants=approx)


def global_stable_holonomy(coc: FiniteRangeCocycle, x_spec: PointSpec,
                           y_spec: PointSpec, n_max: int = 40) -> np.ndarray:
    """H^s_{x,y} for y in the global stable set of x: push both points
    forward until they agree on i >= 0, take the local holonomy there, and
    pull back through the equivariance relation."""
    m = 0
    while m < 10_000 and not _agree_on_ray(x_spec.shift(m), y_spec.shift(m),
                                           forward=True):
        m += 1
    if m == 10_000:
        raise BunchingError("specs are not in the same global stable set")
    h_loc = holonomy(coc, x_spec.shift(m), y_spec.shift(m), "stable",
                     n_max).estimate
    Ax = _forward_product(coc, x_spec, m)
    Ay = _forward_product(coc, y_spec, m)
    return np.linalg.solve(Ay, h_loc @ Ax)


# ---------------------------------------------------------------------------
# Typicality


@dataclass(frozen=True)
class LevelTypicality:
    dimension: int
    eigenvalues: np.ndarray
    moduli_gap: float               # smallest relative gap between moduli
    eigenvector_condition: float
    pinching: bool
    general_position_margin: float | None
    twisting: bool


@dataclass(frozen=True)
class TypicalityReport:
    periodic_word: Word
    bridge: Word
    return_matrix: np.ndarray = field(repr=False)
    loop: np.ndarray = field(repr=False)      # psi = H^s_{z,p} H^u_{p,z}
    per_level: dict[int, LevelTypicality] = field(default_factory=dict)

    @property
    def typical(self) -> bool:
        return all(lt.pinching and lt.twisting for lt in self.per_level.values())


def _pinching(P: np.ndarray):
    vals, vecs = np.linalg.eig(P)
    order = np.argsort(-np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    moduli = np.abs(vals)
    scale = moduli[0]
    gap = min((moduli[i] - moduli[i + 1]) / scale for i in range(len(vals) - 1)) \
        if len(vals) > 1 else math.inf
    cond = float(np.linalg.cond(vecs))
    pinched = gap >= EIG_GAP_TOL and np.abs(vals.imag).max() <= EIG_GAP_TOL * scale
    return vals, vecs, gap, cond, pinched


def _general_position_margin(psi: np.ndarray, vecs: np.ndarray) -> float:
    """min over index sets I, J with |I| + |J| <= d of the smallest singular
    value of the column-normalized matrix [psi V_I | V_J]."""
    d = psi.shape[0]
    V = np.real(vecs)
    V = V / np.linalg.norm(V, axis=0)
    W = psi @ V
    W = W / np.linalg.norm(W, axis=0)
    margin = math.inf
    for a in range(1, d):
        for b in range(1, d - a + 1):
            for I in combinations(range(d), a):
                for J in combinations(range(d), b):
                    M = np.hstack([W[:, list(I)], V[:, list(J)]])
                    sv = np.linalg.svd(M, compute_uv=False)
                    margin = min(margin, float(sv[-1]))
    return margin


def typicality_report(coc: FiniteRangeCocycle, p_word, bridge,
                      n_max: int = 40) -> TypicalityReport:
    """Pinching and twisting verdicts for every exterior power 1 <= t <= d-1.

    The homoclinic point is the periodic point with ``bridge`` spliced into
    coordinates 1..|bridge|; its future keeps the periodic point's own phase.
    """
    p_word = tuple(p_word)
    bridge = tuple(bridge)
    sft = coc.sft
    p_spec = PointSpec.periodic(sft, p_word)
    z_spec = PointSpec.homoclinic(sft, p_word, bridge)
    if coc.k > 0 and not bunching_margin(coc, "fiber").ok:
        raise BunchingError("cocycle is not fiber-bunched")

    per_level: dict[int, LevelTypicality] = {}
    P0 = cyclic_product(coc, p_word)
    loop0 = None
    for t in range(1, max(coc.d, 2)) if coc.d > 1 else (1,):
        ct = coc if t == 1 else exterior_power(coc, t)
        P = cyclic_product(ct, p_word)
        vals, vecs, gap, cond, pinched = _pinching(P)
        hs = global_stable_holonomy(ct, z_spec, p_spec, n_max)
        hu = holonomy(ct, p_spec, z_spec, "unstable", n_max).estimate
        psi = hs @ hu
        if t == 1:
            loop0 = psi
        margin = None
        twist = False
        if np.abs(vals.imag).max() <= EIG_GAP_TOL * np.abs(vals).max():
            margin = _general_position_margin(psi, vecs)
            twist = margin > GENERAL_POSITION_TOL
        per_level[t] = LevelTypicality(
            dimension=ct.d, eigenvalues=vals, moduli_gap=gap,
            eigenvector_condition=cond, pinching=pinched,
            general_position_margin=margin, twisting=twist)
    return TypicalityReport(periodic_word=p_word, bridge=bridge,
                            return_matrix=P0, loop=loop0, per_level=per_level)


# ---------------------------------------------------------------------------
# Burnside irreducibility


@dataclass(frozen=True)
class IrreducibilityReport:
    dimension: int
    algebra_dimension: int
    irreducible: bool
    note: str


def burnside_irreducibility(mats) -> IrreducibilityReport:
    """Span growth of the generated matrix algebra.

    The algebra generated by the family has real dimension d^2 iff the family
    is irreducible over C (Burnside); a reducible-over-C verdict leaves real
    reducibility to inspection (a lone rotation is C-reducible but
    R-irreducible).
    """
    gens = [np.asarray(M, dtype=float) for M in mats]
    if not gens:
        raise BunchingError("empty generator list")
    d = gens[0].shape[0]
    for M in gens:
        if M.shape != (d, d):
            raise BunchingError("generator dimension mismatch")

    basis: list[np.ndarray] = []   # orthonormal, as flat vectors

    def add(M: np.ndarray) -> bool:
        v = M.ravel().astype(float)
        for b in basis:
            v = v - (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-10 * max(1.0, np.linalg.norm(M)):
            basis.append(v / nv)
            return True
        return False

    add(np.eye(d))
    frontier = [np.eye(d)]
    for M in gens:
        if add(M):
            frontier.append(M)
    while frontier and len(basis) < d * d:
        new_frontier = []
        for B in frontier:
            for G in gens:
                for M in (G @ B, B @ G):
                    if add(M):
                        new_frontier.append(M)
        frontier = new_frontier
    dim = len(basis)
    if dim == d * d:
        note = "irreducible over C (hence over R)"
    else:
        note = "reducible over C -- real reducibility requires inspection"
    return IrreducibilityReport(dimension=d, algebra_dimension=dim,
                                irreducible=dim == d * d, note=note)


# ---------------------------------------------------------------------------
# Lyapunov spectrum


@dataclass(frozen=True)
class LyapunovEstimate:
    n: int
    exponents: np.ndarray           # decreasing
    log_det_average: float          # (1/n) E[log |det|], equals sum(exponents)


def lyapunov_spectrum(coc: FiniteRangeCocycle, weights: CylinderWeights,
                      n: int) -> LyapunovEstimate:
    """Exact weighted averages (1/n) E[log sigma_i] over the word level."""
    need = n + coc.k
    if weights.level < need:
        raise BunchingError(
            f"weight level {weights.level} below required {need}")
    marg = weights.marginal(need)
    acc = np.zeros(coc.d)
    det_acc = 0.0
    for w, v in marg.weights.items():
        if v == 0:
            continue
        M = word_product(coc, w)
        sv = singular_values(M)
        acc += v * np.log(sv)
        det_acc += v * np.linalg.slogdet(M)[1]
    return LyapunovEstimate(n=n, exponents=acc / n, log_det_average=det_acc / n)
