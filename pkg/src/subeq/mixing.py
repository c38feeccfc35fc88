"""Ornstein-theory diagnostics on finite cylinder-weight models.

Partitions are labelings of admissible words over a coordinate window, so
every atom is a finite union of cylinders (clopen; the boundary-mass premise
holds with constant 0 and needs no computation). The d-bar distance between
finitely supported label-sequence distributions is solved exactly as a
transportation LP with a dual optimality certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .sft import Sft, Word, enumerate_words
from .thermo import CylinderWeights

MAX_SUPPORT = 4096
MARGINAL_TOL = 1e-10
GAP_TOL = 1e-9
ATOM_DROP = 1e-15


class MixingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Partitions


@dataclass(frozen=True)
class Partition:
    """Labels for the admissible words of the coordinate window [a, b)."""

    sft: Sft
    a: int
    b: int
    labels: dict[Word, object] = field(repr=False)

    def __post_init__(self):
        if self.b <= self.a:
            raise MixingError(f"empty window [{self.a}, {self.b})")
        for w in enumerate_words(self.sft, self.b - self.a):
            if w not in self.labels:
                raise MixingError(f"window word {w} has no label")

    @property
    def width(self) -> int:
        return self.b - self.a

    def label(self, word: Word):
        return self.labels[word]


def coordinate_partition(sft: Sft, a: int = 0, b: int = 1) -> Partition:
    """The partition reading off the window word itself."""
    labels = {w: w if b - a > 1 else w[0]
              for w in enumerate_words(sft, b - a)}
    return Partition(sft, a, b, labels)


# ---------------------------------------------------------------------------
# d-bar distance


@dataclass(frozen=True)
class Coupling:
    pairs: dict[tuple, float] = field(repr=False)
    left: dict = field(repr=False)
    right: dict = field(repr=False)


@dataclass(frozen=True)
class DbarResult:
    value: float
    coupling: Coupling = field(repr=False)
    dual_left: dict = field(repr=False)
    dual_right: dict = field(repr=False)
    dual_value: float
    gap: float
    n: int


def _check_distribution(dist: dict, n: int) -> dict:
    out = {}
    for seq, mass in dist.items():
        seq = tuple(seq)
        if len(seq) != n:
            raise MixingError(f"sequence {seq} has length {len(seq)}, not {n}")
        if mass < 0:
            raise MixingError("negative mass")
        if mass > 0:
            out[seq] = out.get(seq, 0.0) + float(mass)
    total = math.fsum(out.values())
    if abs(total - 1.0) > 1e-9:
        raise MixingError(f"distribution sums to {total}, not 1")
    if len(out) > MAX_SUPPORT:
        raise MixingError(f"support {len(out)} exceeds cap {MAX_SUPPORT}")
    return {k: v / total for k, v in out.items()}


def hamming_cost(x, y) -> float:
    """Normalized Hamming mismatch between equal-length label sequences."""
    n = len(x)
    return sum(xi != yi for xi, yi in zip(x, y)) / n


def dbar(seqL: dict, seqR: dict, n: int) -> DbarResult:
    """Exact d-bar distance between two label-sequence distributions.

    Solves the transportation LP with normalized-Hamming cost and returns the
    optimal coupling plus the dual potentials certifying optimality
    (primal-dual gap <= 1e-9).
    """
    mu = _check_distribution(seqL, n)
    nu = _check_distribution(seqR, n)
    xs = sorted(mu)
    ys = sorted(nu)
    a = np.array([mu[x] for x in xs])
    b = np.array([nu[y] for y in ys])
    C = np.array([[hamming_cost(x, y) for y in ys] for x in xs])
    value, X, u, v = solve_transport(a, b, C)

    rows = X.sum(axis=1)
    cols = X.sum(axis=0)
    if np.abs(rows - a).max() > MARGINAL_TOL or np.abs(cols - b).max() > MARGINAL_TOL:
        raise MixingError("optimal coupling violates its marginals")
    dual_value = float(a @ u + b @ v)
    gap = abs(value - dual_value)
    if gap > GAP_TOL:
        raise MixingError(f"primal-dual gap {gap} exceeds {GAP_TOL}")

    pairs = {(xs[i], ys[j]): float(X[i, j])
             for i in range(len(xs)) for j in range(len(ys)) if X[i, j] > 0}
    return DbarResult(
        value=value,
        coupling=Coupling(pairs=pairs, left=mu, right=nu),
        dual_left=dict(zip(xs, map(float, u))),
        dual_right=dict(zip(ys, map(float, v))),
        dual_value=dual_value,
        gap=gap,
        n=n,
    )


def solve_transport(a: np.ndarray, b: np.ndarray, C: np.ndarray):
    """Exact transportation optimum via the HiGHS dual simplex, returning
    (value, coupling matrix, row potentials, column potentials)."""
    m, n = C.shape
    data, rows, cols = [], [], []
    for i in range(m):
        for j in range(n):
            idx = i * n + j
            rows.append(i)
            cols.append(idx)
            data.append(1.0)
            rows.append(m + j)
            cols.append(idx)
            data.append(1.0)
    A = sparse.csr_matrix((data, (rows, cols)), shape=(m + n, m * n))
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise MixingError(f"transportation solve failed: {res.message}")
    X = res.x.reshape(m, n)
    duals = np.asarray(res.eqlin.marginals)
    return float(res.fun), X, duals[:m], duals[m:]


# ---------------------------------------------------------------------------
# Windowed distributions over a weight model


def _window_distribution(model: CylinderWeights, lo: int, hi: int) -> dict[Word, float]:
    """Masses of window words for coordinates [lo, hi), read off the model by
    shift invariance (the model's own anchor is coordinate 0)."""
    width = hi - lo
    if width > model.level:
        raise MixingError(
            f"window [{lo}, {hi}) needs level {width}, model has {model.level}")
    return model.marginal(width).weights


def _labels_on(part: Partition, word: Word, offset: int):
    """Label of the partition atom read at ``offset`` inside a window word."""
    return part.label(word[offset:offset + part.width])


def join_partitions(model: CylinderWeights, xi: Partition, m1: int, m2: int
                    ) -> dict[tuple, float]:
    """Atoms of the join of sigma^{-i} pullbacks for i = m1..m2, as label
    tuples with exact masses; zero-mass atoms dropped.

    The joined partition depends on coordinates [a - m2, b - m1).
    """
    if m2 < m1:
        raise MixingError(f"need m2 >= m1, got {m1}, {m2}")
    lo, hi = xi.a - m2, xi.b - m1
    atoms: dict[tuple, float] = {}
    for w, v in _window_distribution(model, lo, hi).items():
        if v <= ATOM_DROP:
            continue
        key = tuple(_labels_on(xi, w, m2 - i) for i in range(m1, m2 + 1))
        atoms[key] = atoms.get(key, 0.0) + v
    return atoms


# ---------------------------------------------------------------------------
# K-property scan


@dataclass(frozen=True)
class KScanReport:
    m1: int
    m2: int
    epsilon: float
    atom_count: int
    worst_deviation: float
    failing_atoms: list
    failing_mass: float
    verdict: str
    per_atom: dict = field(repr=False, default_factory=dict)


def k_scan(model: CylinderWeights, xi: Partition, tests, m1: int, m2: int,
           epsilon: float) -> KScanReport:
    """Conditional-measure criterion: for each atom E of the joined past
    partition and each test set A, compare mu(E and A)/mu(E) with mu(A).

    ``tests`` is a list of (Partition, label set) pairs, each describing a
    finite union of partition atoms. PASS iff the atoms violating the
    epsilon bound carry total mass at most epsilon.
    """
    lo_E, hi_E = xi.a - m2, xi.b - m1
    spans = [(lo_E, hi_E)] + [(p.a, p.b) for p, _ in tests]
    lo = min(s for s, _ in spans)
    hi = max(e for _, e in spans)

    dist = _window_distribution(model, lo, hi)
    test_masses = [0.0] * len(tests)
    atom_mass: dict[tuple, float] = {}
    inter: dict[tuple, list[float]] = {}
    for w, v in dist.items():
        if v <= ATOM_DROP:
            continue
        key = tuple(_labels_on(xi, w, (xi.a - i) - lo) for i in range(m1, m2 + 1))
        atom_mass[key] = atom_mass.get(key, 0.0) + v
        hits = inter.setdefault(key, [0.0] * len(tests))
        for t, (part, good) in enumerate(tests):
            if _labels_on(part, w, part.a - lo) in good:
                hits[t] += v
    for t, (part, good) in enumerate(tests):
        test_masses[t] = math.fsum(
            v for w, v in dist.items()
            if v > ATOM_DROP and _labels_on(part, w, part.a - lo) in good)

    per_atom: dict[tuple, float] = {}
    failing = []
    failing_mass = 0.0
    worst = 0.0
    for key, mass in atom_mass.items():
        devs = [abs(inter[key][t] / mass - test_masses[t])
                for t in range(len(tests))]
        dev = max(devs) if devs else 0.0
        per_atom[key] = dev
        worst = max(worst, dev)
        if dev > epsilon:
            failing.append(key)
            failing_mass += mass
    verdict = "PASS" if failing_mass <= epsilon else "FAIL"
    return KScanReport(m1=m1, m2=m2, epsilon=epsilon,
                       atom_count=len(atom_mass), worst_deviation=worst,
                       failing_atoms=failing, failing_mass=failing_mass,
                       verdict=verdict, per_atom=per_atom)


# ---------------------------------------------------------------------------
# Very Weak Bernoulli scan


@dataclass(frozen=True)
class VwbScanReport:
    n: int
    m1: int
    m2: int
    epsilon: float
    atom_count: int
    worst_dbar: float
    failing_atoms: list
    failing_mass: float
    verdict: str
    per_atom: dict = field(repr=False, default_factory=dict)


def vwb_scan(model: CylinderWeights, xi: Partition, n: int, m1: int, m2: int,
             epsilon: float) -> VwbScanReport:
    """Per-atom d-bar between conditional and unconditional future label
    sequences, conditioning on atoms of the joined past partition.

    The verdict is the epsilon-almost-everywhere reading: PASS iff the atoms
    with d-bar above epsilon carry total mass at most epsilon. A PASS
    certifies behavior at this finite depth only.
    """
    if n < 1:
        raise MixingError(f"need n >= 1, got {n}")
    lo, hi = xi.a - m2, xi.b + n
    dist = _window_distribution(model, lo, hi)

    joint: dict[tuple, dict[tuple, float]] = {}
    future: dict[tuple, float] = {}
    atom_mass: dict[tuple, float] = {}
    for w, v in dist.items():
        if v <= ATOM_DROP:
            continue
        past = tuple(_labels_on(xi, w, (xi.a - i) - lo) for i in range(m1, m2 + 1))
        fut = tuple(_labels_on(xi, w, (xi.a + i) - lo) for i in range(1, n + 1))
        joint.setdefault(past, {})
        joint[past][fut] = joint[past].get(fut, 0.0) + v
        future[fut] = future.get(fut, 0.0) + v
        atom_mass[past] = atom_mass.get(past, 0.0) + v

    total = math.fsum(future.values())
    uncond = {k: v / total for k, v in future.items()}

    per_atom: dict[tuple, float] = {}
    failing = []
    failing_mass = 0.0
    worst = 0.0
    for past, cond in joint.items():
        mass = atom_mass[past]
        cdist = {k: v / mass for k, v in cond.items()}
        d = dbar(cdist, uncond, n).value
        per_atom[past] = d
        worst = max(worst, d)
        if d > epsilon:
            failing.append(past)
            failing_mass += mass
    verdict = "PASS" if failing_mass <= epsilon else "FAIL"
    return VwbScanReport(n=n, m1=m1, m2=m2, epsilon=epsilon,
                         atom_count=len(atom_mass), worst_dbar=worst,
                         failing_atoms=failing, failing_mass=failing_mass,
                         verdict=verdict, per_atom=per_atom)


# ---------------------------------------------------------------------------
# Large-intersection filter


@dataclass(frozen=True)
class EpsAeReport:
    bad_atoms: list[int]
    bad_mass: float
    bound: float            # epsilon / delta
    epsilon: float
    delta: float
    violated: bool          # never expected; asserted by callers


def eps_ae_filter(atom_masses, intersection_masses, delta: float,
                  epsilon: float) -> EpsAeReport:
    """Atoms A_i with mu(A_i and B) < (1 - delta) mu(A_i), for mu(B) = 1 - eps.

    Their union has mass at most eps/delta; the report carries the certified
    bound and flags the (impossible) case of the bound failing.
    """
    a = [float(x) for x in atom_masses]
    inter = [float(x) for x in intersection_masses]
    if len(a) != len(inter):
        raise MixingError("atom and intersection lists differ in length")
    if not 0 < delta <= 1:
        raise MixingError(f"delta={delta} outside (0, 1]")
    for ai, bi in zip(a, inter):
        if bi > ai + 1e-12:
            raise MixingError("intersection mass exceeds atom mass")
    bad = [i for i, (ai, bi) in enumerate(zip(a, inter))
           if bi < (1 - delta) * ai]
    bad_mass = math.fsum(a[i] for i in bad)
    bound = epsilon / delta
    return EpsAeReport(bad_atoms=bad, bad_mass=bad_mass, bound=bound,
                       epsilon=epsilon, delta=delta,
                       violated=bad_mass > bound + 1e-12)
