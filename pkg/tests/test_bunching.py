"""Point specs, bunching margins, holonomies, typicality, irreducibility,
Lyapunov spectra."""

import math

import numpy as np
import pytest

from helpers import (constant_cocycle, family_reducible_over_C, full2_sft,
                     golden_sft, scalar_cocycle)
from subeq.bunching import (BunchingError, PointSpec, bunching_margin,
                            burnside_irreducibility, global_stable_holonomy,
                            holonomy, lyapunov_spectrum, typicality_report)
from subeq.cocycle import build_cocycle
from subeq.thermo import bernoulli_weights, gibbs_weights, parry_weights
from subeq.potential import make_potential

ROT = lambda t: np.array([[math.cos(t), -math.sin(t)],
                          [math.sin(t), math.cos(t)]])


def _near_identity_cocycle(k=1):
    """Mildly perturbed rotations over the full 2-shift, window radius k."""
    sft = full2_sft()
    rng = np.random.default_rng(5)
    table = {}
    for w in _windows(sft, k):
        table[w] = ROT(0.1 * (1 + sum(w))) @ np.diag([1.05, 0.97]) \
            + 0.01 * rng.normal(size=(2, 2))
    return build_cocycle(sft, 2, k, 1.0, table)


def _windows(sft, k):
    from subeq.sft import enumerate_words
    return enumerate_words(sft, k + 1)


# ---------------------------------------------------------------------------
# Point specifications


def test_point_spec_periodic_symbols():
    spec = PointSpec.periodic(full2_sft(), (0, 1))
    assert [spec.symbol(i) for i in range(-3, 4)] == [1, 0, 1, 0, 1, 0, 1]
    assert spec.word(0, 4) == (0, 1, 0, 1)


def test_point_spec_shift_consistency():
    spec = PointSpec.homoclinic(full2_sft(), (0,), (1, 1))
    shifted = spec.shift(3)
    for i in range(-6, 7):
        assert shifted.symbol(i) == spec.symbol(i + 3)


def test_homoclinic_agreement_rays():
    sft = full2_sft()
    p = PointSpec.periodic(sft, (0,))
    z = PointSpec.homoclinic(sft, (0,), (1,))
    assert z.word(-4, 1) == p.word(-4, 1)       # agree on the past
    assert z.symbol(1) == 1                     # bridge at coordinate 1
    assert z.word(2, 6) == p.word(2, 6)         # rejoins the future
    zp = PointSpec.homoclinic_past(sft, (0,), (1,))
    assert zp.symbol(-1) == 1
    assert zp.word(0, 5) == p.word(0, 5)        # agree on the future


def test_point_spec_rejects_inadmissible():
    sft = golden_sft()
    with pytest.raises(BunchingError):
        PointSpec.periodic(sft, (1,))           # 11 forbidden
    with pytest.raises(BunchingError):
        PointSpec.homoclinic(sft, (0,), (1, 1))


# ---------------------------------------------------------------------------
# Bunching margins


def test_bunching_margin_boundary_case():
    coc = constant_cocycle(full2_sft(), np.diag([2.0, 1.0]), alpha=1.0)
    rep = bunching_margin(coc, "fiber")
    assert rep.worst_product == pytest.approx(2.0)
    assert rep.threshold == 2.0
    assert not rep.ok                            # strict inequality required


def test_bunching_strong_mode_threshold():
    coc = constant_cocycle(full2_sft(), np.diag([1.1, 1.0, 0.95]), alpha=0.9)
    fiber = bunching_margin(coc, "fiber")
    strong = bunching_margin(coc, "strong")
    assert fiber.threshold == pytest.approx(2.0 ** 0.9)
    assert strong.threshold == pytest.approx(2.0 ** 0.3)
    assert strong.margin < fiber.margin
    with pytest.raises(BunchingError):
        bunching_margin(coc, "weak")


# ---------------------------------------------------------------------------
# Holonomies


def test_locally_constant_holonomies_are_identity():
    coc = constant_cocycle(full2_sft(), np.diag([1.2, 0.9]))
    p = PointSpec.periodic(full2_sft(), (0,))
    z = PointSpec.homoclinic(full2_sft(), (0,), (1,))
    zp = PointSpec.homoclinic_past(full2_sft(), (0,), (1,))
    for side, pair in (("stable", (p, zp)), ("unstable", (p, z))):
        rep = holonomy(coc, *pair, side, 20)
        assert np.array_equal(rep.estimate, np.eye(2))
        assert all(v == 0.0 for v in rep.increments)
        assert rep.fitted_ratio == 0.0
        assert rep.error_estimate == 0.0


def test_unstable_holonomy_stabilizes_at_window_horizon():
    coc = _near_identity_cocycle(k=2)
    sft = coc.sft
    p = PointSpec.periodic(sft, (0,))
    z = PointSpec.homoclinic(sft, (0,), (1,))
    rep = holonomy(coc, p, z, "unstable", 12)
    # the products differ only in the window starting at coordinate -1
    Ay = coc.generator(z.word(-1, 2))
    Ax = coc.generator(p.word(-1, 2))
    assert np.allclose(rep.estimate, Ay @ np.linalg.inv(Ax), atol=1e-12)
    # increments vanish beyond the horizon k - 1 = 1
    assert all(v == 0.0 for v in rep.increments[1:])


def test_holonomy_requires_the_right_relation():
    coc = constant_cocycle(full2_sft(), np.eye(2))
    p = PointSpec.periodic(full2_sft(), (0,))
    z = PointSpec.homoclinic(full2_sft(), (0,), (1,))
    with pytest.raises(BunchingError, match="relation"):
        holonomy(coc, p, z, "stable")           # z differs from p at i = 1
    with pytest.raises(BunchingError, match="side"):
        holonomy(coc, p, z, "diagonal")


def test_holonomy_bunching_gate():
    coc = build_cocycle(full2_sft(), 2, 1, 1.0,
                        {w: np.diag([5.0, 1.0]) for w in _windows(full2_sft(), 1)})
    p = PointSpec.periodic(full2_sft(), (0,))
    z = PointSpec.homoclinic(full2_sft(), (0,), (1,))
    with pytest.raises(BunchingError, match="bunched"):
        holonomy(coc, p, z, "unstable")


def test_global_stable_holonomy_equivariance():
    coc = _near_identity_cocycle(k=2)
    sft = coc.sft
    p = PointSpec.periodic(sft, (0,))
    # y differs from p at coordinate 0 but lies in its global stable set
    y = PointSpec.homoclinic_past(sft, (0,), (1,)).shift(-1)
    h = global_stable_holonomy(coc, p, y)
    assert not np.allclose(h, np.eye(2))
    h_shift = global_stable_holonomy(coc, p.shift(1), y.shift(1))
    Ax = coc.generator(p.word(0, coc.k + 1))
    Ay = coc.generator(y.word(0, coc.k + 1))
    assert np.allclose(h_shift, Ay @ h @ np.linalg.inv(Ax), atol=1e-10)


# ---------------------------------------------------------------------------
# Typicality


def test_typicality_pinching_verdicts():
    sft = full2_sft()
    pinched = typicality_report(constant_cocycle(sft, np.diag([2.0, 1.0])),
                                (0,), (1,))
    assert pinched.per_level[1].pinching
    assert pinched.per_level[1].moduli_gap == pytest.approx(0.5)
    rotated = typicality_report(constant_cocycle(sft, ROT(math.pi / 2)),
                                (0,), (1,))
    assert not rotated.per_level[1].pinching


def test_typicality_locally_constant_never_twists():
    rep = typicality_report(constant_cocycle(full2_sft(), np.diag([2.0, 1.0])),
                            (0,), (1,))
    lt = rep.per_level[1]
    assert not lt.twisting
    assert lt.general_position_margin == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(rep.loop, np.eye(2))
    assert not rep.typical


def test_typicality_covers_exterior_powers():
    rep = typicality_report(constant_cocycle(full2_sft(),
                                             np.diag([4.0, 2.0, 1.0])),
                            (0,), (1,))
    assert set(rep.per_level) == {1, 2}
    assert rep.per_level[2].dimension == 3
    assert rep.per_level[2].pinching


# ---------------------------------------------------------------------------
# Irreducibility


def test_burnside_hand_examples():
    diag = [np.diag([2.0, 1.0]), np.diag([3.0, 5.0])]
    assert not burnside_irreducibility(diag).irreducible
    mixed = [np.diag([2.0, 1.0]), ROT(math.pi / 4)]
    assert burnside_irreducibility(mixed).irreducible
    jordan = [np.array([[1.0, 1.0], [0.0, 1.0]])]
    assert not burnside_irreducibility(jordan).irreducible


def test_burnside_dimension_counts():
    rep = burnside_irreducibility([np.diag([2.0, 1.0]), np.diag([3.0, 5.0])])
    assert rep.algebra_dimension == 2          # the diagonal algebra
    rep = burnside_irreducibility([ROT(0.7)])
    assert rep.algebra_dimension == 2          # rotations span C as an algebra
    assert not rep.irreducible                 # C-reducible, R-irreducible
    with pytest.raises(BunchingError):
        burnside_irreducibility([])


def test_burnside_matches_eigenvector_oracle():
    rng = np.random.default_rng(17)
    for trial in range(40):
        if trial % 2 == 0:
            pair = [rng.normal(size=(2, 2)) for _ in range(2)]
        else:
            # conjugated upper-triangular pairs share an eigenvector
            S = rng.normal(size=(2, 2)) + 2 * np.eye(2)
            pair = [S @ np.triu(rng.normal(size=(2, 2)) + np.diag([3, 1]))
                    @ np.linalg.inv(S) for _ in range(2)]
        got = burnside_irreducibility(pair).irreducible
        assert got == (not family_reducible_over_C(pair)), f"trial {trial}"


# ---------------------------------------------------------------------------
# Lyapunov spectrum


def test_lyapunov_constant_diagonal_exact():
    sft = full2_sft()
    coc = constant_cocycle(sft, np.diag([2.0, 0.5]))
    weights = bernoulli_weights(sft, (0.4, 0.6), 6)
    est = lyapunov_spectrum(coc, weights, 6)
    assert est.exponents[0] == pytest.approx(math.log(2.0), abs=1e-13)
    assert est.exponents[1] == pytest.approx(-math.log(2.0), abs=1e-13)
    assert est.log_det_average == pytest.approx(0.0, abs=1e-13)


def test_lyapunov_scalar_gibbs_average():
    sft = full2_sft()
    coc = scalar_cocycle(sft, (1.0, 2.0))
    pot = make_potential(coc, "norm")
    weights = gibbs_weights(pot, 6, math.log(3.0)).weights
    est = lyapunov_spectrum(coc, weights, 6)
    assert est.exponents[0] == pytest.approx((2 / 3) * math.log(2.0), abs=1e-13)


def test_lyapunov_level_requirement():
    sft = full2_sft()
    coc = build_cocycle(sft, 1, 1, 1.0,
                        {w: [[2.0]] for w in _windows(sft, 1)})
    weights = bernoulli_weights(sft, (0.5, 0.5), 4)
    with pytest.raises(BunchingError, match="level"):
        lyapunov_spectrum(coc, weights, 4)      # needs level 5
    est = lyapunov_spectrum(coc, weights, 3)
    assert est.exponents[0] == pytest.approx(math.log(2.0), abs=1e-13)


def test_lyapunov_markov_determinant_identity():
    sft = golden_sft()
    coc = constant_cocycle(sft, np.array([[1.5, 0.2], [0.1, 0.8]]))
    weights = parry_weights(sft, 5)
    est = lyapunov_spectrum(coc, weights, 5)
    assert abs(est.exponents.sum() - est.log_det_average) < 1e-12
    assert est.exponents[0] >= est.exponents[1]
