"""Filtration engine tests: the operation examples with frozen tables, and
the structural identities on sampled inputs."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from ckstab.filtration import (FiltrationFamily,
                               GridMismatch, MissingCharacter,
                               NotIntegerValued, UnboundedWeights,
                               approximate, base_change, construct,
                               family_degree_grid, graded_basis,
                               is_shifted_trivial, numerics, round_weights,
                               shift, sum_filtration, trivial_family,
                               trivial_filtration, twist, twist_family,
                               valuation_family, valuation_filtration)
from ckstab.toric import TOTAL, theta_twist


def rand_frac(rng, span=3):
    den = rng.choice([1, 2, 3, 4])
    return F(rng.randint(-span * den, span * den), den)


# --- construction ---------------------------------------------------------

def test_trivial_weights(p1_skew):
    f = trivial_filtration(graded_basis(p1_skew, 0, m_max=3))
    assert all(w == 0 for row in f.weights.values() for w in row.values())


def test_valuation_weights_unit_interval(p1_skew):
    f = valuation_filtration(graded_basis(p1_skew, 0, m_max=2), (1,))
    assert f.weights[2] == {(-0 - 0,): 0, (1,): 1, (2,): 2} or \
        f.weights[2] == {(0,): F(0), (1,): F(1), (2,): F(2)}


def test_table_requires_all_characters(p1_skew):
    basis = graded_basis(p1_skew, 0, m_max=1)
    with pytest.raises(MissingCharacter):
        construct(basis, {1: {(0,): F(1)}})


def test_infinite_weight_rejected(p1_skew):
    basis = graded_basis(p1_skew, 0, m_max=1)
    with pytest.raises(UnboundedWeights):
        construct(basis, {1: {(0,): None, (1,): F(0)}})


# --- shift / twist / round / base change -----------------------------------

def test_shift_trivial(p1_skew):
    f = shift(trivial_filtration(graded_basis(p1_skew, 0, m_max=3)), 1)
    assert all(w == m for m, row in f.weights.items() for w in row.values())


def test_shift_composition(p1_skew):
    basis = graded_basis(p1_skew, 0, m_max=3)
    f = valuation_filtration(basis, (1,))
    assert shift(shift(f, F(1, 2)), F(1, 3)).table_equal(shift(f, F(5, 6)))


def test_shift_of_valuation(p1_skew):
    f = valuation_filtration(graded_basis(p1_skew, 0, m_max=2), (1,))
    g = shift(f, F(-1, 2))
    assert g.weights[2][(1,)] == 0


def test_twist_trivial(p1_skew):
    f = twist(trivial_filtration(graded_basis(p1_skew, 0, m_max=1)), (2,))
    assert f.weights[1] == {(0,): F(0), (1,): F(2)}


def test_twist_inverse(p1_skew):
    f = valuation_filtration(graded_basis(p1_skew, 0, m_max=3), (2,))
    assert twist(twist(f, (3,)), (-3,)).table_equal(f)


def test_twist_of_valuation_is_shifted_valuation(models):
    rng = random.Random(53)
    for model in models.values():
        grid = family_degree_grid(model, 4)
        for i in range(model.num_summands):
            basis = graded_basis(model, i, m_max=4, step=grid[0])
            eta = tuple(rand_frac(rng, 2) for _ in range(model.rank))
            xi = tuple(rand_frac(rng, 2) for _ in range(model.rank))
            lhs = twist(valuation_filtration(basis, eta), xi)
            th = theta_twist(model, i, eta, xi)
            rhs = shift(valuation_filtration(
                basis, tuple(a + b for a, b in zip(eta, xi))), -th)
            assert lhs.table_equal(rhs)


def test_round_weights():
    # frozen example: {3/2, 2} -> {1, 2}, and idempotence
    from ckstab.serialize import load_model
    from ckstab.cli import resolve_model_path
    model = load_model(resolve_model_path("p1_skew.json"))
    basis = graded_basis(model, 0, m_max=1)
    f = construct(basis, {1: {(0,): F(3, 2), (1,): F(2)}})
    r = round_weights(f)
    assert r.weights[1] == {(0,): F(1), (1,): F(2)}
    assert round_weights(r).table_equal(r)


def test_base_change_scales_weights(p1_skew):
    basis = graded_basis(p1_skew, 0, m_max=3)
    f = valuation_filtration(basis, (1,))
    g = base_change(f, 3)
    assert all(g.weights[m][a] == 3 * f.weights[m][a]
               for m in f.weights for a in f.weights[m])
    n_f, n_g = numerics(f), numerics(g)
    assert all(n_g.s_by_degree[m] == 3 * n_f.s_by_degree[m] for m in n_f.s_by_degree)
    assert all(n_g.t_by_degree[m] == 3 * n_f.t_by_degree[m] for m in n_f.t_by_degree)


def test_base_change_needs_integers(p1_skew):
    basis = graded_basis(p1_skew, 0, m_max=2)
    f = construct(basis, {m: {a: F(1, 2) for a in basis.characters(m)}
                          for m in basis.degrees})
    with pytest.raises(NotIntegerValued):
        base_change(f, 2)
    base_change(round_weights(f), 2)


def test_base_change_commutes_with_integral_twist(bl1p2):
    grid = family_degree_grid(bl1p2, 4)
    basis = graded_basis(bl1p2, 0, m_max=4, step=grid[0])
    f = valuation_filtration(basis, (1, -1))
    lhs = twist(base_change(f, 2), (2, 4))
    rhs = base_change(twist(f, (1, 2)), 2)
    assert lhs.table_equal(rhs)


# --- sums -------------------------------------------------------------------

def test_sum_of_common_valuations_is_total_valuation(p1, p1_skew):
    for model in (p1, p1_skew):
        fam = valuation_family(model, (1,), m_max=4)
        total = sum_filtration(fam)
        expected = valuation_filtration(
            graded_basis(model, TOTAL, m_max=4,
                         step=fam.degrees[0]).restrict(fam.degrees), (1,))
        assert total.table_equal(expected)


def test_sum_weight_at_top_character(p1_skew):
    fam = valuation_family(p1_skew, (1,), m_max=2)
    total = sum_filtration(fam)
    assert total.weights[1][(1,)] == 2


def test_sum_of_trivials_is_trivial(p2):
    total = sum_filtration(trivial_family(p2, m_max=3))
    flag, c = is_shifted_trivial(total)
    assert flag and c == 0


def test_sum_of_shifts(p2_steps):
    rng = random.Random(59)
    fam = valuation_family(p2_steps, (1, -1), m_max=3)
    cs = [rand_frac(rng) for _ in fam.members]
    lhs = sum_filtration(FiltrationFamily(p2_steps, tuple(
        shift(f, c) for f, c in zip(fam.members, cs))))
    rhs = shift(sum_filtration(fam), sum(cs))
    assert lhs.table_equal(rhs)


def test_sum_twist_commutes(bl1p2):
    fam = valuation_family(bl1p2, (2, -1), m_max=4)
    xi = (F(1, 2), F(-3, 2))
    lhs = sum_filtration(twist_family(fam, xi))
    rhs = twist(sum_filtration(fam), xi)
    assert lhs.table_equal(rhs)


def test_shifted_trivial_detection(p1):
    fam = trivial_family(p1, m_max=4)
    shifted = FiltrationFamily(p1, tuple(
        shift(f, c) for f, c in zip(fam.members, (F(3, 2), F(1)))))
    flag, c = is_shifted_trivial(sum_filtration(shifted))
    assert flag and c == F(5, 2)
    flag, _ = is_shifted_trivial(
        valuation_filtration(graded_basis(p1, 0, m_max=4), (1,)))
    assert not flag


def test_family_grid_mismatch(p1):
    a = valuation_filtration(graded_basis(p1, 0, m_max=4), (1,))
    b = valuation_filtration(graded_basis(p1, 1, m_max=2), (1,))
    with pytest.raises(GridMismatch):
        FiltrationFamily(p1, (a, b))


# --- approximation -----------------------------------------------------------

def test_approximation_fixes_base_degree(bl1p2):
    basis = graded_basis(bl1p2, TOTAL, m_max=4)
    rng = random.Random(61)
    table = {m: {a: rand_frac(rng) for a in basis.characters(m)}
             for m in basis.degrees}
    f = construct(basis, table)
    ap = approximate(f, 1)
    assert ap.weights[1] == f.weights[1]
    # generated filtration sits below the original on every degree it defines
    mult_ok = all(ap.weights[m][a] >= f.weights[m][a]
                  for m in ap.weights for a in ap.weights[m])
    # random tables need not be multiplicative, so only degree one is pinned
    assert set(ap.weights) == {1, 2, 3, 4}
    del mult_ok


def test_approximation_of_valuation_is_itself(p2_steps):
    f = valuation_filtration(graded_basis(p2_steps, TOTAL, m_max=4), (1, 2))
    assert approximate(f, 1).table_equal(f)
    f0 = valuation_filtration(graded_basis(p2_steps, 0, m_max=4), (-1, 1))
    assert approximate(f0, 2).table_equal(
        valuation_filtration(graded_basis(p2_steps, 0, m_max=4,
                                          step=2), (-1, 1)))


def test_approximation_of_trivial(p1):
    f = trivial_filtration(graded_basis(p1, TOTAL, m_max=4))
    ap = approximate(f, 2)
    flag, c = is_shifted_trivial(ap)
    assert flag and c == 0


def test_approximation_grid_error(p1):
    f = trivial_filtration(graded_basis(p1, TOTAL, m_max=4))
    with pytest.raises(GridMismatch):
        approximate(f, 5)


# --- numerics ----------------------------------------------------------------

def test_numerics_valuation_p1_skew(p1_skew):
    f = valuation_filtration(graded_basis(p1_skew, 0, m_max=6), (1,))
    n = numerics(f)
    assert all(v == F(1, 2) for v in n.s_by_degree.values())
    assert n.s_value == F(1, 2) and n.lambda_max == 1 and n.j_value == F(1, 2)


def test_numerics_trivial(p2):
    n = numerics(trivial_filtration(graded_basis(p2, TOTAL, m_max=4)))
    assert n.s_value == 0 and n.lambda_max == 0 and n.j_value == 0
    assert all(v == 0 for v in n.t_by_degree.values())


def test_numerics_twisted_trivial_matches_polytope(bl1p2):
    from ckstab.geometry import support_value
    xi = (2, -1)
    f = twist(trivial_filtration(graded_basis(bl1p2, TOTAL, m_max=6)), xi)
    n = numerics(f)
    top = support_value(bl1p2.anticanonical, xi, "max")[0]
    bary = sum(b * x for b, x in zip(bl1p2.barycenter(TOTAL), xi))
    assert n.lambda_max == top and n.s_value == bary
    assert n.j_value == top - bary
    # finite degrees approach the certified values
    assert all(n.t_by_degree[m] == top for m in n.t_by_degree)
    gaps = [abs(n.s_by_degree[m] - bary) for m in sorted(n.s_by_degree)]
    assert gaps[-1] <= gaps[0]


def test_numerics_table_has_no_certified_limits(p1):
    basis = graded_basis(p1, 0, m_max=4)
    rng = random.Random(67)
    f = construct(basis, {m: {a: rand_frac(rng) for a in basis.characters(m)}
                          for m in basis.degrees})
    n = numerics(f)
    assert n.s_value is None and n.lambda_max is None
    assert n.provenance == "finite-degree-estimate"


def test_rounding_mean_slope_bound(models):
    rng = random.Random(71)
    for model in models.values():
        grid = family_degree_grid(model, 4)
        basis = graded_basis(model, 0, m_max=4, step=grid[0])
        for _ in range(5):
            f = construct(basis, {m: {a: rand_frac(rng)
                                      for a in basis.characters(m)}
                                  for m in basis.degrees})
            xi = tuple(rand_frac(rng, 2) for _ in range(model.rank))
            s_f = numerics(twist(f, xi)).s_by_degree
            s_r = numerics(twist(round_weights(f), xi)).s_by_degree
            for m in grid:
                assert abs(s_f[m] - s_r[m]) <= F(1, m)


def test_approximation_contained_in_multiplicative_source(bl1p2):
    # floor of a valuation filtration is multiplicative, so its
    # approximations must sit below it and agree at the base degree
    import random
    rng = random.Random(97)
    basis = graded_basis(bl1p2, TOTAL, m_max=4)
    f = round_weights(shift(valuation_filtration(basis, (F(3, 2), F(-1))),
                            F(2)))
    assert f.check_multiplicative(200, rng) > 0
    ap = approximate(f, 1)
    assert ap.weights[1] == f.weights[1]
    for m in ap.weights:
        for a, w in ap.weights[m].items():
            assert w <= f.weights[m][a]


def test_multiplicativity_check_flags_bad_tables(p1_skew):
    import random
    from ckstab.filtration import FiltrationError
    basis = graded_basis(p1_skew, 0, m_max=2)
    bad = construct(basis, {1: {(0,): F(5), (1,): F(5)},
                            2: {(0,): F(0), (1,): F(0), (2,): F(0)}})
    with pytest.raises(FiltrationError):
        bad.check_multiplicative(100, random.Random(1))


def test_twist_rank_error(p1_skew):
    from ckstab.toric import RankMismatch
    f = trivial_filtration(graded_basis(p1_skew, 0, m_max=2))
    with pytest.raises(RankMismatch):
        twist(f, (1, 0))


def test_valuation_mean_slope_decay(models):
    # |S_m - S| <= c/m for valuation filtrations on the total ring, with
    # the same boundary-layer constant used by the acceptance suite
    from ckstab.stability import mean_slope_decay_constant
    rng = random.Random(101)
    for name in ("p2_steps", "bl1p2_halves"):
        model = models[name]
        basis = graded_basis(model, TOTAL, m_max=8, step=1)
        c_model = mean_slope_decay_constant(model)
        for _ in range(5):
            eta = tuple(rand_frac(rng, 3) for _ in range(model.rank))
            f = valuation_filtration(basis, eta)
            n = numerics(f)
            c = c_model * sum(abs(x) for x in eta)
            for m in basis.degrees:
                assert abs(n.s_by_degree[m] - n.s_value) <= c / max(m, 1)
