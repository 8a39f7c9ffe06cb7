import math

import numpy as np
import pytest

from matjacobi.canonical import canonical_chain_from_u, canonical_from_recursion
from matjacobi.chains import gram_schmidt
from matjacobi.kmk import kmk_params, kmk_quadrature
from matjacobi.measures import kmk_measure
from matjacobi.sumrule import (StructuredMeasure, coefficient_side, evaluate_sum_rule,
                               extended_residual, gem_check, h_even, h_odd,
                               kl_divergence, kmk_mismatch_family, measure_side,
                               outlier_energy, rate_fixed_size,
                               uniform_vs_arcsine_family)


def make_structured(params, h_func, dim=1, n_nodes=800, atoms_plus=(), atoms_minus=()):
    nodes, weights = kmk_quadrature(params, n_nodes)
    h = h_func(nodes)[:, None, None] * np.eye(dim, dtype=complex)
    return StructuredMeasure(dim=dim, params=params, kmk_nodes=nodes,
                             kmk_weights=weights, h_values=h,
                             atoms_plus=list(atoms_plus), atoms_minus=list(atoms_minus))


# -- support geometry ---------------------------------------------------------


def test_kmk_params_arcsine_limits():
    par = kmk_params(0.0, 0.0)
    assert par.u_minus == 0.0
    assert par.u_plus == 1.0
    assert par.u_odd == 0.5 and par.u_even == 0.5


def test_kmk_params_symmetric_pair():
    par = kmk_params(1.0, 1.0)
    assert par.u_plus == pytest.approx(0.5 + math.sqrt(3) / 4, abs=1e-14)
    assert par.u_minus + par.u_plus == pytest.approx(1.0, abs=1e-14)
    par2 = kmk_params(2.5, 2.5)
    assert par2.u_minus + par2.u_plus == pytest.approx(1.0, abs=1e-12)


# -- divergence functionals ---------------------------------------------------


def test_h_functionals_vanish_at_centers():
    par = kmk_params(1.0, 2.0)
    assert h_even(par.u_even * np.eye(3), par) == pytest.approx(0.0, abs=1e-13)
    assert h_odd(par.u_odd * np.eye(3), par) == pytest.approx(0.0, abs=1e-13)


def test_h_even_scalar_value():
    par = kmk_params(0.0, 0.0)
    expect = -math.log(1.2) + math.log(1.25)
    assert h_even(0.6, par, dim=1) == pytest.approx(expect, rel=1e-10)
    assert h_even(0.6, par, dim=1) == pytest.approx(0.040822, abs=1e-6)


def test_h_infinite_outside_unit_interval():
    par = kmk_params(0.0, 1.0)
    assert math.isinf(h_even(np.diag([0.5, 0.0]).astype(complex), par))
    assert math.isinf(h_odd(np.diag([1.0, 0.5]).astype(complex), par))


def test_h_odd_reflection_symmetry():
    par = kmk_params(1.5, 1.5)
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    h = (a + a.conj().T) / 2
    u = 0.5 * np.eye(2) + h / (5 * np.linalg.norm(h))
    assert h_odd(u, par) == pytest.approx(h_odd(np.eye(2) - u, par), rel=1e-12)


def test_h_similarity_invariant():
    par = kmk_params(0.5, 1.5)
    rng = np.random.default_rng(1)
    u = np.diag([0.3, 0.6]).astype(complex)
    s = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    conj = s @ u @ np.linalg.inv(s)
    assert h_even(conj, par) == pytest.approx(h_even(u, par), rel=1e-9)
    assert h_odd(conj, par) == pytest.approx(h_odd(u, par), rel=1e-9)


def test_h_positive_away_from_center():
    par = kmk_params(0.0, 2.0)
    rng = np.random.default_rng(2)
    for _ in range(20):
        lam = rng.uniform(0.05, 0.95, 2)
        u = np.diag(lam).astype(complex)
        if np.linalg.norm(u - par.u_even * np.eye(2)) > 1e-6:
            assert h_even(u, par) > 0
        if np.linalg.norm(u - par.u_odd * np.eye(2)) > 1e-6:
            assert h_odd(u, par) > 0


def test_quadratic_expansion_second_order():
    # finite differences against the closed forms implied by the entropy
    # definitions: (2+k1+k2)^3 / (2 (1+k1+k2)) for the even functional and
    # (2+k1+k2)^3 / (2 (1+k1)(1+k2)) for the odd one
    rng = np.random.default_rng(3)
    for k1, k2 in [(0.0, 1.0), (1.0, 2.0)]:
        par = kmk_params(k1, k2)
        s = 2 + k1 + k2
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = (a + a.conj().T) / 2
        h /= np.linalg.norm(h)
        tr_h2 = float(np.trace(h @ h).real)
        eps = 1e-3
        for func, center, coeff in (
            (h_even, par.u_even, s**3 / (2 * (1 + k1 + k2))),
            (h_odd, par.u_odd, s**3 / (2 * (1 + k1) * (1 + k2))),
        ):
            c = center * np.eye(2)
            fd = (func(c + eps * h, par) + func(c - eps * h, par)) / (eps**2 * tr_h2)
            assert fd / 2 == pytest.approx(coeff, rel=1e-4)


# -- fixed-size rate function -------------------------------------------------


def test_rate_vanishes_at_minimizer():
    x = (2.0 / 5.0) * np.eye(3)
    assert rate_fixed_size(2.0, 3.0, x) == pytest.approx(0.0, abs=1e-13)


def test_rate_matches_odd_functional():
    # p^{-1} I_{p(1+k1), p(1+k2)} equals the odd divergence functional
    rng = np.random.default_rng(4)
    p, k1, k2 = 2, 0.7, 1.9
    par = kmk_params(k1, k2)
    for _ in range(5):
        lam = rng.uniform(0.05, 0.95, p)
        u = np.diag(lam).astype(complex)
        lhs = rate_fixed_size(p * (1 + k1), p * (1 + k2), u) / p
        assert abs(lhs - h_odd(u, par)) < 1e-12


def test_rate_infinite_at_boundary():
    assert math.isinf(rate_fixed_size(1.0, 1.0, np.diag([1.0, 0.5]).astype(complex)))


# -- entropy ------------------------------------------------------------------


def test_kl_zero_for_unit_density():
    sm = make_structured(kmk_params(1.0, 1.0), lambda x: np.ones_like(x))
    assert kl_divergence(sm) == pytest.approx(0.0, abs=1e-12)


def test_kl_constant_density():
    c = 2.7
    sm = make_structured(kmk_params(0.5, 0.5), lambda x: np.full_like(x, c), dim=2)
    assert kl_divergence(sm) == pytest.approx(-2 * math.log(c), rel=1e-10)


def test_kl_linear_density_scalar_oracle():
    # h(x) = 2x against the arcsine: independent high-resolution quadrature
    par = kmk_params(0.0, 0.0)
    nodes, weights = kmk_quadrature(par, 10_000)
    oracle = float(np.sum(weights * (-np.log(2 * nodes))))
    sm = make_structured(par, lambda x: 2 * x, n_nodes=10_000)
    assert kl_divergence(sm) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(math.log(2.0), abs=1e-5)


def test_kl_infinite_when_h_vanishes():
    par = kmk_params(0.0, 0.0)
    sm = make_structured(par, lambda x: np.where(x < 0.5, 1.5, 0.0))
    assert math.isinf(kl_divergence(sm))


# -- outlier energies ---------------------------------------------------------


def test_outlier_zero_at_edges():
    par = kmk_params(1.0, 1.0)
    assert outlier_energy(par, par.u_plus, +1) == 0.0
    assert outlier_energy(par, par.u_minus, -1) == 0.0


def test_outlier_infinite_off_domain():
    par = kmk_params(1.0, 1.0)
    assert math.isinf(outlier_energy(par, par.u_minus, +1))
    assert math.isinf(outlier_energy(par, 1.2, +1))
    assert math.isinf(outlier_energy(par, -0.1, -1))
    assert math.isinf(outlier_energy(par, 1.0, +1))  # endpoint pole


def test_outlier_three_halves_law():
    par = kmk_params(1.0, 1.0)
    h = 1e-4
    width = math.sqrt(par.u_plus - par.u_minus)
    for sign, edge in ((+1, par.u_plus), (-1, par.u_minus)):
        lead = 2 * width / (3 * edge * (1 - edge)) if sign > 0 else \
            2 * width / (3 * par.u_minus * (1 - par.u_minus))
        val = outlier_energy(par, edge + sign * h, sign)
        assert val / h**1.5 == pytest.approx(lead, rel=1e-2)


def test_outlier_monotone():
    par = kmk_params(2.0, 1.0)
    xs = np.linspace(par.u_plus, 1.0 - 1e-6, 6)
    vals = [outlier_energy(par, x, +1) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_measure_side_counts_rank():
    par = kmk_params(1.0, 1.0)
    x_out = par.u_plus + 0.02
    rank1 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex) * 0.1
    rank2 = np.diag([0.1, 0.2]).astype(complex)
    sm1 = make_structured(par, lambda x: np.ones_like(x), dim=2,
                          atoms_plus=[(x_out, rank1)])
    sm2 = make_structured(par, lambda x: np.ones_like(x), dim=2,
                          atoms_plus=[(x_out, rank2)])
    e1 = measure_side(sm1)
    e2 = measure_side(sm2)
    assert e1.total == pytest.approx(outlier_energy(par, x_out, +1), rel=1e-12)
    assert e2.total == pytest.approx(2 * e1.total, rel=1e-12)


# -- coefficient side ---------------------------------------------------------


def test_coefficient_side_zero_at_centers():
    par = kmk_params(0.0, 0.0)
    can = canonical_chain_from_u([np.array([[0.5]])] * 7)
    side = coefficient_side(can, par, 10)
    assert side.total == pytest.approx(0.0, abs=1e-12)
    assert side.converged


def test_coefficient_side_single_perturbation():
    par = kmk_params(0.0, 0.0)
    u_list = [np.array([[0.6]])] + [np.array([[0.5]])] * 6
    side = coefficient_side(canonical_chain_from_u(u_list), par, 10)
    assert side.total == pytest.approx(0.040822, abs=1e-6)


def test_coefficient_side_kmk_chain_is_small():
    k1, k2 = 1.0, 2.0
    par = kmk_params(k1, k2)
    m = kmk_measure(k1, k2, dim=1, n_nodes=400)
    can = canonical_from_recursion(gram_schmidt(m, 6))
    side = coefficient_side(can, par, 6)
    assert side.total < 1e-6


def test_coefficient_side_divergent_rule():
    par = kmk_params(0.0, 0.0)
    rule = lambda k: np.array([[0.6]])
    side = coefficient_side(rule, par, 50)
    assert math.isinf(side.total)
    assert not side.converged


def test_coefficient_side_infinite_term():
    par = kmk_params(0.0, 0.0)
    rule = lambda k: np.array([[1.0]])  # singular complement
    side = coefficient_side(rule, par, 5)
    assert math.isinf(side.total)


# -- two-sided families -------------------------------------------------------


def test_extended_residual_semantics():
    assert extended_residual(math.inf, math.inf) == 0.0
    assert math.isinf(extended_residual(math.inf, 1.0))
    assert extended_residual(1.0, 1.0) == 0.0


def test_pure_kmk_family_both_sides_zero():
    sm, rule = kmk_mismatch_family((1.0, 1.0), (1.0, 1.0), n_nodes=300)
    report = evaluate_sum_rule(sm, rule, 20)
    assert report.measure_side.total == pytest.approx(0.0, abs=1e-10)
    assert report.coefficient_side.total == pytest.approx(0.0, abs=1e-12)
    assert report.residual < 1e-10


def test_mismatch_family_simultaneously_infinite():
    for kappa, kappa_prime in [((0.0, 0.0), (1.0, 1.0)), ((1.0, 1.0), (2.0, 2.0))]:
        sm, rule = kmk_mismatch_family(kappa, kappa_prime, n_nodes=300)
        report = evaluate_sum_rule(sm, rule, 20)
        assert math.isinf(report.measure_side.total)
        assert math.isinf(report.coefficient_side.total)
        assert report.residual == 0.0


def test_mismatch_family_requires_nested_support():
    with pytest.raises(ValueError):
        kmk_mismatch_family((1.0, 1.0), (0.0, 0.0))


def test_uniform_vs_arcsine_closed_form():
    # both sides equal log(4/pi): the measure side by quadrature, the
    # coefficient side by summing the closed-form canonical moments
    target = math.log(4.0 / math.pi)
    sm, rule = uniform_vs_arcsine_family(n_nodes=2000)
    ms = measure_side(sm)
    assert ms.total == pytest.approx(target, abs=2e-6)
    side = coefficient_side(rule, kmk_params(0.0, 0.0), 3000)
    assert side.total == pytest.approx(target, abs=1e-3)
    report = evaluate_sum_rule(sm, rule, 3000)
    assert report.residual < 1e-3


# -- gem ----------------------------------------------------------------------


def test_gem_kmk_chain_flat():
    k1, k2 = 1.0, 0.0
    par = kmk_params(k1, k2)
    m = kmk_measure(k1, k2, dim=1, n_nodes=400)
    can = canonical_from_recursion(gram_schmidt(m, 6))
    rep = gem_check(can, par, 6)
    assert rep.ell2_sum < 1e-10
    assert rep.plateaued


def test_gem_single_perturbation_value():
    par = kmk_params(0.0, 0.0)
    d = 0.12
    u_list = [np.array([[0.5 + d]])] + [np.array([[0.5]])] * 6
    rep = gem_check(canonical_chain_from_u(u_list), par, 10)
    assert rep.ell2_sum == pytest.approx(d * d, rel=1e-12)


def test_gem_drifting_chain_flagged():
    par = kmk_params(0.0, 0.0)
    rule = lambda k: np.array([[0.5 + 0.4 * (1 - 1 / (k + 1))]])
    rep = gem_check(rule, par, 60)
    assert not rep.plateaued
    assert rep.ell2_sum > 1.0


def test_gem_conditions_with_measure():
    par = kmk_params(1.0, 1.0)
    sm = make_structured(par, lambda x: np.ones_like(x),
                         atoms_plus=[(par.u_plus + 0.01, np.array([[0.05]], dtype=complex))])
    can = canonical_chain_from_u([np.array([[0.5]])] * 5)
    rep = gem_check(can, par, 5, sm=sm)
    assert rep.conditions["support"] is True
    assert rep.conditions["outlier_gaps"] is True
    assert rep.conditions["log_integrable"] is True
