from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mcdeform.deformation import (MCElement, PathElem, certify, conditions_check, gauge_act, ks_class,
                                  ks_integrability, mc_check, mc_path_check, omega_context, omega_zero_context,
                                  pd_context, pv_context, shift, twist)
from mcdeform.errors import ArgumentError, ContextError, DegreeError, MalformedMCError
from mcdeform.forms import ExteriorForm, LOmegaElem, de_rham
from mcdeform.polydiff import PolyDiffOp, gerstenhaber, hochschild_d, left_multiply, moyal_star
from mcdeform.polyvectors import Polyvector, SymplecticPair, schouten_bilinear, standard_pair
from mcdeform.sampling import random_op, rng_for
from mcdeform.scalars import BaseSeries, TruncationCtx


def D(ctx, *slots, coeff=1):
    return PolyDiffOp.from_slots(ctx, slots, coeff)


def ps_mu(m=3):
    ctx = TruncationCtx(m, 1, (-1,))
    return D(ctx, (1,), (2,), (3,), coeff=BaseSeries.param(ctx, 1))


def random_xi(rng, ctx):
    while True:
        xi = random_op(rng, ctx, 1, n_terms=2, k0_range=(1, 2), ks_budget=0, max_order=2)
        if xi and xi.degree() == 0:
            return xi


def test_zero_is_mc(ctx2, std2):
    assert mc_check(PolyDiffOp.zero(ctx2), pd_context(ctx2)).status
    assert mc_check(Polyvector.zero(ctx2), pv_context(std2, ctx2)).status
    for L in (omega_zero_context(ctx2), omega_context(std2, ctx2)):
        assert mc_check(LOmegaElem.zero(ctx2), L).status


def test_penkava_schwarz_mc_and_class():
    mu = ps_mu()
    assert mc_check(mu, pd_context(mu.ctx)).status
    ctx = mu.ctx
    th = [Polyvector.theta(ctx, i) for i in (1, 2, 3)]
    kappa = ks_class(mu)
    # d1 (x) d2 (x) d3 is one of the six signed terms of hkr_embed(th1^th2^th3), with sign -1,
    # so the left inverse of hkr_embed sends it to -1/6 of the trivector
    assert kappa == (BaseSeries.param(ctx, 1) * th[0] * th[1] * th[2]).scale(Fraction(-1, 6))
    assert ks_integrability(kappa).status


def test_form_context_examples(ctx2):
    eps = BaseSeries.eps(ctx2)
    x1 = BaseSeries.x(ctx2, 1)
    L = omega_zero_context(ctx2)
    good = LOmegaElem(eps * ExteriorForm.dx(ctx2, 1) * ExteriorForm.dx(ctx2, 2))
    assert mc_check(good, L).status
    ctx3 = TruncationCtx(3)
    bad = LOmegaElem(BaseSeries.eps(ctx3) * BaseSeries.x(ctx3, 1) * ExteriorForm.dx(ctx3, 2)
                     * ExteriorForm.dx(ctx3, 3))
    rep = mc_check(bad, omega_zero_context(ctx3))
    assert not rep.status
    assert rep.first_failure_key == "s^-1( eps * dx1^dx2^dx3 )"
    with pytest.raises(DegreeError):
        mc_check(LOmegaElem(eps * x1 * ExteriorForm.dx(ctx2, 2)), L)


def test_mc_rejects_order_zero(ctx2):
    with pytest.raises(DegreeError):
        mc_check(D(ctx2, (1,), (2,)), pd_context(ctx2))


def test_moyal_class_and_conditions():
    for m in (2, 4):
        ctx = TruncationCtx(m)
        pair = standard_pair(ctx)
        mu = moyal_star(pair, ctx)
        assert ks_class(mu) == BaseSeries.eps(ctx) * pair.bivector()
        rep = conditions_check(mu, pair)
        assert rep.extra == {"condition1": True, "condition2": True, "eps_zero_reduction": True}


def test_penkava_schwarz_fails_condition_one():
    mu = ps_mu(4)
    rep = conditions_check(mu, standard_pair(mu.ctx))
    # the class points along e1; the cubic term also survives at eps = 0
    assert rep.extra == {"condition1": False, "condition2": False, "eps_zero_reduction": False}


def substitute_eps(mu, s):
    """Replace eps by the even series s in every coefficient (a ring map, so MC is preserved)."""
    out = PolyDiffOp.zero(mu.ctx)
    for (k0, ks, xs, slots), c in mu.terms.items():
        out = out + left_multiply((s ** k0).scale(c), PolyDiffOp.from_slots(mu.ctx, slots))
    return out


def test_extra_parameter_direction_breaks_condition_one():
    ctx = TruncationCtx(2, 1, (0,), N=3)
    pair = standard_pair(ctx)
    mu = substitute_eps(moyal_star(pair, ctx), BaseSeries.eps(ctx) + BaseSeries.param(ctx, 1))
    assert mc_check(mu, pd_context(ctx)).status
    assert ks_class(mu) == (BaseSeries.eps(ctx) + BaseSeries.param(ctx, 1)) * pair.bivector()
    rep = conditions_check(mu, pair)
    assert not rep.extra["condition1"] and not rep.extra["condition2"]


def test_rescaled_structure_breaks_only_condition_one():
    ctx = TruncationCtx(2, N=3)
    pair = standard_pair(ctx)
    doubled = SymplecticPair(ctx, [[0, Fraction(-1, 2)], [Fraction(1, 2), 0]], [[0, 2], [-2, 0]])
    rep = conditions_check(moyal_star(doubled, ctx), pair)
    assert rep.extra == {"condition1": False, "condition2": True, "eps_zero_reduction": True}


def test_gauge_by_non_cocycle_breaks_condition_two():
    ctx = TruncationCtx(2, 1, (0,), N=3)
    pair = standard_pair(ctx)
    mu = moyal_star(pair, ctx)
    P = D(ctx, (1, 1))
    assert hochschild_d(P)
    xi = left_multiply(BaseSeries.param(ctx, 1), P)
    out = gauge_act(xi, mu, pd_context(ctx))
    assert mc_check(out, pd_context(ctx)).status
    assert not conditions_check(out, pair).extra["condition2"]


def test_gauge_trivial_and_inverse():
    ctx = TruncationCtx(2, N=3)
    mu = moyal_star(standard_pair(ctx), ctx)
    L = pd_context(ctx)
    const = D(ctx, (1,), coeff=BaseSeries.eps(ctx))
    assert gauge_act(const, mu, L) == mu
    xi = random_xi(rng_for(4), ctx)
    out = gauge_act(xi, mu, L)
    assert out != mu
    assert gauge_act(-xi, out, L) == mu
    with pytest.raises(DegreeError):
        gauge_act(D(ctx, (1,), (2,), coeff=BaseSeries.eps(ctx)), mu, L)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_gauge_preserves_mc_and_class(seed):
    rng = rng_for(seed)
    ctx = TruncationCtx(2, N=3)
    mu = moyal_star(standard_pair(ctx), ctx)
    L = pd_context(ctx)
    xi = random_xi(rng, ctx)
    out = gauge_act(xi, mu, L)
    assert mc_check(out, L).status
    assert ks_class(out) == ks_class(mu)
    assert ks_integrability(ks_class(out)).status


def test_gauge_in_polyvectors(ctx2, std2):
    L = pv_context(std2, ctx2)
    eps = BaseSeries.eps(ctx2)
    mu = (eps * eps * Polyvector.theta(ctx2, 1) * Polyvector.theta(ctx2, 2))
    assert mc_check(mu, L).status
    xi = eps * BaseSeries.x(ctx2, 1) ** 2 * Polyvector.theta(ctx2, 2)
    out = gauge_act(xi, mu, L)
    assert mc_check(out, L).status


def test_integrability_examples(ctx4):
    x2 = BaseSeries.x(ctx4, 2)
    th = [Polyvector.theta(ctx4, i) for i in range(1, 5)]
    kappa = BaseSeries.eps(ctx4) * (x2 * th[0] * th[1] + th[1] * th[2])
    # alpha^{12} = x2 and alpha^{23} = 1 fail the Jacobi identity
    assert schouten_bilinear(kappa, kappa)
    assert not ks_integrability(kappa).status


def test_ks_errors(ctx2):
    with pytest.raises(ArgumentError):
        ks_class(Polyvector.theta(ctx2, 1))
    with pytest.raises(ArgumentError):
        ks_class(D(ctx2, (1,), (2,), coeff=BaseSeries.eps(ctx2, -1)))
    with pytest.raises(MalformedMCError):
        ks_class(D(ctx2, (1, 1), (), coeff=BaseSeries.eps(ctx2)))


def test_twist_and_shift():
    ctx = TruncationCtx(2, N=3)
    L = pd_context(ctx)
    mu_a = moyal_star(standard_pair(ctx), ctx)
    assert twist(L, PolyDiffOp.zero(ctx)) is L
    T = twist(L, mu_a)
    rng = rng_for(9)
    for _ in range(10):
        P = random_op(rng, ctx, rng.randint(0, 2), k0_range=(0, 1), ks_budget=0)
        assert not T.diff(T.diff(P))
    f = BaseSeries.x(ctx, 1)
    # the twisted differential of a function starts with the eps-commutator cochain
    first = T.diff(PolyDiffOp.function(f)).filter(lambda k: k[0] == 1)
    assert first == gerstenhaber(mu_a, PolyDiffOp.function(f)).filter(lambda k: k[0] == 1)
    zero = PolyDiffOp.zero(ctx)
    assert shift(zero, mu_a).value == mu_a
    back = shift(mu_a, mu_a, "inverse")
    assert not back.value and back.checked
    xi = random_xi(rng, ctx)
    mu2 = gauge_act(xi, mu_a, L)
    assert shift(shift(mu2, mu_a, "inverse").value, mu_a).value == mu2
    with pytest.raises(MalformedMCError):
        twist(L, D(ctx, (1,), (1,), coeff=BaseSeries.eps(ctx)))
    with pytest.raises(ContextError):
        shift(D(ctx, (1,), (1,), coeff=BaseSeries.eps(ctx)), mu_a)


def test_certify_wraps_report():
    mu = ps_mu()
    el = certify(mu, pd_context(mu.ctx))
    assert isinstance(el, MCElement) and el.checked
    assert el.certificate() == {"context_tag": "PD", "truncation": [4, -4, 4], "residual": "0", "status": "pass"}


def _path_ctx():
    return TruncationCtx(2, time=True)


def test_constant_and_exact_paths():
    ctx = _path_ctx()
    eps = BaseSeries.eps(ctx)
    dx1, dx2 = ExteriorForm.dx(ctx, 1), ExteriorForm.dx(ctx, 2)
    mu = LOmegaElem(eps * dx1 * dx2)
    L = omega_zero_context(ctx)
    rep, (a, b) = mc_path_check(PathElem(mu, LOmegaElem.zero(ctx)), L)
    assert rep.status and a == b == mu.to_ctx(ctx.with_time(False))
    lam = eps * BaseSeries.x(ctx, 1) * dx2
    t = BaseSeries.x(ctx, 3)
    path = PathElem(LOmegaElem(mu.form - t * de_rham(lam)), LOmegaElem(lam))
    rep, (a, b) = mc_path_check(path, L)
    assert rep.status
    assert a.form - b.form == de_rham(lam).to_ctx(ctx.with_time(False))
    broken = PathElem(path.eta_t, LOmegaElem.zero(ctx))
    rep, _ = mc_path_check(broken, L)
    assert not rep.status
    assert "dt" in rep.first_failure_key


def test_path_errors(ctx2):
    with pytest.raises(ContextError):
        PathElem(LOmegaElem.zero(ctx2), LOmegaElem.zero(ctx2))
    ctx = _path_ctx()
    with pytest.raises(ContextError):
        mc_path_check(PathElem(LOmegaElem.zero(ctx), LOmegaElem.zero(ctx)), pd_context(ctx))


def test_bracket_filtration_compatibility():
    ctx = TruncationCtx(2, 1, (0,), N=6)
    rng = rng_for(2)
    for _ in range(30):
        P = random_op(rng, ctx, rng.randint(1, 2), k0_range=(1, 2))
        Q = random_op(rng, ctx, rng.randint(1, 2), k0_range=(1, 2))
        br = gerstenhaber(P, Q)
        if br:
            assert br.m_order() >= P.m_order() + Q.m_order()
