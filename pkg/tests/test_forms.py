import pytest
from hypothesis import given, settings, strategies as st

from mcdeform.errors import ArgumentError, MembershipError
from mcdeform.forms import (ExteriorForm, LOmegaElem, contract_dx, de_rham, form_bracket, j_omega,
                            membership_table, omega_bracket, space_membership)
from mcdeform.polyvectors import Polyvector, SymplecticPair, schouten_bilinear, shear_pair, standard_pair
from mcdeform.sampling import random_form, random_ltilde, random_polyvector, rng_for
from mcdeform.scalars import BaseSeries, TruncationCtx

import oracles


def dx(ctx, *idx):
    out = ExteriorForm.const(ctx, 1)
    for i in idx:
        out = out * ExteriorForm.dx(ctx, i)
    return out


def x(ctx, i):
    return BaseSeries.x(ctx, i)


def test_de_rham_examples(ctx2):
    assert de_rham(x(ctx2, 1)) == dx(ctx2, 1)
    assert de_rham(x(ctx2, 1) * dx(ctx2, 2)) == dx(ctx2, 1, 2)
    assert not de_rham(x(ctx2, 2) * dx(ctx2, 1) + x(ctx2, 1) * dx(ctx2, 2))


def test_contraction_examples(ctx2):
    assert contract_dx(1, dx(ctx2, 1, 2)) == dx(ctx2, 2)
    assert contract_dx(2, dx(ctx2, 1, 2)) == -dx(ctx2, 1)
    assert not contract_dx(1, x(ctx2, 1))
    with pytest.raises(ArgumentError):
        contract_dx(3, dx(ctx2, 1))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_differential_and_contraction_identities(seed):
    rng = rng_for(seed)
    ctx = TruncationCtx(4, 1, (-1,))
    eta = random_form(rng, ctx, n_terms=4)
    assert not de_rham(de_rham(eta))
    for i in range(1, 5):
        assert not contract_dx(i, contract_dx(i, eta))
        for j in range(i + 1, 5):
            assert contract_dx(i, contract_dx(j, eta)) == -contract_dx(j, contract_dx(i, eta))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_de_rham_matches_oracle(seed):
    rng = rng_for(seed)
    ctx = TruncationCtx(3, N=30, eps_floor=0)
    eta = random_form(rng, ctx, n_terms=4, max_xdeg=3)
    xs = oracles.xsyms(3)
    expect = oracles.super_add(*[oracles.super_mul({(i + 1,): 1}, oracles.d_x(oracles.to_sympy(eta), xs[i]))
                                 for i in range(3)])
    assert oracles.to_sympy(de_rham(eta)) == expect


def test_membership_examples():
    ctx = TruncationCtx(2, 1, (0,))
    eps, e1 = BaseSeries.eps(ctx), BaseSeries.param(ctx, 1)
    a = LOmegaElem(eps * dx(ctx, 1, 2))
    assert space_membership(a, "Ltilde")
    b = LOmegaElem(BaseSeries.eps(ctx, -2) * e1 * dx(ctx, 1, 2))
    assert space_membership(b, "L")
    assert not space_membership(b, "Ltilde")
    zero = LOmegaElem.zero(ctx)
    assert all(membership_table(zero, 3).values())


def test_filtered_ltilde_is_intersection(ctx2):
    # eps^2 dx1^dx2 has L-index 4; it lies in F_4 Ltilde but not F_5
    a = LOmegaElem(BaseSeries.eps(ctx2, 2) * dx(ctx2, 1, 2))
    assert space_membership(a, "F_k Ltilde", 4)
    assert not space_membership(a, "F_k Ltilde", 5)
    with pytest.raises(ArgumentError):
        space_membership(a, "F_k L", 0)


def test_easy_brackets(std2):
    ctx = std2.ctx
    eps = BaseSeries.eps(ctx)
    f = x(ctx, 1) * x(ctx, 2) ** 2
    s = LOmegaElem
    assert not omega_bracket(s(eps * f), s(eps * x(ctx, 2)), std2)
    # [s dx1, s f] = s eps alpha^{1j} d_j f, and bilinearity in eps for scaled inputs
    assert omega_bracket(s(dx(ctx, 1)), s(f), std2, check=False) == s(eps * f.dx_partial(2))
    assert omega_bracket(s(eps * dx(ctx, 1)), s(eps * f), std2) == s(eps ** 3 * f.dx_partial(2))


def test_dx_dx_bracket_sees_derivative_of_alpha(shear4):
    ctx = shear4.ctx
    eps = BaseSeries.eps(ctx)
    out = omega_bracket(LOmegaElem(eps * dx(ctx, 2)), LOmegaElem(eps * dx(ctx, 3)), shear4)
    # alpha^{23} = 2 x1, so the bracket is eps^3 * 2 dx1
    assert out == LOmegaElem(BaseSeries.eps(ctx, 3) * dx(ctx, 1).scale(2))


def test_bracket_closure_violation(ctx2, std2):
    # the first input sits below the eps-floor of L, and so does the bracket
    low = LOmegaElem(BaseSeries.eps(ctx2, -3) * x(ctx2, 2) * dx(ctx2, 1, 2))
    with pytest.raises(MembershipError):
        omega_bracket(low, LOmegaElem(BaseSeries.eps(ctx2) * x(ctx2, 1)), std2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_form_bracket_matches_oracle(seed):
    rng = rng_for(seed)
    ctx = TruncationCtx(4, N=40, eps_floor=-10)
    pair = shear_pair(ctx)
    a = random_form(rng, ctx, max_xdeg=2)
    b = random_form(rng, ctx, max_xdeg=2)
    alpha = [[oracles.to_sympy(p).get((), 0) for p in row] for row in pair.alpha]
    deg = a.degree() or 0
    expect = oracles.form_bracket_oracle(oracles.to_sympy(a), oracles.to_sympy(b), alpha, 4, deg)
    assert oracles.to_sympy(form_bracket(a, b, pair.alpha)) == expect


def test_j_omega_examples(ctx2, std2):
    eps = BaseSeries.eps(ctx2)
    f = x(ctx2, 1) ** 2 + x(ctx2, 2)
    assert j_omega(eps * f, std2) == LOmegaElem(eps * f)
    # omega_12 = 1 means alpha^{12} = -1
    flipped = SymplecticPair(ctx2, [[0, 1], [-1, 0]], [[0, -1], [1, 0]])
    assert j_omega(eps * Polyvector.theta(ctx2, 1), flipped) == LOmegaElem(dx(ctx2, 2))
    assert j_omega(LOmegaElem(dx(ctx2, 1)), std2, "inverse") == eps * Polyvector.theta(ctx2, 2)


def test_j_omega_rejects_order_zero(ctx2, std2):
    with pytest.raises(MembershipError):
        j_omega(Polyvector.theta(ctx2, 1), std2)
    with pytest.raises(MembershipError):
        j_omega(LOmegaElem(BaseSeries.eps(ctx2, -3) * dx(ctx2, 1, 2)), std2, "inverse")


def transport_samples(pair, ctx, rng, count):
    """Yield (v, w) homogeneous pairs in m * PV."""
    for _ in range(count):
        v = random_polyvector(rng, ctx, k0_range=(1, 2), max_xdeg=2)
        w = random_polyvector(rng, ctx, k0_range=(1, 2), max_xdeg=2)
        yield v, w


@pytest.mark.parametrize("which", ["standard", "shear"])
def test_transport_intertwines(which, ctx4):
    pair = standard_pair(ctx4) if which == "standard" else shear_pair(ctx4)
    ea = BaseSeries.eps(ctx4) * pair.bivector()
    rng = rng_for(3)
    nontrivial = 0
    for v, w in transport_samples(pair, ctx4, rng, 40):
        jv, jw = j_omega(v, pair), j_omega(w, pair)
        d = schouten_bilinear(ea, v)
        assert j_omega(d, pair) == LOmegaElem(-de_rham(jv.form))
        br = schouten_bilinear(v, w)
        assert j_omega(br, pair) == omega_bracket(jv, jw, pair, check=False)
        assert j_omega(jv, pair, "inverse") == v
        nontrivial += bool(br)
    assert nontrivial >= 10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_bracket_on_ltilde_is_lie(seed):
    rng = rng_for(seed)
    ctx = TruncationCtx(4, N=5)
    pair = shear_pair(ctx)
    a, b, c = (random_ltilde(rng, ctx, n_terms=1) for _ in range(3))
    da, db = a.degree() or 0, b.degree() or 0
    br = lambda u, v: omega_bracket(u, v, pair, check=False)  # noqa: E731
    sign = -1 if (da * db) % 2 else 1
    assert br(a, b) == -br(b, a).scale(sign)
    assert br(a, br(b, c)) == br(br(a, b), c) + br(b, br(a, c)).scale(sign)
    assert space_membership(br(a, b), "L")
