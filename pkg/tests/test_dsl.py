from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mcdeform.coderivations import WordSum
from mcdeform.dsl import Session, data_names, parse_expr, print_canonical, read_data, tokenize
from mcdeform.errors import ParseError
from mcdeform.forms import ExteriorForm, LOmegaElem, omega_bracket
from mcdeform.polydiff import moyal_star
from mcdeform.polyvectors import Polyvector, shear_pair, standard_pair
from mcdeform.sampling import random_form, random_op, random_polyvector, random_scalar, random_words, rng_for
from mcdeform.scalars import BaseSeries, TruncationCtx


def roundtrip(session, value):
    text = print_canonical(value)
    back = session.evaluate(text)
    return back, text


def test_parse_builds_a_tree():
    node = parse_expr("e1 * th1^th2^th3")
    assert node.kind == "mul"
    left, right = node.children
    assert left.kind == "name" and left.value == "e1"
    assert right.kind == "wedge"


def test_product_binds_tighter_than_sum():
    s = Session(m=2)
    assert s.evaluate("1 + 2 * 3") == 7
    assert s.evaluate("2 * x1 + x2") == s.evaluate("x2 + x1 * 2")
    assert s.evaluate("-x1 + x1") == s.evaluate("0 * x1")


def test_graded_product_and_powers():
    s = Session(m=3)
    assert print_canonical(s.evaluate("th2^th1")) == "-1 * th1^th2"
    assert s.evaluate("x1^2") == s.evaluate("x1 * x1")
    assert s.evaluate("eps^-2 * eps^2") == s.evaluate("1 + 0 * eps")
    assert s.evaluate("th1^th1") == Polyvector.zero(s.ctx)


def test_parameter_monomial():
    s = Session(m=3, g=1, degrees=(-1,))
    v = s.evaluate("e1 * th1^th2^th3")
    ctx = s.ctx
    th = [Polyvector.theta(ctx, i) for i in (1, 2, 3)]
    assert v == BaseSeries.param(ctx, 1) * th[0] * th[1] * th[2]


def test_schouten_of_theta_and_x():
    s = Session(m=2)
    assert print_canonical(s.evaluate("sbr(th1, x1)")) == "1"
    assert print_canonical(s.evaluate("sbr(th1, x2)")) == "0"


def test_form_bracket_head_matches_kernel(ctx2, std2):
    s = Session(m=2, fixture="standard2")
    got = s.evaluate("obr(s(eps*dx1), s(eps*x1))")
    eps = BaseSeries.eps(ctx2)
    a = LOmegaElem(eps * ExteriorForm.dx(ctx2, 1))
    b = LOmegaElem((eps * BaseSeries.x(ctx2, 1)).cast(ExteriorForm))
    assert got == omega_bracket(a, b, std2)
    # eps * alpha^{12} * eps * d_2(eps x1) vanishes; the only term pairs dx1 with d_1
    assert print_canonical(s.evaluate("obr(s(dx1), s(x2))")) == print_canonical(
        omega_bracket(LOmegaElem(ExteriorForm.dx(ctx2, 1)),
                      LOmegaElem(BaseSeries.x(ctx2, 2).cast(ExteriorForm)), std2, check=False))


def test_zero_prints_as_zero():
    s = Session(m=2)
    assert print_canonical(Fraction(0)) == "0"
    assert print_canonical(s.evaluate("0 * x1")) == "0"


def test_both_suspension_spellings():
    s = Session(m=2)
    assert s.evaluate("s(eps*dx1^dx2)") == s.evaluate("s^-1(eps*dx1^dx2)")
    assert str(s.evaluate("s(eps*dx1)")) == "s^-1( eps * dx1 )"


def test_operator_syntax():
    s = Session(m=2)
    a = s.evaluate("eps * D[1]⊗D[2]")
    b = s.evaluate("eps * D[1] @ D[2]")
    c = s.evaluate("eps * Dop[[1],[2]]")
    assert a == b == c
    assert print_canonical(a) == "eps * D[1]⊗D[2]"
    assert print_canonical(s.evaluate("0 * D[1]⊗D[2]")) == "0 * Dop[]"


def test_moyal_prints_in_slot_syntax():
    ctx = TruncationCtx(2, N=2)
    text = print_canonical(moyal_star(standard_pair(ctx), ctx))
    assert "D[1]⊗D[2]" in text and "D[2]⊗D[1]" in text
    assert Session(m=2, N=2).evaluate(text) == moyal_star(standard_pair(ctx), ctx)


@pytest.mark.parametrize("src, col, fragment", [
    ("x1 + $", 6, "unexpected character"),
    ("x1 + x9", 6, "out of range"),
    ("th1 + y1", 7, "unknown generator"),
    ("sbr(th1)", 1, "takes 2 argument"),
    ("foo(x1)", 1, "unknown function"),
    ("(x1 + x2", 9, "expected ')'"),
    ("1/0", 3, "zero denominator"),
    ("x1 ^-1", 4, "negative powers"),
])
def test_errors_carry_positions(src, col, fragment):
    s = Session(m=2)
    with pytest.raises(ParseError) as info:
        s.evaluate(src)
    assert info.value.col == col, str(info.value)
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"1:{col}:")


def test_errors_in_files_report_the_line():
    s = Session(m=2)
    with pytest.raises(ParseError) as info:
        s.run("a = x1\n\n  b = x1 + th7\n")
    assert (info.value.line, info.value.col) == (3, 12)


def test_tokenizer_is_whitespace_insensitive():
    a = [t.text for t in tokenize("e1*th1^th2")]
    b = [t.text for t in tokenize(" e1 *  th1 ^ th2 ")]
    assert a == b


def test_session_settings_and_names():
    s = Session()
    last = s.run("# comment\nset m=3 g=1 degrees=-1 N=3\nmu = e1 * D[1]⊗D[2]⊗D[3]\nnu = 2 * mu\n")
    assert last == "nu"
    assert s.ctx.m == 3 and s.ctx.g == 1 and s.ctx.param_degrees == (-1,)
    assert s.names["nu"] == s.names["mu"].scale(2)
    with pytest.raises(ParseError):
        s.run("set q=1")


def test_data_files_match_constructors():
    names = data_names()
    assert {"penkava-schwarz", "moyal-r2", "moyal-r4", "standard2", "standard4", "shear4"} <= set(names)
    for m in (2, 4):
        s = Session()
        s.run(read_data(f"moyal-r{m}"))
        assert s.names["mu"] == moyal_star(standard_pair(s.ctx), s.ctx)
    s = Session(m=4)
    s.run(read_data("shear4"))
    pair = shear_pair(s.ctx)
    assert s.names["omega"] == s.evaluate(print_canonical(s.names["omega"]))
    assert s.pair.omega_in(s.ctx) == pair.omega_in(s.ctx)
    assert s.pair.alpha_in(s.ctx) == pair.alpha_in(s.ctx)
    with pytest.raises(ParseError):
        read_data("no-such-example")


# -- round trips --------------------------------------------------------------------------

CTX = TruncationCtx(3, 2, (0, -1), 4, -4, 4)
SESSION = Session(m=3, g=2, degrees=(0, -1), N=4, eps_floor=-4, W=4)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_roundtrip_scalars_and_polyvectors(seed):
    rng = rng_for(seed)
    for v in (random_scalar(rng, CTX), random_polyvector(rng, CTX, homogeneous=False)):
        back, text = roundtrip(SESSION, v)
        assert back == v or (not v and not back), text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_roundtrip_forms_and_operators(seed):
    rng = rng_for(seed)
    f = random_form(rng, CTX, homogeneous=False, k0_range=(-1, 2))
    back, text = roundtrip(SESSION, LOmegaElem(f))
    assert back == LOmegaElem(f), text
    op = random_op(rng, CTX, rng.randint(0, 3), homogeneous=False)
    back, text = roundtrip(SESSION, op)
    assert back == op, text


def test_roundtrip_words():
    ctx = TruncationCtx(2)
    s = Session(m=2)
    for n in (1, 2, 3):
        for ws in random_words(rng_for(n), ctx, n, 10):
            back, text = roundtrip(s, ws)
            assert isinstance(back, WordSum) and back == ws, text
    back, _ = roundtrip(s, WordSum.zero(random_words(rng_for(0), ctx, 1, 1)[0].carrier))
    assert not back
