"""Seeded random generators for kernel values, used by tests and the CLI."""
from __future__ import annotations

import random
from fractions import Fraction

from .coderivations import Carrier, WordSum
from .forms import ExteriorForm, LOmegaElem, space_membership
from .polydiff import PolyDiffOp
from .polyvectors import Polyvector
from .scalars import BaseSeries


def rng_for(seed):
    return random.Random(seed)


def coeff(rng, lo=-3, hi=3):
    c = 0
    while c == 0:
        c = rng.randint(lo, hi)
    if rng.random() < 0.25:
        return Fraction(c, rng.choice([2, 3]))
    return Fraction(c)


def _xs(rng, ctx, max_xdeg):
    xs = [0] * ctx.nvars
    for _ in range(rng.randint(0, max_xdeg)):
        xs[rng.randrange(ctx.m)] += 1
    return tuple(xs)


def _ks(rng, ctx, budget):
    ks = [0] * ctx.g
    for _ in range(rng.randint(0, budget)):
        if ctx.g:
            a = rng.randrange(ctx.g)
            if ctx.param_degrees[a] % 2 and ks[a]:
                continue
            ks[a] += 1
    return tuple(ks)


def _odd(rng, count, n):
    return tuple(sorted(rng.sample(range(1, n + 1), count)))


def _homogeneous(cls, ctx, terms, degree_of):
    """Keep the monomials of the most common degree so the value is homogeneous."""
    if not terms:
        return cls.zero(ctx)
    groups = {}
    for k, c in terms.items():
        groups.setdefault(degree_of(k), {})[k] = c
    best = max(sorted(groups), key=lambda d: len(groups[d]))
    return cls(ctx, groups[best])


def random_scalar(rng, ctx, n_terms=3, max_xdeg=2, k0_range=(0, 2), ks_budget=1):
    terms = {}
    for _ in range(n_terms):
        key = (rng.randint(*k0_range), _ks(rng, ctx, ks_budget), _xs(rng, ctx, max_xdeg), ())
        terms[key] = coeff(rng)
    return BaseSeries(ctx, terms)


def random_polyvector(rng, ctx, n_terms=3, max_xdeg=2, max_theta=3, k0_range=(0, 2), ks_budget=1,
                      homogeneous=True, min_theta=0):
    terms = {}
    for _ in range(n_terms):
        q = rng.randint(min_theta, min(max_theta, ctx.m))
        key = (rng.randint(*k0_range), _ks(rng, ctx, ks_budget), _xs(rng, ctx, max_xdeg), _odd(rng, q, ctx.m))
        terms[key] = coeff(rng)
    if not homogeneous:
        return Polyvector(ctx, terms)
    p = Polyvector.zero(ctx)
    return _homogeneous(Polyvector, ctx, terms, p.key_degree)


def random_form(rng, ctx, n_terms=3, max_xdeg=2, max_q=None, k0_range=(0, 2), ks_budget=1, homogeneous=True,
                min_q=0):
    max_q = ctx.m if max_q is None else max_q
    terms = {}
    for _ in range(n_terms):
        q = rng.randint(min_q, min(max_q, ctx.m))
        key = (rng.randint(*k0_range), _ks(rng, ctx, ks_budget), _xs(rng, ctx, max_xdeg), _odd(rng, q, ctx.m))
        terms[key] = coeff(rng)
    if not homogeneous:
        return ExteriorForm(ctx, terms)
    f = ExteriorForm.zero(ctx)
    return _homogeneous(ExteriorForm, ctx, terms, f.key_degree)


def random_ltilde_atom(rng, ctx, max_xdeg=1, extra_order=1, max_q=None):
    """A monomial key of a form in Ltilde: eps-exponent >= -(q-1) with one spare order."""
    max_q = ctx.m if max_q is None else max_q
    while True:
        q = rng.randint(0, min(max_q, ctx.m))
        ks = _ks(rng, ctx, 1)
        low = -(q - 1)
        k0 = rng.randint(low, low + extra_order + 1)
        key = (k0, ks, _xs(rng, ctx, max_xdeg), _odd(rng, q, ctx.m))
        f = ExteriorForm(ctx, {key: 1})
        if f and space_membership(f, "Ltilde"):
            return key


def random_ltilde(rng, ctx, n_terms=2, **kw):
    terms = {random_ltilde_atom(rng, ctx, **kw): coeff(rng) for _ in range(n_terms)}
    return LOmegaElem(ExteriorForm(ctx, terms))


def random_words(rng, ctx, length, count, **kw):
    """Random words of the given length made of Ltilde atoms, each with a random coefficient.

    Atoms default to the lowest admissible eps-exponent so brackets survive the truncation.
    """
    kw = {"extra_order": 0, "max_xdeg": 2, **kw}
    carrier = Carrier(ctx, "Omega")
    out = []
    while len(out) < count:
        atoms = [random_ltilde_atom(rng, ctx, **kw) for _ in range(length)]
        ws = WordSum.word(carrier, atoms, coeff(rng))
        if ws:
            out.append(ws)
    return out


def random_op(rng, ctx, arity, n_terms=3, max_order=2, max_xdeg=2, k0_range=(0, 2), ks_budget=1,
              homogeneous=True):
    terms = {}
    for _ in range(n_terms):
        slots = []
        for _ in range(arity):
            size = rng.randint(0, max_order)
            slots.append(tuple(sorted(rng.randint(1, ctx.m) for _ in range(size))))
        key = (rng.randint(*k0_range), _ks(rng, ctx, ks_budget), _xs(rng, ctx, max_xdeg), tuple(slots))
        terms[key] = coeff(rng)
    op = PolyDiffOp(ctx, terms)
    if not homogeneous or not op:
        return op
    parts = op.homogeneous_parts()
    best = max(sorted(parts), key=lambda d: len(parts[d].terms))
    return parts[best]


__all__ = [
    "rng_for", "coeff", "random_scalar", "random_polyvector", "random_form", "random_ltilde_atom", "random_ltilde",
    "random_words", "random_op",
]
