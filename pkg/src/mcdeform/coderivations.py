"""Coderivations of the cofree cocommutative coalgebra on a suspended carrier.

A word is a graded-symmetric product of atoms.  Each atom is one monomial key of
the carrier (a form for L_Omega) standing for s^-1 of that L-element, so its
coalgebra degree is the L-degree minus one.  Words are stored with their atoms
sorted canonically and the Koszul sign folded into the coefficient.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .deformation import (DglaContext, MCElement, PathElem, Report, mc_check,
                          omega_context, omega_zero_context, pv_context)
from .errors import ArgumentError, ContractError, DegreeError, MembershipError, PreconditionError
from .forms import ExteriorForm, LOmegaElem, contract_dx, de_rham, j_omega, space_membership
from .polydiff import PolyDiffOp
from .polyvectors import Polyvector
from .scalars import BaseSeries, koszul_sign, sort_key


# -- carriers ----------------------------------------------------------------------

class Carrier:
    """How atoms of a kernel value type are built and graded."""

    def __init__(self, ctx, kind):
        self.ctx = ctx
        self.kind = kind

    def value(self, key):
        if self.kind == "Omega":
            return LOmegaElem(ExteriorForm(self.ctx, {key: 1}, _clean=True))
        if self.kind == "PV":
            return Polyvector(self.ctx, {key: 1}, _clean=True)
        return PolyDiffOp(self.ctx, {key: Fraction(1)}, _clean=True)

    def zero(self):
        if self.kind == "Omega":
            return LOmegaElem.zero(self.ctx)
        if self.kind == "PV":
            return Polyvector.zero(self.ctx)
        return PolyDiffOp.zero(self.ctx)

    def degree(self, key):
        """Coalgebra degree of the atom: L-degree minus one."""
        return len(key[3]) - 2 + self.ctx.param_degree(key[1])

    def atom_sort_key(self, key):
        if self.kind == "PD":
            k0, ks, xs, slots = key
            return (len(slots), slots, k0, ks, xs)
        return sort_key(key)


def carrier_of(value):
    if isinstance(value, LOmegaElem):
        return Carrier(value.ctx, "Omega")
    if isinstance(value, Polyvector):
        return Carrier(value.ctx, "PV")
    if isinstance(value, PolyDiffOp):
        return Carrier(value.ctx, "PD")
    raise ArgumentError(f"no coalgebra carrier for {type(value).__name__}")


# -- words -------------------------------------------------------------------------

def canonical_word(carrier, atoms):
    """Sort a sequence of atoms; returns (sign, word) with sign 0 if it vanishes."""
    atoms = list(atoms)
    order = sorted(range(len(atoms)), key=lambda i: carrier.atom_sort_key(atoms[i]))
    degs = [carrier.degree(a) for a in atoms]
    sign = koszul_sign(order, degs)
    word = tuple(atoms[i] for i in order)
    for a, b in zip(word, word[1:]):
        if a == b and carrier.degree(a) % 2:
            return 0, None
    return sign, word


class WordSum:
    """Finite linear combination of canonical words over one carrier."""

    __slots__ = ("carrier", "terms")

    def __init__(self, carrier, terms=None):
        self.carrier = carrier
        self.terms = {w: c for w, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls, carrier):
        return cls(carrier)

    @classmethod
    def word(cls, carrier, atoms, coeff=1):
        """The word of the given atoms (in any order), with Koszul sign applied."""
        sign, w = canonical_word(carrier, atoms)
        if not sign:
            return cls(carrier)
        return cls(carrier, {w: sign * Fraction(coeff)})

    @classmethod
    def of_values(cls, values):
        """The product s^-1 v_1 ... s^-1 v_n, expanded multilinearly over monomials."""
        if not values:
            raise ArgumentError("need at least one factor")
        carrier = carrier_of(values[0])
        out = cls(carrier)
        for combo in itertools.product(*[list(v.terms.items()) for v in values]):
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            out.add_word([k for k, _ in combo], coeff)
        return out

    def add_word(self, atoms, coeff):
        sign, w = canonical_word(self.carrier, atoms)
        if not sign:
            return
        v = self.terms.get(w, 0) + sign * coeff
        if v:
            self.terms[w] = v
        else:
            self.terms.pop(w, None)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        out = WordSum(self.carrier, dict(self.terms))
        for w, c in other.terms.items():
            v = out.terms.get(w, 0) + c
            if v:
                out.terms[w] = v
            else:
                out.terms.pop(w, None)
        return out

    def __neg__(self):
        return WordSum(self.carrier, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return WordSum(self.carrier, {w: c * v for w, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, WordSum) and self.terms == other.terms

    def lengths(self):
        return {len(w) for w in self.terms}

    def part(self, n):
        return WordSum(self.carrier, {w: c for w, c in self.terms.items() if len(w) == n})

    def projection(self):
        """p: the length-one part as a carrier value."""
        out = self.carrier.zero()
        for w, c in self.terms.items():
            if len(w) == 1:
                out = out + self.carrier.value(w[0]).scale(c)
        return out

    def __mul__(self, other):
        """Graded-symmetric product of words."""
        out = WordSum(self.carrier)
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out.add_word(w1 + w2, c1 * c2)
        return out

    def __str__(self):
        return words_text(self)

    def __repr__(self):
        return f"WordSum({self})"


def word_text(carrier, w):
    return "word(" + ", ".join(str(carrier.value(a)) for a in w) + ")"


def words_text(ws):
    if not ws.terms:
        return "0 * word()"
    items = sorted(ws.terms.items(), key=lambda it: (len(it[0]), [ws.carrier.atom_sort_key(a) for a in it[0]]))
    parts = []
    for w, c in items:
        body = word_text(ws.carrier, w)
        parts.append(body if c == 1 else f"{c} * {body}")
    return " + ".join(parts)


def value_to_words(value):
    """A carrier value as a sum of length-one words."""
    carrier = carrier_of(value)
    return WordSum(carrier, {(k,): c for k, c in value.terms.items()})


# -- comultiplication ---------------------------------------------------------------

def _unshuffles(n, p):
    for first in itertools.combinations(range(n), p):
        rest = tuple(i for i in range(n) if i not in first)
        yield first, rest


def comult(carrier, word, coeff=1):
    """Reduced coproduct of one word: list of (left word, right word, sign * coeff)."""
    n = len(word)
    degs = [carrier.degree(a) for a in word]
    out = []
    for p in range(1, n):
        for first, rest in _unshuffles(n, p):
            s = koszul_sign(first + rest, degs)
            s1, w1 = canonical_word(carrier, [word[i] for i in first])
            s2, w2 = canonical_word(carrier, [word[i] for i in rest])
            if s1 and s2:
                out.append((w1, w2, s * s1 * s2 * Fraction(coeff)))
    return out


def comult_sum(ws):
    """Reduced coproduct of a word sum, as a dict (left, right) -> coefficient."""
    out = {}
    for w, c in ws.terms.items():
        for w1, w2, s in comult(ws.carrier, w, c):
            v = out.get((w1, w2), 0) + s
            if v:
                out[(w1, w2)] = v
            else:
                out.pop((w1, w2), None)
    return out


# -- coderivations ------------------------------------------------------------------

class Coderivation:
    """A coderivation given by its corestriction p o D on words.

    ``taylor`` maps an arity n to a rule taking n atoms in canonical order and
    returning a carrier value.  The action on a word is the cofree extension:
    D(v_1..v_n) = sum over unshuffles (I, J) of sign * D_|I|(v_I) v_J.
    """

    def __init__(self, carrier, degree, taylor=None, name="D", max_arity=None):
        self.carrier = carrier
        self.degree = degree
        self.taylor = dict(taylor or {})
        self.name = name
        self.max_arity = max_arity

    def corestriction(self, word):
        rule = self.taylor.get(len(word))
        if rule is None:
            return self.carrier.zero()
        return rule(*word)

    def arities(self, n):
        if self.max_arity is not None:
            return range(1, min(n, self.max_arity) + 1)
        return [k for k in sorted(self.taylor) if k <= n]

    def apply_word(self, word, coeff=1):
        carrier = self.carrier
        n = len(word)
        degs = [carrier.degree(a) for a in word]
        out = WordSum(carrier)
        for k in self.arities(n):
            for first, rest in _unshuffles(n, k):
                s = koszul_sign(first + rest, degs)
                val = self.corestriction(tuple(word[i] for i in first))
                if not val:
                    continue
                tail = [word[i] for i in rest]
                for key, c in val.terms.items():
                    out.add_word([key] + tail, s * c * Fraction(coeff))
        return out

    def __call__(self, ws):
        out = WordSum(ws.carrier)
        for w, c in ws.terms.items():
            out = out + self.apply_word(w, c)
        return out


def ce_coderivation(L, carrier=None):
    """Chevalley-Eilenberg coderivation of a dg Lie algebra.

    p Q(s^-1 v) = s^-1 (d v) and p Q(s^-1 v1 s^-1 v2) = (-1)^(|v1|-1) s^-1 [v1, v2].
    """
    carrier = carrier or Carrier(L.ctx, L.carrier if L.carrier in ("PV", "PD") else "Omega")

    def q1(a):
        return L.diff(carrier.value(a))

    def q2(a, b):
        val = L.bracket(carrier.value(a), carrier.value(b))
        return -val if carrier.degree(a) % 2 else val

    return Coderivation(carrier, 1, {1: q1, 2: q2}, name=f"Q[{L.tag}]")


def _pair_alpha(pair, ctx):
    return pair.alpha_in(ctx)


def _atom_class(carrier, key):
    form = ExteriorForm(carrier.ctx, {key: 1}, _clean=True)
    if carrier.ctx.time and carrier.ctx.time_index in key[3]:
        return "L" if space_membership(form, "L") else None
    if space_membership(form, "Ltilde"):
        return "Ltilde"
    return "L" if space_membership(form, "L") else None


def pi_bilinear(eta1, eta2, alpha):
    """(-1)^|eta1| eps alpha^{ij} (d eta1/d dx^i)(d eta2/d dx^j), extended bilinearly."""
    ctx = eta1.ctx
    m = ctx.m
    eps = BaseSeries.eps(ctx)
    out = ExteriorForm.zero(ctx)
    c2 = [contract_dx(j, eta2) for j in range(1, m + 1)]
    for deg, part in eta1.homogeneous_parts().items():
        acc = ExteriorForm.zero(ctx)
        c1 = [contract_dx(i, part) for i in range(1, m + 1)]
        for i in range(m):
            if not c1[i]:
                continue
            for j in range(m):
                a = alpha[i][j]
                if a and c2[j]:
                    acc = acc + (eps * a) * c1[i] * c2[j]
        out = out - acc if deg % 2 else out + acc
    return out


def pi_coderivation(pair, ctx, check=True):
    """Degree-zero coderivation with the single Taylor coefficient Pi_2.

    With ``check`` each pair of atoms must have one factor in Ltilde and the
    other in L (Ltilde x L is the domain on which the output stays in L).
    """
    carrier = Carrier(ctx, "Omega")
    alpha = _pair_alpha(pair, ctx)

    def p2(a, b):
        if ctx.time and ctx.time_index in a[3] and ctx.time_index in b[3]:
            return LOmegaElem.zero(ctx)
        if check:
            ca, cb = _atom_class(carrier, a), _atom_class(carrier, b)
            if ca is None or cb is None or (ca != "Ltilde" and cb != "Ltilde"):
                raise MembershipError("Pi needs one argument in Ltilde and the other in L")
        fa = ExteriorForm(ctx, {a: 1}, _clean=True)
        fb = ExteriorForm(ctx, {b: 1}, _clean=True)
        return LOmegaElem(pi_bilinear(fa, fb, alpha))

    return Coderivation(carrier, 0, {2: p2}, name="Pi")


def compose_apply(D1, D2, ws):
    return D1(D2(ws))


def coder_commutator(D1, D2):
    """Graded commutator D1 D2 - (-1)^(|D1||D2|) D2 D1, built from its corestriction."""
    sign = -1 if (D1.degree * D2.degree) % 2 else 1

    def core(*word):
        ws = WordSum(D1.carrier, {tuple(word): Fraction(1)})
        val = D1(D2(ws))
        other = D2(D1(ws))
        return (val - other.scale(sign)).projection()

    out = Coderivation(D1.carrier, D1.degree + D2.degree, name=f"[{D1.name},{D2.name}]",
                       max_arity=(D1.carrier.ctx.W))
    out.corestriction = lambda word: core(*word)
    return out


def coder_sum(*Ds):
    def core(word):
        out = Ds[0].carrier.zero()
        for D in Ds:
            out = out + D.corestriction(word)
        return out

    max_ar = max((max(D.taylor) if D.taylor else (D.max_arity or 0)) for D in Ds)
    out = Coderivation(Ds[0].carrier, Ds[0].degree, name="+".join(D.name for D in Ds), max_arity=max_ar)
    out.corestriction = core
    return out


# -- exp(Pi) ----------------------------------------------------------------------

class LinftyMorphism:
    """Coalgebra map exp(s Pi) for s = +1 or -1.

    Pi shortens words by one, so the exponential is a finite sum on each word.
    """

    def __init__(self, Pi, sign=1):
        self.Pi = Pi
        self.sign = sign
        self.carrier = Pi.carrier

    def __call__(self, ws):
        out = ws
        cur = ws
        k = 0
        while cur:
            k += 1
            cur = self.Pi(cur).scale(Fraction(self.sign, k))
            out = out + cur
        return out

    def taylor(self, word):
        """F_n on one word: the length-one part of exp(s Pi)."""
        return self(WordSum(self.carrier, {tuple(word): Fraction(1)})).projection()

    def inverse(self):
        return LinftyMorphism(self.Pi, -self.sign)


def exp_pi(Pi):
    """exp(Pi) together with exp(-Pi)."""
    F = LinftyMorphism(Pi, 1)
    return F, F.inverse()


def coalgebra_morphism_defect(F, ws):
    """Delta F(w) - (F x F) Delta(w) as a dict of nonzero tensor coefficients."""
    lhs = comult_sum(F(ws))
    rhs = {}
    for (w1, w2), c in comult_sum(ws).items():
        a = F(WordSum(ws.carrier, {w1: Fraction(1)}))
        b = F(WordSum(ws.carrier, {w2: Fraction(1)}))
        for x, cx in a.terms.items():
            for y, cy in b.terms.items():
                rhs[(x, y)] = rhs.get((x, y), 0) + c * cx * cy
    keys = set(lhs) | set(rhs)
    return {k: lhs.get(k, 0) - rhs.get(k, 0) for k in keys if lhs.get(k, 0) != rhs.get(k, 0)}


# -- identities ----------------------------------------------------------------------

def pi_nice_residual(Pi, Qd, Qw, ws):
    """(Pi Q_-d - Q_-d Pi - Q_omega)(w)."""
    return Pi(Qd(ws)) - Qd(Pi(ws)) - Qw(ws)


def pi_bracket_residual(Pi, Qw, ws):
    """(Pi Q_omega - Q_omega Pi)(w)."""
    return Pi(Qw(ws)) - Qw(Pi(ws))


def conjugation_residual(F, Finv, Qd, Qw, ws):
    """exp(Pi) Q_-d exp(-Pi)(w) - (Q_-d + Q_omega)(w)."""
    return F(Qd(Finv(ws))) - Qd(ws) - Qw(ws)


def pi_setup(pair, ctx):
    Pi = pi_coderivation(pair, ctx)
    Qd = ce_coderivation(omega_zero_context(ctx))
    Qw = ce_coderivation(DglaContext("Omega-bracket", "Omega", ctx, lambda a: LOmegaElem.zero(ctx),
                                     omega_context(pair, ctx).bracket))
    return Pi, Qd, Qw


def verify_pi_identities(pair, ctx, words2, words3):
    """Check Pi Q_-d - Q_-d Pi = Q_omega on length-2 words and [Pi, Q_omega] = 0 on length-3 words."""
    Pi, Qd, Qw = pi_setup(pair, ctx)
    rep = Report("pi-verify", True, None, f"{pair.name}:{ctx.tag()}")
    fail_nice = fail_br = None
    # samples where the identity compares nonzero sides; at low N the second one is often vacuous
    live = [0, 0]
    for ws in words2:
        live[0] += bool(Qw(ws))
        r = pi_nice_residual(Pi, Qd, Qw, ws)
        if r:
            fail_nice = fail_nice or (ws, r)
    for ws in words3:
        live[1] += bool(Pi(Qw(ws)))
        r = pi_bracket_residual(Pi, Qw, ws)
        if r:
            fail_br = fail_br or (ws, r)
    rep.extra["pi_nice"] = fail_nice is None
    rep.extra["pi_bracket"] = fail_br is None
    rep.extra["samples"] = [len(words2), len(words3)]
    rep.extra["nontrivial"] = live
    if fail_nice or fail_br:
        rep.status = False
        ws, r = fail_nice or fail_br
        rep.first_failure_key = str(ws)
        rep.residual = str(r)
    return rep


# -- pushforward of MC elements --------------------------------------------------------

def _flow_limit(ctx):
    return 4 * (ctx.N - ctx.eps_floor) + 8


def pushforward_mc(F, mu):
    """F_*(mu) = sum_n F_n((s^-1 mu)^n)/n! for F = exp(s Pi).

    exp(u Pi) maps exp(s^-1 mu) to exp(s^-1 y(u)) with y' = s/2 Pi_2(y, y), so the
    sum is y(1) = sum_k y_k with y_(k+1) = s/(2(k+1)) sum_(a+b=k) Pi_2(y_a, y_b).
    The series stops once a coefficient vanishes in the truncation.
    """
    if isinstance(mu, MCElement):
        mu = mu.value
    if isinstance(mu, PathElem):
        return PathElem.from_combined(pushforward_mc(F, mu.combined()))
    if F is None:
        return mu
    if not mu:
        return mu
    ctx = mu.ctx
    if mu.m_order() < 1:
        raise DegreeError("an MC element needs positive filtration order")
    rule = F.Pi.taylor[2]
    ys = [mu]
    total = mu
    k = 0
    while ys[-1]:
        acc = LOmegaElem.zero(ctx)
        for a in range(k + 1):
            acc = acc + _pi2_values(rule, ys[a], ys[k - a])
        nxt = acc.scale(Fraction(F.sign, 2 * (k + 1)))
        ys.append(nxt)
        total = total + nxt
        k += 1
        if k > _flow_limit(ctx):
            raise ContractError("pushforward series does not terminate in the truncation")
    return total


def _pi2_values(rule, u, v):
    out = LOmegaElem.zero(u.ctx)
    for ka, ca in u.terms.items():
        for kb, cb in v.terms.items():
            r = rule(ka, kb)
            if r:
                out = out + r.scale(ca * cb)
    return out


def pushforward_words(F, mu, n_max):
    """The same series evaluated literally on word powers up to length n_max."""
    if isinstance(mu, MCElement):
        mu = mu.value
    ws = value_to_words(mu)
    power = ws
    total = LOmegaElem.zero(mu.ctx)
    for n in range(1, n_max + 1):
        total = total + F(power).projection().scale(Fraction(1, math.factorial(n)))
        power = power * ws
        if not power:
            break
    return total


# -- the pipeline ---------------------------------------------------------------------

def in_ltilde_pv(v):
    """eps m PV: every term has eps-exponent >= 1 and (term / eps) has order >= 1."""
    ctx = v.ctx
    return all(k[0] >= 1 and ctx.order(k[0] - 1, k[1]) >= 1 for k in v.terms)


def theta_pi_pipeline(eta, pair):
    """Closed data in Ltilde -> exp(Pi)_* -> MC for [,]_omega -> inverse transport -> MC in PV."""
    if isinstance(eta, MCElement):
        eta = eta.value
    ctx = eta.ctx
    Lw = omega_context(pair, ctx)
    Lpv = pv_context(pair, ctx)
    if not eta:
        zero_pv = Polyvector.zero(ctx)
        return (MCElement(eta, Lw, mc_check(eta, Lw)), MCElement(zero_pv, Lpv, mc_check(zero_pv, Lpv)))
    if eta.degree() != 1:
        raise DegreeError("pipeline input must have degree 1")
    if de_rham(eta.form):
        raise PreconditionError("pipeline input is not closed")
    if not space_membership(eta, "Ltilde"):
        raise MembershipError("pipeline input is not in Ltilde")
    F, _ = exp_pi(pi_coderivation(pair, ctx))
    y = pushforward_mc(F, eta)
    rep_w = mc_check(y, Lw)
    if not space_membership(y, "Ltilde"):
        raise MembershipError("pushforward left Ltilde")
    v = j_omega(y, pair, "inverse")
    rep_pv = mc_check(v, Lpv)
    rep_pv.extra["in_ltilde_pv"] = in_ltilde_pv(v)
    if not rep_pv.extra["in_ltilde_pv"]:
        rep_pv.status = False
        rep_pv.first_failure_key = rep_pv.first_failure_key or "not in eps m PV"
    return MCElement(y, Lw, rep_w), MCElement(v, Lpv, rep_pv)


def higher_components(v, min_thetas=3):
    """Terms of a polyvector with at least ``min_thetas`` thetas."""
    return v.filter(lambda k: len(k[3]) >= min_thetas)


__all__ = [
    "Carrier", "WordSum", "canonical_word", "comult", "comult_sum", "Coderivation", "ce_coderivation",
    "pi_coderivation", "pi_bilinear", "coder_commutator", "coder_sum", "LinftyMorphism", "exp_pi",
    "coalgebra_morphism_defect", "verify_pi_identities", "pi_nice_residual", "pi_bracket_residual",
    "conjugation_residual", "pushforward_mc", "pushforward_words", "theta_pi_pipeline", "higher_components",
    "in_ltilde_pv", "value_to_words", "words_text", "pi_setup",
]
