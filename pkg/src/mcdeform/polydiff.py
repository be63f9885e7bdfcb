"""Polydifferential operators: Gerstenhaber bracket, Hochschild differential, HKR maps, Moyal series."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .errors import ArgumentError, ContextError, DegreeError, MalformedMCError, UnsupportedError
from .polyvectors import Polyvector, as_polyvector, bivector
from .scalars import BaseSeries, GradedPoly, as_fraction, monomial_text, param_product, perm_sign

# A term key is (k0, ks, xs, slots): coefficient monomial eps^k0 e^ks x^xs and one
# sorted multi-index per argument slot.


class PolyDiffOp:
    """Finite sum of coefficient * d_{a_0} (x) d_{a_1} (x) ... (x) d_{a_k}.

    The degree of a term is k plus the parameter degree of its coefficient.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms=None, _clean=False):
        self.ctx = ctx
        if _clean:
            self.terms = terms
            return
        out = {}
        for (k0, ks, xs, slots), c in (terms or {}).items():
            c = as_fraction(c)
            if not c or not ctx.keeps(k0, ks):
                continue
            if any(k > 1 and d % 2 for k, d in zip(ks, ctx.param_degrees)):
                continue
            key = (k0, tuple(ks), tuple(xs), tuple(tuple(sorted(s)) for s in slots))
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        self.terms = out

    # constructors
    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {}, _clean=True)

    @classmethod
    def from_slots(cls, ctx, slots, coeff=1):
        """coeff * d_{slots[0]} (x) ... ; coeff is a number or a BaseSeries."""
        if not isinstance(coeff, GradedPoly):
            coeff = BaseSeries.const(ctx, coeff)
        for s in slots:
            for i in s:
                if not 1 <= i <= ctx.m:
                    raise ArgumentError(f"derivative index {i} out of range")
        slots = tuple(tuple(sorted(s)) for s in slots)
        return cls(ctx, {(k0, ks, xs, slots): c for (k0, ks, xs, _), c in coeff.terms.items()})

    @classmethod
    def product(cls, ctx):
        return cls.from_slots(ctx, ((), ()))

    @classmethod
    def derivation(cls, ctx, i):
        return cls.from_slots(ctx, ((i,),))

    @classmethod
    def function(cls, f):
        return cls.from_slots(f.ctx, (), f)

    # protocol
    def new(self, terms, _clean=False):
        return PolyDiffOp(self.ctx, terms, _clean)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if not isinstance(other, PolyDiffOp):
            raise ArgumentError(f"expected an operator, got {type(other).__name__}")
        if self.ctx != other.ctx:
            raise ContextError("operands belong to different truncation contexts")

    def __add__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return PolyDiffOp(self.ctx, out, _clean=True)

    def __neg__(self):
        return PolyDiffOp(self.ctx, {k: -c for k, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = as_fraction(c)
        if not c:
            return PolyDiffOp.zero(self.ctx)
        return PolyDiffOp(self.ctx, {k: c * v for k, v in self.terms.items()}, _clean=True)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        if isinstance(c, GradedPoly) and c.kind == "scalar":
            return left_multiply(c, self)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PolyDiffOp({self})"

    def __str__(self):
        return op_text(self)

    # degrees
    def key_degree(self, key):
        return len(key[3]) - 1 + self.ctx.param_degree(key[1])

    def degrees(self):
        return {self.key_degree(k) for k in self.terms}

    def degree(self):
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise DegreeError(f"inhomogeneous operator with degrees {sorted(ds)}")
        return ds.pop()

    def arities(self):
        return {len(k[3]) for k in self.terms}

    def homogeneous_parts(self):
        parts = {}
        for k, c in self.terms.items():
            parts.setdefault(self.key_degree(k), {})[k] = c
        return {d: PolyDiffOp(self.ctx, t, _clean=True) for d, t in sorted(parts.items())}

    def by_arity(self):
        parts = {}
        for k, c in self.terms.items():
            parts.setdefault(len(k[3]), {})[k] = c
        return {n: PolyDiffOp(self.ctx, t, _clean=True) for n, t in sorted(parts.items())}

    def filter(self, pred):
        return PolyDiffOp(self.ctx, {k: c for k, c in self.terms.items() if pred(k)}, _clean=True)

    def m_order(self):
        if not self.terms:
            return math.inf
        return min(self.ctx.order(k[0], k[1]) for k in self.terms)

    def max_slot_order(self):
        return max((sum(len(s) for s in k[3]) for k in self.terms), default=0)


def left_multiply(c, op):
    """c * op for a base series c placed to the left of the operator's coefficient."""
    ctx = op.ctx
    out = {}
    for (k0a, ksa, xsa, _), ca in c.terms.items():
        for (k0b, ksb, xsb, slots), cb in op.terms.items():
            s, ks = param_product(ctx, ksa, ksb)
            if not s or not ctx.keeps(k0a + k0b, ks):
                continue
            key = (k0a + k0b, ks, tuple(a + b for a, b in zip(xsa, xsb)), slots)
            out[key] = out.get(key, 0) + s * ca * cb
    return PolyDiffOp(ctx, out)


# -- symbol calculus ------------------------------------------------------------

def _diff_monomial(xs, idx):
    """d_idx applied to x^xs: returns (factor, new xs) or (0, None)."""
    xs = list(xs)
    f = 1
    for i in idx:
        e = xs[i - 1]
        if not e:
            return 0, None
        f *= e
        xs[i - 1] = e - 1
    return f, tuple(xs)


def _insert(xs_p, slots_p, xs_q, slots_q, i):
    """Pure insertion P o_i Q of single terms, with Leibniz expansion of d_{slots_p[i]}.

    Returns a dict (xs, slots) -> integer multiplicity.
    """
    alpha = slots_p[i]
    targets = len(slots_q) + 1  # 0 is the coefficient of Q, j+1 is Q's slot j
    out = {}
    for assign in itertools.product(range(targets), repeat=len(alpha)):
        coef_idx = [alpha[p] for p, t in enumerate(assign) if t == 0]
        f, dxs = _diff_monomial(xs_q, coef_idx)
        if not f:
            continue
        new_q = []
        for j, s in enumerate(slots_q):
            extra = [alpha[p] for p, t in enumerate(assign) if t == j + 1]
            new_q.append(tuple(sorted(s + tuple(extra))))
        slots = slots_p[:i] + tuple(new_q) + slots_p[i + 1:]
        key = (tuple(a + b for a, b in zip(xs_p, dxs)), slots)
        out[key] = out.get(key, 0) + f
    return out


def _pure_bracket(xs_p, slots_p, xs_q, slots_q):
    kp, kq = len(slots_p) - 1, len(slots_q) - 1
    out = {}

    def add(d, sign):
        for k, v in d.items():
            out[k] = out.get(k, 0) + sign * v

    for i in range(len(slots_p)):
        add(_insert(xs_p, slots_p, xs_q, slots_q, i), -1 if (i * kq) % 2 else 1)
    outer = -1 if (kp * kq) % 2 else 1
    for i in range(len(slots_q)):
        add(_insert(xs_q, slots_q, xs_p, slots_p, i), -outer * (-1 if (i * kp) % 2 else 1))
    return out


def _coefficient_sign(ctx, kp, ksp, ksq):
    """Sign and parameter exponents for [c_P P0, c_Q Q0] = (-1)^{k_P |c_Q|} c_P c_Q [P0, Q0]."""
    s, ks = param_product(ctx, ksp, ksq)
    if not s:
        return 0, None
    if kp % 2 and ctx.param_degree(ksq) % 2:
        s = -s
    return s, ks


def gerstenhaber(P, Q):
    """Gerstenhaber bracket computed by symbolic operator insertion."""
    P._check(Q)
    ctx = P.ctx
    out = {}
    for (k0p, ksp, xsp, slp), cp in P.terms.items():
        for (k0q, ksq, xsq, slq), cq in Q.terms.items():
            s, ks = _coefficient_sign(ctx, len(slp) - 1, ksp, ksq)
            if not s or not ctx.keeps(k0p + k0q, ks):
                continue
            c = s * cp * cq
            for (xs, slots), v in _pure_bracket(xsp, slp, xsq, slq).items():
                if v:
                    key = (k0p + k0q, ks, xs, slots)
                    out[key] = out.get(key, 0) + c * v
    return PolyDiffOp(ctx, out)


def hochschild_d(P):
    """[m, P] with m the commutative product."""
    return gerstenhaber(PolyDiffOp.product(P.ctx), P)


def cup(P, Q):
    """Concatenation product: (P cup Q)(a_0..) = P(a_0..a_k1) Q(a_k1+1..).

    A parameter in Q's coefficient passes P, a cochain of degree arity(P).
    """
    P._check(Q)
    ctx = P.ctx
    out = {}
    for (k0p, ksp, xsp, slp), cp in P.terms.items():
        for (k0q, ksq, xsq, slq), cq in Q.terms.items():
            s, ks = param_product(ctx, ksp, ksq)
            if not s or not ctx.keeps(k0p + k0q, ks):
                continue
            if len(slp) % 2 and ctx.param_degree(ksq) % 2:
                s = -s
            key = (k0p + k0q, ks, tuple(a + b for a, b in zip(xsp, xsq)), slp + slq)
            out[key] = out.get(key, 0) + s * cp * cq
    return PolyDiffOp(ctx, out)


# -- evaluation -----------------------------------------------------------------

def _derive(a, idx):
    for i in idx:
        a = a.dx_partial(i)
        if not a:
            break
    return a


def _check_args(args):
    for a in args:
        if any(a.ctx.param_degree(k[1]) for k in a.terms):
            raise ArgumentError("arguments must have parameter degree zero")


def evaluate(P, args):
    """Apply the operator to base-series arguments."""
    args = list(args)
    _check_args(args)
    ctx = P.ctx
    out = BaseSeries.zero(ctx)
    for (k0, ks, xs, slots), c in P.terms.items():
        if len(slots) != len(args):
            raise ArgumentError(f"operator of arity {len(slots)} applied to {len(args)} arguments")
        val = BaseSeries(ctx, {(k0, ks, xs, ()): c}, _clean=True)
        for s, a in zip(slots, args):
            val = val * _derive(a, s)
            if not val:
                break
        out = out + val
    return out


def _pure_term(ctx, xs, slots):
    return PolyDiffOp(ctx, {(0, ctx.zero_ks(), xs, slots): 1}, _clean=True)


def gerstenhaber_eval(P, Q, args):
    """Evaluate [P, Q] on arguments by composing evaluations (no symbol calculus)."""
    P._check(Q)
    ctx = P.ctx
    args = list(args)
    out = BaseSeries.zero(ctx)
    for (k0p, ksp, xsp, slp), cp in P.terms.items():
        for (k0q, ksq, xsq, slq), cq in Q.terms.items():
            kp, kq = len(slp) - 1, len(slq) - 1
            if len(args) != kp + kq + 1:
                raise ArgumentError("wrong number of arguments for the bracket")
            s, ks = _coefficient_sign(ctx, kp, ksp, ksq)
            if not s or not ctx.keeps(k0p + k0q, ks):
                continue
            p0, q0 = _pure_term(ctx, xsp, slp), _pure_term(ctx, xsq, slq)
            val = _compose_eval(p0, q0, kp, kq, args)
            val = val - _compose_eval(q0, p0, kq, kp, args).scale(-1 if (kp * kq) % 2 else 1)
            if val:
                coef = BaseSeries(ctx, {(k0p + k0q, ks, ctx.zero_xs(), ()): s * cp * cq})
                out = out + coef * val
    return out


def _compose_eval(p0, q0, kp, kq, args):
    ctx = p0.ctx
    out = BaseSeries.zero(ctx)
    for i in range(kp + 1):
        inner = evaluate(q0, args[i:i + kq + 1])
        outer_args = args[:i] + [inner] + args[i + kq + 1:]
        v = evaluate(p0, outer_args)
        out = out + (v.scale(-1) if (i * kq) % 2 else v)
    return out


def monomials(ctx, max_degree):
    """All coordinate monomials x^a with |a| <= max_degree, as base series."""
    out = []
    for total in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(ctx.m), total):
            xs = [0] * ctx.nvars
            for i in combo:
                xs[i] += 1
            out.append(BaseSeries.monomial(ctx, 1, xs=xs))
    return out


def argument_tuples(ctx, arity, total_degree):
    """Tuples of monomials whose degrees sum to at most total_degree."""
    by_degree = {}
    for mono in monomials(ctx, total_degree):
        d = sum(next(iter(mono.terms))[2])
        by_degree.setdefault(d, []).append(mono)

    def rec(n, budget):
        if n == 0:
            yield ()
            return
        for d in range(budget + 1):
            for mono in by_degree.get(d, []):
                for rest in rec(n - 1, budget - d):
                    yield (mono,) + rest

    yield from rec(arity, total_degree)


# -- HKR -------------------------------------------------------------------------

def hkr_embed(v):
    """Polyvector -> operator sum v^{i_0..i_k} (d_{i_k} a_0)(d_{i_(k-1)} a_1)...(d_{i_0} a_k).

    Components are fully antisymmetric, with theta_J (J increasing) having v^J = 1.
    """
    v = as_polyvector(v)
    ctx = v.ctx
    out = {}
    for (k0, ks, xs, odd), c in v.terms.items():
        for perm in itertools.permutations(odd):
            sign = perm_sign(perm)
            slots = tuple((i,) for i in reversed(perm))
            key = (k0, ks, xs, slots)
            out[key] = out.get(key, 0) + sign * c
    return PolyDiffOp(ctx, out)


def hkr_project(P):
    """Keep first-order terms in every slot, antisymmetrise over slots, read off components."""
    ctx = P.ctx
    out = {}
    for (k0, ks, xs, slots), c in P.terms.items():
        if any(len(s) != 1 for s in slots):
            continue
        idx = tuple(s[0] for s in slots)
        if len(set(idx)) != len(idx):
            continue
        n = len(idx)
        sign = perm_sign(idx) * (-1 if (n * (n - 1) // 2) % 2 else 1)
        key = (k0, ks, xs, tuple(sorted(idx)))
        out[key] = out.get(key, 0) + Fraction(sign, math.factorial(n)) * c
    return Polyvector(ctx, out)


# -- Moyal series -------------------------------------------------------------------

def _constant_entries(pair, ctx):
    alpha = pair.alpha_in(ctx)
    vals = []
    for row in alpha:
        r = []
        for p in row:
            if any(any(k[2]) for k in p.terms):
                raise UnsupportedError("the Moyal series needs constant alpha")
            r.append(sum(p.terms.values(), Fraction(0)))
        vals.append(r)
    return alpha, vals


def moyal_star(pair, ctx):
    """sum_n (c eps)^n / n! alpha^{i1j1}..alpha^{injn} d_{i1..in} (x) d_{j1..jn}, truncated.

    The constant c is fixed so that hkr_project of the order-eps term returns alpha.
    """
    alpha, vals = _constant_entries(pair, ctx)
    m = ctx.m
    first = {}
    for i in range(m):
        for j in range(m):
            if vals[i][j]:
                first[((i + 1,), (j + 1,))] = vals[i][j]
    if not first:
        return PolyDiffOp.zero(ctx)
    raw = PolyDiffOp(ctx, {(0, ctx.zero_ks(), ctx.zero_xs(), s): c for s, c in first.items()})
    target = bivector(ctx, alpha)
    proj = hkr_project(raw)
    scale = None
    for k, c in target.terms.items():
        r = c / proj.terms.get(k, Fraction(0)) if proj.terms.get(k) else None
        if r is None or (scale is not None and r != scale):
            raise UnsupportedError("calibration failed")
        scale = r
    if set(proj.terms) != set(target.terms):
        raise UnsupportedError("calibration failed")
    out = {}
    power = {((), ()): Fraction(1)}
    for n in range(1, ctx.N + 1):
        nxt = {}
        for (I, J), c in power.items():
            for (i,), (j,) in [(s[0], s[1]) for s in first]:
                key = (tuple(sorted(I + (i,))), tuple(sorted(J + (j,))))
                nxt[key] = nxt.get(key, 0) + c * vals[i - 1][j - 1]
        power = nxt
        f = scale ** n / math.factorial(n)
        for (I, J), c in power.items():
            if c:
                key = (n, ctx.zero_ks(), ctx.zero_xs(), (I, J))
                out[key] = out.get(key, 0) + f * c
    return PolyDiffOp(ctx, out)


# -- gauge intertwiner ------------------------------------------------------------------

def t_xi(xi, a):
    """a + sum_k xi^k(a) / k! for an arity-one operator xi of positive order."""
    if xi and xi.arities() != {1}:
        raise ArgumentError("xi must have arity one")
    if xi and xi.m_order() < 1:
        raise ArgumentError("xi must have positive m-adic order")
    out = a
    cur = a
    k = 0
    while True:
        k += 1
        cur = evaluate(xi, [cur]) if xi else BaseSeries.zero(a.ctx)
        if not cur:
            break
        out = out + cur.scale(Fraction(1, math.factorial(k)))
        if k > 4 * a.ctx.N + 8:
            raise ArithmeticError("exponential series failed to terminate")
    return out


def star_product(mu, a, b):
    """a ._mu b = ab + mu(a, b) using the arity-two part of mu."""
    two = mu.by_arity().get(2, PolyDiffOp.zero(mu.ctx))
    return a * b + evaluate(two, [a, b])


# -- A-infinity structures -------------------------------------------------------------

class AInftyStructure:
    """Multiplications m_n read off from an MC element by arity."""

    def __init__(self, ctx, ms, n_max):
        self.ctx = ctx
        self.ms = ms
        self.n_max = n_max

    def m(self, n):
        return self.ms.get(n, PolyDiffOp.zero(self.ctx))

    def total(self):
        out = PolyDiffOp.zero(self.ctx)
        for op in self.ms.values():
            out = out + op
        return out

    def table(self):
        """Rows (arity, monomial key text, coefficient) in canonical order."""
        rows = []
        for n in sorted(self.ms):
            for key in sorted(self.ms[n].terms, key=_op_sort_key):
                rows.append((n, _op_key_text(self.ctx, key), str(self.ms[n].terms[key])))
        return rows


def arity_cutoff(ctx):
    return 2 + ctx.N * max([-d for d in ctx.param_degrees] + [1])


def ainfty_from_mc(mu):
    """m_2 = product + arity-two part, m_n = arity-n part; degrees must match arity."""
    ctx = mu.ctx
    for k in mu.terms:
        n = len(k[3])
        if ctx.param_degree(k[1]) != 2 - n:
            raise MalformedMCError(f"term {_op_key_text(ctx, k)} of arity {n} has the wrong parameter degree")
    ms = {n: op for n, op in mu.by_arity().items()}
    ms[2] = ms.get(2, PolyDiffOp.zero(ctx)) + PolyDiffOp.product(ctx)
    return AInftyStructure(ctx, dict(sorted(ms.items())), arity_cutoff(ctx))


def relation_component(A, n, symbolic=False, args=None):
    """Arity-n part of [m_total, m_total], symbolically or on given arguments."""
    total = None
    for i in A.ms:
        j = n + 1 - i
        if j not in A.ms:
            continue
        if symbolic:
            r = gerstenhaber(A.ms[i], A.ms[j])
        else:
            r = gerstenhaber_eval(A.ms[i], A.ms[j], args)
        total = r if total is None else total + r
    return total


def ainfty_relations_check(A, max_arity, D=4, symbolic=False):
    """Check [m_total, m_total] = 0 arity by arity up to max_arity.

    In evaluation mode each arity-n component is tested on all tuples of
    monomials of total degree at most min(D, r), where r bounds the total
    derivative order of that component.  When r <= D the test is complete,
    because an operator of total order r vanishes iff it vanishes on such tuples.
    """
    from .deformation import Report

    if max_arity > A.n_max:
        raise ArgumentError("max_arity exceeds the context cutoff")
    complete = True
    for n in range(3, max_arity + 1):
        pairs = [(i, n + 1 - i) for i in A.ms if (n + 1 - i) in A.ms]
        if not pairs:
            continue
        if symbolic:
            comp = relation_component(A, n, symbolic=True)
            if comp:
                key = min(comp.terms, key=lambda k: (A.ctx.order(k[0], k[1]), _op_sort_key(k)))
                return Report("stasheff", False, f"arity {n}: {_op_key_text(A.ctx, key)}", A.ctx.tag(),
                              residual=str(comp))
            continue
        r = max(A.ms[i].max_slot_order() + A.ms[j].max_slot_order() for i, j in pairs)
        bound = min(D, r)
        complete = complete and r <= D
        for args in argument_tuples(A.ctx, n, bound):
            val = relation_component(A, n, args=list(args))
            if val:
                where = ", ".join(str(a) for a in args)
                return Report("stasheff", False, f"arity {n}: ({where})", A.ctx.tag(), residual=str(val))
    rep = Report("stasheff", True, None, A.ctx.tag())
    rep.extra["complete"] = complete or symbolic
    return rep


# -- text -----------------------------------------------------------------------------

def _op_sort_key(key):
    k0, ks, xs, slots = key
    return (len(slots), slots, k0, ks, xs)


def _slot_text(s):
    return "D[" + ",".join(str(i) for i in s) + "]"


def _op_key_text(ctx, key, c=None):
    k0, ks, xs, slots = key
    coef = monomial_text(ctx, (k0, ks, xs, ()), "scalar")
    body = "⊗".join(_slot_text(s) for s in slots) if slots else "Dop[]"
    parts = []
    if c is not None and c != 1:
        parts.append(str(c))
    if coef:
        parts.append(coef)
    parts.append(body)
    return " * ".join(parts)


def op_text(P):
    if not P.terms:
        return "0 * Dop[]"
    return " + ".join(_op_key_text(P.ctx, k, P.terms[k]) for k in sorted(P.terms, key=_op_sort_key))


__all__ = [
    "PolyDiffOp", "gerstenhaber", "gerstenhaber_eval", "hochschild_d", "cup", "evaluate", "hkr_embed",
    "hkr_project", "moyal_star", "t_xi", "star_product", "AInftyStructure", "ainfty_from_mc",
    "ainfty_relations_check", "monomials", "argument_tuples", "op_text",
]
