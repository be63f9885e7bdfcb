"""Graded base ring: truncated series in eps, e_1..e_g with polynomial coefficients in x.

Every kernel value is a sparse map from monomial keys to rationals.  A key is
``(k0, ks, xs, odd)``:

* ``k0``  exponent of eps (may be negative),
* ``ks``  exponents of the graded parameters e_1..e_g,
* ``xs``  exponents of the coordinates x^1..x^m (plus t when the context has a time axis),
* ``odd`` strictly increasing indices of odd generators (theta or dx), empty for scalars.

A monomial is read as ``c * eps^k0 * e^ks * x^xs * g_{odd[0]} g_{odd[1]} ...`` with the
scalar part on the left.  Parameters and odd generators anticommute according to
their degrees, so products pick up Koszul signs.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArgumentError, ContextError, DegreeError


@dataclass(frozen=True)
class TruncationCtx:
    m: int
    g: int = 0
    param_degrees: tuple = ()
    N: int = 4
    eps_floor: int = -4
    W: int = 4
    time: bool = False

    def __post_init__(self):
        object.__setattr__(self, "param_degrees", tuple(int(d) for d in self.param_degrees))
        if self.m < 1:
            raise ContextError("m must be positive")
        if self.g < 0 or len(self.param_degrees) != self.g:
            raise ContextError("need exactly g parameter degrees")
        if any(d > 0 for d in self.param_degrees):
            raise ContextError("parameter degrees must be non-positive")
        if self.N < 1:
            raise ContextError("N must be at least 1")
        if self.eps_floor > 0:
            raise ContextError("eps_floor must be non-positive")
        if self.W < 2:
            raise ContextError("W must be at least 2")

    @property
    def nvars(self):
        return self.m + (1 if self.time else 0)

    @property
    def time_index(self):
        """1-based index of the time coordinate, or None."""
        return self.m + 1 if self.time else None

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def with_time(self, flag=True):
        return self.replace(time=flag)

    def order(self, k0, ks):
        return max(k0, 0) + sum(ks)

    def keeps(self, k0, ks):
        return k0 >= self.eps_floor and self.order(k0, ks) <= self.N

    def param_degree(self, ks):
        return sum(k * d for k, d in zip(ks, self.param_degrees))

    def zero_ks(self):
        return (0,) * self.g

    def zero_xs(self):
        return (0,) * self.nvars

    def tag(self):
        degs = ",".join(str(d) for d in self.param_degrees)
        t = ",time" if self.time else ""
        return f"m={self.m},g={self.g},degrees=[{degs}],N={self.N},eps_floor={self.eps_floor},W={self.W}{t}"


def as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, str)):
        return Fraction(c)
    raise ArgumentError(f"not an exact rational: {c!r}")


# -- monomial helpers ------------------------------------------------------

def param_product(ctx, ks1, ks2):
    """Sign and exponents of (e^ks1)(e^ks2) brought to canonical order; sign 0 if it vanishes."""
    degs = ctx.param_degrees
    out = []
    for a in range(ctx.g):
        k = ks1[a] + ks2[a]
        if degs[a] % 2 and k > 1:
            return 0, None
        out.append(k)
    sign = 1
    for j in range(ctx.g):
        if ks2[j] * degs[j] % 2:
            for i in range(j + 1, ctx.g):
                if ks1[i] * degs[i] % 2:
                    sign = -sign
    return sign, tuple(out)


def odd_product(o1, o2):
    if not o1:
        return 1, o2
    if not o2:
        return 1, o1
    if set(o1) & set(o2):
        return 0, None
    inv = sum(1 for a in o1 for b in o2 if a > b)
    return (-1 if inv % 2 else 1), tuple(sorted(o1 + o2))


def perm_sign(seq):
    """Sign of the permutation sorting a sequence of distinct items."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def koszul_sign(perm, degs):
    """Koszul sign of reordering graded items.

    ``perm[k]`` is the original slot placed at position k.  The sign is the
    product of (-1)^(deg_a deg_b) over pairs a < b that end up inverted.
    """
    perm = list(perm)
    n = len(perm)
    if len(degs) != n:
        raise ArgumentError("perm and degs differ in length")
    if sorted(perm) != list(range(n)):
        raise ArgumentError("not a permutation of range(n)")
    sign = 1
    for i in range(n):
        for j in range(i + 1, n):
            a, b = perm[i], perm[j]
            if a > b and degs[a] % 2 and degs[b] % 2:
                sign = -sign
    return sign


def mul_keys(ctx, ka, kb):
    """Product of two monomial keys: returns (sign, key) or (0, None)."""
    k0a, ksa, xsa, oa = ka
    k0b, ksb, xsb, ob = kb
    k0 = k0a + k0b
    s1, ks = param_product(ctx, ksa, ksb)
    if not s1:
        return 0, None
    if not ctx.keeps(k0, ks):
        return 0, None
    s2, odd = odd_product(oa, ob)
    if not s2:
        return 0, None
    sign = s1 * s2
    if oa and ctx.param_degree(ksb) % 2 and len(oa) % 2:
        sign = -sign
    xs = tuple(a + b for a, b in zip(xsa, xsb))
    return sign, (k0, ks, xs, odd)


# -- the shared sparse container -------------------------------------------

class GradedPoly:
    """Sparse graded-commutative polynomial over the truncated base ring.

    Subclasses fix which odd generators may appear: none for BaseSeries,
    theta for Polyvector, dx for ExteriorForm.
    """

    kind = "scalar"
    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms=None, _clean=False):
        self.ctx = ctx
        if _clean:
            self.terms = terms
            return
        out = {}
        keeps = self._keeps
        for key, c in (terms or {}).items():
            c = as_fraction(c)
            if not c:
                continue
            k0, ks, xs, odd = key
            if not keeps(ctx, key):
                continue
            if any(k > 1 and d % 2 for k, d in zip(ks, ctx.param_degrees)):
                continue
            key = (k0, tuple(ks), tuple(xs), tuple(odd))
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        self.terms = out

    @staticmethod
    def _keeps(ctx, key):
        """Truncation rule; forms override it with their filtration index."""
        return ctx.keeps(key[0], key[1])

    # construction
    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {}, _clean=True)

    @classmethod
    def monomial(cls, ctx, c=1, k0=0, ks=None, xs=None, odd=()):
        ks = tuple(ks) if ks is not None else ctx.zero_ks()
        xs = tuple(xs) if xs is not None else ctx.zero_xs()
        odd = tuple(odd)
        if len(ks) != ctx.g or len(xs) != ctx.nvars:
            raise ArgumentError("monomial shape does not match context")
        sign = 1
        if list(odd) != sorted(odd):
            if len(set(odd)) != len(odd):
                return cls.zero(ctx)
            sign = perm_sign(odd)
            odd = tuple(sorted(odd))
        elif len(set(odd)) != len(odd):
            return cls.zero(ctx)
        return cls(ctx, {(k0, ks, xs, odd): sign * as_fraction(c)})

    @classmethod
    def const(cls, ctx, c):
        return cls.monomial(ctx, c)

    def new(self, terms, _clean=False):
        return type(self)(self.ctx, terms, _clean=_clean)

    # basic protocol
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check_ctx(self, other):
        if self.ctx != other.ctx:
            raise ContextError("operands belong to different truncation contexts")

    def _result_class(self, other):
        a, b = type(self), type(other)
        if a.kind == "scalar":
            return b
        if b.kind == "scalar" or a.kind == b.kind:
            return a
        raise ContextError(f"cannot combine {a.__name__} with {b.__name__}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = type(self).const(self.ctx, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        self._check_ctx(other)
        cls = self._result_class(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return cls(self.ctx, out, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return self.new({k: -c for k, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = type(self).const(self.ctx, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = as_fraction(c)
        if not c:
            return self.zero(self.ctx)
        return self.new({k: c * v for k, v in self.terms.items()}, _clean=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        self._check_ctx(other)
        cls = self._result_class(other)
        ctx = self.ctx
        keeps = cls._keeps
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                s, key = mul_keys(ctx, ka, kb)
                if not s or not keeps(ctx, key):
                    continue
                v = out.get(key, 0) + s * ca * cb
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return cls(ctx, out, _clean=True)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ArgumentError("powers must be non-negative integers")
        out = type(self).const(self.ctx, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BaseSeries.const(self.ctx, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        if self.ctx != other.ctx or self.terms != other.terms:
            return False
        if type(self).kind == type(other).kind:
            return True
        return not any(k[3] for k in self.terms)

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def __repr__(self):
        return f"{type(self).__name__}({to_text(self)})"

    def __str__(self):
        return to_text(self)

    # degrees
    def key_param_degree(self, key):
        return self.ctx.param_degree(key[1])

    def key_degree(self, key):
        """Algebra degree of a monomial: odd generator count plus parameter degree."""
        return len(key[3]) + self.ctx.param_degree(key[1])

    def degrees(self):
        return {self.key_degree(k) for k in self.terms}

    def degree(self):
        """The single degree of a homogeneous value (None for zero)."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise DegreeError(f"inhomogeneous value with degrees {sorted(ds)}")
        return ds.pop()

    def homogeneous_parts(self):
        parts = {}
        for k, c in self.terms.items():
            parts.setdefault(self.key_degree(k), {})[k] = c
        return {d: self.new(t, _clean=True) for d, t in sorted(parts.items())}

    def m_order(self):
        if not self.terms:
            return math.inf
        return min(self.ctx.order(k[0], k[1]) for k in self.terms)

    # calculus
    def dx_partial(self, i):
        """Partial derivative in the even coordinate x^i (1-based)."""
        if not 1 <= i <= self.ctx.nvars:
            raise ArgumentError(f"coordinate index {i} out of range")
        j = i - 1
        out = {}
        for (k0, ks, xs, odd), c in self.terms.items():
            e = xs[j]
            if e:
                nxs = xs[:j] + (e - 1,) + xs[j + 1:]
                key = (k0, ks, nxs, odd)
                out[key] = out.get(key, 0) + e * c
        return self.new({k: v for k, v in out.items() if v}, _clean=True)

    def odd_left(self, i):
        """Left derivative in the odd generator with index i.

        The derivative has degree -1, so it picks up (-1)^deg(p) when passing the
        parameter part p of each coefficient.
        """
        out = {}
        for (k0, ks, xs, odd), c in self.terms.items():
            if i not in odd:
                continue
            pos = odd.index(i)
            sign = -1 if (pos + self.ctx.param_degree(ks)) % 2 else 1
            key = (k0, ks, xs, odd[:pos] + odd[pos + 1:])
            out[key] = out.get(key, 0) + sign * c
        return self.new({k: v for k, v in out.items() if v}, _clean=True)

    def odd_right(self, i):
        """Right derivative in the odd generator with index i."""
        out = {}
        for (k0, ks, xs, odd), c in self.terms.items():
            if i not in odd:
                continue
            pos = odd.index(i)
            sign = -1 if (len(odd) - 1 - pos) % 2 else 1
            key = (k0, ks, xs, odd[:pos] + odd[pos + 1:])
            out[key] = out.get(key, 0) + sign * c
        return self.new({k: v for k, v in out.items() if v}, _clean=True)

    def filter(self, pred):
        return self.new({k: c for k, c in self.terms.items() if pred(k)}, _clean=True)

    def odd_count_parts(self):
        parts = {}
        for k, c in self.terms.items():
            parts.setdefault(len(k[3]), {})[k] = c
        return {n: self.new(t, _clean=True) for n, t in sorted(parts.items())}

    def shift_eps(self, n):
        """Multiply by eps^n (eps is even and central)."""
        return self.new({(k[0] + n, k[1], k[2], k[3]): c for k, c in self.terms.items()})

    def to_ctx(self, ctx):
        """Re-embed into another context (adding or dropping an unused time axis)."""
        if ctx.m != self.ctx.m or ctx.g != self.ctx.g or ctx.param_degrees != self.ctx.param_degrees:
            raise ContextError("contexts differ in dimension or parameters")
        out = {}
        n = ctx.nvars
        for (k0, ks, xs, odd), c in self.terms.items():
            if len(xs) > n:
                if any(xs[n:]) or any(o > n for o in odd):
                    raise ContextError("value uses the time axis")
                xs = xs[:n]
            else:
                xs = xs + (0,) * (n - len(xs))
            out[(k0, ks, xs, odd)] = c
        return type(self)(ctx, out)

    def cast(self, cls):
        return cls(self.ctx, dict(self.terms), _clean=True)


class BaseSeries(GradedPoly):
    kind = "scalar"

    def __init__(self, ctx, terms=None, _clean=False):
        super().__init__(ctx, terms, _clean)
        if not _clean and any(k[3] for k in self.terms):
            raise ArgumentError("a BaseSeries has no odd generators")

    @classmethod
    def eps(cls, ctx, power=1):
        return cls.monomial(ctx, 1, k0=power)

    @classmethod
    def param(cls, ctx, a, power=1):
        if not 1 <= a <= ctx.g:
            raise ArgumentError(f"parameter index {a} out of range")
        ks = [0] * ctx.g
        ks[a - 1] = power
        return cls.monomial(ctx, 1, ks=ks)

    @classmethod
    def x(cls, ctx, i, power=1):
        if not 1 <= i <= ctx.nvars:
            raise ArgumentError(f"coordinate index {i} out of range")
        xs = [0] * ctx.nvars
        xs[i - 1] = power
        return cls.monomial(ctx, 1, xs=xs)

    def degree(self):
        return super().degree()

    def evaluate_x(self, point):
        """Substitute rational values for the coordinates; returns a BaseSeries in eps, e_a."""
        out = {}
        for (k0, ks, xs, odd), c in self.terms.items():
            v = c
            for a, e in zip(point, xs):
                v *= as_fraction(a) ** e
            key = (k0, ks, (0,) * len(xs), odd)
            out[key] = out.get(key, 0) + v
        return self.new(out)


def base_mul(a, b):
    """Graded-commutative product of two base series in one context."""
    if a.ctx != b.ctx:
        raise ContextError("operands belong to different truncation contexts")
    return a * b


def m_order(a):
    """Minimal m-adic order over retained monomials; infinity for zero."""
    return a.m_order()


# -- canonical text ----------------------------------------------------------

ODD_NAMES = {"scalar": "", "th": "th", "dx": "dx"}


def _pow(name, e):
    return name if e == 1 else f"{name}^{e}"


def monomial_text(ctx, key, kind):
    k0, ks, xs, odd = key
    factors = []
    if k0:
        factors.append(_pow("eps", k0))
    for a, k in enumerate(ks, 1):
        if k:
            factors.append(_pow(f"e{a}", k))
    for i, e in enumerate(xs, 1):
        if e:
            factors.append(_pow("t" if i == ctx.time_index else f"x{i}", e))
    if odd:
        base = ODD_NAMES[kind]
        names = ["dt" if (kind == "dx" and i == ctx.time_index) else f"{base}{i}" for i in odd]
        factors.append("^".join(names))
    return " * ".join(factors)


def term_text(ctx, key, c, kind):
    mono = monomial_text(ctx, key, kind)
    if not mono:
        return str(c)
    if c == 1:
        return mono
    return f"{c} * {mono}"


def sort_key(key):
    k0, ks, xs, odd = key
    return (len(odd), odd, k0, ks, xs)


def to_text(p):
    if not p.terms:
        return "0"
    return " + ".join(term_text(p.ctx, k, p.terms[k], p.kind) for k in sorted(p.terms, key=sort_key))
