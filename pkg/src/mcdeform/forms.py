"""Exterior forms, the transport between polyvectors and suspended forms, and the form bracket."""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import ArgumentError, ContextError, DegreeError, MembershipError
from .polyvectors import Polyvector, as_polyvector
from .scalars import BaseSeries, GradedPoly, to_text


class ExteriorForm(GradedPoly):
    """Polynomial in dx^1..dx^m (and dt on a time axis) over the base ring."""

    kind = "dx"

    @staticmethod
    def _keeps(ctx, key):
        # a q-form eps^k0 e^ks dx^q sits in filtration level order(k0 + q, ks) of L
        k0, ks = key[0], key[1]
        q = len(key[3]) - (1 if ctx.time and ctx.time_index in key[3] else 0)
        return k0 >= ctx.eps_floor and ctx.order(k0 + q, ks) <= ctx.N

    @classmethod
    def dx(cls, ctx, i):
        if not 1 <= i <= ctx.nvars:
            raise ArgumentError(f"dx index {i} out of range")
        return cls.monomial(ctx, 1, odd=(i,))

    def key_form_degree(self, key):
        """Form degree counting only the space directions (dt excluded)."""
        t = self.ctx.time_index
        return sum(1 for i in key[3] if i != t)


def as_form(v):
    if isinstance(v, ExteriorForm):
        return v
    if isinstance(v, GradedPoly) and v.kind == "scalar":
        return v.cast(ExteriorForm)
    raise ArgumentError(f"expected an exterior form, got {type(v).__name__}")


def de_rham(eta, directions=None):
    """Exterior derivative sum_i dx^i d_i eta (over space directions by default)."""
    eta = as_form(eta)
    ctx = eta.ctx
    out = ExteriorForm.zero(ctx)
    for i in directions or range(1, ctx.m + 1):
        p = eta.dx_partial(i)
        if p:
            out = out + ExteriorForm.dx(ctx, i) * p
    return out


def time_derivative(eta):
    """The differential d_t = dt d/dt on a context with a time axis."""
    ctx = eta.ctx
    if not ctx.time:
        return ExteriorForm.zero(ctx)
    return de_rham(eta, [ctx.time_index])


def contract_dx(i, eta):
    """Left derivative in dx^i, that is contraction with the coordinate field d/dx^i."""
    eta = as_form(eta)
    if not 1 <= i <= eta.ctx.nvars:
        raise ArgumentError(f"dx index {i} out of range")
    return eta.odd_left(i)


class LOmegaElem:
    """A suspended form s^-1(eta).

    The degree of a summand is (form degree) - 1 + (parameter degree).
    """

    __slots__ = ("form",)

    def __init__(self, form):
        self.form = as_form(form)

    @property
    def ctx(self):
        return self.form.ctx

    @classmethod
    def zero(cls, ctx):
        return cls(ExteriorForm.zero(ctx))

    @property
    def terms(self):
        return self.form.terms

    def is_zero(self):
        return not self.form.terms

    def __bool__(self):
        return bool(self.form.terms)

    def __add__(self, other):
        if not isinstance(other, LOmegaElem):
            return NotImplemented
        return LOmegaElem(self.form + other.form)

    def __sub__(self, other):
        if not isinstance(other, LOmegaElem):
            return NotImplemented
        return LOmegaElem(self.form - other.form)

    def __neg__(self):
        return LOmegaElem(-self.form)

    def scale(self, c):
        return LOmegaElem(self.form.scale(c))

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LOmegaElem):
            return NotImplemented
        return self.form == other.form

    def __hash__(self):
        return hash(("s", self.form))

    def key_degree(self, key):
        return len(key[3]) - 1 + self.ctx.param_degree(key[1])

    def degrees(self):
        return {self.key_degree(k) for k in self.form.terms}

    def degree(self):
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise DegreeError(f"inhomogeneous value with degrees {sorted(ds)}")
        return ds.pop()

    def homogeneous_parts(self):
        return {d - 1: LOmegaElem(f) for d, f in self.form.homogeneous_parts().items()}

    def m_order(self):
        """Filtration index in L: eps^q times the coefficient of a q-form has this m-order."""
        if not self.form.terms:
            return math.inf
        f = self.form
        return min(self.ctx.order(k[0] + f.key_form_degree(k), k[1]) for k in f.terms)

    def new(self, terms, _clean=False):
        return LOmegaElem(self.form.new(terms, _clean=_clean))

    def to_ctx(self, ctx):
        return LOmegaElem(self.form.to_ctx(ctx))

    def __repr__(self):
        return f"LOmegaElem({self})"

    def __str__(self):
        return f"s^-1( {to_text(self.form)} )"


def suspend(form):
    return LOmegaElem(form)


# -- membership ------------------------------------------------------------

SPACES = ("L", "Ltilde", "F_k L", "F_k Ltilde")


def _summand_ok(ctx, key, q, shift, k):
    k0, ks = key[0], key[1]
    floor = -(q - shift)
    return k0 >= floor and ctx.order(k0 + q - shift, ks) >= k


def space_membership(a, space, k=1):
    """Whether every summand of ``a`` clears the thresholds of the named space.

    ``L``: eps-exponent >= -q and eps^q * scalar has m-order >= 1.
    ``Ltilde``: eps-exponent >= -(q-1) and eps^(q-1) * scalar has m-order >= 1.
    ``F_k L`` replaces the order bound 1 by k, and ``F_k Ltilde`` is the
    intersection of ``Ltilde`` with ``F_k L``.
    """
    if isinstance(a, LOmegaElem):
        form = a.form
    else:
        form = as_form(a)
    if space.startswith("F_k") and k < 1:
        raise ArgumentError("filtration index must be at least 1")
    ctx = form.ctx
    for key in form.terms:
        q = form.key_form_degree(key)
        if space == "L":
            ok = _summand_ok(ctx, key, q, 0, 1)
        elif space == "Ltilde":
            ok = _summand_ok(ctx, key, q, 1, 1)
        elif space == "F_k L":
            ok = _summand_ok(ctx, key, q, 0, k)
        elif space == "F_k Ltilde":
            ok = _summand_ok(ctx, key, q, 1, 1) and _summand_ok(ctx, key, q, 0, k)
        else:
            raise ArgumentError(f"unknown space {space!r}")
        if not ok:
            return False
    return True


def membership_table(a, k=1):
    return {
        "L": space_membership(a, "L"),
        "Ltilde": space_membership(a, "Ltilde"),
        f"F_{k} L": space_membership(a, "F_k L", k),
        f"F_{k} Ltilde": space_membership(a, "F_k Ltilde", k),
    }


# -- the bracket on suspended forms ------------------------------------------

def _alpha_of(pair_or_alpha, ctx):
    alpha = getattr(pair_or_alpha, "alpha_in", None)
    if alpha is not None:
        return pair_or_alpha.alpha_in(ctx.replace(time=ctx.time))
    return pair_or_alpha


def form_bracket(eta1, eta2, alpha):
    """Three-term bracket of forms (without suspension bookkeeping).

    eps dx^k d_k(alpha^{ij}) (d eta1/d dx^i)(d eta2/d dx^j)
      - (-1)^{|eta1|} eps alpha^{ij} (d eta1/d dx^i) d_j eta2
      + eps alpha^{ij} (d_i eta1)(d eta2/d dx^j)
    with |eta1| the form degree plus parameter degree.  Extended bilinearly.
    """
    ctx = eta1.ctx
    m = ctx.m
    eps = BaseSeries.eps(ctx)
    out = ExteriorForm.zero(ctx)
    c1 = [contract_dx(i, eta1) for i in range(1, m + 1)]
    c2 = [contract_dx(j, eta2) for j in range(1, m + 1)]
    d2 = [eta2.dx_partial(j) for j in range(1, m + 1)]
    d1 = [eta1.dx_partial(i) for i in range(1, m + 1)]
    parts1 = {deg: part for deg, part in eta1.homogeneous_parts().items()}
    c1_parts = {deg: [contract_dx(i, part) for i in range(1, m + 1)] for deg, part in parts1.items()}
    for i in range(m):
        for j in range(m):
            a = alpha[i][j]
            if not a:
                continue
            ea = eps * a
            if c1[i] and c2[j]:
                for k in range(1, m + 1):
                    da = a.dx_partial(k)
                    if da:
                        out = out + ExteriorForm.dx(ctx, k) * (eps * da) * c1[i] * c2[j]
            for deg, cs in c1_parts.items():
                if cs[i] and d2[j]:
                    term = ea * cs[i] * d2[j]
                    out = out + term if deg % 2 else out - term
            if d1[i] and c2[j]:
                out = out + ea * d1[i] * c2[j]
    return out


def omega_bracket(a, b, pair, check=True):
    """Bracket of two suspended forms; the output must lie in L."""
    if a.ctx != b.ctx:
        raise ContextError("operands belong to different truncation contexts")
    out = LOmegaElem(form_bracket(a.form, b.form, _alpha_of(pair, a.ctx)))
    if check and not space_membership(out, "L"):
        raise MembershipError("bracket output leaves L")
    return out


# -- transport between polyvectors and forms ---------------------------------

def _polyvector_order_ok(v):
    return all(v.ctx.order(k[0], k[1]) >= 1 for k in v.terms)


def j_omega(v, pair, direction="forward"):
    """Algebra map theta_i -> (1/eps) omega_ij dx^j, or its inverse dx^i -> eps alpha^{ij} theta_j."""
    if direction == "forward":
        v = as_polyvector(v)
        if not _polyvector_order_ok(v):
            raise MembershipError("input is not in m * PV")
        ctx = v.ctx
        omega = pair.omega_in(ctx)
        inv_eps = BaseSeries.eps(ctx, -1)
        images = []
        for i in range(ctx.m):
            img = ExteriorForm.zero(ctx)
            for j in range(ctx.m):
                if omega[i][j]:
                    img = img + omega[i][j] * ExteriorForm.dx(ctx, j + 1)
            images.append(inv_eps * img)
        return LOmegaElem(_substitute(v, images, ExteriorForm))
    if direction == "inverse":
        eta = v.form if isinstance(v, LOmegaElem) else as_form(v)
        if not space_membership(eta, "L"):
            raise MembershipError("input is not in L")
        ctx = eta.ctx
        alpha = pair.alpha_in(ctx)
        eps = BaseSeries.eps(ctx)
        images = []
        for i in range(ctx.m):
            img = Polyvector.zero(ctx)
            for j in range(ctx.m):
                if alpha[i][j]:
                    img = img + alpha[i][j] * Polyvector.theta(ctx, j + 1)
            images.append(eps * img)
        return _substitute(eta, images, Polyvector)
    raise ArgumentError(f"unknown direction {direction!r}")


def _substitute(p, images, cls):
    """Apply the algebra map sending odd generator i to images[i-1]."""
    ctx = p.ctx
    out = cls.zero(ctx)
    for (k0, ks, xs, odd), c in p.terms.items():
        term = cls(ctx, {(k0, ks, xs, ()): c})
        for i in odd:
            term = term * images[i - 1]
            if not term:
                break
        out = out + term
    return out


__all__ = [
    "ExteriorForm", "LOmegaElem", "de_rham", "contract_dx", "omega_bracket", "form_bracket",
    "j_omega", "space_membership", "membership_table", "suspend", "time_derivative",
]
