"""Maurer-Cartan calculus over the polyvector, polydifferential and form contexts."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .errors import ArgumentError, ContextError, DegreeError, MalformedMCError
from .forms import ExteriorForm, LOmegaElem, contract_dx, de_rham, form_bracket, time_derivative
from .polydiff import (PolyDiffOp, _op_key_text, ainfty_from_mc, gerstenhaber, hkr_project, hochschild_d)
from .polyvectors import Polyvector, schouten_bilinear
from .scalars import BaseSeries, term_text


@dataclass
class Report:
    check: str
    status: bool
    first_failure_key: Any
    context_tag: str
    residual: str = "0"
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "check": self.check,
            "status": "pass" if self.status else "fail",
            "first_failure_key": self.first_failure_key,
            "context_tag": self.context_tag,
        }
        d.update(self.extra)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def certificate(self, ctx):
        return {
            "context_tag": self.context_tag,
            "truncation": [ctx.N, ctx.eps_floor, ctx.W],
            "residual": self.residual,
            "status": "pass" if self.status else "fail",
        }


# -- generic helpers over carriers ----------------------------------------------

def key_text(value, key):
    """Text of a single monomial of a kernel value (coefficient 1)."""
    if isinstance(value, PolyDiffOp):
        return _op_key_text(value.ctx, key)
    if isinstance(value, LOmegaElem):
        return f"s^-1( {term_text(value.ctx, key, 1, 'dx')} )"
    return term_text(value.ctx, key, 1, value.kind)


def value_text(value):
    return str(value)


def lowest_key(value):
    ctx = value.ctx
    return min(value.terms, key=lambda k: (ctx.order(k[0], k[1]), repr(k)))


def zero_like(value):
    if isinstance(value, LOmegaElem):
        return LOmegaElem.zero(value.ctx)
    return value.new({}, _clean=True)


@dataclass
class DglaContext:
    """A differential, a bracket and a carrier tag."""

    tag: str
    carrier: str
    ctx: Any
    diff: Callable
    bracket: Callable
    twist_by: Any = None

    def zero(self):
        if self.carrier == "PV":
            return Polyvector.zero(self.ctx)
        if self.carrier == "PD":
            return PolyDiffOp.zero(self.ctx)
        return LOmegaElem.zero(self.ctx)

    def mc_residual(self, mu):
        return self.diff(mu) + self.bracket(mu, mu).scale(Fraction(1, 2))


def pv_context(pair, ctx):
    """(PV, [eps alpha, -]_S, [,]_S)."""
    ea = BaseSeries.eps(ctx) * pair.bivector(ctx)
    return DglaContext("PV", "PV", ctx, lambda v: schouten_bilinear(ea, v), schouten_bilinear)


def pd_context(ctx):
    return DglaContext("PD", "PD", ctx, hochschild_d, gerstenhaber)


def omega_differential(a):
    """-d in the space directions plus d_t along a time axis."""
    f = a.form
    return LOmegaElem(time_derivative(f) - de_rham(f))


def omega_zero_context(ctx):
    """(L_Omega, -d, 0)."""
    return DglaContext("Omega-zero", "Omega", ctx, omega_differential, lambda a, b: LOmegaElem.zero(ctx))


def omega_context(pair, ctx):
    """(L_Omega, -d, [,]_omega)."""
    alpha = pair.alpha_in(ctx)
    return DglaContext("Omega", "Omega", ctx, omega_differential,
                       lambda a, b: LOmegaElem(form_bracket(a.form, b.form, alpha)))


def twist(L, mu_alpha):
    """PD context with differential d_Hoch + [mu_alpha, -]_G."""
    if L.carrier != "PD":
        raise ContextError("twisting is defined for the polydifferential context")
    if not mu_alpha:
        return L
    if not mc_check(mu_alpha, L).status:
        raise MalformedMCError("the twisting element is not Maurer-Cartan")
    base = L.diff
    return DglaContext(f"PD-twisted({L.tag})", "PD", L.ctx,
                       lambda P: base(P) + gerstenhaber(mu_alpha, P), L.bracket, twist_by=mu_alpha)


# -- Maurer-Cartan elements ---------------------------------------------------------

class MCElement:
    """A value together with the context it was checked in and its report."""

    def __init__(self, value, context, report=None):
        self.value = value
        self.context = context
        self.report = report

    @property
    def checked(self):
        return self.report is not None and self.report.status

    def certificate(self):
        if self.report is None:
            return {"context_tag": self.context.tag, "status": "unchecked"}
        return self.report.certificate(self.context.ctx)

    def __repr__(self):
        return f"MCElement({self.value}, {self.context.tag})"


def _check_mc_shape(mu, want_degree, what):
    if not mu:
        return
    d = mu.degree()
    if d != want_degree:
        raise DegreeError(f"{what} must have degree {want_degree}, got {d}")


def mc_check(mu, L):
    """Residual d(mu) + 1/2 [mu, mu]; reports the lowest-order failing monomial."""
    if isinstance(mu, MCElement):
        mu = mu.value
    _check_mc_shape(mu, 1, "an MC element")
    if mu and mu.m_order() < 1:
        raise DegreeError("an MC element needs positive m-adic order")
    res = L.mc_residual(mu)
    if not res:
        return Report("mc", True, None, L.tag)
    return Report("mc", False, key_text(res, lowest_key(res)), L.tag, residual=value_text(res))


def certify(mu, L):
    return MCElement(mu, L, mc_check(mu, L))


def gauge_act(xi, mu, L):
    """exp([xi, -]) mu - ((exp([xi, -]) - 1)/[xi, -]) (d xi), summed until it vanishes."""
    if isinstance(mu, MCElement):
        mu = mu.value
    _check_mc_shape(xi, 0, "a gauge parameter")
    if xi and xi.m_order() < 1:
        raise DegreeError("a gauge parameter needs positive m-adic order")
    limit = 4 * L.ctx.N + 8
    out = mu
    cur = mu
    k = 0
    while cur:
        k += 1
        cur = L.bracket(xi, cur).scale(Fraction(1, k))
        out = out + cur
        if k > limit:
            raise ArithmeticError("gauge series failed to terminate")
    cur = L.diff(xi)
    out = out - cur
    k = 0
    while cur:
        k += 1
        cur = L.bracket(xi, cur).scale(Fraction(1, k + 1))
        out = out - cur
        if k > limit:
            raise ArithmeticError("gauge series failed to terminate")
    return out


def ks_class(mu):
    """Kodaira-Spencer class: reduce mod m^2, check closedness, project by HKR."""
    if isinstance(mu, MCElement):
        mu = mu.value
    if not isinstance(mu, PolyDiffOp):
        raise ArgumentError("the Kodaira-Spencer class is defined for polydifferential MC elements")
    if any(k[0] < 0 for k in mu.terms):
        raise ArgumentError("Laurent eps-exponents are not supported here")
    ctx = mu.ctx
    first = mu.filter(lambda k: ctx.order(k[0], k[1]) <= 1)
    if hochschild_d(first):
        raise MalformedMCError("the first-order part is not Hochschild closed")
    return hkr_project(first)


def ks_integrability(kappa):
    sq = schouten_bilinear(kappa, kappa)
    if not sq:
        return Report("integrable", True, None, kappa.ctx.tag())
    return Report("integrable", False, key_text(sq, lowest_key(sq)), kappa.ctx.tag(), residual=str(sq))


def shift(mu, mu_alpha, direction="forward", L=None):
    """Forward: mu_alpha + mu for mu MC in the twisted context; inverse: mu - mu_alpha."""
    if isinstance(mu, MCElement):
        mu = mu.value
    L = L or pd_context(mu_alpha.ctx)
    T = twist(L, mu_alpha)
    if direction == "forward":
        if not mc_check(mu, T).status:
            raise ContextError("input is not MC in the twisted context")
        out = mu_alpha + mu
        return MCElement(out, L, mc_check(out, L))
    if direction == "inverse":
        if not mc_check(mu, L).status:
            raise ContextError("input is not MC in the plain context")
        out = mu - mu_alpha
        return MCElement(out, T, mc_check(out, T))
    raise ArgumentError(f"unknown direction {direction!r}")


def conditions_check(mu, pair):
    """Condition 1 (KS class equals eps alpha) and condition 2 (mu vanishes at eps = 0)."""
    if isinstance(mu, MCElement):
        mu = mu.value
    ctx = mu.ctx
    target = BaseSeries.eps(ctx) * pair.bivector(ctx)
    cond1 = ks_class(mu) == target
    cond2 = not any(k[0] == 0 for k in mu.terms)
    A = ainfty_from_mc(mu)
    reduction = True
    for n, op in A.ms.items():
        at_zero = op.filter(lambda k: k[0] == 0)
        want = PolyDiffOp.product(ctx) if n == 2 else PolyDiffOp.zero(ctx)
        if at_zero != want:
            reduction = False
    rep = Report("conditions", cond1 and cond2, None, ctx.tag())
    rep.extra.update({"condition1": cond1, "condition2": cond2, "eps_zero_reduction": reduction})
    if not cond1:
        rep.first_failure_key = "condition1"
    elif not cond2:
        rep.first_failure_key = "condition2"
    return rep


# -- paths in L (x) Omega_1 ----------------------------------------------------------

class PathElem:
    """eta_t + dt eta_dt with both parts polynomial in t, over a context with a time axis.

    eta_t carries degree 1 and eta_dt degree 0 (dt adds one).
    """

    def __init__(self, eta_t, eta_dt):
        if not eta_t.ctx.time:
            raise ContextError("paths live in a context with a time axis")
        t = eta_t.ctx.time_index
        for part in (eta_t, eta_dt):
            if any(t in k[3] for k in part.terms):
                raise ArgumentError("path components must not contain dt")
        self.eta_t = eta_t
        self.eta_dt = eta_dt

    @property
    def ctx(self):
        return self.eta_t.ctx

    def combined(self):
        dt = ExteriorForm.dx(self.ctx, self.ctx.time_index)
        return LOmegaElem(self.eta_t.form + dt * self.eta_dt.form)

    @classmethod
    def from_combined(cls, X):
        t = X.ctx.time_index
        with_dt = X.form.filter(lambda k: t in k[3])
        without = X.form.filter(lambda k: t not in k[3])
        return cls(LOmegaElem(without), LOmegaElem(contract_dx(t, with_dt)))

    def at(self, value):
        """Endpoint at t = value (0 or 1) as an element of the context without time."""
        ctx = self.ctx
        t = ctx.time_index - 1
        out = {}
        for (k0, ks, xs, odd), c in self.eta_t.terms.items():
            if value == 0 and xs[t]:
                continue
            key = (k0, ks, xs[:t], odd)
            out[key] = out.get(key, 0) + c * Fraction(value) ** xs[t]
        return LOmegaElem(ExteriorForm(ctx.with_time(False), out))

    def __eq__(self, other):
        return isinstance(other, PathElem) and self.eta_t == other.eta_t and self.eta_dt == other.eta_dt

    def __repr__(self):
        return f"PathElem({self.eta_t}, {self.eta_dt})"


def mc_path_check(path, L):
    """MC equation for the total differential (L differential + d_t) on eta_t + dt eta_dt."""
    if L.carrier != "Omega" or not L.ctx.time:
        raise ContextError("path checks need a form context with a time axis")
    X = path.combined()
    if X:
        if path.eta_t and path.eta_t.degree() != 1:
            raise DegreeError("eta_t must have degree 1")
        if path.eta_dt and path.eta_dt.degree() != 0:
            raise DegreeError("eta_dt must have degree 0")
    res = L.mc_residual(X)
    if res:
        rep = Report("path-mc", False, key_text(res, lowest_key(res)), L.tag, residual=str(res))
    else:
        rep = Report("path-mc", True, None, L.tag)
    return rep, (path.at(0), path.at(1))


__all__ = [
    "Report", "DglaContext", "MCElement", "PathElem", "pv_context", "pd_context", "omega_zero_context",
    "omega_context", "twist", "mc_check", "certify", "gauge_act", "ks_class", "ks_integrability", "shift",
    "conditions_check", "mc_path_check",
]
