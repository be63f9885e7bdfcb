"""Polyvector fields as polynomials in odd symbols theta_i, with the Schouten bracket."""
from __future__ import annotations

from fractions import Fraction

from .errors import ArgumentError, ContextError, DegreeError
from .scalars import BaseSeries, GradedPoly, TruncationCtx


class Polyvector(GradedPoly):
    """Polynomial in theta_1..theta_m over the base ring.

    Degrees reported by ``degree`` are shifted: a monomial with k+1 thetas and
    scalar degree s has degree k + s.
    """

    kind = "th"

    @classmethod
    def theta(cls, ctx, i):
        if not 1 <= i <= ctx.m:
            raise ArgumentError(f"theta index {i} out of range")
        return cls.monomial(ctx, 1, odd=(i,))

    def key_degree(self, key):
        return len(key[3]) - 1 + self.ctx.param_degree(key[1])

    def components(self):
        """Map from sorted theta-index tuples to BaseSeries coefficients."""
        out = {}
        for (k0, ks, xs, odd), c in self.terms.items():
            out.setdefault(odd, {})[(k0, ks, xs, ())] = c
        return {odd: BaseSeries(self.ctx, t, _clean=True) for odd, t in sorted(out.items())}


def as_polyvector(v):
    if isinstance(v, Polyvector):
        return v
    if isinstance(v, GradedPoly) and v.kind == "scalar":
        return v.cast(Polyvector)
    raise ArgumentError(f"expected a polyvector, got {type(v).__name__}")


def wedge(u, v):
    return as_polyvector(u) * as_polyvector(v)


def schouten(u, v):
    """Schouten bracket, as the odd Poisson bracket pairing theta_i with x^i.

    [u, v] = sum_i (u d/dtheta_i from the right)(d_i v) - (d_i u)(d/dtheta_i v from the left)
    which realises [theta_i, x^j] = delta and the Leibniz rule in the second slot.
    """
    u, v = as_polyvector(u), as_polyvector(v)
    if u.ctx != v.ctx:
        raise ContextError("operands belong to different truncation contexts")
    u.degree()
    v.degree()
    out = Polyvector.zero(u.ctx)
    for i in range(1, u.ctx.m + 1):
        a = u.odd_right(i)
        if a:
            b = v.dx_partial(i)
            if b:
                out = out + a * b
        a = u.dx_partial(i)
        if a:
            b = v.odd_left(i)
            if b:
                out = out - a * b
    return out


def schouten_bilinear(u, v):
    """Schouten bracket extended bilinearly over homogeneous parts."""
    out = Polyvector.zero(u.ctx)
    for a in as_polyvector(u).homogeneous_parts().values():
        for b in as_polyvector(v).homogeneous_parts().values():
            out = out + schouten(a, b)
    return out


# -- matrices of polynomials ----------------------------------------------

def poly(ctx, p):
    """Coerce a number or a parameter-free polynomial into ``ctx``."""
    if not isinstance(p, GradedPoly):
        return BaseSeries.const(ctx, Fraction(p))
    if p.ctx == ctx:
        return p.cast(BaseSeries)
    terms = {}
    n = ctx.nvars
    for (k0, ks, xs, odd), c in p.terms.items():
        if any(ks) or odd or any(xs[n:]):
            raise ContextError("matrix entries must be polynomials in the coordinates")
        terms[(k0, ctx.zero_ks(), xs[:n] + (0,) * (n - len(xs)), ())] = c
    return BaseSeries(ctx, terms)


def matrix(ctx, rows):
    return tuple(tuple(poly(ctx, p) for p in row) for row in rows)


def bivector(ctx, alpha):
    """The polyvector 1/2 alpha^{ij} theta_i theta_j."""
    out = Polyvector.zero(ctx)
    m = len(alpha)
    for i in range(m):
        for j in range(i + 1, m):
            a = alpha[i][j]
            if a:
                out = out + a * Polyvector.monomial(ctx, 1, odd=(i + 1, j + 1))
    return out


def bivector_matrix(v):
    """Inverse of ``bivector``: the antisymmetric matrix of a homogeneous bivector."""
    v = as_polyvector(v)
    ctx = v.ctx
    m = ctx.m
    rows = [[BaseSeries.zero(ctx) for _ in range(m)] for _ in range(m)]
    for odd, c in v.components().items():
        if len(odd) != 2:
            raise DegreeError("not a bivector")
        i, j = odd
        rows[i - 1][j - 1] = c
        rows[j - 1][i - 1] = -c
    return tuple(tuple(r) for r in rows)


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][l] * b[l][j] for l in range(k)), a[0][0].zero(a[0][0].ctx)) for j in range(m))
        for i in range(n)
    )


def transpose(a):
    return tuple(tuple(a[j][i] for j in range(len(a))) for i in range(len(a[0])))


class BivectorField:
    """An antisymmetric matrix alpha^{ij}(x) of polynomials, read as 1/2 alpha^{ij} theta_i theta_j.

    With ``check`` the Jacobi identity [alpha, alpha]_S = 0 is enforced.
    """

    def __init__(self, ctx, alpha, name="custom", check=True):
        self.ctx = ctx.replace(time=False) if ctx.time else ctx
        self.alpha = matrix(self.ctx, alpha)
        self.name = name
        if len(self.alpha) != self.ctx.m:
            raise ArgumentError("matrices must be m x m")
        m = self.ctx.m
        for i in range(m):
            for j in range(m):
                if self.alpha[i][j] != -self.alpha[j][i]:
                    raise ArgumentError("alpha must be antisymmetric")
        if check and not self.is_poisson():
            raise ArgumentError("alpha violates the Jacobi identity")

    def is_poisson(self):
        return not schouten(self.bivector(), self.bivector())

    def bivector(self, ctx=None):
        ctx = ctx or self.ctx
        return bivector(ctx, self.alpha_in(ctx))

    def alpha_in(self, ctx):
        return self.alpha if ctx == self.ctx else matrix(ctx, self.alpha)

    def is_constant(self):
        return all(not any(any(k[2]) for k in p.terms) for row in self.alpha for p in row)


class SymplecticPair(BivectorField):
    """A polynomial symplectic form omega together with its polynomial inverse alpha.

    Checked on construction: both antisymmetric, alpha^{ij} omega_{jk} = delta, and
    the bivector of alpha has vanishing Schouten square.
    """

    def __init__(self, ctx, omega, alpha, name="custom", check=True):
        super().__init__(ctx, alpha, name, check=check)
        self.omega = matrix(self.ctx, omega)
        m = self.ctx.m
        if len(self.omega) != m:
            raise ArgumentError("matrices must be m x m")
        if check:
            self._check()

    def _check(self):
        m = self.ctx.m
        for i in range(m):
            for j in range(m):
                if self.omega[i][j] != -self.omega[j][i]:
                    raise ArgumentError("omega must be antisymmetric")
        prod = mat_mul(self.alpha, self.omega)
        for i in range(m):
            for k in range(m):
                if prod[i][k] != (1 if i == k else 0):
                    raise ArgumentError("alpha is not the inverse of omega")

    def omega_in(self, ctx):
        return self.omega if ctx == self.ctx else matrix(ctx, self.omega)


def standard_matrices(m):
    """Constant Darboux data with alpha^{12} = 1, alpha^{34} = 1, ..."""
    if m % 2:
        raise ArgumentError("a symplectic coordinate space has even dimension")
    omega = [[0] * m for _ in range(m)]
    alpha = [[0] * m for _ in range(m)]
    for b in range(0, m, 2):
        alpha[b][b + 1], alpha[b + 1][b] = 1, -1
        omega[b][b + 1], omega[b + 1][b] = -1, 1
    return omega, alpha


def standard_pair(ctx):
    omega, alpha = standard_matrices(ctx.m)
    return SymplecticPair(ctx, omega, alpha, name=f"standard{ctx.m}")


def shear_pair(ctx, power=2, source=1, target=None):
    """Pull back the constant Darboux pair along x^target -> x^target + (x^source)^power.

    The Jacobian is unipotent, so both omega and alpha stay polynomial.  On R^4
    with the default target x^3 the pulled-back omega is not constant.
    """
    m = ctx.m
    target = target or (3 if m >= 4 else 2)
    if source == target:
        raise ArgumentError("shear source and target must differ")
    omega0, alpha0 = standard_matrices(m)
    base = ctx.replace(g=0, param_degrees=(), time=False)
    one = BaseSeries.const(base, 1)
    zero = BaseSeries.zero(base)
    # jac[a][i] = d phi^a / d x^i ; inverse Jacobian subtracts the shear
    jac = [[one if a == i else zero for i in range(m)] for a in range(m)]
    jinv = [[one if a == i else zero for i in range(m)] for a in range(m)]
    deriv = BaseSeries.x(base, source, power - 1).scale(power) if power > 1 else one
    jac[target - 1][source - 1] = deriv
    jinv[target - 1][source - 1] = -deriv
    c0 = matrix(base, omega0)
    a0 = matrix(base, alpha0)
    omega = mat_mul(mat_mul(transpose(jac), c0), jac)
    alpha = mat_mul(mat_mul(jinv, a0), transpose(jinv))
    return SymplecticPair(ctx, omega, alpha, name=f"shear{m}")


def pair_from_tensors(omega_form, alpha_bv, name="custom"):
    """Build a pair from a 2-form 1/2 omega_ij dx^i dx^j and a bivector."""
    ctx = alpha_bv.ctx
    alpha = bivector_matrix(alpha_bv)
    m = ctx.m
    rows = [[BaseSeries.zero(ctx) for _ in range(m)] for _ in range(m)]
    for (k0, ks, xs, odd), c in omega_form.terms.items():
        if len(odd) != 2:
            raise DegreeError("omega must be a 2-form")
        i, j = odd
        b = BaseSeries(ctx, {(k0, ks, xs, ()): c})
        rows[i - 1][j - 1] = rows[i - 1][j - 1] + b
        rows[j - 1][i - 1] = rows[j - 1][i - 1] - b
    return SymplecticPair(ctx, rows, alpha, name=name)


__all__ = [
    "Polyvector", "BivectorField", "wedge", "schouten", "schouten_bilinear", "SymplecticPair", "standard_pair",
    "shear_pair", "bivector", "bivector_matrix", "pair_from_tensors", "TruncationCtx",
]
