"""A small expression language for kernel values, plus canonical printing.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | tensor
    tensor := wedge (("⊗" | "@") wedge)*
    wedge  := power ("^" power)*
    power  := atom ("^" ["-"] INT)?
    atom   := INT ["/" INT] | NAME | NAME "(" args ")" | "s" "^" "-" "1" "(" expr ")"
            | "D" "[" ints "]" | "Dop" "[" (lists) "]" | "(" expr ")"

``^`` followed by an integer is a power, otherwise the graded product.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any

from .coderivations import Carrier, WordSum, pi_bilinear, words_text
from .deformation import Report
from .errors import KernelError, ParseError
from .forms import ExteriorForm, LOmegaElem, contract_dx, de_rham, j_omega, omega_bracket
from .polydiff import PolyDiffOp, cup, gerstenhaber, hkr_embed, hkr_project, hochschild_d, left_multiply, op_text
from .polyvectors import (BivectorField, Polyvector, pair_from_tensors, schouten_bilinear,
                          shear_pair, standard_pair)
from .scalars import BaseSeries, GradedPoly, TruncationCtx, to_text

# -- lexer ---------------------------------------------------------------------------

TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>⊗|[-+*^/()\[\],@=])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src, line=1, col0=1):
    tokens = []
    pos = 0
    while pos < len(src):
        m = TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, col0 + pos))
        pos = m.end()
    tokens.append(Token("end", "", line, col0 + len(src)))
    return tokens


# -- AST -------------------------------------------------------------------------------

@dataclass
class Node:
    kind: str
    line: int
    col: int
    value: Any = None
    children: list = field(default_factory=list)


class Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            t = self.next()
            rhs = self.term()
            node = Node("add" if t.text == "+" else "sub", t.line, t.col, children=[node, rhs])
        return node

    def term(self):
        node = self.unary()
        while self.peek().text == "*":
            t = self.next()
            node = Node("mul", t.line, t.col, children=[node, self.unary()])
        return node

    def unary(self):
        if self.peek().text == "-":
            t = self.next()
            return Node("neg", t.line, t.col, children=[self.unary()])
        return self.tensor()

    def tensor(self):
        node = self.wedge()
        while self.peek().text in ("⊗", "@"):
            t = self.next()
            node = Node("tensor", t.line, t.col, children=[node, self.wedge()])
        return node

    def _power_follows(self):
        if self.peek().text != "^":
            return False
        a = self.peek(1)
        return a.kind == "int" or (a.text == "-" and self.peek(2).kind == "int")

    def wedge(self):
        node = self.power()
        while self.peek().text == "^":
            t = self.next()
            node = Node("wedge", t.line, t.col, children=[node, self.power()])
        return node

    def power(self):
        node = self.atom()
        if self._power_follows():
            t = self.next()
            sign = 1
            if self.peek().text == "-":
                self.next()
                sign = -1
            n = int(self.next().text)
            node = Node("pow", t.line, t.col, sign * n, [node])
        return node

    def int_list(self, close="]"):
        out = []
        while self.peek().text != close:
            if out:
                self.expect(",")
            t = self.next()
            if t.kind != "int":
                raise ParseError(f"expected an index, found {t.text!r}", t.line, t.col)
            out.append(int(t.text))
        self.expect(close)
        return tuple(out)

    def atom(self):
        t = self.next()
        if t.kind == "int":
            num = int(t.text)
            if self.peek().text == "/" and self.peek(1).kind == "int":
                self.next()
                dt = self.next()
                den = int(dt.text)
                if den == 0:
                    raise ParseError("zero denominator", dt.line, dt.col)
                return Node("num", t.line, t.col, Fraction(num, den))
            return Node("num", t.line, t.col, Fraction(num))
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if t.kind != "name":
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)
        if t.text == "s" and self.peek().text == "^":
            self.expect("^")
            self.expect("-")
            one = self.next()
            if one.text != "1":
                raise ParseError("only s^-1 is a suspension", one.line, one.col)
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Node("call", t.line, t.col, "s", [inner])
        if t.text == "D" and self.peek().text == "[":
            self.next()
            return Node("slot", t.line, t.col, self.int_list())
        if t.text == "Dop" and self.peek().text == "[":
            self.next()
            slots = []
            while self.peek().text != "]":
                if slots:
                    self.expect(",")
                self.expect("[")
                slots.append(self.int_list())
            self.expect("]")
            return Node("dop", t.line, t.col, tuple(slots))
        if self.peek().text == "(":
            self.next()
            args = []
            while self.peek().text != ")":
                if args:
                    self.expect(",")
                args.append(self.expr())
            self.expect(")")
            return Node("call", t.line, t.col, t.text, args)
        return Node("name", t.line, t.col, t.text)


def parse_expr(src, line=1, col0=1):
    return Parser(tokenize(src, line, col0)).parse()


# -- session ---------------------------------------------------------------------------

FIXTURES = ("standard2", "standard4", "shear4")


def nonpoisson_field(ctx):
    """alpha^{12} = x^3, alpha^{34} = 1 on R^4: [alpha, alpha]_S != 0."""
    if ctx.m != 4:
        raise ParseError("the non-Poisson control lives on R^4")
    x3 = BaseSeries.x(ctx.replace(time=False), 3)
    rows = [[0, x3, 0, 0], [-x3, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    return BivectorField(ctx, rows, name="nonpoisson4", check=False)


class Session:
    """Configuration, the symplectic fixture and named values of one DSL run."""

    def __init__(self, m=2, g=0, degrees=(), N=4, eps_floor=-4, W=4, seed=0, fixture=None, time=False):
        self.cfg = {"m": m, "g": g, "degrees": tuple(degrees), "N": N, "eps_floor": eps_floor, "W": W,
                    "seed": seed, "time": bool(time)}
        self.fixture = fixture
        self.names = {}
        self._pair = None
        self._ctx = None

    @property
    def ctx(self):
        if self._ctx is None:
            c = self.cfg
            try:
                self._ctx = TruncationCtx(c["m"], c["g"], c["degrees"], c["N"], c["eps_floor"], c["W"], c["time"])
            except KernelError as e:
                raise ParseError(str(e)) from e
        return self._ctx

    def set(self, **kw):
        for k, v in kw.items():
            if k not in self.cfg:
                raise ParseError(f"unknown setting {k!r}")
            self.cfg[k] = v
        self._ctx = None
        self._pair = None

    @property
    def base_ctx(self):
        return self.ctx.replace(time=False)

    @property
    def pair(self):
        if self._pair is None:
            self._pair = self._build_pair()
        return self._pair

    def _build_pair(self):
        if "omega" in self.names and "alpha" in self.names:
            om, al = self.names["omega"], self.names["alpha"]
            return pair_from_tensors(om.to_ctx(self.base_ctx), al.to_ctx(self.base_ctx), name="explicit")
        name = self.fixture or f"standard{self.cfg['m']}"
        base = self.base_ctx
        if name in FIXTURES:
            sub = Session(**{k: v for k, v in self.cfg.items() if k != "time"})
            sub.run(read_data(name))
            return pair_from_tensors(sub.names["omega"].to_ctx(base), sub.names["alpha"].to_ctx(base), name=name)
        if name == "standard" or re.fullmatch(r"standard\d+", name):
            return standard_pair(base)
        m = re.fullmatch(r"shear(\d*)(?::(\d+))?", name)
        if m:
            power = int(m.group(2) or 2)
            p = shear_pair(base, power=power)
            p.name = name
            return p
        if name == "nonpoisson4":
            return nonpoisson_field(base)
        raise ParseError(f"unknown fixture {name!r}")

    # evaluation
    def evaluate(self, src, line=1, col0=1):
        return Evaluator(self).eval(parse_expr(src, line, col0))

    def run(self, text):
        """Run a DSL source: one declaration per line, '#' comments."""
        last = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0]
            if not line.strip():
                continue
            stripped = line.strip()
            indent = len(line) - len(line.lstrip()) + 1
            word = stripped.split(None, 1)[0]
            if word == "set":
                self._run_set(stripped[3:], lineno, indent + 3)
                continue
            if word == "fixture":
                parts = stripped.split()
                if len(parts) != 2:
                    raise ParseError("usage: fixture NAME", lineno, indent)
                self.fixture = parts[1]
                self._pair = None
                continue
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=(?!=)", stripped)
            if not m:
                raise ParseError("expected 'name = expression'", lineno, indent)
            name = m.group(1)
            expr_src = stripped[m.end():]
            value = self.evaluate(expr_src, lineno, indent + m.end())
            self.names[name] = value
            if name in ("omega", "alpha"):
                self._pair = None
            last = name
        return last

    def _run_set(self, rest, lineno, col):
        kw = {}
        for item in rest.split():
            if "=" not in item:
                raise ParseError(f"expected key=value, found {item!r}", lineno, col)
            k, v = item.split("=", 1)
            k = k.replace("-", "_")
            try:
                if k == "degrees":
                    kw[k] = tuple(int(x) for x in v.split(",") if x)
                elif k == "time":
                    kw[k] = v in ("1", "true", "yes")
                else:
                    kw[k] = int(v)
            except ValueError:
                raise ParseError(f"bad value for {k}: {v!r}", lineno, col) from None
        self.set(**kw)


# -- evaluator ---------------------------------------------------------------------------

GEN_RE = re.compile(r"(x|th|dx|e)_?(\d+)$")
HEADS = {
    "s": 1, "d": 1, "sbr": 2, "gbr": 2, "hoch": 1, "cup": 2, "hkr": 1, "hkrp": 1, "jw": 1, "jwinv": 1,
    "obr": 2, "pi": 2, "word": None,
}


class Evaluator:
    def __init__(self, session):
        self.s = session

    def err(self, node, msg):
        return ParseError(msg, node.line, node.col)

    def eval(self, node):
        try:
            return getattr(self, "ev_" + node.kind)(node)
        except ParseError:
            raise
        except KernelError as e:
            raise self.err(node, str(e)) from e
        except ZeroDivisionError as e:
            raise self.err(node, "division by zero") from e

    def ev_num(self, node):
        return node.value

    def ev_name(self, node):
        name = node.value
        ctx = self.s.ctx
        if name in self.s.names:
            return self.s.names[name]
        if name == "eps":
            return BaseSeries.eps(ctx)
        if name == "t":
            if not ctx.time:
                raise self.err(node, "t needs a time axis (set time=1)")
            return BaseSeries.x(ctx, ctx.time_index)
        if name == "dt":
            if not ctx.time:
                raise self.err(node, "dt needs a time axis (set time=1)")
            return ExteriorForm.dx(ctx, ctx.time_index)
        m = GEN_RE.match(name)
        if not m:
            raise self.err(node, f"unknown generator {name!r}")
        head, i = m.group(1), int(m.group(2))
        limit = ctx.g if head == "e" else ctx.m
        if not 1 <= i <= limit:
            raise self.err(node, f"generator {name} out of range")
        if head == "x":
            return BaseSeries.x(ctx, i)
        if head == "th":
            return Polyvector.theta(ctx, i)
        if head == "dx":
            return ExteriorForm.dx(ctx, i)
        return BaseSeries.param(ctx, i)

    def ev_slot(self, node):
        return PolyDiffOp.from_slots(self.s.ctx, (node.value,))

    def ev_dop(self, node):
        return PolyDiffOp.from_slots(self.s.ctx, node.value)

    def ev_neg(self, node):
        v = self.eval(node.children[0])
        return -v

    def _binary(self, node):
        return self.eval(node.children[0]), self.eval(node.children[1])

    def ev_add(self, node):
        a, b = self._binary(node)
        return self._plus(node, a, b)

    def ev_sub(self, node):
        a, b = self._binary(node)
        return self._plus(node, a, -b)

    def _plus(self, node, a, b):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a + b
        if isinstance(a, Fraction) and not a and not isinstance(b, GradedPoly):
            return b
        if isinstance(b, Fraction) and not b and not isinstance(a, GradedPoly):
            return a
        r = NotImplemented
        try:
            r = a + b
        except TypeError:
            pass
        if r is NotImplemented:
            raise self.err(node, f"cannot add {type(a).__name__} and {type(b).__name__}")
        return r

    def ev_mul(self, node):
        a, b = self._binary(node)
        return self._times(node, a, b)

    def _times(self, node, a, b):
        if isinstance(a, Fraction):
            if isinstance(b, Fraction):
                return a * b
            return b.scale(a)
        if isinstance(b, Fraction):
            return a.scale(b)
        if isinstance(a, GradedPoly) and isinstance(b, GradedPoly):
            return a * b
        if isinstance(a, GradedPoly) and a.kind == "scalar":
            if isinstance(b, PolyDiffOp):
                return left_multiply(a, b)
            if isinstance(b, LOmegaElem):
                return LOmegaElem(a * b.form)
        raise self.err(node, f"cannot multiply {type(a).__name__} by {type(b).__name__}")

    def ev_wedge(self, node):
        a, b = self._binary(node)
        if isinstance(a, GradedPoly) and isinstance(b, GradedPoly):
            return a * b
        return self._times(node, a, b)

    def ev_pow(self, node):
        base = self.eval(node.children[0])
        n = node.value
        if isinstance(base, Fraction):
            if n < 0 and not base:
                raise self.err(node, "division by zero")
            return base ** n
        if not isinstance(base, GradedPoly):
            raise self.err(node, "powers apply to polynomials")
        if n < 0:
            # only monomials in eps can be inverted
            if len(base.terms) != 1:
                raise self.err(node, "negative powers need a single eps monomial")
            (k0, ks, xs, odd), c = next(iter(base.terms.items()))
            if any(ks) or any(xs) or odd or c != 1:
                raise self.err(node, "negative powers apply to eps only")
            return BaseSeries.eps(self.s.ctx, k0 * n)
        return base ** n

    def ev_tensor(self, node):
        a, b = self._binary(node)
        if not isinstance(a, PolyDiffOp) or not isinstance(b, PolyDiffOp):
            raise self.err(node, "tensor product needs operators on both sides")
        return cup(a, b)

    def ev_call(self, node):
        head = node.value
        if head not in HEADS and not re.fullmatch(r"ddx_?\d+", head):
            raise self.err(node, f"unknown function {head!r}")
        want = HEADS.get(head, 1)
        if want is not None and len(node.children) != want:
            raise self.err(node, f"{head} takes {want} argument(s), got {len(node.children)}")
        args = [self.eval(c) for c in node.children]
        s = self.s
        if head == "s":
            f = args[0]
            if isinstance(f, LOmegaElem):
                raise self.err(node, "already suspended")
            if isinstance(f, Fraction):
                f = BaseSeries.const(s.ctx, f)
            if not isinstance(f, GradedPoly) or f.kind not in ("dx", "scalar"):
                raise self.err(node, "s(...) takes an exterior form")
            return LOmegaElem(f)
        if head == "word":
            carrier = Carrier(s.ctx, "Omega")
            if not args:
                return WordSum(carrier)
            if not all(isinstance(a, LOmegaElem) for a in args):
                raise self.err(node, "word(...) takes suspended forms")
            return WordSum.of_values(args)
        if head.startswith("ddx"):
            i = int(head.lstrip("dx_"))
            a = args[0]
            if isinstance(a, LOmegaElem):
                return LOmegaElem(contract_dx(i, a.form))
            return contract_dx(i, a)
        if head == "d":
            a = args[0]
            if isinstance(a, LOmegaElem):
                return LOmegaElem(de_rham(a.form))
            return de_rham(a)
        if head == "sbr":
            return schouten_bilinear(*args)
        if head == "gbr":
            return gerstenhaber(*self._ops(node, args))
        if head == "hoch":
            return hochschild_d(*self._ops(node, args))
        if head == "cup":
            return cup(*self._ops(node, args))
        if head == "hkr":
            return hkr_embed(args[0])
        if head == "hkrp":
            return hkr_project(*self._ops(node, args))
        if head == "jw":
            return j_omega(args[0], s.pair, "forward")
        if head == "jwinv":
            return j_omega(args[0], s.pair, "inverse")
        if head == "obr":
            a, b = self._suspended(node, args)
            return omega_bracket(a, b, s.pair)
        if head == "pi":
            a, b = self._suspended(node, args)
            return LOmegaElem(pi_bilinear(a.form, b.form, s.pair.alpha_in(s.ctx)))
        raise self.err(node, f"unknown function {head!r}")

    def _ops(self, node, args):
        out = []
        for a in args:
            if isinstance(a, Fraction):
                a = PolyDiffOp.function(BaseSeries.const(self.s.ctx, a))
            elif isinstance(a, GradedPoly) and a.kind == "scalar":
                a = PolyDiffOp.function(a)
            if not isinstance(a, PolyDiffOp):
                raise self.err(node, "expected a polydifferential operator")
            out.append(a)
        return out

    def _suspended(self, node, args):
        if not all(isinstance(a, LOmegaElem) for a in args):
            raise self.err(node, "expected suspended forms s(...)")
        return args


# -- canonical printing ---------------------------------------------------------------------

def print_canonical(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    if isinstance(value, GradedPoly):
        return to_text(value)
    if isinstance(value, LOmegaElem):
        return str(value)
    if isinstance(value, PolyDiffOp):
        return op_text(value)
    if isinstance(value, WordSum):
        return words_text(value)
    if isinstance(value, Report):
        return json.dumps(value.to_dict(), sort_keys=True, ensure_ascii=False)
    raise TypeError(f"no canonical text for {type(value).__name__}")


def read_data(name):
    """Text of a bundled DSL data file."""
    try:
        return resources.files("mcdeform").joinpath("data", f"{name}.mcd").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"unknown example {name!r}") from None


def data_names():
    root = resources.files("mcdeform").joinpath("data")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".mcd"))


__all__ = ["tokenize", "parse_expr", "Session", "Evaluator", "print_canonical", "read_data", "data_names",
           "nonpoisson_field"]
