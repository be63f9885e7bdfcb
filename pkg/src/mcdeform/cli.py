"""Command-line front end: ``mcdeform <command> [options]``.

Every command prints one JSON object (sorted keys) and exits with 0 when the
check passes, 1 when it fails or the kernel rejects the input (a wrong degree
included), and 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coderivations import (WordSum, coalgebra_morphism_defect, conjugation_residual, exp_pi, pi_setup,
                            theta_pi_pipeline, value_to_words, verify_pi_identities, higher_components)
from .deformation import (PathElem, gauge_act, ks_class, ks_integrability, mc_check, mc_path_check, omega_context,
                          omega_zero_context, pd_context, pv_context)
from .dsl import Session, print_canonical, read_data
from .errors import ArgumentError, ContextError, KernelError, ParseError
from .forms import LOmegaElem, membership_table
from .polydiff import PolyDiffOp, ainfty_from_mc, ainfty_relations_check
from .polyvectors import Polyvector
from .sampling import random_words, rng_for

USAGE_ERRORS = (ParseError, ArgumentError, ContextError)
COMMANDS = ("check-mc", "gauge", "ks", "integrable", "ainfty", "stasheff", "pi-verify", "exp-pi", "theta-pi",
            "path-check", "membership")
CONTEXTS = ("pv", "pd", "omega-zero", "omega")


class UsageError(Exception):
    pass


def build_parser():
    p = argparse.ArgumentParser(prog="mcdeform", description="Maurer-Cartan checks and pipelines over exact rationals.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--m", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--degrees", help="comma-separated parameter degrees")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--eps-floor", type=int)
    p.add_argument("--W", type=int, dest="W")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixture", help="standard2, standard4, shear4, shear<m>[:power], nonpoisson4")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--file", help="DSL source file")
    src.add_argument("--example", help="bundled example name")
    p.add_argument("--expr", help="expression evaluated after any file or example")
    p.add_argument("--context", choices=CONTEXTS)
    p.add_argument("--xi", help="gauge parameter expression")
    p.add_argument("--max-arity", type=int, default=4)
    p.add_argument("--k", type=int, default=1, help="filtration index for membership")
    p.add_argument("--samples", type=int, default=100, help="random length-2 words (length-3 gets half)")
    return p


def make_session(args):
    s = Session(seed=args.seed, fixture=args.fixture, time=args.command == "path-check")
    text = None
    if args.file:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as e:
            raise UsageError(str(e)) from None
    elif args.example:
        text = read_data(args.example)
    last = s.run(text) if text else None
    # command-line settings override the file
    over = {k: getattr(args, k) for k in ("m", "g", "N", "eps_floor", "W") if getattr(args, k) is not None}
    if args.degrees is not None:
        try:
            over["degrees"] = tuple(int(d) for d in args.degrees.split(",") if d)
        except ValueError:
            raise UsageError(f"bad --degrees {args.degrees!r}") from None
    if "g" in over and "degrees" not in over:
        over["degrees"] = (0,) * over["g"]
    if over:
        if text:
            s = Session(**{**s.cfg, **over, "fixture": s.fixture})
            s.run(text)
        else:
            s.set(**over)
    if args.fixture:
        s.fixture = args.fixture
        s._pair = None
    return s, last


def input_value(args, s, last, required=True):
    if args.expr is not None:
        return s.evaluate(args.expr)
    for name in ("mu", "eta", last):
        if name and name in s.names:
            return s.names[name]
    if required:
        raise UsageError("no input: give --expr, --file or --example")
    return None


def context_for(args, s, value):
    kind = args.context
    if kind is None:
        if isinstance(value, PolyDiffOp):
            kind = "pd"
        elif isinstance(value, Polyvector):
            kind = "pv"
        elif isinstance(value, LOmegaElem):
            kind = "omega"
        else:
            raise UsageError("cannot infer a context; use --context")
    if kind == "pd":
        return pd_context(s.ctx)
    if kind == "pv":
        return pv_context(s.pair, s.ctx)
    if kind == "omega-zero":
        return omega_zero_context(s.ctx)
    return omega_context(s.pair, s.ctx)


def _report(rep, ctx):
    d = rep.to_dict()
    d["certificate"] = rep.certificate(ctx)
    return d, rep.status


def cmd_check_mc(args, s, last):
    mu = input_value(args, s, last)
    L = context_for(args, s, mu)
    return _report(mc_check(mu, L), s.ctx)


def cmd_gauge(args, s, last):
    mu = input_value(args, s, last)
    if args.xi is None:
        raise UsageError("gauge needs --xi")
    xi = s.evaluate(args.xi)
    L = context_for(args, s, mu)
    out = gauge_act(xi, mu, L)
    d, ok = _report(mc_check(out, L), s.ctx)
    d["result"] = print_canonical(out)
    return d, ok


def cmd_ks(args, s, last):
    kappa = ks_class(input_value(args, s, last))
    return {"check": "ks", "status": "pass", "ks_class": print_canonical(kappa), "context_tag": s.ctx.tag()}, True


def cmd_integrable(args, s, last):
    v = input_value(args, s, last)
    kappa = ks_class(v) if isinstance(v, PolyDiffOp) else v
    if not isinstance(kappa, Polyvector):
        raise ArgumentError("integrability needs an operator or a bivector")
    d = ks_integrability(kappa).to_dict()
    d["ks_class"] = print_canonical(kappa)
    return d, d["status"] == "pass"


def cmd_ainfty(args, s, last):
    A = ainfty_from_mc(input_value(args, s, last))
    rows = [{"arity": n, "monomial": key, "coefficient": c} for n, key, c in A.table()]
    return {"check": "ainfty", "status": "pass", "context_tag": s.ctx.tag(), "arity_cutoff": A.n_max,
            "multiplications": rows}, True


def cmd_stasheff(args, s, last):
    A = ainfty_from_mc(input_value(args, s, last))
    rep = ainfty_relations_check(A, args.max_arity)
    d, ok = _report(rep, s.ctx)
    d["max_arity"] = args.max_arity
    return d, ok


def cmd_pi_verify(args, s, last):
    ws = random_words(rng_for(args.seed), s.ctx, 2, args.samples)
    ws3 = random_words(rng_for(args.seed + 1), s.ctx, 3, max(1, args.samples // 2))
    return _report(verify_pi_identities(s.pair, s.ctx, ws, ws3), s.ctx)


def cmd_exp_pi(args, s, last):
    Pi, Qd, Qw = pi_setup(s.pair, s.ctx)
    F, Finv = exp_pi(Pi)
    value = input_value(args, s, last, required=False)
    if value is not None:
        ws = value if isinstance(value, WordSum) else value_to_words(value)
        image = F(ws)
        ok = Finv(image) == ws
        return {"check": "exp-pi", "status": "pass" if ok else "fail", "context_tag": s.ctx.tag(),
                "image": print_canonical(image)}, ok
    rng = rng_for(args.seed)
    count = max(1, args.samples // 10)
    failures = []
    total = 0
    for n in range(1, s.ctx.W + 1):
        for w in random_words(rng, s.ctx, n, count):
            total += 1
            if Finv(F(w)) != w:
                failures.append(("inverse", w))
            elif conjugation_residual(F, Finv, Qd, Qw, w):
                failures.append(("conjugation", w))
            elif coalgebra_morphism_defect(F, w):
                failures.append(("coalgebra", w))
    ok = not failures
    d = {"check": "exp-pi", "status": "pass" if ok else "fail", "context_tag": f"{s.pair.name}:{s.ctx.tag()}",
         "first_failure_key": None if ok else f"{failures[0][0]}: {print_canonical(failures[0][1])}",
         "samples": total}
    return d, ok


def cmd_theta_pi(args, s, last):
    eta = input_value(args, s, last)
    if not isinstance(eta, LOmegaElem):
        raise ArgumentError("pipeline input must be a suspended form")
    y, v = theta_pi_pipeline(eta, s.pair)
    ok = y.report.status and v.report.status
    d = {"check": "theta-pi", "status": "pass" if ok else "fail", "context_tag": f"{s.pair.name}:{s.ctx.tag()}",
         "omega_level": {"value": print_canonical(y.value), **y.certificate()},
         "pv_level": {"value": print_canonical(v.value), **v.certificate(),
                      "in_ltilde_pv": v.report.extra.get("in_ltilde_pv")},
         "higher_components": print_canonical(higher_components(v.value))}
    return d, ok


def cmd_path_check(args, s, last):
    if "eta_t" in s.names and args.expr is None:
        eta_dt = s.names.get("eta_dt", LOmegaElem.zero(s.ctx))
        path = PathElem(s.names["eta_t"], eta_dt)
    else:
        X = input_value(args, s, last)
        if not isinstance(X, LOmegaElem):
            raise ArgumentError("a path is a suspended form on the time axis")
        path = PathElem.from_combined(X)
    L = omega_zero_context(s.ctx) if args.context == "omega-zero" else omega_context(s.pair, s.ctx)
    rep, (start, end) = mc_path_check(path, L)
    d, ok = _report(rep, s.ctx)
    d["start"] = print_canonical(start)
    d["end"] = print_canonical(end)
    return d, ok


def cmd_membership(args, s, last):
    v = input_value(args, s, last)
    if not isinstance(v, LOmegaElem):
        raise ArgumentError("membership is defined for suspended forms")
    table = membership_table(v, args.k)
    return {"check": "membership", "status": "pass", "context_tag": s.ctx.tag(), "spaces": table,
            "value": print_canonical(v)}, True


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def run(argv):
    """Run one command; returns (exit status, output text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (e.code if isinstance(e.code, int) else 2), ""
    try:
        s, last = make_session(args)
        body, ok = HANDLERS[args.command](args, s, last)
        status = 0 if ok else 1
    except (UsageError, *USAGE_ERRORS) as e:
        body, status = {"error": str(e), "kind": type(e).__name__}, 2
    except (KernelError, ArithmeticError) as e:
        body, status = {"error": str(e), "kind": type(e).__name__, "status": "fail"}, 1
    body.setdefault("command", args.command)
    return status, json.dumps(body, sort_keys=True, ensure_ascii=False)


def main(argv=None):
    status, text = run(sys.argv[1:] if argv is None else argv)
    if text:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
