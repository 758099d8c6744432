"""Command-line entry point: ``centering-lab <command> [flags]``.

Exit codes: 0 success, 1 I/O, schema or flag error, 2 domain error,
3 an optimizer reported ``converged = false`` or the eigen-solver failed,
4 a verify check failed.
"""

from __future__ import annotations

import argparse
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, bcap, constants, interval, mixture, opnorm, verify
from .constants import Exponent, max_cp
from .errors import DomainError, EigenSolverError, SchemaError
from .interval import BetaAlgebra, sweep_csv
from .opnorm import OptimizerOptions
from .prob_core import FiniteProbSpace, Partition, centering_ratio, cond_exp_matrix
from .serialize import (canonical, dumps, load_distribution, load_functions, load_matrix,
                        load_partition, load_randvar, load_space, validate)

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_NOCONV, EXIT_VERIFY = 0, 1, 2, 3, 4

DEFAULT_P_TABLE = "1.1,1.25,1.5,2,3,4,8,16,inf"
FAMILIES = ("zero", "mean", "half-mean", "halves", "quarters", "eighths", "interleaved")

Outcome = Tuple[object, Optional[List[Sequence]], Optional[Sequence[str]], bool]


class UsageError(Exception):
    """Missing or conflicting flags; reported before any computation."""


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors (exit 1); exit 2 is reserved for domain errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _exponent(text: str) -> Exponent:
    try:
        return Exponent.parse(text)
    except (DomainError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_exponent, help="exponent in [1, inf]; 'inf' accepted")
    common.add_argument("--starts", type=int, default=64, help="multistart count (default 64)")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (default stdout)")

    ap = _Parser(prog="centering-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cp", parents=[common], help="C_p, or C_p(alpha) with --alpha")
    s.add_argument("--alpha", type=float)

    s = sub.add_parser("cp-table", parents=[common], help="C_p across exponents")
    s.add_argument("--ps", default=DEFAULT_P_TABLE, help=f"comma list (default {DEFAULT_P_TABLE})")

    s = sub.add_parser("opnorm", parents=[common], help="norm of I - E^G, or of a matrix")
    s.add_argument("--space", help="space JSON file")
    s.add_argument("--n", type=int, help="uniform space with n atoms instead of --space")
    s.add_argument("--partition", default="trivial", help="partition JSON file, 'trivial' or 'singletons'")
    s.add_argument("--matrix", help="matrix JSON file; its norm replaces I - E^G")
    s.add_argument("--lower", action="store_true", help="lower norm inf ||A u|| of --matrix")
    s.add_argument("--xi", help="random variable JSON file; report its centering ratio too")

    s = sub.add_parser("oracle", parents=[common], help="two-value oracle against the optimizer")
    s.add_argument("--space")
    s.add_argument("--n", type=int)

    s = sub.add_parser("mixture", parents=[common], help="zero-mean two-point decomposition")
    s.add_argument("--dist", help="distribution JSON file")
    s.add_argument("--xi", help="random variable JSON file (with --space and --p)")
    s.add_argument("--space")

    s = sub.add_parser("gbeta", parents=[common], help="norm of I - E^{G_beta}")
    s.add_argument("--beta", type=float)
    s.add_argument("--cells", type=int, help="also run the grid check on this many cells")
    s.add_argument("--target", type=float, help="find beta with this norm instead")
    s.add_argument("--xi", help="grid function JSON file to project")

    s = sub.add_parser("nu", parents=[common], help="||I - gamma E|| on uniform grids")
    s.add_argument("--gamma-re", type=float, default=1.0)
    s.add_argument("--gamma-im", type=float, default=0.0)
    s.add_argument("--n", type=_int_list, default=[2, 4, 8, 16, 32, 64])

    s = sub.add_parser("bcap", parents=[common], help="block approximant certificate")
    s.add_argument("--functions", required=True, help="grid function JSON file (single or batch)")
    s.add_argument("--eps", type=float, required=True)

    s = sub.add_parser("gamma-exp", parents=[common], help="compact-operator inequality experiment")
    s.add_argument("--matrix", help="matrix JSON file (fixes n)")
    s.add_argument("--family", choices=FAMILIES, help="built-in operator family, swept over --n")
    s.add_argument("--gamma-re", type=float, default=1.0)
    s.add_argument("--gamma-im", type=float, default=0.0)
    s.add_argument("--n", type=_int_list, default=list(bcap.REFINEMENT_LEVELS))
    s.add_argument("--eigen", action="store_true", help="eigenvalue check instead of a fixed gamma")

    s = sub.add_parser("verify", parents=[common], help="run invariant suites")
    s.add_argument("--suite", default="all", choices=("all",) + tuple(verify.SUITES))
    return ap


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command}: missing --{', --'.join(missing)}")


def _space(args) -> FiniteProbSpace:
    if (args.space is None) == (args.n is None):
        raise UsageError(f"{args.command}: give exactly one of --space, --n")
    return load_space(args.space) if args.space else FiniteProbSpace.uniform(args.n)


def _partition(text: str, n: int) -> Partition:
    if text == "trivial":
        return Partition.trivial(n)
    if text == "singletons":
        return Partition.singletons(n)
    return load_partition(text)


def _family(name: str, n: int) -> np.ndarray:
    if name == "zero":
        return np.zeros((n, n))
    if name == "mean":
        return bcap.mean_operator(n)
    if name == "half-mean":
        return 0.5 * bcap.mean_operator(n)
    if name == "interleaved":
        part = Partition((tuple(range(0, n, 2)), tuple(range(1, n, 2))))
        return cond_exp_matrix(part, FiniteProbSpace.uniform(n))
    return bcap.block_cond_exp(n, {"halves": 2, "quarters": 4, "eighths": 8}[name])


def _report_dict(r) -> Dict:
    d = {"value": r.value, "converged": r.converged, "method": r.method,
         "starts_used": r.starts_used, "witness": r.witness.values}
    if r.cross_check is not None:
        d["cross_check"] = r.cross_check
    return d


def _cmd_cp(args, opts) -> Outcome:
    _require(args, "p")
    p = args.p
    if args.alpha is not None:
        v = constants.cp_alpha(p, args.alpha)
        return {"p": p.value, "alpha": args.alpha, "value": v}, [[str(p), args.alpha, v]], \
            ("p", "alpha", "value"), True
    m = max_cp(p)
    return {"p": p.value, "value": m.value, "alpha": m.argmax_alpha}, \
        [[str(p), m.argmax_alpha if m.argmax_alpha is not None else "", m.value]], ("p", "alpha", "value"), True


def _cmd_cp_table(args, opts) -> Outcome:
    ps = [Exponent.parse(t.strip()) for t in args.ps.split(",") if t.strip()]
    rows = []
    for p in ps:
        m = max_cp(p)
        rows.append([str(p), m.value, m.argmax_alpha if m.argmax_alpha is not None else "",
                     max_cp(p.dual()).value, constants.riesz_thorin_bound(p)])
    header = ("p", "C_p", "alpha_p", "C_q", "interpolation_bound")
    table = [dict(zip(header, [r[0]] + [x if x != "" else None for x in r[1:]])) for r in rows]
    return {"rows": table}, rows, header, True


def _cmd_opnorm(args, opts) -> Outcome:
    _require(args, "p")
    sp = _space(args)
    if args.matrix:
        A = load_matrix(args.matrix)
        r = (opnorm.lower_norm if args.lower else opnorm.operator_norm)(A, sp, args.p, opts)
        res = {"quantity": "lower_norm" if args.lower else "operator_norm", **_report_dict(r)}
    else:
        if args.lower:
            raise UsageError("opnorm: --lower needs --matrix")
        part = _partition(args.partition, sp.size)
        part.validate(sp.size)
        r = opnorm.cp_of_space(sp, part, args.p, opts)
        res = {"quantity": "cp_of_space", "blocks": [list(b) for b in part.blocks], **_report_dict(r)}
        if args.xi:
            res["xi_ratio"] = centering_ratio(load_randvar(args.xi), part, sp, args.p)
    rows = [[str(args.p), sp.size, res["value"], r.converged]]
    return res, rows, ("p", "atoms", "value", "converged"), r.converged


def _cmd_oracle(args, opts) -> Outcome:
    _require(args, "p")
    sp = _space(args)
    o = opnorm.two_value_oracle(sp, args.p)
    r = opnorm.cp_of_space(sp, Partition.trivial(sp.size), args.p, opts)
    res = {"oracle": o.value, "subset_mass": o.subset_mass, "optimizer": r.value,
           "gap": r.value - o.value, "converged": r.converged}
    return res, [[str(args.p), sp.size, o.value, r.value, r.value - o.value]], \
        ("p", "atoms", "oracle", "optimizer", "gap"), r.converged


def _cmd_mixture(args, opts) -> Outcome:
    if args.dist:
        d = load_distribution(args.dist)
        mix = mixture.decompose_zero_mean(d)
        comps = [{"weight": w, "values": [c.value1, c.value2], "masses": [c.mass1, c.mass2]}
                 for w, c in mix.components]
        rows = [[w, c.value1, c.mass1, c.value2, c.mass2] for w, c in mix.components]
        return {"components": comps}, rows, ("weight", "value1", "mass1", "value2", "mass2"), True
    if args.xi and args.space:
        _require(args, "p")
        r = mixture.verify_ratio_via_mixture(load_randvar(args.xi), load_space(args.space), args.p)
        return {"ratio": r.ratio, "component_max": r.component_max, "C_p": max_cp(args.p).value}, \
            [[str(args.p), r.ratio, r.component_max]], ("p", "ratio", "component_max"), True
    raise UsageError("mixture: give --dist, or --xi with --space")


def _cmd_gbeta(args, opts) -> Outcome:
    _require(args, "p")
    if args.target is not None:
        t = interval.beta_for_target(args.p, args.target)
        return {"target": t.target, "beta": t.beta, "value": t.value, "trivial": t.trivial}, \
            [[str(args.p), t.target, t.beta if t.beta is not None else "", t.value]], \
            ("p", "target", "beta", "value"), True
    _require(args, "beta")
    b = BetaAlgebra(args.beta)
    res: Dict = {"p": args.p.value, "beta": b.beta, "value": interval.gbeta_norm(b, args.p)}
    ok = True
    if args.p.is_finite and args.p.value > 1:
        ext = interval.gbeta_extremal(b, args.p)
        res["extremal"] = {"values": ext.xi.values, "edges": ext.xi.edges, "ratio": ext.ratio,
                           "gamma_star": ext.gamma_star, "kappa": ext.kappa}
    if args.cells is not None:
        d = interval.discretize_check(b, args.p, args.cells, opts)
        res["grid"] = {"cells": args.cells, "atoms": d.atoms, "numeric_norm": d.numeric_norm,
                       "analytic_norm": d.analytic_norm, "converged": d.converged}
        ok = d.converged
    if args.xi:
        (f,) = load_functions(args.xi)[:1]
        g = interval.gbeta_cond_exp(b, f)
        res["projection"] = {"cells": g.cells, "values": g.values, "edges": g.edges}
    return res, [[str(args.p), b.beta, res["value"]]], ("p", "beta", "value"), ok


def _cmd_nu(args, opts) -> Outcome:
    _require(args, "p")
    gamma = complex(args.gamma_re, args.gamma_im)
    reps = [bcap.nu_report(gamma, args.p, n, opts) for n in args.n]
    rows = [[n, r.value, r.converged] for n, r in zip(args.n, reps)]
    res = {"gamma": gamma, "C_p": max_cp(args.p).value,
           "rows": [{"n": n, "nu": r.value, "converged": r.converged} for n, r in zip(args.n, reps)]}
    return res, rows, ("n", "nu", "converged"), all(r.converged for r in reps)


def _cmd_bcap(args, opts) -> Outcome:
    _require(args, "p")
    cert = bcap.build_bcap_approximant(load_functions(args.functions), args.p, args.eps, opts)
    res = {"epsilon": cert.epsilon, "p": cert.p, "rank": cert.rank,
           "blocks": [list(b) for b in cert.partition.blocks],
           "per_function_error": cert.per_function_error, "norm_bound": cert.norm_bound,
           "C_p": max_cp(args.p).value}
    rows = [[i, e] for i, e in enumerate(cert.per_function_error)]
    return res, rows, ("function", "error"), True


def _cmd_gamma_exp(args, opts) -> Outcome:
    _require(args, "p")
    if (args.matrix is None) == (args.family is None):
        raise UsageError("gamma-exp: give exactly one of --matrix, --family")
    if args.matrix:
        T = load_matrix(args.matrix)
        ops = [(T.shape[0], T)]
    else:
        ops = [(n, _family(args.family, n)) for n in args.n]
    if args.eigen:
        out, rows, ok = [], [], True
        for n, T in ops:
            ec = bcap.eigen_lower_bound_check(T, args.p, n, opts)
            ok &= ec.converged
            out.append({"n": n, "eigenvalues_tested": ec.eigenvalues_tested, "slacks": ec.slacks,
                        "min_slack": ec.min_slack, "lhs_norm": ec.lhs_norm, "sanctioned": ec.sanctioned})
            rows.append([n, ec.lhs_norm, ec.min_slack, ec.sanctioned])
        return {"rows": out}, rows, ("n", "lhs_norm", "min_slack", "sanctioned"), ok
    gamma = complex(args.gamma_re, args.gamma_im)
    exps = [bcap.gamma_inequality_experiment(T, gamma, args.p, n, opts) for n, T in ops]
    persistent = all(e.slack < bcap.PERSISTENT_NEGATIVE for e in exps)
    res = {"gamma": gamma, "persistent_negative": persistent,
           "sanctioned": all(bcap.is_sanctioned(T) for _, T in ops),
           "rows": [{"n": e.n, "lhs_norm": e.lhs_norm, "lower": e.lower, "nu": e.nu, "slack": e.slack}
                    for e in exps]}
    rows = [[e.n, e.lhs_norm, e.lower, e.nu, e.slack] for e in exps]
    return res, rows, ("n", "lhs_norm", "lower", "nu", "slack"), all(e.converged for e in exps)


def _cmd_verify(args, opts) -> Outcome:
    names = tuple(verify.SUITES) if args.suite == "all" else (args.suite,)
    rep = verify.run_all(args.seed, opts, names)
    rows = [[s["suite"], c["name"], c["passed"]] for s in rep["suites"] for c in s["checks"]]
    return rep, rows, ("suite", "check", "passed"), True


COMMANDS: Dict[str, Callable] = {
    "cp": _cmd_cp, "cp-table": _cmd_cp_table, "opnorm": _cmd_opnorm, "oracle": _cmd_oracle,
    "mixture": _cmd_mixture, "gbeta": _cmd_gbeta, "nu": _cmd_nu, "bcap": _cmd_bcap,
    "gamma-exp": _cmd_gamma_exp, "verify": _cmd_verify,
}


def render(args, result, rows, header, converged: bool) -> str:
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command}: no CSV form")
        return sweep_csv(rows, header)
    doc = canonical({
        "command": args.command,
        "metadata": {"seed": args.seed, "starts": args.starts, "version": __version__,
                     "p": str(args.p) if args.p is not None else None},
        "converged": bool(converged),
        "result": result,
    })
    validate(doc, "output")
    return dumps(doc)


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        opts = OptimizerOptions(starts=args.starts, seed=args.seed)
        result, rows, header, converged = COMMANDS[args.command](args, opts)
        text = render(args, result, rows, header, converged)
    except SystemExit as exc:
        # argparse usage errors and --help
        return int(exc.code or 0)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"{ap.prog}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except EigenSolverError as exc:
        print(f"error: eigen-solver failure: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "verify" and not result["passed"]:
        return EXIT_VERIFY
    return EXIT_OK if converged else EXIT_NOCONV


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
