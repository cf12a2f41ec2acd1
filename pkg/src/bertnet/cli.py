"""Command-line front end.

Exit codes: 0 on success, 1 when a verdict is negative (not an equilibrium,
infeasible sketch, bound violation, no convergence) and 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bounds as bnd
from . import io as fio
from .boundary_search import solve_free_boundaries
from .closed_form import (
    clique_candidate,
    solve_line_single_captive,
    solve_star,
    solve_tree_single_captive,
    solve_two_sellers,
)
from .errors import BertnetError, Infeasible, MalformedInput, NoConvergence, StrictViolated
from .fp_oracle import FpConfig, TieRule, run_fictitious_play
from .network import Network, validate_network
from .numerics import format_scalar
from .sketch import sketch_solution_to_profile, solve_sketch
from .verifier import Verdict, equilibrium_utilities, verify_profile

log = logging.getLogger("bertnet")

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=None, help="rational arithmetic (default)")
    mode.add_argument("--float", dest="exact", action="store_false", help="floating-point arithmetic")
    p.add_argument("--tol", type=float, default=None, help="comparison tolerance (default: exact, or 1e-8 for floats)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", type=Path, default=None, help="output file or directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="bertnet", description="Price competition equilibria on seller networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="closed-form solvers")
    p.add_argument("family", choices=["two", "line", "tree", "star", "clique"])
    p.add_argument("network", type=Path)
    p.add_argument("--root", default=None, help="tree root seller id (default: the captive seller)")
    p.add_argument("--points", type=int, default=512, help="CSV grid size")

    p = sub.add_parser("sketch-solve", parents=[common], help="solve LP1 for a sketch with known boundary points")
    p.add_argument("network", type=Path)
    p.add_argument("sketch", type=Path)
    p.add_argument("--points", type=int, default=512)

    p = sub.add_parser("search-boundaries", parents=[common], help="find boundary points for a sketch shape")
    p.add_argument("network", type=Path)
    p.add_argument("shape", type=Path)
    p.add_argument("--guess", default=None, help="comma-separated initial boundary points, starting with 1")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--points", type=int, default=512)

    p = sub.add_parser("verify", parents=[common], help="check a profile for equilibrium")
    p.add_argument("network", type=Path)
    p.add_argument("profile", type=Path)
    p.add_argument("--tie-rule", choices=["win", "split"], default="win")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")

    p = sub.add_parser("fp", parents=[common], help="fictitious play histogram")
    p.add_argument("network", type=Path)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--tie-rule", choices=[r.value for r in TieRule], default=TieRule.SPLIT_EQUALLY.value)
    p.add_argument("--burn-in", type=float, default=0.1)

    p = sub.add_parser("bounds", parents=[common], help="utility bounds and checks")
    p.add_argument("network", type=Path)
    p.add_argument("profile", type=Path, nargs="?", default=None)
    p.add_argument("--cut", action="append", default=[], help="comma-separated seller ids forming G (repeatable)")
    p.add_argument("--big-edges", default=None, help="comma-separated a-b seller id pairs for the big-cut bound")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export-cdf", parents=[common], help="grid-sampled CDF CSV of a profile")
    p.add_argument("network", type=Path)
    p.add_argument("profile", type=Path)
    p.add_argument("--points", type=int, default=512)
    return parser


def _emit(args, text: str, name: str | None = None) -> None:
    """Write to --out (a file, or a directory when ``name`` is given) or stdout."""
    if args.out is None:
        sys.stdout.write(text)
        return
    target = args.out
    if name is not None:
        target.mkdir(parents=True, exist_ok=True)
        target = target / name
    fio.write_text(target, text)
    log.info("wrote %s", target)


def _fmt(x) -> str:
    v = format_scalar(x)
    return v if isinstance(v, str) else f"{v:.10g}"


def _exact(args, default: bool = True) -> bool:
    return default if args.exact is None else args.exact


def _write_profile(args, net: Network, profile, utilities, boundary=None, points: int = 512) -> None:
    doc = fio.dumps(fio.profile_to_json(net, profile, utilities, boundary))
    csv_text = fio.profile_csv(net, profile, points)
    if args.out is None:
        return
    _emit(args, doc, "profile.json")
    _emit(args, csv_text, "profile.csv")


def _print_utilities(net: Network, u) -> None:
    print("u = (" + ", ".join(_fmt(x) for x in u) + ")")
    for i, x in enumerate(u):
        print(f"  seller {net.labels[i]}: {_fmt(x)}")


def _verdict_code(net: Network, profile, args) -> int:
    rep = verify_profile(net, profile, args.tol)
    print(f"verdict: {rep.verdict.value}")
    return EXIT_OK if rep.verdict is Verdict.EQUILIBRIUM else EXIT_NEGATIVE


def cmd_solve(args) -> int:
    net = fio.load_network(args.network, exact=True)
    fam = args.family
    boundary = None
    if fam == "two":
        if net.n != 2 or len(net.beta) != 1:
            raise MalformedInput("'solve two' needs a network of two sellers sharing one market")
        profile = solve_two_sellers(net.alpha[0], net.alpha[1], net.b(0, 1))
        u = equilibrium_utilities(net, profile)
    elif fam in ("line", "tree"):
        if fam == "line":
            sol = solve_line_single_captive(net)
        else:
            root = None if args.root is None else fio.seller_index(net, args.root)
            sol = solve_tree_single_captive(net, root)
        profile, u, boundary = sol.profile, sol.utilities, sol.T
    elif fam == "star":
        center = max(range(net.n), key=net.degree)
        leaves = [i for i in range(net.n) if i != center]
        if len(net.beta) != len(leaves) or any(not net.has_edge(center, i) for i in leaves):
            raise MalformedInput("'solve star' needs a star network")
        sol = solve_star(net.alpha[center], [net.alpha[i] for i in leaves], [net.b(center, i) for i in leaves])
        # solver labelling is center first, then the leaves in file order
        order = [center] + leaves
        pos = {old: new for new, old in enumerate(order)}
        perm = [pos[i] for i in range(net.n)]
        profile = sol.profile.permuted(perm)
        u = [sol.utilities[p] for p in perm]
        boundary = sol.b
    else:
        order = sorted(range(net.n), key=lambda i: net.alpha[i], reverse=True)
        if len(net.beta) != net.n * (net.n - 1) // 2 or any(b != 1 for b in net.beta.values()):
            raise MalformedInput("'solve clique' needs a unit-weight clique")
        cand = clique_candidate([net.alpha[i] for i in order])
        pos = {old: new for new, old in enumerate(order)}
        perm = [pos[i] for i in range(net.n)]
        profile = cand.profile.permuted(perm)
        u = equilibrium_utilities(net, profile)
        boundary = cand.t
        print("note: clique construction is a candidate; verifying")
    _print_utilities(net, u)
    if boundary is not None:
        print("T = (" + ", ".join(_fmt(t) for t in boundary) + ")")
    _write_profile(args, net, profile, u, boundary, args.points)
    return _verdict_code(net, profile, args)


def cmd_sketch_solve(args) -> int:
    exact = _exact(args)
    net = fio.load_network(args.network, exact)
    sketch = fio.sketch_from_json(net, fio.read_json(args.sketch), exact)
    try:
        ss = solve_sketch(net, sketch)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        for row in exc.violated:
            print(f"  {row}", file=sys.stderr)
        return EXIT_NEGATIVE
    profile = sketch_solution_to_profile(ss)
    _print_utilities(net, ss.u)
    if not ss.unique:
        print("warning: sketch is not full rank; solution may not be unique")
    if args.out is not None:
        _emit(args, fio.dumps(fio.solution_to_json(net, ss)), "solution.json")
    _write_profile(args, net, profile, ss.u, ss.T, args.points)
    return _verdict_code(net, profile, args)


def cmd_search(args) -> int:
    net = fio.load_network(args.network, exact=True)
    fbs = fio.free_sketch_from_json(net, fio.read_json(args.shape))
    guess = None
    if args.guess:
        try:
            guess = [float(v) for v in args.guess.split(",")]
        except ValueError as exc:
            raise MalformedInput(f"bad --guess: {exc}") from exc
    code = EXIT_OK
    try:
        ss = solve_free_boundaries(net, fbs, guess, rng_seed=args.seed, max_restarts=args.restarts)
    except StrictViolated as exc:
        print(f"strict inequalities violated: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        ss = exc.solution
        code = EXIT_NEGATIVE
        if ss is None:
            return code
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    print("T = (" + ", ".join(_fmt(t) for t in ss.T) + ")")
    _print_utilities(net, ss.u)
    if args.out is not None:
        _emit(args, fio.dumps(fio.solution_to_json(net, ss)), "solution.json")
    profile = sketch_solution_to_profile(ss)
    _write_profile(args, net, profile, ss.u, ss.T, args.points)
    verdict = _verdict_code(net, profile, args)
    return max(code, verdict)


def cmd_verify(args) -> int:
    net = fio.load_network(args.network, _exact(args))
    profile = fio.load_profile(net, args.profile)
    rep = verify_profile(net, profile, args.tol, args.tie_rule)
    doc = rep.to_json()
    if args.json:
        print(fio.dumps(doc), end="")
    else:
        print(rep.to_table(list(net.labels)))
        if not rep.is_equilibrium:
            w = rep.worst_seller()
            print(f"worst deviation: seller {net.labels[w.seller]} at price {_fmt(w.best_price)} gains {_fmt(w.gain)}")
    if args.out is not None:
        _emit(args, fio.dumps(doc))
    return EXIT_OK if rep.verdict is Verdict.EQUILIBRIUM else EXIT_NEGATIVE


def cmd_fp(args) -> int:
    net = fio.load_network(args.network, exact=False)
    cfg = FpConfig(args.grid, args.iters, args.tie_rule, args.seed, args.burn_in)
    emp = run_fictitious_play(net, cfg)
    _emit(args, emp.to_csv())
    return EXIT_OK


def cmd_bounds(args) -> int:
    exact = _exact(args)
    net = fio.load_network(args.network, exact)
    validate_network(net)
    u = None
    if args.profile is not None:
        profile = fio.load_profile(net, args.profile)
        rep = verify_profile(net, profile, args.tol)
        if not rep.is_equilibrium:
            print(f"warning: profile verdict is {rep.verdict.value}; bounds only hold at equilibria", file=sys.stderr)
        u = equilibrium_utilities(net, profile)
    cuts = [[fio.seller_index(net, s) for s in c.split(",")] for c in args.cut]
    code = EXIT_OK
    if u is not None:
        report = bnd.check_bounds(net, u, args.tol, cuts if cuts else "all")
        if report.violations:
            code = EXIT_NEGATIVE
    else:
        pb = bnd.path_bounds(net)
        cut = {}
        for G in cuts:
            eps, d, dg, per = bnd.cut_bound(net, G)
            cut[frozenset(G)] = (eps, d, dg, next(iter(per.values())))
        report = bnd.BoundReport([lo for lo, _ in pb], [hi for _, hi in pb], bnd.chain_lower_bounds(net), cut)
    if args.big_edges:
        pairs = []
        for item in args.big_edges.split(","):
            a, _, b = item.partition("-")
            pairs.append((fio.seller_index(net, a), fio.seller_index(net, b)))
        report.big_cut = bnd.big_cut_bound(net, pairs)
        if u is not None:
            for i, b in report.big_cut.items():
                if u[i] > b:
                    report.violations.append(bnd.Violation("bigcut", i, f"u_{i} above big-cut bound"))
                    code = EXIT_NEGATIVE
    doc = report.to_json()
    if args.json or args.out is not None:
        _emit(args, fio.dumps(doc))
    if not args.json:
        for i in range(net.n):
            print(
                f"seller {net.labels[i]}: path [{_fmt(report.lower[i])}, {_fmt(report.upper[i])}]"
                f"  chain lower {_fmt(report.chain_lower[i])}" + (f"  u = {_fmt(u[i])}" if u is not None else "")
            )
        shown = report.cut.items() if cuts else []
        for G, (eps, d, dg, b) in shown:
            print(f"cut {sorted(net.labels[i] for i in G)}: eps {_fmt(eps)}  Delta_G {_fmt(d)}  D_G {dg}  bound {_fmt(b)}")
        if report.big_cut is not None:
            for i, b in report.big_cut.items():
                print(f"big-cut bound seller {net.labels[i]}: {_fmt(b)}")
        for v in report.violations:
            print(f"violation ({v.kind}): {v.detail}")
    return code


def cmd_export_cdf(args) -> int:
    net = fio.load_network(args.network, _exact(args))
    profile = fio.load_profile(net, args.profile)
    _emit(args, fio.profile_csv(net, profile, args.points))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sketch-solve": cmd_sketch_solve,
    "search-boundaries": cmd_search,
    "verify": cmd_verify,
    "fp": cmd_fp,
    "bounds": cmd_bounds,
    "export-cdf": cmd_export_cdf,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (BertnetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
