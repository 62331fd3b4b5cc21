"""Command-line front end for the combined word problem and isotropy checks."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from . import __version__
from .combine import AmbiguityError, Combination, IndexSetViolation, InternalError, index_set
from .isotropy import (
    DEFAULT_INVERSE_BOUND,
    DEFAULT_SIZE_BOUND,
    Member,
    RefutedCommutation,
    RefutedInvertibility,
    check_hypotheses,
    enumerate_group,
    hypotheses_hold,
    is_member,
)
from .sexpr import SexprError
from .solvers import TheoryFormatError, UnsupportedShape, Verdict, decide_bruteforce, load_theory
from .terms import (
    Term,
    TermError,
    aliens,
    indeterminate_index,
    print_term,
    rank,
    set_max_term_nodes,
)

FORMAT_VERSION = 1
EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    theory_paths: List[str]
    generators: Optional[int] = None
    size_bound: int = DEFAULT_SIZE_BOUND
    inverse_bound: int = DEFAULT_INVERSE_BOUND
    oracle_budget: int = 100_000
    output_format: str = "text"
    widen: List[int] = field(default_factory=list)

    def validate(self) -> None:
        if not 1 <= len(self.theory_paths) <= 2:
            raise ValueError("give one or two --theory arguments")
        if self.generators is not None and self.generators < 0:
            raise ValueError("--generators must be non-negative")
        for name in ("size_bound", "inverse_bound", "oracle_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")

    def combination(self) -> Combination:
        return Combination([load_theory(p) for p in self.theory_paths], self.generators)


class Reporter:
    """Collects a structured report and renders it as text or JSON."""

    def __init__(self, cfg: RunConfig, command: str, out=None):
        self.json = cfg.output_format == "json"
        self.out = out or sys.stdout
        self.data = {"format_version": FORMAT_VERSION, "command": command}

    def line(self, text: str) -> None:
        if not self.json:
            print(text, file=self.out)

    def finish(self, code: int) -> int:
        if self.json:
            self.data["exit_code"] = code
            print(json.dumps(self.data, indent=2, sort_keys=True, ensure_ascii=False), file=self.out)
        return code


def _infer_J(terms: Sequence[Term], widen: Sequence[int]):
    occurring = {indeterminate_index(i) for t in terms for i in t.indets}
    return index_set(occurring | set(widen))


def cmd_decide(cfg: RunConfig, s_text: str, t_text: str, rep: Reporter) -> int:
    comb = cfg.combination()
    s, t = comb.parse(s_text), comb.parse(t_text)
    J = _infer_J((s, t), cfg.widen)
    verdict = comb.decide(s, t, J)
    rep.data.update(s=print_term(s), t=print_term(t), J=sorted(J), verdict=verdict.value)
    rep.line(verdict.value)
    return {Verdict.EQUAL: EXIT_OK, Verdict.NOT_EQUAL: EXIT_NO}.get(verdict, EXIT_ERROR)


def cmd_normalize(cfg: RunConfig, t_text: str, rep: Reporter) -> int:
    comb = cfg.combination()
    t = comb.parse(t_text)
    r = comb.canonical_representative(t)
    rep.data.update(term=print_term(t), representative=print_term(r),
                    rank_before=rank(t), rank_after=rank(r))
    rep.line(print_term(r))
    rep.line(f"rank {rank(t)} -> {rank(r)}")
    return EXIT_OK


def _alien_tree(t: Term) -> dict:
    return {"term": print_term(t), "rank": rank(t), "layer": t.layer.name,
            "aliens": [_alien_tree(a) for a in aliens(t)]}


def _render_tree(node: dict, depth: int, rep: Reporter) -> None:
    for a in node["aliens"]:
        rep.line(f"{'  ' * depth}- {a['term']}  (rank {a['rank']}, {a['layer']})")
        _render_tree(a, depth + 1, rep)


def cmd_inspect(cfg: RunConfig, t_text: str, rep: Reporter) -> int:
    comb = cfg.combination()
    t = comb.parse(t_text)
    tree = _alien_tree(t)
    rep.data.update(tree)
    rep.line(f"term  {tree['term']}")
    rep.line(f"rank  {tree['rank']}")
    rep.line(f"root  {tree['layer']}")
    if tree["aliens"]:
        rep.line("aliens")
        _render_tree(tree, 1, rep)
    else:
        rep.line("aliens  none")
    return EXIT_OK


def cmd_check(cfg: RunConfig, t_text: str, rep: Reporter) -> int:
    comb = cfg.combination()
    t = comb.parse(t_text)
    v = is_member(comb, t, cfg.inverse_bound)
    rep.data.update(term=print_term(t), verdict=v.kind)
    if isinstance(v, Member):
        rep.data["inverse"] = print_term(v.inverse)
        rep.line(f"Member (inverse {print_term(v.inverse)})")
        return EXIT_OK
    if isinstance(v, RefutedCommutation):
        rep.data["symbol"] = v.symbol.name
        rep.line(f"RefutedCommutation (fails to commute with {v.symbol.name})")
        return EXIT_NO
    if isinstance(v, RefutedInvertibility):
        rep.data["reason"] = v.reason
        rep.line(f"RefutedInvertibility ({v.reason})")
        return EXIT_NO
    rep.data["bound"] = v.bound
    rep.line(f"InvertibilityUnknown (no inverse up to size {v.bound})")
    return EXIT_ERROR


def cmd_enumerate(cfg: RunConfig, rep: Reporter) -> int:
    comb = cfg.combination()
    if cfg.generators is None:
        comb = comb.with_generators(0)
    report = enumerate_group(comb, cfg.size_bound, cfg.inverse_bound)
    rep.data.update(report.as_dict())
    rep.line(f"n = {report.generators_count}, size bound {report.size_bound}, "
             f"inverse bound {report.inverse_bound}")
    rep.line(f"candidates {report.candidates}, classes {report.classes}, "
             f"refuted by commutation {report.refuted_commutation}, "
             f"refuted by invertibility {report.refuted_invertibility}")
    for m in report.members:
        rep.line(f"member  {print_term(m.term)}  inverse {print_term(m.inverse)}")
    for t in report.flagged:
        rep.line(f"flagged {print_term(t)}  (InvertibilityUnknown)")
    if report.flagged:
        rep.line("inconclusive: some candidates have no inverse within the bound")
        return EXIT_ERROR
    if report.trivial:
        rep.line("group is trivial: {[x]}")
        return EXIT_OK
    rep.line(f"group is nontrivial: {len(report.members)} member classes found")
    return EXIT_NO


def cmd_hypotheses(cfg: RunConfig, rep: Reporter) -> int:
    comb = cfg.combination()
    reports = check_hypotheses(comb)
    rep.data["theories"] = [r.as_dict() for r in reports]
    for r in reports:
        name = r.theory or "(empty)"
        rep.line(f"T{int(r.layer)} {name}: {r.status}" + (f": {r.reason}" if r.reason else ""))
    if hypotheses_hold(reports):
        rep.data["status"] = "holds"
        return EXIT_OK
    unknown = any(r.status == "unknown" for r in reports)
    violated = any(r.status == "violated" for r in reports)
    rep.data["status"] = "violated" if violated else "unknown"
    return EXIT_NO if violated or not unknown else EXIT_ERROR


def cmd_oracle(cfg: RunConfig, s_text: str, t_text: str, rep: Reporter) -> int:
    comb = cfg.combination()
    s, t = comb.parse(s_text), comb.parse(t_text)
    axioms = [a for th in comb.theories.values() for a in th.axioms]
    v = decide_bruteforce(axioms, s, t, cfg.oracle_budget)
    rep.data.update(s=print_term(s), t=print_term(t), budget=cfg.oracle_budget, verdict=v.value)
    rep.line(v.value)
    return EXIT_OK if v is Verdict.EQUAL else EXIT_ERROR


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _indices(text: str) -> List[int]:
    try:
        out = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated indices") from None
    if any(i < 0 for i in out):
        raise argparse.ArgumentTypeError("indices must be non-negative")
    return out


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--theory", action="append", default=d(None), metavar="PATH",
                        help="theory file or bundled name; give one or two")
    parser.add_argument("--generators", type=int, default=d(None), metavar="N",
                        help="number of generators y1..yN (default: inferred from input)")
    parser.add_argument("--size-bound", type=_positive, default=d(DEFAULT_SIZE_BOUND))
    parser.add_argument("--inverse-bound", type=_positive, default=d(DEFAULT_INVERSE_BOUND))
    parser.add_argument("--oracle-budget", type=_positive, default=d(100_000))
    parser.add_argument("--json", action="store_true", default=d(False),
                        help="emit a structured JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isokit", description="Word problems and isotropy for disjoint theory combinations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", parents=[common], help="decide provable equality of two terms")
    p.add_argument("s")
    p.add_argument("t")
    p.add_argument("--widen", type=_indices, default=[], metavar="I,J",
                   help="extra indeterminate indices to admit")

    p = sub.add_parser("normalize", parents=[common], help="print the canonical representative")
    p.add_argument("term")

    p = sub.add_parser("inspect", parents=[common], help="show rank and alien decomposition")
    p.add_argument("term")

    p = sub.add_parser("isotropy", parents=[common], help="isotropy group queries")
    iso = p.add_subparsers(dest="mode", required=True)
    q = iso.add_parser("check", parents=[common], help="membership of one candidate")
    q.add_argument("term")
    iso.add_parser("enumerate", parents=[common], help="enumerate the group up to the size bound")
    iso.add_parser("hypotheses", parents=[common], help="check the no-projection/no-constant hypothesis")

    p = sub.add_parser("oracle", parents=[common], help="brute-force rewriting semi-decision")
    p.add_argument("s")
    p.add_argument("t")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        theory_paths=list(args.theory or []),
        generators=args.generators,
        size_bound=args.size_bound,
        inverse_bound=args.inverse_bound,
        oracle_budget=args.oracle_budget,
        output_format="json" if args.json else "text",
        widen=list(getattr(args, "widen", []) or []),
    )
    cfg.validate()
    return cfg


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "isotropy" else f"isotropy {args.mode}"
    try:
        cfg = _config(args)
    except ValueError as e:
        print(f"isokit: error: {e}", file=err)
        return EXIT_ERROR
    rep = Reporter(cfg, command, out)
    try:
        if args.command == "decide":
            code = cmd_decide(cfg, args.s, args.t, rep)
        elif args.command == "normalize":
            code = cmd_normalize(cfg, args.term, rep)
        elif args.command == "inspect":
            code = cmd_inspect(cfg, args.term, rep)
        elif args.command == "oracle":
            code = cmd_oracle(cfg, args.s, args.t, rep)
        elif args.mode == "check":
            code = cmd_check(cfg, args.term, rep)
        elif args.mode == "enumerate":
            code = cmd_enumerate(cfg, rep)
        else:
            code = cmd_hypotheses(cfg, rep)
    except (TermError, SexprError, TheoryFormatError, UnsupportedShape, AmbiguityError,
            IndexSetViolation, InternalError, OSError, ValueError) as e:
        print(f"isokit: error: {type(e).__name__}: {e}", file=err)
        rep.data.update(error=type(e).__name__, message=str(e))
        return rep.finish(EXIT_ERROR) if rep.json else EXIT_ERROR
    return rep.finish(code)


def main(argv: Sequence[str] | None = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    cap = os.environ.get("ISOKIT_MAX_TERM_NODES")
    if cap:
        try:
            set_max_term_nodes(int(cap))
        except ValueError:
            print(f"isokit: error: bad ISOKIT_MAX_TERM_NODES value {cap!r}", file=sys.stderr)
            return EXIT_ERROR
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
