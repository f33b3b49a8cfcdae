"""``selfsim`` command line: analyze, ideals, trace, verify, plot."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from ._alloc import keep_heap
from .elements import ElementSpecError, load_element
from .exact import as_scalar, format_scalar
from .ideals import (AssumptionBError, Discrete, Hutchinson, closed_set, primitive_ideals,
                     quotient_dimension, trace_eval)
from .core_rep import GradedCoreElement
from .ifs import SelfSimilarSystem, SystemError, load_system
from .report import dumps
from .singularity import branch_points, check_assumption_b

__all__ = ["RunConfig", "main", "build_parser", "parse_point"]

EXIT_OK, EXIT_ERROR, EXIT_ASSUMPTION = 0, 1, 2


class CLIError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    system: str
    grid_depth: int = 8
    max_level: int = 3
    max_ideal_level: int | None = None
    postcritical_depth: int = 8
    tolerance: float = 1e-9
    fmt: str = "text"
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("grid_depth", "max_level", "postcritical_depth"):
            if getattr(self, name) < 0:
                raise CLIError(f"{name.replace('_', '-')} must be >= 0")
        if self.max_ideal_level is not None and self.max_ideal_level < 0:
            raise CLIError("max-ideal-level must be >= 0")
        if self.grid_depth < self.max_level:
            raise CLIError(f"grid depth {self.grid_depth} is below max level {self.max_level}")
        if not self.tolerance > 0:
            raise CLIError("tolerance must be positive")
        if self.fmt not in ("json", "text"):
            raise CLIError(f"unknown format {self.fmt!r}")


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with every other input error
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt_point(p) -> str:
    return "(" + ", ".join(format_scalar(x) for x in p) + ")"


def _fmt_set(points) -> str:
    return "{" + ", ".join(_fmt_point(p) for p in points) + "}"


def parse_point(system: SelfSimilarSystem, text: str) -> tuple:
    """A named point (``S``), a bare coordinate (``1/2``) or a tuple ``(a, b)``."""
    names = system.meta.get("points", {})
    text = text.strip()
    if text in names:
        return tuple(names[text])
    body = text[1:-1] if text.startswith("(") and text.endswith(")") else text
    parts = [s for s in body.split(",") if s.strip()]
    if len(parts) != system.dimension:
        raise CLIError(f"point {text!r} needs {system.dimension} coordinate(s)")
    try:
        return tuple(as_scalar(s.strip(), system.scalar) for s in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise CLIError(f"bad point {text!r}: {exc}") from None


def parse_kind(system: SelfSimilarSystem, kind: str, default_depth: int):
    """``discrete:<point>,<n>`` or ``hutchinson:<m>`` (``hutchinson`` alone uses the grid depth)."""
    name, _, arg = kind.partition(":")
    if name == "discrete":
        point, _, level = arg.rpartition(",")
        if not point or not level.strip().isdigit():
            raise CLIError(f"bad trace kind {kind!r}; use discrete:<point>,<n>")
        return Discrete(parse_point(system, point), int(level))
    if name == "hutchinson":
        if not arg:
            return Hutchinson(default_depth)
        if not arg.strip().isdigit():
            raise CLIError(f"bad trace kind {kind!r}; use hutchinson:<m>")
        return Hutchinson(int(arg))
    raise CLIError(f"unknown trace kind {name!r}; use discrete or hutchinson")


# ------------------------------------------------------------ commands

def analyze_data(system: SelfSimilarSystem, postcritical_depth: int) -> dict:
    verdict = check_assumption_b(system, postcritical_depth)
    if not verdict.clauses["finite_branch_set"]["pass"]:
        # no finite branch set to list; the verdict carries the reason
        return {"system": system.name, "branches": system.N, "dimension": system.dimension,
                "branch_points": None, "branch_values": None, "branch_data": [],
                "postcritical": {"depth": postcritical_depth, "points": []},
                "assumption_b": {"pass": False, "clauses": verdict.clauses}}
    rep = branch_points(system, postcritical_depth)
    return {
        "system": system.name,
        "branches": system.N,
        "dimension": system.dimension,
        "branch_points": rep.branch_points,
        "branch_values": rep.branch_values,
        "branch_data": [{"point": b, "index": rep.branch_index[b], "labels": list(rep.labels[b]),
                         "value": rep.h_of[b]} for b in rep.branch_points],
        "postcritical": {"depth": postcritical_depth, "points": rep.postcritical},
        "assumption_b": {"pass": verdict.passed, "clauses": verdict.clauses},
    }


def _analyze_text(data: dict) -> str:
    lines = [f"system: {data['system']} (N={data['branches']}, d={data['dimension']})"]
    if data["branch_points"] is None:
        lines.append("branch points B: not finite")
    else:
        lines += [f"branch points B: {_fmt_set(data['branch_points'])}",
                  f"branch values C: {_fmt_set(data['branch_values'])}"]
    for row in data["branch_data"]:
        lines.append(f"  {_fmt_point(row['point'])}: e={row['index']} "
                     f"labels={tuple(row['labels'])} h={_fmt_point(row['value'])}")
    post = data["postcritical"]
    lines.append(f"postcritical points (depth {post['depth']}): {_fmt_set(post['points'])}")
    ab = data["assumption_b"]
    lines.append(f"Assumption B: {'pass' if ab['pass'] else 'FAIL'}")
    for name in sorted(ab["clauses"]):
        lines.append(f"  {name}: {'pass' if ab['clauses'][name]['pass'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_analyze(cfg: RunConfig, args) -> tuple[str, int]:
    system = load_system(cfg.system)
    data = analyze_data(system, cfg.postcritical_depth)
    code = EXIT_OK if data["assumption_b"]["pass"] else EXIT_ASSUMPTION
    return (dumps(data) if cfg.fmt == "json" else _analyze_text(data)), code


def ideals_data(system: SelfSimilarSystem, level: int, postcritical_depth: int) -> dict:
    rows = []
    for d in primitive_ideals(system, level, postcritical_depth):
        F = closed_set(system, d)
        row = {"ideal": str(d), "closed_set": "K" if F.whole else list(F.points)}
        if d.kind == "orbits":
            (b, n), = d.tags
            unit = GradedCoreElement.unit(system, n)
            row.update(tag={"point": b, "level": n}, quotient_dimension=quotient_dimension(system, d),
                       trace_normalization=trace_eval(system, Discrete(b, n), unit).real)
        rows.append(row)
    return {"system": system.name, "max_level": level, "primitive_ideals": rows}


def _ideals_text(data: dict) -> str:
    lines = [f"primitive ideals of {data['system']} up to level {data['max_level']}",
             f"{'ideal':<28} {'dim':>6} {'tau(1)':>8}  closed set"]
    for row in data["primitive_ideals"]:
        cs = row["closed_set"]
        cs = cs if isinstance(cs, str) else _fmt_set(cs)
        dim = row.get("quotient_dimension", "-")
        tr = "%.6f" % row["trace_normalization"] if "trace_normalization" in row else "-"
        lines.append(f"{row['ideal']:<28} {dim!s:>6} {tr:>8}  {cs}")
    return "\n".join(lines) + "\n"


def _ideal_level(cfg: RunConfig, args) -> int:
    if cfg.max_ideal_level is not None:
        return cfg.max_ideal_level
    return args.max_level if args.max_level is not None else 2


def cmd_ideals(cfg: RunConfig, args) -> tuple[str, int]:
    system = load_system(cfg.system)
    data = ideals_data(system, _ideal_level(cfg, args), cfg.postcritical_depth)
    return (dumps(data) if cfg.fmt == "json" else _ideals_text(data)), EXIT_OK


def cmd_trace(cfg: RunConfig, args) -> tuple[str, int]:
    system = load_system(cfg.system)
    spec = parse_kind(system, args.kind, cfg.grid_depth)
    if args.element:
        T = load_element(system, args.element)
    else:
        T = GradedCoreElement.unit(system)
    try:
        value = trace_eval(system, spec, T)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if cfg.fmt == "json":
        kind = ({"kind": "discrete", "point": spec.point, "level": spec.level}
                if isinstance(spec, Discrete) else {"kind": "hutchinson", "depth": spec.depth})
        return dumps({"system": system.name, "trace": kind, "element_level": T.level,
                      "value": value}), EXIT_OK
    text = repr(value.real) if value.imag == 0 else repr(value)
    return text + "\n", EXIT_OK


def _verify_text(rows: list) -> str:
    width = max(len(r["property"]) for r in rows) if rows else 8
    lines = [f"{'suite':<12} {'property':<{width}} {'max_defect':>20} {'tolerance':>20}  result"]
    for r in rows:
        lines.append(f"{r['suite']:<12} {r['property']:<{width}} {r['max_defect']:>20.12e} "
                     f"{r['tolerance']:>20.12e}  {'pass' if r['pass'] else 'FAIL'}")
    passed = sum(r["pass"] for r in rows)
    lines.append(f"{passed}/{len(rows)} properties pass")
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig, args) -> tuple[str, int]:
    from .verify import SUITES, run_suite

    if args.suite not in SUITES:
        raise CLIError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    system = load_system(cfg.system)
    ideal_level = cfg.max_ideal_level if cfg.max_ideal_level is not None else 2
    rows = run_suite(system, args.suite, grid_depth=cfg.grid_depth, max_level=cfg.max_level,
                     max_ideal_level=ideal_level, postcritical_depth=cfg.postcritical_depth,
                     seed=cfg.seed, tolerance=cfg.tolerance)
    code = EXIT_OK if all(r["pass"] for r in rows) else EXIT_ERROR
    if cfg.fmt == "json":
        return dumps({"system": system.name, "suite": args.suite, "grid_depth": cfg.grid_depth,
                      "seed": cfg.seed, "properties": rows}), code
    return _verify_text(rows), code


def cmd_plot(cfg: RunConfig, args) -> tuple[str, int]:
    from .plot import attractor_svg, grid_csv

    system = load_system(cfg.system)
    base = parse_point(system, args.base) if args.base else None
    levels = (args.level,) if args.level is not None else tuple(range(min(cfg.max_level, 2) + 1))
    if args.level is not None and args.level < 0:
        raise CLIError("level must be >= 0")
    try:
        svg = attractor_svg(system, cfg.grid_depth, args.what, base=base, levels=levels)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if args.csv:
        Path(args.csv).write_text(grid_csv(system, cfg.grid_depth))
    return svg, EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "ideals": cmd_ideals, "trace": cmd_trace,
            "verify": cmd_verify, "plot": cmd_plot}


# ------------------------------------------------------------ parser

def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--grid-depth", "--depth", dest="grid_depth", type=int, default=8,
                   help="grid depth m (default 8)")
    g.add_argument("--max-level", type=int, default=None, help="max level n (default 3)")
    g.add_argument("--max-ideal-level", type=int, default=None, help="max ideal level L")
    g.add_argument("--postcritical-depth", type=int, default=8, help="depth D of the postcritical search")
    g.add_argument("--tolerance", type=float, default=1e-9)
    g.add_argument("--format", dest="fmt", choices=("json", "text"), default="text")
    g.add_argument("--out", "-o", default=None, help="write output here instead of stdout")
    g.add_argument("--seed", type=int, default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="selfsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("system", help="built-in name (tent, cantor, sierpinski) or TOML path")
        return p

    add("analyze", "branch points, branch values and the Assumption B verdict")
    add("ideals", "primitive ideal table up to the max ideal level")
    p = add("trace", "evaluate a trace on a graded element")
    p.add_argument("--kind", required=True, help="discrete:<point>,<n> or hutchinson:<m>")
    p.add_argument("--element", help="element-spec TOML (default: the unit)")
    p = add("verify", "run the property batteries")
    p.add_argument("--suite", default="all", help="all, singularity, bimodule, core-rep or ideals")
    p = add("plot", "SVG of the attractor grid with orbit overlays")
    p.add_argument("--what", choices=("grid", "orbits", "measure"), default="grid")
    p.add_argument("--base", help="branch point whose orbits are drawn (default: all)")
    p.add_argument("--level", type=int, help="draw only this orbit level")
    p.add_argument("--csv", help="also write (word, point, weight) rows to this CSV file")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(system=args.system, grid_depth=args.grid_depth,
                     max_level=3 if args.max_level is None else args.max_level,
                     max_ideal_level=args.max_ideal_level, postcritical_depth=args.postcritical_depth,
                     tolerance=args.tolerance, fmt=args.fmt, out=args.out, seed=args.seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    keep_heap()
    try:
        cfg = _config(args)
        text, code = COMMANDS[args.command](cfg, args)
    except AssumptionBError as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (CLIError, SystemError, ElementSpecError) as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
