"""Command-line front end: ``catalytic SUBCOMMAND --input SYSTEM.json``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .algebra import fixed_point_solve, format_rational
from .errors import CatalyticError, CheckMismatchError, ValidationError
from .grammar import build_difference_system, build_finite_system, classify_prime_walks, emit_grammar
from .model import build_step_table, load_system
from .paths import PathQuery, check_strong_connectivity, oracle_count

FORMAT_VERSION = 1


def _read_system(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read input: {exc.strerror}", path) from None
    return load_system(data)


def _json(doc) -> str:
    return json.dumps({"format_version": FORMAT_VERSION, **doc}, indent=2, sort_keys=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _coeffs(series) -> list[str]:
    return [format_rational(c) for c in series]


def _series_text(name: str, series) -> str:
    return f"{name}: " + " ".join(_coeffs(series)) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, system, notes) -> str:
    if args.format == "json":
        return _json({"valid": True, "d": system.d, "L": system.L, "J": system.J, "notes": notes})
    if args.format == "csv":
        return _csv(["valid", "d", "L", "J", "notes"], [[True, system.d, system.L, system.J, "; ".join(notes)]])
    out = f"valid: d={system.d} L={system.L} J={system.J}\n"
    return out + "".join(f"note: {n}\n" for n in notes)


def cmd_steps(args, system, notes) -> str:
    table = build_step_table(system)
    rows = []
    for k, level in enumerate(table.levels):
        for (s, t), steps in level.items():
            for st in steps:
                l, j, r = st.origin
                rows.append([k, s, t, st.width, st.rise, format_rational(st.weight), l, j, r])
    if args.format == "json":
        keys = ["level", "s", "t", "width", "rise", "weight", "l", "j", "r"]
        return _json({"stable_level": table.J, "steps": [dict(zip(keys, r)) for r in rows]})
    if args.format == "csv":
        return _csv(["level", "s", "t", "width", "rise", "weight", "l", "j", "r"], rows)
    out = [f"steps (levels >= {table.J} use level {table.J})"]
    for k, s, t, w, rise, wt, *_ in rows:
        out.append(f"level {k} {s}->{t}: width {w} rise {rise:+d} weight {wt}")
    return "\n".join(out) + "\n"


def cmd_oracle(args, system, notes) -> str:
    table = build_step_table(system)
    q = PathQuery(args.start_type, args.end_type, args.k1, args.k2, args.floor, args.order)
    series = oracle_count(table, q)
    name = f"paths({args.k1}->{args.k2}, floor {args.floor})"
    if args.format == "json":
        return _json({"query": {"k1": q.k1, "k2": q.k2, "floor": q.floor, "start_type": q.start_type,
                                "end_type": q.end_type, "order": q.nmax}, "coefficients": _coeffs(series)})
    if args.format == "csv":
        return _csv(["n", "coefficient"], list(enumerate(_coeffs(series))))
    return _series_text(name, series)


def _compiled(system, difference: bool):
    table = build_step_table(system)
    cls = classify_prime_walks(table)
    if difference:
        return build_difference_system(table, cls).system
    return build_finite_system(table, cls)


def cmd_grammar(args, system, notes) -> str:
    pps = _compiled(system, args.difference)
    if args.var:
        pps = pps.restrict([_lookup(pps, args.var)])
    return emit_grammar(pps, "structured" if args.format == "json" else "text")


def _lookup(pps, name):
    for v in pps.variables:
        if str(v) == name:
            return v
    raise ValidationError(f"unknown variable {name!r}", "--var")


def cmd_series(args, system, notes) -> str:
    pps = _compiled(system, args.difference)
    sol = fixed_point_solve(pps, args.order)
    names = [_lookup(pps, args.var)] if args.var else pps.variables
    if args.format == "json":
        return _json({"order": args.order, "series": {str(v): _coeffs(sol[v]) for v in names}})
    if args.format == "csv":
        return _csv(["variable"] + [str(n) for n in range(args.order + 1)], [[str(v)] + _coeffs(sol[v]) for v in names])
    return "".join(_series_text(str(v), sol[v]) for v in names)


def cmd_check(args, system, notes) -> str:
    from .verify import check_against_oracle

    if args.order < args.oracle_depth:
        raise ValidationError(f"--order {args.order} is below --oracle-depth {args.oracle_depth}")
    report = check_against_oracle(system, args.oracle_depth)
    if args.format == "json":
        out = _json({
            "order": report.order,
            "ok": report.ok,
            "checked": report.checked,
            "mismatches": [m.variable for m in report.mismatches],
            "negative": report.negative,
        })
    elif args.format == "csv":
        bad = {m.variable for m in report.mismatches}
        out = _csv(["variable", "match"], [[v, v not in bad] for v in report.checked])
    else:
        if report.ok:
            out = f"all {len(report.checked)} variables match oracle up to n={report.order}\n"
        else:
            lines = [f"{len(report.mismatches)} of {len(report.checked)} variables differ from the oracle"]
            for m in report.mismatches:
                lines.append(f"{m.variable}: grammar {' '.join(map(format_rational, m.grammar))}")
                lines.append(f"{' ' * len(m.variable)}  oracle  {' '.join(map(format_rational, m.oracle))}")
            lines += [f"negative coefficient in {v}" for v in report.negative]
            out = "\n".join(lines) + "\n"
    if not report.ok:
        sys.stdout.write(out)
        raise CheckMismatchError(f"{len(report.mismatches)} mismatches, {len(report.negative)} negative series")
    return out


def cmd_connectivity(args, system, notes) -> str:
    v = check_strong_connectivity(build_step_table(system))
    wit = [
        {"from": list(a), "to": list(b), "steps": [[st.width, st.rise, st.source, st.target] for st in path]}
        for (a, b), path in sorted(v.witnesses.items())
    ]
    if args.format == "json":
        return _json({
            "strongly_connected": v.strongly_connected,
            "window": list(v.window),
            "cap": v.cap,
            "counterexample": [list(p) for p in v.counterexample] if v.counterexample else None,
            "witnesses": wit,
            "note": v.note,
        })
    if args.format == "csv":
        return _csv(["from_type", "from_level", "to_type", "to_level", "steps"],
                    [[*w["from"], *w["to"], len(w["steps"])] for w in wit])
    out = [f"strongly connected: {'yes' if v.strongly_connected else 'no'} (levels {v.window[0]}..{v.window[1]})"]
    if v.counterexample:
        (s1, h1), (s2, h2) = v.counterexample
        out.append(f"no path from type {s1} level {h1} to type {s2} level {h2}")
    if v.note:
        out.append(v.note)
    for w in wit:
        rises = " ".join(f"{s[1]:+d}" for s in w["steps"])
        out.append(f"({w['from'][0]},{w['from'][1]}) -> ({w['to'][0]},{w['to'][1]}): {rises}")
    return "\n".join(out) + "\n"


def cmd_asympt(args, system, notes) -> str:
    from .analysis import analyze_catalytic

    report = analyze_catalytic(system, empirical_depth=args.empirical_depth)
    if args.format == "json":
        return json.dumps(report.to_json(), indent=2) + "\n"
    if args.format == "csv":
        return _csv(["m", "c"], [[m, repr(c)] for m, c in sorted(report.constants.items())])
    return report.render()


def cmd_report(args, system, notes) -> str:
    from .analysis import analyze_catalytic
    from .verify import check_against_oracle

    table = build_step_table(system)
    cls = classify_prime_walks(table)
    finite = build_finite_system(table, cls)
    conn = check_strong_connectivity(table)
    check = check_against_oracle(system, args.oracle_depth)
    analysis = None
    try:
        analysis = analyze_catalytic(system, empirical_depth=args.empirical_depth)
    except CatalyticError as exc:
        analysis_error = f"{type(exc).__name__}: {exc}"
    if args.format == "json":
        return _json({
            "system": {"d": system.d, "L": system.L, "J": system.J, "notes": notes},
            "unknown_walks": [str(v) for v in cls.unknowns],
            "finite_system": json.loads(emit_grammar(finite, "structured")),
            "strongly_connected": conn.strongly_connected,
            "check": {"order": check.order, "ok": check.ok, "checked": len(check.checked)},
            "asymptotics": analysis.to_json() if analysis else {"error": analysis_error},
        })
    out = [cmd_validate(args, system, notes).rstrip()]
    out.append(f"unknown first-passage walks: {', '.join(str(v) for v in cls.unknowns) or 'none'}")
    out.append(f"finite system ({len(finite)} equations):")
    out.append(emit_grammar(finite).rstrip())
    out.append(f"strongly connected: {'yes' if conn.strongly_connected else 'no'}")
    out.append(f"oracle check to n={check.order}: {'ok' if check.ok else 'MISMATCH'} ({len(check.checked)} variables)")
    out.append(analysis.render().rstrip() if analysis else f"asymptotics unavailable: {analysis_error}")
    return "\n".join(out) + "\n"


COMMANDS = {
    "validate": (cmd_validate, "check schema, positivity and canonical bounds"),
    "steps": (cmd_steps, "dump the step table"),
    "oracle": (cmd_oracle, "count lattice paths by brute force"),
    "grammar": (cmd_grammar, "emit the finite positive system"),
    "series": (cmd_series, "solve the finite system and print coefficients"),
    "check": (cmd_check, "compare the finite system with the path oracle"),
    "connectivity": (cmd_connectivity, "decide strong connectivity of the infinite system"),
    "asympt": (cmd_asympt, "singularity and coefficient asymptotics"),
    "report": (cmd_report, "everything in one document"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catalytic", description="Compile and analyze positive linear catalytic equations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        c = sub.add_parser(name, help=help_)
        c.add_argument("--input", required=True, metavar="PATH")
        c.add_argument("--order", type=int, default=64, metavar="N")
        c.add_argument("--oracle-depth", type=int, default=14, metavar="D")
        c.add_argument("--format", choices=("text", "json", "csv"), default="text")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("-v", "--verbose", action="store_true")
        if name in ("grammar", "series"):
            c.add_argument("--difference", action="store_true", help="use the strongly connected difference system")
            c.add_argument("--var", metavar="NAME")
        if name == "oracle":
            c.add_argument("--k1", type=int, default=0)
            c.add_argument("--k2", type=int, default=0)
            c.add_argument("--floor", type=int, default=0)
            c.add_argument("--start-type", type=int, default=1)
            c.add_argument("--end-type", type=int, default=1)
        if name in ("asympt", "report"):
            c.add_argument("--empirical-depth", type=int, default=4000, metavar="N")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.order < 0 or args.oracle_depth < 0:
            raise ValidationError("--order and --oracle-depth must be nonnegative")
        system, notes = _read_system(args.input)
        out = COMMANDS[args.command][0](args, system, notes)
    except CatalyticError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
