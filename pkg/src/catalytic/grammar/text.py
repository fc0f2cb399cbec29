"""Text and JSON serialization of positive polynomial systems.

Text format, one rule per line::

    F_0_0_0 = 1 + A_0_0 F_0_0_0
    A_0_0 = x^2 F_0_0_0

A term is an optional rational coefficient, an optional power of x and a
product of variables.  A coefficient of one is omitted unless the term is
the constant 1.  An empty right-hand side is ``0``.
"""

from __future__ import annotations

import json

from ..algebra import Monomial, PositivePolynomialSystem, as_rational, format_rational
from ..errors import ValidationError
from .variables import parse_variable_name

FORMAT_VERSION = 1


def _format_term(m: Monomial) -> str:
    parts = []
    if m.coef != 1 or (m.xexp == 0 and not m.vars):
        parts.append(format_rational(m.coef))
    if m.xexp == 1:
        parts.append("x")
    elif m.xexp > 1:
        parts.append(f"x^{m.xexp}")
    parts.extend(str(v) for v in m.vars)
    return " ".join(parts)


def emit_grammar(system: PositivePolynomialSystem, fmt: str = "text") -> str:
    if fmt == "text":
        lines = []
        for v in system.variables:
            terms = [_format_term(m) for m in system.rhs[v]]
            lines.append(f"{v} = " + (" + ".join(terms) if terms else "0"))
        return "\n".join(lines) + "\n"
    if fmt == "structured":
        doc = {
            "format_version": FORMAT_VERSION,
            "variables": [str(v) for v in system.variables],
            "rhs": {
                str(v): [
                    {"coef": format_rational(m.coef), "x": m.xexp, "vars": [str(w) for w in m.vars]}
                    for m in system.rhs[v]
                ]
                for v in system.variables
            },
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown grammar format {fmt!r}")


def _parse_term(text: str, names: dict, where: str) -> Monomial:
    tokens = text.split()
    if not tokens:
        raise ValidationError("empty term", where)
    coef = 1
    pos = 0
    try:
        coef = as_rational(tokens[0])
        pos = 1
    except ValidationError:
        pass
    xexp = 0
    if pos < len(tokens) and (tokens[pos] == "x" or tokens[pos].startswith("x^")):
        tok = tokens[pos]
        xexp = 1 if tok == "x" else int(tok[2:]) if tok[2:].isdigit() else -1
        if xexp < 0:
            raise ValidationError(f"bad power of x {tok!r}", where)
        pos += 1
    vars_ = []
    for tok in tokens[pos:]:
        if tok not in names:
            try:
                names[tok] = parse_variable_name(tok)
            except ValueError as exc:
                raise ValidationError(str(exc), where) from None
        vars_.append(names[tok])
    if as_rational(coef) < 0:
        raise ValidationError("negative coefficient", where)
    return Monomial(coef, xexp, tuple(vars_))


def parse_grammar(document: str) -> PositivePolynomialSystem:
    """Parse either serialization produced by :func:`emit_grammar`."""
    names: dict = {}
    if document.lstrip().startswith("{"):
        data = json.loads(document)
        order = []
        rhs = {}
        for name in data["variables"]:
            names[name] = parse_variable_name(name)
            order.append(names[name])
        for name, monos in data["rhs"].items():
            where = f"rule {name}"
            rhs[names[name]] = [
                Monomial(as_rational(m["coef"]), int(m["x"]), tuple(names.setdefault(w, parse_variable_name(w)) for w in m["vars"]))
                for m in monos
            ]
        return PositivePolynomialSystem(rhs, order)
    order = []
    rhs = {}
    for lineno, line in enumerate(document.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        where = f"line {lineno}"
        if " = " not in line:
            raise ValidationError("expected 'NAME = terms'", where)
        lhs, body = line.split(" = ", 1)
        lhs = lhs.strip()
        if lhs not in names:
            try:
                names[lhs] = parse_variable_name(lhs)
            except ValueError as exc:
                raise ValidationError(str(exc), where) from None
        v = names[lhs]
        if v in rhs:
            raise ValidationError(f"second rule for {lhs}", where)
        order.append(v)
        body = body.strip()
        rhs[v] = [] if body == "0" else [_parse_term(t, names, where) for t in body.split(" + ")]
    return PositivePolynomialSystem(rhs, order)
