#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: codec.py

"""
Deterministic JSON and CSV forms of expressions, series solutions,
observables, error tables and sweeps.

An Expr is stored as

    {"variables": ["x"],
     "terms": [{"coeff": "-1/2", "t_pow": 2,
                "atoms": [{"kind": "mono", "var": "x", "exp": 1},
                          {"kind": "gauss", "var": "x", "mult": 1},
                          {"kind": "sin", "arg": {"coeffs": {"x": 1}, "const": "1", "pi": "1/2"}}]}]}

Terms are written in canonical order, so equal expressions give equal bytes.
"""
import csv
import json
import math
from collections import OrderedDict
from fractions import Fraction

from ham_bsde.algebra import COS, SIN, Gauss, LinearArg, Monomial, Phase, Term, Trig, Expr
from ham_bsde.engine import SeriesSolution
from ham_bsde.exceptions import DataError
from ham_bsde.problems import ObservableSet
from ham_bsde.utils import format_sci, mp_context, parse_rational

FORMAT_VERSION = 1


def _fraction(text, what):
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise DataError("[-] Error: %s %r is not a rational." % (what, text))


def _atom_to_dict(atom):
    if isinstance(atom, Monomial):
        return OrderedDict([("kind", "mono"), ("var", atom.var), ("exp", atom.exponent)])
    if isinstance(atom, Gauss):
        return OrderedDict([("kind", "gauss"), ("var", atom.var), ("mult", atom.multiplicity)])
    arg = atom.arg
    return OrderedDict(
        [
            ("kind", atom.kind),
            (
                "arg",
                OrderedDict(
                    [
                        ("coeffs", OrderedDict(arg.coeffs)),
                        ("const", str(arg.phase.rational)),
                        ("pi", str(arg.phase.pi)),
                    ]
                ),
            ),
        ]
    )


def _atom_from_dict(d):
    try:
        kind = d["kind"]
        if kind == "mono":
            return Monomial(d["var"], int(d["exp"]))
        if kind == "gauss":
            return Gauss(d["var"], int(d["mult"]))
        if kind in (SIN, COS):
            arg = d["arg"]
            coeffs = tuple((name, int(k)) for name, k in arg.get("coeffs", {}).items())
            phase = Phase(
                _fraction(arg.get("const", "0"), "phase"), _fraction(arg.get("pi", "0"), "phase")
            )
            return Trig(kind, LinearArg(coeffs, phase))
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise DataError("[-] Error: malformed atom %r (%s)." % (d, e))
    raise DataError("[-] Error: unknown atom kind %r." % (d.get("kind"),))


def expr_terms_to_list(e):
    return [
        OrderedDict(
            [
                ("coeff", str(term.coeff)),
                ("t_pow", term.t_power),
                ("atoms", [_atom_to_dict(a) for a in term.atoms]),
            ]
        )
        for term in e.terms
    ]


def expr_to_dict(e):
    return OrderedDict([("variables", list(e.variables)), ("terms", expr_terms_to_list(e))])


def expr_from_dict(d, variables=None):
    """
    Rebuild an Expr; the result is canonical whatever order the terms come in.
    arguments:
    @d: dict with "terms" and, unless ``variables`` is given, "variables"
    @variables: optional variable universe
    @return Expr
    """
    if not isinstance(d, dict):
        raise DataError("[-] Error: an expression must be a JSON object.")
    if variables is None:
        if "variables" not in d:
            raise DataError("[-] Error: expression has no variable list.")
        variables = d["variables"]
    terms = []
    for item in d.get("terms", []):
        try:
            terms.append(
                Term(
                    _fraction(item["coeff"], "coefficient"),
                    int(item.get("t_pow", 0)),
                    tuple(_atom_from_dict(a) for a in item.get("atoms", [])),
                )
            )
        except (KeyError, TypeError) as e:
            raise DataError("[-] Error: malformed term %r (%s)." % (item, e))
        if terms[-1].t_power < 0:
            raise DataError("[-] Error: negative t power in %r." % (item,))
    return Expr.from_terms(tuple(variables), terms)


def dumps_expr(e):
    return json.dumps(expr_to_dict(e), indent=2)


def loads_expr(text):
    try:
        return expr_from_dict(json.loads(text))
    except ValueError as e:
        raise DataError("[-] Error: invalid JSON: %s" % e)


def solution_to_dict(solution, variables):
    """Wall times are left out; they go to the run metadata."""
    return OrderedDict(
        [
            ("format", FORMAT_VERSION),
            ("problem", solution.problem_id),
            ("c0", str(solution.c0)),
            ("order", solution.order),
            ("variables", list(variables)),
            (
                "components",
                [[{"terms": expr_terms_to_list(phi)} for phi in history] for history in solution.components],
            ),
        ]
    )


def solution_from_dict(d):
    try:
        variables = tuple(d["variables"])
        components = tuple(
            tuple(expr_from_dict(item, variables) for item in history) for history in d["components"]
        )
        solution = SeriesSolution(d["problem"], parse_rational(d["c0"]), components)
    except (KeyError, TypeError) as e:
        raise DataError("[-] Error: malformed series solution (%s)." % e)
    if any(len(h) != len(components[0]) for h in components):
        raise DataError("[-] Error: component histories differ in length.")
    return solution


def _digits(precision_bits):
    return max(15, int(precision_bits * math.log10(2)))


def mpf_to_str(value, precision_bits=256):
    if value is None:
        return None
    return mp_context(precision_bits).nstr(value, _digits(precision_bits))


def observables_to_dict(observables, precision_bits=256, exact=None, errors=None):
    """
    arguments:
    @observables: ObservableSet
    @exact: optional ObservableSet with the same labels
    @errors: optional mapping label -> error
    @return OrderedDict
    """
    entries = []
    for label, value in observables.values:
        entry = OrderedDict([("label", label), ("value", mpf_to_str(value, precision_bits))])
        if exact is not None:
            entry["exact"] = mpf_to_str(exact.get(label), precision_bits)
        if errors is not None and label in errors:
            entry["error"] = format_sci(errors[label])
        entries.append(entry)
    return OrderedDict([("precision_bits", precision_bits), ("values", entries)])


def observables_from_dict(d):
    precision_bits = int(d.get("precision_bits", 256))
    ctx = mp_context(precision_bits)
    try:
        return ObservableSet(tuple((e["label"], ctx.mpf(e["value"])) for e in d["values"]))
    except (KeyError, TypeError, ValueError) as e:
        raise DataError("[-] Error: malformed observables (%s)." % e)


def load_fixture(path):
    """
    Golden partial sums.
    @return (problem_id, c0, {order: tuple of Expr per component})
    """
    try:
        with open(path) as f:
            d = json.load(f)
    except ValueError as e:
        raise DataError("[-] Error: fixture %s is not valid JSON: %s" % (path, e))
    try:
        variables = tuple(d["variables"])
        sums = dict(
            (int(m), tuple(expr_from_dict(item, variables) for item in items))
            for m, items in d["partial_sums"].items()
        )
        return d["problem"], parse_rational(d["c0"]), sums
    except (KeyError, TypeError, AttributeError) as e:
        raise DataError("[-] Error: fixture %s is malformed (%s)." % (path, e))


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def report_header(report):
    header = ["m", "exact_error"]
    if report.has_residual:
        header.append("residual")
    header.extend(report.observable_labels)
    return header


def report_rows(report):
    for row in report.rows:
        line = [str(row.order), format_sci(row.exact_error)]
        if report.has_residual:
            line.append(format_sci(row.residual))
        line.extend(format_sci(v) for _, v in row.observables)
        yield line


def write_report_csv(path, report):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(report_header(report))
        writer.writerows(report_rows(report))


def report_to_dict(report):
    header = report_header(report)
    return OrderedDict(
        [
            ("problem", report.problem_id),
            ("c0", str(report.c0)),
            ("domain", report.norm),
            ("columns", header),
            ("rows", [OrderedDict(zip(header, line)) for line in report_rows(report)]),
        ]
    )


def write_timing_csv(path, report):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["m", "wall_time_s"])
        for row in report.rows:
            writer.writerow([row.order, "%.6f" % row.wall_time])


def write_sweep_csv(path, sweep):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["m"] + [str(c0) for c0 in sweep.c0_grid])
        for m, row in zip(sweep.orders, sweep.matrix):
            writer.writerow([m] + [format_sci(v) for v in row])


def write_sweep_long(path, sweep):
    """gnuplot data: one indexed block per order, columns c0 and residual."""
    with open(path, "w") as f:
        for i, (m, row) in enumerate(zip(sweep.orders, sweep.matrix)):
            if i:
                f.write("\n\n")
            f.write("# m=%d\n" % m)
            for c0, v in zip(sweep.c0_grid, row):
                f.write("%s %s\n" % (format_sci(c0), format_sci(v)))


def write_cpu_models_csv(path, rows):
    """``rows``: iterable of (d, t_homotopy, t_sparse_grid)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["d", "t_homotopy_s", "t_sparse_grid_s"])
        for d, t_h, t_s in rows:
            writer.writerow([d, format_sci(t_h), format_sci(t_s)])
