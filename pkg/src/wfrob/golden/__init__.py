"""Hand-transcribed reference data for the three published worked examples.

The JSON files keep exponentials as ``exp(<linear form>)``.  The loader rewrites
each one as a monomial in the chart markers and then parses the canonical form.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from ..algebra import LaurentPoly, VarTable, parse_poly, solve_rational
from ..frobenius import Potential
from ..orbit import GroupSpec, chart_table

NAMES = ("a2k1", "a3k1", "a3k2")

_EXP_RE = re.compile(r"exp\(([^()]*)\)")
_LOG_RE = re.compile(r"^\s*([-+]?\d+(?:/\d+)?)\*(t\d+)\^2\*log\((t\d+)\)\s*$")
_LIN_TERM_RE = re.compile(r"^(?:(\d+(?:/\d+)?)\*)?([A-Za-z]\w*)$")


def _linear_form(text: str) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for sign, term in re.findall(r"([-+]?)\s*([^-+\s]+)", text.replace(" ", "")):
        m = _LIN_TERM_RE.match(term)
        if not m:
            raise ValueError(f"not a linear form: {text!r}")
        c = Fraction(m.group(1) or 1) * (-1 if sign == "-" else 1)
        out[m.group(2)] = out.get(m.group(2), Fraction(0)) + c
    return out


def _marker_exponents(table: VarTable, form: dict[str, Fraction]) -> dict[str, int]:
    coords = sorted({c for _, f in table.markers for c, _ in f} | set(form))
    mat = [[dict(f).get(c, Fraction(0)) for _, f in table.markers] for c in coords]
    rhs = [[form.get(c, Fraction(0))] for c in coords]
    sol = solve_rational(mat, rhs, require_unique=True)
    out = {}
    for (name, _), row in zip(table.markers, sol.values):
        if row[0].denominator != 1:
            raise ValueError(f"exp of {form} is not a monomial in the markers")
        out[name] = int(row[0])
    return out


def parse_printed(text: str, table: VarTable) -> LaurentPoly:
    """Parse a polynomial written with ``exp(...)`` factors."""

    def repl(m: re.Match) -> str:
        exps = _marker_exponents(table, _linear_form(m.group(1)))
        factors = [f"{n}^{e}" for n, e in exps.items() if e]
        return "*".join(factors) if factors else "1"

    return parse_poly(_EXP_RE.sub(repl, text), table)


@dataclass
class GoldenExample:
    name: str
    spec: GroupSpec
    provenance: str
    g_y: list[list[LaurentPoly]]
    eta_y: list[list[LaurentPoly]]
    eta_z: list[list[LaurentPoly]] | None
    flat_chart: str
    flat_t: list[LaurentPoly]
    potential: Potential
    euler: list[LaurentPoly]


def raw(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(NAMES)}")
    return json.loads(resources.files(__package__).joinpath(f"{name}.json").read_text())


def load(name: str) -> GoldenExample:
    data = raw(name)
    spec = GroupSpec(data["group"]["l"], data["group"]["k"])
    tables = {c: chart_table(spec, c) for c in ("y", "z", "t")}

    def mat(rows, chart):
        return [[parse_printed(s, tables[chart]) for s in r] for r in rows]

    fc = data["flat_coords"]
    pot = data["potential"]
    m = _LOG_RE.match(pot["log_term"])
    if not m or m.group(2) != m.group(3):
        raise ValueError(f"cannot read log term {pot['log_term']!r}")
    F = Potential(spec, parse_printed(pot["polynomial"], tables["t"]),
                  log_coeff=Fraction(m.group(1)), log_var=int(m.group(2)[1:]))
    return GoldenExample(
        name=name,
        spec=spec,
        provenance=data["provenance"],
        g_y=mat(data["g_y"], "y"),
        eta_y=mat(data["eta_y"], "y"),
        eta_z=mat(data["eta_z"], "z") if "eta_z" in data else None,
        flat_chart=fc["chart"],
        flat_t=[parse_printed(s, tables[fc["chart"]]) for s in fc["t"]],
        potential=F,
        euler=[parse_printed(s, tables["t"]) for s in data["euler_field"]],
    )
