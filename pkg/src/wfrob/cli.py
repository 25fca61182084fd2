"""Command line entry point: ``wfrob {build,verify,lg-check,example}``."""

from __future__ import annotations

import argparse
import difflib
import math
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable

from .algebra import AlgebraError, LaurentPoly, render_fraction
from .frobenius import (
    FrobeniusData,
    Potential,
    eta_t,
    euler_field,
    flat_coordinates,
    metric_g_t,
    potential,
    quasi_homogeneity_residual,
)
from .lg import Tolerances, lg_metric_check
from .orbit import (
    GroupSpec,
    InvalidSpec,
    OrbitData,
    chart_weights,
    christoffel_y,
    eta_y,
    invariance_spotcheck,
    metric_g_y,
    to_z_chart,
    y_in_z,
)
from .verify import Check, CheckReport, exact_suite, pencil_flatness_numeric, wdvv_check

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_EXACTNESS = 3
EXIT_VERIFY = 4
EXIT_LG = 5
EXIT_REJECTIONS = 6
EXIT_GOLDEN = 7

SCHEMA = 1
EXAMPLES = {"a2k1": (2, 1), "a3k1": (3, 1), "a3k2": (3, 2)}
EXTRA_TOLS = {"pencil": 1e-6, "invariance": 1e-10}


class CliError(Exception):
    def __init__(self, code: int, message: str, report: dict | None = None):
        super().__init__(message)
        self.code = code
        self.report = report


@dataclass
class RunConfig:
    command: str
    l: int | None = None
    k: int | None = None
    format: str = "json"
    seed: int = 42
    samples: int = 20
    tol: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    name: str | None = None
    corrupt: bool = False

    def spec(self) -> GroupSpec:
        if self.l is None or self.k is None:
            raise CliError(EXIT_INVALID, "--l and --k are required")
        try:
            return GroupSpec(self.l, self.k)
        except InvalidSpec as exc:
            raise CliError(EXIT_INVALID, str(exc)) from exc

    def lg_tolerances(self) -> Tolerances:
        names = {f.name for f in fields(Tolerances)}
        return Tolerances(**{k: v for k, v in self.tol.items() if k in names})

    def extra_tol(self, name: str) -> float:
        return self.tol.get(name, EXTRA_TOLS[name])


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _json_scalar(v) -> str:
    import json

    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return json.dumps(str(v))
        return format(v, ".17g")
    if isinstance(v, Fraction):
        return json.dumps(render_fraction(v))
    return json.dumps(str(v))


def to_json(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and fixed key order."""
    import json

    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(_json_scalar(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(x, indent + 1) for x in obj) + "\n" + end + "]"
    return _json_scalar(obj)


def to_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, v in obj.items():
            if isinstance(v, (dict, list, tuple)) and v and any(isinstance(x, (dict, list, tuple)) for x in
                                                              (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{pad}{key}:")
                lines.append(to_text(v, indent + 1))
            elif isinstance(v, dict):
                lines.append(f"{pad}{key}:")
                lines.append(to_text(v, indent + 1))
            elif isinstance(v, (list, tuple)):
                lines.append(f"{pad}{key}: " + ", ".join(_text_scalar(x) for x in v))
            else:
                lines.append(f"{pad}{key}: {_text_scalar(v)}")
    elif isinstance(obj, (list, tuple)):
        for x in obj:
            if isinstance(x, (list, tuple)) and all(not isinstance(y, (dict, list, tuple)) for y in x):
                lines.append(pad + " | ".join(_text_scalar(y) for y in x))
            elif isinstance(x, (dict, list, tuple)):
                lines.append(to_text(x, indent + 1))
                lines.append(pad + "-")
            else:
                lines.append(pad + _text_scalar(x))
    else:
        lines.append(pad + _text_scalar(obj))
    return "\n".join(lines)


def _text_scalar(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, Fraction):
        return render_fraction(v)
    return str(v)


# ---------------------------------------------------------------------------
# pipeline with named stages
# ---------------------------------------------------------------------------

def _stage(name: str, fn: Callable):
    try:
        return fn()
    except (AlgebraError, ArithmeticError, AssertionError) as exc:
        raise CliError(EXIT_EXACTNESS, f"exactness failure in stage {name}: {exc}") from exc


def run_pipeline(spec: GroupSpec) -> FrobeniusData:
    g = _stage("orbit.intersection_form", lambda: metric_g_y(spec))
    eta = _stage("orbit.flat_metric", lambda: eta_y(spec, g))
    Gamma = _stage("orbit.christoffel", lambda: christoffel_y(spec, g))
    orbit = OrbitData(spec, g, eta, Gamma)
    g_z, eta_z, Gamma_z, gamma_z = _stage("frobenius.z_chart", lambda: tuple(
        to_z_chart(spec, t) for t in (g, eta, Gamma, orbit.gamma)))
    fc = _stage("frobenius.flat_coordinates", lambda: flat_coordinates(spec, eta_z, gamma_z))
    et = _stage("frobenius.flat_metric_constant", lambda: eta_t(fc, eta_z))
    g_t = _stage("frobenius.t_chart", lambda: metric_g_t(fc, g_z))
    F = _stage("frobenius.potential", lambda: potential(spec, et, g_t))

    def qh():
        poly, log_left = quasi_homogeneity_residual(F)
        assert not poly and not log_left, f"quasi-homogeneity defect {poly.render()}"

    _stage("frobenius.quasi_homogeneity", qh)
    return FrobeniusData(spec, orbit, g_z, eta_z, Gamma_z, gamma_z, fc, et, g_t, F)


def corrupt_potential(F: Potential) -> Potential:
    """Negative-control hook: double the coefficient of the leading exponential term."""
    tt = F.table
    markers = {tt.index(m) for m, _ in tt.markers}
    terms = F.poly.sorted_terms()
    target = next((e for e, _ in terms if any(e[i] for i in markers)), terms[0][0])
    bumped = LaurentPoly.monomial(tt, target, F.poly.terms[target])
    return Potential(F.spec, F.poly + bumped, F.log_coeff, F.log_var, list(F.kernel))


def _render_matrix(rows, weights) -> list[list[str]]:
    return [[p.render(weights) for p in r] for r in rows]


def frobenius_report(fd: FrobeniusData, command: str) -> dict:
    spec = fd.spec
    dd = spec.degree_data
    yw, zw, tw = (chart_weights(spec, c) for c in ("y", "z", "t"))
    F = fd.potential
    return {
        "schema": SCHEMA,
        "command": command,
        "group": {"l": spec.l, "k": spec.k},
        "degrees": [render_fraction(dd[j]) for j in range(1, spec.l + 3)],
        "duality": list(dd.dual[1:]),
        "g_y": _render_matrix(fd.orbit.g.entries, yw),
        "eta_y": _render_matrix(fd.orbit.eta.entries, yw),
        "eta_z": _render_matrix(fd.eta_z.entries, zw),
        "flat_coords": {"chart": "z", "t": [p.render(zw) for p in fd.flat.t_of_z]},
        "eta_t": [[render_fraction(c) for c in r] for r in fd.eta_t],
        "potential": {
            "polynomial": F.poly.render(tw),
            "log_coeff": render_fraction(F.log_coeff),
            "log_var": f"t{F.log_var}",
            "kernel": list(F.kernel),
        },
        "euler_field": [p.render(tw) for p in euler_field(spec)["t"]],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_build(cfg: RunConfig) -> tuple[int, dict]:
    fd = run_pipeline(cfg.spec())
    return EXIT_OK, frobenius_report(fd, "build")


def verification_checks(fd: FrobeniusData, cfg: RunConfig) -> CheckReport:
    spec = fd.spec
    if cfg.corrupt:
        fd.potential = corrupt_potential(fd.potential)
    report = exact_suite(fd)
    report.extend(pencil_flatness_numeric(spec, fd.orbit.g, fd.orbit.eta, seed=cfg.seed,
                                          tol=cfg.extra_tol("pencil")))
    inv = invariance_spotcheck(spec, seed=cfg.seed, points=10)
    report.add(Check("invariance", inv.max_deviation < cfg.extra_tol("invariance"), inv.max_deviation,
                     False, 0.0, ", ".join(f"{k}={v:.3g}" for k, v in sorted(inv.per_transform.items()))))
    return report.sorted()


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    spec = cfg.spec()
    fd = run_pipeline(spec)
    report = verification_checks(fd, cfg)
    out = {
        "schema": SCHEMA,
        "command": "verify",
        "group": {"l": spec.l, "k": spec.k},
        "seed": cfg.seed,
        "passed": report.passed,
        "checks": [c.as_dict() for c in report.checks],
    }
    bad = report.first_failure()
    if bad is not None:
        raise CliError(EXIT_VERIFY, f"check failed: {bad.name} (residual {bad.residual:.3g}) {bad.detail}".strip(),
                       out)
    return EXIT_OK, out


def cmd_lg_check(cfg: RunConfig) -> tuple[int, dict]:
    spec = cfg.spec()
    if cfg.samples <= 0:
        raise CliError(EXIT_INVALID, "--samples must be positive")
    rep = lg_metric_check(spec, seed=cfg.seed, samples=cfg.samples, tol=cfg.lg_tolerances())
    out = {
        "schema": SCHEMA,
        "command": "lg-check",
        "group": {"l": spec.l, "k": spec.k},
        "seed": cfg.seed,
        "summary": rep.summary(),
        "euler_defects": [f"a{p}: {d.render()}" for p, d in rep.euler_defects],
        "records": [r.as_dict() for r in rep.records],
    }
    if rep.too_many_rejections:
        raise CliError(EXIT_REJECTIONS, f"rejection rate {rep.rejection_rate:.2f} exceeds "
                                        f"{rep.tol.rejection:.2f}", out)
    if not rep.passed:
        raise CliError(EXIT_LG, "failed: " + ", ".join(rep.failures()), out)
    return EXIT_OK, out


@dataclass
class GoldenDiff:
    expected: list[str]
    computed: list[str]
    mismatches: list[str]
    residual: float

    def unified(self, name: str) -> str:
        return "".join(difflib.unified_diff([s + "\n" for s in self.expected], [s + "\n" for s in self.computed],
                                            f"golden/{name}", "computed"))


def _max_coeff(p: LaurentPoly) -> float:
    return max((abs(float(c)) for c in p.terms.values()), default=0.0)


def compare_golden(fd: FrobeniusData, name: str) -> GoldenDiff:
    from .golden import load

    gold = load(name)
    spec = fd.spec
    yw, zw, tw = (chart_weights(spec, c) for c in ("y", "z", "t"))
    exp_lines, got_lines, bad = [], [], []
    worst = 0.0

    def entry(label, want: LaurentPoly, got: LaurentPoly, w):
        nonlocal worst
        exp_lines.append(f"{label} = {want.render(w)}")
        got_lines.append(f"{label} = {got.render(w)}")
        if want != got:
            bad.append(label)
            worst = max(worst, _max_coeff(want - got))

    n = spec.l + 2
    for i in range(n):
        for j in range(n):
            entry(f"g_y[{i + 1},{j + 1}]", gold.g_y[i][j], fd.orbit.g[i, j], yw)
    for i in range(n):
        for j in range(n):
            entry(f"eta_y[{i + 1},{j + 1}]", gold.eta_y[i][j], fd.orbit.eta[i, j], yw)
    if gold.eta_z is not None:
        for i in range(n):
            for j in range(n):
                entry(f"eta_z[{i + 1},{j + 1}]", gold.eta_z[i][j], fd.eta_z[i, j], zw)
    for a in range(n):
        want = gold.flat_t[a] if gold.flat_chart == "z" else y_in_z(spec, gold.flat_t[a])
        entry(f"t{a + 1}", want, fd.flat.t_of_z[a], zw)
    F, G = fd.potential, gold.potential
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            for c in range(b, n + 1):
                entry(f"F_{a}{b}{c}", G.third_derivative(a, b, c), F.third_derivative(a, b, c), tw)
    exp_lines.append(f"log_term = {render_fraction(G.log_coeff)}*t{G.log_var}^2*log(t{G.log_var})")
    got_lines.append(f"log_term = {render_fraction(F.log_coeff)}*t{F.log_var}^2*log(t{F.log_var})")
    if (G.log_coeff, G.log_var) != (F.log_coeff, F.log_var):
        bad.append("log_term")
        worst = max(worst, abs(float(G.log_coeff - F.log_coeff)))
    for a, (want, got) in enumerate(zip(gold.euler, euler_field(spec)["t"]), start=1):
        entry(f"E^{a}", want, got, tw)
    return GoldenDiff(exp_lines, got_lines, bad, worst)


def cmd_example(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.name not in EXAMPLES:
        raise CliError(EXIT_INVALID, f"unknown example {cfg.name!r}; choose from {', '.join(EXAMPLES)}")
    spec = GroupSpec(*EXAMPLES[cfg.name])
    fd = run_pipeline(spec)
    if cfg.corrupt:
        fd.potential = corrupt_potential(fd.potential)
    diff = compare_golden(fd, cfg.name)
    out = frobenius_report(fd, "example")
    out["golden"] = {
        "name": cfg.name,
        "match": not diff.mismatches,
        "mismatches": diff.mismatches,
        "residual": diff.residual,
    }
    if diff.mismatches:
        out["golden"]["diff"] = diff.unified(cfg.name).splitlines()
        raise CliError(EXIT_GOLDEN, f"golden mismatch in {len(diff.mismatches)} entries\n"
                       + diff.unified(cfg.name), out)
    return EXIT_OK, out


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "lg-check": cmd_lg_check, "example": cmd_example}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _tol(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    name, value = text.split("=", 1)
    try:
        return name.strip(), float(Fraction(value.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value {value!r}") from exc


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfrob", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "example":
            p.add_argument("name", help="one of " + ", ".join(EXAMPLES))
        p.add_argument("--l", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=_seed, default=42)
        p.add_argument("--samples", type=int, default=20)
        p.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VALUE")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    return parser


def parse_config(argv: list[str] | None) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise CliError(EXIT_INVALID if exc.code else EXIT_OK, "") from None
    tol = dict(ns.tol)
    known = {f.name for f in fields(Tolerances)} | set(EXTRA_TOLS)
    unknown = sorted(set(tol) - known)
    if unknown:
        raise CliError(EXIT_INVALID, f"unknown tolerance(s): {', '.join(unknown)}")
    return RunConfig(ns.command, ns.l, ns.k, ns.format, ns.seed, ns.samples, tol, ns.out,
                     getattr(ns, "name", None), ns.corrupt)


def _emit(cfg: RunConfig, report: dict) -> None:
    text = (to_json(report) if cfg.format == "json" else to_text(report)) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except CliError as exc:
        if exc.args[0]:
            print(f"wfrob: {exc}", file=sys.stderr)
        return exc.code
    try:
        code, report = COMMANDS[cfg.command](cfg)
    except CliError as exc:
        if exc.report is not None:
            _emit(cfg, exc.report)
        print(f"wfrob: {exc}", file=sys.stderr)
        return exc.code
    _emit(cfg, report)
    return code


if __name__ == "__main__":
    sys.exit(main())
