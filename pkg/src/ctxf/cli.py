"""ctxf command line: solve equations, build Mermin scenarios, print tables and verdicts.

Exit codes: 0 ok, 2 bad input, 3 unrealizable context, 4 internal invariant failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import avn, mermin, qrealize, sheaf
from .abgroup import FiniteAbelianGroup, GroupError, RationalTurn, TorusPoint, parse_group
from .zsolve import (
    EquationSyntaxError,
    EquationSystem,
    InternalInvariantError,
    ZModEquation,
    check_consistency,
    find_violated_relation,
    parse_equation,
    solve_in_group,
    solve_torus,
)

EXIT_OK, EXIT_INPUT, EXIT_UNREALIZABLE, EXIT_INTERNAL = 0, 2, 3, 4


class SpecError(ValueError):
    pass


@dataclass
class RunSpec:
    group: FiniteAbelianGroup
    equations: list[ZModEquation]
    command: str = ""
    modulus: int | None = None
    module: FiniteAbelianGroup | None = None
    tolerance: float = qrealize.TOL
    fmt: str = "tsv"
    options: dict = field(default_factory=dict)

    def system(self) -> EquationSystem:
        return EquationSystem(tuple(self.equations), self.group)


def _equation_from_json(obj, group: FiniteAbelianGroup) -> ZModEquation:
    if isinstance(obj, str):
        return parse_equation(obj, group)
    if not isinstance(obj, dict) or "coeffs" not in obj or "rhs" not in obj:
        raise SpecError(f"equation must be a string or have 'coeffs' and 'rhs': {obj!r}")
    coeffs = obj["coeffs"]
    if not isinstance(coeffs, dict) or not all(isinstance(v, int) for v in coeffs.values()):
        raise SpecError(f"coeffs must map variable names to integers: {coeffs!r}")
    if not coeffs:
        raise SpecError("equation has no variables")
    terms = " + ".join(f"{n}*{v}" for v, n in coeffs.items())
    return parse_equation(f"{terms} = {obj['rhs']}", group)


def load_spec(args: argparse.Namespace) -> RunSpec:
    """Build the run spec from ``--spec`` or from ``--group``/``--eqn``, never both."""
    flags = getattr(args, "group", None) is not None or bool(getattr(args, "eqn", None))
    if getattr(args, "spec", None):
        if flags:
            raise SpecError("give either --spec or --group/--eqn, not both")
        try:
            with open(args.spec) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read spec file {args.spec}: {exc}") from exc
        if not isinstance(raw, dict) or "group" not in raw:
            raise SpecError("spec file needs a 'group' entry")
        group = parse_group(raw["group"])
        items = raw.get("equations", [raw["equation"]] if "equation" in raw else [])
        equations = [_equation_from_json(e, group) for e in items]
    else:
        if getattr(args, "group", None) is None:
            raise SpecError("missing --group (or --spec)")
        group = parse_group(args.group)
        equations = [parse_equation(e, group) for e in (getattr(args, "eqn", None) or [])]
    if not equations:
        raise SpecError("no equations given")
    module = getattr(args, "module", None)
    return RunSpec(
        group,
        equations,
        command=args.command,
        modulus=getattr(args, "modulus", None),
        module=parse_group(module) if module else None,
        tolerance=getattr(args, "tolerance", None) or qrealize.TOL,
        fmt=getattr(args, "format", None) or "tsv",
    )


def _scenario(spec: RunSpec):
    scenarios = [mermin.build_scenario(spec.group, eq) for eq in spec.equations]
    if len(scenarios) == 1:
        return scenarios[0]
    return mermin.tensor_scenarios(scenarios)


def _fmt_weight(w) -> str:
    if w is True or w is False:
        return str(int(w))
    w = Fraction(w)
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def _assignment(group: FiniteAbelianGroup, values: dict) -> str:
    return ", ".join(f"{v}={group.format_element(x)}" for v, x in values.items())


# commands


def cmd_solve(spec: RunSpec, out) -> int:
    sys_ = spec.system()
    group = spec.group
    if not check_consistency(sys_):
        relation = find_violated_relation(sys_)
        out.write(f"inconsistent; relation {list(relation)} does not annihilate the right-hand side\n")
        return EXIT_OK
    solution = solve_in_group(sys_, group)
    torus = solve_torus(sys_, group)
    parts = ["consistent"]
    parts.append(f"solution {_assignment(group, solution)}" if solution is not None else f"no solution in {group}")
    parts.append("torus solution " + ", ".join(f"{v} = {p}" for v, p in torus.items()))
    out.write("; ".join(parts) + "\n")
    return EXIT_OK


def _describe(s: mermin.MerminScenario, out) -> None:
    out.write(f"equation {s.equation} over {s.group}\n")
    out.write(f"exponent k = {s.exponent}\nN = {s.parties}\nn0 = {s.padding}\n")
    for v in s.variables:
        out.write(f"phase {v} = {s.beta[v]}\n")
    out.write("alpha = [" + ", ".join(str(a) for a in s.alphas) + "]\n")
    for v in range(s.parties + 1):
        name = "control" if v == 0 else f"variation {v}"
        labels = " ".join(s.label(m) for m in s.context(v))
        out.write(f"{name}: {labels} -> sum {s.group.format_element(s.context_target(v))}\n")


def cmd_scenario_build(spec: RunSpec, out) -> int:
    built = _scenario(spec)
    factors = built.factors if isinstance(built, mermin.CompositeScenario) else (built,)
    for j, s in enumerate(factors):
        if len(factors) > 1:
            out.write(f"# factor {j + 1}\n")
        _describe(s, out)
    return EXIT_OK


def render_table(built, model: sheaf.EmpiricalModel, fmt: str = "tsv", possibilistic: bool = False) -> str:
    """One row per context; columns are the fibres {sum of outcomes = t}.

    A cell shows the weight every section of the fibre carries, or ``mixed`` if
    the weights differ within the fibre.
    """
    group = model.group
    if possibilistic:
        model = sheaf.possibilize(model)
    header = ["context"] + [f"sum={group.format_element(t)}" for t in group.elements()]
    rows = []
    for ctx, dist in model.context_items():
        cells = []
        for t in group.elements():
            ws = set()
            for tup in itertools.product(group.elements(), repeat=len(ctx)):
                if group.sum(tup) == t:
                    ws.add(dist[tup])
            cells.append(_fmt_weight(ws.pop()) if len(ws) == 1 else "mixed")
        rows.append([" ".join(built.label(m) for m in ctx)] + cells)
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
    else:
        lines = ["\t".join(header)] + ["\t".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_table(spec: RunSpec, out, possibilistic: bool = False) -> int:
    built = _scenario(spec)
    out.write(render_table(built, mermin.model_of(built), spec.fmt, possibilistic))
    return EXIT_OK


def cmd_classify(spec: RunSpec, out) -> int:
    out.write(sheaf.classify(mermin.model_of(_scenario(spec))).value + "\n")
    return EXIT_OK


def cmd_avn(spec: RunSpec, out) -> int:
    built = _scenario(spec)
    model = mermin.model_of(built)
    module = spec.module or spec.group
    q = spec.modulus or module.exponent
    witness = avn.avn_witness(model, q, module)
    if witness is None:
        out.write(f"AvN over {module} (modulus {q})\n")
    else:
        out.write(f"not AvN over {module} (modulus {q}); satisfying global assignment:\n")
        for m, x in witness.as_dict().items():
            out.write(f"  {built.label(m)} = {module.format_element(x)}\n")
    return EXIT_OK


def parse_phases(group: FiniteAbelianGroup, text: str) -> list[TorusPoint]:
    """``1/4;1/4;0`` (one phase per party); coordinates of a phase split by commas."""
    phases = []
    for part in text.split(";"):
        coords = [c for c in part.strip().strip("()").split(",") if c.strip()]
        if len(coords) != group.order - 1:
            raise SpecError(f"phase {part!r} needs {group.order - 1} coordinates")
        try:
            phases.append(TorusPoint(group, [RationalTurn.parse(c) for c in coords]))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"bad phase {part!r}: {exc}") from exc
    return phases


def _realize_context(group, alphas) -> float:
    target = qrealize.classical_phase_sum(group, alphas)
    exact = qrealize.exact_context_distribution(group, len(alphas), target)
    simulated = qrealize.measure_all_X(qrealize.gated_ghz(group, alphas))
    return qrealize.max_deviation(exact, simulated)


def cmd_realize(spec: RunSpec, out, phases: str | None = None) -> int:
    if phases is not None:
        alphas = parse_phases(spec.group, phases)
        if len(alphas) < 2:
            raise SpecError("a context needs at least two parties")
        dev = _realize_context(spec.group, alphas)
        out.write(f"custom context: max deviation {dev:.3e}\n")
        worst = dev
    else:
        built = _scenario(spec)
        if isinstance(built, mermin.CompositeScenario):
            raise SpecError("realize works on a single equation")
        worst = 0.0
        for v in range(built.parties + 1):
            alphas = [built.phase(r) for r in built.context_settings(v)]
            dev = _realize_context(built.group, alphas)
            out.write(f"context {v}: max deviation {dev:.3e}\n")
            worst = max(worst, dev)
        out.write(f"max deviation {worst:.3e}\n")
    if worst >= spec.tolerance:
        out.write(f"deviation exceeds tolerance {spec.tolerance:g}\n")
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_hierarchy_demo(p: int, kprime: FiniteAbelianGroup, out, full_theory: bool = False) -> int:
    zp = FiniteAbelianGroup((p,))
    s = mermin.build_scenario(zp, ZModEquation({"y": p}, (1,)))
    model = mermin.empirical_model(s) if full_theory else None
    witness = avn.hierarchy_witness(p, kprime, s, model)
    y = avn.scaled_identity_solution(p, kprime)
    out.write(f"{p}*y = (1) over Z{p}: N = {s.parties}\n")
    if model is not None:
        verdict = "AvN" if avn.avn_check(model, p) else "not AvN"
        out.write(f"{verdict} over Z{p} (modulus {p})\n")
    out.write(f"y = {kprime.format_element(y)} solves {p}*y = (1,...,1) in {kprime}\n")
    out.write("witness:\n")
    for m, x in witness.as_dict().items():
        out.write(f"  {s.label(m)} = {kprime.format_element(x)}\n")
    out.write(f"not AvN over {kprime}\n")
    return EXIT_OK


# argument parsing


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", help="group literal, e.g. Z2 or Z2xZ4")
    p.add_argument("--eqn", action="append", help="equation such as '2*y=(1)'; repeatable")
    p.add_argument("--spec", help="JSON spec file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _add_input(sub.add_parser("solve", help="consistency, group solution and torus solution"))

    scen = sub.add_parser("scenario", help="Mermin scenario tools")
    scen_sub = scen.add_subparsers(dest="action", required=True)
    _add_input(scen_sub.add_parser("build", help="print N, n0, phases and the cover"))

    table = sub.add_parser("table", help="print the empirical model")
    _add_input(table)
    table.add_argument("--possibilistic", action="store_true")
    table.add_argument("--format", choices=("tsv", "markdown"), default="tsv")

    _add_input(sub.add_parser("classify", help="contextuality level"))

    av = sub.add_parser("avn", help="All-vs-Nothing check")
    _add_input(av)
    av.add_argument("--modulus", type=int)
    av.add_argument("--module")

    real = sub.add_parser("realize", help="compare exact and simulated context distributions")
    _add_input(real)
    real.add_argument("--phases", help="custom context, e.g. '1/4;0;0'")
    real.add_argument("--tolerance", type=float)

    demo = sub.add_parser("hierarchy-demo", help="non-AvN witness over a coprime module")
    demo.add_argument("--p", type=int, required=True)
    demo.add_argument("--kprime", required=True)
    demo.add_argument("--full-theory", action="store_true", help="generate the theory from the full model")
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "hierarchy-demo":
            return cmd_hierarchy_demo(args.p, parse_group(args.kprime), out, args.full_theory)
        if args.command == "realize" and args.phases is not None and args.group is not None and not args.eqn:
            spec = RunSpec(parse_group(args.group), [], "realize", tolerance=args.tolerance or qrealize.TOL)
            return cmd_realize(spec, out, args.phases)
        spec = load_spec(args)
        if args.command == "solve":
            return cmd_solve(spec, out)
        if args.command == "scenario":
            return cmd_scenario_build(spec, out)
        if args.command == "table":
            return cmd_table(spec, out, args.possibilistic)
        if args.command == "classify":
            return cmd_classify(spec, out)
        if args.command == "avn":
            return cmd_avn(spec, out)
        if args.command == "realize":
            return cmd_realize(spec, out, args.phases)
    except qrealize.UnrealizableContext as exc:
        err.write(f"error: {exc}\n")
        return EXIT_UNREALIZABLE
    except InternalInvariantError as exc:
        err.write(f"internal invariant violated: {exc}\n")
        return EXIT_INTERNAL
    except (SpecError, GroupError, EquationSyntaxError, mermin.ScenarioError, avn.ModulusError,
            avn.PreconditionError, sheaf.DomainError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    raise AssertionError(f"unhandled command {args.command}")


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
