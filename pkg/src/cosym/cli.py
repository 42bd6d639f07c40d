"""Command-line front end.

Exit codes: 0 when every check passes, 2 when a check fails, 1 for usage or
configuration errors.  Reports are JSON with a top-level ``"schema": 1``.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .report import VerificationReport, dumps, envelope
from .scenario import Scenario, ScenarioError, build_structure, build_system, effective_seed, load_scenario

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2

COMMUTE_DEFAULTS = {
    "kahler->cokahler": "s1-c2",
    "cokahler->kahler": "s1-c2xr",
    "hyperkahler->3cosymplectic": "eguchi-hanson",
    "3cosymplectic->hyperkahler": "s1-hxr3",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cosym", description="Cosymplectic structures: verification, reduction, cones, flows.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, builtin=True):
        if builtin:
            src = sp.add_mutually_exclusive_group()
            src.add_argument("--builtin", help="fixture name (see list-builtins)")
            src.add_argument("--scenario", type=Path, help="scenario JSON file")
        sp.add_argument("--samples", type=int, help="number of sample points")
        sp.add_argument("--seed", type=int, help="sampling seed (overrides COSYM_SEED and the scenario)")
        sp.add_argument("--out", type=Path, help="write the JSON report here")
        sp.add_argument("--json", action="store_true", help="print the JSON report to stdout")

    common(sub.add_parser("verify", help="verify a structure"))
    common(sub.add_parser("reduce", help="reduce a datum and verify the quotient"))
    fl = sub.add_parser("flow", help="integrate the evolution field")
    common(fl)
    fl.add_argument("--start", type=_floats)
    fl.add_argument("--T", type=float)
    fl.add_argument("--h", type=float)
    fl.add_argument("--csv", type=Path, help="trajectory CSV path")
    cm = sub.add_parser("commute", help="reduce-then-construct against construct-then-reduce")
    common(cm)
    cm.add_argument("--direction", help="cone direction or 'torus'")
    cm.add_argument("--torus-map", choices=("identity", "rotation", "shifted"))
    cm.add_argument("--grid", type=int)
    rb = sub.add_parser("rigid-body", help="rigid-body reduction and reduced flow")
    common(rb)
    rb.add_argument("--M", type=_floats)
    rb.add_argument("--zeta", type=_floats)
    rb.add_argument("--start", type=_floats, help="theta,phi,t on the reduced chart")
    rb.add_argument("--T", type=float)
    rb.add_argument("--h", type=float)
    rb.add_argument("--csv", type=Path, help="trajectory CSV path")
    lb = sub.add_parser("list-builtins", help="print the fixture catalog")
    lb.add_argument("--json", action="store_true")
    return p


# -- helpers ---------------------------------------------------------------------


def _scenario(args, kind: str) -> Scenario:
    if getattr(args, "scenario", None) is not None:
        sc = load_scenario(args.scenario)
        if sc.kind != kind:
            raise ScenarioError("kind", f"scenario is {sc.kind!r}, command is {kind!r}", sc.source)
    else:
        sc = Scenario(kind, seed=0, samples=50, builtin=getattr(args, "builtin", None))
    sc.seed = effective_seed(sc.seed, args.seed)
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("--samples must be positive")
        sc.samples = args.samples
    return sc


def _param(args, sc: Scenario, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return sc.params.get(name, default)


def _emit(args, sc: Scenario, kind: str, body: dict, passed: bool, lines=()) -> int:
    doc = envelope(kind, {"pass": bool(passed), "seed": sc.seed, "samples": sc.samples, **body})
    text = dumps(doc) + "\n"
    out = args.out or (Path(sc.output["report"]) if sc.output.get("report") else None)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        for line in lines:
            print(line)
        print(f"{kind}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAIL


def _report_lines(report: VerificationReport, prefix=""):
    for c in report.checks:
        op = ">=" if c.bound == "min" else "<="
        yield f"  [{'pass' if c.passed else 'FAIL'}] {prefix}{c.check_name}: {c.value:.3e} ({op} {c.tolerance:.1e})"


def _write_csv(args, sc, flow):
    path = args.csv or (Path(sc.output["csv"]) if sc.output.get("csv") else None)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            flow.to_csv(fh)
    return path


def _need_builtin(sc: Scenario, kinds):
    from .fixtures import BUILTINS, builtin

    if sc.builtin is None:
        raise ConfigError("need --builtin or --scenario")
    if sc.builtin not in BUILTINS:
        raise ConfigError(f"unknown builtin {sc.builtin!r}; run list-builtins")
    if BUILTINS[sc.builtin][0] not in kinds:
        raise ConfigError(f"builtin {sc.builtin!r} is a {BUILTINS[sc.builtin][0]}, expected {'/'.join(kinds)}")
    return builtin(sc.builtin)


# -- commands ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .dynamics import TimeDependentSystem, verify_system
    from .reduction import ReductionDatum
    from .structures import verify

    sc = _scenario(args, "verify")
    obj = build_structure(sc.structure, sc.source) if sc.structure else _need_builtin(sc, ("structure", "reduction", "system"))
    if isinstance(obj, ReductionDatum):
        obj = obj.structure
    if isinstance(obj, TimeDependentSystem):
        report = verify_system(obj, samples=sc.samples, seed=sc.seed)
    else:
        report = verify(obj, samples=sc.samples, seed=sc.seed, tol=sc.tolerances)
    body = {"target": sc.builtin or "inline", "structure": type(obj).__name__, "report": report}
    return _emit(args, sc, "verify", body, report.passed, _report_lines(report))


def cmd_reduce(args) -> int:
    from . import reduction as red
    from .structures import AlmostContactMetric, AlmostCosymplectic, ThreeCosymplectic, verify

    sc = _scenario(args, "reduce")
    datum = _need_builtin(sc, ("reduction",))
    datum.tolerances = sc.tolerances
    n, seed = sc.samples, sc.seed
    report = VerificationReport("reduce", meta={"datum": datum.name, "quotient_dim": datum.quotient_dim})
    report.extend(red.certify(datum, samples=n, seed=seed, raise_on_failure=False), "datum.")
    if not report.passed:
        return _emit(args, sc, "reduce", {"target": sc.builtin, "report": report}, False, _report_lines(report))
    if isinstance(datum.structure, (AlmostCosymplectic, AlmostContactMetric, ThreeCosymplectic)):
        report.extend(red.basic_form_check(datum, samples=n, seed=seed), "basic.")
    reduced = red.reduce(datum, certify_samples=min(n, 20), seed=seed)
    body = {"target": sc.builtin}
    if isinstance(reduced, red.DegenerateQuotient):
        report.degenerate = True
        body["reduced"] = {"type": "point"}
    else:
        report.extend(verify(reduced, samples=n, seed=seed, tol=sc.tolerances), "reduced.")
        if isinstance(datum.structure, AlmostContactMetric):
            report.extend(red.decomposition_check(datum, samples=n, seed=seed), "decomposition.")
            report.extend(red.transport_check(datum, samples=min(n, 30), seed=seed), "transport.")
        if isinstance(reduced, (AlmostCosymplectic, AlmostContactMetric)):
            report.extend(red.reeb_pushforward_check(datum, reduced, samples=n, seed=seed), "reeb.")
        if isinstance(datum.structure, ThreeCosymplectic):
            report.extend(red.moment_tangency_check(datum, samples=n, seed=seed), "moment_tangency.")
            report.extend(reduced.metric_agreement, "metric_agreement.")
        pts = reduced.chart.sample(3, seed)
        body["reduced"] = {"type": type(reduced).__name__, "chart": reduced.chart.to_dict(), "grid": red.sampled_grid(reduced, pts)}
    body["report"] = report
    return _emit(args, sc, "reduce", body, report.passed, _report_lines(report))


def cmd_flow(args) -> int:
    from .dynamics import evolution_flow, verify_system
    from .report import ResidualAccumulator

    sc = _scenario(args, "flow")
    if sc.system is not None:
        system = build_system(sc.system, sc.source)
    else:
        system = _need_builtin(sc, ("system",))
    dim = system.chart.dim
    start = _param(args, sc, "start", [1.0] + [0.0] * (dim - 1))
    T = float(_param(args, sc, "T", 2 * math.pi))
    h = float(_param(args, sc, "h", 1e-3))
    if len(start) != dim:
        raise ConfigError(f"start needs {dim} coordinates {system.chart.coord_names}")
    flow = evolution_flow(system, np.asarray(start, dtype=float), T, h)
    report = verify_system(system, samples=sc.samples, seed=sc.seed)
    acc = ResidualAccumulator("t_defect", 1e-12 * max(1.0, T))
    acc.add(flow.max_log("t_defect"), flow.final)
    report.add(acc.result())
    if "H_drift" in flow.logs:
        acc = ResidualAccumulator("energy_drift", 1e-8)
        acc.add(flow.max_log("H_drift"), flow.final)
        report.add(acc.result())
    acc = ResidualAccumulator("truncated", 0.5)
    acc.add(float(flow.truncated), flow.final)
    report.add(acc.result())
    _write_csv(args, sc, flow)
    body = {"target": sc.builtin or "inline", "T": T, "h": h, "start": list(start), "flow": flow.summary(), "report": report}
    return _emit(args, sc, "flow", body, report.passed, _report_lines(report))


def cmd_commute(args) -> int:
    from .constructions import DIRECTIONS, commutation_cone_reduce, commutation_torus_reduce, moment_lift_check
    from .fixtures import builtin, torus_fixture

    sc = _scenario(args, "commute")
    direction = _param(args, sc, "direction", None)
    grid = int(_param(args, sc, "grid", 100))
    if direction is None:
        raise ConfigError(f"need --direction ({', '.join(DIRECTIONS)}, torus)")
    if direction == "torus":
        kind = _param(args, sc, "torus_map", "rotation")
        atlas, mu, datum, projection = torus_fixture(kind)
        lift = moment_lift_check(atlas, mu, seed=sc.seed)
        body = {"direction": "torus", "torus_map": kind, "moment_lift": lift}
        if not lift.liftable:
            body["note"] = "moment map does not lift to the mapping torus"
            return _emit(args, sc, "commute", body, False, [f"  moment lift: no (constant {lift.constant.tolist()})"])
        rep, iso, overlap = commutation_torus_reduce(atlas, datum, projection, grid_size=grid, seed=sc.seed)
        body.update({"comparison": rep, "isometry": iso, "overlap": overlap})
        passed = rep.passed and iso.passed and overlap.passed
        lines = [f"  max deviation {rep.max_abs_deviation:.3e} (<= {rep.tolerance:.1e})", *_report_lines(iso), *_report_lines(overlap)]
        return _emit(args, sc, "commute", body, passed, lines)
    if direction not in DIRECTIONS:
        raise ConfigError(f"unknown direction {direction!r}; expected one of {list(DIRECTIONS) + ['torus']}")
    name = sc.builtin or COMMUTE_DEFAULTS[direction]
    datum = builtin(name)
    rep = commutation_cone_reduce(datum, direction, grid_size=grid, seed=sc.seed)
    body = {"target": name, "comparison": rep}
    lines = [
        f"  [{'pass' if c.passed else 'FAIL'}] {c.tensor}: {c.max_abs_deviation:.3e} (<= {c.tolerance:.1e})"
        for c in rep.comparisons
    ]
    return _emit(args, sc, "commute", body, rep.passed, lines)


def cmd_rigid_body(args) -> int:
    from .dynamics import RigidBodyParams, rigid_body_scenario

    sc = _scenario(args, "rigid-body")
    M = _param(args, sc, "M", [1.0, 2.0, 3.0])
    zeta = _param(args, sc, "zeta", [0.0, 0.0, 1.0])
    start = _param(args, sc, "start", [0.8, 0.3, 0.0])
    T = float(_param(args, sc, "T", 1.0))
    h = float(_param(args, sc, "h", 1e-3))
    if len(zeta) != 3 or not np.linalg.norm(zeta) > 0:
        raise ConfigError("--zeta must be a non-zero 3-vector")
    if len(start) != 3:
        raise ConfigError("--start is theta,phi,t")
    params = RigidBodyParams(M=tuple(M))
    res = rigid_body_scenario(params, zeta, start, T, h, samples=min(sc.samples, 30), seed=sc.seed)
    _write_csv(args, sc, res.flow)
    body = {"T": T, "h": h, "start": list(start), **res.to_dict()}
    return _emit(args, sc, "rigid-body", body, res.passed, _report_lines(res.checks))


def cmd_list_builtins(args) -> int:
    from .fixtures import catalog

    entries = catalog()
    if args.json:
        sys.stdout.write(dumps(entries) + "\n")
    else:
        width = max(len(e["name"]) for e in entries)
        for e in entries:
            print(f"{e['name']:<{width}}  {e['kind']:<9}  {e['description']}")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "reduce": cmd_reduce,
    "flow": cmd_flow,
    "commute": cmd_commute,
    "rigid-body": cmd_rigid_body,
    "list-builtins": cmd_list_builtins,
}


def run(argv=None) -> int:
    from .reduction import ReductionError

    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ReductionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:  # ScenarioError, DomainError, bad parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
