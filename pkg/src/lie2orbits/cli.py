"""Command-line front end.

Every command writes JSON lines: one record per check followed by a summary
record.  Exit codes: 0 all checks pass, 1 unknown command, 2 parse error,
3 invalid crossed module, 4 I/O error, 5 some check failed.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .coadjoint import orbit_dimension_split, unit_covector
from .crossed_module import semidirect, validate
from .double import MissingGroupModelError, coadjoint_double, double_check
from .examples import BUILTIN_NAMES, ExampleBundle, builtin
from .io import SchemaError, load_json, parse_point
from .lie_core import InvalidStructureError, RankInstabilityError
from .report import SCHEMA_VERSION, CheckReport
from .verify import (
    coisotropic_graph_check,
    flow_check,
    kks_check,
    multiplicative_form_check,
    orbit_unit_compose_check,
    pi_sharp_morphism_check,
    target_poisson_check,
)

log = logging.getLogger("lie2orbits")

COMMANDS = ("validate", "orbit", "kks", "check-mult", "check-coiso", "check-morphism",
            "check-target", "double-check", "report-all")

EXIT_OK, EXIT_COMMAND, EXIT_PARSE, EXIT_INVALID, EXIT_IO, EXIT_FAILED = range(6)


class CliError(Exception):
    def __init__(self, code, message, report=None):
        super().__init__(message)
        self.code = code
        self.report = report


@dataclass
class RunConfig:
    command: str
    input: str
    point: str = None
    seed: int = 0
    n_samples: int = 100
    tol: float = None
    output: str = None
    force: bool = False

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise CliError(EXIT_PARSE, "--tol must be positive")
        if self.n_samples < 1:
            raise CliError(EXIT_PARSE, "--samples must be at least 1")


def load_bundle(source, force=False):
    """``builtin:<name>`` or a JSON file; returns an :class:`ExampleBundle`."""
    if source.startswith("builtin:"):
        try:
            return builtin(source)
        except KeyError as exc:
            raise CliError(EXIT_PARSE, str(exc.args[0])) from None
    try:
        cm = load_json(source)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {source}: {exc}") from None
    except SchemaError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    report = validate(cm)
    if not report.passed and not force:
        raise CliError(EXIT_INVALID, f"{source}: crossed-module identities fail", report)
    alpha = np.zeros(cm.dim_h)
    if cm.dim_h:
        alpha[-1] = 1.0
    return ExampleBundle(cm.name, cm, None, (), {"default": alpha})


def load_crossed_module(source, force=False):
    return load_bundle(source, force).cm


def _parse_point(text, cm, allow_full=False):
    dims = [cm.dim_h] + ([cm.dim] if allow_full else [])
    n_given = len([t for t in text.split(",") if t.strip()])
    return parse_point(text, n_given if n_given in dims else cm.dim_h)


def _covector(bundle, point):
    """Full covector on h x| g; h*-only points are read as units."""
    if point.shape[0] == bundle.cm.dim_h:
        return unit_covector(bundle.cm, point), True
    return point, False


def _tol(cfg, default):
    return default if cfg.tol is None else cfg.tol


def _run_validate(cfg, bundle, point):
    return validate(bundle.cm, _tol(cfg, 1e-12))


def _run_orbit(cfg, bundle, point):
    D = semidirect(bundle.cm)
    xi, is_unit = _covector(bundle, point)
    report = CheckReport()
    if is_unit:
        split = orbit_dimension_split(bundle.cm, point, D=D)
        report.meta.update(split)
        report.add("orbit_rank_split",
                   abs(split["total_rank"] - split["core_rank"] - split["base_rank"]), 0.0)
    report.extend(flow_check(D, xi, min(cfg.n_samples, 50), _tol(cfg, 1e-8), cfg.seed))
    return report


def _run_kks(cfg, bundle, point):
    xi, _ = _covector(bundle, point)
    return kks_check(semidirect(bundle.cm), xi, min(cfg.n_samples, 20),
                     _tol(cfg, 1e-8), cfg.seed)


def _run_mult(cfg, bundle, point):
    return multiplicative_form_check(bundle.cm, point, cfg.n_samples, _tol(cfg, 1e-9), cfg.seed)


def _run_coiso(cfg, bundle, point):
    return coisotropic_graph_check(bundle.cm, point, cfg.n_samples, _tol(cfg, 1e-9), cfg.seed)


def _run_morphism(cfg, bundle, point):
    return pi_sharp_morphism_check(bundle.cm, cfg.n_samples, _tol(cfg, 1e-9), cfg.seed)


def _run_target(cfg, bundle, point):
    return target_poisson_check(bundle.cm, point, cfg.n_samples, _tol(cfg, 1e-8), cfg.seed)


def _run_double(cfg, bundle, point):
    dg = coadjoint_double(bundle)
    report = double_check(dg, cfg.n_samples, _tol(cfg, 1e-9), cfg.seed)
    report.extend(orbit_unit_compose_check(dg, point, cfg.n_samples, _tol(cfg, 1e-9), cfg.seed))
    return report


def _run_all(cfg, bundle, point):
    cm = bundle.cm
    report = CheckReport()
    report.extend(_run_validate(cfg, bundle, point), "validate.")
    points = dict(bundle.points)
    if cfg.point is not None:
        points = {"point": point}
    # the origin is a unit whose orbit is a single point
    points.setdefault("origin", np.zeros(cm.dim_h))
    for label, alpha in points.items():
        for name, runner in (("mult", _run_mult), ("coiso", _run_coiso),
                             ("target", _run_target), ("orbit", _run_orbit)):
            report.extend(runner(cfg, bundle, alpha), f"{label}.{name}.")
    report.extend(_run_morphism(cfg, bundle, point), "morphism.")
    if bundle.group_model is not None:
        report.extend(_run_double(cfg, bundle, point), "double.")
    return report


RUNNERS = {
    "validate": _run_validate,
    "orbit": _run_orbit,
    "kks": _run_kks,
    "check-mult": _run_mult,
    "check-coiso": _run_coiso,
    "check-morphism": _run_morphism,
    "check-target": _run_target,
    "double-check": _run_double,
    "report-all": _run_all,
}

_UNIT_ONLY = {"check-mult", "check-coiso", "check-target", "double-check", "report-all"}


def _records(cfg, bundle, point, report):
    base = {"schema": SCHEMA_VERSION, "command": cfg.command, "example": bundle.name}
    lines = []
    for rec in report.to_records():
        lines.append({**base, "type": "check", **rec})
    cm = bundle.cm
    summary = {
        **base,
        "type": "summary",
        "pass": report.passed,
        "n_checks": len(report.checks),
        "n_failed": sum(not c.passed for c in report.checks),
        "seed": cfg.seed,
        "n_samples": cfg.n_samples,
        "tol": cfg.tol,
        "version": __version__,
        "basis": {"h": list(cm.h.basis_names), "g": list(cm.g.basis_names),
                  "dual": list(cm.dual_names())},
        "point": None if point is None else [float(v) for v in point],
        "meta": report.meta,
    }
    lines.append(summary)
    return [json.dumps(rec, sort_keys=True, default=_jsonable) for rec in lines]


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run(cfg):
    """Execute ``cfg``; returns ``(exit_code, lines)``."""
    if cfg.command not in RUNNERS:
        raise CliError(EXIT_COMMAND, f"unknown command {cfg.command!r}; "
                       f"choose from {', '.join(COMMANDS)}")
    bundle = load_bundle(cfg.input, cfg.force)
    cm = bundle.cm
    if cfg.point is not None:
        try:
            point = _parse_point(cfg.point, cm, allow_full=cfg.command in ("orbit", "kks"))
        except SchemaError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
    else:
        point = bundle.default_point
    if cfg.command in _UNIT_ONLY and point.shape[0] != cm.dim_h:
        raise CliError(EXIT_PARSE, f"{cfg.command} needs a point of h* (dim {cm.dim_h})")
    try:
        report = RUNNERS[cfg.command](cfg, bundle, point)
    except InvalidStructureError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None
    except MissingGroupModelError as exc:
        raise CliError(EXIT_INVALID, f"{exc}; double-check needs a built-in example "
                       f"({', '.join(BUILTIN_NAMES)})") from None
    except RankInstabilityError as exc:
        report = CheckReport()
        report.add("rank_stability", float("inf"), 0.0, note=str(exc))
    code = EXIT_OK if report.passed else EXIT_FAILED
    return code, _records(cfg, bundle, point, report)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lie2orbits",
        description="Numerical checks for coadjoint orbits of Lie 2-groups.")
    parser.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("--input", required=True,
                        help="crossed-module JSON file or builtin:<name> "
                             f"({', '.join(BUILTIN_NAMES)})")
    parser.add_argument("--point", help="comma-separated coordinates in h* basis order "
                                        "(orbit and kks also accept a full covector)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=100, dest="n_samples")
    parser.add_argument("--tol", type=float, help="override the default tolerance")
    parser.add_argument("--output", help="write records here instead of stdout")
    parser.add_argument("--force", action="store_true",
                        help="continue when the crossed-module identities fail")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _emit(lines, output):
    text = "\n".join(lines) + "\n"
    if output is None:
        sys.stdout.write(text)
        return
    try:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {output}: {exc}") from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args.input, args.point, args.seed, args.n_samples,
                        args.tol, args.output, args.force)
        code, lines = run(cfg)
        _emit(lines, cfg.output)
        return code
    except CliError as exc:
        log.error("%s", exc)
        if exc.report is not None:
            base = {"schema": SCHEMA_VERSION, "command": args.command, "type": "check"}
            lines = [json.dumps({**base, **rec}, sort_keys=True) for rec in exc.report.to_records()]
            try:
                _emit(lines, args.output)
            except CliError:
                pass
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
