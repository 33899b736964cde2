"""Command-line front end: validate -> reduce -> verify, plus the map gallery and tower cones.

Exit codes: 0 pass, 1 refuted, 2 inconclusive or insufficient data, 3 input error.
Every report carries the seed it ran with, and reports are byte-identical
for a fixed seed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import presets
from .errors import (
    AlgebraParseError,
    BoundViolated,
    HorizonTooSmall,
    InsufficientData,
    LieAlgebraError,
    NotNilpotent,
)
from .reports import dumps, envelope

SEED_ENV = "CONEQUIV_SEED"
EXIT_PASS, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
PSI_TOLERANCE = 0.05


class InputError(Exception):
    """Bad flags, config keys or files; maps to exit code 3."""


# -- inputs ----------------------------------------------------------------------------------

def load_algebra_arg(spec: str):
    """A .lie file path, or ``preset:<name>`` for a built-in algebra."""
    from .lie_core import load_algebra
    if spec.startswith("preset:"):
        name = spec[len("preset:"):]
        if name not in presets.PRESETS:
            raise InputError(f"unknown preset {name!r}; choose from {sorted(presets.PRESETS)}")
        return presets.preset(name)
    if not Path(spec).is_file():
        raise InputError(f"cannot read algebra file {spec!r}")
    return load_algebra(spec)


def _stem(spec: str) -> tuple[Path, str]:
    if spec.startswith("preset:"):
        return Path.cwd(), spec[len("preset:"):]
    p = Path(spec)
    return p.parent, p.stem


def read_config(path: str, allowed: dict) -> dict:
    """key=value lines; blank lines and # comments skipped; unknown keys rejected."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise InputError(f"{path}:{lineno}:{col}: expected key=value")
        key, value = body.split("=", 1)
        col = len(key) - len(key.lstrip()) + 1
        key = key.strip().replace("-", "_")
        if key not in allowed:
            raise InputError(f"{path}:{lineno}:{col}: unknown key {key!r}")
        action = allowed[key]
        vcol = len(body) - len(value.lstrip()) + 1
        value = value.strip()
        try:
            out[key] = action.type(value) if action.type else value
        except (TypeError, ValueError):
            raise InputError(f"{path}:{lineno}:{vcol}: bad value {value!r} for {key}") from None
        if action.choices is not None and out[key] not in action.choices:
            raise InputError(f"{path}:{lineno}:{vcol}: {key} must be one of {list(action.choices)}")
    return out


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# -- subcommands -----------------------------------------------------------------------------

def cmd_validate(args):
    from .lie_core import exponential_radical, is_nilpotent, is_solvable, lower_central_series
    from .lie_core import triangulability_check
    from .errors import NonRationalSpectrum, NotTriangulable
    g = load_algebra_arg(args.algebra)
    series = lower_central_series(g)
    solvable = is_solvable(g)
    result = {"dim": g.dim, "labels": list(g.labels), "solvable": solvable,
              "nilpotent": is_nilpotent(g),
              "lower_central_series_dims": [s.dim for s in series],
              "exponential_radical_dim": exponential_radical(g).dim if solvable else None}
    if not solvable:
        result["triangulable"] = False
        result["obstruction"] = "not solvable"
        return EXIT_REFUTED, result
    try:
        triangulability_check(g)
        result["triangulable"] = True
    except (NotTriangulable, NonRationalSpectrum) as exc:
        result["triangulable"] = False
        result["obstruction"] = str(exc)
    return (EXIT_PASS if result["triangulable"] else EXIT_REFUTED), result


def cmd_reduce(args):
    from .cone_construct import check_pair, reduce
    from .lie_core import format_algebra
    g = load_algebra_arg(args.algebra)
    pair = reduce(g, args.seed)
    verdict = check_pair(pair)
    folder, stem = _stem(args.algebra)
    out = Path(args.output) if args.output else folder / f"{stem}-reduced.lie"
    out.write_text(format_algebra(pair.g1), encoding="utf-8")
    result = {"algebra_file": str(out), "reduced": format_algebra(pair.g1),
              "class_C": verdict.to_json(), "provenance": pair.provenance()}
    return (EXIT_PASS if verdict.passed else EXIT_REFUTED), result


def cmd_gradify(args):
    from .lie_core import associated_graded, format_algebra, layer_compatible
    g = load_algebra_arg(args.algebra)
    gr = associated_graded(g)
    folder, stem = _stem(args.algebra)
    out = Path(args.output) if args.output else folder / f"{stem}-graded.lie"
    out.write_text(format_algebra(gr.algebra), encoding="utf-8")
    from . import linalg as la
    ok = layer_compatible(gr)
    result = {"algebra_file": str(out), "graded": format_algebra(gr.algebra),
              "weights": list(gr.weights), "adapted_basis": la.matrix_to_strings(gr.adapted_basis),
              "layer_compatible": ok}
    return (EXIT_PASS if ok else EXIT_REFUTED), result


def cmd_verify(args):
    from .group_model import GroupModel, psi_constants, residual_study, write_csv
    g = load_algebra_arg(args.algebra)
    model = GroupModel(g, seed=args.seed)
    study = residual_study(model, args.k_min, args.k_max, args.pairs, args.seed, args.law)
    result = {"residual": study.to_json(), "residual_passes": study.passes()}
    ok = study.passes()
    if args.constants:
        consts = psi_constants(model, args.k_min, args.k_max, seed=args.seed, target=args.law)
        within = (abs(consts.C_best - 1) <= PSI_TOLERANCE and abs(consts.M_best - 1) <= PSI_TOLERANCE)
        result["psi_constants"] = consts.to_json()
        result["psi_constants_near_one"] = within
        ok = ok and within
    code = EXIT_PASS if ok else EXIT_REFUTED
    if args.format == "csv":
        return code, result, write_csv(study)
    return code, result


def cmd_analyze_map(args):
    from .cone_analysis import MAP_GALLERY, analyze_map
    if args.map not in MAP_GALLERY:
        raise InputError(f"unknown map {args.map!r}; choose from {sorted(MAP_GALLERY)}")
    report = analyze_map(args.map, args.k_min, args.k_max, args.per_bin, args.seed)
    return EXIT_PASS, report.to_json()


def cmd_ultralimit(args):
    from .ultralimit import V_RULES, classify_case, parse_filter
    try:
        fs = parse_filter(args.filter)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.v is not None and args.v not in V_RULES:
        raise InputError(f"unknown v rule {args.v!r}; choose from {sorted(V_RULES)}")
    v = V_RULES[args.v] if args.v else None
    report = classify_case(fs, v, args.horizon)
    result = report.to_json()
    result["filter_description"] = fs.description
    result["v_fibers"] = V_RULES[report.v_rule].fibers
    return (EXIT_PASS if report.decided else EXIT_INCONCLUSIVE), result


COMMAND_TABLE = {
    "validate": cmd_validate,
    "reduce": cmd_reduce,
    "gradify": cmd_gradify,
    "verify-cone-equiv": cmd_verify,
    "analyze-map": cmd_analyze_map,
    "ultralimit": cmd_ultralimit,
}
CSV_COMMANDS = {"verify-cone-equiv"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conequiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, algebra=True):
        p.add_argument("--config", help="key=value file mirroring these flags")
        p.add_argument("--seed", type=int, default=None,
                       help=f"random seed (default: ${SEED_ENV} or 0)")
        p.add_argument("--report", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if algebra:
            p.add_argument("--algebra", required=False,
                           help="structure-constant file, or preset:<name>")

    def scales(p, pairs=True):
        p.add_argument("--k-min", type=int, default=4, help="lowest dyadic scale exponent")
        p.add_argument("--k-max", type=int, default=20, help="highest dyadic scale exponent")
        p.add_argument("--scales", type=_scales, default=None,
                       help="k_min,k_max in one flag; overrides --k-min/--k-max")
        if pairs:
            p.add_argument("--pairs", "--samples", dest="pairs", type=int, default=10_000,
                           help="sampled pairs")

    common(sub.add_parser("validate", help="check axioms, series and triangulability"))
    p = sub.add_parser("reduce", help="emit the class (C) companion algebra and provenance")
    common(p)
    p.add_argument("--output", help="path for the reduced algebra file")
    p = sub.add_parser("gradify", help="emit the associated graded of a nilpotent algebra")
    common(p)
    p.add_argument("--output", help="path for the graded algebra file")
    p = sub.add_parser("verify-cone-equiv", help="residual test for the identity-coordinates map")
    common(p)
    scales(p)
    p.add_argument("--law", choices=("reduced", "graded"), default="reduced")
    p.add_argument("--constants", type=_bool, default=True,
                   help="also estimate the cone constants (true/false)")
    p = sub.add_parser("analyze-map", help="classify a built-in map of the real line")
    common(p, algebra=False)
    scales(p, pairs=False)
    p.add_argument("--map", default="identity")
    p.add_argument("--per-bin", type=int, default=40)
    p = sub.add_parser("ultralimit", help="cone of the tower space along a subsequence filter")
    common(p, algebra=False)
    p.add_argument("--scenario", choices=("tower-space", "sec24"), default="tower-space")
    p.add_argument("--filter", default="case3_l5", help="preset name or tower:a*j+b")
    p.add_argument("--v", default=None, help="v rule (default: the filter's own)")
    p.add_argument("--horizon", type=int, default=None)
    return parser


def _scales(text: str) -> tuple:
    lo, hi = (int(x) for x in str(text).split(","))
    if not 0 <= lo < hi:
        raise ValueError(text)
    return lo, hi


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv):
    """Flags win over config values, which win over the environment and defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sp = _subparser(parser, args.command)
        allowed = {a.dest: a for a in sp._actions
                   if a.dest not in ("help", "config") and a.option_strings}
        values = read_config(args.config, allowed)
        sp.set_defaults(**values)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = default_seed()
    if getattr(args, "scales", None) is not None:
        args.k_min, args.k_max = args.scales
    args.__dict__.pop("scales", None)
    if getattr(args, "algebra", "") is None:
        raise InputError("--algebra is required (a file or preset:<name>)")
    if args.format == "csv" and args.command not in CSV_COMMANDS:
        raise InputError(f"--format csv is available for {sorted(CSV_COMMANDS)} only")
    return args


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_flag(argv):
    # so that errors raised while parsing still land in the requested file
    for i, a in enumerate(argv):
        if a == "--report" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--report="):
            return a.split("=", 1)[1]
    return None


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if a in COMMAND_TABLE), "validate")
    seed, config, report_path = 0, {}, _report_flag(argv)
    try:
        args = parse_args(argv)
        command, seed, report_path = args.command, args.seed, args.report
        config = {k: v for k, v in sorted(vars(args).items())
                  if k not in ("command", "report", "config")}
        outcome = COMMAND_TABLE[command](args)
        code, result = outcome[0], outcome[1]
        if len(outcome) == 3:
            _emit(outcome[2], report_path)
            return code
        _emit(dumps(envelope(command, seed, code, config, result)), report_path)
        return code
    except (InputError, AlgebraParseError, LieAlgebraError, NotNilpotent, OSError) as exc:
        code, msg = EXIT_INPUT, str(exc)
    except (InsufficientData, HorizonTooSmall) as exc:
        code, msg = EXIT_INCONCLUSIVE, str(exc)
    except BoundViolated as exc:
        code, msg = EXIT_REFUTED, str(exc)
    sys.stderr.write(f"conequiv {command}: {msg}\n")
    text = dumps(envelope(command, seed, code, config, None, msg))
    try:
        _emit(text, report_path)
    except OSError:
        _emit(text, None)
    return code


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:        # argparse usage errors
        code = EXIT_INPUT if exc.code not in (0, None) else 0
    sys.exit(code)


if __name__ == "__main__":
    main()
