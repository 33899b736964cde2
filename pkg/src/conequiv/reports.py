"""Deterministic JSON report envelopes shared by the CLI subcommands."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources

from . import __version__

COMMANDS = ("validate", "reduce", "gradify", "verify-cone-equiv", "analyze-map", "ultralimit")
STATUS_BY_EXIT = {0: "pass", 1: "refuted", 2: "inconclusive", 3: "input-error"}


def sanitize(obj):
    """Plain-JSON view: non-finite floats and Fractions become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if hasattr(obj, "to_json"):
        return sanitize(obj.to_json())
    try:
        return sanitize(float(obj))
    except (TypeError, ValueError):
        return str(obj)


def envelope(command: str, seed: int, exit_code: int, config: dict, result=None,
             error: str | None = None) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "exit_code": exit_code,
        "status": STATUS_BY_EXIT[exit_code],
        "config": sanitize(config),
        "result": sanitize(result),
        "error": error,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("conequiv").joinpath("schemas/report.schema.json").read_text("utf-8")
    return json.loads(text)
