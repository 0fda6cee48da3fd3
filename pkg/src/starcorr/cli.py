"""Command-line front end: ``starcorr <command> [files] [options]``.

Every command prints one report (JSON by default, CSV with ``--format csv``)
to standard output. Exit codes: 0 success, 1 usage error, 2 invalid input,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import nlocal, qmath, qnet, star
from .bell import bell_value, local_bound
from .errors import StarcorrError, ValidationError
from .schemas import (
    dump_quantum,
    dump_reduced,
    dump_scenario,
    dump_sign_class,
    dump_strategy,
    load_bell_strategy,
    load_matrix,
    load_quantum,
    load_scenario,
    load_strategy,
)

THREADS_ENV = "STARCORR_THREADS"


class UsageError(StarcorrError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Report:
    command: str
    inputs_digest: str
    results: dict = field(default_factory=dict)
    timing_ms: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls(**json.loads(text))

    def to_csv(self) -> str:
        row = {"command": self.command, "inputs_digest": self.inputs_digest, "timing_ms": self.timing_ms}
        row.update(_flatten(self.results))
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def _flatten(obj, prefix: str = "") -> dict:
    """Nested dicts join keys with '.'; numeric lists become ``key_1 .. key_n`` columns."""
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        for i, v in enumerate(obj, start=1):
            out[f"{prefix}_{i}"] = v
    elif isinstance(obj, list):
        out[prefix] = json.dumps(obj, sort_keys=True)
    else:
        out[prefix] = obj
    return out


def _read_json(path: str) -> tuple[Any, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(raw), raw
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _evaluation(ev: star.StarEvaluation) -> dict:
    return {"I": ev.I.tolist(), "s_net": ev.s_net, "bound": ev.bound, "violated": ev.violated}


def _tolerances(tol: float) -> dict:
    return {
        "decision": tol,
        "state_invariants": qmath.ATOL,
        "algebra": qmath.ALGEBRA_TOL,
        "normalization": star.NORMALIZATION_TOL,
        "zero_I": star.ZERO_I,
        "saturation": nlocal.SATURATION_TOL,
        "I_match": nlocal.I_MATCH_TOL,
    }


def cmd_bound(args, inputs):
    doc, _ = inputs[0]
    m = load_matrix(doc)
    lb = local_bound(m, tie_tol=args.tol)
    return {"bound": lb.bound, "n_A": m.n_A, "n_B": m.n_B, "maximizers": [list(x.values) for x in lb.maximizers]}


def cmd_star_bound(args, inputs):
    sc = load_scenario(inputs[0][0])
    return {"bound": star.star_bound(sc), "edge_bounds": [local_bound(m).bound for m in sc.edge_matrices]}


def cmd_eval_classical(args, inputs):
    sc = load_scenario(inputs[0][0])
    st = load_strategy(inputs[1][0])
    return _evaluation(star.evaluate(nlocal.behavior_from_strategy(st, sc), sc, tol=args.tol))


def cmd_max_classical(args, inputs):
    sc = load_scenario(inputs[0][0])
    res = nlocal.classical_max(sc)
    ev = star.evaluate(nlocal.behavior_from_strategy(res.strategy, sc), sc, tol=args.tol)
    return {
        "value": res.value,
        "heuristic": res.heuristic,
        "witness": None if res.witness is None else dump_reduced(res.witness),
        "strategy": dump_strategy(res.strategy),
        "witness_evaluation": _evaluation(ev),
    }


def cmd_eval_quantum(args, inputs):
    sc = load_scenario(inputs[0][0])
    qs = load_quantum(inputs[1][0])
    return _evaluation(star.evaluate(qnet.behavior_from_quantum(qs, sc), sc, tol=args.tol))


def cmd_visibility(args, inputs):
    sc = load_scenario(inputs[0][0])
    qs = load_quantum(inputs[1][0])
    ev = star.evaluate(qnet.behavior_from_quantum(qs, sc), sc, tol=args.tol)
    v = qnet.critical_visibility(sc, qs, tol=min(args.tol, qnet.BISECTION_TOL))
    return {
        "critical_visibility": "no violation" if v is None else v,
        "bound": ev.bound,
        "s_net_at_v1": ev.s_net,
    }


def cmd_saturate(args, inputs):
    m = load_matrix(inputs[0][0])
    families = nlocal.saturating_families(m, _sources(args), tol=args.tol)
    return {
        "bound": local_bound(m).bound,
        "sources": _sources(args),
        "families": [dump_sign_class(c) for c in families],
    }


def cmd_reduce(args, inputs):
    sc = load_scenario(inputs[0][0])
    st = load_strategy(inputs[1][0])
    before = star.evaluate(nlocal.behavior_from_strategy(st, sc), sc)
    reduced = nlocal.reduce(st, sc)
    return {
        "I": before.I.tolist(),
        "I_reduced": reduced.predicted_I(sc.edge_matrices[0], sc.sources).tolist(),
        "reduced": dump_reduced(reduced),
    }


def cmd_tensorize(args, inputs):
    m = load_matrix(inputs[0][0])
    state, alice, bob = load_bell_strategy(inputs[1][0])
    setup = qnet.tensorize(m, state, alice, bob, _sources(args))
    ev = star.evaluate(qnet.behavior_from_quantum(setup.strategy, setup.scenario), setup.scenario, tol=args.tol)
    out = Path(args.out)
    files = {"scenario": str(out / "scenario.json"), "quantum": str(out / "quantum.json")}
    _write_json(Path(files["scenario"]), dump_scenario(setup.scenario))
    _write_json(Path(files["quantum"]), dump_quantum(setup.strategy))
    return {"files": files, "bell_value": bell_value(m, state, alice, bob), **_evaluation(ev)}


def cmd_preset(args, inputs):
    setup = qnet.preset(args.name, getattr(args, "sources", None))
    ev = star.evaluate(qnet.behavior_from_quantum(setup.strategy, setup.scenario), setup.scenario, tol=args.tol)
    out = Path(args.out)
    stem = args.name.replace("(", "_").replace(")", "")
    files = {"scenario": str(out / f"{stem}.scenario.json"), "quantum": str(out / f"{stem}.quantum.json")}
    _write_json(Path(files["scenario"]), dump_scenario(setup.scenario))
    _write_json(Path(files["quantum"]), dump_quantum(setup.strategy))
    return {"files": files, **_evaluation(ev)}


def _sources(args) -> int:
    n = getattr(args, "sources", None)
    if n is None or n < 1:
        raise UsageError("--sources N (N >= 1) is required")
    return n


COMMANDS = {
    "bound": (cmd_bound, ["matrix"]),
    "star-bound": (cmd_star_bound, ["scenario"]),
    "eval-classical": (cmd_eval_classical, ["scenario", "strategy"]),
    "max-classical": (cmd_max_classical, ["scenario"]),
    "eval-quantum": (cmd_eval_quantum, ["scenario", "quantum"]),
    "visibility": (cmd_visibility, ["scenario", "quantum"]),
    "saturate": (cmd_saturate, ["matrix"]),
    "reduce": (cmd_reduce, ["scenario", "strategy"]),
    "tensorize": (cmd_tensorize, ["matrix", "bell_strategy"]),
    "preset": (cmd_preset, []),
}


def _global_options(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("json", "csv"), default=default("json"))
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--tol", type=float, default=default(star.VIOLATION_TOL))
    parser.add_argument("--timing", action="store_true", default=default(False),
                        help="record wall-clock time (reports are then not byte-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="starcorr", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    for name, (_, files) in COMMANDS.items():
        p = sub.add_parser(name)
        _global_options(p, suppress=True)
        if name == "preset":
            p.add_argument("name", help=", ".join(qnet.PRESET_NAMES))
        for f in files:
            p.add_argument(f)
        if name in ("saturate", "tensorize", "preset"):
            p.add_argument("--sources", type=int, default=None)
        if name in ("tensorize", "preset"):
            p.add_argument("--out", default=".", help="directory for the emitted JSON files")
    return parser


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(list(argv))
        if not (args.tol > 0 and np.isfinite(args.tol)):
            raise UsageError("--tol must be a positive finite number")
        threads = _threads()
        handler, files = COMMANDS[args.command]
        inputs = [_read_json(getattr(args, f)) for f in files]
        digest = hashlib.sha256()
        for _, raw in inputs:
            digest.update(hashlib.sha256(raw).digest())
        if args.command == "preset":
            digest.update(args.name.encode())
        start = time.perf_counter()
        results = handler(args, inputs)
        elapsed = (time.perf_counter() - start) * 1000 if args.timing else 0.0
        results["tolerances"] = _tolerances(args.tol)
        results["seed"] = args.seed
        results["threads"] = threads
        report = Report(args.command, digest.hexdigest(), results, elapsed)
        text = report.to_csv() if args.format == "csv" else report.to_json()
    except StarcorrError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
