"""Command-line front end.

Exit status: 0 success, 1 unexpected error, 2 invalid input, 3 enumeration
budget exceeded. Logs go to stderr; stdout carries only requested reports
and the version banner.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Optional

from . import __version__
from . import bounds as bnd
from .core import SeededRng
from .experiment import ConfigError, Experiment, load_config
from .mechanisms import exponential_mechanism
from .oracle import BudgetError
from .reports import emit_report

log = logging.getLogger("hssbench")

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3

_PARTS = {
    "estimate": ("estimates",),
    "stability": ("stability",),
    "validate": ("bound", "coverage"),
    "run": ("estimates", "stability", "multiplicity", "bound", "coverage"),
}


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def write_outputs(groups: dict, out_dir, formats) -> list[Path]:
    """Write one file per (category, format) atomically; nothing is left behind on failure."""
    target = Path(out_dir)
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".hssbench-", dir=target.parent))
    try:
        names = []
        for cat in sorted(groups):
            for fmt in formats:
                name = f"{cat}.{fmt}"
                emit_report(groups[cat], fmt, staging / name)
                names.append(name)
        target.mkdir(parents=True, exist_ok=True)
        written = []
        for name in names:
            os.replace(staging / name, target / name)
            written.append(target / name)
        return written
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def run_experiment(config_path, out_dir=None, threads: Optional[int] = None, formats=None,
                   parts=_PARTS["run"], seed: Optional[int] = None) -> int:
    """Validate a config, compute its reports and write them; returns the exit status."""
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg["seed"] = seed
        outputs = cfg.get("outputs", {})
        out_dir = out_dir or outputs.get("dir") or "hssbench-out"
        formats = formats or outputs.get("formats") or ["json", "csv"]
        groups = Experiment(cfg, threads=threads).run(parts)
        write_outputs(groups, out_dir, formats)
        return EXIT_OK
    except BudgetError as exc:
        log.error("budget exceeded: %s", exc)
        return EXIT_BUDGET
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


def _bound_report(kind: str, data: dict):
    if kind == "pacbayes":
        expected = {"Q", "P", "empirical_gibbs_risk", "m", "delta"}
        if set(data) != expected:
            raise ConfigError(f"pacbayes inputs need exactly {sorted(expected)}")
        value = bnd.pac_bayes_bound(**data)
        return {"type": "PACBayesBound", "value": value, "kl": bnd.kl_divergence(data["Q"], data["P"]),
                "m": data["m"], "delta": data["delta"]}
    if kind == "fv":
        expected = {"gamma_fv", "m", "delta"}
        if set(data) != expected:
            raise ConfigError(f"fv inputs need exactly {sorted(expected)}")
        return {"type": "FVBound", "value": bnd.fv_bound(**data), **data}
    inputs = bnd.BoundInputs.from_dict(data)
    if kind == "theorem1":
        return {"type": "Theorem1Bound", "value": bnd.theorem1_bound(inputs), "inputs": inputs.to_dict()}
    return bnd.theorem2_bound(inputs)


def _emit(reports, args) -> None:
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(args.out).with_name(Path(args.out).name + ".tmp")
        try:
            emit_report(reports, args.format, tmp)
            os.replace(tmp, args.out)
        finally:
            tmp.unlink(missing_ok=True)
    else:
        sys.stdout.write(emit_report(reports, args.format))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: HSS_BENCH_THREADS or 1)")
    common.add_argument("--out", default=None, help="output directory (config commands) or file")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")

    parser = argparse.ArgumentParser(prog="hssbench", description="Hypothesis-set stability benchmarks.")
    parser.add_argument("--version", action="store_true", help="print the version banner and exit")
    sub = parser.add_subparsers(dest="command")
    for name, text in (("estimate", "complexity estimators of a config"),
                       ("stability", "stability estimators of a config"),
                       ("validate", "bound and coverage harness of a config"),
                       ("run", "full experiment")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("config", help="experiment config (JSON)")
    p = sub.add_parser("bound", parents=[common], help="evaluate a bound formula")
    p.add_argument("kind", choices=("theorem1", "theorem2", "fv", "pacbayes"))
    p.add_argument("--inputs", required=True, help="JSON file of bound inputs")
    p = sub.add_parser("mech", parents=[common], help="run a mechanism")
    p.add_argument("kind", choices=("expmech",))
    p.add_argument("--scores", required=True, help="JSON list of scores (or {\"scores\": [...]})")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True, help="score sensitivity")
    p.add_argument("--zero-arm", action="store_true", help="append an arm with score 0")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(f"hssbench {__version__}")
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        if args.command in _PARTS:
            formats = [args.format] if args.format else None
            return run_experiment(args.config, args.out, args.threads, formats, _PARTS[args.command], args.seed)
        args.format = args.format or "json"
        if args.command == "bound":
            _emit([_bound_report(args.kind, _read_json(args.inputs))], args)
        else:
            raw = _read_json(args.scores)
            scores = raw["scores"] if isinstance(raw, dict) else raw
            out = exponential_mechanism(scores, args.eps, args.delta, args.zero_arm,
                                        SeededRng(0 if args.seed is None else args.seed))
            _emit([out], args)
        return EXIT_OK
    except BudgetError as exc:
        log.error("budget exceeded: %s", exc)
        return EXIT_BUDGET
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
