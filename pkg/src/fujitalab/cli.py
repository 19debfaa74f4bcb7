"""Command-line entry point.

Exit codes: 0 success, 2 schema or hypothesis failure, 3 numeric error.
Reports go to files under ``--out``; stdout carries only their paths
(``verify`` prints its check table instead).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .barriers import Barrier
from .config import load_scenario
from .errors import ConfigurationError, NumericError, ParameterError, SchemaError, UsageError
from .scenario import evaluate, run_scenario, sweep, write_json
from .verification import SUITES, run_suite

EXIT_OK, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 2, 3
log = logging.getLogger("fujitalab")


def _out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_simulate(args) -> int:
    print(run_scenario(args.config, _out(args)))
    return EXIT_OK


def cmd_threshold(args) -> int:
    ev = evaluate(load_scenario(args.config), run_solver=False)
    if ev.verdict is None:
        raise ParameterError("threshold needs a normalizable phi or eta barrier", "weight barrier present")
    path = os.path.join(_out(args), "threshold.json")
    write_json(ev.verdict.to_dict(), path)
    print(path)
    return EXIT_OK


def cmd_barrier_check(args) -> int:
    ev = evaluate(load_scenario(args.config), enforce=False, run_solver=False)
    certs = {k: b.certificate.to_dict() for k, b in ev.barriers.items()}
    path = os.path.join(_out(args), "certificates.json")
    write_json({"certificates": certs, "errors": ev.barrier_errors}, path)
    print(path)
    ok = all(b.certificate.passed for b in ev.barriers.values()) and not ev.barrier_errors
    return EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_sweep(args) -> int:
    print(sweep(args.config, _out(args)))
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    bad = sum(not c.passed for c in checks)
    print(f"{len(checks) - bad}/{len(checks)} checks passed in {time.perf_counter() - t0:.2f} s")
    return EXIT_OK if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fujitalab", description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="fujitalab_out", help="artifact directory (default: %(default)s)")
    ap.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, hlp in (("simulate", cmd_simulate, "run a scenario and write its report"),
                          ("threshold", cmd_threshold, "evaluate the Kaplan mass test"),
                          ("barrier-check", cmd_barrier_check, "build and certify the scenario's barriers"),
                          ("sweep", cmd_sweep, "run a (p, amplitude) phase sweep")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("config", help="scenario JSON file")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("verify", help="run a self-check suite")
    sp.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SchemaError, ConfigurationError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_HYPOTHESIS
    except ParameterError as exc:
        detail = json.dumps(exc.values, sort_keys=True, default=str)
        log.error("hypothesis failure [%s]: %s %s", exc.constraint, exc, detail)
        return EXIT_HYPOTHESIS
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_HYPOTHESIS
    except (NumericError, ArithmeticError) as exc:
        log.error("numeric error: %s", exc)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
