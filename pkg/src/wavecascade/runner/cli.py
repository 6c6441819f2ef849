"""Command-line interface: ``run`` scans, ``oracle`` validation, ``presets`` listing.

Exit codes: 0 success, 1 runtime or I/O failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from ..errors import ConfigError
from .config import SCAN_VARIABLES, load_config, preset_names, preset_text
from .output import write_output

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scan_override(text: str):
    """``VAR`` or ``VAR:LO:HI``."""
    parts = text.split(":")
    if parts[0] not in SCAN_VARIABLES or len(parts) not in (1, 3):
        raise argparse.ArgumentTypeError(f"expected VAR or VAR:LO:HI with VAR in {', '.join(SCAN_VARIABLES)}")
    if len(parts) == 1:
        return parts[0], None, None
    from .config import _number

    try:
        return parts[0], _number(parts[1]), _number(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavecascade", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="evaluate a scan and write CSV/JSON")
    run.add_argument("--config", required=True, help="scenario file or presets/<name>")
    run.add_argument("--scan", type=_scan_override, help="override scan variable: VAR or VAR:LO:HI")
    run.add_argument("--points", type=_positive, help="override the number of scan points")
    run.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    run.add_argument("--json-out", help="JSON metadata sidecar path")
    run.add_argument("--threads", type=_positive, default=1, help="worker threads over scan points")

    orc = sub.add_parser("oracle", help="compare the truncated-basis propagator with the factorized cascade")
    orc.add_argument("--config", help="take rho from this scenario's first scan point (default: pure 4d m=0)")
    orc.add_argument("--order", type=_positive, default=6)
    orc.add_argument("--t-final", type=float, default=5.0, help="propagation time (fs)")
    orc.add_argument("--coupling", type=float, default=1e-4, help="coupling scale (eV)")
    orc.add_argument("--tolerance", type=float, default=1e-3)
    orc.add_argument("--out", help="CSV of resonant mode pairs")
    orc.add_argument("--json-out", help="JSON summary path")

    sub.add_parser("presets", help="list built-in scenario presets")
    return p


def _cmd_run(args) -> int:
    from .scan import run_scan, scenario_with_scan

    scenario = load_config(args.config)
    if args.scan or args.points:
        var, lo, hi = args.scan or (None, None, None)
        scenario = scenario_with_scan(scenario, var, lo, hi, args.points)
    t0 = time.perf_counter()
    result = run_scan(scenario, threads=args.threads)
    if args.out == "-":
        from .output import csv_text

        sys.stdout.write(csv_text(result))
        if args.json_out:
            write_output(result, "/dev/null", args.json_out)
    else:
        write_output(result, args.out, args.json_out)
        print(f"{scenario.name}: {len(result.rows)} rows in {time.perf_counter() - t0:.2f} s -> {args.out}",
              file=sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from ..cascade import DEFAULT_CASCADE, coincidence_probability
    from ..oracle import cascade_system, extract_coincidence, propagate

    if args.config:
        from .scan import ScanPipeline

        scenario = load_config(args.config)
        scan = scenario.scan()
        rho = ScanPipeline(scenario).density_matrix(scan.variable, float(scan.values()[0]))
        rho = rho / np.trace(rho).real
    else:
        rho = np.zeros((5, 5), dtype=complex)
        rho[2, 2] = 1.0
    t0 = time.perf_counter()
    system = cascade_system(rho, coupling_scale=args.coupling)
    hist = propagate(system, args.order, args.t_final)
    c = DEFAULT_CASCADE
    upper = [m for m in system.modes if m.energy == c.energy1]
    lower = [m for m in system.modes if m.energy == c.energy2]
    pairs = [(a, b) for a in upper for b in lower]
    ora = np.array([extract_coincidence(hist, a, b) for a, b in pairs])
    fac = np.array([coincidence_probability(rho, a, b) for a, b in pairs])
    ora_n, fac_n = ora / ora.max(), fac / fac.max()
    dev = float(np.abs(ora_n - fac_n).max())
    ok = dev < args.tolerance
    summary = {
        "basis_size": system.size,
        "order": args.order,
        "t_final_fs": args.t_final,
        "steps": len(hist.times) - 1,
        "coupling_ev": args.coupling,
        "mode_pairs": len(pairs),
        "max_deviation": dev,
        "tolerance": args.tolerance,
        "pass": ok,
        "seconds": round(time.perf_counter() - t0, 3),
    }
    if args.out:
        lines = ["mode1,mode2,oracle,factorized"]
        for (a, b), x, y in zip(pairs, ora_n, fac_n):
            lines.append(f"{system.mode_index(a)},{system.mode_index(b)},{x:.17g},{y:.17g}")
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    print(f"oracle: basis {system.size}, order {args.order}, max deviation {dev:.3e} "
          f"({'pass' if ok else 'FAIL'} at {args.tolerance:g})")
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_presets(args) -> int:
    for name in preset_names():
        first = preset_text(name).splitlines()[0].lstrip("# ").strip()
        print(f"{name:8s} {first}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "oracle": _cmd_oracle, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
