"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 fit validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .errors import ConfigError

log = logging.getLogger("fafc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--variant", choices=["r44", "r45", "both"], type=str.lower)
    p.add_argument("--termination", choices=["strict", "continue"])
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fafc", description="Multi-receiver beam charging FAFC simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="one run; per-slot trace CSV")
    _common(sim)
    sim.add_argument("--receivers", type=int, dest="n_receivers")
    sim.add_argument("--power", type=float, dest="transmit_power", help="transmitting power (W)")
    sim.add_argument("--hours", type=float, dest="charge_hours")

    sw = sub.add_parser("sweep", help="time or power sweep; aggregate CSV")
    _common(sw)
    sw.add_argument("--kind", choices=["time", "power"], required=True)
    sw.add_argument("--jobs", type=int)
    sw.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script next to the CSV")

    vf = sub.add_parser("validate-fit", help="score the R44/R45 fits against the synthesized profile")
    _common(vf)

    pr = sub.add_parser("profile", help="CC-CV profile CSV")
    _common(pr)
    return parser


def _options(args) -> dict:
    opts = harness.load_config(args.config) if args.config else {}
    for key in ("seed", "trials", "termination", "n_receivers", "transmit_power", "charge_hours", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    if args.variant:
        opts["variants"] = ("R44", "R45") if args.variant == "both" else (args.variant.upper(),)
    elif "variant" in opts:
        v = opts["variant"].lower()
        opts["variants"] = ("R44", "R45") if v == "both" else (v.upper(),)
    return opts


def _emit_lines(lines, out: Path | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_simulate(args, opts) -> int:
    from .scheduler import run_simulation

    variants = opts.pop("variants", None)
    if variants:
        if len(variants) != 1:
            raise ConfigError("simulate takes a single variant")
        opts["variant"] = variants[0]
    config = harness.scheduler_config_from(opts)
    trace = run_simulation(config, seed=opts.get("seed", 1))
    out = args.out or Path("trace.csv")
    harness.write_trace_csv(trace, out)
    log.info("%d slots, %s -> %s", trace.n_slots, trace.termination.value, out)
    return EXIT_OK


def cmd_sweep(args, opts) -> int:
    cfg = harness.sweep_config_from(args.kind, opts)
    results = harness.time_sweep(cfg) if args.kind == "time" else harness.power_sweep(cfg)
    out = args.out or Path(f"{args.kind}_sweep.csv")
    harness.emit_csv(results, out, args.kind)
    if args.gnuplot:
        harness.write_gnuplot(results, out, args.kind)
    log.info("%d rows -> %s", len(results), out)
    return EXIT_OK


def cmd_validate_fit(args, opts) -> int:
    report = harness.validate_fits()
    _emit_lines(report.lines(), args.out)
    return EXIT_VALIDATION if report.status == "fail" else EXIT_OK


def cmd_profile(args, opts) -> int:
    harness.write_profile_csv(args.out or Path("profile.csv"))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "validate-fit": cmd_validate_fit,
            "profile": cmd_profile}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        opts = _options(args)
        return COMMANDS[args.command](args, opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
