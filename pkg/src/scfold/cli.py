"""Command line entry point: reproducible scenario runs and the catalog."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, ScfoldError
from .scenarios import catalog, load_config, run_scenario


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scfold",
        description="run named desk-scale demo pipelines with reproducible artifacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute a named scenario")
    runp.add_argument("name", help="scenario name; see 'scfold list'")
    runp.add_argument("--config", type=Path, default=None,
                      help="JSON config path (schema scenario-config/1)")
    runp.add_argument("--out", type=Path, default=Path("scfold-out"),
                      help="output directory for artifacts")
    runp.add_argument("--seed", type=int, default=None,
                      help="seed override; wins over the config")
    runp.add_argument("--quiet", action="store_true",
                      help="suppress per-check lines")

    sub.add_parser("list", help="print the scenario catalog")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(catalog())
        return 0
    try:
        text = None
        if args.config is not None:
            text = args.config.read_text(encoding="utf-8")
        params, seed = load_config(args.name, text, args.seed)
        result = run_scenario(args.name, params, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScfoldError as exc:
        print(f"scenario {args.name} failed in module context: {exc}",
              file=sys.stderr)
        return 3
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    for fname, content in sorted(result.artifacts.items()):
        (out_dir / fname).write_text(content, encoding="utf-8")
    (out_dir / f"{result.name}_summary.json").write_text(
        result.summary_json(), encoding="utf-8")
    if not args.quiet:
        for check in result.checks:
            status = "pass" if check.passed else "FAIL"
            print(f"[{status}] {check.name}: value={check.value} "
                  f"tolerance={check.tolerance}")
        print(f"artifacts written to {out_dir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
