"""``txlife`` command line.

Exit codes: 0 success, 1 usage/config error (including running a stage
before its inputs exist), 2 data error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .artifacts import Manifest
from .errors import DataError, InvariantViolation, MissingArtifact, TxlifeError
from .ingest import to_ndjson
from .pipeline import STAGES, RunConfig, UsageError, run_all

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("pipeline options")
    g.add_argument("--config", help="JSON file of option values; flags override it")
    g.add_argument("--input", action="append", help="input export (repeatable)")
    g.add_argument("--format", choices=("ndjson", "csv"))
    g.add_argument("--out", help="output directory (default txlife_out)")
    g.add_argument("--project", action="append", help="restrict to a project id (repeatable)")
    g.add_argument("--min-sales", type=int, help="cohort floor on transfer count (default 10000)")
    g.add_argument("--metric", choices=("edges", "nodes", "volume"), help="life-cycle series (default edges)")
    g.add_argument("--diminish-frac", help="diminishing threshold as fraction of peak (default 0.01)")
    g.add_argument("--peak-tie", choices=("earliest",))
    g.add_argument("--classify-thresholds", help="'median' or '<peak_days>,<decay_days>'")
    g.add_argument("--peak-within", type=int, nargs="+", help="day thresholds for peak fractions (default 2)")
    g.add_argument("--gog-kernel", choices=("logpearson", "pearson", "spearman"))
    g.add_argument("--gog-tau", type=float)
    g.add_argument("--gog-min-overlap", type=int)
    g.add_argument("--gog-align", choices=("absolute", "relative"))
    g.add_argument("--concentration-k", type=int, help="top-k for concentration (default 100)")
    g.add_argument("--outflow", action="store_true", help="concentration by sent volume")
    g.add_argument("--cumulative-nodes", action="store_true", help="node_count as cumulative uniques")
    g.add_argument("--jobs", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--strict", action="store_true", help="malformed input lines are fatal")
    g.add_argument("--drop-zero-value", action="store_true")
    g.add_argument("--report", help="write the parse report here instead of stderr")
    g.add_argument("--svg", action="store_true", help="also write report/scatter.svg")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="txlife", description="Temporal transaction-graph life-cycle analytics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "ingest": "parse, validate and canonicalise input exports",
        "build": "build daily multigraph snapshots per project",
        "metrics": "dense per-day edge/node/volume series and concentration",
        "lifecycle": "peak / diminishing landmarks and cohort statistics",
        "gog": "project correlation graph",
        "report": "assemble report JSON, CSVs and scatter data",
        "run": "all stages in order",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    s = sub.add_parser("synth", parents=[common], help="write a synthetic cohort with ground truth")
    s.add_argument("--n-projects", type=int, default=10)
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        try:
            values = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        values = {k.replace("-", "_"): v for k, v in values.items()}
    skip = {"command", "config", "verbose", "n_projects"}
    values.update({k: v for k, v in vars(ns).items() if k not in skip})
    return RunConfig.from_mapping(values)


def _synth(cfg: RunConfig, n_projects: int) -> None:
    from .testkit import cohort_batch, synth_cohort

    cohort = synth_cohort(n_projects, seed=cfg.seed)
    m = Manifest(cfg.root, stage="synth", seed=cfg.seed, generator="numpy PCG64")
    m.write("synth.ndjson", to_ndjson(cohort_batch(cohort).records))
    for p in cohort:
        m.write_json(f"truth/{p.params.project_id}.json", p.sidecar())
    m.close()


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(ns)
        if ns.command == "run":
            run_all(cfg)
        elif ns.command == "synth":
            _synth(cfg, ns.n_projects)
        else:
            STAGES[ns.command](cfg)
    except (UsageError, MissingArtifact) as exc:
        print(f"txlife: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"txlife: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DataError, TxlifeError) as exc:
        print(f"txlife: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
