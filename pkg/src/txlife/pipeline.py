"""Resumable batch stages. Each stage reads the previous stage's files from the
output directory and writes its own, plus a ``manifest.json`` with digests.

Layout under ``out``::

    ingest/     records.ndjson, parse_report.json, validation.json
    graphs/     index.json, <project>/{days/*.csv, stats.csv, manifest.json}
    metrics/    index.json, concentration.json, <project>/<metric>.csv
    lifecycle/  lifecycle.json
    gog/        project_graph.{graphml,csv,dot}, summary.json
    report/     report.json, projects.csv, scatter.csv[, scatter.svg]

Nothing written depends on the output path or on ``jobs``, so re-runs with
the same inputs are byte-identical.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from urllib.parse import quote

from . import ingest as _ingest
from .artifacts import Manifest, iso_date, read_json, require, sha256_hex
from .errors import AllZeroSeries, DataError, MalformedLine, ZeroVolume
from .graph_of_graphs import (
    build_project_graph, export_project_graph, graph_summary,
)
from .lifecycle import (
    LifecycleSummary, as_fraction, classify_all, cohort_stats, median_thresholds, summarize,
)
from .metrics import METRIC_ALIASES, METRICS, MetricSeries, series_for, top_k_concentration
from .report import scatter_svg
from .temporal_graph import (
    build_temporal_graph, export_temporal_graph, load_temporal_graph, whole_graph,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"


class UsageError(ValueError):
    """Bad flags or config; maps to exit code 1."""


@dataclass
class RunConfig:
    input: list[str] = field(default_factory=list)
    format: str | None = None
    out: str = "txlife_out"
    project: list[str] = field(default_factory=list)
    min_sales: int = 10000
    metric: str = "edges"
    diminish_frac: str = "0.01"
    peak_tie: str = "earliest"
    classify_thresholds: str = "median"
    peak_within: list[int] = field(default_factory=lambda: [2])
    gog_kernel: str = "logpearson"
    gog_tau: float = 0.5
    gog_min_overlap: int = 30
    gog_align: str = "absolute"
    concentration_k: int = 100
    outflow: bool = False
    cumulative_nodes: bool = False
    jobs: int = 1
    seed: int = 0
    strict: bool = False
    drop_zero_value: bool = False
    report: str | None = None
    svg: bool = False

    def __post_init__(self):
        if self.min_sales < 0:
            raise UsageError("--min-sales must be >= 0")
        if self.metric not in METRIC_ALIASES:
            raise UsageError(f"--metric must be one of {sorted(METRIC_ALIASES)}")
        try:
            self.frac = as_fraction(Fraction(str(self.diminish_frac)))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"--diminish-frac: {exc}") from None
        if self.peak_tie != "earliest":
            raise UsageError("--peak-tie supports only 'earliest'")
        self.thresholds = self._parse_thresholds(self.classify_thresholds)
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if self.concentration_k < 1:
            raise UsageError("--concentration-k must be >= 1")
        if self.format is not None and self.format not in _ingest.FORMATS:
            raise UsageError(f"--format must be one of {_ingest.FORMATS}")

    @staticmethod
    def _parse_thresholds(spec: str):
        if spec == "median":
            return None
        try:
            p, d = (Fraction(x.strip()) for x in spec.split(","))
        except ValueError:
            raise UsageError("--classify-thresholds must be 'median' or '<peak>,<decay>'") from None
        if p <= 0 or d <= 0:
            raise UsageError("classify thresholds must be > 0")
        return p, d

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise UsageError(str(exc)) from None

    @property
    def series_metric(self) -> str:
        return METRIC_ALIASES[self.metric]

    def public(self) -> dict:
        """Settings that affect results (paths and job count excluded)."""
        d = asdict(self)
        for k in ("input", "out", "jobs", "report", "format"):
            d.pop(k)
        return d

    @property
    def root(self) -> Path:
        return Path(self.out)


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def project_dir(pid: str) -> str:
    return quote(pid, safe="")


# -- ingest -------------------------------------------------------------------

def _guess_format(path: str, fmt: str | None) -> str:
    if fmt:
        return fmt
    return "csv" if path.lower().endswith(".csv") else "ndjson"


def run_ingest(cfg: RunConfig) -> dict:
    if not cfg.input:
        raise UsageError("ingest needs at least one --input file")
    batches, reports = [], []
    for path in cfg.input:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"input file not found: {path}")
        fmt = _guess_format(path, cfg.format)
        try:
            b = _ingest.parse_records(p.read_bytes(), fmt, strict=cfg.strict,
                                      drop_zero_value=cfg.drop_zero_value)
        except MalformedLine as exc:
            report = {"input": p.name, "fatal": {"line": exc.line_no, "reason": exc.reason}}
            _emit_parse_report(cfg, [report])
            raise
        batches.append(b)
        reports.append({"input": p.name, **b.report.to_dict()})
    batch = _ingest.merge_batches(batches)
    if cfg.project:
        keep = set(cfg.project)
        batch = _ingest.RecordBatch(tuple(r for r in batch.records if r.project_id in keep),
                                    batch.source_digest)
    validation = _ingest.validate_batch(batch)
    _emit_parse_report(cfg, reports)

    m = Manifest(cfg.root / "ingest", stage="ingest", source_digest=batch.source_digest,
                 n_records=len(batch), projects=batch.project_ids)
    m.write("records.ndjson", _ingest.to_ndjson(batch.records))
    m.write_json("parse_report.json", reports)
    m.write_json("validation.json", validation.to_dict())
    return m.close()


def _emit_parse_report(cfg: RunConfig, reports) -> None:
    text = json.dumps(reports, indent=2)
    if cfg.report:
        Path(cfg.report).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.report).write_text(text + "\n", encoding="utf-8")
    else:
        import sys

        print(json.dumps(reports, separators=(",", ":")), file=sys.stderr)


def _load_canonical(cfg: RunConfig) -> _ingest.RecordBatch:
    path = require(cfg.root / "ingest" / "records.ndjson", "ingest")
    return _ingest.parse_records(path.read_bytes(), "ndjson", strict=True)


# -- build --------------------------------------------------------------------

def _build_one(job):
    pid, batch, out_dir = job
    tg = build_temporal_graph(batch, pid)
    man = export_temporal_graph(tg, Path(out_dir))
    return sha256_hex(json.dumps(man, sort_keys=True).encode())


def run_build(cfg: RunConfig) -> dict:
    batch = _load_canonical(cfg)
    groups = _ingest.group_by_project(batch)
    included = {p: b for p, b in groups.items() if len(b) >= cfg.min_sales}
    excluded = {p: len(b) for p, b in groups.items() if len(b) < cfg.min_sales}
    root = cfg.root / "graphs"
    jobs = [(p, b, str(root / project_dir(p))) for p, b in included.items()]
    digests = _map(_build_one, jobs, cfg.jobs)
    index = {
        "min_sales": cfg.min_sales,
        "sales_definition": "transfer record count",
        "included": [{"project_id": p, "n_records": len(b), "dir": project_dir(p),
                      "manifest_digest": d} for (p, b), d in zip(included.items(), digests)],
        "excluded": [{"project_id": p, "n_records": n} for p, n in excluded.items()],
    }
    m = Manifest(root, stage="build", source_digest=batch.source_digest)
    m.write_json("index.json", index)
    log.info("built %d graphs (%d below min_sales)", len(included), len(excluded))
    return m.close()


def _graph_index(cfg: RunConfig) -> dict:
    return read_json(cfg.root / "graphs" / "index.json", "build")


# -- metrics -------------------------------------------------------------------

def _metrics_one(job):
    gdir, mdir, k, direction, cumulative = job
    tg = load_temporal_graph(Path(gdir))
    files = {}
    for metric in METRICS:
        s = series_for(tg, metric, cumulative)
        data = s.to_csv()
        Path(mdir).mkdir(parents=True, exist_ok=True)
        (Path(mdir) / f"{metric}.csv").write_bytes(data)
        files[metric] = sha256_hex(data)
    try:
        conc = top_k_concentration(whole_graph(tg), k, direction).to_dict()
    except ZeroVolume:
        conc = None
    return tg.project_id, tg.launch_day, tg.last_day, files, conc


def run_metrics(cfg: RunConfig) -> dict:
    index = _graph_index(cfg)
    root = cfg.root / "metrics"
    direction = "outflow" if cfg.outflow else "inflow"
    jobs = [(str(cfg.root / "graphs" / e["dir"]), str(root / e["dir"]), cfg.concentration_k,
             direction, cfg.cumulative_nodes) for e in index["included"]]
    results = _map(_metrics_one, jobs, cfg.jobs)
    m = Manifest(root, stage="metrics", node_count_variant="cumulative" if cfg.cumulative_nodes else "daily")
    entries, conc = [], {}
    for (pid, launch, last, files, c), e in zip(results, index["included"]):
        for metric, digest in files.items():
            m.files.append({"path": f"{e['dir']}/{metric}.csv", "sha256": digest})
        entries.append({"project_id": pid, "dir": e["dir"], "start_day": launch,
                        "start_date": iso_date(launch), "last_day": last,
                        "last_date": iso_date(last), "n_records": e["n_records"]})
        conc[pid] = c
    m.write_json("index.json", {"projects": entries,
                                "node_count_variant": m.meta["node_count_variant"]})
    m.write_json("concentration.json", {"k": cfg.concentration_k, "direction": direction,
                                        "projects": conc})
    return m.close()


def load_series(cfg: RunConfig, metric: str | None = None) -> list[MetricSeries]:
    metric = metric or cfg.series_metric
    index = read_json(cfg.root / "metrics" / "index.json", "metrics")
    variant = index.get("node_count_variant", "daily") if metric == "node_count" else "daily"
    out = []
    for e in index["projects"]:
        path = require(cfg.root / "metrics" / e["dir"] / f"{metric}.csv", "metrics")
        out.append(MetricSeries.from_csv(path.read_bytes(), e["project_id"], metric, variant))
    return out


# -- lifecycle -------------------------------------------------------------------

def _rat(x):
    return None if x is None else {"exact": str(x), "value": float(x)}


def run_lifecycle(cfg: RunConfig) -> dict:
    serieses = load_series(cfg)
    summaries, skipped = [], []
    for s in serieses:
        try:
            summaries.append(summarize(s, frac=cfg.frac))
        except AllZeroSeries:
            skipped.append({"project_id": s.project_id, "reason": "all-zero series"})
    if cfg.thresholds is None:
        thresholds, source = median_thresholds(summaries), "median"
    else:
        thresholds, source = cfg.thresholds, "explicit"
    if thresholds is not None:
        summaries = classify_all(summaries, thresholds)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "metric": cfg.series_metric,
        "diminish_frac": str(cfg.frac),
        "peak_tie": cfg.peak_tie,
        "thresholds": {
            "source": source,
            "peak_threshold": _rat(thresholds[0]) if thresholds else None,
            "decay_threshold": _rat(thresholds[1]) if thresholds else None,
        },
        "summaries": [s.to_dict() for s in summaries],
        "cohort": cohort_stats(summaries, cfg.peak_within).to_dict() if summaries else None,
        "skipped": skipped,
    }
    m = Manifest(cfg.root / "lifecycle", stage="lifecycle")
    m.write_json("lifecycle.json", doc)
    return m.close()


def _load_lifecycle(cfg: RunConfig) -> dict:
    return read_json(cfg.root / "lifecycle" / "lifecycle.json", "lifecycle")


# -- graph of graphs ---------------------------------------------------------------

def run_gog(cfg: RunConfig) -> dict:
    serieses = load_series(cfg)
    lc = {d["project_id"]: LifecycleSummary.from_dict(d) for d in _load_lifecycle(cfg)["summaries"]}
    try:
        pg = build_project_graph([(s, lc.get(s.project_id)) for s in serieses], cfg.gog_tau,
                                 cfg.gog_min_overlap, cfg.gog_kernel, cfg.gog_align)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    m = Manifest(cfg.root / "gog", stage="gog", params=pg.params.to_dict(),
                 input_digests={s.project_id: s.digest() for s in serieses})
    m.write("project_graph.graphml", export_project_graph(pg, "graphml"))
    m.write("project_graph.csv", export_project_graph(pg, "edge_csv"))
    m.write("project_graph.dot", export_project_graph(pg, "dot"))
    m.write_json("summary.json", {"params": pg.params.to_dict(), **graph_summary(pg).to_dict()})
    return m.close()


# -- report ----------------------------------------------------------------------

def run_report(cfg: RunConfig) -> dict:
    lc = _load_lifecycle(cfg)
    index = read_json(cfg.root / "metrics" / "index.json", "metrics")
    meta = {e["project_id"]: e for e in index["projects"]}
    gog_path = cfg.root / "gog" / "summary.json"
    gog = json.loads(gog_path.read_text(encoding="utf-8")) if gog_path.exists() else None
    conc_path = cfg.root / "metrics" / "concentration.json"
    conc = json.loads(conc_path.read_text(encoding="utf-8")) if conc_path.exists() else None
    validation = read_json(cfg.root / "ingest" / "validation.json", "ingest")
    graphs = _graph_index(cfg)

    summaries = lc["summaries"]
    rows, scatter = [], []
    for s in summaries:
        e = meta[s["project_id"]]
        share = (conc or {}).get("projects", {}).get(s["project_id"])
        rows.append((s["project_id"], e["n_records"], e["start_day"], e["start_date"], e["last_day"],
                     e["last_date"], s["t_peak"], iso_date(e["start_day"] + s["t_peak"]),
                     s["n_peak"], _blank(s["t_diminishing"]),
                     _blank(None if s["t_diminishing"] is None else iso_date(e["start_day"] + s["t_diminishing"])),
                     _blank(s["t_peak_to_diminishing"]), _blank(s["category"]),
                     "" if share is None else share["share"]))
        scatter.append((s["project_id"], s["t_start_to_peak"], _blank(s["t_peak_to_diminishing"]),
                        _blank(s["category"])))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.public(),
        "n_projects_considered": len(graphs["included"]) + len(graphs["excluded"]),
        "included_projects": [e["project_id"] for e in graphs["included"]],
        "excluded_projects": graphs["excluded"],
        "validation": validation,
        "metric": lc["metric"],
        "diminish_frac": lc["diminish_frac"],
        "thresholds": lc["thresholds"],
        "cohort": lc["cohort"],
        "summaries": summaries,
        "skipped": lc["skipped"],
        "concentration": conc,
        "project_graph": gog,
    }
    m = Manifest(cfg.root / "report", stage="report")
    m.write_json("report.json", doc)
    m.write_csv("projects.csv", (
        "project_id", "n_records", "launch_day", "launch_date", "last_day", "last_date",
        "t_peak", "peak_date", "n_peak", "t_diminishing", "diminishing_date",
        "t_peak_to_diminishing", "category", f"top{cfg.concentration_k}_share"), rows)
    m.write_csv("scatter.csv", ("project_id", "t_start_to_peak", "t_peak_to_diminishing", "category"),
                scatter)
    if cfg.svg:
        m.write("scatter.svg", scatter_svg(summaries, lc["thresholds"]))
    return m.close()


def _blank(v):
    return "" if v is None else v


STAGES = {
    "ingest": run_ingest,
    "build": run_build,
    "metrics": run_metrics,
    "lifecycle": run_lifecycle,
    "gog": run_gog,
    "report": run_report,
}


def run_all(cfg: RunConfig) -> None:
    for fn in STAGES.values():
        fn(cfg)


__all__ = ["RunConfig", "UsageError", "STAGES", "run_all", "DataError"] + [f.__name__ for f in STAGES.values()]
