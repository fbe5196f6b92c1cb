"""Project relationship graph: one node per project, correlation-weighted edges.

Correlations are computed in double precision (the rest of the pipeline is
exact). Kernels:

* ``logpearson`` (default) - Pearson on ``log(1 + value)``
* ``pearson`` - Pearson on raw values
* ``spearman`` - Pearson on average ranks within the overlap window

Alignment is by calendar day (``absolute``) or by days since launch
(``relative``). A pair is undefined and gets no edge when the overlap is
shorter than ``min_overlap`` or either aligned vector is constant.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np
from scipy.stats import rankdata

from . import _kernels
from .errors import DuplicateProject, InvariantViolation, UnsupportedFormat
from .lifecycle import LifecycleSummary
from .metrics import MetricSeries

KERNELS = ("logpearson", "pearson", "spearman")
ALIGNMENTS = ("absolute", "relative")
EXPORT_FORMATS = ("graphml", "edge_csv", "dot")
RHO_TOL = 1e-12


@dataclass(frozen=True)
class GogParams:
    kernel: str = "logpearson"
    tau: float = 0.5
    min_overlap: int = 30
    align: str = "absolute"
    metric: str = "edge_count"

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if self.align not in ALIGNMENTS:
            raise ValueError(f"align must be one of {ALIGNMENTS}")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.min_overlap < 3:
            raise ValueError("min_overlap must be >= 3")

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "tau": self.tau, "min_overlap": self.min_overlap,
                "align": self.align, "metric": self.metric}


@dataclass(frozen=True)
class ProjectNode:
    project_id: str
    lifecycle: LifecycleSummary | None
    series_digest: str


@dataclass(frozen=True, order=True)
class ProjectEdge:
    a: str
    b: str
    rho: float = field(compare=False)
    overlap_days: int = field(compare=False)


@dataclass(frozen=True)
class ProjectGraph:
    nodes: tuple[ProjectNode, ...]
    edges: tuple[ProjectEdge, ...]
    params: GogParams


def _transform(values: np.ndarray, kernel: str) -> np.ndarray:
    if values.dtype == object:
        try:
            x = np.array([float(v) for v in values], dtype=np.float64)
        except OverflowError:
            if kernel == "logpearson":
                return np.array([math.log(int(v) + 1) for v in values], dtype=np.float64)
            raise
    else:
        x = values.astype(np.float64)
    return np.log1p(x) if kernel == "logpearson" else x


def _check_rho(rho: float) -> float:
    if abs(rho) > 1 + RHO_TOL:
        raise InvariantViolation(f"|rho| = {abs(rho)!r} exceeds 1 + {RHO_TOL}")
    return min(1.0, max(-1.0, rho))


def _window(sa: MetricSeries, sb: MetricSeries, align: str) -> tuple[int, int, int]:
    if align == "absolute":
        lo = max(sa.start_day, sb.start_day)
        hi = min(sa.last_day, sb.last_day)
        return lo - sa.start_day, lo - sb.start_day, max(0, hi - lo + 1)
    return 0, 0, min(len(sa), len(sb))


def _pair_rho(xa: np.ndarray, xb: np.ndarray, kernel: str) -> float:
    if kernel == "spearman":
        if np.all(xa == xa[0]) or np.all(xb == xb[0]):
            return math.nan
        xa, xb = rankdata(xa), rankdata(xb)
    return float(_kernels.pearson(xa, xb))


def activity_correlation(sa: MetricSeries, sb: MetricSeries, min_overlap: int = 30,
                         kernel: str = "logpearson", align: str = "absolute"):
    """``(rho, overlap_days)`` for two series, or ``None`` when undefined."""
    if min_overlap < 3:
        raise ValueError("min_overlap must be >= 3")
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}")
    if (sb.project_id, sb.start_day) < (sa.project_id, sa.start_day):
        sa, sb = sb, sa
    ia, ib, ov = _window(sa, sb, align)
    if ov < min_overlap:
        return None
    xa = _transform(np.asarray(sa.values[ia:ia + ov]), kernel)
    xb = _transform(np.asarray(sb.values[ib:ib + ov]), kernel)
    rho = _pair_rho(xa, xb, kernel)
    if math.isnan(rho):
        return None
    return _check_rho(rho), ov


def pairwise_correlations(serieses: Sequence[MetricSeries], params: GogParams) -> list[ProjectEdge]:
    """Every defined pair, canonically ordered, before any ``tau`` cut."""
    ordered = sorted(serieses, key=lambda s: s.project_id)
    ids = [s.project_id for s in ordered]
    if len(set(ids)) != len(ids):
        dup = sorted({p for p in ids if ids.count(p) > 1})
        raise DuplicateProject(f"duplicate project ids: {dup}")
    if len(ordered) < 2:
        return []

    if params.kernel == "spearman":
        out = []
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                r = activity_correlation(ordered[i], ordered[j], params.min_overlap,
                                         params.kernel, params.align)
                if r is not None:
                    out.append(ProjectEdge(ids[i], ids[j], r[0], r[1]))
        return out

    flats = [_transform(np.asarray(s.values), params.kernel) for s in ordered]
    offsets = np.zeros(len(flats) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([f.size for f in flats])
    if params.align == "absolute":
        starts = np.array([s.start_day for s in ordered], dtype=np.int64)
    else:
        starts = np.zeros(len(ordered), dtype=np.int64)
    rho, overlap = _kernels.all_pairs_pearson(np.concatenate(flats), offsets, starts,
                                              params.min_overlap)
    out = []
    p = 0
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            r = rho[p]
            if not math.isnan(r):
                out.append(ProjectEdge(ids[i], ids[j], _check_rho(float(r)), int(overlap[p])))
            p += 1
    return out


def threshold_edges(edges: Sequence[ProjectEdge], tau: float) -> tuple[ProjectEdge, ...]:
    # RHO_TOL slack so tau = 1 still admits identical series (rounded rho of 1 - 2**-53)
    return tuple(e for e in edges if abs(e.rho) >= tau - RHO_TOL)


def build_project_graph(items, tau: float = 0.5, min_overlap: int = 30,
                        kernel: str = "logpearson", align: str = "absolute") -> ProjectGraph:
    """Graph of projects from ``(MetricSeries, LifecycleSummary | None)`` pairs.

    An edge joins two projects when their correlation is defined and
    ``|rho| >= tau`` (up to ``RHO_TOL`` of float rounding).
    """
    items = [(it, None) if isinstance(it, MetricSeries) else tuple(it) for it in items]
    serieses = [s for s, _ in items]
    metric = serieses[0].metric if serieses else "edge_count"
    params = GogParams(kernel, tau, min_overlap, align, metric)
    edges = threshold_edges(pairwise_correlations(serieses, params), tau)
    nodes = tuple(sorted(
        (ProjectNode(s.project_id, lc, s.digest()) for s, lc in items),
        key=lambda n: n.project_id,
    ))
    return ProjectGraph(nodes, edges, params)


# -- summary -----------------------------------------------------------------

@dataclass(frozen=True)
class GraphSummary:
    n_nodes: int
    n_edges: int
    degree_distribution: dict[int, int]
    n_components: int
    component_sizes: tuple[int, ...]
    mean_abs_rho: float | None
    n_positive: int
    n_negative: int

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "degree_distribution": {str(k): v for k, v in self.degree_distribution.items()},
            "n_components": self.n_components,
            "component_sizes": list(self.component_sizes),
            "mean_abs_rho": self.mean_abs_rho,
            "n_positive": self.n_positive,
            "n_negative": self.n_negative,
        }


def graph_summary(pg: ProjectGraph) -> GraphSummary:
    index = {n.project_id: i for i, n in enumerate(pg.nodes)}
    parent = list(range(len(index)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    degree = [0] * len(index)
    for e in pg.edges:
        i, j = index[e.a], index[e.b]
        degree[i] += 1
        degree[j] += 1
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    sizes: dict[int, int] = {}
    for i in range(len(index)):
        r = find(i)
        sizes[r] = sizes.get(r, 0) + 1
    dist: dict[int, int] = {}
    for d in degree:
        dist[d] = dist.get(d, 0) + 1
    rhos = [abs(e.rho) for e in pg.edges]
    return GraphSummary(
        n_nodes=len(index),
        n_edges=len(pg.edges),
        degree_distribution=dict(sorted(dist.items())),
        n_components=len(sizes),
        component_sizes=tuple(sorted(sizes.values(), reverse=True)),
        mean_abs_rho=math.fsum(rhos) / len(rhos) if rhos else None,
        n_positive=sum(1 for e in pg.edges if e.rho > 0),
        n_negative=sum(1 for e in pg.edges if e.rho < 0),
    )


# -- export ------------------------------------------------------------------

_NODE_KEYS = (
    ("t_peak", "int"), ("n_peak", "long"), ("t_diminishing", "int"),
    ("t_start_to_peak", "int"), ("t_peak_to_diminishing", "int"),
    ("category", "string"), ("launch_day", "int"), ("series_digest", "string"),
)
_GRAPH_KEYS = (("kernel", "string"), ("tau", "double"), ("min_overlap", "int"),
               ("align", "string"), ("metric", "string"))


def _node_attrs(n: ProjectNode) -> dict:
    d = n.lifecycle.to_dict() if n.lifecycle is not None else {}
    d["series_digest"] = n.series_digest
    return d


def _graphml(pg: ProjectGraph) -> str:
    big = any(n.lifecycle is not None and not -2**63 <= n.lifecycle.n_peak < 2**63 for n in pg.nodes)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns" '
        'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
        'xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns '
        'http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
    ]
    for name, typ in _GRAPH_KEYS:
        lines.append(f'  <key id="g_{name}" for="graph" attr.name="{name}" attr.type="{typ}"/>')
    for name, typ in _NODE_KEYS:
        if name == "n_peak" and big:
            typ = "string"
        lines.append(f'  <key id="n_{name}" for="node" attr.name="{name}" attr.type="{typ}"/>')
    lines.append('  <key id="e_rho" for="edge" attr.name="rho" attr.type="double"/>')
    lines.append('  <key id="e_overlap_days" for="edge" attr.name="overlap_days" attr.type="int"/>')
    lines.append('  <graph id="project_graph" edgedefault="undirected">')
    for name, value in pg.params.to_dict().items():
        lines.append(f'    <data key="g_{name}">{escape(str(value))}</data>')
    for n in pg.nodes:
        attrs = _node_attrs(n)
        lines.append(f"    <node id={quoteattr(n.project_id)}>")
        for name, _ in _NODE_KEYS:
            v = attrs.get(name)
            if v is not None:
                lines.append(f'      <data key="n_{name}">{escape(str(v))}</data>')
        lines.append("    </node>")
    for i, e in enumerate(pg.edges):
        lines.append(f'    <edge id="e{i}" source={quoteattr(e.a)} target={quoteattr(e.b)}>')
        lines.append(f'      <data key="e_rho">{e.rho!r}</data>')
        lines.append(f'      <data key="e_overlap_days">{e.overlap_days}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def _edge_csv(pg: ProjectGraph) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("a", "b", "rho", "overlap_days"))
    for e in pg.edges:
        w.writerow((e.a, e.b, repr(e.rho), e.overlap_days))
    return buf.getvalue()


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(pg: ProjectGraph) -> str:
    lines = ["graph project_graph {"]
    for n in pg.nodes:
        lc = n.lifecycle
        if lc is None:
            lines.append(f"  {_dot_id(n.project_id)};")
        else:
            cat = "" if lc.category is None else lc.category.value
            lines.append(f"  {_dot_id(n.project_id)} [t_peak={lc.t_peak}, category={_dot_id(cat)}];")
    for e in pg.edges:
        lines.append(f"  {_dot_id(e.a)} -- {_dot_id(e.b)} [rho={e.rho!r}, overlap_days={e.overlap_days}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_project_graph(pg: ProjectGraph, format: str = "graphml") -> bytes:
    if format == "graphml":
        return _graphml(pg).encode("utf-8")
    if format == "edge_csv":
        return _edge_csv(pg).encode("utf-8")
    if format == "dot":
        return _dot(pg).encode("utf-8")
    raise UnsupportedFormat(f"unsupported export format {format!r}; expected one of {EXPORT_FORMATS}")


def read_edge_csv(data: bytes) -> list[ProjectEdge]:
    rows = csv.DictReader(io.StringIO(data.decode("utf-8"), newline=""))
    return [ProjectEdge(r["a"], r["b"], float(r["rho"]), int(r["overlap_days"])) for r in rows]
