"""Deliberately naive reference implementations.

Nothing here imports the production modules' algorithms; each oracle is the
most direct code that answers the question, so agreement with the main path
means something.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from fractions import Fraction

import jsonschema

from ..errors import AllZeroSeries, ConstantInput

RECORD_SCHEMA = {
    "type": "object",
    "required": ["tx_id", "timestamp", "from_addr", "to_addr", "value", "project_id"],
    "properties": {
        "tx_id": {"type": "string", "minLength": 1},
        "timestamp": {"type": "integer", "minimum": 0},
        "from_addr": {"type": "string", "minLength": 1},
        "to_addr": {"type": "string", "minLength": 1},
        "value": {"anyOf": [
            {"type": "string", "pattern": "^[0-9]+$"},
            {"type": "integer", "minimum": 0},
        ]},
        "project_id": {"type": "string", "minLength": 1},
        "token_id": {"type": ["string", "null"]},
    },
}
_validator = jsonschema.Draft7Validator(RECORD_SCHEMA)


def oracle_ndjson_line_ok(line: str) -> bool:
    try:
        obj = json.loads(line)
    except ValueError:
        return False
    return _validator.is_valid(obj)


def oracle_lifecycle(series, pct_num: int = 1, pct_den: int = 100):
    """``(t_peak, n_peak, t_diminishing or None)`` by two forward scans."""
    best = None
    t_peak = 0
    for i, v in enumerate(series):
        if best is None or v > best:
            best = v
            t_peak = i
    if best is None or best <= 0:
        raise AllZeroSeries("no positive value")
    t_dim = None
    i = t_peak + 1
    while i < len(series):
        if series[i] * pct_den <= best * pct_num:
            t_dim = i
            break
        i += 1
    return t_peak, best, t_dim


def oracle_pearson(x, y) -> float:
    """Textbook single-pass formula evaluated in exact rationals."""
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need equal lengths >= 3")
    n = sx = sy = sxx = syy = sxy = Fraction(0)
    for a, b in zip(x, y):
        a, b = Fraction(a), Fraction(b)
        n += 1
        sx += a
        sy += b
        sxx += a * a
        syy += b * b
        sxy += a * b
    cov = n * sxy - sx * sy
    vx = n * sxx - sx * sx
    vy = n * syy - sy * sy
    if vx == 0 or vy == 0:
        raise ConstantInput("constant input")
    # exact up to the final square root
    r2 = cov * cov / (vx * vy)
    return math.copysign(math.sqrt(float(r2)), float(cov))


def oracle_concentration(edges, k: int) -> Fraction:
    """Share of received volume held by the k biggest receivers; edges are (from, to, value)."""
    got = defaultdict(int)
    for _, to, v in edges:
        got[to] += v
    vols = sorted(got.values(), reverse=True)
    return Fraction(sum(vols[:k]), sum(vols))


def oracle_components(nodes, pairs) -> int:
    adj = {n: set() for n in nodes}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    count = 0
    for n in nodes:
        if n in seen:
            continue
        count += 1
        q = deque([n])
        seen.add(n)
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
    return count


def oracle_day_buckets(records):
    """day -> list of (from, to, value) in input order."""
    days = defaultdict(list)
    for r in records:
        days[r.timestamp // 86400].append((r.from_addr, r.to_addr, r.value))
    return dict(days)


def oracle_dense_counts(records):
    """Edge counts per day from first to last active day, zeros included."""
    days = oracle_day_buckets(records)
    lo, hi = min(days), max(days)
    return [len(days.get(d, ())) for d in range(lo, hi + 1)]


def oracle_validation(records):
    seen, dups = set(), set()
    for r in records:
        if r.tx_id in seen:
            dups.add(r.tx_id)
        seen.add(r.tx_id)
    zero = len([r for r in records if r.value == 0])
    selfs = len([r for r in records if r.from_addr == r.to_addr])
    return sorted(dups), zero, selfs
