"""Synthetic projects whose life-cycle landmarks are known by construction.

Randomness comes from numpy's PCG64 bit generator (``numpy.random.Generator``
seeded with an integer), which produces the same stream on every platform.

Envelope for a project with peak day ``p`` and height ``H``::

    d < p : max(1, floor(H * exp(-rise_rate  * (p - d))))   capped at H - 1
    d = p : H
    d > p : floor(H * exp(-decay_rate * (d - p)))           capped at H - 1

The final day additionally gets at least ``tail`` transfers (capped at
``H - 1``) so the observed series extends past a decay to zero. The peak is
strictly the largest day, so the ground-truth ``t_peak`` is unambiguous.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from ..errors import InvalidParams
from ..ingest import RecordBatch, TransactionRecord, digest_bytes
from ..lifecycle import LifecycleSummary

SECONDS_PER_DAY = 86400
DEFAULT_LAUNCH_DAY = 19000  # 2022-01-08


@dataclass(frozen=True)
class SynthParams:
    seed: int
    n_days: int
    peak_day: int
    peak_height: int
    rise_rate: float = 0.5
    decay_rate: float = 1.0
    n_addresses: int = 50
    value_scale: int = 1000
    project_id: str = "P0"
    launch_day: int = DEFAULT_LAUNCH_DAY
    tail: int = 1

    def validate(self) -> None:
        if self.n_days < 1:
            raise InvalidParams("n_days must be >= 1")
        if not 0 <= self.peak_day < self.n_days:
            raise InvalidParams("peak_day must lie in [0, n_days)")
        if self.peak_height < 1:
            raise InvalidParams("peak_height must be >= 1")
        if self.peak_day > 0 and self.peak_height < 2:
            raise InvalidParams("a peak after launch needs peak_height >= 2")
        if self.n_addresses < 2:
            raise InvalidParams("n_addresses must be >= 2")
        if self.value_scale < 1 or self.launch_day < 0 or self.tail < 0:
            raise InvalidParams("value_scale >= 1, launch_day >= 0, tail >= 0 required")
        if self.rise_rate < 0 or self.decay_rate < 0:
            raise InvalidParams("rates must be non-negative")


@dataclass(frozen=True)
class SynthProject:
    params: SynthParams
    batch: RecordBatch
    counts: tuple[int, ...]
    truth: LifecycleSummary

    def sidecar(self) -> dict:
        return {"params": asdict(self.params), "counts": list(self.counts),
                "truth": self.truth.to_dict()}


def daily_counts(p: SynthParams) -> list[int]:
    h = p.peak_height
    cap = h - 1
    counts = []
    for d in range(p.n_days):
        if d < p.peak_day:
            c = min(cap, max(1, math.floor(h * math.exp(-p.rise_rate * (p.peak_day - d)))))
        elif d == p.peak_day:
            c = h
        else:
            c = min(cap, math.floor(h * math.exp(-p.decay_rate * (d - p.peak_day))))
        counts.append(c)
    if p.n_days - 1 > p.peak_day:
        counts[-1] = max(counts[-1], min(p.tail, cap))
    while counts[-1] == 0:
        counts.pop()
    return counts


def _truth(p: SynthParams, counts: list[int], frac: Fraction) -> LifecycleSummary:
    t_dim = None
    for d in range(p.peak_day + 1, len(counts)):
        if counts[d] * frac.denominator <= frac.numerator * p.peak_height:
            t_dim = d
            break
    return LifecycleSummary(p.project_id, p.peak_day, p.peak_height, t_dim, None, p.launch_day)


def _address_book(project_id: str, n: int) -> list[str]:
    salt = hashlib.sha256(project_id.encode()).hexdigest()[:24]
    return [f"0x{salt}{i:016x}" for i in range(n)]


def synth_project(params: SynthParams, frac=Fraction(1, 100)) -> SynthProject:
    params.validate()
    counts = daily_counts(params)
    rng = np.random.Generator(np.random.PCG64(params.seed))
    book = _address_book(params.project_id, params.n_addresses)
    records = []
    for d, c in enumerate(counts):
        if c == 0:
            continue
        base = (params.launch_day + d) * SECONDS_PER_DAY
        secs = np.sort(rng.integers(0, SECONDS_PER_DAY, size=c))
        src = rng.integers(0, params.n_addresses, size=c)
        dst = (src + 1 + rng.integers(0, params.n_addresses - 1, size=c)) % params.n_addresses
        vals = rng.integers(1, params.value_scale + 1, size=c)
        for i in range(c):
            records.append(TransactionRecord(
                f"{params.project_id}-{d:05d}-{i:06d}", base + int(secs[i]),
                book[src[i]], book[dst[i]], int(vals[i]), params.project_id,
            ))
    digest = digest_bytes(json.dumps(asdict(params), sort_keys=True).encode())
    return SynthProject(params, RecordBatch.from_records(records, digest), tuple(counts),
                        _truth(params, counts, Fraction(frac)))


def synth_cohort(n_projects: int, seed: int = 0, peak_days=None, min_days: int = 10,
                 max_days: int = 120) -> list[SynthProject]:
    """A cohort with varied envelopes; ``peak_days`` pins each project's peak offset."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for i in range(n_projects):
        if peak_days is not None:
            peak = int(peak_days[i])
            n_days = int(rng.integers(max(min_days, peak + 2), max(max_days, peak + 3)))
        else:
            n_days = int(rng.integers(min_days, max_days))
            peak = int(rng.integers(0, max(1, n_days // 3)))
        params = SynthParams(
            seed=int(rng.integers(0, 2**32)),
            n_days=n_days,
            peak_day=peak,
            peak_height=int(rng.integers(50, 300)),
            rise_rate=float(rng.uniform(0.05, 1.0)),
            decay_rate=float(rng.uniform(0.03, 1.5)),
            n_addresses=int(rng.integers(10, 200)),
            value_scale=int(10 ** rng.integers(1, 19)),
            project_id=f"P{i:04d}",
            launch_day=DEFAULT_LAUNCH_DAY + int(rng.integers(0, 365)),
        )
        out.append(synth_project(params))
    return out


def cohort_batch(cohort) -> RecordBatch:
    return RecordBatch.from_records(
        (r for p in cohort for r in p.batch.records),
        digest_bytes("".join(p.batch.source_digest for p in cohort).encode()),
    )


def synth_bulk_ndjson(n_records: int, n_projects: int, seed: int = 0, n_days: int = 180,
                      n_addresses: int = 5000) -> bytes:
    """Large unstructured NDJSON fixture for throughput checks (no ground truth)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    proj = rng.integers(0, n_projects, size=n_records)
    ts = DEFAULT_LAUNCH_DAY * SECONDS_PER_DAY + rng.integers(0, n_days * SECONDS_PER_DAY, size=n_records)
    src = rng.integers(0, n_addresses, size=n_records)
    dst = rng.integers(0, n_addresses, size=n_records)
    val = rng.integers(0, 10**18, size=n_records, dtype=np.int64)
    lines = [
        '{"tx_id":"0x%016x","timestamp":%d,"from_addr":"0x%040x","to_addr":"0x%040x",'
        '"value":"%d","project_id":"C%03d"}\n' % (i, t, p * n_addresses + s, p * n_addresses + d, v, p)
        for i, (p, t, s, d, v) in enumerate(zip(proj.tolist(), ts.tolist(), src.tolist(),
                                                dst.tolist(), val.tolist()))
    ]
    return "".join(lines).encode("ascii")
