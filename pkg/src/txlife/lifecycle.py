"""Life-cycle landmarks on a daily activity series.

Day offsets count from launch (the first active day is offset 0).

* peak: the earliest day attaining the series maximum.
* diminishing: the first day after the peak whose activity is at or below
  ``frac`` (default 1/100) of the peak value. The comparison is exact:
  ``value * den <= num * n_peak`` for ``frac = num/den``.

A project whose activity never falls to the threshold is right-censored and
reported in its own ``censored`` bucket rather than a quadrant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import AllZeroSeries, EmptyCohort
from .metrics import MetricSeries

DEFAULT_FRAC = Fraction(1, 100)
_INT64_SAFE = 2**62


class Category(str, enum.Enum):
    FAST_PEAK_FAST_DECAY = "fast_peak_fast_decay"
    FAST_PEAK_SLOW_DECAY = "fast_peak_slow_decay"
    SLOW_PEAK_FAST_DECAY = "slow_peak_fast_decay"
    SLOW_PEAK_SLOW_DECAY = "slow_peak_slow_decay"
    CENSORED = "censored"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LifecycleSummary:
    project_id: str
    t_peak: int
    n_peak: int
    t_diminishing: int | None
    category: Category | None = None
    launch_day: int | None = None

    @property
    def t_start_to_peak(self) -> int:
        return self.t_peak

    @property
    def t_peak_to_diminishing(self) -> int | None:
        return None if self.t_diminishing is None else self.t_diminishing - self.t_peak

    @property
    def censored(self) -> bool:
        return self.t_diminishing is None

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id,
            "t_peak": self.t_peak,
            "n_peak": self.n_peak,
            "t_diminishing": self.t_diminishing,
            "t_start_to_peak": self.t_start_to_peak,
            "t_peak_to_diminishing": self.t_peak_to_diminishing,
            "category": None if self.category is None else self.category.value,
            "launch_day": self.launch_day,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LifecycleSummary":
        cat = d.get("category")
        return cls(d["project_id"], d["t_peak"], d["n_peak"], d["t_diminishing"],
                   None if cat is None else Category(cat), d.get("launch_day"))


def as_fraction(frac) -> Fraction:
    # floats go through repr so 0.01 means exactly 1/100
    f = Fraction(repr(frac)) if isinstance(frac, float) else Fraction(frac)
    if not 0 < f < 1:
        raise ValueError(f"frac must lie in (0, 1), got {frac}")
    return f


def _values(series) -> np.ndarray:
    vals = series.values if isinstance(series, MetricSeries) else series
    return vals if isinstance(vals, np.ndarray) else np.asarray(list(vals), dtype=object)


def _fits_int64(vals: np.ndarray, scale: int) -> bool:
    if vals.dtype == np.int64:
        return int(vals.max(initial=0)) * scale < _INT64_SAFE
    return False


def find_peak(series) -> tuple[int, int]:
    vals = _values(series)
    if len(vals) == 0:
        raise AllZeroSeries("empty series")
    t = int(np.argmax(vals))  # argmax returns the first maximum
    n = int(vals[t])
    if n <= 0:
        raise AllZeroSeries("series has no positive value")
    return t, n


def find_diminishing(series, t_peak: int, frac=DEFAULT_FRAC) -> int | None:
    vals = _values(series)
    f = as_fraction(frac)
    num, den = f.numerator, f.denominator
    n_peak = int(vals[t_peak])
    if _fits_int64(vals, max(num, den)):
        d = _kernels.first_at_or_below(vals, t_peak + 1, den, num * n_peak)
        return None if d < 0 else int(d)
    bound = num * n_peak
    for d in range(t_peak + 1, len(vals)):
        if int(vals[d]) * den <= bound:
            return d
    return None


def classify(summary: LifecycleSummary, peak_threshold, decay_threshold) -> Category:
    """Quadrant of a summary; both thresholds are inclusive upper bounds for "fast"."""
    if peak_threshold < 0 or decay_threshold < 0:
        raise ValueError("thresholds must be non-negative")
    if summary.censored:
        return Category.CENSORED
    fast_peak = summary.t_start_to_peak <= peak_threshold
    fast_decay = summary.t_peak_to_diminishing <= decay_threshold
    if fast_peak:
        return Category.FAST_PEAK_FAST_DECAY if fast_decay else Category.FAST_PEAK_SLOW_DECAY
    return Category.SLOW_PEAK_FAST_DECAY if fast_decay else Category.SLOW_PEAK_SLOW_DECAY


def summarize(series, thresholds=None, frac=DEFAULT_FRAC, project_id: str | None = None) -> LifecycleSummary:
    """Peak and diminishing landmarks of one series.

    ``thresholds`` is ``(peak_threshold, decay_threshold)``; without it only
    censored summaries receive a category (the rest stay ``None`` until
    :func:`classify_all` is given cohort thresholds).
    """
    t_peak, n_peak = find_peak(series)
    t_dim = find_diminishing(series, t_peak, frac)
    if isinstance(series, MetricSeries):
        pid, launch = series.project_id, series.start_day
    else:
        pid, launch = project_id or "", None
    s = LifecycleSummary(project_id or pid, t_peak, n_peak, t_dim, None, launch)
    if thresholds is not None:
        return replace(s, category=classify(s, *thresholds))
    if s.censored:
        return replace(s, category=Category.CENSORED)
    return s


def _median(xs: list[int]) -> Fraction:
    xs = sorted(xs)
    mid = len(xs) // 2
    if len(xs) % 2:
        return Fraction(xs[mid])
    return Fraction(xs[mid - 1] + xs[mid], 2)


def median_thresholds(summaries: Iterable[LifecycleSummary]) -> tuple[Fraction, Fraction] | None:
    """Cohort medians of both durations over non-censored projects."""
    done = [s for s in summaries if not s.censored]
    if not done:
        return None
    return (_median([s.t_start_to_peak for s in done]),
            _median([s.t_peak_to_diminishing for s in done]))


def classify_all(summaries: Sequence[LifecycleSummary], thresholds) -> list[LifecycleSummary]:
    out = []
    for s in summaries:
        if s.censored:
            out.append(replace(s, category=Category.CENSORED))
        else:
            out.append(replace(s, category=classify(s, *thresholds)))
    return out


@dataclass(frozen=True)
class CohortStats:
    n_projects: int
    mean_start_to_peak: Fraction
    mean_peak_to_diminishing: Fraction | None
    censored_count: int
    frac_peak_within: dict[int, Fraction]
    category_counts: dict[str, int]

    def to_dict(self) -> dict:
        def rat(x):
            return None if x is None else {"exact": str(x), "value": float(x)}

        return {
            "n_projects": self.n_projects,
            "mean_start_to_peak": rat(self.mean_start_to_peak),
            "mean_peak_to_diminishing": rat(self.mean_peak_to_diminishing),
            "censored_count": self.censored_count,
            "frac_peak_within": {str(d): rat(f) for d, f in sorted(self.frac_peak_within.items())},
            "category_counts": dict(self.category_counts),
        }


def cohort_stats(summaries: Sequence[LifecycleSummary], peak_within=(2,)) -> CohortStats:
    if not summaries:
        raise EmptyCohort("cohort is empty")
    n = len(summaries)
    done = [s for s in summaries if not s.censored]
    counts = {c.value: 0 for c in Category}
    for s in summaries:
        if s.category is not None:
            counts[s.category.value] += 1
    return CohortStats(
        n_projects=n,
        mean_start_to_peak=Fraction(sum(s.t_start_to_peak for s in summaries), n),
        mean_peak_to_diminishing=(
            Fraction(sum(s.t_peak_to_diminishing for s in done), len(done)) if done else None
        ),
        censored_count=n - len(done),
        frac_peak_within={
            int(d): Fraction(sum(1 for s in summaries if s.t_start_to_peak <= d), n)
            for d in peak_within
        },
        category_counts=counts,
    )
