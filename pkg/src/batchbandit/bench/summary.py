"""Reductions over trial records: relative regret, histograms, KS distances."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .harness import sort_records


@dataclass(frozen=True)
class RegretSummary:
    """Mean simple regret of one policy, and its percentage of the baseline's.

    ``relative`` and ``relative_se`` are None when the baseline mean is 0.
    ``n`` counts the replications used (failed trials are dropped pairwise).
    """

    policy: str
    mean: float
    se: float
    relative: float | None
    relative_se: float | None
    n: int
    failures: int = 0


def _by_policy(records) -> dict:
    out = {}
    for r in sort_records(records):
        out.setdefault(r.policy, {})[r.replication] = r.regret
    return out


def relative_gain(records, baseline: str = "uniform") -> list:
    """Regret of each policy as a percentage of ``baseline`` on shared instances.

    The standard error of the ratio ``100 X/Y`` uses the paired replication
    deltas ``X_i - (X/Y) Y_i`` (delta method), which is where common random
    numbers pay off.
    """
    table = _by_policy(records)
    if baseline not in table:
        raise ValueError(f"baseline policy {baseline!r} not among {sorted(table)}")
    base = table[baseline]
    out = []
    for pid in sorted(table):
        regs = table[pid]
        reps = sorted(r for r in regs if r in base and np.isfinite(regs[r]) and np.isfinite(base[r]))
        x = np.array([regs[r] for r in reps])
        y = np.array([base[r] for r in reps])
        fails = sum(1 for v in regs.values() if not np.isfinite(v))
        m = len(reps)
        if m == 0:
            out.append(RegretSummary(pid, math.nan, math.nan, None, None, 0, fails))
            continue
        mean = float(np.mean(x))
        se = float(np.std(x, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        ybar = float(np.mean(y))
        if ybar == 0.0:
            rel = rel_se = None
        else:
            ratio = mean / ybar
            rel = 100.0 * ratio
            d = x - ratio * y
            rel_se = 100.0 * float(np.std(d, ddof=1)) / (math.sqrt(m) * ybar) if m > 1 else 0.0
        out.append(RegretSummary(pid, mean, se, rel, rel_se, m, fails))
    return out


def format_table(summaries, scale: float = 1.0) -> str:
    """Plain-text table; ``scale`` multiplies regrets (e.g. sqrt(n) for the h scale)."""
    lines = [f"{'policy':<24}{'mean':>12}{'se':>12}{'rel %':>10}{'rel se':>9}{'n':>7}{'fail':>6}"]
    for s in summaries:
        rel = "undef" if s.relative is None else f"{s.relative:.1f}"
        rse = "" if s.relative_se is None else f"{s.relative_se:.1f}"
        lines.append(f"{s.policy:<24}{s.mean * scale:>12.5g}{s.se * scale:>12.3g}{rel:>10}{rse:>9}{s.n:>7}{s.failures:>6}")
    return "\n".join(lines)


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    edges: np.ndarray


def regret_histogram(regrets, bins: int = 30, upper: float | None = None) -> Histogram:
    """Histogram of finite regrets over ``[0, upper]`` (default: the largest regret).

    Accepts trial records or raw values. All-zero input puts every count in
    the first bin of ``[0, 1]``.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    vals = np.array([getattr(r, "regret", r) for r in regrets], dtype=float)
    vals = vals[np.isfinite(vals)]
    if upper is None:
        upper = float(vals.max()) if vals.size else 0.0
    if upper <= 0.0:
        upper = 1.0
    counts, edges = np.histogram(vals, bins=bins, range=(0.0, upper))
    return Histogram(counts, edges)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic between regret samples."""
    a = np.asarray([getattr(r, "regret", r) for r in a], dtype=float)
    b = np.asarray([getattr(r, "regret", r) for r in b], dtype=float)
    return float(stats.ks_2samp(a[np.isfinite(a)], b[np.isfinite(b)], method="asymp").statistic)
