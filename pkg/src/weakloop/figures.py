"""Numeric data behind the histogram, angle-evolution and ECDF plots."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import ProblemParams, bot_trajectory
from .montecarlo import SampleSet, monte_carlo
from .runners import RunConfig
from .stats import (ECDF, SegmentReport, TestResult, ad_two_sample, histogram,
                    ks_two_sample, period_bin_width, segment_active_latent)


def histogram_rows(samples: SampleSet, params: ProblemParams) -> list[tuple[float, float, int]]:
    edges, counts = histogram(samples.values, period_bin_width(params))
    return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], counts)]


def figure2(params: ProblemParams, trials: int, seed: int, threads: int = 1):
    """Weak-loop iteration counts and their histogram."""
    samples = monte_carlo("weak", RunConfig(params, seed=seed), trials, threads)
    return samples, histogram_rows(samples, params)


@dataclass
class AngleRow:
    n: int
    angle: float  # pre-measurement angle, reduced to [0, 2*pi)
    unwrapped: float
    active: bool
    lower: float | None
    upper: float | None


def figure3(params: ProblemParams, first: int = 10, last: int = 30):
    """Per-iteration angles over a window, with the linear growth envelopes.

    The lower envelope ``a_k + (n-k) a0`` starts at the first iteration of
    the first whole latent run; the upper envelope ``a_k + 3 (n-k) a0`` at
    its last iteration.
    """
    report: SegmentReport = segment_active_latent(params, first, last, require_efficient=False)
    traj = bot_trajectory(params, last)
    unwrapped = traj.unwrapped_pre
    latent = [r for r in (report.interior_runs or report.runs) if r.kind == "latent"]
    k_lo = latent[0].start if latent else first
    k_hi = latent[0].start + latent[0].length - 1 if latent else first
    a0 = params.alpha
    rows = []
    for n in range(first, last + 1):
        lower = float(unwrapped[k_lo - 1] + (n - k_lo) * a0) if n >= k_lo else None
        upper = float(unwrapped[k_hi - 1] + 3 * (n - k_hi) * a0) if n >= k_hi else None
        rows.append(AngleRow(n, float(traj.pre[n - 1]), float(unwrapped[n - 1]),
                             bool(traj.active[n - 1]), lower, upper))
    return rows, report


@dataclass
class ComparisonResult:
    weak: SampleSet
    test_restart: SampleSet
    ks: TestResult
    ad: TestResult


def figure4(params: ProblemParams, trials: int, seed: int, threads: int = 1) -> ComparisonResult:
    """Weak loop versus test-restart; the test-restart batch is seeded with ``seed + 1``."""
    weak = monte_carlo("weak", RunConfig(params, seed=seed), trials, threads)
    tr = monte_carlo("test_restart", RunConfig(params, seed=seed + 1), trials, threads)
    return ComparisonResult(weak, tr, ks_two_sample(weak, tr), ad_two_sample(weak, tr))


def ecdf_rows(samples: SampleSet) -> list[tuple[int, float]]:
    vals, levels = ECDF(samples.values).steps()
    return [(int(v), float(p)) for v, p in zip(vals, levels)]


def staggered_plateaus(samples: SampleSet, min_length: float = 500) -> list[tuple[float, float]]:
    return ECDF(samples.values).flat_intervals(min_length)


def median_gap(a: SampleSet, b: SampleSet) -> float:
    """``|median(a) - median(b)| / median(b)``."""
    ma, mb = ECDF(a.values).quantile(0.5), ECDF(b.values).quantile(0.5)
    return abs(ma - mb) / mb


__all__ = ["figure2", "figure3", "figure4", "histogram_rows", "ecdf_rows",
           "staggered_plateaus", "median_gap", "AngleRow", "ComparisonResult"]
