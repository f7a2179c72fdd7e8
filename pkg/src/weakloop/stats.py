"""Empirical distributions, two-sample tests and active/latent segmentation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import kolmogorov

from .errors import DomainError
from .geometry import ProblemParams, bot_trajectory, kappa_upper_bound

SIGNIFICANCE = 0.01


def _values(x) -> np.ndarray:
    v = getattr(x, "values", x)
    v = np.sort(np.asarray(v, dtype=float).ravel())
    if v.size == 0:
        raise DomainError("sample must be non-empty")
    return v


class ECDF:
    """Right-continuous empirical CDF of a sample.

    >>> F = ECDF([1, 2, 3, 4])
    >>> F(2.5), F.quantile(0.5)
    (0.5, 2.0)
    """

    def __init__(self, samples):
        self.x = _values(samples)
        self.n = self.x.size

    def __call__(self, t):
        out = np.searchsorted(self.x, t, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q):
        """Smallest sample value ``v`` with ``ECDF(v) >= q``."""
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise DomainError("quantile level must lie in [0, 1]")
        # guard q*n landing a hair above an integer
        k = np.ceil(q * self.n - 1e-9 * self.n).astype(np.int64)
        out = self.x[np.clip(k - 1, 0, self.n - 1)]
        return float(out) if out.ndim == 0 else out

    def steps(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct values and the ECDF level reached at each of them."""
        vals, counts = np.unique(self.x, return_counts=True)
        return vals, np.cumsum(counts) / self.n

    def flat_intervals(self, min_length: float) -> list[tuple[float, float]]:
        """Maximal intervals ``[v_i, v_{i+1})`` of length ``>= min_length`` on
        which the ECDF does not increase."""
        vals = np.unique(self.x)
        gaps = np.diff(vals)
        idx = np.flatnonzero(gaps >= min_length)
        return [(float(vals[i]), float(vals[i + 1])) for i in idx]


def ecdf(samples) -> ECDF:
    return ECDF(samples)


def summarize(samples) -> dict:
    F = ECDF(samples)
    x = F.x
    return {
        "count": int(F.n),
        "mean": float(x.mean()),
        "variance": float(x.var()),
        "min": float(x[0]),
        "p5": F.quantile(0.05),
        "p25": F.quantile(0.25),
        "median": F.quantile(0.5),
        "p75": F.quantile(0.75),
        "p95": F.quantile(0.95),
        "max": float(x[-1]),
    }


def histogram(samples, bin_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Counts over fixed-width bins starting at zero. Returns ``(edges, counts)``."""
    x = _values(samples)
    if bin_width <= 0:
        raise DomainError("bin_width must be positive")
    nbins = max(1, int(math.floor(x[-1] / bin_width)) + 1)
    edges = np.arange(nbins + 1) * bin_width
    counts, _ = np.histogram(x, bins=edges)
    return edges, counts


def period_bin_width(params: ProblemParams) -> float:
    """Four bins per active/latent period of about ``pi / (2 a0)`` iterations."""
    return math.pi / (8.0 * params.alpha)


# -- two-sample tests --

@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    reject_at_1pct: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_value", float(min(1.0, max(0.0, self.p_value))))
        object.__setattr__(self, "reject_at_1pct", self.p_value < SIGNIFICANCE)

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "reject_at_1pct": self.reject_at_1pct}


def ks_statistic(x, y) -> float:
    """``sup |F_x - F_y|`` evaluated on the merged sample points."""
    a, b = _values(x), _values(y)
    pts = np.concatenate((a, b))
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(x, y) -> TestResult:
    """Two-sided two-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    a, b = _values(x), _values(y)
    d = ks_statistic(a, b)
    en = a.size * b.size / (a.size + b.size)
    return TestResult(d, float(kolmogorov(math.sqrt(en) * d)))


def ad_statistic(*samples) -> float:
    """k-sample Anderson-Darling statistic with the midrank tie adjustment.

    Scholz & Stephens (1987), version ``A2akN``.
    """
    groups = [_values(s) for s in samples]
    pooled = np.sort(np.concatenate(groups))
    N = pooled.size
    z, l = np.unique(pooled, return_counts=True)
    B = np.cumsum(l)
    Ba = B - l / 2.0
    denom = Ba * (N - Ba) - N * l / 4.0
    ok = denom > 0
    total = 0.0
    for g in groups:
        n = g.size
        M = np.searchsorted(g, z, side="right")
        f = M - np.searchsorted(g, z, side="left")
        Ma = M - f / 2.0
        inner = l[ok] / N * (N * Ma[ok] - n * Ba[ok]) ** 2 / denom[ok]
        total += inner.sum() / n
    return float((N - 1.0) / N * total)


def ad_null_sigma(sizes) -> float:
    """Standard deviation of ``A2akN`` under the null for the given group sizes."""
    n = np.asarray(sizes, dtype=float)
    k = n.size
    N = n.sum()
    H = np.sum(1.0 / n)
    inv = 1.0 / np.arange(1, int(N))  # 1/1 .. 1/(N-1)
    h = inv.sum()
    # g = sum_{i=1}^{N-2} (h_{N-1} - h_i) / (N - i)
    hi = np.cumsum(inv)[:-1]  # h_1 .. h_{N-2}
    i = np.arange(1, int(N) - 1)
    g = np.sum((h - hi) / (N - i))
    a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * H
    b = (2 * g - 4) * k**2 + 8 * h * k + (2 * g - 14 * h - 4) * H - 8 * h + 4 * g - 6
    c = (6 * h + 2 * g - 2) * k**2 + (4 * h - 4 * g + 6) * k + (2 * h - 6) * H + 4 * h
    d = (2 * h + 6) * k**2 - 4 * h * k
    var = (a * N**3 + b * N**2 + c * N + d) / ((N - 1.0) * (N - 2.0) * (N - 3.0))
    return float(math.sqrt(var))


# Scholz & Stephens (1987), Table 1 interpolation coefficients
_AD_SIG = np.array([0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001])
_AD_B0 = np.array([0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085])
_AD_B1 = np.array([-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615])
_AD_B2 = np.array([-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154])


def ad_critical_values(k: int) -> np.ndarray:
    """Standardised critical values at the levels in ``_AD_SIG`` for ``k`` samples."""
    m = k - 1
    return _AD_B0 + _AD_B1 / math.sqrt(m) + _AD_B2 / m


def ad_two_sample(x, y) -> TestResult:
    """Two-sample Anderson-Darling test.

    The statistic reported is the standardised ``(A2akN - (k-1)) / sigma``.
    The p-value comes from a quadratic fit of ``log(level)`` against the
    tabulated critical values, extrapolated outside the table.
    """
    a, b = _values(x), _values(y)
    if a.size + b.size < 4:
        raise DomainError("need at least four observations in total")
    A2 = ad_statistic(a, b)
    sigma = ad_null_sigma([a.size, b.size])
    t = (A2 - 1.0) / sigma
    crit = ad_critical_values(2)
    coef = np.polyfit(crit, np.log(_AD_SIG), 2)
    p = math.exp(np.polyval(coef, t))
    # the fitted parabola turns over far right of the table; stay monotone there
    if t > crit[-1]:
        p = min(p, _AD_SIG[-1])
    elif t < crit[0]:
        p = max(p, _AD_SIG[0])
    return TestResult(float(t), p)


# -- active / latent segmentation --

class Run(NamedTuple):
    kind: str  # "active" or "latent"
    length: int
    start: int  # first iteration of the run


@dataclass(frozen=True)
class SegmentReport:
    runs: list
    gamma: float
    L_max: int | None
    ell_min: int | None
    first: int
    last: int

    @property
    def interior_runs(self) -> list:
        """Runs that neither start at ``first`` nor end at ``last``."""
        return [r for r in self.runs if r.start > self.first and r.start + r.length - 1 < self.last]


def segment_runs(active: np.ndarray, first: int = 1) -> list:
    runs = []
    if active.size == 0:
        return runs
    change = np.flatnonzero(np.diff(active.astype(np.int8))) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [active.size]))
    for s, e in zip(starts, ends):
        runs.append(Run("active" if active[s] else "latent", int(e - s), int(first + s)))
    return runs


def segment_active_latent(params: ProblemParams, first: int = 10, last: int = 30,
                          require_efficient: bool = True) -> SegmentReport:
    """Classify iterations ``first .. last`` of the all-bot trajectory.

    An iteration is active when its pre-measurement angle lies within
    ``pi/4`` of ``pi/2`` modulo ``pi``. ``L_max`` and ``ell_min`` are taken
    over runs cut by neither window edge, or over all runs if none is whole.
    """
    if require_efficient and params.kappa > kappa_upper_bound(params.rho):
        raise DomainError("kappa lies outside the efficient regime")
    if not 1 <= first <= last:
        raise DomainError("need 1 <= first <= last")
    traj = bot_trajectory(params, last)
    active = traj.active[first - 1:last]
    runs = segment_runs(active, first)
    gamma = float(active.mean())
    rep = SegmentReport(runs, gamma, None, None, first, last)
    pool = rep.interior_runs or runs
    lat = [r.length for r in pool if r.kind == "latent"]
    act = [r.length for r in pool if r.kind == "active"]
    return SegmentReport(runs, gamma, max(lat) if lat else None, min(act) if act else None,
                         first, last)


def latent_run_bound(params: ProblemParams) -> float:
    """Every latent run is shorter than this: ``pi/(2 a0) + 1``."""
    return math.pi / (2 * params.alpha) + 1


def active_run_bound(params: ProblemParams) -> float:
    """Every active run is longer than this: ``pi/(6 a0) - 1``."""
    return math.pi / (6 * params.alpha) - 1


def gamma_lower_bound(params: ProblemParams) -> float:
    return 0.25 - 3 * params.alpha / (2 * math.pi)
