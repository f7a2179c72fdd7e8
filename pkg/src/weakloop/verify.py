"""Numerical checks of the proven bounds, each reporting a worst-case margin.

A negative margin means the bound is violated; ``witness`` then names the
offending point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (ProblemParams, bot_trajectory, kappa_upper_bound, theta_max,
                       theta_maximizer, theta_offset_array)
from .runners import (RunConfig, attempt_success_probability, run_weak,
                      standard_iteration_count, trial_rng)
from .stats import (active_run_bound, gamma_lower_bound, latent_run_bound, segment_runs)

# round-off allowance; at kappa equal to the bound the peak of theta equals a0
BOUND_TOL = 1e-12


@dataclass
class BoundCheck:
    name: str
    passed: bool
    margin: float
    witness: dict = field(default_factory=dict)
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        text = f"{status}  {self.name:<24} margin={self.margin:+.3e}"
        if self.witness and not self.passed:
            text += "  witness=" + ", ".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}"
                                            for k, v in self.witness.items())
        return text


def theta_bound_check(params: ProblemParams, step: float = 1e-3) -> BoundCheck:
    """Quadrant-wise ``0 <= theta <= a0`` / ``-a0 <= theta <= 0`` on a grid."""
    a = np.arange(0.0, 2 * math.pi, step)
    th = theta_offset_array(a, params)
    a0 = params.alpha
    odd = np.sin(2 * a) >= 0  # quadrants one and three (boundaries included)
    # margin > 0 inside the allowed band, < 0 outside it
    upper = np.where(odd, a0 - th, -th)
    lower = np.where(odd, th, th + a0)
    m = np.minimum(upper, lower)
    i = int(np.argmin(m))
    margin = float(m[i])
    witness = {"a": float(a[i]), "theta": float(th[i]), "kappa": params.kappa, "rho": params.rho}
    return BoundCheck("theta quadrant bounds", margin >= -BOUND_TOL, margin, witness)


def theta_peak_exceeds(params: ProblemParams) -> bool:
    """Does the first-quadrant peak of theta exceed a0?"""
    return theta_max(params) > params.alpha + BOUND_TOL


def trajectory_bound_check(params: ProblemParams, steps: int = 10_000, pairs: int = 1_000,
                           seed: int = 0) -> BoundCheck:
    """``a_k + l*a0 <= a_{k+l} <= a_k + 3*l*a0`` on random windows of the all-bot path."""
    traj = bot_trajectory(params, steps)
    u = np.concatenate(([params.alpha], traj.unwrapped_post))  # u[n] = a_n
    rng = trial_rng(seed, 0)
    k = rng.integers(0, steps, size=pairs)
    ell = rng.integers(1, steps - k + 1)
    diff = u[k + ell] - u[k]
    a0 = params.alpha
    # cumulative sums carry round-off proportional to the path length
    tol = 1e-12 * (1 + np.abs(u[k + ell]))
    m = np.minimum(diff - ell * a0, 3 * ell * a0 - diff) + tol
    i = int(np.argmin(m))
    witness = {"k": int(k[i]), "l": int(ell[i]), "kappa": params.kappa, "rho": params.rho}
    return BoundCheck("trajectory bounds", bool(m[i] >= 0), float(m[i]), witness)


def run_length_checks(params: ProblemParams, periods: int = 40) -> list:
    """Active-fraction lower bound and latent/active run-length bounds."""
    period = max(int(math.ceil(math.pi / params.alpha)), 4)
    steps = periods * period
    active = bot_trajectory(params, steps).active
    runs = segment_runs(active)
    inner = runs[1:-1] or runs
    gamma = float(active.mean())
    g_bound = gamma_lower_bound(params)
    out = [BoundCheck("active fraction", gamma > g_bound, gamma - g_bound,
                      {"gamma": gamma, "rho": params.rho, "kappa": params.kappa})]
    if 3 * params.alpha >= math.pi / 2:
        # a single step can jump across a whole active window
        out += [BoundCheck(name, True, 0.0, skipped=True)
                for name in ("latent run length", "active run length")]
        return out
    lat = [r for r in inner if r.kind == "latent"]
    act = [r for r in inner if r.kind == "active"]
    if lat:
        worst = max(lat, key=lambda r: r.length)
        m = latent_run_bound(params) - worst.length
        out.append(BoundCheck("latent run length", m > 0, m,
                              {"start": worst.start, "length": worst.length}))
    if act:
        worst = min(act, key=lambda r: r.length)
        m = worst.length - active_run_bound(params)
        out.append(BoundCheck("active run length", m > 0, m,
                              {"start": worst.start, "length": worst.length}))
    return out


def standard_check(params: ProblemParams) -> BoundCheck:
    m = standard_iteration_count(params.alpha)
    p = attempt_success_probability(m, params.alpha)
    floor = math.cos(2 * params.alpha) ** 2
    margin = p - floor
    return BoundCheck("standard success floor", margin >= -BOUND_TOL, margin,
                      {"m": m, "p": p})


def backend_spot_check(params: ProblemParams, trials: int = 5, seed: int = 0) -> BoundCheck:
    """Angle model versus statevector on a uniform single-marked instance.

    Uses ``n = 1/rho`` when that is a small integer, otherwise ``n = 256``
    with ``kappa = 1/16``.
    """
    n = round(1 / params.rho)
    if n < 2:
        return BoundCheck("backend agreement", True, 0.0, skipped=True)
    kappa = params.kappa
    if n > 1024 or not math.isclose(1 / n, params.rho, rel_tol=1e-12):
        n, kappa = 256, 1 / 16
    sv_cfg = RunConfig.statevector(n, [0], kappa, max_iterations=100_000)
    ang_cfg = RunConfig(sv_cfg.params, max_iterations=100_000)
    worst = 0.0
    for t in range(trials):
        r_a = run_weak(ang_cfg, trial_rng(seed, t), record_trajectory=True)
        r_s = run_weak(sv_cfg, trial_rng(seed, t), record_trajectory=True)
        if r_a.iterations != r_s.iterations:
            return BoundCheck("backend agreement", False, -1.0,
                              {"trial": t, "angle": r_a.iterations, "statevector": r_s.iterations})
        d = np.abs(np.angle(np.exp(1j * (np.array(r_a.trajectory) - np.array(r_s.trajectory)))))
        if d.size:
            worst = max(worst, float(d.max()))
    return BoundCheck("backend agreement", worst <= 1e-9, 1e-9 - worst,
                      {"n": n, "max_angle_diff": worst})


def run_all(params: ProblemParams, seed: int = 0) -> list:
    checks = [theta_bound_check(params)]
    if not checks[0].passed:
        xm = theta_maximizer(params)
        checks[0].witness["maximizer"] = xm
    checks.append(trajectory_bound_check(params, seed=seed))
    checks.extend(run_length_checks(params))
    checks.append(standard_check(params))
    checks.append(backend_spot_check(params, seed=seed))
    return checks


def summary_header(params: ProblemParams) -> str:
    bound = kappa_upper_bound(params.rho)
    return (f"rho={params.rho:.6g} kappa={params.kappa:.6g} alpha={params.alpha:.6g} "
            f"kappa_bound={bound:.6g} efficient={params.efficient_regime}")
