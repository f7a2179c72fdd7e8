"""Closed-form dynamics in the two-dimensional plane span{psi0, psi1}.

A state ``cos(a)|psi0> + sin(a)|psi1>`` is tracked by its angle ``a`` alone.
One loop iteration rotates the angle by ``2*alpha`` (a Grover iteration)
and then applies the weak measurement: outcome "top" with probability
``kappa * sin(b)**2`` collapses onto ``psi1``, outcome "bot" shrinks the
marked component by ``xi = sqrt(1 - kappa)`` and renormalises.

Iteration ``n`` sees the pre-measurement angle ``b_n = a_{n-1} + 2*alpha``
and leaves the post-measurement angle ``a_n``; ``a_0 = alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def reduce_angle(a: float) -> float:
    """Reduce ``a`` to ``[0, 2*pi)``."""
    r = math.fmod(a, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if r >= TWO_PI else r


def kappa_upper_bound(rho: float) -> float:
    """Largest measurement strength for which ``|theta| <= alpha`` everywhere.

    Returns ``4*sqrt(rho) / (1 + sqrt(rho))**2``.
    """
    if not 0.0 <= rho <= 1.0 or math.isnan(rho):
        raise DomainError(f"rho must lie in [0, 1], got {rho!r}")
    s = math.sqrt(rho)
    return 4.0 * s / (1.0 + s) ** 2


@dataclass(frozen=True)
class ProblemParams:
    """Initial success probability ``rho`` and measurement strength ``kappa``.

    ``kappa`` defaults to ``sqrt(rho)``. ``alpha = arcsin(sqrt(rho))`` and
    ``xi = sqrt(1 - kappa)`` are derived and stored.
    """

    rho: float
    kappa: float | None = None
    alpha: float = field(init=False)
    xi: float = field(init=False)

    def __post_init__(self):
        rho = float(self.rho)
        if not 0.0 < rho <= 1.0 or math.isnan(rho):
            raise DomainError(f"rho must lie in (0, 1], got {self.rho!r}")
        kappa = math.sqrt(rho) if self.kappa is None else float(self.kappa)
        if not 0.0 <= kappa <= 1.0 or math.isnan(kappa):
            raise DomainError(f"kappa must lie in [0, 1], got {self.kappa!r}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "alpha", math.asin(math.sqrt(rho)))
        object.__setattr__(self, "xi", math.sqrt(1.0 - kappa))

    @property
    def a0(self) -> float:
        return self.alpha

    @property
    def efficient_regime(self) -> bool:
        return self.kappa <= kappa_upper_bound(self.rho)

    def with_kappa(self, kappa: float) -> "ProblemParams":
        return ProblemParams(self.rho, kappa)

    def to_dict(self) -> dict:
        return {"rho": self.rho, "kappa": self.kappa, "alpha": self.alpha, "xi": self.xi}

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemParams":
        return cls(d["rho"], d["kappa"])


@dataclass(frozen=True)
class AngleState:
    """A unit vector in span{psi0, psi1}, stored as its angle in ``[0, 2*pi)``."""

    a: float

    def __post_init__(self):
        object.__setattr__(self, "a", reduce_angle(float(self.a)))

    @property
    def amplitudes(self) -> tuple[float, float]:
        """Coefficients on ``(psi0, psi1)``."""
        return math.cos(self.a), math.sin(self.a)


def post_bot_angle(a: float, params: ProblemParams) -> float:
    """Angle of the state left behind by a "bot" outcome at angle ``a``.

    The unnormalised post-state is ``(cos a, xi sin a)``; two-argument
    arctangent keeps it in the quadrant of ``a`` and has no singularity at
    ``a = pi/2 + k*pi``.
    """
    a = reduce_angle(a)
    return reduce_angle(math.atan2(params.xi * math.sin(a), math.cos(a)))


def _wrap_pi(x: float) -> float:
    if x > math.pi:
        return x - TWO_PI
    if x <= -math.pi:
        return x + TWO_PI
    return x


def theta_offset(a: float, params: ProblemParams) -> float:
    """Signed back-action angle: ``a - post_bot_angle(a)``.

    Non-negative in the first and third quadrants, non-positive in the
    second and fourth.
    """
    a = reduce_angle(a)
    return _wrap_pi(a - post_bot_angle(a, params))


def theta_maximizer(params: ProblemParams) -> float:
    """First-quadrant angle at which ``theta_offset`` peaks."""
    xi = params.xi
    return math.acos(math.sqrt(xi / (xi + 1.0)))


def theta_max(params: ProblemParams) -> float:
    """Peak value of ``theta_offset``: ``arctan((1 - xi) / (2 sqrt(xi)))``."""
    xi = params.xi
    if xi == 0.0:
        return math.pi / 2
    return math.atan((1.0 - xi) / (2.0 * math.sqrt(xi)))


def top_probability(a: float, kappa: float) -> float:
    """Probability of the "top" outcome when measuring at angle ``a``."""
    s = math.sin(a)
    return kappa * s * s


def grover_rotation(a: float, alpha: float, k: int) -> float:
    """Angle after ``k`` Grover iterations: ``(a + 2*k*alpha) mod 2*pi``."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    return reduce_angle(a + 2.0 * k * alpha)


def recurrence_step(a_prev: float, params: ProblemParams, u: float) -> tuple[float, bool]:
    """One loop body: Grover iteration, then weak measurement driven by ``u``.

    Returns ``(a_next, terminated)``. On termination the state is exactly
    ``psi1`` and ``a_next = pi/2``.
    """
    b = grover_rotation(a_prev, params.alpha, 1)
    if u < top_probability(b, params.kappa):
        return math.pi / 2, True
    return post_bot_angle(b, params), False


def is_active(a) -> np.ndarray | bool:
    """True where ``pi/4 + i*pi <= a <= 3*pi/4 + i*pi`` for some integer ``i``."""
    r = np.mod(a, np.pi)
    out = (r >= np.pi / 4) & (r <= 3 * np.pi / 4)
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BotTrajectory:
    """The deterministic trajectory conditioned on every outcome being "bot".

    Arrays are indexed by iteration ``n = 1 .. len``; position ``i`` holds
    iteration ``i + 1``.
    """

    params: ProblemParams
    pre: np.ndarray  # b_n, reduced
    post: np.ndarray  # a_n, reduced
    theta: np.ndarray  # theta(b_n)
    p_top: np.ndarray  # termination probability at iteration n

    def __len__(self):
        return len(self.pre)

    @property
    def unwrapped_post(self) -> np.ndarray:
        """``a_n`` without reduction, built from increments ``2*alpha - theta``."""
        return self.params.alpha + np.cumsum(2.0 * self.params.alpha - self.theta)

    @property
    def unwrapped_pre(self) -> np.ndarray:
        post = self.unwrapped_post
        prev = np.concatenate(([self.params.alpha], post[:-1]))
        return prev + 2.0 * self.params.alpha

    @property
    def active(self) -> np.ndarray:
        return is_active(self.pre)


def bot_trajectory(params: ProblemParams, steps: int, a_start: float | None = None) -> BotTrajectory:
    """Iterate the all-"bot" recurrence for ``steps`` iterations.

    Uses the same scalar primitives as :func:`recurrence_step`, so the
    angles agree bit for bit with a step-by-step run.
    """
    a = params.alpha if a_start is None else reduce_angle(a_start)
    pre = np.empty(steps)
    post = np.empty(steps)
    theta = np.empty(steps)
    p_top = np.empty(steps)
    alpha, kappa = params.alpha, params.kappa
    for i in range(steps):
        b = grover_rotation(a, alpha, 1)
        a = post_bot_angle(b, params)
        pre[i] = b
        post[i] = a
        p_top[i] = top_probability(b, kappa)
        theta[i] = _wrap_pi(b - a)
    return BotTrajectory(params, pre, post, theta, p_top)


def theta_offset_array(a, params: ProblemParams) -> np.ndarray:
    """Vectorised :func:`theta_offset` for a grid of angles."""
    a = np.mod(np.asarray(a, dtype=float), TWO_PI)
    post = np.mod(np.arctan2(params.xi * np.sin(a), np.cos(a)), TWO_PI)
    d = a - post
    return np.where(d > np.pi, d - TWO_PI, np.where(d <= -np.pi, d + TWO_PI, d))
