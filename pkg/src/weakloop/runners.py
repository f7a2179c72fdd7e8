"""End-to-end trials of the three search loops.

``weak``          the weakly measured while loop (halts on a "top" probe outcome)
``test_restart``  geometric number of Grover iterations, measure, restart
``standard``      floor(pi / (4 alpha)) iterations, measure, restart

Each trial owns a ``numpy.random.Generator``. The angle and statevector
backends draw the same uniforms in the same order, so a shared seed makes
them take identical decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import statevector as sv
from .errors import CappedRunError, ConfigurationError, DomainError
from .geometry import ProblemParams, bot_trajectory

ALGORITHMS = ("weak", "test_restart", "standard")
BACKENDS = ("angle", "statevector")
DEFAULT_MAX_ITERATIONS = {"angle": 10**9, "statevector": 10**6}
_BLOCK = 4096


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Generator for one trial, keyed by ``(seed, trial)``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class RunConfig:
    """Everything a single trial needs apart from its random stream."""

    params: ProblemParams
    backend: str = "angle"
    max_iterations: int | None = None
    seed: int = 0
    oracle: sv.MarkedOracle | None = None
    prep: sv.Preparation | None = None
    # test-restart only: count the measurement of |psi> before the first attempt
    include_initial_measurement: bool = True
    # test-restart only: draw the attempt length one uniform per step
    per_step_geometric: bool = False

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.max_iterations is None:
            object.__setattr__(self, "max_iterations", DEFAULT_MAX_ITERATIONS[self.backend])
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be at least 1")
        if self.backend == "statevector":
            if self.oracle is None:
                raise ConfigurationError("statevector backend needs a MarkedOracle")
            if self.prep is None:
                object.__setattr__(self, "prep", sv.Preparation.uniform(self.oracle.n))
            rho = self.prep.rho(self.oracle)
            if rho == 0.0:
                raise ConfigurationError("preparation has zero overlap with the marked subspace")
            if not math.isclose(rho, self.params.rho, rel_tol=1e-12, abs_tol=1e-15):
                raise ConfigurationError(
                    f"params.rho={self.params.rho} disagrees with the instance ({rho})")

    @classmethod
    def statevector(cls, n: int, marked, kappa: float | None = None, **kw) -> "RunConfig":
        """Uniform preparation over ``n`` elements with the given marked set."""
        oracle = sv.MarkedOracle(n, frozenset(marked))
        prep = sv.Preparation.uniform(n)
        params = ProblemParams(prep.rho(oracle), kappa)
        return cls(params, backend="statevector", oracle=oracle, prep=prep, **kw)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


@dataclass
class TrialRecord:
    iterations: int
    oracle_calls: int
    success: bool
    algorithm: str
    backend: str
    restarts: int = 0
    classical_checks: int = 0
    element: int | None = None
    trajectory: list[float] | None = field(default=None, repr=False)


# -- the all-bot trajectory, shared by every weak trial with the same params --

class _WeakTable:
    """Lazily extended all-bot trajectory with cumulative active counts."""

    def __init__(self, params: ProblemParams):
        self.params = params
        self.p_top = np.empty(0)
        self.post = np.empty(0)
        self.cum_active = np.empty(0, dtype=np.int64)

    def ensure(self, length: int) -> None:
        if len(self.p_top) >= length:
            return
        grow = max(length - len(self.p_top), len(self.p_top), _BLOCK)
        start = self.post[-1] if len(self.post) else None
        chunk = bot_trajectory(self.params, grow, a_start=start)
        self.p_top = np.concatenate((self.p_top, chunk.p_top))
        self.post = np.concatenate((self.post, chunk.post))
        base = self.cum_active[-1] if len(self.cum_active) else 0
        self.cum_active = np.concatenate((self.cum_active, base + np.cumsum(chunk.active)))


@lru_cache(maxsize=32)
def _weak_table(params: ProblemParams) -> _WeakTable:
    return _WeakTable(params)


def active_iterations_before(params: ProblemParams, iterations) -> np.ndarray:
    """Number of active iterations among ``1 .. N`` for each ``N`` given."""
    it = np.asarray(iterations, dtype=np.int64)
    table = _weak_table(params)
    if it.size:
        table.ensure(int(it.max()))
    out = np.zeros(it.shape, dtype=np.int64)
    pos = it > 0
    out[pos] = table.cum_active[it[pos] - 1]
    return out


# -- weak measurement loop --

def _capped(record: TrialRecord, cap: int) -> CappedRunError:
    return CappedRunError(f"no success within max_iterations={cap}", record=record)


def run_weak(config: RunConfig, rng: np.random.Generator | None = None,
             record_trajectory: bool = False) -> TrialRecord:
    """Run the weakly measured while loop until the probe reads "top".

    With ``record_trajectory`` the record carries the post-measurement angle
    of every iteration that read "bot" (so ``iterations - 1`` entries).
    """
    rng = trial_rng(config.seed) if rng is None else rng
    if config.backend == "statevector":
        return _run_weak_statevector(config, rng, record_trajectory)
    return _run_weak_angle(config, rng, record_trajectory)


def _run_weak_angle(config, rng, record_trajectory):
    params, cap = config.params, config.max_iterations
    if params.kappa == 0.0:
        # p_top is identically zero; the loop can only run into the cap
        rec = TrialRecord(cap, 2 * cap, False, "weak", "angle")
        raise _capped(rec, cap)
    table = _weak_table(params)
    done = 0
    while done < cap:
        m = min(_BLOCK, cap - done)
        table.ensure(done + m)
        u = rng.random(m)
        hits = np.flatnonzero(u < table.p_top[done:done + m])
        if hits.size:
            n = done + int(hits[0]) + 1
            traj = None
            if record_trajectory:
                traj = table.post[:n - 1].tolist()
            return TrialRecord(n, 2 * n, True, "weak", "angle", trajectory=traj)
        done += m
    rec = TrialRecord(cap, 2 * cap, False, "weak", "angle")
    raise _capped(rec, cap)


def _run_weak_statevector(config, rng, record_trajectory):
    oracle, prep, kappa = config.oracle, config.prep, config.params.kappa
    state = sv.prepare(oracle, prep)
    traj = [] if record_trajectory else None
    for n in range(1, config.max_iterations + 1):
        state = sv.grover_iteration(state, oracle, prep)
        state = sv.apply_weak_entangler(state, oracle, kappa)
        outcome, state = sv.measure_probe(state, rng.random())
        if outcome == sv.TOP:
            element, marked = sv.measure_computational(state, oracle, rng.random())
            return TrialRecord(n, state.oracle_calls, marked, "weak", "statevector",
                               element=element, trajectory=traj)
        if record_trajectory:
            traj.append(sv.extract_angle(state, oracle, prep))
    rec = TrialRecord(config.max_iterations, state.oracle_calls, False, "weak", "statevector",
                      trajectory=traj)
    raise _capped(rec, config.max_iterations)


# -- classical restart loops --

def attempt_success_probability(k: int, alpha: float) -> float:
    """Chance that measuring after ``k`` Grover iterations finds a marked element."""
    return math.sin((2 * k + 1) * alpha) ** 2


def standard_iteration_count(alpha: float) -> int:
    """``floor(pi / (4 alpha))``."""
    if not 0.0 < alpha <= math.pi / 2:
        raise DomainError(f"alpha must lie in (0, pi/2], got {alpha!r}")
    return math.floor(math.pi / (4.0 * alpha))


def standard_success_probability(params: ProblemParams) -> float:
    return attempt_success_probability(standard_iteration_count(params.alpha), params.alpha)


def _draw_attempt_length(config: RunConfig, rng) -> int:
    s = math.sqrt(config.params.rho)
    if not config.per_step_geometric:
        return int(rng.geometric(s))
    r, k = 1.0, 0
    while s < r:
        r = rng.random()
        k += 1
    return k


class _Attempts:
    """Bookkeeping shared by the two restart loops on either backend."""

    def __init__(self, config: RunConfig, algorithm: str):
        self.config = config
        self.rec = TrialRecord(0, 0, False, algorithm, config.backend)
        if config.backend == "statevector":
            self.start = sv.prepare(config.oracle, config.prep)

    def measure(self, k: int, rng) -> bool:
        """Run one attempt of ``k`` iterations from the initial state, then measure."""
        cfg, rec = self.config, self.rec
        if rec.iterations + k > cfg.max_iterations:
            rec.iterations = cfg.max_iterations
            raise _capped(rec, cfg.max_iterations)
        rec.iterations += k
        rec.oracle_calls += k
        rec.classical_checks += 1
        u = rng.random()
        if cfg.backend == "angle":
            ok = u < attempt_success_probability(k, cfg.params.alpha)
        else:
            state = self.start
            for _ in range(k):
                state = sv.grover_iteration(state, cfg.oracle, cfg.prep)
            rec.element, ok = sv.measure_computational(state, cfg.oracle, u)
        rec.success = ok
        return ok


def run_test_restart(config: RunConfig, rng: np.random.Generator | None = None) -> TrialRecord:
    """Test-restart loop; ``iterations`` is the total number of Grover iterations."""
    rng = trial_rng(config.seed) if rng is None else rng
    att = _Attempts(config, "test_restart")
    if config.include_initial_measurement and att.measure(0, rng):
        return att.rec
    while True:
        if att.measure(_draw_attempt_length(config, rng), rng):
            return att.rec
        att.rec.restarts += 1


def run_standard(config: RunConfig, rng: np.random.Generator | None = None) -> TrialRecord:
    """Standard amplitude amplification, repeated until a marked element is found."""
    rng = trial_rng(config.seed) if rng is None else rng
    att = _Attempts(config, "standard")
    m = standard_iteration_count(config.params.alpha)
    while not att.measure(m, rng):
        att.rec.restarts += 1
    return att.rec


RUNNERS = {"weak": run_weak, "test_restart": run_test_restart, "standard": run_standard}


def get_runner(algorithm: str):
    key = algorithm.replace("-", "_")
    if key not in RUNNERS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    return RUNNERS[key]
