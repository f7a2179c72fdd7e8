"""Dense simulation of the search register H tensored with a probe qubit.

Amplitudes are stored as an ``(n, 2)`` complex array indexed by
``(basis element, probe)`` with probe column 0 = bot and 1 = top. Every
operation returns a new :class:`JointState`; the input is left untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ConsistencyError, DomainError
from .geometry import reduce_angle

BOT, TOP = 0, 1
MAX_DIMENSION = 2**20
PLANE_TOL = 1e-9


@dataclass(frozen=True)
class MarkedOracle:
    """Search space of size ``n`` with a set of marked basis indices."""

    n: int
    marked: frozenset

    def __post_init__(self):
        marked = frozenset(int(m) for m in self.marked)
        object.__setattr__(self, "marked", marked)
        if not 0 < self.n <= MAX_DIMENSION:
            raise ConfigurationError(f"n must lie in [1, {MAX_DIMENSION}], got {self.n}")
        if not 0 < len(marked) < self.n:
            raise ConfigurationError("need at least one marked and one unmarked element")
        if min(marked) < 0 or max(marked) >= self.n:
            raise ConfigurationError(f"marked indices must lie in [0, {self.n})")

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[sorted(self.marked)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def search_order(self) -> np.ndarray:
        """Marked indices, then unmarked, each ascending."""
        idx = np.arange(self.n)
        order = np.concatenate((idx[self.mask], idx[~self.mask]))
        order.setflags(write=False)
        return order

    def chi(self, b: int) -> int:
        return int(b in self.marked)

    @property
    def rho_implied(self) -> float:
        return len(self.marked) / self.n


@dataclass(frozen=True, eq=False)
class Preparation:
    """The initial state ``A|0>`` on H, either uniform or an explicit vector."""

    initial: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        v = np.asarray(self.initial, dtype=complex).ravel().copy()
        norm = np.linalg.norm(v)
        if not math.isclose(norm, 1.0, abs_tol=1e-12):
            raise ConfigurationError(f"preparation must have unit norm, got {norm}")
        v.setflags(write=False)
        object.__setattr__(self, "initial", v)

    @classmethod
    def uniform(cls, n: int) -> "Preparation":
        return cls(np.full(n, 1.0 / math.sqrt(n)), kind="uniform")

    @classmethod
    def explicit(cls, vector) -> "Preparation":
        return cls(vector, kind="explicit")

    def rho(self, oracle: MarkedOracle) -> float:
        return float(np.sum(np.abs(self.initial[oracle.mask]) ** 2))

    def plane(self, oracle: MarkedOracle) -> tuple[np.ndarray, np.ndarray]:
        """Normalised projections ``(psi0, psi1)`` onto unmarked / marked."""
        mask = oracle.mask
        psi0 = np.where(mask, 0, self.initial)
        psi1 = np.where(mask, self.initial, 0)
        n0, n1 = np.linalg.norm(psi0), np.linalg.norm(psi1)
        if n1 == 0.0:
            raise ConfigurationError("preparation has zero overlap with the marked subspace")
        psi0 = psi0 / n0 if n0 > 0 else psi0
        return psi0, psi1 / n1


@dataclass(frozen=True, eq=False)
class JointState:
    amplitudes: np.ndarray
    oracle_calls: int = field(default=0)

    @property
    def vector(self) -> np.ndarray:
        """Flat length-``2n`` view, index ``2*b + q``."""
        return self.amplitudes.reshape(-1)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    def probe_mass(self, q: int) -> float:
        col = self.amplitudes[:, q]
        return float(np.vdot(col, col).real)

    def _replace(self, amplitudes, extra_calls=0) -> "JointState":
        return JointState(amplitudes, self.oracle_calls + extra_calls)


def prepare(oracle: MarkedOracle, prep: Preparation) -> JointState:
    """Return ``|psi> (x) |bot>``."""
    if len(prep.initial) != oracle.n:
        raise ConfigurationError("preparation and oracle dimensions differ")
    if prep.rho(oracle) == 0.0:
        raise ConfigurationError("preparation has zero overlap with the marked subspace")
    amps = np.zeros((oracle.n, 2), dtype=complex)
    amps[:, BOT] = prep.initial
    return JointState(amps)


def apply_oracle_phase(state: JointState, oracle: MarkedOracle) -> JointState:
    """Flip the sign of marked amplitudes. Counts one oracle call."""
    amps = state.amplitudes.copy()
    amps[oracle.mask] *= -1
    return state._replace(amps, 1)


def apply_reflection_psi(state: JointState, prep: Preparation) -> JointState:
    """Apply ``(2|psi><psi| - I) (x) I`` as a rank-one update."""
    psi = prep.initial
    overlap = psi.conj() @ state.amplitudes  # one coefficient per probe value
    amps = 2.0 * np.outer(psi, overlap) - state.amplitudes
    return state._replace(amps)


def grover_iteration(state: JointState, oracle: MarkedOracle, prep: Preparation) -> JointState:
    return apply_reflection_psi(apply_oracle_phase(state, oracle), prep)


def weak_rotation(kappa: float) -> np.ndarray:
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa must lie in [0, 1], got {kappa!r}")
    c, s = math.sqrt(1.0 - kappa), math.sqrt(kappa)
    return np.array([[c, s], [s, -c]])


def apply_weak_entangler(state: JointState, oracle: MarkedOracle, kappa: float) -> JointState:
    """Rotate the probe of the marked component by ``R_kappa``.

    Unmarked rows are untouched. Counts one oracle call.
    """
    r = weak_rotation(kappa)
    amps = state.amplitudes.copy()
    mask = oracle.mask
    amps[mask] = amps[mask] @ r.T
    return state._replace(amps, 1)


def entangler_matrix(oracle: MarkedOracle, kappa: float) -> np.ndarray:
    """Dense ``2n x 2n`` matrix of the entangler, in the flat index order."""
    r = weak_rotation(kappa)
    blocks = [r if m else np.eye(2) for m in oracle.mask]
    out = np.zeros((2 * oracle.n, 2 * oracle.n))
    for b, blk in enumerate(blocks):
        out[2 * b:2 * b + 2, 2 * b:2 * b + 2] = blk
    return out


def measure_probe(state: JointState, u: float) -> tuple[int, JointState]:
    """Projective probe measurement; outcome TOP iff ``u`` is below the top mass."""
    p_top = state.probe_mass(TOP)
    outcome = TOP if u < p_top else BOT
    p = p_top if outcome == TOP else state.norm_sq - p_top
    amps = np.zeros_like(state.amplitudes)
    amps[:, outcome] = state.amplitudes[:, outcome] / math.sqrt(p)
    return outcome, state._replace(amps)


def measure_computational(state: JointState, oracle: MarkedOracle, u: float) -> tuple[int, bool]:
    """Sample a basis element of H (probe marginalised out).

    The inverse CDF walks the marked elements first, so the outcome is
    marked exactly when ``u`` is below the marked mass; the angle backend
    makes the same decision from the same ``u``.
    """
    order = oracle.search_order
    probs = np.sum(np.abs(state.amplitudes[order]) ** 2, axis=1)
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    # u = 1 (or round-off) runs past the end; never land on a zero-mass element
    i = min(i, int(np.flatnonzero(probs)[-1]))
    b = int(order[i])
    return b, bool(oracle.chi(b))


def marked_mass(state: JointState, oracle: MarkedOracle) -> float:
    return float(np.sum(np.abs(state.amplitudes[oracle.mask]) ** 2))


def extract_angle(state: JointState, oracle: MarkedOracle, prep: Preparation,
                  branch: int | None = None) -> float:
    """Angle of the H-part of one probe branch in the ``(psi0, psi1)`` plane.

    ``branch`` defaults to bot, falling back to top when the bot branch is
    empty. Raises :class:`ConsistencyError` if the branch leaves the plane.
    """
    if branch is None:
        branch = BOT if state.probe_mass(BOT) > 0.0 else TOP
    phi = state.amplitudes[:, branch]
    nrm = np.linalg.norm(phi)
    if nrm == 0.0:
        raise ConsistencyError("selected probe branch is empty")
    phi = phi / nrm
    psi0, psi1 = prep.plane(oracle)
    c0, c1 = np.vdot(psi0, phi), np.vdot(psi1, phi)
    residual = np.linalg.norm(phi - c0 * psi0 - c1 * psi1)
    # coefficients stay real up to a global phase fixed by the preparation
    if residual > PLANE_TOL or abs(c0.imag) > PLANE_TOL or abs(c1.imag) > PLANE_TOL:
        raise ConsistencyError(f"state left the psi0/psi1 plane (residual {residual:.3e})")
    return reduce_angle(math.atan2(c1.real, c0.real))


def out_of_plane(state: JointState, oracle: MarkedOracle, prep: Preparation, branch: int = BOT) -> float:
    phi = state.amplitudes[:, branch]
    psi0, psi1 = prep.plane(oracle)
    return float(np.linalg.norm(phi - np.vdot(psi0, phi) * psi0 - np.vdot(psi1, phi) * psi1))
