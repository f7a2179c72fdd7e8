import math

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def brute_bot_angle(a, kappa):
    """Post-"bot" angle from explicit 4x4 linear algebra on C^2 (x) C^2.

    Basis of the search space: e0 = psi0 (unmarked), e1 = psi1 (marked);
    probe basis (bot, top). Independent of the package code.
    """
    c, s = math.sqrt(1 - kappa), math.sqrt(kappa)
    R = np.array([[c, s], [s, -c]])
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    E = np.kron(P0, np.eye(2)) + np.kron(P1, R)
    bot = np.array([1.0, 0.0])
    phi = np.array([math.cos(a), math.sin(a)])
    joint = E @ np.kron(phi, bot)
    proj = np.kron(np.eye(2), np.outer(bot, bot)) @ joint
    proj /= np.linalg.norm(proj)
    h = proj.reshape(2, 2)[:, 0]
    return math.atan2(h[1], h[0]) % (2 * math.pi)


def theta_tan_form(a, kappa):
    """Back-action angle from the tangent formula, sign flipped in quadrants 2 and 4."""
    xi = math.sqrt(1 - kappa)
    t = math.tan(a)
    val = math.atan((1 - xi) * t / (1 + xi * t * t))
    return val  # tan already carries the quadrant sign


@pytest.fixture
def report():
    def _report(name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
