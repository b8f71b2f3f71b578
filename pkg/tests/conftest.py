import numpy as np
import pytest

from occdmd.dynamics import DUFFING, SPIRAL, integrate_rk4
from occdmd.kernel import KernelParams
from occdmd.operator_core import build_gram_pack
from occdmd.trajectory import QuadratureSpec, Trajectory

ACCEPTANCE_KEY = pytest.StashKey[list]()


def rel_fro(a, b):
    """||a - b||_F / ||b||_F (absolute norm when b vanishes)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nb = np.linalg.norm(b)
    return np.linalg.norm(a - b) / (nb if nb > 0 else 1.0)


def sampled(fn, T, dt=0.01):
    """Trajectory of an analytic curve ``fn(t) -> (len(t), n)`` on a uniform grid."""
    K = int(round(T / dt))
    t = np.arange(K + 1) * dt
    return Trajectory(t, fn(t))


def constant(c, T, samples=11):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return Trajectory(np.linspace(0, T, samples), np.tile(c, (samples, 1)))


@pytest.fixture(scope="session")
def duffing_trajs():
    starts = [(1.5, 0.0), (-0.5, 1.0), (0.3, -2.0)]
    return [integrate_rk4(DUFFING, s, 1.0, 0.01) for s in starts]


@pytest.fixture(scope="session")
def duffing_pack():
    rng = np.random.default_rng(7)
    starts = rng.uniform(-3, 3, size=(30, 2))
    trajs = [integrate_rk4(DUFFING, s, 1.0, 0.01) for s in starts]
    return build_gram_pack(trajs, KernelParams(5.0), KernelParams(5.0), QuadratureSpec("simpson"))


@pytest.fixture(scope="session")
def spiral_pack():
    """Six well-separated spiral trajectories: a small full-rank G_r."""
    angles = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    starts = 2.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    trajs = [integrate_rk4(SPIRAL, s, 0.5, 0.01) for s in starts]
    return build_gram_pack(trajs, KernelParams(1.0), KernelParams(1.0), QuadratureSpec())


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line; all lines are repeated in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append((label, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
