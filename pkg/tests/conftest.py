import numpy as np
import pytest

from flexsynth import LoadSpec, build_modal_system, compute_modes, simulate
from flexsynth.config import InitialConditions, SimulationConfig


def run_flexible(model, n_flex, dt, t_end, loads=None, initial=None, zeta=0.0,
                 markers=("P1", "P2", "P3")):
    """Flexible run with rigid modes undamped and ``zeta`` on every flexible mode."""
    basis = compute_modes(model, n_flex)
    damping = np.r_[np.zeros(basis.n_rigid), np.full(n_flex, zeta)]
    system = build_modal_system(model, basis, damping)
    cfg = SimulationConfig(dt=dt, t_end=t_end, markers=tuple(markers),
                           loads=loads or LoadSpec(), initial=initial or InitialConditions())
    return simulate(model, system, cfg), system


@pytest.fixture
def flexible_run():
    return run_flexible


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; it is printed again in the terminal summary."""
    def emit(number, title, passed, detail):
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
