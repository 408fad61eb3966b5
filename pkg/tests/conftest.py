import numpy as np
import pytest

from adaptgf.exact import ExactSolver, half_filling_sector, sector_indices
from adaptgf.lattice import HubbardSpec, QubitLayout, build_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n_qubits):
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def hubbard2():
    """N=2, U=4 at half filling: (spec, layout, H, solver, ground state)."""
    spec = HubbardSpec(2, 1.0, 4.0)
    layout = QubitLayout(2)
    H = build_hamiltonian(spec, layout)
    solver = ExactSolver(H)
    gs = solver.ground_state(sector_indices(layout, *half_filling_sector(layout)))
    return spec, layout, H, solver, gs


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; all lines are repeated in the terminal summary."""

    def _report(number: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
