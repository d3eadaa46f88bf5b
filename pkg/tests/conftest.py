import numpy as np
import pytest

from himit import densim


@pytest.fixture(autouse=True)
def strict_invariants(monkeypatch):
    # every DensityMatrix produced by an operation is checked in tests
    monkeypatch.setattr(densim, "STRICT", True)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    d = 2**n_qubits
    k = rank or d
    a = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int, n_params: int = 3):
    """CX / H / rotation circuit; about a third of the gates are CX."""
    from himit.transforms import Circuit, GateRef

    ops = []
    for _ in range(n_gates):
        kind = rng.integers(6)
        if n_qubits > 1 and kind < 2:
            a, b = rng.choice(n_qubits, 2, replace=False)
            ops.append(GateRef("CX", (int(a), int(b))))
        elif kind == 2:
            ops.append(GateRef("H", (int(rng.integers(n_qubits)),)))
        else:
            label = ("RX", "RY", "RZ")[kind - 3]
            q = (int(rng.integers(n_qubits)),)
            if rng.random() < 0.5:
                ops.append(GateRef(label, q, param_slot=int(rng.integers(n_params))))
            else:
                ops.append(GateRef(label, q, fixed_angle=float(rng.uniform(-np.pi, np.pi))))
    return Circuit(n_qubits, tuple(ops))


# acceptance criteria report: (number, passed, detail); printed after the run
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
