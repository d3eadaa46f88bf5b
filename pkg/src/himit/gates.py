"""Gate library.

Rotations follow ``R_P(theta) = exp(-i theta P / 2)`` for a Pauli ``P``;
the two-qubit ``CR`` gate is the cross-resonance entangler
``exp(-i pi/4 Z (x) X)`` with the first target as the Z (control) side.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj().T
CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}


def pauli_rotation(pauli: np.ndarray, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for an involutory Hermitian ``P``."""
    d = pauli.shape[0]
    return np.cos(theta / 2) * np.eye(d) - 1j * np.sin(theta / 2) * pauli


def rx(theta: float) -> np.ndarray:
    return pauli_rotation(X, theta)


def ry(theta: float) -> np.ndarray:
    return pauli_rotation(Y, theta)


def rz(theta: float) -> np.ndarray:
    return pauli_rotation(Z, theta)


CR = pauli_rotation(np.kron(Z, X), np.pi / 2)

FIXED_GATES = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": H,
    "S": S,
    "SDG": SDG,
    "CX": CX,
    "CZ": CZ,
    "CR": CR,
}

# label -> (Pauli generator, builder); all are exp(-i theta P / 2)
ROTATION_GATES = {
    "RX": (X, rx),
    "RY": (Y, ry),
    "RZ": (Z, rz),
    "RZX": (np.kron(Z, X), lambda t: pauli_rotation(np.kron(Z, X), t)),
}


def is_known(label: str) -> bool:
    return label in FIXED_GATES or label in ROTATION_GATES


def is_rotation(label: str) -> bool:
    return label in ROTATION_GATES


def arity(label: str) -> int:
    if label in FIXED_GATES:
        mat = FIXED_GATES[label]
    elif label in ROTATION_GATES:
        mat = ROTATION_GATES[label][0]
    else:
        raise KeyError(label)
    return int(round(np.log2(mat.shape[0])))


def gate_matrix(label: str, angle: float | None = None) -> np.ndarray:
    """Ideal matrix of ``label``; rotations require ``angle``."""
    if label in FIXED_GATES:
        if angle is not None:
            raise ValueError(f"{label} takes no angle")
        return FIXED_GATES[label]
    if label in ROTATION_GATES:
        if angle is None:
            raise ValueError(f"{label} requires an angle")
        return ROTATION_GATES[label][1](float(angle))
    raise KeyError(f"unknown gate {label!r}")
