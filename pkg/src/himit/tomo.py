"""Quantum process tomography in the Pauli basis.

The process matrix ``chi`` is defined by
``E(rho) = sum_{mn} chi_{mn} P_m rho P_n^dagger`` with Paulis ordered
lexicographically (``I < X < Y < Z`` per qubit, qubit 0 most significant).
Trace-preserving channels have ``Tr chi = 1``.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import sqrtm

from .densim import DensityMatrix, KrausChannel, UnitaryGate, pauli_matrix, sample_counts, expectation_from_counts
from .errors import InputError
from .seeding import derive_seed

MAX_EXACT_QUBITS = 3
MAX_SAMPLED_QUBITS = 2


def pauli_labels(n_qubits: int) -> list[str]:
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n_qubits)]


def _pauli_stack(n_qubits: int) -> np.ndarray:
    return np.array([pauli_matrix(p) for p in pauli_labels(n_qubits)])


@dataclass(frozen=True, eq=False)
class ChiMatrix:
    n_qubits: int
    data: np.ndarray
    physical: bool = True

    def __post_init__(self):
        k = 4**self.n_qubits
        arr = np.asarray(self.data, dtype=complex)
        if arr.shape != (k, k):
            raise InputError(f"chi for {self.n_qubits} qubits must be {k}x{k}")
        object.__setattr__(self, "data", arr)

    @property
    def labels(self) -> list[str]:
        return pauli_labels(self.n_qubits)

    def entry(self, row: str, col: str) -> complex:
        labels = self.labels
        return complex(self.data[labels.index(row), labels.index(col)])

    def trace_preservation_error(self) -> float:
        p = _pauli_stack(self.n_qubits)
        total = np.einsum("mn,nba,mbc->ac", self.data, p.conj(), p)
        return float(np.max(np.abs(total - np.eye(2**self.n_qubits))))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def to_csv(self, path) -> None:
        labels = self.labels
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row_pauli", "col_pauli", "re", "im"])
            for i, r in enumerate(labels):
                for j, c in enumerate(labels):
                    v = self.data[i, j]
                    w.writerow([r, c, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path) -> "ChiMatrix":
        rows = list(csv.DictReader(open(path)))
        k = int(round(np.sqrt(len(rows))))
        n = int(round(np.log(k) / np.log(4)))
        labels = pauli_labels(n)
        data = np.zeros((k, k), dtype=complex)
        for r in rows:
            data[labels.index(r["row_pauli"]), labels.index(r["col_pauli"])] = float(r["re"]) + 1j * float(r["im"])
        return cls(n, data)


@dataclass
class ChiComparison:
    real_max_diff: float
    imag_max_diff: float
    threshold: float
    significant_entries: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "real_max_diff": self.real_max_diff,
            "imag_max_diff": self.imag_max_diff,
            "threshold": self.threshold,
            "significant_entries": [
                {"row": r, "col": c, "re": v.real, "im": v.imag} for (r, c), v in self.significant_entries
            ],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def chi_from_superop(superop: np.ndarray, n_qubits: int) -> np.ndarray:
    """chi from a column-stacking Liouville matrix.

    ``vec(P_m rho P_n^dagger) = (conj(P_n) (x) P_m) vec(rho)`` and these
    operators are orthogonal with norm ``d^2``, so chi is a projection.
    """
    d = 2**n_qubits
    p = _pauli_stack(n_qubits)
    s4 = superop.reshape(d, d, d, d)  # kron(A, B)[(a,c),(b,d)] = A[a,b] B[c,d]
    return np.einsum("nab,mcd,acbd->mn", p, p.conj(), s4, optimize=True) / d**2


def chi_from_kraus(operators) -> np.ndarray:
    """chi via the Pauli expansion of each Kraus operator."""
    ops = list(operators)
    d = ops[0].shape[0]
    n = d.bit_length() - 1
    p = _pauli_stack(n)
    coeffs = np.array([[np.trace(pm.conj().T @ k) / d for pm in p] for k in ops])
    return coeffs.T @ coeffs.conj()


def _as_callable(channel, n_qubits: int) -> Callable[[np.ndarray], np.ndarray]:
    d = 2**n_qubits
    if isinstance(channel, UnitaryGate):
        channel = channel.matrix
    if isinstance(channel, np.ndarray):
        u = channel
        if u.shape != (d, d):
            raise InputError(f"unitary has shape {u.shape}, expected {(d, d)}")
        return lambda rho: u @ rho @ u.conj().T
    if isinstance(channel, KrausChannel):
        if channel.dim != d:
            raise InputError("channel dimension does not match n_qubits")
        ops = channel.operators
        return lambda rho: sum(k @ rho @ k.conj().T for k in ops)
    if hasattr(channel, "channel") and hasattr(channel, "n_qubits"):
        if channel.n_qubits != n_qubits:
            raise InputError("circuit size does not match n_qubits")
        return channel.channel()
    if callable(channel):
        return channel
    raise InputError(f"cannot interpret {type(channel).__name__} as a channel")


def superoperator_of(channel, n_qubits: int) -> np.ndarray:
    d = 2**n_qubits
    fn = _as_callable(channel, n_qubits)
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            out = np.asarray(fn(e))
            if out.shape != (d, d):
                raise InputError(f"channel returned shape {out.shape}, expected {(d, d)}")
            s[:, i + j * d] = out.reshape(-1, order="F")
    return s


def chi_exact(channel, n_qubits: int) -> ChiMatrix:
    """Exact chi of a unitary, Kraus channel, noisy circuit, or array map."""
    if not 1 <= n_qubits <= MAX_EXACT_QUBITS:
        raise InputError(f"exact tomography supports 1..{MAX_EXACT_QUBITS} qubits")
    return ChiMatrix(n_qubits, chi_from_superop(superoperator_of(channel, n_qubits), n_qubits))


_INPUT_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "r": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}


def _input_density(labels: tuple[str, ...]) -> np.ndarray:
    psi = np.ones(1, dtype=complex)
    for l in labels:
        psi = np.kron(psi, _INPUT_STATES[l])
    return np.outer(psi, psi.conj())


def chi_sampled(channel, n_qubits: int, shots_per_setting: int | None, seed=0) -> ChiMatrix:
    """Linear-inversion QPT from simulated measurement counts.

    Inputs are all products of ``|0>, |1>, |+>, |+i>``; each output is
    measured in all ``3**n`` product Pauli bases with ``shots_per_setting``
    shots, and every Pauli expectation is averaged over the compatible
    bases. ``shots_per_setting=None`` uses exact expectations (the
    infinite-shot limit). The result is not projected onto physical
    channels; ``physical`` flags a negative chi eigenvalue.
    """
    if not 1 <= n_qubits <= MAX_SAMPLED_QUBITS:
        raise InputError(f"sampled tomography supports 1..{MAX_SAMPLED_QUBITS} qubits")
    d = 2**n_qubits
    fn = _as_callable(channel, n_qubits)
    paulis = pauli_labels(n_qubits)
    settings = ["".join(s) for s in itertools.product("XYZ", repeat=n_qubits)]
    inputs = list(itertools.product("01+r", repeat=n_qubits))
    r_in = np.zeros((d * d, len(inputs)), dtype=complex)
    r_out = np.zeros_like(r_in)
    for k, labels in enumerate(inputs):
        rho_in = _input_density(labels)
        rho_out = np.asarray(fn(rho_in))
        r_in[:, k] = rho_in.reshape(-1, order="F")
        if shots_per_setting is None:
            est = {p: np.real(np.trace(pauli_matrix(p) @ rho_out)) for p in paulis[1:]}
        else:
            state = DensityMatrix(n_qubits, (rho_out + rho_out.conj().T) / 2)
            sums = dict.fromkeys(paulis[1:], 0.0)
            hits = dict.fromkeys(paulis[1:], 0)
            for s_idx, setting in enumerate(settings):
                counts = sample_counts(state, setting, shots_per_setting, derive_seed(seed, k, s_idx))
                for p in paulis[1:]:
                    if all(c == "I" or c == b for c, b in zip(p, setting)):
                        sums[p] += expectation_from_counts(counts, p)
                        hits[p] += 1
            est = {p: sums[p] / hits[p] for p in paulis[1:]}
        rho_est = np.eye(d, dtype=complex) / d
        for p, v in est.items():
            rho_est = rho_est + v * pauli_matrix(p) / d
        r_out[:, k] = rho_est.reshape(-1, order="F")
    superop = r_out @ np.linalg.inv(r_in)
    chi = chi_from_superop(superop, n_qubits)
    physical = bool(np.linalg.eigvalsh((chi + chi.conj().T) / 2)[0] >= -1e-10)
    return ChiMatrix(n_qubits, chi, physical=physical)


def compare_chi(a: ChiMatrix, b: ChiMatrix, shots: int) -> ChiComparison:
    """Entrywise differences; entries beyond ``1/sqrt(shots)`` are significant."""
    if a.data.shape != b.data.shape:
        raise InputError("chi matrices differ in size")
    diff = a.data - b.data
    threshold = 1.0 / np.sqrt(shots)
    labels = a.labels
    significant = [
        ((labels[i], labels[j]), complex(diff[i, j]))
        for i, j in zip(*np.nonzero(np.abs(diff) > threshold))
    ]
    return ChiComparison(
        real_max_diff=float(np.max(np.abs(diff.real))),
        imag_max_diff=float(np.max(np.abs(diff.imag))),
        threshold=float(threshold),
        significant_entries=significant,
    )


def is_pure(chi: ChiMatrix, tol: float = 1e-8) -> bool:
    m = chi.data
    return abs(np.trace(m @ m) - np.trace(m) ** 2) < tol


def process_fidelity(a: ChiMatrix, b: ChiMatrix) -> float:
    """Process fidelity of ``a`` to the target ``b``.

    For a pure (unitary) target this is ``Tr(chi_a chi_b)``. Otherwise the
    Uhlmann fidelity of the normalised chi matrices is returned.
    """
    if a.data.shape != b.data.shape:
        raise InputError("chi matrices differ in size")
    if is_pure(b):
        f = float(np.real(np.trace(a.data @ b.data)))
    else:
        ra = a.data / np.trace(a.data)
        rb = b.data / np.trace(b.data)
        sa = sqrtm(ra)
        f = float(np.real(np.trace(sqrtm(sa @ rb @ sa))) ** 2)
    return float(min(max(f, 0.0), 1.0))


def average_gate_fidelity(process_fid: float, n_qubits: int) -> float:
    d = 2**n_qubits
    return (d * process_fid + 1) / (d + 1)


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """``|Tr(U^dagger V)|^2 / d^2``."""
    return float(abs(np.trace(u.conj().T @ v)) ** 2 / u.shape[0] ** 2)
