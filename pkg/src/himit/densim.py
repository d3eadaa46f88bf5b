"""Dense density-matrix simulation for small registers.

Ordering convention (used by every module): qubit 0 is the leftmost tensor
factor and the most significant bit of a basis-state index, so ``|q0 q1 ...>``
has index ``int("q0q1...", 2)``.

States are immutable from the caller's view: every operation returns a new
:class:`DensityMatrix`. The ``*_array`` helpers work on raw ndarrays and do
not require positivity, so they also serve to push arbitrary operators
(e.g. ``|i><j|`` when building superoperators) through a circuit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import gates
from .errors import InputError, NumericalConsistencyError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-12
CHANNEL_TP_TOL = 1e-10
IMAG_TOL = 1e-10

# Flipped on by the test-suite: every returned state is checked.
STRICT = False


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    data: np.ndarray

    def __post_init__(self):
        d = 2**self.n_qubits
        arr = np.asarray(self.data, dtype=complex)
        if arr.shape != (d, d):
            raise InputError(f"expected {d}x{d} matrix for {self.n_qubits} qubits, got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def check_invariants(self, psd_tol: float = PSD_TOL) -> None:
        rho = self.data
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"state not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            raise ValidationError(f"state trace {tr} != 1")
        lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
        if lam < -psd_tol:
            raise ValidationError(f"state not PSD (min eigenvalue {lam:.3e})")

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()


def _checked(state: DensityMatrix) -> DensityMatrix:
    if STRICT:
        state.check_invariants()
    return state


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, ``letters[0]`` acting on qubit 0."""

    letters: str

    def __post_init__(self):
        letters = str(self.letters).upper()
        if not letters or set(letters) - set("IXYZ"):
            raise InputError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self.letters)

    def __str__(self) -> str:
        return self.letters


@lru_cache(maxsize=4096)
def _pauli_matrix_cached(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, gates.PAULI_MATRICES[c])
    out.setflags(write=False)
    return out


def pauli_matrix(letters: str) -> np.ndarray:
    return _pauli_matrix_cached(str(letters).upper())


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    label: str
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        d = mat.shape[0]
        if mat.ndim != 2 or mat.shape != (d, d) or d & (d - 1):
            raise ValidationError(f"gate {self.label}: matrix must be square with power-of-two size")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(d)))
        if dev > UNITARY_TOL:
            raise ValidationError(f"gate {self.label} is not unitary (deviation {dev:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def arity(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def dagger(self) -> "UnitaryGate":
        return UnitaryGate(self.label + "_dg", self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops) or d & (d - 1):
            raise ValidationError("Kraus operators must share one square power-of-two shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        dev = self.trace_preservation_error()
        if dev > CHANNEL_TP_TOL:
            raise ValidationError(f"channel is not trace preserving (deviation {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def arity(self) -> int:
        return self.dim.bit_length() - 1

    def trace_preservation_error(self) -> float:
        d = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(d))))


# --------------------------------------------------------------------------
# raw-array kernels


def _check_targets(targets: Sequence[int], n_qubits: int, k: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != k:
        raise InputError(f"operator acts on {k} qubits but {len(targets)} targets given")
    if len(set(targets)) != len(targets):
        raise InputError(f"duplicate targets {targets}")
    if any(t < 0 or t >= n_qubits for t in targets):
        raise InputError(f"targets {targets} out of range for {n_qubits} qubits")
    return targets


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``op`` acting on ``targets`` (in that order)."""
    k = op.shape[0].bit_length() - 1
    targets = _check_targets(targets, n_qubits, k)
    if targets == tuple(range(n_qubits)):
        return np.array(op, dtype=complex)
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # axes of `full` are ordered (targets..., rest...); permute to (0..n-1)
    order = list(targets) + rest
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n_qubits))
    t = t.transpose(list(perm) + [n_qubits + p for p in perm])
    return t.reshape(2**n_qubits, 2**n_qubits)


def apply_kraus_array(rho: np.ndarray, ops: Iterable[np.ndarray]) -> np.ndarray:
    """``sum_i K_i rho K_i^dagger`` for full-dimension operators."""
    out = None
    for k in ops:
        term = k @ rho @ k.conj().T
        out = term if out is None else out + term
    return out


def apply_unitary_array(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


# --------------------------------------------------------------------------
# public operations


def init_state(n_qubits: int, bitstring: str | Sequence[int]) -> DensityMatrix:
    """Computational-basis projector ``|b><b|``."""
    bits = "".join(str(int(b)) for b in bitstring) if not isinstance(bitstring, str) else bitstring
    if len(bits) != n_qubits or set(bits) - {"0", "1"}:
        raise InputError(f"bitstring {bitstring!r} does not describe {n_qubits} qubits")
    d = 2**n_qubits
    rho = np.zeros((d, d), dtype=complex)
    idx = int(bits, 2) if bits else 0
    rho[idx, idx] = 1.0
    return DensityMatrix(n_qubits, rho)


def apply_unitary(rho: DensityMatrix, gate: UnitaryGate | np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    u = gate.matrix if isinstance(gate, UnitaryGate) else UnitaryGate("U", gate).matrix
    full = embed_operator(u, targets, rho.n_qubits)
    return _checked(DensityMatrix(rho.n_qubits, apply_unitary_array(rho.data, full)))


def apply_kraus(rho: DensityMatrix, channel: KrausChannel, targets: Sequence[int]) -> DensityMatrix:
    if not isinstance(channel, KrausChannel):
        channel = KrausChannel(tuple(channel))
    ops = [embed_operator(k, targets, rho.n_qubits) for k in channel.operators]
    out = apply_kraus_array(rho.data, ops)
    drift = abs(np.trace(out) - np.trace(rho.data))
    if drift > CHANNEL_TP_TOL:
        raise ValidationError(f"trace changed by {drift:.3e}")
    return _checked(DensityMatrix(rho.n_qubits, out))


def _as_terms(terms) -> list[tuple[float, PauliString]]:
    out = []
    for coeff, p in terms:
        out.append((float(coeff), p if isinstance(p, PauliString) else PauliString(p)))
    return out


def pauli_expectation_array(rho: np.ndarray, letters: str) -> complex:
    if set(letters) == {"I"}:
        return complex(np.trace(rho))
    return complex(np.einsum("ij,ji->", pauli_matrix(letters), rho))


def expectation_pauli_sum(rho: DensityMatrix, terms) -> float:
    """``sum_j c_j Tr(P_j rho)`` for real coefficients."""
    total = 0j
    for coeff, p in _as_terms(terms):
        if p.n_qubits != rho.n_qubits:
            raise InputError(f"Pauli string {p} does not match {rho.n_qubits} qubits")
        total += coeff * pauli_expectation_array(rho.data, p.letters)
    if abs(total.imag) > IMAG_TOL:
        raise NumericalConsistencyError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


_BASIS_CHANGE = {"X": gates.H, "Y": gates.H @ gates.SDG}


def basis_rotation(basis: PauliString | str) -> np.ndarray:
    """Unitary mapping each requested Pauli to Z (identity for Z and I)."""
    letters = str(basis).upper()
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, _BASIS_CHANGE.get(c, gates.I2))
    return out


def sample_counts(rho: DensityMatrix, basis: PauliString | str, shots: int, seed) -> dict[str, int]:
    """Sample ``shots`` measurements in a product Pauli basis.

    Letters ``I`` are measured in Z; callers ignore those bits. ``seed`` may be
    an int or a :class:`numpy.random.Generator`.
    """
    basis = basis if isinstance(basis, PauliString) else PauliString(basis)
    if basis.n_qubits != rho.n_qubits:
        raise InputError("basis length does not match register")
    shots = int(shots)
    if shots < 1:
        raise InputError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = basis_rotation(basis)
    probs = np.real(np.diag(v @ rho.data @ v.conj().T))
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    n = rho.n_qubits
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c}


def expectation_from_counts(counts: dict[str, int], letters: str) -> float:
    """Empirical ``<P>`` from counts taken in a basis compatible with ``letters``."""
    support = [i for i, c in enumerate(letters) if c != "I"]
    total = 0
    acc = 0
    for bits, c in counts.items():
        parity = sum(bits[i] == "1" for i in support) & 1
        acc += -c if parity else c
        total += c
    return acc / total
