"""Circuits and the circuit-to-circuit passes: hidden inverses, Pauli-twirl
randomized compiling, unitary folding, and the CR-based CX compilation.

Ops are listed in time order. A ``GateRef`` with ``inverted=True`` stands for
the hardware inverse of the gate: its ideal matrix is ``U^dagger`` (equal to
``U`` for self-inverse gates) but noise models may treat it differently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gates
from .densim import UnitaryGate, embed_operator
from .errors import ConfigurationError, InputError, UnsupportedGateError, ValidationError


@dataclass(frozen=True)
class GateRef:
    label: str
    targets: tuple[int, ...]
    param_slot: int | None = None
    fixed_angle: float | None = None
    inverted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if not gates.is_known(self.label):
            raise ValidationError(f"unknown gate label {self.label!r}")
        if len(self.targets) != gates.arity(self.label):
            raise ValidationError(f"{self.label} expects {gates.arity(self.label)} targets, got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError(f"duplicate targets in {self.label}{self.targets}")
        has_slot = self.param_slot is not None
        has_angle = self.fixed_angle is not None
        if gates.is_rotation(self.label):
            if has_slot == has_angle:
                raise ValidationError(f"{self.label} needs exactly one of param_slot / fixed_angle")
        elif has_slot or has_angle:
            raise ValidationError(f"{self.label} is not parameterized")

    def angle(self, values: Sequence[float] | None) -> float | None:
        if self.fixed_angle is not None:
            return float(self.fixed_angle)
        if self.param_slot is None:
            return None
        if values is None or self.param_slot >= len(values):
            raise InputError(f"parameter slot {self.param_slot} is unbound")
        return float(values[self.param_slot])

    def matrix(self, values: Sequence[float] | None = None) -> np.ndarray:
        """Ideal matrix, honouring the inversion flag."""
        m = gates.gate_matrix(self.label, self.angle(values))
        return m.conj().T if self.inverted else m

    def to_dict(self) -> dict:
        d: dict = {"label": self.label, "targets": list(self.targets)}
        if self.param_slot is not None:
            d["param_slot"] = self.param_slot
        if self.fixed_angle is not None:
            d["fixed_angle"] = self.fixed_angle
        d["inverted"] = self.inverted
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GateRef":
        return cls(
            label=str(d["label"]).upper(),
            targets=tuple(d["targets"]),
            param_slot=d.get("param_slot"),
            fixed_angle=d.get("fixed_angle"),
            inverted=bool(d.get("inverted", False)),
        )


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateRef, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if any(t >= self.n_qubits or t < 0 for t in op.targets):
                raise ValidationError(f"{op.label}{op.targets} out of range for {self.n_qubits} qubits")

    @property
    def n_params(self) -> int:
        slots = [op.param_slot for op in self.ops if op.param_slot is not None]
        return max(slots) + 1 if slots else 0

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "ops": [op.to_dict() for op in self.ops]}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["n_qubits"]), tuple(GateRef.from_dict(o) for o in d["ops"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Circuit":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ParamBinding:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def covers(self, circuit: Circuit) -> bool:
        return circuit.n_params <= len(self.values)


def _values(binding) -> tuple[float, ...] | None:
    if binding is None:
        return None
    if isinstance(binding, ParamBinding):
        return binding.values
    return tuple(float(v) for v in binding)


def circuit_unitary(c: Circuit, binding: ParamBinding | Sequence[float] | None = None) -> UnitaryGate:
    """Ideal ``2**n`` unitary of the whole circuit."""
    values = _values(binding)
    if c.n_params and (values is None or len(values) < c.n_params):
        raise InputError(f"circuit has {c.n_params} parameter slots; binding covers {0 if values is None else len(values)}")
    u = np.eye(2**c.n_qubits, dtype=complex)
    for op in c.ops:
        u = embed_operator(op.matrix(values), op.targets, c.n_qubits) @ u
    return UnitaryGate("circuit", u)


def phase_invariant_overlap(a: np.ndarray, b: np.ndarray) -> float:
    """``|Tr(a^dagger b)| / d``; equals 1 iff ``a = e^{i phi} b`` for unitaries."""
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


# --------------------------------------------------------------------------
# hidden inverses


def hidden_inverse_pass(
    c: Circuit,
    angle_threshold: float | None = None,
    binding: ParamBinding | Sequence[float] | None = None,
) -> Circuit:
    """Invert every second CX on each (control, target) pair.

    With ``angle_threshold`` the substitution for a pair is skipped when a
    parameterized rotation on either qubit of the pair, sitting between the
    two CXs, has ``|angle| > angle_threshold`` for ``binding``; the later CX
    then opens a new pair.
    """
    values = _values(binding)
    if angle_threshold is not None and values is None:
        raise ConfigurationError("angle_threshold requires a parameter binding")
    open_pair: dict[tuple[int, int], bool] = {}  # pair -> blocked since opened
    out = []
    for op in c.ops:
        if op.label == "CX":
            key = op.targets
            if key in open_pair and not open_pair[key]:
                out.append(replace(op, inverted=True))
                del open_pair[key]
            else:
                out.append(replace(op, inverted=False))
                open_pair[key] = False
            continue
        out.append(op)
        if angle_threshold is not None and op.param_slot is not None:
            if abs(op.angle(values)) > angle_threshold:
                for key in open_pair:
                    if set(key) & set(op.targets):
                        open_pair[key] = True
    return Circuit(c.n_qubits, tuple(out))


# --------------------------------------------------------------------------
# randomized compiling

PAULI_LETTERS = "IXYZ"
_TO_SYMPLECTIC = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_FROM_SYMPLECTIC = {v: k for k, v in _TO_SYMPLECTIC.items()}


def cx_conjugate(p: str, q: str) -> tuple[str, str]:
    """Pauli pair ``P'Q'`` with ``CX (P (x) Q) CX = +-P'(x)Q'`` (control first)."""
    xc, zc = _TO_SYMPLECTIC[p]
    xt, zt = _TO_SYMPLECTIC[q]
    xt ^= xc
    zc ^= zt
    return _FROM_SYMPLECTIC[(xc, zc)], _FROM_SYMPLECTIC[(xt, zt)]


def twirl(c: Circuit, draws: Sequence[tuple[str, str]]) -> Circuit:
    """Twirl each CX of ``c`` with the given Pauli pairs, one per CX in order."""
    cx_count = sum(op.label == "CX" for op in c.ops)
    if len(draws) != cx_count:
        raise InputError(f"need {cx_count} Pauli pairs, got {len(draws)}")
    out = []
    it = iter(draws)
    for op in c.ops:
        if len(op.targets) >= 2 and op.label != "CX":
            raise UnsupportedGateError(f"randomized compiling supports only CX two-qubit gates, found {op.label}")
        if op.label != "CX":
            out.append(op)
            continue
        p, q = next(it)
        ctl, tgt = op.targets
        for letter, qubit in ((p, ctl), (q, tgt)):
            if letter != "I":
                out.append(GateRef(letter, (qubit,)))
        out.append(op)
        pc, qc = cx_conjugate(p, q)
        for letter, qubit in ((pc, ctl), (qc, tgt)):
            if letter != "I":
                out.append(GateRef(letter, (qubit,)))
    return Circuit(c.n_qubits, tuple(out))


def randomized_compile(c: Circuit, seed) -> Circuit:
    """One Pauli-twirled instance of ``c`` with uniform independent pairs per CX."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for op in c.ops:
        if len(op.targets) >= 2 and op.label != "CX":
            raise UnsupportedGateError(f"randomized compiling supports only CX two-qubit gates, found {op.label}")
    n_cx = sum(op.label == "CX" for op in c.ops)
    idx = rng.integers(0, 16, size=n_cx)
    draws = [(PAULI_LETTERS[i // 4], PAULI_LETTERS[i % 4]) for i in idx]
    return twirl(c, draws)


# --------------------------------------------------------------------------
# unitary folding and CR compilation

FOLD_VARIANTS = ("default", "inverse")


def fold(gate_label: str = "CX", n: int = 0, variant: str = "default") -> Circuit:
    """``G U^n`` on two qubits with ``U = G G`` (default) or ``G^-1 G`` (inverse)."""
    if n < 0:
        raise InputError("fold count must be >= 0")
    if variant not in FOLD_VARIANTS:
        raise InputError(f"variant must be one of {FOLD_VARIANTS}")
    label = gate_label.upper()
    m = gates.gate_matrix(label)
    if np.max(np.abs(m @ m - np.eye(m.shape[0]))) > 1e-12:
        raise UnsupportedGateError(f"{label} is not self-inverse")
    targets = tuple(range(gates.arity(label)))
    g = GateRef(label, targets)
    block = [GateRef(label, targets, inverted=variant == "inverse"), g]
    return Circuit(len(targets), (g,) + tuple(block) * n)


def cx_from_cr() -> Circuit:
    """CX as ``CR`` followed by ``[ZI]_{-pi/2}`` and ``[IX]_{-pi/2}`` (equal up to phase)."""
    return Circuit(
        2,
        (
            GateRef("CR", (0, 1)),
            GateRef("RZ", (0,), fixed_angle=-np.pi / 2),
            GateRef("RX", (1,), fixed_angle=-np.pi / 2),
        ),
    )


def fold_gates(c: Circuit, n: int, variant: str = "default", label: str = "CX") -> Circuit:
    """Replace every ``label`` gate of ``c`` by its folded form ``G U^n``."""
    if n < 0:
        raise InputError("fold count must be >= 0")
    if variant not in FOLD_VARIANTS:
        raise InputError(f"variant must be one of {FOLD_VARIANTS}")
    out = []
    for op in c.ops:
        if op.label != label:
            out.append(op)
            continue
        g = replace(op, inverted=False)
        block = [replace(op, inverted=variant == "inverse"), g]
        out.extend([g] + block * n)
    return Circuit(c.n_qubits, tuple(out))
