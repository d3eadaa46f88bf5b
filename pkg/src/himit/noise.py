"""Noise channels and their attachment to circuits.

Two families are modelled:

* ``MixedUnitaryNoise`` -- the channel
  ``kappa * U rho U^dagger + (1 - kappa) * (cos^2 e rho + sin^2 e G rho G)``
  with ``U = exp(-i e G)`` for a Hermitian unitary ``G``. Its process
  fidelity does not depend on ``kappa``, so ``kappa`` interpolates between a
  purely coherent and a purely stochastic error of equal strength.
* ``OverRotationNoise`` -- a Pauli-generated rotation ``[P]_{(1+e) theta}``
  realised as the excess ``exp(-i e theta P / 2)``; ``e`` is either fixed
  (systematic) or drawn once per circuit execution (quasi-static).

Attaching a :class:`GateErrorModel` to a circuit yields a
:class:`NoisyCircuit`. With ``inverse_behavior="inverts_with_gate"`` an
inverted gate ``(E U)^-1 = U^-1 E^-1`` carries the inverse error on the
opposite side, which is what lets hidden inverses cancel coherent errors.
For mixed channels the "inverse" flips the sign of the coherent angle; the
stochastic part is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from . import gates
from .densim import (
    DensityMatrix,
    KrausChannel,
    PauliString,
    UnitaryGate,
    apply_kraus_array,
    embed_operator,
    pauli_matrix,
)
from .errors import ConfigurationError, InputError, ValidationError
from .transforms import Circuit, GateRef, _values

SAMPLING_MODES = ("systematic", "quasi_static")
SIDES = ("after", "before")
INVERSE_BEHAVIORS = ("inverts_with_gate", "fixed")


@dataclass(frozen=True, eq=False)
class MixedUnitaryNoise:
    generator: np.ndarray
    epsilon: float
    kappa: float = 1.0

    def __post_init__(self):
        g = self.generator.matrix if isinstance(self.generator, UnitaryGate) else self.generator
        g = np.array(g, dtype=complex)
        d = g.shape[0]
        if g.shape != (d, d):
            raise ValidationError("generator must be square")
        if np.max(np.abs(g - g.conj().T)) > 1e-12:
            raise ValidationError("mixed-unitary generator must be Hermitian")
        if np.max(np.abs(g @ g - np.eye(d))) > 1e-12:
            raise ValidationError("mixed-unitary generator must be unitary (G^2 = I)")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValidationError(f"kappa must lie in [0, 1], got {self.kappa}")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def arity(self) -> int:
        return self.generator.shape[0].bit_length() - 1

    def inverse(self) -> "MixedUnitaryNoise":
        return MixedUnitaryNoise(self.generator, -self.epsilon, self.kappa)


@dataclass(frozen=True)
class OverRotationNoise:
    generator: PauliString = PauliString("ZX")
    base_angle: float = np.pi / 2
    sigma: float = 0.0
    sampling: str = "quasi_static"
    epsilon: float = 0.0  # relative error used in systematic mode

    def __post_init__(self):
        if not isinstance(self.generator, PauliString):
            object.__setattr__(self, "generator", PauliString(self.generator))
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")
        if self.sampling not in SAMPLING_MODES:
            raise ValidationError(f"sampling must be one of {SAMPLING_MODES}")

    @property
    def arity(self) -> int:
        return self.generator.n_qubits


NoiseSpec = Union[MixedUnitaryNoise, OverRotationNoise]


def kraus_of_mixed(spec: MixedUnitaryNoise) -> KrausChannel:
    """Kraus form ``{sqrt(k) e^{-i e G}, sqrt(1-k) cos(e) I, sqrt(1-k) sin(e) G}``.

    Operators with zero weight are dropped.
    """
    g, eps, kappa = spec.generator, spec.epsilon, spec.kappa
    d = g.shape[0]
    eye = np.eye(d, dtype=complex)
    ops = []
    if kappa > 0:
        ops.append(np.sqrt(kappa) * (np.cos(eps) * eye - 1j * np.sin(eps) * g))
    if kappa < 1:
        w = np.sqrt(1 - kappa)
        if np.cos(eps) != 0:
            ops.append(w * np.cos(eps) * eye)
        if np.sin(eps) != 0:
            ops.append(w * np.sin(eps) * g)
    return KrausChannel(tuple(ops))


def process_fidelity_to_identity(channel: KrausChannel) -> float:
    """Entanglement fidelity with the identity, ``sum_i |Tr K_i / d|^2``."""
    d = channel.dim
    return float(sum(abs(np.trace(k) / d) ** 2 for k in channel.operators))


def sample_overrotation(spec: OverRotationNoise, rng=None) -> float:
    """Realised rotation angle ``(1 + e) * base_angle``.

    Systematic mode returns the fixed ``spec.epsilon``; quasi-static mode
    draws ``e ~ N(0, sigma)`` from ``rng`` (an int seed or Generator).
    """
    return (1.0 + _relative_error(spec, rng)) * spec.base_angle


def _relative_error(spec: OverRotationNoise, rng) -> float:
    if spec.sampling == "systematic":
        return float(spec.epsilon)
    if spec.sigma == 0:
        return 0.0
    if rng is None:
        raise ConfigurationError("quasi-static sampling needs an explicit random stream")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return float(rng.normal(0.0, spec.sigma))


@dataclass(frozen=True)
class GateErrorModel:
    errors: Mapping[str, NoiseSpec] = field(default_factory=dict)
    side: str = "after"
    inverse_behavior: str = "inverts_with_gate"

    def __post_init__(self):
        if self.side not in SIDES:
            raise ConfigurationError(f"side must be one of {SIDES}")
        if self.inverse_behavior not in INVERSE_BEHAVIORS:
            raise ConfigurationError(f"inverse_behavior must be one of {INVERSE_BEHAVIORS}")
        errors = {}
        for label, spec in dict(self.errors).items():
            label = label.upper()
            if not gates.is_known(label):
                raise ConfigurationError(f"error model references unknown gate {label!r}")
            if spec.arity != gates.arity(label):
                raise ConfigurationError(
                    f"noise on {label} acts on {spec.arity} qubits, gate has {gates.arity(label)}"
                )
            errors[label] = spec
        object.__setattr__(self, "errors", errors)

    @property
    def is_noiseless(self) -> bool:
        return not self.errors

    @property
    def is_random(self) -> bool:
        return any(
            isinstance(s, OverRotationNoise) and s.sampling == "quasi_static" and s.sigma > 0
            for s in self.errors.values()
        )


# (kind, op index, payload); kind is "gate" or "noise" and payload for noise
# is the inverse flag.
_Item = tuple


class NoisyCircuit:
    """A circuit with an error model attached, ready to execute.

    One call to :meth:`realize` corresponds to one circuit execution: it fixes
    the quasi-static over-rotation of every noisy gate label, shared by the
    gate and its inverses.
    """

    def __init__(self, circuit: Circuit, model: GateErrorModel | None = None):
        self.circuit = circuit
        self.model = model or GateErrorModel()
        self.n_qubits = circuit.n_qubits
        self.dim = 2**circuit.n_qubits
        self._items: list[_Item] = []
        flip = self.model.inverse_behavior == "inverts_with_gate"
        for i, op in enumerate(circuit.ops):
            if op.label not in self.model.errors:
                self._items.append(("gate", i, None))
                continue
            inv = op.inverted and flip
            after = (self.model.side == "after") != inv
            noise = ("noise", i, inv)
            self._items.extend([("gate", i, None), noise] if after else [noise, ("gate", i, None)])
        self._fixed_cache: dict[int, np.ndarray] = {}
        self._noise_cache: dict[tuple[int, bool], list[np.ndarray]] = {}
        self._pauli_cache: dict[int, np.ndarray] = {}

    def realize(self, rng=None) -> dict[str, float]:
        """Draw one execution's relative over-rotation per noisy label."""
        if rng is not None and not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        out = {}
        for label in sorted(self.model.errors):
            spec = self.model.errors[label]
            if isinstance(spec, OverRotationNoise):
                out[label] = _relative_error(spec, rng)
        return out

    def _gate_full(self, i: int, values) -> np.ndarray:
        op = self.circuit.ops[i]
        if op.param_slot is None:
            full = self._fixed_cache.get(i)
            if full is None:
                full = embed_operator(op.matrix(), op.targets, self.n_qubits)
                self._fixed_cache[i] = full
            return full
        return embed_operator(op.matrix(values), op.targets, self.n_qubits)

    def _noise_full(self, i: int, inverse: bool, realization: Mapping[str, float]) -> list[np.ndarray]:
        op = self.circuit.ops[i]
        spec = self.model.errors[op.label]
        if isinstance(spec, MixedUnitaryNoise):
            key = (i, inverse)
            ops = self._noise_cache.get(key)
            if ops is None:
                local = kraus_of_mixed(spec.inverse() if inverse else spec).operators
                ops = [embed_operator(k, op.targets, self.n_qubits) for k in local]
                self._noise_cache[key] = ops
            return ops
        p = self._pauli_cache.get(i)
        if p is None:
            p = embed_operator(spec.generator.matrix(), op.targets, self.n_qubits)
            self._pauli_cache[i] = p
        if op.label not in realization:
            raise ConfigurationError(f"no realised over-rotation for {op.label}")
        phi = realization[op.label] * spec.base_angle
        if inverse:
            phi = -phi
        return [np.cos(phi / 2) * np.eye(self.dim) - 1j * np.sin(phi / 2) * p]

    def steps(self, binding=None, realization: Mapping[str, float] | None = None) -> list[list[np.ndarray]]:
        """Full-dimension Kraus lists in time order; unitary runs are fused."""
        values = _values(binding)
        c = self.circuit
        if c.n_params and (values is None or len(values) < c.n_params):
            raise InputError(f"circuit has {c.n_params} parameter slots; binding is incomplete")
        if realization is None:
            realization = self.realize(None)
        out: list[list[np.ndarray]] = []
        acc = None
        for kind, i, inv in self._items:
            ops = [self._gate_full(i, values)] if kind == "gate" else self._noise_full(i, inv, realization)
            if len(ops) == 1:
                acc = ops[0] if acc is None else ops[0] @ acc
                continue
            if acc is not None:
                out.append([acc])
                acc = None
            out.append(ops)
        if acc is not None:
            out.append([acc])
        return out

    def evolve_array(self, rho: np.ndarray, binding=None, realization=None) -> np.ndarray:
        for ops in self.steps(binding, realization):
            rho = apply_kraus_array(rho, ops)
        return rho

    def run(self, rho: DensityMatrix, binding=None, rng=None, realization=None) -> DensityMatrix:
        if rho.n_qubits != self.n_qubits:
            raise InputError("state and circuit sizes differ")
        if realization is None:
            realization = self.realize(rng)
        return DensityMatrix(self.n_qubits, self.evolve_array(rho.data, binding, realization))

    def superoperator(self, binding=None, realization=None) -> np.ndarray:
        """Column-stacking Liouville matrix ``S`` with ``vec(E(rho)) = S vec(rho)``."""
        d = self.dim
        s = np.eye(d * d, dtype=complex)
        for ops in self.steps(binding, realization):
            s = sum(np.kron(k.conj(), k) for k in ops) @ s
        return s

    def channel(self, binding=None, realization=None):
        """Callable ``rho -> E(rho)`` on raw arrays (for tomography)."""
        steps = self.steps(binding, realization)

        def apply(rho: np.ndarray) -> np.ndarray:
            for ops in steps:
                rho = apply_kraus_array(rho, ops)
            return rho

        return apply


def attach_noise(circuit: Circuit, model: GateErrorModel | None) -> NoisyCircuit:
    return NoisyCircuit(circuit, model)


def unitary_fidelity_of_superop(superop: np.ndarray, target: np.ndarray) -> float:
    """Process fidelity ``Tr(S_U^dagger S) / d^2`` of a channel to unitary ``target``."""
    d = target.shape[0]
    s_u = np.kron(target.conj(), target)
    return float(np.real(np.trace(s_u.conj().T @ superop)) / d**2)
