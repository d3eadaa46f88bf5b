"""Variational energy estimation and optimisation for Pauli-sum Hamiltonians."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gates
from .densim import (
    IMAG_TOL,
    DensityMatrix,
    PauliString,
    expectation_from_counts,
    init_state,
    pauli_matrix,
    sample_counts,
)
from .errors import InputError, NumericalConsistencyError, UnsupportedGateError
from .noise import GateErrorModel, NoisyCircuit
from .optimizers import AdamSettings, adam, model_based_minimize
from .seeding import derive_rng, derive_seed
from .transforms import Circuit, GateRef, hidden_inverse_pass, randomized_compile

MITIGATIONS = ("none", "hidden_inverse", "randomized_compile")
DEFAULT_SHOTS = 5000
DEFAULT_RC_INSTANCES = 20
FD_STEP = 1e-2


@dataclass(frozen=True, eq=False)
class PauliHamiltonian:
    terms: tuple[tuple[float, PauliString], ...]
    n_qubits: int

    def __post_init__(self):
        terms = tuple(
            (float(c), p if isinstance(p, PauliString) else PauliString(p)) for c, p in self.terms
        )
        for _, p in terms:
            if p.n_qubits != self.n_qubits:
                raise InputError(f"term {p} does not act on {self.n_qubits} qubits")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliHamiltonian":
        terms = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            coeff, label = line.split()
            terms.append((float(coeff), PauliString(label)))
        if not terms:
            raise InputError("Hamiltonian file has no terms")
        return cls(tuple(terms), terms[0][1].n_qubits)

    @classmethod
    def load(cls, path) -> "PauliHamiltonian":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        return "".join(f"{c: .12f} {p.letters}\n" for c, p in self.terms)

    @property
    def constant(self) -> float:
        return sum(c for c, p in self.terms if not p.support)

    def matrix(self) -> np.ndarray:
        cached = self.__dict__.get("_matrix")
        if cached is None:
            d = 2**self.n_qubits
            cached = np.zeros((d, d), dtype=complex)
            for c, p in self.terms:
                cached = cached + c * pauli_matrix(p.letters)
            object.__setattr__(self, "_matrix", cached)
        return cached

    def measurement_groups(self) -> list[tuple[str, list[tuple[float, str]]]]:
        """Greedy first-fit qubit-wise-commuting groups ``(basis, terms)``."""
        groups: list[tuple[list[str], list[tuple[float, str]]]] = []
        for c, p in self.terms:
            if not p.support:
                continue
            for basis, members in groups:
                if all(b == "I" or l == "I" or b == l for b, l in zip(basis, p.letters)):
                    for i, l in enumerate(p.letters):
                        if l != "I":
                            basis[i] = l
                    members.append((c, p.letters))
                    break
            else:
                groups.append((list(p.letters), [(c, p.letters)]))
        return [("".join(b).replace("I", "Z"), m) for b, m in groups]


def load_h2_hamiltonian() -> PauliHamiltonian:
    """The shipped 4-qubit STO-3G H2 Hamiltonian (R = 0.7414 A)."""
    return PauliHamiltonian.from_text(resources.files("himit.data").joinpath("h2_sto3g.txt").read_text())


def load_ucc3_ansatz() -> Circuit:
    import json

    return Circuit.from_dict(json.loads(resources.files("himit.data").joinpath("ucc3.json").read_text()))


def exact_ground_energy(h: PauliHamiltonian) -> float:
    if h.n_qubits > 8:
        raise InputError("dense diagonalisation limited to 8 qubits")
    return float(np.linalg.eigvalsh(h.matrix())[0])


@dataclass(frozen=True, eq=False)
class VqeProblem:
    """Ansatz + Hamiltonian + noise + estimator settings.

    ``shots=None`` selects exact expectation values on the noisy state.
    With randomized compiling, ``rc_instances`` twirled circuits are averaged
    and the shots are split evenly between them.
    """

    ansatz: Circuit
    hamiltonian: PauliHamiltonian
    noise: GateErrorModel = field(default_factory=GateErrorModel)
    shots: int | None = DEFAULT_SHOTS
    mitigation: str = "none"
    rc_instances: int = DEFAULT_RC_INSTANCES
    hi_threshold: float | None = None
    rc_seed: int | None = None  # fixes the twirled ensemble across evaluations

    def __post_init__(self):
        if self.ansatz.n_qubits != self.hamiltonian.n_qubits:
            raise InputError("ansatz and Hamiltonian act on different registers")
        if self.mitigation not in MITIGATIONS:
            raise InputError(f"mitigation must be one of {MITIGATIONS}")
        if self.shots is not None and self.shots < 1:
            raise InputError("shots must be positive or None")
        if self.mitigation == "randomized_compile" and self.rc_instances < 1:
            raise InputError("rc_instances must be >= 1")
        base = self.ansatz
        if self.mitigation == "hidden_inverse" and self.hi_threshold is None:
            base = hidden_inverse_pass(base)
        object.__setattr__(self, "_fixed", NoisyCircuit(base, self.noise))
        object.__setattr__(self, "_groups", self.hamiltonian.measurement_groups())
        if self.mitigation == "randomized_compile" and self.rc_seed is not None:
            fixed = [
                NoisyCircuit(randomized_compile(self.ansatz, derive_seed(self.rc_seed, "rc", k)), self.noise)
                for k in range(self.rc_instances)
            ]
            object.__setattr__(self, "_rc_fixed", fixed)

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def executions(self, params: Sequence[float], seed) -> list[NoisyCircuit]:
        """Noisy circuits run for one energy evaluation."""
        if self.mitigation == "randomized_compile":
            if self.rc_seed is not None:
                return self._rc_fixed
            return [
                NoisyCircuit(randomized_compile(self.ansatz, derive_seed(seed, "rc", k)), self.noise)
                for k in range(self.rc_instances)
            ]
        if self.mitigation == "hidden_inverse" and self.hi_threshold is not None:
            return [NoisyCircuit(hidden_inverse_pass(self.ansatz, self.hi_threshold, params), self.noise)]
        return [self._fixed]


def _bind(p: VqeProblem, params) -> tuple[float, ...]:
    values = tuple(float(v) for v in np.ravel(params))
    if len(values) < p.n_params:
        raise InputError(f"ansatz has {p.n_params} parameters, got {len(values)}")
    return values


def estimate_energy(p: VqeProblem, params: Sequence[float], seed=0) -> float:
    """Energy of the (mitigated, noisy) ansatz state.

    Each execution draws its own quasi-static noise realisation. In shot
    mode every qubit-wise-commuting group is sampled separately.
    """
    values = _bind(p, params)
    h = p.hamiltonian
    rho0 = init_state(p.ansatz.n_qubits, "0" * p.ansatz.n_qubits).data
    runs = p.executions(values, seed)
    shots = None if p.shots is None else max(1, p.shots // len(runs))
    energies = []
    for k, nc in enumerate(runs):
        realization = nc.realize(derive_rng(seed, "noise", k)) if p.noise.is_random else None
        rho = nc.evolve_array(rho0, values, realization)
        if shots is None:
            e = np.einsum("ij,ji->", h.matrix(), rho)
            if abs(e.imag) > IMAG_TOL:
                raise NumericalConsistencyError(f"energy has imaginary part {e.imag:.3e}")
            energies.append(float(e.real))
            continue
        state = DensityMatrix(nc.n_qubits, (rho + rho.conj().T) / 2)
        e = h.constant
        for g, (basis, members) in enumerate(p._groups):
            counts = sample_counts(state, basis, shots, derive_seed(seed, "shots", k, g))
            e += sum(c * expectation_from_counts(counts, letters) for c, letters in members)
        energies.append(e)
    return float(np.mean(energies))


def _shifted(p: VqeProblem, op_index: int, angle: float) -> VqeProblem:
    ops = list(p.ansatz.ops)
    ops[op_index] = replace(ops[op_index], param_slot=None, fixed_angle=angle)
    return replace(p, ansatz=Circuit(p.ansatz.n_qubits, tuple(ops)))


def parameter_shift_gradient(p: VqeProblem, params: Sequence[float], seed=0) -> np.ndarray:
    """Gradient by the two-term shift rule, per gate occurrence of each slot.

    Parameterized gates that are not Pauli rotations fall back to a central
    finite difference with step ``FD_STEP``.
    """
    grad, _ = _gradient_and_cost(p, params, seed)
    return grad


def _gradient_and_cost(p: VqeProblem, params, seed) -> tuple[np.ndarray, int]:
    values = _bind(p, params)
    grad = np.zeros(p.n_params)
    cost = 0
    for i, op in enumerate(p.ansatz.ops):
        if op.param_slot is None:
            continue
        theta = values[op.param_slot]
        if op.label in gates.ROTATION_GATES:
            shift, scale = np.pi / 2, 0.5
        else:
            shift, scale = FD_STEP, 0.5 / FD_STEP
        plus = estimate_energy(_shifted(p, i, theta + shift), values, derive_seed(seed, "shift", i, 1))
        minus = estimate_energy(_shifted(p, i, theta - shift), values, derive_seed(seed, "shift", i, 0))
        grad[op.param_slot] += scale * (plus - minus)
        cost += 2
    return grad, cost


@dataclass
class VqeTrace:
    iterations: list[tuple[tuple[float, ...], float, int]] = field(default_factory=list)
    converged_energy: float = float("nan")
    converged: bool = False
    message: str = ""

    def evaluations_to_reach(self, tolerance: float) -> int:
        """Evaluations used at the first iterate within ``tolerance`` of the final energy."""
        for params, energy, evals in self.iterations:
            if energy <= self.converged_energy + tolerance:
                return evals
        return self.iterations[-1][2]

    def to_csv(self, path) -> None:
        n = len(self.iterations[0][0]) if self.iterations else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "evals", "energy"] + [f"param_{j}" for j in range(n)])
            for it, (params, energy, evals) in enumerate(self.iterations):
                w.writerow([it, evals, repr(energy)] + [repr(v) for v in params])


def _trace_from(result) -> VqeTrace:
    trace = VqeTrace(
        [(tuple(float(v) for v in s.params), float(s.value), int(s.evaluations)) for s in result.steps],
        converged=result.converged,
        message=result.message,
    )
    trace.converged_energy = trace.iterations[-1][1]
    return trace


def minimize_adam(
    p: VqeProblem,
    x0: Sequence[float],
    hyper: AdamSettings | None = None,
    max_iters: int = 100,
    seed=0,
) -> VqeTrace:
    """Adam driven by parameter-shift gradients; one energy evaluation per iterate."""
    result = adam(
        lambda x, t: estimate_energy(p, x, derive_seed(seed, "adam", t, "energy")),
        lambda x, t: _gradient_and_cost(p, x, derive_seed(seed, "adam", t, "grad")),
        np.asarray(x0, dtype=float),
        hyper or AdamSettings(),
        max_iters,
    )
    return _trace_from(result)


def minimize_model_based(
    p: VqeProblem,
    x0: Sequence[float],
    budget: int = 200,
    trust_region: tuple[float, float] = (0.5, 1e-4),
    seed=0,
    bounds=None,
) -> VqeTrace:
    """Derivative-free quadratic-model trust region on the estimated energy.

    Evaluation ``k`` uses the stream ``derive_seed(seed, "bobyqa", k)``.
    """
    counter = iter(range(10**9))
    result = model_based_minimize(
        lambda x: estimate_energy(p, x, derive_seed(seed, "bobyqa", next(counter))),
        np.asarray(x0, dtype=float),
        budget,
        rhobeg=trust_region[0],
        rhoend=trust_region[1],
        bounds=bounds,
    )
    return _trace_from(result)
