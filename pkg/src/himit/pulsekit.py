"""Single-quadrature pulse schedules in the rotating-wave picture.

A schedule is a piecewise-constant envelope ``u_k`` on blocks of length
``dt`` driving one Pauli axis. Under the RWA the block propagators are
``exp(-i eps u_k dt P / 2)``, so the whole pulse is a rotation by the
accumulated phase ``theta = eps * sum_k u_k dt``. The hardware inverse of a
pulse negates and reverses its amplitudes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gates
from .densim import PauliString, UnitaryGate
from .errors import InputError

WEAK_DRIVE_RATIO = 0.1


@dataclass(frozen=True)
class PulseSchedule:
    dt: float
    amplitudes: tuple[float, ...]
    axis: PauliString = field(default_factory=lambda: PauliString("X"))

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError("dt must be positive")
        amps = tuple(float(a) for a in self.amplitudes)
        if not amps:
            raise InputError("a schedule needs at least one amplitude")
        object.__setattr__(self, "amplitudes", amps)
        if not isinstance(self.axis, PauliString):
            object.__setattr__(self, "axis", PauliString(self.axis))

    @property
    def duration(self) -> float:
        return self.dt * len(self.amplitudes)

    def to_dict(self) -> dict:
        return {"dt": self.dt, "amplitudes": list(self.amplitudes), "axis": self.axis.letters}

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSchedule":
        return cls(float(d["dt"]), tuple(d["amplitudes"]), PauliString(d.get("axis", "X")))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "PulseSchedule":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TlsDrive:
    """Two-level drive: strength ``epsilon_strength``, qubit frequency
    ``omega0`` and drive frequency ``omega1`` (all rad/s)."""

    epsilon_strength: float
    omega0: float = 2 * np.pi * 5e9
    omega1: float | None = None

    def __post_init__(self):
        if self.omega1 is None:
            object.__setattr__(self, "omega1", self.omega0)
        if self.omega0 > 0 and abs(self.epsilon_strength) / self.omega0 > WEAK_DRIVE_RATIO:
            warnings.warn(
                f"drive strength / omega0 = {abs(self.epsilon_strength) / self.omega0:.3g} "
                "exceeds the weak-driving regime assumed by the RWA",
                stacklevel=3,
            )


def invert_schedule(s: PulseSchedule) -> PulseSchedule:
    """``{u_0..u_N} -> {-u_N..-u_0}``; ``dt`` and axis unchanged."""
    return PulseSchedule(s.dt, tuple(-a for a in reversed(s.amplitudes)), s.axis)


def accumulated_phase(s: PulseSchedule, drive: TlsDrive) -> float:
    return float(drive.epsilon_strength * s.dt * np.sum(s.amplitudes))


def propagate_rwa(s: PulseSchedule, drive: TlsDrive) -> UnitaryGate:
    """Time-ordered product of block propagators; block 0 acts first."""
    p = s.axis.matrix()
    u = np.eye(p.shape[0], dtype=complex)
    for a in s.amplitudes:
        u = gates.pauli_rotation(p, drive.epsilon_strength * a * s.dt) @ u
    return UnitaryGate("pulse", u)


def gaussian_schedule(u0: float, u_sigma: float, T: float, N: int, axis: str = "X") -> PulseSchedule:
    """``N`` midpoint samples of ``u0 exp(-(t - T/2)^2 / (2 u_sigma^2))`` on ``[0, T]``."""
    if N < 2:
        raise InputError("N must be >= 2")
    if not T > 0 or not u_sigma > 0:
        raise InputError("T and u_sigma must be positive")
    dt = T / N
    t = (np.arange(N) + 0.5) * dt
    amps = u0 * np.exp(-((t - T / 2) ** 2) / (2 * u_sigma**2))
    return PulseSchedule(dt, tuple(amps), PauliString(axis))


def pi_pulse_amplitude(u_sigma: float, epsilon_strength: float) -> float:
    """Peak amplitude giving ``theta = eps u0 u_sigma sqrt(2 pi) = pi``."""
    return np.pi / (epsilon_strength * u_sigma * np.sqrt(2 * np.pi))


def gate_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Global-phase-invariant ``|Tr(a^dagger b) / d|^2``."""
    return float(abs(np.trace(a.conj().T @ b) / a.shape[0]) ** 2)


def concatenate(*schedules: PulseSchedule) -> PulseSchedule:
    first = schedules[0]
    if any(s.dt != first.dt or s.axis != first.axis for s in schedules):
        raise InputError("schedules must share dt and axis")
    amps: Sequence[float] = sum((s.amplitudes for s in schedules), ())
    return PulseSchedule(first.dt, amps, first.axis)
