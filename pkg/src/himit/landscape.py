"""Two-parameter energy landscapes and their roughness."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .seeding import derive_seed
from .vqe import VqeProblem, estimate_energy


@dataclass(frozen=True)
class Axis:
    slot: int
    start: float
    stop: float
    points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class GridSpec:
    fixed_slot: int
    fixed_value: float
    axis1: Axis
    axis2: Axis
    shots: int | None = None  # None: exact expectation values

    def __post_init__(self):
        for name in ("axis1", "axis2"):
            ax = getattr(self, name)
            if not isinstance(ax, Axis):
                object.__setattr__(self, name, Axis(*ax) if not isinstance(ax, dict) else Axis(**ax))
        slots = {self.axis1.slot, self.axis2.slot}
        if len(slots) != 2 or self.fixed_slot in slots:
            raise InputError("fixed slot and the two axis slots must be distinct")
        if self.axis1.points < 2 or self.axis2.points < 2:
            raise InputError("each axis needs at least 2 points")

    @property
    def n_params(self) -> int:
        return max(self.fixed_slot, self.axis1.slot, self.axis2.slot) + 1

    def params_at(self, i: int, j: int) -> np.ndarray:
        x = np.zeros(self.n_params)
        x[self.fixed_slot] = self.fixed_value
        x[self.axis1.slot] = self.axis1.values()[i]
        x[self.axis2.slot] = self.axis2.values()[j]
        return x

    def to_dict(self) -> dict:
        return asdict(self)


def default_grid(fixed_slot: int = 2, fixed_value: float = 0.0, points: int = 41,
                 free_slots: tuple[int, int] = (0, 1), shots: int | None = None) -> GridSpec:
    """``points x points`` over ``[-pi, pi]^2``."""
    return GridSpec(
        fixed_slot,
        fixed_value,
        Axis(free_slots[0], -np.pi, np.pi, points),
        Axis(free_slots[1], -np.pi, np.pi, points),
        shots,
    )


@dataclass(frozen=True, eq=False)
class LandscapeGrid:
    spec: GridSpec
    energies: np.ndarray
    seed: int

    def __post_init__(self):
        shape = (self.spec.axis1.points, self.spec.axis2.points)
        if np.shape(self.energies) != shape:
            raise InputError(f"energies shape {np.shape(self.energies)} does not match {shape}")

    def to_csv(self, path) -> None:
        a1, a2 = self.spec.axis1.values(), self.spec.axis2.values()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["axis1_value", "axis2_value", "energy"])
            for i, u in enumerate(a1):
                for j, v in enumerate(a2):
                    w.writerow([repr(float(u)), repr(float(v)), repr(float(self.energies[i, j]))])

    def sidecar(self) -> dict:
        return {"spec": self.spec.to_dict(), "seed": self.seed}


class GridMinimum(NamedTuple):
    params: np.ndarray
    energy: float
    index: tuple[int, int]


def _row(args) -> list[float]:
    problem, spec, seed, i = args
    return [
        estimate_energy(problem, spec.params_at(i, j), derive_seed(seed, i, j))
        for j in range(spec.axis2.points)
    ]


def sweep(p: VqeProblem, spec: GridSpec, seed: int = 0, workers: int = 1) -> LandscapeGrid:
    """Energy at every grid point; point ``(i, j)`` uses ``derive_seed(seed, i, j)``.

    ``spec.shots`` overrides the problem's estimator. Results do not depend
    on ``workers``.
    """
    if p.n_params > spec.n_params:
        raise InputError("grid does not bind every ansatz parameter")
    problem = replace(p, shots=spec.shots)
    jobs = [(problem, spec, seed, i) for i in range(spec.axis1.points)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(job) for job in jobs]
    return LandscapeGrid(spec, np.array(rows), int(seed))


def grid_min(g: LandscapeGrid) -> GridMinimum:
    """Lowest grid point; ties go to the smallest (row, col)."""
    flat = int(np.argmin(g.energies))  # argmin returns the first occurrence
    i, j = np.unravel_index(flat, g.energies.shape)
    return GridMinimum(g.spec.params_at(i, j), float(g.energies[i, j]), (int(i), int(j)))


def rms_roughness(noisy: LandscapeGrid, reference: LandscapeGrid) -> float:
    """``sqrt(mean((E_noisy - E_ref)^2))`` over the grid."""
    if noisy.spec != reference.spec:
        raise InputError("landscapes were computed on different grids")
    return float(np.sqrt(np.mean((noisy.energies - reference.energies) ** 2)))


def energy_range(g: LandscapeGrid) -> float:
    return float(g.energies.max() - g.energies.min())


def write_grid(g: LandscapeGrid, path, provenance: dict | None = None) -> None:
    path = Path(path)
    g.to_csv(path)
    meta = g.sidecar()
    if provenance:
        meta["provenance"] = provenance
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
