"""Experiment runners behind the ``himit`` subcommands.

Each ``run_*`` takes a validated config, writes CSV/JSON files into
``out_dir`` and returns the in-memory result. Seeds follow the hierarchy
experiment -> arm -> iteration/grid point via :func:`himit.seeding.derive_seed`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, gates
from .config import (
    FoldConfig,
    LandscapeConfig,
    PulseConfig,
    QptConfig,
    VqeConfig,
    build_noise_model,
    config_hash,
)
from .landscape import GridSpec, Axis, grid_min, rms_roughness, sweep, write_grid
from .noise import GateErrorModel, NoisyCircuit, unitary_fidelity_of_superop
from .optimizers import AdamSettings
from .pulsekit import (
    PulseSchedule,
    TlsDrive,
    accumulated_phase,
    gate_fidelity,
    gaussian_schedule,
    invert_schedule,
    propagate_rwa,
)
from .seeding import derive_rng, derive_seed
from .tomo import average_gate_fidelity, chi_exact, chi_sampled, compare_chi, process_fidelity
from .transforms import Circuit, GateRef, fold
from .vqe import (
    PauliHamiltonian,
    VqeProblem,
    exact_ground_energy,
    load_h2_hamiltonian,
    load_ucc3_ansatz,
    minimize_adam,
    minimize_model_based,
)

log = logging.getLogger(__name__)

ARM_MITIGATION = {
    "default": "none",
    "hidden": "hidden_inverse",
    "rc": "randomized_compile",
    "simulator": "none",
}


def provenance(cfg, **extra) -> dict:
    out = {
        "toolkit": "himit",
        "version": __version__,
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "experiment": cfg.experiment,
    }
    out.update(extra)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------


def fold_fidelities(
    model: GateErrorModel,
    n_max: int,
    variants=("default", "inverse"),
    gate: str = "CX",
    seed: int = 0,
    realizations: int = 1,
) -> list[tuple[str, int, float]]:
    """Process fidelity of ``G U^n`` to the ideal ``G`` for ``n = 0..n_max``."""
    target = gates.gate_matrix(gate)
    rows = []
    for variant in variants:
        for n in range(n_max + 1):
            nc = NoisyCircuit(fold(gate, n, variant), model)
            fids = []
            for r in range(realizations if model.is_random else 1):
                realization = nc.realize(derive_rng(seed, "fold", variant, n, r))
                fids.append(unitary_fidelity_of_superop(nc.superoperator(None, realization), target))
            rows.append((variant, n, float(np.mean(fids))))
    return rows


def run_fold(cfg: FoldConfig, out_dir: Path) -> list[tuple[str, int, float]]:
    model = build_noise_model(cfg.noise)
    rows = fold_fidelities(model, cfg.n_max, cfg.variants, cfg.gate.upper(), cfg.seed, cfg.realizations)
    d = 2 ** gates.arity(cfg.gate.upper())
    n_qubits = gates.arity(cfg.gate.upper())
    _write_csv(
        out_dir / "fold.csv",
        ["variant", "n", "process_fidelity", "average_gate_fidelity"],
        [[v, n, repr(f), repr(average_gate_fidelity(f, n_qubits))] for v, n, f in rows],
    )
    _write_json(out_dir / "fold.json", {"provenance": provenance(cfg), "dimension": d})
    return rows


def run_qpt(cfg: QptConfig, out_dir: Path) -> dict:
    """Tomography of the noisy gate and its hardware inverse."""
    label = cfg.gate.upper()
    model = build_noise_model(cfg.noise)
    n = gates.arity(label)
    targets = tuple(range(n))
    realization = None
    results = {}
    ideal = chi_exact(gates.gate_matrix(label), n)
    for name, inverted in (("gate", False), ("inverse", True)):
        nc = NoisyCircuit(Circuit(n, (GateRef(label, targets, inverted=inverted),)), model)
        if realization is None:
            realization = nc.realize(derive_rng(cfg.seed, "qpt", "noise"))
        channel = nc.channel(None, realization)
        exact = chi_exact(channel, n)
        sampled = chi_sampled(channel, n, cfg.shots, derive_seed(cfg.seed, "qpt", name)) if cfg.shots else exact
        exact.to_csv(out_dir / f"chi_{name}_exact.csv")
        sampled.to_csv(out_dir / f"chi_{name}.csv")
        f = process_fidelity(sampled, ideal)
        results[name] = {
            "chi": sampled,
            "chi_exact": exact,
            "process_fidelity": f,
            "average_gate_fidelity": average_gate_fidelity(f, n),
            "physical": sampled.physical,
        }
    comparison = compare_chi(results["gate"]["chi"], results["inverse"]["chi"], cfg.shots or 10**12)
    report = comparison.to_dict()
    report["fidelity"] = {
        k: {"process": v["process_fidelity"], "average_gate": v["average_gate_fidelity"], "physical": v["physical"]}
        for k, v in results.items()
    }
    report["provenance"] = provenance(cfg)
    _write_json(out_dir / "comparison.json", report)
    results["comparison"] = comparison
    return results


def _problem_inputs(cfg):
    ansatz = Circuit.load(cfg.ansatz) if cfg.ansatz else load_ucc3_ansatz()
    ham = PauliHamiltonian.load(cfg.hamiltonian) if cfg.hamiltonian else load_h2_hamiltonian()
    return ansatz, ham


def run_vqe(cfg: VqeConfig, out_dir: Path, arm: str | None = None) -> dict:
    ansatz, ham = _problem_inputs(cfg)
    model = build_noise_model(cfg.noise)
    arms = [arm] if arm else list(cfg.arms)
    x0 = np.array(cfg.x0 if cfg.x0 is not None else [0.5] * ansatz.n_params, dtype=float)
    e_exact = exact_ground_energy(ham)
    traces = {}
    for name in arms:
        if name not in ARM_MITIGATION:
            raise ValueError(f"unknown arm {name!r}")
        problem = VqeProblem(
            ansatz,
            ham,
            GateErrorModel() if name == "simulator" else model,
            cfg.shots,
            ARM_MITIGATION[name],
            cfg.rc_instances,
        )
        seed = derive_seed(cfg.seed, "vqe", name)
        opt = cfg.optimizer
        if opt.name == "adam":
            trace = minimize_adam(
                problem, x0, AdamSettings(opt.lr, opt.beta1, opt.beta2, opt.eps), opt.max_iters, seed
            )
        else:
            trace = minimize_model_based(problem, x0, opt.budget, (opt.rhobeg, opt.rhoend), seed)
        if not trace.converged:
            log.warning("arm %s: %s", name, trace.message)
        trace.to_csv(out_dir / f"trace_{name}.csv")
        _write_json(
            out_dir / f"trace_{name}.json",
            {
                "provenance": provenance(cfg, arm=name),
                "converged_energy": trace.converged_energy,
                "converged": trace.converged,
                "warning": None if trace.converged else trace.message,
                "evaluations_to_converge": trace.evaluations_to_reach(cfg.convergence_tolerance),
                "exact_ground_energy": e_exact,
            },
        )
        traces[name] = trace
    return traces


def run_landscape(cfg: LandscapeConfig, out_dir: Path) -> dict:
    ansatz, ham = _problem_inputs(cfg)
    model = build_noise_model(cfg.noise)
    g = cfg.grid
    spec = GridSpec(
        g.fixed_slot,
        g.fixed_value,
        Axis(g.axis1.slot, g.axis1.start, g.axis1.stop, g.axis1.points),
        Axis(g.axis2.slot, g.axis2.start, g.axis2.stop, g.axis2.points),
        g.shots,
    )
    seed = derive_seed(cfg.seed, "landscape")
    problem = VqeProblem(
        ansatz, ham, model, None, cfg.mitigation, cfg.rc_instances, rc_seed=derive_seed(seed, "rc")
    )
    grid = sweep(problem, spec, seed, cfg.workers)
    minimum = grid_min(grid)
    summary = {
        "min_energy": minimum.energy,
        "argmin_params": [float(v) for v in minimum.params],
        "argmin_index": list(minimum.index),
        "exact_ground_energy": exact_ground_energy(ham),
    }
    if not model.is_noiseless or g.shots is not None:
        reference = sweep(replace(problem, noise=GateErrorModel(), mitigation="none"), replace(spec, shots=None), seed)
        summary["rms_roughness"] = rms_roughness(grid, reference)
    write_grid(grid, out_dir / "landscape.csv", {**provenance(cfg), **summary})
    return {"grid": grid, **summary}


def load_schedule(cfg: PulseConfig) -> PulseSchedule:
    if cfg.schedule:
        return PulseSchedule.load(cfg.schedule)
    gcfg = cfg.gaussian
    return gaussian_schedule(gcfg.u0, gcfg.u_sigma, gcfg.T, gcfg.N)


def run_pulse(cfg: PulseConfig, out_dir: Path) -> dict:
    schedule = load_schedule(cfg)
    drive = TlsDrive(cfg.drive.epsilon_strength, cfg.drive.omega0, cfg.drive.omega1)
    if cfg.action == "invert":
        inverted = invert_schedule(schedule)
        stem = Path(cfg.schedule).stem if cfg.schedule else "gaussian"
        inverted.save(out_dir / f"{stem}_inverted.json")
        _write_json(out_dir / f"{stem}_inverted.meta.json", {"provenance": provenance(cfg)})
        return {"schedule": inverted}
    u = propagate_rwa(schedule, drive).matrix
    u_inv = propagate_rwa(invert_schedule(schedule), drive).matrix
    axis = schedule.axis.matrix()
    payload = {
        "accumulated_phase": accumulated_phase(schedule, drive),
        "propagator_re": u.real.tolist(),
        "propagator_im": u.imag.tolist(),
        "fidelity_to_axis_pauli": gate_fidelity(axis, u),
        "inverse_roundtrip_fidelity": gate_fidelity(np.eye(u.shape[0]), u_inv @ u),
        "provenance": provenance(cfg),
    }
    _write_json(out_dir / "propagator.json", payload)
    return payload
