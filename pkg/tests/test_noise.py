import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from himit import gates
from himit.densim import DensityMatrix, PauliString, apply_kraus, init_state
from himit.errors import ConfigurationError, InputError, ValidationError
from himit.noise import (
    GateErrorModel,
    MixedUnitaryNoise,
    NoisyCircuit,
    OverRotationNoise,
    attach_noise,
    kraus_of_mixed,
    process_fidelity_to_identity,
    sample_overrotation,
    unitary_fidelity_of_superop,
)
from himit.transforms import Circuit, GateRef, circuit_unitary

from conftest import random_density

ZX = np.kron(gates.Z, gates.X)
ZZ = np.kron(gates.Z, gates.Z)
CX01 = GateRef("CX", (0, 1))
CX01_INV = GateRef("CX", (0, 1), inverted=True)
hermitian_unitaries = st.sampled_from([gates.X, gates.Y, gates.Z, gates.CX, ZX, ZZ, gates.CZ])


def systematic(eps, **kw):
    return GateErrorModel({"CX": OverRotationNoise("ZX", np.pi / 2, sampling="systematic", epsilon=eps)}, **kw)


def fidelity_to(circ, model, target, realization=None):
    nc = NoisyCircuit(circ, model)
    return unitary_fidelity_of_superop(nc.superoperator(None, realization), target)


# ---------------------------------------------------------------- channels


def test_zero_strength_is_identity():
    for kappa in (0.0, 0.3, 1.0):
        ch = kraus_of_mixed(MixedUnitaryNoise(gates.X, 0.0, kappa))
        rho = DensityMatrix(1, random_density(1, np.random.default_rng(1)))
        assert np.allclose(apply_kraus(rho, ch, [0]).data, rho.data, atol=1e-15)


def test_coherent_x_half_pi_flips():
    ch = kraus_of_mixed(MixedUnitaryNoise(gates.X, np.pi / 2, 1.0))
    assert len(ch.operators) == 1
    assert np.allclose(ch.operators[0], -1j * gates.X, atol=1e-15)
    assert np.allclose(apply_kraus(init_state(1, "0"), ch, [0]).data, np.diag([0, 1]), atol=1e-15)


def test_stochastic_z_quarter_pi_dephases():
    ch = kraus_of_mixed(MixedUnitaryNoise(gates.Z, np.pi / 4, 0.0))
    out = apply_kraus(DensityMatrix(1, np.full((2, 2), 0.5)), ch, [0])
    assert np.allclose(out.data, np.eye(2) / 2, atol=1e-12)


def test_generator_must_be_hermitian_unitary():
    with pytest.raises(ValidationError):
        MixedUnitaryNoise(gates.S, 0.1)
    with pytest.raises(ValidationError):
        MixedUnitaryNoise(2 * gates.X, 0.1)
    with pytest.raises(ValidationError):
        MixedUnitaryNoise(gates.X, 0.1, kappa=1.5)


@settings(max_examples=50)
@given(hermitian_unitaries, st.floats(-np.pi, np.pi), st.floats(0, 1))
def test_channels_are_trace_preserving(g, eps, kappa):
    assert kraus_of_mixed(MixedUnitaryNoise(g, eps, kappa)).trace_preservation_error() <= 1e-12


def test_identity_channel_fidelity():
    assert process_fidelity_to_identity(kraus_of_mixed(MixedUnitaryNoise(gates.Z, 0.0))) == 1.0


def test_fidelity_cx_generator():
    eps = 0.02
    expected = np.cos(eps) ** 2 + np.sin(eps) ** 2 * (2 / 4) ** 2
    f0 = process_fidelity_to_identity(kraus_of_mixed(MixedUnitaryNoise(gates.CX, eps, 0.0)))
    f1 = process_fidelity_to_identity(kraus_of_mixed(MixedUnitaryNoise(gates.CX, eps, 1.0)))
    assert f0 == pytest.approx(expected, abs=1e-12)
    assert abs(f0 - f1) <= 1e-12


def test_fidelity_traceless_generator():
    eps = 0.37
    f = process_fidelity_to_identity(kraus_of_mixed(MixedUnitaryNoise(gates.X, eps, 0.0)))
    assert f == pytest.approx(np.cos(eps) ** 2, abs=1e-14)


@settings(max_examples=50)
@given(hermitian_unitaries, st.floats(-1.5, 1.5))
def test_fidelity_independent_of_kappa(g, eps):
    fids = [process_fidelity_to_identity(kraus_of_mixed(MixedUnitaryNoise(g, eps, k))) for k in (0, 0.25, 0.5, 0.75, 1)]
    assert max(fids) - min(fids) <= 1e-12


def test_mixed_inverse_undoes_coherent_part():
    spec = MixedUnitaryNoise(gates.CX, 0.2, 1.0)
    u = kraus_of_mixed(spec).operators[0]
    v = kraus_of_mixed(spec.inverse()).operators[0]
    assert np.allclose(u @ v, np.eye(4), atol=1e-14)


# ---------------------------------------------------------------- over-rotation


def test_zero_sigma_gives_base_angle():
    spec = OverRotationNoise(sigma=0.0)
    assert all(sample_overrotation(spec, s) == np.pi / 2 for s in range(5))


def test_systematic_angle():
    spec = OverRotationNoise(sampling="systematic", epsilon=0.05)
    assert sample_overrotation(spec) == pytest.approx(1.05 * np.pi / 2)
    assert sample_overrotation(spec, 3) == sample_overrotation(spec, 4)


def test_quasi_static_statistics():
    sigma = 0.1
    spec = OverRotationNoise(sigma=sigma)
    rng = np.random.default_rng(123)
    rel = np.array([sample_overrotation(spec, rng) for _ in range(10_000)]) / (np.pi / 2) - 1
    assert abs(rel.mean()) <= 3 * sigma / 100
    assert abs(rel.std() - sigma) <= 0.05 * sigma


def test_quasi_static_reproducible_and_needs_stream():
    spec = OverRotationNoise(sigma=0.2)
    assert sample_overrotation(spec, 9) == sample_overrotation(spec, 9)
    with pytest.raises(ConfigurationError):
        sample_overrotation(spec, None)


def test_negative_sigma_rejected():
    with pytest.raises(ValidationError):
        OverRotationNoise(sigma=-0.1)


# ---------------------------------------------------------------- attachment


def test_unknown_label_rejected():
    with pytest.raises(ConfigurationError):
        GateErrorModel({"FOO": OverRotationNoise()})


def test_arity_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        GateErrorModel({"X": OverRotationNoise("ZX")})


def test_empty_model_is_ideal():
    c = Circuit(2, (GateRef("H", (0,)), CX01, GateRef("RZ", (1,), fixed_angle=0.3)))
    nc = attach_noise(c, GateErrorModel())
    u = circuit_unitary(c).matrix
    assert unitary_fidelity_of_superop(nc.superoperator(), u) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.3])
def test_repeated_gate_doubles_error(eps):
    phi = eps * np.pi / 2
    one = fidelity_to(Circuit(2, (CX01,)), systematic(eps), gates.CX)
    two = fidelity_to(Circuit(2, (CX01, CX01)), systematic(eps), np.eye(4))
    assert one == pytest.approx(np.cos(phi / 2) ** 2, abs=1e-12)
    assert two == pytest.approx(np.cos(phi) ** 2, abs=1e-12)


@pytest.mark.parametrize("side", ["after", "before"])
def test_hidden_inverse_cancels(side):
    f = fidelity_to(Circuit(2, (CX01, CX01_INV)), systematic(0.2, side=side), np.eye(4))
    assert f == pytest.approx(1.0, abs=1e-12)


def test_fixed_inverse_does_not_cancel():
    f = fidelity_to(Circuit(2, (CX01, CX01_INV)), systematic(0.2, inverse_behavior="fixed"), np.eye(4))
    assert f < 1 - 1e-3


def test_mixed_coherent_hidden_inverse_cancels():
    model = GateErrorModel({"CX": MixedUnitaryNoise(ZZ, 0.1, 1.0)})
    assert fidelity_to(Circuit(2, (CX01, CX01_INV)), model, np.eye(4)) == pytest.approx(1.0, abs=1e-12)


def test_quasi_static_draw_shared_by_inverse():
    model = GateErrorModel({"CX": OverRotationNoise(sigma=0.3)})
    nc = NoisyCircuit(Circuit(2, (CX01, CX01_INV)), model)
    for seed in range(5):
        r = nc.realize(np.random.default_rng(seed))
        assert r["CX"] != 0
        assert unitary_fidelity_of_superop(nc.superoperator(None, r), np.eye(4)) == pytest.approx(1.0, abs=1e-12)


def test_commuting_middle_gate_still_cancels():
    # RZ on the control commutes with the ZX error
    c = Circuit(2, (CX01, GateRef("RZ", (0,), fixed_angle=0.7), CX01_INV))
    ideal = circuit_unitary(c).matrix
    assert fidelity_to(c, systematic(0.2), ideal) == pytest.approx(1.0, abs=1e-12)


def test_non_commuting_middle_gate_bounded_by_commutator():
    eps = 0.1
    theta = 0.7
    c = Circuit(2, (CX01, GateRef("RY", (1,), fixed_angle=theta), CX01_INV))
    ideal = circuit_unitary(c).matrix
    loss = 1 - fidelity_to(c, systematic(eps), ideal)
    e_inv = gates.pauli_rotation(ZX, -eps * np.pi / 2)
    r = np.kron(np.eye(2), gates.ry(theta))
    comm = np.linalg.norm(r @ e_inv - e_inv @ r, 2)
    assert 0 < loss <= comm**2


def test_side_matters_for_non_commuting_errors():
    model_after = GateErrorModel({"H": MixedUnitaryNoise(gates.Z, 0.2)})
    model_before = GateErrorModel({"H": MixedUnitaryNoise(gates.Z, 0.2)}, side="before")
    c = Circuit(1, (GateRef("H", (0,)),))
    a = NoisyCircuit(c, model_after).evolve_array(init_state(1, "0").data)
    b = NoisyCircuit(c, model_before).evolve_array(init_state(1, "0").data)
    assert not np.allclose(a, b)


def test_superoperator_matches_evolution():
    rng = np.random.default_rng(8)
    model = GateErrorModel({"CX": MixedUnitaryNoise(ZZ, 0.3, 0.4)})
    c = Circuit(2, (GateRef("H", (0,)), CX01, GateRef("RX", (1,), param_slot=0), CX01_INV))
    nc = NoisyCircuit(c, model)
    rho = random_density(2, rng)
    s = nc.superoperator([0.4])
    vec = s @ rho.reshape(-1, order="F")
    assert np.allclose(vec.reshape(4, 4, order="F"), nc.evolve_array(rho, [0.4]), atol=1e-13)


def test_run_checks_register_size():
    nc = NoisyCircuit(Circuit(2, (CX01,)))
    with pytest.raises(InputError):
        nc.run(init_state(1, "0"))
    out = nc.run(init_state(2, "10"))
    assert np.allclose(out.data, init_state(2, "11").data)
