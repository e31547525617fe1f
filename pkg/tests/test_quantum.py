import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebsim._validation import (
    ConditioningError,
    DuplicateRegisterError,
    InvalidParameterError,
    RegisterError,
)
from ebsim.quantum import (
    CIRCULAR,
    LINEAR,
    QWP,
    SPIN_X,
    SPIN_Z,
    DensityMatrix,
    H,
    PureState,
    X,
    Z,
    apply_gate,
    apply_operator,
    bell_state,
    measure,
    partial_trace,
    photon,
    spin,
    state_fidelity,
    tensor,
    to_density,
)

S2 = 1 / np.sqrt(2)
P, S = photon("p"), spin("s")


def random_state(rng, regs, norm=1.0):
    v = rng.normal(size=2 ** len(regs)) + 1j * rng.normal(size=2 ** len(regs))
    return PureState(regs, norm * v / np.linalg.norm(v))


def test_tensor_basis_states():
    psi = tensor(PureState.basis([P], ["R"]), PureState.basis([S], ["up"]))
    assert psi.names == ("p", "s")
    assert psi.amplitude("R", "up") == 1
    assert psi.weight == 1


def test_tensor_equal_superposition():
    psi = tensor(PureState.qubit(P, S2, S2), PureState.qubit(S, S2, S2))
    assert np.allclose(psi.amplitudes, 0.5, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), na=st.floats(0.1, 1.0), nb=st.floats(0.1, 1.0))
def test_tensor_norm_is_product(seed, na, nb):
    rng = np.random.default_rng(seed)
    a = random_state(rng, [P], na)
    b = random_state(rng, [S, spin("s2")], nb)
    ab = tensor(a, b)
    assert np.sqrt(ab.weight) == pytest.approx(na * nb, abs=1e-12)
    assert np.allclose(ab.amplitudes, np.kron(a.amplitudes, b.amplitudes))


def test_tensor_duplicate_register():
    with pytest.raises(DuplicateRegisterError):
        tensor(PureState.qubit(P, 1, 0), PureState.qubit(photon("p"), 1, 0))


def test_hadamard_on_photon():
    out = apply_gate(PureState.basis([P], ["R"]), "p", H)
    assert np.allclose(out.amplitudes, [S2, S2], atol=1e-15)
    out = apply_gate(PureState.basis([P], ["L"]), "p", H)
    assert np.allclose(out.amplitudes, [S2, -S2], atol=1e-15)


def test_hadamard_on_spin_plus():
    out = apply_gate(PureState.qubit(S, S2, S2), "s", H)
    assert np.allclose(out.amplitudes, [1, 0], atol=1e-15)


def test_qwp_is_circular_to_linear():
    assert np.allclose(QWP @ CIRCULAR.kets, LINEAR.kets)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.integers(0, 2))
def test_hadamard_involution_and_norm(seed, which):
    rng = np.random.default_rng(seed)
    regs = [P, S, spin("t")]
    psi = random_state(rng, regs, 0.8)
    name = regs[which].name
    once = apply_gate(psi, name, H)
    assert once.weight == pytest.approx(psi.weight, abs=1e-12)
    twice = apply_gate(once, name, H)
    assert np.allclose(twice.amplitudes, psi.amplitudes, atol=1e-12)


def test_gate_errors():
    psi = PureState.qubit(P, 1, 0)
    with pytest.raises(RegisterError):
        apply_gate(psi, "nope", H)
    with pytest.raises(InvalidParameterError):
        apply_gate(psi, "p", np.eye(3))


def test_apply_operator_matches_kron():
    rng = np.random.default_rng(3)
    psi = random_state(rng, [P, S, spin("t")])
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    op /= np.linalg.norm(op, 2)
    out = apply_operator(psi, ["p", "t"], op)
    # reference: move t next to p, act, move back
    ref = psi.reorder(["p", "t", "s"]).amplitudes
    ref = np.kron(op, np.eye(2)) @ ref
    ref = PureState([P, spin("t"), S], ref).reorder(["p", "s", "t"]).amplitudes
    assert np.allclose(out.amplitudes, ref, atol=1e-12)


BELL_RU_LD = PureState([P, S], [S2, 0, 0, S2])


def test_measure_bell_in_circular_basis():
    recs = measure(BELL_RU_LD, "p", CIRCULAR)
    assert [r.outcome for r in recs] == ["R", "L"]
    assert [r.probability for r in recs] == pytest.approx([0.5, 0.5], abs=1e-15)
    assert state_fidelity(recs[0].remainder, PureState.basis([S], ["up"])) == pytest.approx(1, abs=1e-12)
    assert state_fidelity(recs[1].remainder, PureState.basis([S], ["down"])) == pytest.approx(1, abs=1e-12)


def test_measure_bell_in_linear_basis():
    h, v = measure(BELL_RU_LD, "p", LINEAR)
    assert (h.outcome, v.outcome) == ("H", "V")
    assert h.probability == pytest.approx(0.5, abs=1e-15)
    assert v.probability == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(h.remainder.amplitudes, [S2, S2], atol=1e-12)
    assert np.allclose(v.remainder.amplitudes, [S2, -S2], atol=1e-12)


def test_measure_basis_state_keeps_register():
    psi = PureState.basis([P, S], ["R", "up"])
    up, down = measure(psi, "s", SPIN_Z)
    assert up.probability == 1 and down.probability == 0
    assert up.state.names == ("p", "s")
    assert up.state.amplitude("R", "up") == pytest.approx(1)
    assert down.state is None


def test_measure_zero_norm():
    with pytest.raises(ConditioningError):
        measure(PureState([P], [0, 0]), "p", CIRCULAR)


def test_measure_conditional_probabilities():
    psi = PureState([P, S], [0.3, 0, 0, 0.4])
    recs = measure(psi, "p", CIRCULAR, conditional=True)
    assert sum(r.probability for r in recs) == pytest.approx(1, abs=1e-12)
    assert recs[0].probability == pytest.approx(0.09 / 0.25, abs=1e-12)


bases = st.sampled_from([CIRCULAR, LINEAR, SPIN_Z, SPIN_X])


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.integers(0, 2), basis=bases, norm=st.floats(0.05, 1.0),
       density=st.booleans())
def test_measurement_probabilities_sum_to_weight(seed, which, basis, norm, density):
    rng = np.random.default_rng(seed)
    regs = [P, S, spin("t")]
    psi = random_state(rng, regs, norm)
    state = psi.to_density() if density else psi
    recs = measure(state, regs[which].name, basis)
    assert sum(r.probability for r in recs) == pytest.approx(state.weight, abs=1e-12)
    for r in recs:
        assert 0 <= r.probability <= 1
        if r.state is not None:
            assert r.state.weight == pytest.approx(1, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), norm=st.floats(0.05, 1.0))
def test_pure_and_density_paths_agree(seed, norm):
    rng = np.random.default_rng(seed)
    regs = [P, S, spin("t")]
    psi = random_state(rng, regs, norm)
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    op /= np.linalg.norm(op, 2)
    a = to_density(apply_operator(psi, ["t", "p"], op)).matrix
    b = apply_operator(to_density(psi), ["t", "p"], op).matrix
    assert np.allclose(a, b, atol=1e-10)
    ket = LINEAR.ket("V")
    assert np.allclose(psi.project("s", ket).to_density().matrix, psi.to_density().project("s", ket).matrix,
                       atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_over_nothing(seed):
    psi = random_state(np.random.default_rng(seed), [P, S])
    rho = partial_trace(psi, [])
    assert np.allclose(rho.matrix, np.outer(psi.amplitudes, psi.amplitudes.conj()), atol=1e-12)


def test_partial_trace_matches_einsum():
    rng = np.random.default_rng(11)
    regs = [P, S, spin("t")]
    rho = random_state(rng, regs).to_density()
    t = rho.matrix.reshape((2,) * 6)
    ref = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    assert np.allclose(partial_trace(rho, ["s"]).matrix, ref, atol=1e-12)
    assert partial_trace(rho, ["s"]).names == ("p", "t")


def test_bell_fidelity_examples():
    a, b = photon("a"), photon("b")
    phi = bell_state("Phi+", a, b)
    assert state_fidelity(to_density(phi), phi) == pytest.approx(1, abs=1e-12)
    mixed = DensityMatrix.maximally_mixed([a, b])
    assert state_fidelity(mixed, phi) == pytest.approx(0.25, abs=1e-12)
    reduced = partial_trace(phi, ["b"])
    assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_bell_states_orthonormal():
    a, b = spin("a"), spin("b")
    names = ["Phi+", "Phi-", "Psi+", "Psi-"]
    gram = np.array([[np.vdot(bell_state(x, a, b).amplitudes, bell_state(y, a, b).amplitudes) for y in names]
                     for x in names])
    assert np.allclose(gram, np.eye(4), atol=1e-15)


def test_fidelity_ignores_register_order_and_global_phase():
    a, b = spin("a"), spin("b")
    psi = bell_state("Psi+", a, b)
    flipped = PureState([b, a], -1j * psi.reorder(["b", "a"]).amplitudes)
    assert state_fidelity(flipped, psi) == pytest.approx(1, abs=1e-12)


def test_fidelity_register_mismatch():
    with pytest.raises(RegisterError):
        state_fidelity(PureState.qubit(P, 1, 0), PureState.qubit(S, 1, 0))


def test_pure_state_validation():
    with pytest.raises(InvalidParameterError):
        PureState([P, S], [1, 0, 0])
    with pytest.raises(InvalidParameterError):
        PureState([P], [1, 1])
    with pytest.raises(InvalidParameterError):
        PureState([P], [np.nan, 0])
    with pytest.raises(InvalidParameterError):
        PureState.basis([P], ["up"])
    with pytest.raises(InvalidParameterError):
        PureState([photon(f"p{i}") for i in range(9)], np.eye(2**9)[0])


def test_density_validation():
    with pytest.raises(InvalidParameterError):
        DensityMatrix([P], [[0.5, 0.5j], [0.5j, 0.5]])  # not Hermitian
    with pytest.raises(InvalidParameterError):
        DensityMatrix([P], [[1.5, 0], [0, -0.5]])  # trace ok, not PSD
    with pytest.raises(InvalidParameterError):
        DensityMatrix([P], np.eye(2))  # trace 2


def test_states_are_immutable():
    psi = PureState.qubit(P, 1, 0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0
    out = apply_gate(psi, "p", X)
    assert psi.amplitude("R") == 1 and out.amplitude("L") == 1


def test_z_and_x_act_on_labels():
    psi = PureState.qubit(S, S2, S2)
    assert np.allclose(apply_gate(psi, "s", Z).amplitudes, [S2, -S2])
    assert np.allclose(apply_gate(PureState.basis([S], ["up"]), "s", X).amplitudes, [0, 1])
