import math

import numpy as np
import pytest

from qdist.protocol import (
    SX,
    SZ,
    LruoPair,
    OutputBasis,
    VerificationError,
    bell_basis,
    build_channel,
    computational_basis,
    computational_lruo,
    find_product_pauli_lruo,
    lruo_apply,
    phase_matrix,
    ruo,
    run_distribution,
    shift_matrix,
    sweep_distribution,
    verify_lruo,
)
from qdist.tensor import PureState, basis_state, entanglement_entropy, kron_all, random_state


def bell_matrix(d):
    return np.array([bell_basis(d)[n, m].amps for n in range(d) for m in range(d)])


def test_bell_basis_qubit_examples():
    b = bell_basis(2)
    assert np.allclose(b[0, 0].amps, np.array([1, 0, 0, 1]) / math.sqrt(2))
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert abs(np.vdot(singlet, b[1, 1].amps)) == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_bell_basis_is_orthonormal(d):
    m = bell_matrix(d)
    assert np.allclose(m.conj() @ m.T, np.eye(d * d), atol=1e-12)
    for s in bell_basis(d).values():
        assert entanglement_entropy(s, [0]) == pytest.approx(math.log2(d))


def test_output_basis_rejects_non_orthonormal_vectors():
    with pytest.raises(ValueError):
        OutputBasis.from_vectors((2,), [[1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])


def test_channel_for_single_qubit_is_bell_pair():
    ch = build_channel(computational_basis(2))
    assert np.allclose(ch.state.amps, bell_basis(2)[0, 0].amps)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_channel_carries_log_d_ebits(d):
    ch = build_channel(computational_basis(d, 2))
    assert entanglement_entropy(ch.state, [0]) == pytest.approx(math.log2(d), abs=1e-9)


def test_ruo_examples():
    assert np.allclose(ruo(2, 0, 0, computational_basis(2)).entries, np.eye(2))
    assert np.allclose(ruo(2, 0, 1, computational_basis(2)).entries, SX)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(ruo(3, 1, 0, computational_basis(3)).entries, np.diag([1, w, w * w]))


@pytest.mark.parametrize("d,n_particles", [(2, 1), (3, 1), (2, 3), (3, 2)])
def test_lruo_agrees_with_ruo_on_the_subspace(rng, d, n_particles):
    basis = computational_basis(d, n_particles)
    pair = computational_lruo(d, n_particles)
    for n in range(d):
        for m in range(d):
            u = ruo(d, n, m, basis).entries
            for phi in basis.states:
                local = lruo_apply(pair, n, m, phi).amps
                assert np.allclose(local, u @ phi.amps, atol=1e-12)


def test_lruo_identity_outcome_is_noop(rng):
    pair = computational_lruo(3, 2)
    psi = random_state((3, 3), rng)
    assert np.allclose(lruo_apply(pair, 0, 0, psi).amps, psi.amps)


def test_verify_lruo_rejects_identity_pair():
    basis = computational_basis(2, 3)
    eye = (np.eye(2, dtype=complex),) * 3
    check = verify_lruo(LruoPair(eye, eye), basis)
    assert not check.ok
    assert check.residual > 0.5


def test_lruo_pair_rejects_non_unitary_factor():
    with pytest.raises(ValueError):
        LruoPair((np.diag([1.0, 2.0]),), (SZ,))


def test_shift_and_phase_generators():
    d = 4
    s, p = shift_matrix(d), phase_matrix(d)
    for j in range(d):
        e = np.eye(d)[j]
        assert np.allclose(s @ e, np.eye(d)[(j - 1) % d])
        assert np.allclose(p @ e, np.exp(2j * np.pi * j / d) * e)


def test_product_pauli_search_on_repetition_code():
    pair = find_product_pauli_lruo(computational_basis(2, 3))
    assert pair is not None
    assert np.allclose(pair.full("u01"), kron_all([SX] * 3))
    assert np.allclose(pair.full("u10"), kron_all([SZ] * 3))


def test_product_pauli_search_gives_up_on_random_basis(rng):
    q, _ = np.linalg.qr(rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2)))
    basis = OutputBasis.from_vectors((2, 2, 2), q.T)
    assert find_product_pauli_lruo(basis) is None


def teleport_oracle(psi, d, n, m):
    """Textbook teleportation written from scratch with explicit projections."""
    chan = np.zeros(d * d, dtype=complex)
    for j in range(d):
        chan[j * d + j] = 1 / math.sqrt(d)
    full = np.kron(psi.amps, chan).reshape(d * d, d)
    bell = bell_basis(d)[n, m].amps
    out = bell.conj() @ full
    return out / np.linalg.norm(out), np.vdot(out, out).real


@pytest.mark.parametrize("d", [2, 3, 4])
def test_branches_match_textbook_oracle(rng, d):
    psi = random_state((d,), rng)
    ch = build_channel(computational_basis(d))
    pair = computational_lruo(d)
    for r in sweep_distribution(psi, ch, pair):
        raw, prob = teleport_oracle(psi, d, r.outcome.n, r.outcome.m)
        assert r.outcome.probability == pytest.approx(prob, abs=1e-12)
        assert r.outcome.probability == pytest.approx(1 / d**2, abs=1e-12)
        assert r.fidelity == pytest.approx(1.0, abs=1e-12)


def test_sampled_run_is_seed_deterministic(rng):
    psi = random_state((3,), rng)
    ch = build_channel(computational_basis(3))
    pair = computational_lruo(3)
    a = run_distribution(psi, ch, pair, seed=7)
    b = run_distribution(psi, ch, pair, seed=7)
    assert (a.outcome.n, a.outcome.m) == (b.outcome.n, b.outcome.m)
    assert a.transcript.events == b.transcript.events
    assert a.transcript.classical_bits() == pytest.approx(2 * math.log2(3))


def test_run_rejects_failing_pair(rng):
    ch = build_channel(computational_basis(2, 2))
    eye = (np.eye(2, dtype=complex),) * 2
    with pytest.raises(VerificationError):
        run_distribution(random_state((2,), rng), ch, LruoPair(eye, eye), outcome=(0, 1))


def test_run_rejects_wrong_input_dimension(rng):
    ch = build_channel(computational_basis(2))
    with pytest.raises(ValueError):
        run_distribution(random_state((3,), rng), ch, computational_lruo(2), outcome=(0, 0))


def test_multi_particle_output_receives_encoded_state():
    psi = PureState.from_amplitudes((2,), [0.6, 0.8])
    ch = build_channel(computational_basis(2, 3))
    for r in sweep_distribution(psi, ch, computational_lruo(2, 3)):
        assert np.allclose(r.receiver.amps, 0.6 * basis_state((2,) * 3, [0, 0, 0]).amps + 0.8 * basis_state((2,) * 3, [1, 1, 1]).amps)
