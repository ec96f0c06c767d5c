import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdist.asymmetric import (
    SQRT3_MINUS_1,
    asym_basis,
    asym_channel,
    asym_densities,
    c_b,
    c_c,
    fidelity_ratio,
    orthogonal_qubit,
    port_reduction,
    ppt_curves,
    werner_form,
)
from qdist.protocol import VerificationError, sweep_distribution
from qdist.telecloning import clone_density, teleclone_basis
from qdist.tensor import PureState, entanglement_entropy, partial_trace, random_state

GRID = np.linspace(0, 1, 101)


def test_basis_is_orthonormal_and_normalized():
    for p in (0.0, 0.3, 0.5, SQRT3_MINUS_1, 1.0):
        spec = asym_basis(p)
        m = spec.basis.matrix
        assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12)
        assert spec.norm == pytest.approx(1 + p * p + (1 - p) ** 2)
        assert spec.norm == pytest.approx(2 * (1 - p + p * p))


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_p_out_of_range(p):
    with pytest.raises(ValueError):
        asym_basis(p)


def test_zero_asymmetry_channel_is_two_bell_pairs():
    state = asym_channel(asym_basis(0.0)).state
    # particles: port, A, B, C. Port-C and A-B are each one e-bit; the pairs are unentangled.
    assert entanglement_entropy(state, [0, 3]) == pytest.approx(0.0, abs=1e-12)
    assert entanglement_entropy(state, [0]) == pytest.approx(1.0)
    assert entanglement_entropy(state, [1]) == pytest.approx(1.0)


def test_half_matches_symmetric_telecloning_reductions(rng):
    asym = asym_basis(0.5)
    sym = teleclone_basis(2, 2)
    for _ in range(5):
        psi = random_state((2,), rng)
        dens = asym_densities(asym, psi)
        rho_c = clone_density(sym, psi).rho_clones
        assert np.allclose(dens.rho_b.entries, partial_trace(rho_c, [0]).entries, atol=1e-10)
        assert np.allclose(dens.rho_c.entries, partial_trace(rho_c, [1]).entries, atol=1e-10)


def test_orthogonal_qubit():
    psi = PureState.from_amplitudes((2,), [0.6, 0.8j])
    perp = orthogonal_qubit(psi)
    assert abs(np.vdot(psi.amps, perp.amps)) < 1e-15


def test_point_values_at_sqrt3_minus_1():
    spec = asym_basis(SQRT3_MINUS_1)
    dens = asym_densities(spec, PureState.from_amplitudes((2,), [0.6, 0.8]))
    assert dens.f_b == pytest.approx(2 / 3 + math.sqrt(3) / 6, abs=1e-10)
    assert dens.f_c == pytest.approx(2 / 3, abs=1e-10)
    assert dens.f_a == pytest.approx(1 / spec.norm, abs=1e-10)
    assert c_c(SQRT3_MINUS_1) == pytest.approx(0.0, abs=1e-12)
    assert ppt_curves(SQRT3_MINUS_1).computed_c == pytest.approx(0.0, abs=1e-10)


def test_symmetric_point_fidelities(rng):
    spec = asym_basis(0.5)
    dens = asym_densities(spec, random_state((2,), rng))
    assert dens.f_b == pytest.approx(5 / 6, abs=1e-12)
    assert dens.f_c == pytest.approx(5 / 6, abs=1e-12)


def test_ancilla_holds_conjugate_input():
    """For complex inputs the ancilla's fidelity with psi differs from 1/N; with psi* it equals 1/N."""
    spec = asym_basis(0.3)
    plus_i = PureState.from_amplitudes((2,), np.array([1, 1j]) / math.sqrt(2))
    dens = asym_densities(spec, plus_i)
    assert dens.f_a == pytest.approx(1 / spec.norm, abs=1e-12)
    assert dens.f_a_direct == pytest.approx(1 - 1 / spec.norm, abs=1e-12)


def test_ancilla_fidelity_bound_on_grid():
    vals = [1 / asym_basis(p).norm for p in GRID]
    assert max(vals) <= 2 / 3 + 1e-12
    assert vals[50] == pytest.approx(2 / 3, abs=1e-12)
    assert all(v < 2 / 3 - 1e-6 for i, v in enumerate(vals) if i != 50)


def test_clone_fidelities_are_input_independent():
    rng = np.random.default_rng(99)
    spec = asym_basis(0.3)
    fb, fc = [], []
    for _ in range(50):
        d = asym_densities(spec, random_state((2,), rng))
        fb.append(d.f_b)
        fc.append(d.f_c)
    assert np.var(fb) < 1e-10
    assert np.var(fc) < 1e-10


@pytest.mark.parametrize(
    "p,cb,cc", [(0.5, -0.25, -0.25), (0.0, 0.25, -0.5)]
)
def test_ppt_curve_examples(p, cb, cc):
    curves = ppt_curves(p)
    assert curves.c_b == pytest.approx(cb)
    assert curves.c_c == pytest.approx(cc)


def test_ppt_curve_at_point_three_against_eigensolve():
    rho = port_reduction(asym_basis(0.3), "B").entries.reshape(2, 2, 2, 2)
    pt = rho.transpose(0, 3, 2, 1).reshape(4, 4)  # independent partial transpose on Bob
    assert np.linalg.eigvalsh(pt).min() == pytest.approx((1 - 1.2 + 0.09) / (4 * 0.79), abs=1e-9)


def test_ppt_curves_on_grid():
    for p in GRID:
        curves = ppt_curves(p)
        assert abs(curves.c_b - curves.computed_b) < 1e-9
        assert abs(curves.c_c - curves.computed_c) < 1e-9


def test_closed_form_curves_are_symmetric_under_exchange():
    for p in GRID:
        assert c_c(p) == pytest.approx(c_b(1 - p), abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.5, SQRT3_MINUS_1, 1.0])
def test_werner_form(p):
    w = werner_form(asym_basis(p))
    assert w.off_diagonal < 1e-10
    assert w.residual < 1e-12
    assert sum(w.weights.values()) == pytest.approx(1.0)


def test_werner_form_examples():
    assert werner_form(asym_basis(0.5)).weights["Phi+"] == pytest.approx(0.75, abs=1e-12)
    assert werner_form(asym_basis(1.0)).weights["Phi+"] == pytest.approx(1.0, abs=1e-12)
    w = werner_form(asym_basis(0.3)).weights
    assert w["Phi+"] == pytest.approx(1.69 / 3.16, abs=1e-12)
    for k in ("Phi-", "Psi+", "Psi-"):
        assert w[k] == pytest.approx(0.49 / 3.16, abs=1e-12)


@pytest.mark.parametrize("p,expected", [(0.5, (1.25, 1.25, 1.0)), (1.0, (2.0, 1.0, 1.0))])
def test_fidelity_ratio_examples(p, expected):
    r = fidelity_ratio(asym_basis(p))
    assert r.ratio == pytest.approx(expected)
    assert r.residual < 1e-10


def test_fidelity_ratio_at_sqrt3_minus_1():
    r = fidelity_ratio(asym_basis(SQRT3_MINUS_1))
    assert r.ratio[0] == pytest.approx(5 - 2 * math.sqrt(3))


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0, 1), seed=st.integers(0, 2**31 - 1))
def test_protocol_delivers_encoded_state(p, seed):
    spec = asym_basis(p)
    psi = random_state((2,), np.random.default_rng(seed))
    for r in sweep_distribution(psi, asym_channel(spec), spec.lruo):
        assert r.fidelity == pytest.approx(1.0, abs=1e-12)


def test_densities_reject_qutrit_input():
    with pytest.raises(ValueError):
        asym_densities(asym_basis(0.5), PureState.from_amplitudes((3,), [1, 0, 0]))


def test_closed_form_mismatch_is_reported(monkeypatch):
    import qdist.asymmetric as mod

    monkeypatch.setattr(mod, "c_b", lambda p: 0.0)
    with pytest.raises(mod.InterpretationMismatch) as info:
        mod.ppt_curves(0.5)
    assert info.value.computed == pytest.approx(-0.25)
    assert isinstance(info.value, VerificationError)
