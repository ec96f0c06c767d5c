"""1 -> 2 asymmetric telecloning of a qubit.

Output qubits are ordered (A, B, C): Anne's ancilla, Bob's clone, Claire's clone.
``p`` weights Bob and ``q = 1 - p`` weights Claire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocol import (
    SX,
    SZ,
    Channel,
    LruoPair,
    OutputBasis,
    VerificationError,
    build_channel,
    verify_lruo,
)
from .tensor import DensityMatrix, PureState, ShapeError, min_eigenvalue, partial_trace, partial_transpose

SQRT3_MINUS_1 = math.sqrt(3.0) - 1.0
BELL_NAMES = ("Phi+", "Phi-", "Psi+", "Psi-")


class InterpretationMismatch(VerificationError):
    """Closed-form PPT curve disagrees with the computed partial-transpose eigenvalue."""

    def __init__(self, which: str, p: float, closed: float, computed: float):
        super().__init__(f"{which}({p}) closed form {closed!r} vs min PT eigenvalue {computed!r}")
        self.which = which
        self.p = p
        self.closed = closed
        self.computed = computed


@dataclass(frozen=True)
class AsymSpec:
    p: float
    basis: OutputBasis
    lruo: LruoPair

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def norm(self) -> float:
        return 1.0 + self.p**2 + self.q**2


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


def asym_lruo() -> LruoPair:
    return LruoPair((SX, SX, SX), (SZ, SZ, SZ))


def asym_basis(p: float) -> AsymSpec:
    p = _check_p(p)
    q = 1.0 - p
    phi0 = np.zeros(8, dtype=complex)
    phi1 = np.zeros(8, dtype=complex)
    phi0[[0b000, 0b101, 0b110]] = [1.0, p, q]
    phi1[[0b111, 0b010, 0b001]] = [1.0, p, q]
    norm = math.sqrt(1.0 + p * p + q * q)
    basis = OutputBasis.from_vectors((2, 2, 2), [phi0 / norm, phi1 / norm])
    pair = asym_lruo()
    check = verify_lruo(pair, basis)
    if not check.ok:
        raise VerificationError(f"asymmetric LRUO fails at p={p} (residual {check.residual:.3e})")
    return AsymSpec(p, basis, pair)


def asym_channel(spec: AsymSpec) -> Channel:
    """Port P then (A, B, C)."""
    return build_channel(spec.basis)


def orthogonal_qubit(psi: PureState) -> PureState:
    a0, a1 = psi.amps
    return PureState(psi.shape, np.array([-a1.conjugate(), a0.conjugate()]))


@dataclass(frozen=True)
class AsymDensities:
    """Reduced states of (A, B, C). ``f_a`` scores the ancilla against the
    conjugated input; ``f_a_direct`` against the input itself."""

    rho_a: DensityMatrix
    rho_b: DensityMatrix
    rho_c: DensityMatrix
    f_a: float
    f_b: float
    f_c: float
    closed_form_residual: float
    f_a_direct: float


def closed_form_clone(psi: PureState, keep: float, flip: float) -> np.ndarray:
    perp = orthogonal_qubit(psi).amps
    return keep * np.outer(psi.amps, psi.amps.conj()) + flip * np.outer(perp, perp.conj())


def asym_densities(spec: AsymSpec, psi: PureState, tol: float = 1e-12) -> AsymDensities:
    if psi.dims != (2,):
        raise ShapeError("asymmetric telecloning takes a single qubit input")
    out = spec.basis.encode(psi.amps)
    rho_a, rho_b, rho_c = (partial_trace(out, [i]) for i in range(3))
    p, q, n = spec.p, spec.q, spec.norm
    # The ancilla carries the complex conjugate of the input: its closed form is
    # written in terms of psi*, which coincides with psi for real amplitudes.
    conj = PureState(psi.shape, psi.amps.conj())
    expected = (
        closed_form_clone(conj, 1 / n, (p * p + q * q) / n),
        closed_form_clone(psi, (1 + p * p) / n, q * q / n),
        closed_form_clone(psi, (1 + q * q) / n, p * p / n),
    )
    residual = max(
        float(np.abs(r.entries - e).max()) for r, e in zip((rho_a, rho_b, rho_c), expected)
    )
    if residual > tol:
        raise VerificationError(f"reduced clone states deviate from closed form by {residual:.3e}")
    return AsymDensities(
        rho_a,
        rho_b,
        rho_c,
        rho_a.expectation(conj),
        rho_b.expectation(psi),
        rho_c.expectation(psi),
        residual,
        rho_a.expectation(psi),
    )


def c_b(p: float) -> float:
    return (1 - 4 * p + p * p) / (4 * (1 - p + p * p))


def c_c(p: float) -> float:
    return (-2 + 2 * p + p * p) / (4 * (1 - p + p * p))


def port_reduction(spec: AsymSpec, receiver: str) -> DensityMatrix:
    """Port plus one of 'A', 'B', 'C' from the channel state."""
    idx = {"A": 1, "B": 2, "C": 3}[receiver]
    return partial_trace(asym_channel(spec).state, [0, idx])


@dataclass(frozen=True)
class PptCurves:
    p: float
    c_b: float
    c_c: float
    computed_b: float
    computed_c: float


def ppt_curves(p: float, tol: float = 1e-9) -> PptCurves:
    """Closed-form curves, cross-checked against the min eigenvalue of the partial transpose."""
    spec = asym_basis(p)
    got_b = min_eigenvalue(partial_transpose(port_reduction(spec, "B"), [1]))
    got_c = min_eigenvalue(partial_transpose(port_reduction(spec, "C"), [1]))
    cb, cc = c_b(spec.p), c_c(spec.p)
    if abs(cb - got_b) > tol:
        raise InterpretationMismatch("c_B", spec.p, cb, got_b)
    if abs(cc - got_c) > tol:
        raise InterpretationMismatch("c_C", spec.p, cc, got_c)
    return PptCurves(spec.p, cb, cc, got_b, got_c)


def _bell_states() -> np.ndarray:
    s = 1 / math.sqrt(2)
    return np.array(
        [[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]], dtype=complex
    )


@dataclass(frozen=True)
class WernerForm:
    weights: dict[str, float]
    expected: dict[str, float]
    off_diagonal: float
    residual: float


def werner_form(spec: AsymSpec, tol: float = 1e-10) -> WernerForm:
    """Port-Bob reduction expressed in the Bell basis (Phi+, Phi-, Psi+, Psi-)."""
    rho = port_reduction(spec, "B").entries
    b = _bell_states()
    in_bell = b.conj() @ rho @ b.T
    diag = np.real(np.diag(in_bell))
    off = float(np.abs(in_bell - np.diag(np.diag(in_bell))).max())
    if off > tol:
        raise VerificationError(f"port-Bob state is not Bell diagonal (off-diagonal {off:.3e})")
    n, q = spec.norm, spec.q
    closed = [(1 + spec.p) ** 2 / (2 * n)] + [q * q / (2 * n)] * 3
    weights = dict(zip(BELL_NAMES, map(float, diag)))
    expected = dict(zip(BELL_NAMES, closed))
    residual = max(abs(weights[k] - expected[k]) for k in BELL_NAMES)
    return WernerForm(weights, expected, off, residual)


@dataclass(frozen=True)
class FidelityRatio:
    ratio: tuple[float, float, float]
    measured: tuple[float, float, float]
    residual: float


def fidelity_ratio(spec: AsymSpec, psi: PureState | None = None, tol: float = 1e-10) -> FidelityRatio:
    """``(1 + p^2) : (1 + q^2) : 1`` for Bob, Claire, Anne, checked against measured fidelities."""
    if psi is None:
        psi = PureState.from_amplitudes((2,), [1.0, 0.0])
    dens = asym_densities(spec, psi)
    ratio = (1 + spec.p**2, 1 + spec.q**2, 1.0)
    measured = (dens.f_b, dens.f_c, dens.f_a)
    # fidelities scale as ratio / norm
    residual = max(abs(m * spec.norm - r) for m, r in zip(measured, ratio))
    if residual > tol:
        raise VerificationError(f"fidelity ratio off by {residual:.3e}")
    return FidelityRatio(ratio, measured, residual)
