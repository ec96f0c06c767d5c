"""Generalized teleportation: distribute one d-level state into a multiparticle output basis.

The input and port are single d-level particles in the computational basis.
The receivers' particles carry an arbitrary orthonormal output basis ``{|phi_j>}``
and recover the state with a product of local unitaries built from two
generators: a cyclic shift ``U01 |phi_j> = |phi_{j-1}>`` and a phase
``U10 |phi_j> = exp(2 pi i j / d) |phi_j>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (
    TOL,
    Operator,
    ParticleShape,
    PureState,
    ShapeError,
    apply_product,
    entanglement_entropy,
    is_unitary,
    kron_all,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class VerificationError(RuntimeError):
    """A constructed object failed its numerical self-check."""


@dataclass(frozen=True)
class OutputBasis:
    d: int
    shape: ParticleShape
    states: tuple[PureState, ...]

    def __post_init__(self):
        if len(self.states) != self.d:
            raise ValueError(f"need {self.d} basis states, got {len(self.states)}")
        for s in self.states:
            if s.shape != self.shape:
                raise ShapeError("basis states disagree on particle shape")
        dev = gram_deviation(self.matrix)
        if dev > TOL:
            raise ValueError(f"output basis is not orthonormal (deviation {dev:.3e})")

    @classmethod
    def from_vectors(cls, dims, vectors, normalize: bool = False) -> "OutputBasis":
        shape = dims if isinstance(dims, ParticleShape) else ParticleShape(tuple(dims))
        states = tuple(PureState.from_amplitudes(shape, v, normalize=normalize) for v in vectors)
        return cls(len(states), shape, states)

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as columns, shape ``(total, d)``."""
        return np.array([s.amps for s in self.states]).T

    def encode(self, amplitudes: np.ndarray) -> PureState:
        """The state ``sum_j a_j |phi_j>``."""
        return PureState(self.shape, self.matrix @ np.asarray(amplitudes, dtype=complex))


def computational_basis(d: int, n: int = 1) -> OutputBasis:
    """``|phi_j> = |j j ... j>`` on n particles (n = 1 is plain teleportation)."""
    shape = ParticleShape((d,) * n)
    vecs = []
    for j in range(d):
        v = np.zeros(shape.total, dtype=complex)
        v[sum(j * d**i for i in range(n))] = 1.0
        vecs.append(v)
    return OutputBasis.from_vectors(shape, vecs)


def gram_deviation(columns: np.ndarray) -> float:
    g = columns.conj().T @ columns
    return float(np.abs(g - np.eye(g.shape[0])).max(initial=0.0))


@dataclass(frozen=True)
class Channel:
    basis: OutputBasis
    state: PureState
    receivers: tuple[tuple[int, ...], ...] = ()

    @property
    def d(self) -> int:
        return self.basis.d


@dataclass(frozen=True)
class BellOutcome:
    n: int
    m: int
    probability: float

    def __post_init__(self):
        if not -TOL <= self.probability <= 1 + TOL:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@dataclass(frozen=True)
class LruoPair:
    """Per-particle factors of the two generator unitaries."""

    u01: tuple[np.ndarray, ...]
    u10: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.u01) != len(self.u10):
            raise ShapeError("generators act on different particle counts")
        for f in self.u01 + self.u10:
            if not is_unitary(f):
                raise ValueError("LRUO factor is not unitary")

    @property
    def n(self) -> int:
        return len(self.u01)

    def full(self, which: str) -> np.ndarray:
        return kron_all(getattr(self, which))


def _omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def shift_matrix(d: int, m: int = 1) -> np.ndarray:
    """``sum_j |j><j+m mod d|``."""
    out = np.zeros((d, d), dtype=complex)
    for j in range(d):
        out[j, (j + m) % d] = 1.0
    return out


def phase_matrix(d: int, n: int = 1) -> np.ndarray:
    return np.diag(_omega(d) ** (n * np.arange(d)))


def bell_basis(d: int) -> dict[tuple[int, int], PureState]:
    """``|Phi_nm> = d^-1/2 sum_k exp(2 pi i k n / d) |k>|k+m mod d>``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    shape = ParticleShape((d, d))
    out = {}
    for n in range(d):
        for m in range(d):
            v = np.zeros(d * d, dtype=complex)
            for k in range(d):
                v[k * d + (k + m) % d] = _omega(d) ** (k * n)
            out[n, m] = PureState(shape, v / math.sqrt(d))
    return out


def build_channel(basis: OutputBasis, receivers: Sequence[Sequence[int]] | None = None) -> Channel:
    """``d^-1/2 sum_j |j>_port |phi_j>``; port is particle 0."""
    d = basis.d
    amps = np.zeros((d, basis.shape.total), dtype=complex)
    for j, s in enumerate(basis.states):
        amps[j] = s.amps
    state = PureState(ParticleShape((d,)) + basis.shape, amps.ravel() / math.sqrt(d))
    if receivers is None:
        receivers = [(i,) for i in range(basis.shape.n)]
    ch = Channel(basis, state, tuple(tuple(r) for r in receivers))
    ebits = entanglement_entropy(state, [0])
    if abs(ebits - math.log2(d)) > 1e-9:
        raise VerificationError(f"channel carries {ebits} e-bits across the sender cut")
    return ch


def ruo(d: int, n: int, m: int, basis: OutputBasis) -> Operator:
    """Global recovery unitary on span{phi_j}, identity on its complement."""
    if not (0 <= n < d and 0 <= m < d):
        raise ValueError(f"outcome ({n}, {m}) out of range for d={d}")
    phi = basis.matrix
    u = np.eye(basis.shape.total, dtype=complex) - phi @ phi.conj().T
    for j in range(d):
        u += _omega(d) ** (j * n) * np.outer(phi[:, j], phi[:, (j + m) % d].conj())
    return Operator(basis.shape, u, unitary=True)


def lruo_apply(pair: LruoPair, n: int, m: int, state: PureState) -> PureState:
    """Apply ``U10^n U01^m`` factor by factor."""
    if pair.n != state.shape.n:
        raise ShapeError(f"LRUO on {pair.n} particles applied to {state.shape.n}")
    f01 = [np.linalg.matrix_power(f, m) for f in pair.u01]
    f10 = [np.linalg.matrix_power(f, n) for f in pair.u10]
    return apply_product(state, [a @ b for a, b in zip(f10, f01)])


@dataclass(frozen=True)
class LruoCheck:
    ok: bool
    residual: float
    cyclic_residual: float
    phase_residual: float


def verify_lruo(pair: LruoPair, basis: OutputBasis, tol: float = TOL) -> LruoCheck:
    if pair.n != basis.shape.n:
        raise ShapeError("LRUO and basis disagree on particle count")
    d = basis.d
    cyc = ph = 0.0
    for j, phi in enumerate(basis.states):
        shifted = apply_product(phi, pair.u01).amps
        cyc = max(cyc, float(np.linalg.norm(shifted - basis.states[(j - 1) % d].amps)))
        phased = apply_product(phi, pair.u10).amps
        ph = max(ph, float(np.linalg.norm(phased - _omega(d) ** j * phi.amps)))
    worst = max(cyc, ph)
    return LruoCheck(worst <= tol, worst, cyc, ph)


_PAULI_BY_XZ = {(0, 0): I2, (1, 0): SX, (0, 1): SZ, (1, 1): SX @ SZ}
_PHASES = (1, 1j, -1, -1j)


def _bits(mask: int, n: int) -> list[int]:
    return [(mask >> (n - 1 - i)) & 1 for i in range(n)]


def _search_generator(vectors: np.ndarray, targets: np.ndarray, eigen: np.ndarray, tol: float):
    """All ``c X^x Z^z`` with ``c X^x Z^z v_j = eigen_j t_j`` for every j.

    Overlaps for every (x, z) come from one product with the Walsh sign matrix:
    ``<t|X^x Z^z|v> = sum_k (-1)^{popcount(k & z)} v[k] conj(t[k ^ x])``.
    """
    dim = vectors.shape[0]
    idx = np.arange(dim)
    pop = np.array([bin(i).count("1") for i in range(dim)])
    signs = (-1.0) ** pop[idx[:, None] & idx[None, :]]  # [z, k]
    ratio = None
    for j in range(vectors.shape[1]):
        w = vectors[:, j][None, :] * targets[idx[None, :] ^ idx[:, None], j].conj()  # [x, k]
        ov = w @ signs.T  # [x, z]
        good = np.abs(np.abs(ov) - 1.0) <= tol
        r = np.where(good, eigen[j] / np.where(good, ov, 1.0), np.nan)
        if ratio is None:
            ratio = r
        else:
            ratio = np.where(np.abs(ratio - r) <= tol, ratio, np.nan)
    hits = []
    for x, z in zip(*np.nonzero(~np.isnan(ratio))):
        c = ratio[x, z]
        for ph in _PHASES:
            if abs(c - ph) <= tol:
                hits.append((int(x), int(z), ph))
    return hits


def _factors(x: int, z: int, phase: complex, n: int) -> tuple[np.ndarray, ...]:
    fs = [_PAULI_BY_XZ[(a, b)] for a, b in zip(_bits(x, n), _bits(z, n))]
    fs[0] = phase * fs[0]
    return tuple(fs)


def _preference(x: int, z: int, n: int) -> tuple:
    # transversal (identical on every qubit) first, then fewest non-identity factors
    kinds = set(zip(_bits(x, n), _bits(z, n)))
    weight = sum(1 for k in zip(_bits(x, n), _bits(z, n)) if k != (0, 0))
    return (len(kinds), weight, x, z)


def find_product_pauli_lruo(basis: OutputBasis, tol: float = 1e-9) -> LruoPair | None:
    """Exhaustive search over phase * (product of I, X, Y, Z) for both generators.

    Returns the preferred verified pair or None when no product-Pauli pair exists.
    """
    if any(dim != 2 for dim in basis.shape.dims):
        raise ValueError("product-Pauli search needs every output particle to be a qubit")
    d, n = basis.d, basis.shape.n
    phi = basis.matrix
    cyc_targets = phi[:, [(j - 1) % d for j in range(d)]]
    cyc = _search_generator(phi, cyc_targets, np.ones(d, dtype=complex), tol)
    ph = _search_generator(phi, phi, _omega(d) ** np.arange(d), tol)
    if not cyc or not ph:
        return None
    x1, z1, c1 = min(cyc, key=lambda h: _preference(h[0], h[1], n))
    x2, z2, c2 = min(ph, key=lambda h: _preference(h[0], h[1], n))
    pair = LruoPair(_factors(x1, z1, c1, n), _factors(x2, z2, c2, n))
    if not verify_lruo(pair, basis).ok:
        raise VerificationError("search produced a pair that fails verification")
    return pair


@dataclass
class Transcript:
    """Record of every classical and quantum step of a run."""

    events: list[dict] = field(default_factory=list)

    def log(self, kind: str, **data) -> None:
        self.events.append({"step": len(self.events), "kind": kind, **data})

    def classical_bits(self) -> float:
        return sum(e.get("bits", 0.0) for e in self.events if e["kind"] == "broadcast")


@dataclass(frozen=True)
class DistributionResult:
    outcome: BellOutcome
    receiver: PureState
    target: PureState
    fidelity: float
    transcript: Transcript


def outcome_branches(input_state: PureState, channel: Channel) -> dict[tuple[int, int], np.ndarray]:
    """Unnormalized receiver states ``(<Phi_nm| (x) 1) |psi>|xi>`` for all d^2 outcomes."""
    d = channel.d
    if input_state.dims != (d,):
        raise ShapeError(f"input must be a single {d}-level particle, got {input_state.dims}")
    joint = np.kron(input_state.amps, channel.state.amps).reshape(d * d, -1)
    return {nm: phi.amps.conj() @ joint for nm, phi in bell_basis(d).items()}


def run_distribution(
    input_state: PureState,
    channel: Channel,
    pair: LruoPair,
    seed: int | None = None,
    outcome: tuple[int, int] | None = None,
) -> DistributionResult:
    """Bell-type measurement, broadcast of (n, m), local recovery.

    ``outcome`` forces the measurement branch (sweep mode); otherwise it is
    sampled from the exact distribution with ``seed``.
    """
    if abs(np.vdot(input_state.amps, input_state.amps).real - 1) > TOL:
        raise ValueError("input state is not normalized")
    check = verify_lruo(pair, channel.basis)
    if not check.ok:
        raise VerificationError(f"LRUO pair fails on this basis (residual {check.residual:.3e})")
    d = channel.d
    branches = outcome_branches(input_state, channel)
    keys = sorted(branches)
    probs = np.array([np.vdot(branches[k], branches[k]).real for k in keys])
    transcript = Transcript()
    if outcome is None:
        rng = np.random.default_rng(seed)
        n, m = keys[rng.choice(len(keys), p=probs / probs.sum())]
    else:
        n, m = outcome
        if (n, m) not in branches:
            raise ValueError(f"outcome {outcome} out of range for d={d}")
    p = float(probs[keys.index((n, m))])
    transcript.log("bell_measurement", n=int(n), m=int(m), probability=p)
    transcript.log("broadcast", n=int(n), m=int(m), bits=2 * math.log2(d))
    collapsed = PureState(channel.basis.shape, branches[n, m] / math.sqrt(p))
    received = lruo_apply(pair, n, m, collapsed)
    transcript.log("lruo", n=int(n), m=int(m), particles=channel.basis.shape.n)
    target = channel.basis.encode(input_state.amps)
    return DistributionResult(
        BellOutcome(int(n), int(m), p), received, target, received.fidelity(target), transcript
    )


def sweep_distribution(input_state: PureState, channel: Channel, pair: LruoPair) -> list[DistributionResult]:
    """Run every one of the d^2 outcomes deterministically."""
    d = channel.d
    return [
        run_distribution(input_state, channel, pair, outcome=(n, m)) for n in range(d) for m in range(d)
    ]


def computational_lruo(d: int, n: int = 1) -> LruoPair:
    """Generators for ``computational_basis(d, n)``: shift on every particle, phase on the first."""
    u10 = [phase_matrix(d)] + [np.eye(d, dtype=complex)] * (n - 1)
    return LruoPair(tuple([shift_matrix(d)] * n), tuple(u10))
