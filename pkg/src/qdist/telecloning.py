"""1 -> M optimal telecloning of a d-level particle.

Output particles are ordered ancillas first (M-1 of them) then clones (M).
The channel adds the port as particle 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocol import (
    Channel,
    LruoPair,
    OutputBasis,
    VerificationError,
    bell_basis,
    build_channel,
    phase_matrix,
    shift_matrix,
    verify_lruo,
)
from .symmetric import g_index, sym_dim, sym_projector, sym_table, sym_vector
from .tensor import (
    MAX_DIM,
    DensityMatrix,
    ParticleShape,
    PureState,
    ShapeError,
    partial_trace,
    partial_transpose,
    min_eigenvalue,
)


@dataclass(frozen=True)
class TelecloneSpec:
    d: int
    M: int
    basis: OutputBasis

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(range(self.M - 1))

    @property
    def clones(self) -> tuple[int, ...]:
        return tuple(range(self.M - 1, 2 * self.M - 1))


def _check(d: int, M: int) -> None:
    if d < 2 or M < 1:
        raise ValueError(f"need d >= 2 and M >= 1, got d={d}, M={M}")
    if d ** (2 * M) > MAX_DIM:
        raise ShapeError(f"telecloning channel for d={d}, M={M} exceeds dense bound {MAX_DIM}")


def basis_by_contraction(d: int, M: int) -> np.ndarray:
    """``sqrt(d/d[M]) sum_k <j|_P xi_k> (x) |xi_k>_C`` for each j, as columns."""
    n_sym = sym_dim(d, M)
    cols = []
    for j in range(d):
        v = np.zeros(d ** (2 * M - 1), dtype=complex)
        for k in range(n_sym):
            xi = sym_vector(d, M, k)
            pa = xi.reshape(d, -1)[j]  # port digit fixed to j
            v += np.kron(pa, xi)
        cols.append(v * math.sqrt(d / n_sym))
    return np.array(cols).T


def basis_by_coefficients(d: int, M: int) -> np.ndarray:
    """Same basis assembled from ``R_i^{k'} |xi_{k'}^{M-1}>_A (x) |xi_{g(i,k')}^M>_C``."""
    n_sym = sym_dim(d, M)
    sub = sym_table(d, M - 1)
    top = sym_table(d, M)
    cols = []
    for i in range(d):
        v = np.zeros(d ** (2 * M - 1), dtype=complex)
        for kp in range(len(sub)):
            k = g_index(i, kp, d, M)
            r = math.sqrt(sub.norms[kp] / top.norms[k])
            v += r * np.kron(sym_vector(d, M - 1, kp), sym_vector(d, M, k))
        cols.append(v * math.sqrt(d / n_sym))
    return np.array(cols).T


def teleclone_basis(d: int, M: int, tol: float = 1e-12) -> TelecloneSpec:
    _check(d, M)
    a = basis_by_contraction(d, M)
    b = basis_by_coefficients(d, M)
    dev = float(np.abs(a - b).max())
    if dev > tol:
        raise VerificationError(f"the two basis constructions differ by {dev:.3e}")
    basis = OutputBasis.from_vectors((d,) * (2 * M - 1), a.T)
    return TelecloneSpec(d, M, basis)


def teleclone_lruo(d: int, M: int) -> LruoPair:
    """Shift on every particle; conjugate phase on ancillas, phase on clones."""
    shift = shift_matrix(d)
    ph = phase_matrix(d)
    u01 = (shift,) * (2 * M - 1)
    u10 = (ph.conj(),) * (M - 1) + (ph,) * M
    return LruoPair(u01, u10)


def symmetric_form(d: int, M: int) -> np.ndarray:
    """``d[M]^-1/2 sum_k |xi_k>_PA (x) |xi_k>_C``."""
    n_sym = sym_dim(d, M)
    v = sum(np.kron(sym_vector(d, M, k), sym_vector(d, M, k)) for k in range(n_sym))
    return v / math.sqrt(n_sym)


def teleclone_channel(d: int, M: int, tol: float = 1e-12) -> Channel:
    spec = teleclone_basis(d, M)
    receivers = [(i,) for i in range(2 * M - 1)]
    ch = build_channel(spec.basis, receivers)
    dev = float(np.abs(ch.state.amps - symmetric_form(d, M)).max())
    if dev > tol:
        raise VerificationError(f"channel forms disagree by {dev:.3e}")
    return ch


def group_swap_residual(channel_state: PureState, d: int, M: int) -> float:
    """Deviation of the channel from invariance under exchanging the PA and C groups."""
    m = channel_state.amps.reshape(d**M, d**M)
    return float(np.abs(m - m.T).max())


def werner_map(d: int, N: int, M: int, rho: DensityMatrix) -> DensityMatrix:
    """``d[N]/d[M] s_M (rho (x) 1^(M-N)) s_M``."""
    if not 1 <= N <= M:
        raise ValueError(f"need 1 <= N <= M, got N={N}, M={M}")
    if rho.dims != (d,) * N:
        raise ShapeError(f"expected {N} particles of dimension {d}, got {rho.dims}")
    s = sym_projector(d, M).entries
    padded = np.kron(rho.entries, np.eye(d ** (M - N)))
    out = sym_dim(d, N) / sym_dim(d, M) * (s @ padded @ s)
    return DensityMatrix(ParticleShape((d,) * M), out)


@dataclass(frozen=True)
class CloneReport:
    rho_clones: DensityMatrix
    fidelity: float
    per_clone: tuple[float, ...]


def clone_density(spec: TelecloneSpec, psi: PureState) -> CloneReport:
    """Trace out the ancillas of ``sum_j a_j |phi_j>`` and score each clone."""
    if psi.dims != (spec.d,):
        raise ShapeError(f"input must be a single {spec.d}-level particle")
    out = spec.basis.encode(psi.amps)
    rho_c = partial_trace(out, spec.clones)
    fids = tuple(partial_trace(out, [c]).expectation(psi) for c in spec.clones)
    return CloneReport(rho_c, fids[0], fids)


def port_pair_reduction(channel: Channel, particle: int) -> DensityMatrix:
    """Two-particle reduction of the channel on the port and one output particle.

    ``particle`` indexes output particles (0-based, excluding the port).
    """
    return partial_trace(channel.state, [0, particle + 1])


def bell_fidelity(rho_pair: DensityMatrix) -> float:
    """``<Phi+| rho |Phi+>`` for a two-particle reduction."""
    d = rho_pair.dims[0]
    return rho_pair.expectation(bell_basis(d)[0, 0])


def min_pt_eigenvalue(rho_pair: DensityMatrix) -> float:
    return min_eigenvalue(partial_transpose(rho_pair, [1]))


def expected_qubit_bell_fidelity(M: int) -> float:
    return 3 * (M + 1) / (6 * M)


def verify_spec(spec: TelecloneSpec) -> float:
    """Worst LRUO residual for the shipped generators on this basis."""
    return verify_lruo(teleclone_lruo(spec.d, spec.M), spec.basis).residual
