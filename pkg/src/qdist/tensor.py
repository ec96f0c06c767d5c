"""Dense states and operators over small multi-particle Hilbert spaces.

Particle 0 is the most significant digit of the computational-basis index,
so ``|01>`` for two qubits is amplitude index 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

TOL = 1e-10
MAX_DIM = 2**12


class ShapeError(ValueError):
    """Raised when particle dimensions or index sets are inconsistent."""


@dataclass(frozen=True)
class ParticleShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise ShapeError(f"every particle needs dimension >= 2, got {dims}")
        if int(np.prod(dims, dtype=np.int64)) > MAX_DIM:
            raise ShapeError(f"Hilbert dimension of {dims} exceeds {MAX_DIM}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    @property
    def n(self) -> int:
        return len(self.dims)

    def __add__(self, other: "ParticleShape") -> "ParticleShape":
        return ParticleShape(self.dims + other.dims)

    def restrict(self, keep: Sequence[int]) -> "ParticleShape":
        return ParticleShape(tuple(self.dims[i] for i in keep))


def _shape(dims) -> ParticleShape:
    return dims if isinstance(dims, ParticleShape) else ParticleShape(tuple(dims))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    shape: ParticleShape
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = _shape(self.shape)
        amps = _frozen(np.ravel(self.amps))
        if amps.size != shape.total:
            raise ShapeError(f"{amps.size} amplitudes for shape {shape.dims}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, dims, amps, normalize: bool = False) -> "PureState":
        amps = np.asarray(amps, dtype=complex).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(_shape(dims), amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per particle."""
        return self.amps.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.shape, np.outer(self.amps, self.amps.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    shape: ParticleShape
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = _shape(self.shape)
        m = _frozen(self.entries)
        if m.shape != (shape.total, shape.total):
            raise ShapeError(f"matrix {m.shape} does not match shape {shape.dims}")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m - m.conj().T).max(initial=0.0) > TOL * scale:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TOL:
            raise ValueError(f"density matrix has trace {np.trace(m)!r}")
        if np.linalg.eigvalsh(m)[0] < -TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", m)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def expectation(self, psi: PureState | np.ndarray) -> float:
        v = psi.amps if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
        return float(np.vdot(v, self.entries @ v).real)


@dataclass(frozen=True)
class Operator:
    shape: ParticleShape
    entries: np.ndarray = field(repr=False)
    unitary: bool = False

    def __post_init__(self):
        shape = _shape(self.shape)
        m = _frozen(self.entries)
        if m.shape != (shape.total, shape.total):
            raise ShapeError(f"matrix {m.shape} does not match shape {shape.dims}")
        if self.unitary and not is_unitary(m):
            raise ValueError("operator flagged unitary fails U^dagger U = I")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "entries", m)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def __matmul__(self, other):
        if isinstance(other, PureState):
            if other.shape != self.shape:
                raise ShapeError(f"operator on {self.dims} applied to state on {other.dims}")
            return PureState(self.shape, self.entries @ other.amps)
        if isinstance(other, Operator):
            if other.shape != self.shape:
                raise ShapeError("operator shapes differ")
            return Operator(self.shape, self.entries @ other.entries, self.unitary and other.unitary)
        return NotImplemented


Tensorable = Union[PureState, DensityMatrix, Operator]


def is_unitary(m: np.ndarray, tol: float = TOL) -> bool:
    m = np.asarray(m)
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max(initial=0.0) <= tol)


def basis_state(dims, digits: Sequence[int]) -> PureState:
    """Computational basis ket ``|digits>``."""
    shape = _shape(dims)
    if len(digits) != shape.n:
        raise ShapeError(f"{len(digits)} digits for {shape.n} particles")
    amps = np.zeros(shape.total, dtype=complex)
    amps[np.ravel_multi_index(tuple(digits), shape.dims)] = 1.0
    return PureState(shape, amps)


def random_state(dims, rng: np.random.Generator) -> PureState:
    """Haar-random pure state."""
    shape = _shape(dims)
    v = rng.normal(size=shape.total) + 1j * rng.normal(size=shape.total)
    return PureState(shape, v / np.linalg.norm(v))


def tensor(a: Tensorable, b: Tensorable) -> Tensorable:
    """Kronecker product with ``a`` as the most significant index block."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    shape = a.shape + b.shape
    if isinstance(a, PureState):
        return PureState(shape, np.kron(a.amps, b.amps))
    if isinstance(a, DensityMatrix):
        return DensityMatrix(shape, np.kron(a.entries, b.entries))
    return Operator(shape, np.kron(a.entries, b.entries), a.unitary and b.unitary)


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def _check_subset(n: int, part: Iterable[int], *, allow_full: bool) -> tuple[int, ...]:
    part = tuple(sorted(set(int(i) for i in part)))
    if not part:
        raise ShapeError("empty particle set")
    if part[0] < 0 or part[-1] >= n:
        raise ShapeError(f"particle index out of range for {n} particles: {part}")
    if not allow_full and len(part) == n:
        raise ShapeError("particle set must be a proper subset")
    return part


def _as_matrix(rho) -> tuple[ParticleShape, np.ndarray]:
    if isinstance(rho, (DensityMatrix, Operator)):
        return rho.shape, rho.entries
    if isinstance(rho, PureState):
        return rho.shape, np.outer(rho.amps, rho.amps.conj())
    raise TypeError(f"expected a density matrix, got {type(rho).__name__}")


def partial_trace(rho: DensityMatrix | PureState, keep: Iterable[int]) -> DensityMatrix:
    """Reduce to the particles in ``keep`` (returned in ascending order)."""
    if isinstance(rho, PureState):
        return _reduce_pure(rho, keep)
    shape, m = _as_matrix(rho)
    keep = _check_subset(shape.n, keep, allow_full=True)
    n = shape.n
    drop = [i for i in range(n) if i not in keep]
    t = m.reshape(shape.dims + shape.dims)
    # contract ket/bra axes of every dropped particle
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    ket = letters[:n]
    bra = letters[n:]
    for i in drop:
        bra[i] = ket[i]
    out = "".join(ket[i] for i in keep) + "".join(bra[i] for i in keep)
    r = np.einsum("".join(ket) + "".join(bra) + "->" + out, t)
    sub = shape.restrict(keep)
    return DensityMatrix(sub, r.reshape(sub.total, sub.total))


def _reduce_pure(psi: PureState, keep: Iterable[int]) -> DensityMatrix:
    keep = _check_subset(psi.shape.n, keep, allow_full=True)
    m = _bipartition(psi, keep)
    sub = psi.shape.restrict(keep)
    return DensityMatrix(sub, m @ m.conj().T)


def _bipartition(psi: PureState, part: Sequence[int]) -> np.ndarray:
    rest = [i for i in range(psi.shape.n) if i not in part]
    t = np.transpose(psi.tensor(), list(part) + rest)
    rows = int(np.prod([psi.dims[i] for i in part], dtype=np.int64))
    return t.reshape(rows, -1)


def partial_transpose(rho, part: Iterable[int]) -> np.ndarray:
    """Transpose the ket/bra indices of the particles in ``part`` only."""
    shape, m = _as_matrix(rho)
    part = _check_subset(shape.n, part, allow_full=False)
    n = shape.n
    axes = list(range(2 * n))
    for i in part:
        axes[i], axes[n + i] = n + i, i
    t = m.reshape(shape.dims + shape.dims).transpose(axes)
    return t.reshape(shape.total, shape.total)


def min_eigenvalue(h: np.ndarray, tol: float = TOL) -> float:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"expected a square matrix, got {h.shape}")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return float(np.linalg.eigvalsh(h)[0])


def schmidt_coefficients(psi: PureState, part: Iterable[int]) -> np.ndarray:
    """Squared Schmidt coefficients across ``part`` | complement, descending."""
    part = _check_subset(psi.shape.n, part, allow_full=False)
    s = np.linalg.svd(_bipartition(psi, part), compute_uv=False)
    return s**2


def von_neumann_entropy(probs: np.ndarray, cutoff: float = 1e-15) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > cutoff]
    return float(-(p * np.log2(p)).sum())


def entanglement_entropy(psi: PureState, part: Iterable[int]) -> float:
    """Base-2 entropy of the reduced state of ``part`` (e-bits)."""
    return von_neumann_entropy(schmidt_coefficients(psi, part))


def permute_particles(psi: PureState, order: Sequence[int]) -> PureState:
    """Reorder particles so that new particle ``i`` is old particle ``order[i]``."""
    if sorted(order) != list(range(psi.shape.n)):
        raise ShapeError(f"{order} is not a permutation of {psi.shape.n} particles")
    t = np.transpose(psi.tensor(), list(order))
    return PureState(psi.shape.restrict(order), t.ravel())


def apply_local(psi: PureState, op: np.ndarray, target: int) -> PureState:
    """Apply a single-particle matrix to particle ``target``."""
    if not 0 <= target < psi.shape.n:
        raise ShapeError(f"particle {target} out of range for {psi.shape.n} particles")
    t = np.tensordot(np.asarray(op, dtype=complex), psi.tensor(), axes=([1], [target]))
    return PureState(psi.shape, np.moveaxis(t, 0, target).ravel())


def apply_product(psi: PureState, factors: Sequence[np.ndarray]) -> PureState:
    """Apply a tensor product of per-particle factors without forming the full matrix."""
    if len(factors) != psi.shape.n:
        raise ShapeError(f"{len(factors)} factors for {psi.shape.n} particles")
    t = psi.tensor()
    for i, f in enumerate(factors):
        t = np.moveaxis(np.tensordot(np.asarray(f, dtype=complex), t, axes=([1], [i])), 0, i)
    return PureState(psi.shape, t.ravel())
