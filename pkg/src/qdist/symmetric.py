"""Symmetrized basis states of M d-level particles and their index bookkeeping.

A basis state is labelled by a nondecreasing digit string ``(a_0, ..., a_{M-1})``.
Strings are ranked by their base-d value; for fixed length that is the same as
lexicographic order, which is what ``combinations_with_replacement`` yields.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tensor import Operator, ParticleShape, PureState


@dataclass(frozen=True)
class SymBasisTable:
    d: int
    M: int
    strings: tuple[tuple[int, ...], ...]
    norms: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.strings)

    def index(self, s: Sequence[int]) -> int:
        return _rank(self.d, self.M)[tuple(s)]


def _check_dm(d: int, M: int, *, allow_empty: bool = False) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"level count must be an integer >= 2, got {d}")
    if int(M) != M or M < (0 if allow_empty else 1):
        raise ValueError(f"particle count must be a positive integer, got {M}")


def h_value(s: Sequence[int], d: int) -> int:
    """Base-d value of the digit string."""
    value = 0
    for a in s:
        if not 0 <= a < d:
            raise ValueError(f"digit {a} outside 0..{d - 1}")
        value = value * d + int(a)
    return value


def permutation_count(s: Sequence[int]) -> int:
    """Number of distinct permutations, M! / prod(m_c!)."""
    out = math.factorial(len(s))
    for m in Counter(s).values():
        out //= math.factorial(m)
    return out


@lru_cache(maxsize=None)
def sym_table(d: int, M: int) -> SymBasisTable:
    """Sorted table of nondecreasing strings; ``M = 0`` gives the single empty string."""
    _check_dm(d, M, allow_empty=True)
    strings = tuple(itertools.combinations_with_replacement(range(d), M))
    assert all(h_value(a, d) < h_value(b, d) for a, b in zip(strings, strings[1:]))
    assert len(strings) == math.comb(d + M - 1, M)
    return SymBasisTable(d, M, strings, tuple(permutation_count(s) for s in strings))


@lru_cache(maxsize=None)
def _rank(d: int, M: int) -> dict[tuple[int, ...], int]:
    return {s: k for k, s in enumerate(sym_table(d, M).strings)}


def sym_dim(d: int, M: int) -> int:
    """Dimension of the symmetric subspace, binomial(d + M - 1, M)."""
    _check_dm(d, M)
    return math.comb(d + M - 1, M)


def f_index(s: Sequence[int], d: int) -> int:
    s = tuple(int(a) for a in s)
    if any(b < a for a, b in zip(s, s[1:])):
        raise ValueError(f"string {s} is not nondecreasing")
    if any(not 0 <= a < d for a in s):
        raise ValueError(f"string {s} has digits outside 0..{d - 1}")
    return _rank(d, len(s))[s]


def g_index(a: int, kprime: int, d: int, M: int) -> int:
    """Index in the M-table of the (M-1)-string ``kprime`` with digit ``a`` inserted."""
    _check_dm(d, M)
    if not 0 <= a < d:
        raise ValueError(f"digit {a} outside 0..{d - 1}")
    sub = sym_table(d, M - 1)
    if not 0 <= kprime < len(sub):
        raise ValueError(f"index {kprime} out of range for {len(sub)} strings")
    return f_index(sorted(sub.strings[kprime] + (a,)), d)


def sym_vector(d: int, M: int, k: int) -> np.ndarray:
    """Amplitudes of the k-th symmetrized state as a flat array (length 1 when M = 0)."""
    table = sym_table(d, M)
    if not 0 <= k < len(table):
        raise ValueError(f"index {k} out of range for {len(table)} symmetrized states")
    s = table.strings[k]
    v = np.zeros(d**M, dtype=complex)
    perms = set(itertools.permutations(s))
    amp = 1.0 / math.sqrt(len(perms))
    for p in perms:
        v[h_value(p, d)] = amp
    return v


def sym_state(d: int, M: int, k: int) -> PureState:
    _check_dm(d, M)
    return PureState(ParticleShape((d,) * M), sym_vector(d, M, k))


def sym_projector(d: int, M: int) -> Operator:
    """Projector onto the symmetric subspace of M particles."""
    _check_dm(d, M)
    vecs = np.array([sym_vector(d, M, k) for k in range(sym_dim(d, M))])
    return Operator(ParticleShape((d,) * M), vecs.T @ vecs.conj())


def sym_decompose(d: int, M: int, k: int) -> list[tuple[int, int, float]]:
    """Split off the first particle: one ``(a, k', coeff)`` term per distinct digit.

    The state equals ``sum coeff * |a> (x) |xi_{k'}^{M-1}>``.
    """
    _check_dm(d, M)
    table = sym_table(d, M)
    if not 0 <= k < len(table):
        raise ValueError(f"index {k} out of range for {len(table)} symmetrized states")
    s = table.strings[k]
    sub = sym_table(d, M - 1)
    terms = []
    for a in sorted(set(s)):
        rest = list(s)
        rest.remove(a)
        kp = f_index(rest, d)
        terms.append((a, kp, math.sqrt(sub.norms[kp] / table.norms[k])))
    return terms


def recompose(d: int, M: int, terms: list[tuple[int, int, float]]) -> np.ndarray:
    """Rebuild the flat amplitude vector from ``sym_decompose`` terms."""
    out = np.zeros(d**M, dtype=complex)
    for a, kp, c in terms:
        e = np.zeros(d, dtype=complex)
        e[a] = 1.0
        out += c * np.kron(e, sym_vector(d, M - 1, kp))
    return out
