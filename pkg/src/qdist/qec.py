"""Tele-error-correction: encode through a multiparticle channel, correct by teleporting out.

Encoding teleports a qubit into a code block through ``(|0>|phi_0> + |1>|phi_1>)/sqrt 2``.
Decoding measures the corrupted block plus the port of ``(|00> + |11>)/sqrt 2``
in the extended Bell family ``|Phi_nm^zeta>`` and recovers the qubit with
``Z^n X^m``. Only (n, m) is broadcast, so two classical bits per hop.

Error index: ``zeta = (slot - 1) * N_e + eta`` where ``slot`` is the 1-based
position of the Pauli type in the code's error scope and ``eta`` the 1-based
qubit. ``zeta = 0`` is no error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .protocol import (
    SX,
    SZ,
    LruoPair,
    OutputBasis,
    Transcript,
    VerificationError,
    build_channel,
    computational_basis,
    computational_lruo,
    find_product_pauli_lruo,
    lruo_apply,
    run_distribution,
    verify_lruo,
)
from .tensor import (
    TOL,
    PureState,
    ShapeError,
    apply_local,
    entanglement_entropy,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
)

ERROR_OPS = {1: SZ, 2: SX, 3: SZ @ SX}
ERROR_NAMES = {1: "Z", 2: "X", 3: "ZX"}


class OutOfModelError(RuntimeError):
    """An error outside the code's correctable set, or a state outside every error sector."""


@dataclass(frozen=True)
class ErrorSpec:
    """Pauli type ``kind`` (1: Z, 2: X, 3: Z.X) on 1-based qubit ``eta``; kind 0 is no error."""

    kind: int = 0
    eta: int = 0

    @property
    def is_identity(self) -> bool:
        return self.kind == 0

    def label(self) -> str:
        return "I" if self.is_identity else f"{ERROR_NAMES[self.kind]}{self.eta}"


NO_ERROR = ErrorSpec()


@dataclass(frozen=True, eq=False)
class CodeSpec:
    name: str
    basis: OutputBasis
    lruo: LruoPair
    error_types: tuple[int, ...]
    expected_ebits: float
    ebit_cut: tuple[int, ...]
    stated_lruo: LruoPair | None = field(default=None, compare=False)

    @property
    def n_e(self) -> int:
        return self.basis.shape.n

    @property
    def L(self) -> int:
        return len(self.error_types)

    @property
    def n_errors(self) -> int:
        return self.L * self.n_e + 1

    def error(self, zeta: int) -> ErrorSpec:
        if not 0 <= zeta < self.n_errors:
            raise ValueError(f"zeta={zeta} outside 0..{self.n_errors - 1} for {self.name}")
        if zeta == 0:
            return NO_ERROR
        slot, eta = divmod(zeta - 1, self.n_e)
        return ErrorSpec(self.error_types[slot], eta + 1)

    def zeta(self, err: ErrorSpec) -> int:
        if err.is_identity:
            return 0
        if err.kind not in self.error_types:
            raise OutOfModelError(
                f"{ERROR_NAMES.get(err.kind, err.kind)} errors are outside the scope of {self.name}"
            )
        if not 1 <= err.eta <= self.n_e:
            raise OutOfModelError(f"qubit {err.eta} is outside the {self.n_e}-qubit block")
        return self.error_types.index(err.kind) * self.n_e + err.eta

    def errors(self) -> list[ErrorSpec]:
        return [self.error(z) for z in range(self.n_errors)]

    def channel_state(self) -> PureState:
        """Encoding channel; the port is particle 0."""
        return build_channel(self.basis).state


def apply_error(state: PureState, err: ErrorSpec, code: CodeSpec | None = None) -> PureState:
    if err.is_identity:
        return state
    if code is not None:
        code.zeta(err)
    if err.kind not in ERROR_OPS:
        raise ValueError(f"unknown error type {err.kind}")
    if not 1 <= err.eta <= state.shape.n:
        raise ValueError(f"qubit {err.eta} outside 1..{state.shape.n}")
    return apply_local(state, ERROR_OPS[err.kind], err.eta - 1)


# -- code definitions -------------------------------------------------------


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def _terms(terms: Sequence[tuple[complex, str]]) -> np.ndarray:
    v = sum(c * _ket(b) for c, b in terms)
    return v / np.linalg.norm(v)


def _ghz_pair(a: str, b: str, sign: int, tail: str, coeff: complex) -> list[tuple[complex, str]]:
    """``coeff |a + sign b>|tail>``."""
    return [(coeff, a + tail), (coeff * sign, b + tail)]


def _flip(bits: str) -> str:
    return bits.translate(str.maketrans("01", "10"))


def _code3() -> tuple[np.ndarray, np.ndarray]:
    return _ket("000"), _ket("111")


def _code3_phase() -> tuple[np.ndarray, np.ndarray]:
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / math.sqrt(2)
    return np.kron(np.kron(plus, plus), plus), np.kron(np.kron(minus, minus), minus)


def _code5() -> tuple[np.ndarray, np.ndarray]:
    phi0 = (
        _ghz_pair("000", "111", 1, "00", 1)
        + _ghz_pair("010", "101", 1, "11", -1)
        + _ghz_pair("001", "110", 1, "01", 1)
        + _ghz_pair("011", "100", 1, "10", 1)
    )
    phi1 = (
        _ghz_pair("000", "111", -1, "11", -1)
        + _ghz_pair("010", "101", -1, "00", -1)
        + _ghz_pair("001", "110", -1, "10", -1)
        + _ghz_pair("011", "100", -1, "01", 1)
    )
    return _terms(phi0), _terms(phi1)


_CODE7_PAIRS = (("000", "0000"), ("011", "0011"), ("101", "0101"), ("110", "0110"))


def _code7() -> tuple[np.ndarray, np.ndarray]:
    phi0, phi1 = [], []
    for head, tail in _CODE7_PAIRS:
        for t in (tail, _flip(tail)):
            phi0.append((1, head + t))
            phi1.append((1, _flip(head) + t))
    return _terms(phi0), _terms(phi1)


def _code9() -> tuple[np.ndarray, np.ndarray]:
    plus = _terms([(1, "000"), (1, "111")])
    minus = _terms([(1, "000"), (-1, "111")])
    return np.kron(np.kron(plus, plus), plus), np.kron(np.kron(minus, minus), minus)


def code7_two_group_form() -> np.ndarray:
    """Channel written as two maximally entangled 4-qubit groups: (port, q1-q3) | (q4-q7)."""
    groups = ["0000", "0011", "0101", "0110"]
    v = np.zeros(2**8, dtype=complex)
    for g in groups:
        left = _ket(g) + _ket(_flip(g))
        v += np.kron(left, left)
    return v / np.linalg.norm(v)


def code7_pair_form() -> np.ndarray:
    """Same channel as a sum of four products of identical two-qubit Bell-type pairs."""
    s = 1 / math.sqrt(2)
    bells = [
        s * (_ket("00") + _ket("11")),
        s * (_ket("00") - _ket("11")),
        s * (_ket("01") + _ket("10")),
        s * (_ket("01") - _ket("10")),
    ]
    v = np.zeros(2**8, dtype=complex)
    for b in bells:
        v += np.kron(np.kron(b, b), np.kron(b, b))
    return v / np.linalg.norm(v)


def _pauli_pair(u01: Sequence[np.ndarray], u10: Sequence[np.ndarray]) -> LruoPair:
    return LruoPair(tuple(u01), tuple(u10))


def _stated_lruos() -> dict[str, LruoPair]:
    i2 = np.eye(2, dtype=complex)
    zx = SZ @ SX
    return {
        "code3": _pauli_pair([SX] * 3, [SZ] * 3),
        "code5": _pauli_pair([-SZ, SZ, SX, zx, zx], [SX, SX, SX, i2, i2]),
        "code7": _pauli_pair([SX] * 7, [SZ] * 7),
        "code9": _pauli_pair([SX] * 9, [SX] * 9),
    }


_CODES = {
    # name: (builder, error scope, e-bits, channel cut with port = particle 0)
    "code3": (_code3, (2,), 1.0, (0,)),
    "code3-phase": (_code3_phase, (1,), 1.0, (0,)),
    "code5": (_code5, (1, 2, 3), 3.0, (1, 2, 3)),
    "code7": (_code7, (1, 2, 3), 2.0, (0, 1, 2, 3)),
    "code9": (_code9, (1, 2, 3), 1.0, (0,)),
}

CODE_NAMES = tuple(_CODES)


@lru_cache(maxsize=None)
def code_spec(name: str) -> CodeSpec:
    """Build a shipped code; the LRUO pair comes from the product-Pauli search."""
    if name not in _CODES:
        raise ValueError(f"unknown code {name!r}; choose from {', '.join(_CODES)}")
    builder, scope, ebits, cut = _CODES[name]
    phi0, phi1 = builder()
    n = int(round(math.log2(phi0.size)))
    basis = OutputBasis.from_vectors((2,) * n, [phi0, phi1])
    pair = find_product_pauli_lruo(basis)
    if pair is None:
        raise VerificationError(f"{name} has no product-Pauli LRUO")
    return CodeSpec(name, basis, pair, scope, ebits, cut, _stated_lruos().get(name))


# -- orthogonality and the extended Bell family ------------------------------


def error_images(code: CodeSpec) -> np.ndarray:
    """``eps_zeta |phi_j>`` as an array indexed ``[zeta, j, amplitude]``."""
    out = np.empty((code.n_errors, 2, code.basis.shape.total), dtype=complex)
    for z, err in enumerate(code.errors()):
        for j, phi in enumerate(code.basis.states):
            out[z, j] = apply_error(phi, err).amps
    return out


@dataclass(frozen=True)
class OrthogonalityReport:
    code: str
    n_errors: int
    max_deviation: float
    ok: bool
    degenerate_pairs: tuple[tuple[int, int], ...]
    sectors: tuple[tuple[int, ...], ...]
    sector_deviation: float


def orthogonality_report(code: CodeSpec, tol: float = TOL) -> OrthogonalityReport:
    """Gram matrix of all ``eps_zeta |phi_j>`` against ``delta_jj' delta_zeta zeta'``.

    Also groups errors that act identically on the code space (up to one common
    phase) into sectors and checks orthonormality between distinct sectors.
    """
    imgs = error_images(code)
    flat = imgs.reshape(-1, imgs.shape[-1])
    gram = flat.conj() @ flat.T
    dev = float(np.abs(gram - np.eye(len(flat))).max())
    sectors = _sectors(imgs, tol)
    reps = np.array([imgs[s[0]] for s in sectors]).reshape(-1, imgs.shape[-1])
    sgram = reps.conj() @ reps.T
    sdev = float(np.abs(sgram - np.eye(len(reps))).max())
    degenerate = tuple(pair for s in sectors for pair in itertools.combinations(s, 2))
    return OrthogonalityReport(code.name, code.n_errors, dev, dev <= tol, degenerate, sectors, sdev)


def _sectors(imgs: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    groups: list[list[int]] = []
    for z in range(imgs.shape[0]):
        for g in groups:
            if _same_action(imgs[g[0]], imgs[z], tol):
                g.append(z)
                break
        else:
            groups.append([z])
    return tuple(tuple(g) for g in groups)


def _same_action(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    c = np.vdot(a[0], b[0])
    if abs(abs(c) - 1) > tol:
        return False
    return bool(np.abs(b - c * a).max() <= tol * 10)


@dataclass(frozen=True)
class ExtendedBellBasis:
    """Measurement family on (block, port); ``states[s, n, m]`` for sector index ``s``."""

    code: CodeSpec
    sectors: tuple[tuple[int, ...], ...]
    states: np.ndarray

    @property
    def count(self) -> int:
        return self.states.shape[0] * 4

    def sector_of(self, zeta: int) -> int:
        for i, s in enumerate(self.sectors):
            if zeta in s:
                return i
        raise KeyError(zeta)

    def flat(self) -> np.ndarray:
        return self.states.reshape(-1, self.states.shape[-1])


@lru_cache(maxsize=None)
def extended_bell_basis(code: CodeSpec, tol: float = TOL) -> ExtendedBellBasis:
    """``|Phi_nm^zeta> = 2^-1/2 sum_k (-1)^{kn} eps_zeta|phi_k> (x) |k + m mod 2>``.

    Errors with identical action on the code space share one sector, so a
    degenerate code yields fewer than ``4 (L N_e + 1)`` states.
    """
    report = orthogonality_report(code, tol)
    if report.sector_deviation > tol:
        raise VerificationError(
            f"{code.name} error sectors overlap (deviation {report.sector_deviation:.3e}); "
            "the extended measurement is not defined"
        )
    imgs = error_images(code)
    dim = imgs.shape[-1] * 2
    states = np.zeros((len(report.sectors), 2, 2, dim), dtype=complex)
    port = np.eye(2, dtype=complex)
    for s, members in enumerate(report.sectors):
        rep = imgs[members[0]]
        for n in range(2):
            for m in range(2):
                v = sum((-1) ** (k * n) * np.kron(rep[k], port[(k + m) % 2]) for k in range(2))
                states[s, n, m] = v / math.sqrt(2)
    flat = states.reshape(-1, dim)
    dev = float(np.abs(flat.conj() @ flat.T - np.eye(len(flat))).max())
    if dev > tol:
        raise VerificationError(f"extended Bell family is not orthonormal ({dev:.3e})")
    return ExtendedBellBasis(code, report.sectors, states)


# -- protocol steps ----------------------------------------------------------


def decoding_pair() -> LruoPair:
    """``U01 = X``, ``U10 = Z`` on the single output qubit."""
    return computational_lruo(2, 1)


def tec_encode(psi: PureState, code: CodeSpec, outcome: tuple[int, int] | None = None, seed: int | None = None):
    """Teleport ``psi`` into the code block; returns the distribution result."""
    channel = build_channel(code.basis)
    return run_distribution(psi, channel, code.lruo, seed=seed, outcome=outcome)


@dataclass(frozen=True)
class ExtendedOutcome:
    n: int
    m: int
    sector: int
    zetas: tuple[int, ...]
    probability: float


def extended_teleport(
    block: PureState,
    code: CodeSpec,
    out_basis: OutputBasis,
    out_pair: LruoPair,
    outcome: tuple[int, int] | None = None,
    rng: np.random.Generator | None = None,
    transcript: Transcript | None = None,
    tol: float = 1e-10,
) -> tuple[PureState, ExtendedOutcome]:
    """Measure (block, port) in the extended Bell family and recover on the output side.

    The channel is ``(|0>|out_0> + |1>|out_1>)/sqrt 2`` with the port first. With
    ``outcome`` forced, (n, m) is fixed and the sector is whichever one the
    block occupies.
    """
    ebb = extended_bell_basis(code)
    if block.shape != code.basis.shape:
        raise ShapeError("block does not match the code")
    channel = build_channel(out_basis)
    joint = np.kron(block.amps, channel.state.amps).reshape(ebb.states.shape[-1], -1)
    proj = ebb.flat().conj() @ joint  # [outcome, output amplitude]
    probs = np.einsum("ij,ij->i", proj.conj(), proj).real
    covered = float(probs.sum())
    if abs(covered - 1.0) > tol:
        raise OutOfModelError(f"state has weight {1 - covered:.3e} outside every error sector")
    probs = probs.reshape(len(ebb.sectors), 2, 2)
    if outcome is None:
        rng = rng or np.random.default_rng()
        flat_p = probs.ravel() / covered
        idx = int(rng.choice(flat_p.size, p=flat_p))
        s, n, m = np.unravel_index(idx, probs.shape)
    else:
        n, m = outcome
        s = int(np.argmax(probs[:, n, m]))
    p = float(probs[s, n, m])
    vec = proj.reshape(len(ebb.sectors), 2, 2, -1)[s, n, m] / math.sqrt(p)
    collapsed = PureState(out_basis.shape, vec)
    recovered = lruo_apply(out_pair, int(n), int(m), collapsed)
    if transcript is not None:
        transcript.log(
            "extended_bell_measurement", n=int(n), m=int(m), sector=int(s),
            zetas=list(ebb.sectors[s]), probability=p,
        )
        transcript.log("broadcast", n=int(n), m=int(m), bits=2.0)
        transcript.log("recovery", n=int(n), m=int(m), particles=out_basis.shape.n)
    return recovered, ExtendedOutcome(int(n), int(m), int(s), ebb.sectors[s], p)


@dataclass(frozen=True)
class DecodeResult:
    recovered: PureState
    outcome: ExtendedOutcome
    transcript: Transcript


def tec_decode(
    corrupted: PureState,
    code: CodeSpec,
    outcome: tuple[int, int] | None = None,
    seed: int | None = None,
) -> DecodeResult:
    """Teleport the corrupted block out through a Bell pair, correcting on the way."""
    transcript = Transcript()
    rng = np.random.default_rng(seed) if outcome is None else None
    out, oc = extended_teleport(
        corrupted, code, computational_basis(2), decoding_pair(), outcome, rng, transcript
    )
    return DecodeResult(out, oc, transcript)


@dataclass(frozen=True)
class CorrectionSweep:
    code: str
    cases: int
    worst_fidelity: float
    corrected_classes: int
    n_errors: int


def correction_sweep(code: CodeSpec, psi: PureState) -> CorrectionSweep:
    """Every encode outcome x every error class x every decode outcome."""
    worst = 1.0
    per_class = np.ones(code.n_errors)
    cases = 0
    for enc in itertools.product(range(2), repeat=2):
        encoded = tec_encode(psi, code, outcome=enc).receiver
        for z in range(code.n_errors):
            corrupted = apply_error(encoded, code.error(z), code)
            for dec in itertools.product(range(2), repeat=2):
                f = tec_decode(corrupted, code, outcome=dec).recovered.fidelity(psi)
                per_class[z] = min(per_class[z], f)
                worst = min(worst, f)
                cases += 1
    corrected = int(np.sum(np.abs(per_class - 1) <= 1e-12))
    return CorrectionSweep(code.name, cases, float(worst), corrected, code.n_errors)


# -- entanglement accounting --------------------------------------------------


@dataclass(frozen=True)
class EbitReport:
    code: str
    expected: float
    sender_cut: float
    natural_cut: tuple[int, ...]
    natural_value: float
    all_cuts: dict[tuple[int, ...], float]

    @property
    def matching_cuts(self) -> list[tuple[int, ...]]:
        return [c for c, v in self.all_cuts.items() if abs(v - self.expected) <= 1e-9]


def ebit_report(code: CodeSpec, exhaustive: bool = True) -> EbitReport:
    """Entropies of the encoding channel across its cuts (port is particle 0).

    ``exhaustive`` lists every bipartition containing the port.
    """
    xi = code.channel_state()
    n = xi.shape.n
    cuts: dict[tuple[int, ...], float] = {}
    if exhaustive:
        for r in range(1, n):
            for rest in itertools.combinations(range(1, n), r - 1):
                cut = (0,) + rest
                cuts[cut] = entanglement_entropy(xi, cut)
    return EbitReport(
        code.name,
        code.expected_ebits,
        entanglement_entropy(xi, [0]),
        code.ebit_cut,
        entanglement_entropy(xi, code.ebit_cut),
        cuts,
    )


@dataclass(frozen=True)
class PairwisePpt:
    pairs: dict[tuple[int, int], float]
    all_ppt: bool


def pairwise_ppt(state: PureState, tol: float = TOL, pairs=None) -> PairwisePpt:
    """Min partial-transpose eigenvalue of every two-particle reduction."""
    n = state.shape.n
    pairs = pairs if pairs is not None else itertools.combinations(range(n), 2)
    out = {}
    for a, b in pairs:
        rho = partial_trace(state, [a, b])
        out[a, b] = min_eigenvalue(partial_transpose(rho, [1]))
    return PairwisePpt(out, all(v >= -tol for v in out.values()))


def ghz_pairwise_ppt(code: CodeSpec, tol: float = TOL) -> PairwisePpt:
    return pairwise_ppt(code.channel_state(), tol)


# -- repeater ------------------------------------------------------------------

Adversary = Callable[[int, np.random.Generator], "ErrorSpec | Sequence[ErrorSpec]"]


@dataclass(frozen=True)
class RepeaterResult:
    final: PureState
    fidelity: float
    transcript: Transcript


def _as_errors(choice) -> list[ErrorSpec]:
    if isinstance(choice, ErrorSpec):
        return [choice]
    return list(choice)


def repeater_run(
    hops: int,
    psi: PureState,
    adversary: Adversary,
    seed: int | None = None,
    code: CodeSpec | None = None,
    outcomes: Sequence[tuple[int, int]] | None = None,
) -> RepeaterResult:
    """Encode, cross ``hops`` insecure links, re-encode between links, decode at the end.

    ``outcomes`` optionally forces the (n, m) of each measurement stage, in
    order: the initial encoding, each re-encoding, the final decoding
    (``hops + 1`` entries).
    """
    if hops < 1:
        raise ValueError("need at least one insecure hop")
    code = code or code_spec("code3")
    if outcomes is not None and len(outcomes) != hops + 1:
        raise ValueError(f"need {hops + 1} forced outcomes, got {len(outcomes)}")
    rng = np.random.default_rng(seed)
    forced = list(outcomes) if outcomes is not None else [None] * (hops + 1)
    transcript = Transcript()
    stage_seed = int(rng.integers(2**32))
    enc = tec_encode(psi, code, outcome=forced[0], seed=stage_seed)
    _merge(transcript, enc.transcript, "encode", _roles(0, hops))
    block = enc.receiver
    for hop in range(hops):
        errs = [e for e in _as_errors(adversary(hop, rng)) if not e.is_identity]
        if len(errs) > 1:
            raise OutOfModelError(f"hop {hop} carries {len(errs)} errors; at most one is correctable")
        for e in errs:
            block = apply_error(block, e, code)
        transcript.log("insecure_hop", hop=hop, error=errs[0].label() if errs else "I")
        last = hop == hops - 1
        if last:
            out_basis, out_pair = computational_basis(2), decoding_pair()
        else:
            out_basis, out_pair = code.basis, code.lruo
        sub = Transcript()
        block, _ = extended_teleport(block, code, out_basis, out_pair, forced[hop + 1], rng, sub)
        _merge(transcript, sub, "decode" if last else "reencode", _roles(hop + 1, hops))
    return RepeaterResult(block, block.fidelity(psi), transcript)


_NAMES = ("Alice", "Bob", "Charlie", "David", "Elizabeth", "Fred")


def _roles(stage: int, hops: int) -> tuple[str, str]:
    """Sender and receiver of measurement stage ``stage``; named parties for the two-hop topology."""
    if hops == 2:
        return _NAMES[2 * stage], _NAMES[2 * stage + 1]
    return f"sender{stage}", f"receiver{stage}"


def _merge(into: Transcript, sub: Transcript, stage: str, roles: tuple[str, str]) -> None:
    for e in sub.events:
        data = {k: v for k, v in e.items() if k not in ("step", "kind")}
        into.log(e["kind"], stage=stage, sender=roles[0], receiver=roles[1], **data)


def adversary_from_table(table: Sequence[ErrorSpec]) -> Adversary:
    """Adversary that injects ``table[hop]`` on each hop."""
    return lambda hop, rng: table[hop]
