"""Acceptance criteria 1-12, each at its stated tolerance.

Every check records a line in ``conftest.ACCEPTANCE``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from qdist import asymmetric, qec
from qdist.asymmetric import SQRT3_MINUS_1
from qdist.protocol import build_channel, computational_basis, computational_lruo, sweep_distribution
from qdist.symmetric import recompose, sym_decompose, sym_dim, sym_vector
from qdist.telecloning import (
    basis_by_coefficients,
    basis_by_contraction,
    bell_fidelity,
    clone_density,
    min_pt_eigenvalue,
    port_pair_reduction,
    teleclone_basis,
    teleclone_channel,
    werner_map,
)
from qdist.tensor import entanglement_entropy, random_state


def record(criterion: int, label: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
    print(f"criterion {criterion} [{label}]: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"criterion {criterion} [{label}] failed: {detail}"


def test_criterion_01_faithful_distribution():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 4):
        ch = build_channel(computational_basis(d))
        pair = computational_lruo(d)
        for _ in range(20):
            psi = random_state((d,), rng)
            results = sweep_distribution(psi, ch, pair)
            assert len(results) == d * d
            worst = max(worst, max(abs(1 - r.fidelity) for r in results))
    elapsed = time.perf_counter() - start
    record(1, "fidelity", worst <= 1e-12, f"max deficit {worst:.2e}")
    record(1, "runtime", elapsed < 5, f"{elapsed:.2f}s")


def test_criterion_02_telecloning_oracle():
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    worst = 0.0
    for d, M in [(2, 2), (2, 3), (3, 2)]:
        spec = teleclone_basis(d, M)
        for _ in range(20):
            psi = random_state((d,), rng)
            got = clone_density(spec, psi).rho_clones.entries
            want = werner_map(d, 1, M, psi.density()).entries
            worst = max(worst, float(np.abs(got - want).max()))
    elapsed = time.perf_counter() - start
    record(2, "oracle", worst <= 1e-10, f"max entry residual {worst:.2e}")
    record(2, "runtime", elapsed < 30, f"{elapsed:.2f}s")


@pytest.mark.parametrize("M,expected", [(2, 0.75), (3, 2 / 3)])
def test_criterion_03_bell_element(M, expected):
    spec = teleclone_basis(2, M)
    ch = teleclone_channel(2, M)
    value = bell_fidelity(port_pair_reduction(ch, spec.clones[0]))
    assert 3 * (M + 1) / (6 * M) == pytest.approx(expected)
    record(3, f"M={M}", abs(value - expected) <= 1e-10, f"{value:.15f} vs {expected:.15f}")


def test_criterion_04_asymmetric_point_values():
    spec = asymmetric.asym_basis(SQRT3_MINUS_1)
    psi = random_state((2,), np.random.default_rng(404))
    dens = asymmetric.asym_densities(spec, psi)
    checks = {
        "f_B": (dens.f_b, 2 / 3 + math.sqrt(3) / 6),
        "f_C": (dens.f_c, 2 / 3),
        "f_A": (dens.f_a, 1 / spec.norm),
        "c_C": (asymmetric.ppt_curves(SQRT3_MINUS_1).computed_c, 0.0),
    }
    for name, (got, want) in checks.items():
        record(4, name, abs(got - want) <= 1e-10, f"{got:.15f} vs {want:.15f}")


def test_criterion_04_ppt_curves_on_grid():
    worst = 0.0
    for p in np.linspace(0, 1, 101):
        try:
            c = asymmetric.ppt_curves(p, tol=1.0)
        except asymmetric.InterpretationMismatch as e:  # pragma: no cover - reported as failure
            worst = max(worst, abs(e.closed - e.computed))
            continue
        worst = max(worst, abs(c.c_b - c.computed_b), abs(c.c_c - c.computed_c))
    record(4, "grid", worst <= 1e-9, f"max |closed - eigensolve| {worst:.2e}")


def test_criterion_05_fidelity_ratio():
    psi = random_state((2,), np.random.default_rng(505))
    worst = 0.0
    for p in np.linspace(0, 1, 101):
        spec = asymmetric.asym_basis(p)
        dens = asymmetric.asym_densities(spec, psi)
        ratio = np.array([1 + spec.p**2, 1 + spec.q**2, 1.0])
        measured = np.array([dens.f_b, dens.f_c, dens.f_a])
        # proportionality: measured / ratio is the same constant for all three
        scaled = measured / ratio
        worst = max(worst, float(scaled.max() - scaled.min()), float(abs(scaled[2] - 1 / spec.norm)))
    record(5, "grid", worst <= 1e-10, f"max proportionality deviation {worst:.2e}")


@pytest.mark.parametrize("name", ["code3", "code5", "code7", "code9"])
def test_criterion_06_exhaustive_correction(name):
    code = qec.code_spec(name)
    psi = random_state((2,), np.random.default_rng(606))
    start = time.perf_counter()
    sweep = qec.correction_sweep(code, psi)
    elapsed = time.perf_counter() - start
    expected_classes = {"code3": 4, "code5": 16, "code7": 22, "code9": 28}[name]
    ok = (
        sweep.n_errors == expected_classes
        and sweep.corrected_classes == expected_classes
        and abs(1 - sweep.worst_fidelity) <= 1e-12
        and elapsed < 120
    )
    record(
        6,
        name,
        ok,
        f"{sweep.corrected_classes}/{sweep.n_errors} classes, {sweep.cases} cases, "
        f"worst fidelity {sweep.worst_fidelity:.15f}, {elapsed:.2f}s",
    )


@pytest.mark.parametrize("name", qec.CODE_NAMES)
def test_criterion_07_orthogonality(name):
    rep = qec.orthogonality_report(qec.code_spec(name))
    detail = f"Gram deviation {rep.max_deviation:.2e} over {rep.n_errors} error classes"
    if rep.degenerate_pairs:
        detail += f"; {len(rep.degenerate_pairs)} degenerate error pairs"
    record(7, name, rep.max_deviation <= 1e-10, detail)


@pytest.mark.parametrize("name,expected", [("code3", 1), ("code5", 3), ("code7", 2), ("code9", 1)])
def test_criterion_08_code_ebits(name, expected):
    rep = qec.ebit_report(qec.code_spec(name))
    record(8, name, abs(rep.natural_value - expected) <= 1e-9, f"{rep.natural_value:.12f} e-bits on cut {rep.natural_cut}")


@pytest.mark.parametrize("d,M", [(2, 1), (2, 2), (2, 3), (3, 2)])
def test_criterion_08_telecloning_sender_cut(d, M):
    value = entanglement_entropy(teleclone_channel(d, M).state, [0])
    record(8, f"teleclone d={d} M={M}", abs(value - math.log2(d)) <= 1e-9, f"{value:.12f}")


def test_criterion_09_decomposition_identities():
    worst_decomp = worst_basis = 0.0
    for d in (2, 3):
        for M in (1, 2, 3, 4):
            for k in range(sym_dim(d, M)):
                r = np.abs(recompose(d, M, sym_decompose(d, M, k)) - sym_vector(d, M, k)).max()
                worst_decomp = max(worst_decomp, float(r))
            worst_basis = max(
                worst_basis, float(np.abs(basis_by_contraction(d, M) - basis_by_coefficients(d, M)).max())
            )
    record(9, "decomposition", worst_decomp < 1e-12, f"max residual {worst_decomp:.2e}")
    record(9, "basis coefficients", worst_basis < 1e-12, f"max residual {worst_basis:.2e}")


@pytest.mark.parametrize("M", [2, 3])
def test_criterion_10_telecloning_ppt(M):
    spec = teleclone_basis(2, M)
    ch = teleclone_channel(2, M)
    anc = [min_pt_eigenvalue(port_pair_reduction(ch, a)) for a in spec.ancillas]
    clo = [min_pt_eigenvalue(port_pair_reduction(ch, c)) for c in spec.clones]
    record(10, f"M={M} ancillas PPT", all(v >= -1e-10 for v in anc), f"min PT eigenvalues {anc}")
    record(10, f"M={M} clones NPT", all(v < -1e-10 for v in clo), f"min PT eigenvalues {clo}")


def test_criterion_10_ghz_pairwise_ppt():
    rep = qec.ghz_pairwise_ppt(qec.code_spec("code3"))
    record(10, "GHZ pairs", rep.all_ppt and len(rep.pairs) == 6, f"min {min(rep.pairs.values()):.3e}")


def test_criterion_11_repeater():
    code = qec.code_spec("code3")
    psi = random_state((2,), np.random.default_rng(1111))
    fids = []
    for z1, z2 in itertools.product(range(code.n_errors), repeat=2):
        adv = qec.adversary_from_table([code.error(z1), code.error(z2)])
        fids.append(qec.repeater_run(2, psi, adv, seed=17 * z1 + z2).fidelity)
    worst = max(abs(1 - f) for f in fids)
    record(11, "2 hops", len(fids) == 16 and worst <= 1e-12, f"{len(fids)} adversaries, max deficit {worst:.2e}")


@pytest.mark.parametrize(
    "args",
    [
        ["teleport", "--d", "3"],
        ["teleclone", "--d", "2", "--M", "3"],
        ["asym"],
        ["qec", "--code", "code7"],
        ["repeater", "--hops", "2"],
    ],
)
def test_criterion_12_determinism(args, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        subprocess.run(
            [sys.executable, "-m", "qdist.cli", *args, "--seed", "42", "--out", str(path)], check=True
        )
        outs.append(path.read_bytes())
    record(12, " ".join(args), outs[0] == outs[1], f"{len(outs[0])} bytes")
