"""``qdist`` command line: run protocols and sweeps, emit JSON or CSV reports.

Exit codes: 0 when every check passes, 1 on a tolerance breach, 2 on usage errors.
``QDIST_TOL`` overrides the default 1e-10 tolerance.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import asymmetric, qec, telecloning
from .protocol import (
    build_channel,
    computational_basis,
    computational_lruo,
    run_distribution,
    sweep_distribution,
    verify_lruo,
)
from .tensor import TOL, PureState, entanglement_entropy, random_state

DEFAULT_SEED = 20010101
EXIT_BREACH = 1


def tolerance() -> float:
    raw = os.environ.get("QDIST_TOL")
    if raw is None:
        return TOL
    try:
        return float(raw)
    except ValueError:
        raise click.UsageError(f"QDIST_TOL={raw!r} is not a number")


def parse_state(text: str, d: int | None = None, renormalize: bool = False) -> PureState:
    """Parse ``"re,im;re,im;..."`` into a normalized single-particle state."""
    amps = []
    for i, chunk in enumerate(text.strip().split(";")):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"amplitude {i} ({chunk!r}) is not a 're,im' pair")
        try:
            re, im = (float(x) for x in parts)
        except ValueError:
            raise ValueError(f"amplitude {i} ({chunk!r}) is not numeric") from None
        amps.append(complex(re, im))
    if d is not None and len(amps) != d:
        raise ValueError(f"expected {d} amplitudes, got {len(amps)}")
    if len(amps) < 2:
        raise ValueError("a state needs at least two amplitudes")
    v = np.array(amps)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ValueError("zero vector is not a state")
    if not renormalize and abs(norm - 1) > 1e-6:
        raise ValueError(f"state has norm {norm:.9g}; pass --renormalize to rescale")
    return PureState.from_amplitudes((len(amps),), v / norm)


def parse_p(text: str) -> float:
    if text.strip().lower() == "sqrt3-1":
        return asymmetric.SQRT3_MINUS_1
    return float(text)


# -- report plumbing ------------------------------------------------------------


def _num(x: float) -> float:
    return float(f"{x:.15g}")


def clean(obj):
    """Convert to JSON-ready values with 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


@dataclass
class Report:
    command: str
    tol: float
    data: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    table: list[dict] = field(default_factory=list)

    def check(self, name: str, value: float, limit: float, ok: bool | None = None) -> None:
        """Record ``value`` against ``limit``; passes when ``value <= limit`` unless ``ok`` is given."""
        passed = value <= limit if ok is None else ok
        self.checks[name] = {"value": value, "limit": limit, "pass": bool(passed)}

    @property
    def failures(self) -> list[dict]:
        return [{"check": k, **v} for k, v in sorted(self.checks.items()) if not v["pass"]]

    def as_dict(self) -> dict:
        return clean(
            {
                "command": self.command,
                "tolerance": self.tol,
                "data": self.data,
                "checks": self.checks,
                "table": self.table,
                "failures": self.failures,
                "ok": not self.failures,
            }
        )


def render(report: Report, fmt: str) -> str:
    d = report.as_dict()
    if fmt == "json":
        return json.dumps(d, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    if d["table"]:
        cols = sorted({k for row in d["table"] for k in row})
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in d["table"]:
            w.writerow({k: _csv_cell(row.get(k)) for k in cols})
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(d):
            w.writerow([k, v])
    return buf.getvalue()


def _csv_cell(v):
    return json.dumps(v) if isinstance(v, (list, dict)) else v


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _input_state(state: str | None, d: int, seed: int, renormalize: bool) -> PureState:
    if state is None:
        return random_state((d,), np.random.default_rng(seed))
    try:
        return parse_state(state, d, renormalize)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--state")


# -- commands -------------------------------------------------------------------


def cmd_teleport(d: int, psi: PureState, seed: int, tol: float) -> Report:
    rep = Report("teleport", tol)
    channel = build_channel(computational_basis(d))
    pair = computational_lruo(d)
    results = sweep_distribution(psi, channel, pair)
    for r in results:
        rep.table.append(
            {"n": r.outcome.n, "m": r.outcome.m, "probability": r.outcome.probability, "fidelity": r.fidelity}
        )
    sampled = run_distribution(psi, channel, pair, seed=seed)
    rep.data.update(
        d=d,
        input=psi.amps,
        channel_ebits=entanglement_entropy(channel.state, [0]),
        classical_bits=sampled.transcript.classical_bits(),
        sampled={"n": sampled.outcome.n, "m": sampled.outcome.m, "fidelity": sampled.fidelity},
        transcript=sampled.transcript.events,
    )
    rep.check("fidelity_deficit", max(abs(1 - r.fidelity) for r in results), tol)
    rep.check("probability_spread", max(abs(r.outcome.probability - 1 / d**2) for r in results), tol)
    rep.check("channel_ebits_error", abs(rep.data["channel_ebits"] - math.log2(d)), 1e-9)
    return rep


def cmd_teleclone(d: int, M: int, psi: PureState, tol: float) -> Report:
    rep = Report("teleclone", tol)
    spec = telecloning.teleclone_basis(d, M)
    channel = telecloning.teleclone_channel(d, M)
    pair = telecloning.teleclone_lruo(d, M)
    clones = telecloning.clone_density(spec, psi)
    oracle = telecloning.werner_map(d, 1, M, psi.density())
    residual = float(np.abs(clones.rho_clones.entries - oracle.entries).max())
    sweep = sweep_distribution(psi, channel, pair)
    pb = telecloning.port_pair_reduction(channel, spec.clones[0])
    rep.data.update(
        d=d,
        M=M,
        input=psi.amps,
        per_clone_fidelity=clones.per_clone,
        oracle_residual=residual,
        bell_element=telecloning.bell_fidelity(pb),
        lruo_residual=verify_lruo(pair, spec.basis).residual,
        sender_cut_ebits=entanglement_entropy(channel.state, [0]),
        group_cut_ebits=entanglement_entropy(channel.state, range(M)),
        group_swap_residual=telecloning.group_swap_residual(channel.state, d, M),
        min_sweep_fidelity=min(r.fidelity for r in sweep),
    )
    rep.check("oracle_residual", residual, tol)
    rep.check("clone_spread", max(clones.per_clone) - min(clones.per_clone), tol)
    rep.check("sweep_fidelity_deficit", max(abs(1 - r.fidelity) for r in sweep), tol)
    rep.check("sender_cut_error", abs(rep.data["sender_cut_ebits"] - math.log2(d)), 1e-9)
    if d == 2:
        expected = telecloning.expected_qubit_bell_fidelity(M)
        rep.data["bell_element_expected"] = expected
        rep.check("bell_element_error", abs(rep.data["bell_element"] - expected), tol)
        rep.data["port_pair_min_pt"] = {
            f"{'ancilla' if i in spec.ancillas else 'clone'}{i}": telecloning.min_pt_eigenvalue(
                telecloning.port_pair_reduction(channel, i)
            )
            for i in range(2 * M - 1)
        }
    return rep


def _asym_row(p: float, psi: PureState, tol: float) -> dict:
    spec = asymmetric.asym_basis(p)
    dens = asymmetric.asym_densities(spec, psi)
    curves = asymmetric.ppt_curves(p)
    werner = asymmetric.werner_form(spec)
    ratio = asymmetric.fidelity_ratio(spec, psi)
    return {
        "p": p,
        "f_A": dens.f_a,
        "f_A_direct": dens.f_a_direct,
        "f_B": dens.f_b,
        "f_C": dens.f_c,
        "c_B": curves.c_b,
        "c_C": curves.c_c,
        "c_B_computed": curves.computed_b,
        "c_C_computed": curves.computed_c,
        "werner_phi_plus": werner.weights["Phi+"],
        "werner_other": werner.weights["Psi-"],
        "werner_residual": werner.residual,
        "ratio_residual": ratio.residual,
        "density_residual": dens.closed_form_residual,
    }


def cmd_asym(points: list[float], psi: PureState, tol: float) -> Report:
    rep = Report("asym", tol)
    for p in points:
        try:
            rep.table.append(_asym_row(p, psi, tol))
        except asymmetric.InterpretationMismatch as e:
            rep.table.append({"p": p, "error": str(e)})
            rep.check(f"ppt_curve_p={p}", abs(e.closed - e.computed), 1e-9, ok=False)
    rows = [r for r in rep.table if "error" not in r]
    rep.data.update(input=psi.amps, points=len(points))
    if rows:
        rep.check("ppt_curve_error", max(max(abs(r["c_B"] - r["c_B_computed"]), abs(r["c_C"] - r["c_C_computed"])) for r in rows), 1e-9)
        rep.check("ratio_residual", max(r["ratio_residual"] for r in rows), tol)
        rep.check("werner_residual", max(r["werner_residual"] for r in rows), tol)
        rep.check("ancilla_bound_excess", max(r["f_A"] - 2 / 3 for r in rows), tol)
    return rep


def cmd_qec(names: list[str], psi: PureState, tol: float) -> Report:
    rep = Report("qec", tol)
    for name in names:
        code = qec.code_spec(name)
        ortho = qec.orthogonality_report(code)
        sweep = qec.correction_sweep(code, psi)
        ebits = qec.ebit_report(code)
        stated = verify_lruo(code.stated_lruo, code.basis) if code.stated_lruo is not None else None
        row = {
            "code": name,
            "error_classes": code.n_errors,
            "corrected": sweep.corrected_classes,
            "cases": sweep.cases,
            "worst_fidelity": sweep.worst_fidelity,
            "gram_deviation": ortho.max_deviation,
            "gram_ok": ortho.ok,
            "sectors": len(ortho.sectors),
            "sector_gram_deviation": ortho.sector_deviation,
            "extended_bell_states": qec.extended_bell_basis(code).count,
            "ebits_expected": ebits.expected,
            "ebits": ebits.natural_value,
            "ebit_cut": list(ebits.natural_cut),
            "sender_cut_ebits": ebits.sender_cut,
            "lruo_residual": verify_lruo(code.lruo, code.basis).residual,
            "stated_lruo_ok": None if stated is None else stated.ok,
        }
        rep.table.append(row)
        rep.data[name] = {
            "degenerate_pairs": ortho.degenerate_pairs,
            "cuts_matching_expected": ebits.matching_cuts,
        }
        if name.startswith("code3"):
            rep.data[name]["pairwise_min_pt"] = qec.ghz_pairwise_ppt(code).pairs
        rep.check(f"{name}.correction_deficit", abs(1 - sweep.worst_fidelity), 1e-12)
        rep.check(f"{name}.sector_gram", ortho.sector_deviation, tol)
        rep.check(f"{name}.ebits_error", abs(ebits.natural_value - ebits.expected), 1e-9)
        rep.check(f"{name}.lruo_residual", row["lruo_residual"], tol)
    rep.data["input"] = psi.amps
    return rep


def cmd_repeater(hops: int, psi: PureState, seed: int, tol: float) -> Report:
    rep = Report("repeater", tol)
    code = qec.code_spec("code3")
    rng = np.random.default_rng(seed)
    worst = 1.0
    first = None
    for combo in itertools.product(range(code.n_errors), repeat=hops):
        errs = [code.error(z) for z in combo]
        run = qec.repeater_run(hops, psi, qec.adversary_from_table(errs), seed=int(rng.integers(2**32)))
        worst = min(worst, run.fidelity)
        rep.table.append({"errors": "|".join(e.label() for e in errs), "fidelity": run.fidelity})
        if first is None and all(not e.is_identity for e in errs):
            first = run.transcript.events
    rep.data.update(hops=hops, code=code.name, input=psi.amps, adversary_choices=len(rep.table), transcript=first)
    rep.check("fidelity_deficit", abs(1 - worst), 1e-12)
    return rep


# -- click wiring -----------------------------------------------------------------


def _emit(report: Report, fmt: str, out: str | None) -> None:
    text = render(report, fmt)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if report.failures:
        sys.exit(EXIT_BREACH)


_common = [
    click.option("--state", default=None, help="Input amplitudes as 're,im;re,im;...'."),
    click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True),
    click.option("--renormalize", is_flag=True, help="Rescale --state to unit norm."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main():
    """Simulate generalized teleportation, telecloning and tele-error-correction."""


@main.command()
@click.option("--d", "d", type=click.IntRange(min=2), default=2, show_default=True)
@common
def teleport(d, state, seed, renormalize, fmt, out):
    """Sweep all d^2 Bell outcomes of standard d-level teleportation."""
    tol = tolerance()
    _emit(cmd_teleport(d, _input_state(state, d, seed, renormalize), seed, tol), fmt, out)


@main.command()
@click.option("--d", "d", type=click.IntRange(min=2), default=2, show_default=True)
@click.option("--M", "M", type=click.IntRange(min=1), default=2, show_default=True)
@common
def teleclone(d, M, state, seed, renormalize, fmt, out):
    """1 -> M optimal telecloning: clone fidelities and the Werner-map oracle."""
    tol = tolerance()
    try:
        telecloning._check(d, M)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--d/--M")
    _emit(cmd_teleclone(d, M, _input_state(state, d, seed, renormalize), tol), fmt, out)


@main.command()
@click.option("--p", "p", default=None, help="Asymmetry parameter in [0, 1] or 'sqrt3-1'.")
@click.option("--sweep-grid", type=click.IntRange(min=2), default=101, show_default=True,
              help="Grid size over [0, 1] when --p is not given.")
@common
def asym(p, sweep_grid, state, seed, renormalize, fmt, out):
    """1 -> 2 asymmetric telecloning: fidelities, PPT curves and the Werner form."""
    tol = tolerance()
    if p is not None:
        try:
            points = [parse_p(p)]
        except ValueError:
            raise click.BadParameter(f"{p!r} is not a number or 'sqrt3-1'", param_hint="--p")
        if not 0 <= points[0] <= 1:
            raise click.BadParameter("p must lie in [0, 1]", param_hint="--p")
    else:
        points = [float(x) for x in np.linspace(0.0, 1.0, sweep_grid)]
    _emit(cmd_asym(points, _input_state(state, 2, seed, renormalize), tol), fmt, out)


@main.command(name="qec")
@click.option("--code", "code", type=click.Choice(list(qec.CODE_NAMES) + ["all"]), default="all", show_default=True)
@common
def qec_cmd(code, state, seed, renormalize, fmt, out):
    """Orthogonality, exhaustive correction sweep and e-bit accounting for the codes."""
    tol = tolerance()
    names = list(qec.CODE_NAMES) if code == "all" else [code]
    _emit(cmd_qec(names, _input_state(state, 2, seed, renormalize), tol), fmt, out)


@main.command()
@click.option("--hops", type=click.IntRange(min=1, max=4), default=2, show_default=True)
@common
def repeater(hops, state, seed, renormalize, fmt, out):
    """Error-correcting repeater over insecure hops, every single-error adversary."""
    tol = tolerance()
    _emit(cmd_repeater(hops, _input_state(state, 2, seed, renormalize), seed, tol), fmt, out)


if __name__ == "__main__":
    main()
