"""Configuration ingestion, scenario execution and the check suite.

Configs are flat INI documents with four sections:

    [scenario]  name, q0, p0, a, mu, stiffness, mass, model, generator
    [time]      t0, T, dt
    [solver]    tol, residual_tol, max_iter
    [output]    dir, prefix, seed, write_trajectory, write_report,
                balance, balance_tol, inequality, inequality_tol,
                pure_dissipative, pure_dissipative_tol,
                rivals, rival_margin_tol, info_gap_tol

Numbers are decimal with scientific notation; vectors are comma
separated.  Unknown keys are rejected.  CSV output uses the shortest
round-trip float representation with a '.' decimal separator, so two
runs with identical config and seed produce bit-identical files.

Exit codes: 0 all enabled checks pass, 1 operational error (bad config,
solver failure, I/O), 2 theorem-check failure (files still written).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import convex, diagnostics, dynamics, likelihood
from .errors import ConfigError, HamgapError, SolverError, UntemperedModelError, ValidationError
from .phase_space import OMEGA, PhasePoint, harmonic_oscillator

__all__ = ["RunConfig", "parse_config", "run", "list_scenarios", "check", "main"]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "rayleigh"
    q0: tuple = (1.0,)
    p0: tuple = (0.0,)
    a: float = 0.5
    mu: float = 0.3
    stiffness: float = 1.0
    mass: float = 1.0
    model: str = ""
    generator: str = "rayleigh"
    t0: float = 0.0
    T: float = 10.0
    dt: float = 1e-3
    tol: float = 1e-13
    residual_tol: float = 1e-8
    max_iter: int = 100
    outdir: str = "."
    prefix: str = ""
    seed: int = 0
    write_trajectory: bool = True
    write_report: bool = True
    balance: bool = True
    balance_tol: float = 1e-4
    inequality: bool = True
    inequality_tol: float = 1e-8
    pure_dissipative: bool = True
    pure_dissipative_tol: float = 1e-10
    rivals: int = 0
    rival_margin_tol: float = 1e-8
    info_gap_tol: float = 1e-8

    def to_ini(self) -> str:
        """Canonical serialization; parsing it reproduces this config."""
        out = []
        for section, keys in _SCHEMA.items():
            out.append(f"[{section}]")
            for key, (field_name, kind) in keys.items():
                out.append(f"{key} = {_format_value(getattr(self, field_name), kind)}")
            out.append("")
        return "\n".join(out)


_SCHEMA = {
    "scenario": {
        "name": ("scenario", "str"),
        "q0": ("q0", "vector"),
        "p0": ("p0", "vector"),
        "a": ("a", "float"),
        "mu": ("mu", "float"),
        "stiffness": ("stiffness", "float"),
        "mass": ("mass", "float"),
        "model": ("model", "str"),
        "generator": ("generator", "str"),
    },
    "time": {
        "t0": ("t0", "float"),
        "T": ("T", "float"),
        "dt": ("dt", "float"),
    },
    "solver": {
        "tol": ("tol", "float"),
        "residual_tol": ("residual_tol", "float"),
        "max_iter": ("max_iter", "int"),
    },
    "output": {
        "dir": ("outdir", "str"),
        "prefix": ("prefix", "str"),
        "seed": ("seed", "int"),
        "write_trajectory": ("write_trajectory", "bool"),
        "write_report": ("write_report", "bool"),
        "balance": ("balance", "bool"),
        "balance_tol": ("balance_tol", "float"),
        "inequality": ("inequality", "bool"),
        "inequality_tol": ("inequality_tol", "float"),
        "pure_dissipative": ("pure_dissipative", "bool"),
        "pure_dissipative_tol": ("pure_dissipative_tol", "float"),
        "rivals": ("rivals", "int"),
        "rival_margin_tol": ("rival_margin_tol", "float"),
        "info_gap_tol": ("info_gap_tol", "float"),
    },
}


def _format_value(value, kind: str) -> str:
    if kind == "vector":
        return ", ".join(repr(float(x)) for x in value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    return str(value)


def _parse_value(raw: str, kind: str, where: str):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "vector":
            parts = [s for s in raw.split(",") if s.strip()]
            if not parts:
                raise ValueError("empty vector")
            return tuple(float(s) for s in parts)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.scenario not in dynamics.scenario_names():
        raise ConfigError(
            f"scenario.name: unknown scenario {cfg.scenario!r}; "
            f"valid: {', '.join(dynamics.scenario_names())}"
        )
    if cfg.dt <= 0.0:
        raise ConfigError("time.dt must be positive")
    if cfg.T <= cfg.t0:
        raise ConfigError("time.T must exceed time.t0")
    if cfg.a < 0.0:
        raise ConfigError("scenario.a must be >= 0")
    if cfg.mu < 0.0:
        raise ConfigError("scenario.mu must be >= 0")
    if cfg.mass <= 0.0:
        raise ConfigError("scenario.mass must be positive")
    if len(cfg.q0) != len(cfg.p0):
        raise ConfigError("scenario.q0 and scenario.p0 must have equal length")
    if cfg.max_iter < 1:
        raise ConfigError("solver.max_iter must be >= 1")
    if cfg.rivals < 0:
        raise ConfigError("output.rivals must be >= 0")
    if cfg.tol <= 0.0 or cfg.residual_tol <= 0.0:
        raise ConfigError("solver tolerances must be positive")
    return cfg


def parse_config(text: str, overrides=()) -> RunConfig:
    """Parse an INI config document into a validated RunConfig.

    ``overrides`` are 'section.key=value' strings applied on top of the
    document (the CLI --set flag).  Syntax errors carry line numbers;
    semantic errors name the offending key and list the valid ones.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError(f"config syntax error: {exc}", line=line) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"config syntax error: {exc}", line=exc.lineno) from exc
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown section [{section}]; valid sections: "
                + ", ".join(f"[{s}]" for s in _SCHEMA)
            )
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}]; valid keys: "
                    + ", ".join(sorted(_SCHEMA[section]))
                )
            field_name, kind = _SCHEMA[section][key]
            values[field_name] = _parse_value(raw, kind, f"[{section}] {key}")

    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {ov!r}")
        target, raw = ov.split("=", 1)
        section, key = target.split(".", 1)
        section = section.strip()
        key = key.strip()
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"--set names unknown key {section}.{key}")
        field_name, kind = _SCHEMA[section][key]
        values[field_name] = _parse_value(raw, kind, f"--set {target}")

    return _validate(RunConfig(**values))


def load_config(path: str, overrides=()) -> RunConfig:
    with open(path, "r") as fh:
        return parse_config(fh.read(), overrides)


# ---------------------------------------------------------------------------
# Running scenarios
# ---------------------------------------------------------------------------


def _scenario_from_config(cfg: RunConfig) -> dynamics.Scenario:
    return dynamics.make_scenario(
        cfg.scenario,
        q0=cfg.q0,
        p0=cfg.p0,
        t0=cfg.t0,
        t_end=cfg.T,
        dt=cfg.dt,
        a=cfg.a,
        mu=cfg.mu,
        stiffness=cfg.stiffness,
        mass=cfg.mass,
        model=cfg.model or None,
        generator=cfg.generator,
        solver_tol=cfg.tol,
        residual_tol=cfg.residual_tol,
        max_iter=cfg.max_iter,
        seed=cfg.seed,
    )


def _trajectory_csv(traj: dynamics.Trajectory, path: str) -> None:
    n = traj.n
    cols = (
        ["t"]
        + [f"q{i}" for i in range(n)]
        + [f"p{i}" for i in range(n)]
        + [f"v_q{i}" for i in range(n)]
        + [f"v_p{i}" for i in range(n)]
        + [f"eta_q{i}" for i in range(n)]
        + [f"eta_p{i}" for i in range(n)]
        + ["residual", "bipot"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        m = traj.n_steps
        for k in range(m + 1):
            row = [repr(float(traj.times[k]))]
            row += [repr(float(x)) for x in traj.q[k]]
            row += [repr(float(x)) for x in traj.p[k]]
            if k < m:
                row += [repr(float(x)) for x in traj.v_q[k]]
                row += [repr(float(x)) for x in traj.v_p[k]]
                row += [repr(float(x)) for x in traj.eta_q[k]]
                row += [repr(float(x)) for x in traj.eta_p[k]]
                row.append(repr(float(traj.residual[k])))
                row.append(repr(float(traj.bipot[k])))
            else:
                row += [""] * (4 * n + 2)
            writer.writerow(row)


def run(cfg: RunConfig, echo=print) -> int:
    """Execute one configured run: integrate, diagnose, write CSVs.

    Returns the exit status (0 pass, 1 operational error, 2 check
    failure).  The stdout header echoes the canonical config.
    """
    echo("# hamgap run")
    echo("# canonical config:")
    for line in _scenario_header(cfg):
        echo(line)
    try:
        scenario = _scenario_from_config(cfg)
    except (ValidationError, ConfigError) as exc:
        echo(f"error: {exc}")
        return 1

    try:
        traj = dynamics.integrate(scenario)
    except UntemperedModelError as exc:
        echo(f"error: model failed temperedness check ({exc})")
        return 1
    except SolverError as exc:
        echo(f"error: solver failure: {exc}")
        return 1

    report = diagnostics.energy_balance(
        scenario.model,
        scenario.hamiltonian,
        traj,
        balance_tol=cfg.balance_tol,
        inequality_tol=cfg.inequality_tol,
    )

    failures = []
    if cfg.balance and not (
        report.passed_balance and report.passed_nonnegativity and report.passed_monotone
    ):
        failures.append("energy balance")
    if cfg.inequality and not report.passed_inequality:
        failures.append("dissipation inequality")
    if cfg.pure_dissipative:
        ok, worst = dynamics.pure_dissipative_check(
            scenario.hamiltonian, traj, tol=cfg.pure_dissipative_tol
        )
        echo(f"pure-dissipative check: worst omega(v, eta) = {worst:.6g} -> "
             f"{'pass' if ok else 'FAIL'}")
        if not ok:
            failures.append("pure dissipative check")

    rival_summary = ""
    if cfg.rivals > 0:
        if scenario.stepper in ("rayleigh", "pure_hamiltonian"):
            rivals = diagnostics.perturbed_rivals(scenario, count=cfg.rivals, seed=cfg.seed)
            compare = diagnostics.minimal_dissipation_compare(
                scenario.model,
                scenario.hamiltonian,
                traj,
                rivals,
                margin_tol=cfg.rival_margin_tol,
            )
            g_sol = diagnostics.info_gap(scenario.model, scenario.hamiltonian, traj)
            window = cfg.T - cfg.t0
            g_ok = g_sol <= cfg.info_gap_tol * window
            rival_summary = compare.summary() + f"\nsolution info gap: {g_sol:.6g}"
            if not compare.passed:
                failures.append("minimal dissipation")
            if not g_ok:
                failures.append("solution info gap")
        else:
            rival_summary = "rival comparison skipped (supported for smooth scenarios)"

    echo(report.summary())
    if rival_summary:
        echo(rival_summary)

    prefix = cfg.prefix or cfg.scenario
    os.makedirs(cfg.outdir, exist_ok=True)
    try:
        if cfg.write_trajectory:
            path = os.path.join(cfg.outdir, f"{prefix}_trajectory.csv")
            _trajectory_csv(traj, path)
            echo(f"wrote {path}")
        if cfg.write_report:
            path = os.path.join(cfg.outdir, f"{prefix}_report.csv")
            report.to_csv(path)
            echo(f"wrote {path}")
    except OSError as exc:
        echo(f"error: I/O failure: {exc}")
        return 1

    final = traj.final_state
    echo(
        "final state: q="
        + np.array2string(final.q, precision=12)
        + " p="
        + np.array2string(final.p, precision=12)
    )
    if scenario.stepper == "friction":
        mu = scenario.params.get("mu", 0.0)
        k = scenario.params.get("stiffness", 1.0)
        band = mu / k if k else math.inf
        inside = bool(np.all(np.abs(final.q) <= band + 1e-6) and np.all(final.p == 0.0))
        echo(f"stick band |q| <= {band:g}: final state inside = {inside}")

    if failures:
        echo("FAILED checks: " + ", ".join(failures))
        return 2
    echo("all enabled checks passed")
    return 0


def _scenario_header(cfg: RunConfig):
    for line in cfg.to_ini().splitlines():
        yield "# " + line if line else "#"


def list_scenarios() -> str:
    """Fixed-order table of registry scenarios."""
    rows = [(name, dynamics.scenario_description(name)) for name in dynamics.scenario_names()]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {desc}" for name, desc in rows)


# ---------------------------------------------------------------------------
# Check suite
# ---------------------------------------------------------------------------


def _check_models(samples: int, seed: int, lines: list) -> bool:
    ok_all = True
    models = [
        likelihood.pure_hamiltonian_model(),
        likelihood.rayleigh_model(0.5),
        likelihood.friction_model(0.3),
        likelihood.max_likelihood_model(),
    ]
    for m in models:
        ax = likelihood.likelihood_axioms_check(m, samples=samples, seed=seed)
        tp = likelihood.temperedness_check(m, samples=samples, seed=seed)
        ok = ax.ok and tp.ok
        ok_all &= ok
        lines.append(
            f"  {m.name:<24} axioms={'pass' if ax.ok else 'FAIL'} "
            f"tempered={'pass' if tp.ok else 'FAIL'} (min slack {tp.min_slack:.2e})"
        )
    # negative control: the identically-likely model must be caught
    control = likelihood.always_likely_model()
    tp = likelihood.temperedness_check(control, samples=samples, seed=seed)
    caught = not tp.ok and tp.witness is not None
    ok_all &= caught
    lines.append(
        f"  {control.name:<24} untempered control: "
        f"{'detected' if caught else 'NOT DETECTED'}"
        + (
            f" (witness omega={OMEGA(tp.witness[1], tp.witness[2]):.4g})"
            if caught
            else ""
        )
    )
    return ok_all


def _check_fenchel(samples: int, seed: int, lines: list) -> bool:
    rng = np.random.default_rng(seed)
    ok_all = True
    pots = [
        convex.zero_potential(),
        convex.indicator_origin(),
        convex.quadratic_position(1.0),
        convex.position_norm(0.3),
    ]
    origin = PhasePoint(np.zeros(1), np.zeros(1))
    for f in pots:
        worst = math.inf
        finite_hits = 0
        for k in range(samples):
            z1 = PhasePoint(rng.uniform(-3, 3, 1), rng.uniform(-3, 3, 1))
            if k % 4 == 0:
                # land in the feasible slab q2 = 0 so the gap is finite
                z2 = PhasePoint(np.zeros(1), rng.uniform(-1, 1, 1))
            elif k % 4 == 1:
                z2 = origin
            elif k % 4 == 2:
                z1 = origin
                z2 = PhasePoint(np.zeros(1), rng.uniform(-1, 1, 1))
            else:
                z2 = PhasePoint(rng.uniform(-3, 3, 1), rng.uniform(-3, 3, 1))
            gap = convex.fenchel_gap(f, OMEGA, z1, z2)
            if math.isfinite(gap):
                finite_hits += 1
                worst = min(worst, gap)
        ok = (worst >= -1e-10) and finite_hits > 0
        ok_all &= ok
        lines.append(
            f"  {f.name:<24} fenchel gap >= -1e-10: {'pass' if ok else 'FAIL'}"
            f" (min gap {worst:.2e} over {finite_hits} finite samples)"
        )
    return ok_all


def _check_oracles(seed: int, lines: list) -> bool:
    ok_all = True
    # closed-form quadratic polar vs grid oracle, within the a-priori bound
    f = convex.quadratic_position(2.0)
    grid = convex.GridSpec.cube(1, 4.0, 161)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(32):
        z2 = PhasePoint(np.zeros(1), rng.uniform(-2.0, 2.0, 1))
        closed = f.polar_omega(z2)
        est = convex.right_polar(f, OMEGA, z2, grid)
        lip = float(np.abs(z2.p[0])) + 2.0 * 4.0 + 4.0
        bound = convex.polar_grid_error_bound(grid, lip)
        if est.unbounded or est.value > closed + 1e-9 or closed - est.value > bound:
            ok_all = False
        worst = max(worst, abs(closed - est.value))
    lines.append(f"  quadratic polar closed vs grid: worst |diff| = {worst:.2e}")

    # friction gap residual vs the analytic formula mu|H_p| + H_p eta_p
    H = harmonic_oscillator()
    m = likelihood.friction_model(0.3)
    worst = 0.0
    for _ in range(64):
        z = PhasePoint(rng.uniform(-2, 2, 1), rng.uniform(-2, 2, 1))
        eta_p = rng.uniform(-0.3, 0.3)
        eta = PhasePoint(np.zeros(1), np.array([eta_p]))
        got = dynamics.gap_residual(m, H, z, 0.0, eta)
        hp = float(H.dp(z.q, z.p, 0.0)[0])
        want = 0.3 * abs(hp) + hp * eta_p
        worst = max(worst, abs(got - want))
    ok = worst <= 1e-12
    ok_all &= ok
    lines.append(
        f"  friction gap residual analytic: worst |diff| = {worst:.2e} -> "
        f"{'pass' if ok else 'FAIL'}"
    )

    # support-set membership against the analytic box on a scan
    fpot = convex.position_norm(0.3)
    C = convex.support_set(fpot)
    scan = np.linspace(-0.6, 0.6, 201)
    agree = True
    for val in scan:
        z = PhasePoint(np.zeros(1), np.array([val]))
        analytic = abs(val) <= 0.3 + convex.DEFAULT_MEMBERSHIP_ATOL
        agree &= C.contains(z) == analytic
    ok_all &= agree
    lines.append(f"  support-set 201-point scan matches analytic: {'pass' if agree else 'FAIL'}")
    return ok_all


def _check_dominance(samples: int, seed: int, lines: list) -> bool:
    ok_all = True
    pmax = likelihood.max_likelihood_model()
    for m in (
        likelihood.pure_hamiltonian_model(),
        likelihood.rayleigh_model(0.5),
        likelihood.friction_model(0.3),
    ):
        rep = likelihood.dominates(pmax, m, samples=samples, seed=seed)
        ok_all &= rep.ok
        lines.append(
            f"  max_likelihood dominates {m.name:<18}: {'pass' if rep.ok else 'FAIL'}"
        )
    return ok_all


def check(samples: int = 2000, seed: int = 0, echo=print) -> int:
    """Run the likelihood axiom, temperedness, Fenchel and oracle checks.

    Prints a pass/fail matrix; returns 0 when every check passes
    (including detection of the untempered control model), else 2.
    """
    lines = []
    ok = True
    lines.append("model checks:")
    ok &= _check_models(samples, seed, lines)
    lines.append("fenchel sweeps:")
    ok &= _check_fenchel(max(10, samples // 10), seed, lines)
    lines.append("oracle cross-checks:")
    ok &= _check_oracles(seed, lines)
    lines.append("dominance:")
    ok &= _check_dominance(samples, seed, lines)
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    for line in lines:
        echo(line)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# Polar tabulation
# ---------------------------------------------------------------------------


def _potential_by_name(name: str, a: float, mu: float) -> convex.ConvexPotential:
    builders = {
        "zero": convex.zero_potential,
        "indicator_origin": convex.indicator_origin,
        "quadratic": lambda: convex.quadratic_position(a),
        "position_norm": lambda: convex.position_norm(mu),
    }
    if name not in builders:
        raise ConfigError(
            f"unknown potential {name!r}; valid: {', '.join(builders)}"
        )
    return builders[name]()


def _parse_grid_spec(spec: str, n: int) -> convex.GridSpec:
    try:
        lo, hi, count = spec.split(":")
        return convex.GridSpec(
            lower=(float(lo),) * (2 * n),
            upper=(float(hi),) * (2 * n),
            counts=(int(count),) * (2 * n),
        )
    except (ValueError, HamgapError) as exc:
        raise ConfigError(f"bad grid spec {spec!r} (expected lo:hi:count): {exc}") from exc


def tabulate_polar(
    f: convex.ConvexPotential, grid: convex.GridSpec, out_path: str, echo=print
) -> int:
    """Tabulate the right omega-polar of ``f`` on the grid and emit CSV.

    Values come from the grid oracle; entries flagged by the nested-grid
    growth heuristic are written as the UNBOUNDED sentinel string.
    """
    n = grid.n
    pts = grid.points()
    qs, ps = pts[:, :n], pts[:, n:]
    fv = f.value_arrays(qs, ps)
    wide = grid.widened(2.0)
    wpts = wide.points()
    wqs, wps = wpts[:, :n], wpts[:, n:]
    wfv = f.value_arrays(wqs, wps)

    def sup_against(base_q, base_p, base_f, out_q, out_p):
        block = max(1, int(2e7) // max(1, base_q.shape[0]))
        res = np.empty(out_q.shape[0])
        for start in range(0, out_q.shape[0], block):
            sl = slice(start, start + block)
            vals = (
                np.sum(out_q[sl][None, :, :] * base_p[:, None, :], axis=-1)
                - np.sum(base_q[:, None, :] * out_p[sl][None, :, :], axis=-1)
                - base_f[:, None]
            )
            res[sl] = np.max(vals, axis=0)
        return res

    v_base = sup_against(qs, ps, fv, qs, ps)
    v_wide = sup_against(wqs, wps, wfv, qs, ps)
    scale = np.maximum(1.0, np.abs(v_base))
    unbounded = (v_wide - v_base) > 0.5 * scale

    cols = [f"q{i}" for i in range(n)] + [f"p{i}" for i in range(n)] + ["polar"]
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for k in range(pts.shape[0]):
            row = [repr(float(x)) for x in pts[k]]
            row.append("UNBOUNDED" if unbounded[k] else repr(float(v_base[k])))
            writer.writerow(row)
    echo(f"wrote {out_path} ({pts.shape[0]} rows)")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _sweep_values(raw: str):
    key, _, values = raw.partition("=")
    if not values:
        raise ConfigError(f"--sweep expects section.key=v1,v2,..., got {raw!r}")
    return key.strip(), [v.strip() for v in values.split(",") if v.strip()]


def _run_one(args_tuple):
    cfg, = args_tuple
    return run(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hamgap",
        description="Dissipative Hamiltonian dynamics: runs, checks, polar tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured scenario")
    p_run.add_argument("--config", required=True, help="INI config file")
    p_run.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p_run.add_argument("--sweep", default=None, metavar="SECTION.KEY=V1,V2,...")
    p_run.add_argument("--workers", type=int, default=1)

    sub.add_parser("list", help="list registry scenarios")

    p_check = sub.add_parser("check", help="run the invariant suite")
    p_check.add_argument("--samples", type=int, default=2000)
    p_check.add_argument("--seed", type=int, default=0)

    p_polar = sub.add_parser("polar", help="tabulate a polar over a grid to CSV")
    p_polar.add_argument("--potential", required=True)
    p_polar.add_argument("--a", type=float, default=1.0)
    p_polar.add_argument("--mu", type=float, default=0.3)
    p_polar.add_argument("--grid", required=True, metavar="LO:HI:COUNT")
    p_polar.add_argument("--n", type=int, default=1)
    p_polar.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    try:
        if args.command == "list":
            print(list_scenarios())
            return 0
        if args.command == "check":
            return check(samples=args.samples, seed=args.seed)
        if args.command == "polar":
            f = _potential_by_name(args.potential, args.a, args.mu)
            grid = _parse_grid_spec(args.grid, args.n)
            return tabulate_polar(f, grid, args.out)
        # run
        cfg = load_config(args.config, overrides=args.set)
        if args.sweep:
            key, values = _sweep_values(args.sweep)
            configs = []
            for v in values:
                c = parse_config(cfg.to_ini(), overrides=[f"{key}={v}"])
                suffix = f"{key.split('.')[-1]}_{v}"
                base_prefix = c.prefix or c.scenario
                c = replace(c, prefix=f"{base_prefix}_{suffix}")
                configs.append(c)
            if args.workers > 1:
                import concurrent.futures

                with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
                    codes = list(pool.map(_run_one, [(c,) for c in configs]))
            else:
                codes = [run(c) for c in configs]
            return max(codes) if codes else 0
        return run(cfg)
    except ConfigError as exc:
        loc = f" (line {exc.line})" if exc.line else ""
        print(f"config error{loc}: {exc}", file=sys.stderr)
        return 1
    except HamgapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
