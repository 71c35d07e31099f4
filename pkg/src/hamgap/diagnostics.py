"""Post-hoc functionals and theorem checkers over trajectories.

Everything here is the discrete shadow of a time integral, evaluated at
the integrator's own evaluation points (interval midpoints), so the
checks probe the scheme's internal consistency rather than mixing
quadratures; residuals therefore shrink with dt.

Checked statements, for a tempered model along a solution:

* energy balance: H(c(t), t) = H(z0, t0) + int dH/dt - Diss(t), where
  Diss is the integral of the symplectic bipotential along the curve;
* dissipation inequality: d/dt H - dH/dt <= 0;
* minimal information: the information-content gap
  G = int I(c, cdot, cdot - XH) vanishes on solutions and is >= 0 on
  every rival curve from the same initial state, equivalently
  Diss + H(end) is minimal among rivals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    Scenario,
    Trajectory,
    _midpoint_scalar,
    _midpoint_vector,
    trajectory_from_samples,
)
from .errors import ValidationError
from .likelihood import DissipationModel
from .phase_space import Hamiltonian, omega_arrays

__all__ = [
    "BalanceReport",
    "CompareReport",
    "dissipation",
    "energy_balance",
    "dissipation_inequality",
    "info_gap",
    "info_gap_terms",
    "minimal_dissipation_compare",
    "perturbed_rivals",
]

RIVAL_NOTE = (
    "minimal-dissipation comparison against a finite rival family is a "
    "spot check, not a proof over all curves"
)


def _step_values(model: DissipationModel, traj: Trajectory):
    """Information content and symplectic bipotential of every step of
    ``traj`` under ``model`` (which need not be the model the trajectory
    was produced with)."""
    info = model.info_arrays(
        traj.zhat_q, traj.zhat_p, traj.v_q, traj.v_p, traj.eta_q, traj.eta_p
    )
    bipot = info + omega_arrays(traj.v_q, traj.v_p, traj.eta_q, traj.eta_p)
    return info, bipot


def dissipation(model: DissipationModel, H: Hamiltonian, traj: Trajectory) -> np.ndarray:
    """Per-step dissipation terms b_omega(zhat, v, eta) * dt.

    The sum over steps discretizes the dissipation functional; every term
    is >= -1e-12 for a tempered model, and +inf marks an infeasible step
    (the offending indices are flagged in the balance report).
    """
    _, bipot = _step_values(model, traj)
    return bipot * traj.dt_steps


def info_gap_terms(model: DissipationModel, H: Hamiltonian, traj: Trajectory) -> np.ndarray:
    """Per-step information-content terms I(zhat, v, eta) * dt."""
    info, _ = _step_values(model, traj)
    return info * traj.dt_steps


def info_gap(model: DissipationModel, H: Hamiltonian, traj: Trajectory) -> float:
    """The information-content gap G = sum of I(zhat, v, eta) * dt.

    Vanishes (to solver accuracy) exactly on solution trajectories; it
    equals Diss + H(end) - H(start) - int dH/dt up to the quadrature
    budget of the scheme.
    """
    return float(np.sum(info_gap_terms(model, H, traj)))


def dissipation_inequality(model: DissipationModel, H: Hamiltonian, traj: Trajectory) -> float:
    """Worst discrete value of d/dt H - dH/dt over the steps.

    Nonpositive (up to tolerance) along solutions of any tempered model;
    a positive value is a certificate that the curve is not a solution.
    """
    energies = traj.energies(H)
    dhdt = np.broadcast_to(
        np.asarray(H.dt(traj.zhat_q, traj.zhat_p, traj.t_hat), float), traj.t_hat.shape
    )
    lhs = np.diff(energies) / traj.dt_steps - dhdt
    return float(np.max(lhs))


@dataclass
class BalanceReport:
    """Energy balance, dissipation and information-gap data for one run.

    Per-step arrays have one entry per step, indexed by the step's end
    time.  ``balance_residual[k]`` is
    H(z_{k+1}) - H(z_0) - sum(dH/dt * dt) + Diss_cum, which the energy
    balance theorem sends to zero as dt does.
    """

    t: np.ndarray
    energy: np.ndarray
    diss_step: np.ndarray
    diss_cum: np.ndarray
    balance_residual: np.ndarray
    ineq_lhs: np.ndarray
    info_step: np.ndarray
    info_cum: np.ndarray
    dt_nominal: float
    max_abs_residual: float
    worst_inequality: float
    total_dissipation: float
    total_info_gap: float
    g_identity_defect: float
    infinite_steps: list
    balance_tol: float
    inequality_tol: float
    passed_balance: bool
    passed_inequality: bool
    passed_nonnegativity: bool
    passed_monotone: bool
    scenario_name: str = ""

    @property
    def passed(self) -> bool:
        return (
            self.passed_balance
            and self.passed_inequality
            and self.passed_nonnegativity
            and self.passed_monotone
        )

    CSV_COLUMNS = ("t", "H", "diss_cum", "balance_residual", "ineq_lhs", "info_gap_cum")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_COLUMNS)
            for k in range(self.t.size):
                writer.writerow(
                    [
                        repr(float(self.t[k])),
                        repr(float(self.energy[k])),
                        repr(float(self.diss_cum[k])),
                        repr(float(self.balance_residual[k])),
                        repr(float(self.ineq_lhs[k])),
                        repr(float(self.info_cum[k])),
                    ]
                )

    def summary(self) -> str:
        lines = [
            f"balance report: {self.scenario_name or 'run'}",
            f"  steps                : {self.t.size}",
            f"  nominal dt           : {self.dt_nominal:.6g}",
            f"  total dissipation    : {self.total_dissipation:.12g}",
            f"  total info gap       : {self.total_info_gap:.6g}",
            f"  max |balance residual|: {self.max_abs_residual:.6g}"
            f" (tol {self.balance_tol:g}) -> {'pass' if self.passed_balance else 'FAIL'}",
            f"  worst dH/dt - dH/dt_exp: {self.worst_inequality:.6g}"
            f" (tol {self.inequality_tol:g}) -> {'pass' if self.passed_inequality else 'FAIL'}",
            f"  per-step bipotential >= 0: {'pass' if self.passed_nonnegativity else 'FAIL'}",
            f"  cumulative dissipation monotone: {'pass' if self.passed_monotone else 'FAIL'}",
            f"  G identity defect    : {self.g_identity_defect:.6g}",
        ]
        if self.infinite_steps:
            lines.append(f"  infinite-dissipation steps: {self.infinite_steps}")
        return "\n".join(lines)


def energy_balance(
    model: DissipationModel,
    H: Hamiltonian,
    traj: Trajectory,
    balance_tol: float = 1e-4,
    inequality_tol: float = 1e-8,
) -> BalanceReport:
    """Evaluate the energy balance and dissipation inequalities over a run."""
    info, bipot = _step_values(model, traj)
    h = traj.dt_steps
    energies = traj.energies(H)
    dhdt = np.broadcast_to(
        np.asarray(H.dt(traj.zhat_q, traj.zhat_p, traj.t_hat), float), traj.t_hat.shape
    )
    diss_step = bipot * h
    diss_cum = np.cumsum(diss_step)
    info_step = info * h
    info_cum = np.cumsum(info_step)
    drive_cum = np.cumsum(dhdt * h)
    residual = energies[1:] - energies[0] - drive_cum + diss_cum
    ineq_lhs = np.diff(energies) / h - dhdt

    finite = np.isfinite(diss_step)
    infinite_steps = [int(k) for k in np.where(~finite)[0]]
    max_abs_residual = (
        float(np.max(np.abs(residual[np.isfinite(residual)])))
        if np.any(np.isfinite(residual))
        else math.inf
    )
    worst_inequality = float(np.max(ineq_lhs))
    total_diss = float(np.sum(diss_step))
    total_info = float(np.sum(info_step))
    g_defect = abs(
        total_info - (total_diss + energies[-1] - energies[0] - float(drive_cum[-1]))
    )
    nonneg = bool(np.all(bipot >= -1e-12))
    monotone = bool(np.all(np.diff(diss_cum) >= -1e-12)) if diss_cum.size > 1 else True

    return BalanceReport(
        t=traj.times[1:].copy(),
        energy=energies[1:].copy(),
        diss_step=diss_step,
        diss_cum=diss_cum,
        balance_residual=residual,
        ineq_lhs=ineq_lhs,
        info_step=info_step,
        info_cum=info_cum,
        dt_nominal=float(np.median(h)),
        max_abs_residual=max_abs_residual,
        worst_inequality=worst_inequality,
        total_dissipation=total_diss,
        total_info_gap=total_info,
        g_identity_defect=g_defect,
        infinite_steps=infinite_steps,
        balance_tol=balance_tol,
        inequality_tol=inequality_tol,
        passed_balance=bool(len(infinite_steps) == 0 and max_abs_residual <= balance_tol),
        passed_inequality=bool(worst_inequality <= inequality_tol),
        passed_nonnegativity=nonneg,
        passed_monotone=monotone,
        scenario_name=traj.scenario_name,
    )


# ---------------------------------------------------------------------------
# Minimal-dissipation comparison
# ---------------------------------------------------------------------------


@dataclass
class CompareReport:
    """Margins Diss(rival) + H(rival end) - Diss(solution) - H(solution end).

    Nonnegative margins confirm the minimal-dissipation principle on the
    tested family; +inf marks a rival with an infeasible gap vector.
    The comparison is a spot check over the supplied family only.
    """

    margins: list
    infeasible: list
    margin_tol: float
    note: str = RIVAL_NOTE

    @property
    def passed(self) -> bool:
        return all(m >= -self.margin_tol for m in self.margins)

    def summary(self) -> str:
        lines = [f"minimal-dissipation comparison ({len(self.margins)} rivals)"]
        lines.append(f"  note: {self.note}")
        for j, m in enumerate(self.margins):
            tag = "infeasible" if j in self.infeasible else f"{m:.6g}"
            lines.append(f"  rival {j}: margin {tag}")
        lines.append(f"  verdict: {'pass' if self.passed else 'FAIL'} (tol {self.margin_tol:g})")
        return "\n".join(lines)


def minimal_dissipation_compare(
    model: DissipationModel,
    H: Hamiltonian,
    solution: Trajectory,
    rivals,
    margin_tol: float = 1e-8,
) -> CompareReport:
    """Check Diss + H(end) of the solution against rival curves sharing z0."""
    base = float(np.sum(dissipation(model, H, solution))) + float(
        solution.energies(H)[-1]
    )
    margins = []
    infeasible = []
    for j, rival in enumerate(rivals):
        if not np.allclose(rival.q[0], solution.q[0]) or not np.allclose(
            rival.p[0], solution.p[0]
        ):
            raise ValidationError(f"rival {j} does not share the initial state")
        val = float(np.sum(dissipation(model, H, rival))) + float(rival.energies(H)[-1])
        margin = val - base
        margins.append(margin)
        if math.isinf(margin):
            infeasible.append(j)
    return CompareReport(margins=margins, infeasible=infeasible, margin_tol=margin_tol)


# ---------------------------------------------------------------------------
# Rival families
# ---------------------------------------------------------------------------


def _triangle(x: np.ndarray) -> np.ndarray:
    """Piecewise-linear wave in [-1, 1] with period 2 pi."""
    frac = np.mod(x / (2.0 * math.pi), 1.0)
    return 2.0 * np.abs(2.0 * frac - 1.0) - 1.0


def perturbed_rivals(
    scenario: Scenario,
    count: int = 5,
    seed: int = 0,
    amplitude: float = 0.01,
):
    """Deterministic rival curves sharing the scenario's initial state.

    Each rival integrates the scenario dynamics with an extra forcing
    term in the momentum equation (alternating sinusoidal and
    piecewise-linear profiles with seeded frequencies and phases), using
    the same implicit-midpoint scheme.  The forcing leaves the position
    equation untouched, so rival gap vectors remain feasible for
    position-lifted smooth models.
    """
    if scenario.stepper not in ("rayleigh", "pure_hamiltonian"):
        raise ValidationError(
            "rival generation supports the smooth scenarios (rayleigh, pure_hamiltonian)"
        )
    H = scenario.hamiltonian
    a = float(scenario.params.get("a", 0.0)) if scenario.stepper == "rayleigh" else 0.0
    rng = np.random.default_rng(seed)
    rivals = []
    t0, t_end, dt = scenario.t0, scenario.t_end, scenario.dt
    n_steps = max(1, int(round((t_end - t0) / dt)))
    for j in range(count):
        freq = float(rng.uniform(1.0, 6.0))
        phase = float(rng.uniform(0.0, 2.0 * math.pi))
        if j % 2 == 0:
            profile = lambda t, _fr=freq, _ph=phase: amplitude * math.sin(_fr * t + _ph)
        else:
            profile = lambda t, _fr=freq, _ph=phase: amplitude * float(
                _triangle(np.asarray(_fr * t + _ph))
            )

        if scenario.z0.n == 1:
            dq_, dp_ = H.dq, H.dp

            def rhs(q, p, t, _f=profile):
                hp = float(np.asarray(dp_(q, p, t)).reshape(-1)[0])
                hq = float(np.asarray(dq_(q, p, t)).reshape(-1)[0])
                return hp, -hq - a * hp + _f(t)

            q = float(scenario.z0.q[0])
            p = float(scenario.z0.p[0])
            times = [t0]
            qs = [q]
            ps = [p]
            for k in range(n_steps):
                t_k = t0 + k * dt
                t_next = t_end if k == n_steps - 1 else t0 + (k + 1) * dt
                q, p, _, _ = _midpoint_scalar(
                    rhs, q, p, t_k, t_next - t_k, scenario.solver_tol, scenario.max_iter
                )
                times.append(t_next)
                qs.append(q)
                ps.append(p)
            traj = trajectory_from_samples(
                H,
                np.asarray(times),
                np.asarray(qs),
                np.asarray(ps),
                model=scenario.model,
                scenario_name=f"rival_{j}",
            )
        else:
            dq_, dp_ = H.dq, H.dp

            def rhs(q, p, t, _f=profile):
                hp = np.broadcast_to(np.asarray(dp_(q, p, t), float), q.shape)
                hq = np.broadcast_to(np.asarray(dq_(q, p, t), float), p.shape)
                return hp, -hq - a * hp + _f(t)

            q = scenario.z0.q.copy()
            p = scenario.z0.p.copy()
            times = [t0]
            qs = [q.copy()]
            ps = [p.copy()]
            for k in range(n_steps):
                t_k = t0 + k * dt
                t_next = t_end if k == n_steps - 1 else t0 + (k + 1) * dt
                q, p, _, _ = _midpoint_vector(
                    rhs, q, p, t_k, t_next - t_k, scenario.solver_tol, scenario.max_iter
                )
                times.append(t_next)
                qs.append(q)
                ps.append(p)
            traj = trajectory_from_samples(
                H,
                np.asarray(times),
                np.vstack(qs),
                np.vstack(ps),
                model=scenario.model,
                scenario_name=f"rival_{j}",
            )
        rivals.append(traj)
    return rivals
