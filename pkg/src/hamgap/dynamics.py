"""Integrators for dissipative Hamiltonian dynamics.

The evolution problem: given a Hamiltonian H and a tempered dissipation
model with information content I, find a curve c(t) with

    qdot = dH/dp + eta_q,   pdot = -dH/dq + eta_p,
    I(c(t), cdot(t), eta(t)) = 0,

where eta = cdot - XH(c, t) is the gap vector.  Per time step the
discrete counterpart accepts a velocity v with vanishing step residual

    R(v) = b_omega(z, v, v - XH(zhat, that)) - omega(v, v - XH(zhat, that))
         = I(z, v, v - XH(zhat, that)),

which makes every accepted step a minimal-information selection.

Discretization: one implicit-midpoint step per interval, with the
evaluation point (zhat, that) at the interval midpoint.  Nonsmooth
(stick-slip) dynamics is integrated arc-wise: within a sliding arc the
sign vector of the velocity is constant and the dynamics is the
Hamiltonian flow of the tilted energy H + mu <s, q>, so the midpoint
step applies unchanged; arcs are separated by zero-velocity events
located by bisection.  Trajectories record per-step velocities, gap
vectors, residuals and bipotential values at the scheme's own
evaluation points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleStepError,
    SolverError,
    UntemperedModelError,
    ValidationError,
)
from .likelihood import (
    DissipationModel,
    always_likely_model,
    friction_model,
    max_likelihood_model,
    pure_hamiltonian_model,
    rayleigh_model,
    temperedness_check,
)
from .phase_space import (
    Hamiltonian,
    PhasePoint,
    harmonic_oscillator,
    omega_arrays,
    symplectic_gradient,
)

__all__ = [
    "Scenario",
    "Trajectory",
    "gap_residual",
    "step_pure_hamiltonian",
    "step_rayleigh",
    "step_friction",
    "step_generic",
    "integrate",
    "pure_dissipative_check",
    "trajectory_from_samples",
    "make_scenario",
    "scenario_names",
    "scenario_description",
]

_EVENT_TIME_TOL = 1e-12  # bisection window for stick-slip events


def _scalar(x) -> float:
    """Coerce a 0-d / length-1 derivative result to a float."""
    if type(x) is float:
        return x
    return float(np.asarray(x).reshape(-1)[0])


def _sgn(x: float) -> float:
    return 1.0 if x > 0.0 else (-1.0 if x < 0.0 else 0.0)


# ---------------------------------------------------------------------------
# Implicit midpoint engines
# ---------------------------------------------------------------------------


def _midpoint_scalar(rhs, q, p, t, h, tol, max_iter, vq0=None, vp0=None):
    """Fixed-point solve of y = z + h * rhs((z + y)/2, t + h/2) for n = 1.

    Iterates until the update falls below ``tol`` (the update equals the
    equation residual of the previous iterate), then keeps polishing while
    still contracting so the accepted step sits at the arithmetic floor.
    Returns (q_new, p_new, vq, vp); raises ``SolverError`` on
    nonconvergence with the last residual attached.
    """
    if h == 0.0:
        return q, p, 0.0, 0.0
    if vq0 is None:
        vq0, vp0 = rhs(q, p, t)
    yq = q + h * vq0
    yp = p + h * vp0
    tm = t + 0.5 * h
    prev = math.inf
    converged = False
    polish = 0
    vq, vp = vq0, vp0
    for _ in range(max_iter):
        vq, vp = rhs(0.5 * (q + yq), 0.5 * (p + yp), tm)
        nyq = q + h * vq
        nyp = p + h * vp
        d = abs(nyq - yq)
        dp_ = abs(nyp - yp)
        if dp_ > d:
            d = dp_
        yq, yp = nyq, nyp
        if d <= tol:
            converged = True
            if d == 0.0 or d >= prev or polish >= 8:
                return yq, yp, vq, vp
            polish += 1
        prev = d
    if converged:
        return yq, yp, vq, vp
    raise SolverError(
        f"implicit midpoint did not converge at t={t:.6g} (residual {prev:.3e})",
        residual=prev,
        t=t,
    )


def _midpoint_vector(rhs, q, p, t, h, tol, max_iter, vq0=None, vp0=None):
    """Vector version of the implicit-midpoint fixed point; same contract."""
    if h == 0.0:
        z = np.zeros_like(q)
        return q.copy(), p.copy(), z, z.copy()
    if vq0 is None:
        vq0, vp0 = rhs(q, p, t)
    yq = q + h * vq0
    yp = p + h * vp0
    tm = t + 0.5 * h
    prev = math.inf
    converged = False
    polish = 0
    vq, vp = vq0, vp0
    for _ in range(max_iter):
        vq, vp = rhs(0.5 * (q + yq), 0.5 * (p + yp), tm)
        nyq = q + h * vq
        nyp = p + h * vp
        d = max(float(np.max(np.abs(nyq - yq))), float(np.max(np.abs(nyp - yp))))
        yq, yp = nyq, nyp
        if d <= tol:
            converged = True
            if d == 0.0 or d >= prev or polish >= 8:
                return yq, yp, vq, vp
            polish += 1
        prev = d
    if converged:
        return yq, yp, vq, vp
    raise SolverError(
        f"implicit midpoint did not converge at t={t:.6g} (residual {prev:.3e})",
        residual=prev,
        t=t,
    )


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def _rhs_hamiltonian_scalar(H: Hamiltonian):
    dq, dp = H.dq, H.dp

    def rhs(q, p, t):
        return _scalar(dp(q, p, t)), -_scalar(dq(q, p, t))

    return rhs


def _rhs_hamiltonian_vector(H: Hamiltonian):
    dq, dp = H.dq, H.dp

    def rhs(q, p, t):
        return (
            np.broadcast_to(np.asarray(dp(q, p, t), float), q.shape),
            -np.broadcast_to(np.asarray(dq(q, p, t), float), p.shape),
        )

    return rhs


def _rhs_rayleigh_scalar(H: Hamiltonian, a: float):
    dq, dp = H.dq, H.dp

    def rhs(q, p, t):
        hp = _scalar(dp(q, p, t))
        return hp, -_scalar(dq(q, p, t)) - a * hp

    return rhs


def _rhs_rayleigh_vector(H: Hamiltonian, a: float):
    dq, dp = H.dq, H.dp

    def rhs(q, p, t):
        hp = np.broadcast_to(np.asarray(dp(q, p, t), float), q.shape)
        hq = np.broadcast_to(np.asarray(dq(q, p, t), float), p.shape)
        return hp, -hq - a * hp

    return rhs


# ---------------------------------------------------------------------------
# Public single-step operations
# ---------------------------------------------------------------------------


def step_pure_hamiltonian(
    H: Hamiltonian, z: PhasePoint, t: float, dt: float, tol: float = 1e-13, max_iter: int = 100
) -> PhasePoint:
    """One implicit-midpoint step of qdot = dH/dp, pdot = -dH/dq.

    Conserves quadratic Hamiltonians to the solver floor.
    """
    if dt < 0.0:
        raise ValidationError("dt must be nonnegative")
    if z.n == 1:
        rhs = _rhs_hamiltonian_scalar(H)
        q, p, _, _ = _midpoint_scalar(rhs, float(z.q[0]), float(z.p[0]), t, dt, tol, max_iter)
        return PhasePoint(np.array([q]), np.array([p]))
    rhs = _rhs_hamiltonian_vector(H)
    q, p, _, _ = _midpoint_vector(rhs, z.q, z.p, t, dt, tol, max_iter)
    return PhasePoint(q, p)


def step_rayleigh(
    H: Hamiltonian,
    a: float,
    z: PhasePoint,
    t: float,
    dt: float,
    tol: float = 1e-13,
    max_iter: int = 100,
) -> PhasePoint:
    """One implicit-midpoint step of the viscously damped system
    qdot = dH/dp, pdot = -dH/dq - a qdot.  Reduces to the conservative
    step for a = 0.
    """
    if a < 0.0:
        raise ValidationError("damping coefficient a must be >= 0")
    if dt < 0.0:
        raise ValidationError("dt must be nonnegative")
    if z.n == 1:
        rhs = _rhs_rayleigh_scalar(H, float(a))
        q, p, _, _ = _midpoint_scalar(rhs, float(z.q[0]), float(z.p[0]), t, dt, tol, max_iter)
        return PhasePoint(np.array([q]), np.array([p]))
    rhs = _rhs_rayleigh_vector(H, float(a))
    q, p, _, _ = _midpoint_vector(rhs, z.q, z.p, t, dt, tol, max_iter)
    return PhasePoint(q, p)


# -- Coulomb friction -------------------------------------------------------


def _sliding_rhs(H: Hamiltonian, mu: float, s: np.ndarray, moving: np.ndarray):
    """Arc dynamics: the Hamiltonian flow of H + mu <s, q> on the moving
    components; components at rest are frozen."""
    mov = moving.astype(float)
    dq, dp = H.dq, H.dp

    def rhs(q, p, t):
        vq = np.broadcast_to(np.asarray(dp(q, p, t), float), q.shape) * mov
        vp = (-np.broadcast_to(np.asarray(dq(q, p, t), float), p.shape) - mu * s) * mov
        return vq, vp

    return rhs


def _friction_advance(
    H: Hamiltonian,
    mu: float,
    q: np.ndarray,
    p: np.ndarray,
    t: float,
    h_total: float,
    tol: float,
    max_iter: int,
):
    """Advance the Coulomb system by ``h_total``, splitting at events.

    Returns a list of records (h, q_new, p_new).  Momentum components are
    snapped to exactly zero at located events, so the stick test is an
    exact comparison.  Requires sign(qdot_i) = sign(p_i) (kinetic-energy
    momentum dependence).
    """
    records = []
    q = np.array(q, dtype=float)
    p = np.array(p, dtype=float)
    t_cur = t
    remaining = h_total
    floor = 1e-15 * h_total
    guard = 0
    while remaining > floor:
        guard += 1
        if guard > 64 * q.size + 16:
            raise SolverError("too many stick-slip events within one step", t=t_cur)
        stationary = p == 0.0
        force = -np.broadcast_to(np.asarray(H.dq(q, p, t_cur), float), q.shape)
        s = np.where(
            stationary,
            np.where(np.abs(force) > mu, np.sign(force), 0.0),
            np.sign(p),
        )
        moving = s != 0.0
        if not moving.any():
            # fully stuck: the restoring force stays inside the friction
            # bound, the state is constant for the rest of the interval
            records.append((remaining, q.copy(), p.copy()))
            remaining = 0.0
            break
        rhs = _sliding_rhs(H, mu, s, moving)
        nq, np_, _, _ = _midpoint_vector(rhs, q, p, t_cur, remaining, tol, max_iter)
        crossed = moving & (np_ * s < 0.0)
        if not crossed.any():
            records.append((remaining, nq, np_))
            t_cur += remaining
            remaining = 0.0
            break
        # earliest zero crossing of a sliding component: bisect the substep
        lo, hi = 0.0, remaining
        lo_state = (q.copy(), p.copy())
        while hi - lo > _EVENT_TIME_TOL:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            mq, mp, _, _ = _midpoint_vector(rhs, q, p, t_cur, mid, tol, max_iter)
            if (moving & (mp * s < 0.0)).any():
                hi = mid
            else:
                lo = mid
                lo_state = (mq, mp)
        if lo <= floor:
            # crossing at the very start: snap the tiny momentum in place
            snap = moving & (np.abs(p) <= 1e-9)
            if not snap.any():
                snap = moving & (np.abs(p) == np.min(np.abs(p[moving])))
            p = p.copy()
            p[snap] = 0.0
            continue
        nq, np_ = lo_state
        np_ = np_.copy()
        snap = moving & (np.abs(np_) <= 1e-9)
        if not snap.any():
            snap = moving & (np.abs(np_) == np.min(np.abs(np_[moving])))
        np_[snap] = 0.0
        records.append((lo, nq, np_))
        q, p = nq, np_
        t_cur += lo
        remaining -= lo
    return records


def step_friction(
    H: Hamiltonian,
    mu: float,
    z: PhasePoint,
    t: float,
    dt: float,
    tol: float = 1e-13,
    max_iter: int = 100,
) -> PhasePoint:
    """One stick-slip step of Coulomb friction with potential mu |qdot|_1.

    Sliding components follow the tilted Hamiltonian flow with constant
    friction force -mu sign(qdot); zero crossings of the velocity are
    located by bisection (to 1e-12 in time) and the step is split there;
    components stick while the restoring force stays within the friction
    bound.  n > 1 is handled componentwise (the |.|_1 lift).
    """
    if mu < 0.0:
        raise ValidationError("friction coefficient mu must be >= 0")
    if dt < 0.0:
        raise ValidationError("dt must be nonnegative")
    if dt == 0.0:
        return z
    records = _friction_advance(H, float(mu), z.q, z.p, t, dt, tol, max_iter)
    _, q, p = records[-1]
    return PhasePoint(q, p)


# -- Generic per-step residual minimization ---------------------------------


@dataclass(frozen=True)
class GenericSolverOptions:
    tol: float = 1e-13
    residual_tol: float = 1e-9
    max_iter: int = 100
    descent_iters: int = 400
    fd_step: float = 1e-7
    outer_iters: int = 40


def _qlift_selection_scalar(prof, vq):
    if prof.mu is None:
        return -_scalar(prof.dphi(vq))
    return -prof.mu * _sgn(vq)


def _step_generic_qlift(model, H, z, t, dt, opts):
    """Structured solve for position-lifted separable models.

    The gap condition pins v_q = dH/dp(zhat) and selects
    eta_p in -dphi(v_q) (its sign-scaled boundary in the 1-homogeneous
    case); only the midpoint coupling remains, solved by fixed point.
    """
    prof = model.potential.q_profile
    dq, dp = H.dq, H.dp
    if z.n == 1:
        s_ref = _sgn(_scalar(dp(z.q, z.p, t)))

        def rhs(q, p, tt):
            hp = _scalar(dp(q, p, tt))
            if prof.mu is None:
                eta_p = -_scalar(prof.dphi(hp))
            else:
                # keep the sliding sign fixed within the step to avoid
                # chatter of the selection during the fixed point
                s = _sgn(hp) if s_ref == 0.0 else s_ref
                eta_p = -prof.mu * s
            return hp, -_scalar(dq(q, p, tt)) + eta_p

        q, p, _, _ = _midpoint_scalar(
            rhs, float(z.q[0]), float(z.p[0]), t, dt, opts.tol, opts.max_iter
        )
        return PhasePoint(np.array([q]), np.array([p]))

    s_ref = np.sign(np.broadcast_to(np.asarray(dp(z.q, z.p, t), float), z.q.shape))

    def rhs(q, p, tt):
        hp = np.broadcast_to(np.asarray(dp(q, p, tt), float), q.shape)
        if prof.mu is None:
            eta_p = -np.asarray(prof.dphi(hp), float)
        else:
            s = np.where(s_ref != 0.0, s_ref, np.sign(hp))
            eta_p = -prof.mu * s
        return hp, -np.broadcast_to(np.asarray(dq(q, p, tt), float), p.shape) + eta_p

    q, p, _, _ = _midpoint_vector(rhs, z.q, z.p, t, dt, opts.tol, opts.max_iter)
    return PhasePoint(q, p)


def _fd_gradient(fun, wq, wp, r0, step):
    """Central-difference gradient, one-sided at infinite probes."""
    n = wq.size
    g = np.zeros(2 * n)
    for i in range(2 * n):
        eq = np.zeros(n)
        ep = np.zeros(n)
        if i < n:
            eq[i] = step
        else:
            ep[i - n] = step
        up = fun(wq + eq, wp + ep)
        dn = fun(wq - eq, wp - ep)
        if math.isfinite(up) and math.isfinite(dn):
            g[i] = (up - dn) / (2.0 * step)
        elif math.isfinite(dn):
            g[i] = (r0 - dn) / step
        elif math.isfinite(up):
            g[i] = (up - r0) / step
        else:
            g[i] = 0.0
    return g[:n], g[n:]


def _descend_residual(fun, project, wq, wp, opts):
    """Projected finite-difference subgradient descent on the step residual."""
    wq = np.asarray(wq, float).copy()
    wp = np.asarray(wp, float).copy()
    if project is not None:
        wq, wp = project(wq, wp)
    r = fun(wq, wp)
    if not math.isfinite(r):
        return wq, wp, r
    step = 1.0
    for _ in range(opts.descent_iters):
        if r <= 1e-15:
            break
        gq, gp = _fd_gradient(fun, wq, wp, r, opts.fd_step)
        gnorm2 = float(np.sum(gq * gq) + np.sum(gp * gp))
        if gnorm2 <= 1e-30:
            break
        improved = False
        while step > 1e-16:
            cq = wq - step * gq
            cp = wp - step * gp
            if project is not None:
                cq, cp = project(cq, cp)
            rc = fun(cq, cp)
            if math.isfinite(rc) and rc < r - 1e-18:
                wq, wp, r = cq, cp, rc
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return wq, wp, r


def _step_generic_numeric(model, H, z, t, dt, opts):
    """Fallback solve: minimize the information content of the step.

    Alternates a frozen-midpoint inner minimization with the midpoint
    coupling; feasibility is restored by the model's gap-vector
    projection when it exposes one.  Accuracy is limited by the
    finite-difference subgradients; structured models use the
    closed-form path instead.
    """
    that = t + 0.5 * dt
    xh0 = symplectic_gradient(H, z, t)
    vq = xh0.q.copy()
    vp = xh0.p.copy()
    r = math.inf
    for _ in range(opts.outer_iters):
        zhat_q = z.q + (0.5 * dt) * vq
        zhat_p = z.p + (0.5 * dt) * vp
        xq = np.broadcast_to(np.asarray(H.dp(zhat_q, zhat_p, that), float), z.q.shape)
        xp = -np.broadcast_to(np.asarray(H.dq(zhat_q, zhat_p, that), float), z.p.shape)

        def residual(wq, wp):
            return float(
                model.info_arrays(z.q, z.p, wq, wp, wq - xq, wp - xp)
            )

        project = None
        if model.has_eta_projection:

            def project(wq, wp):
                eq, ep = model.project_eta_arrays(wq - xq, wp - xp)
                return xq + eq, xp + ep

        nvq, nvp, r = _descend_residual(residual, project, vq, vp, opts)
        # tie-break among zero-residual velocities: walk toward XH (the
        # least-dissipative selection) as far as the residual allows
        if math.isfinite(r) and r <= opts.residual_tol:
            theta = 1.0
            while theta > 1e-3:
                cq = (1.0 - theta) * nvq + theta * xq
                cp = (1.0 - theta) * nvp + theta * xp
                rc = residual(cq, cp)
                if math.isfinite(rc) and rc <= max(r, opts.residual_tol):
                    nvq, nvp, r = cq, cp, rc
                    break
                theta *= 0.5
        delta = max(float(np.max(np.abs(nvq - vq))), float(np.max(np.abs(nvp - vp))))
        vq, vp = nvq, nvp
        if not math.isfinite(r):
            break
        if delta <= max(opts.tol / max(dt, 1e-300), 1e-14) and r <= opts.residual_tol:
            break
    if not math.isfinite(r):
        raise InfeasibleStepError(
            f"no finite-information velocity found at t={t:.6g}", residual=r, t=t
        )
    if r > opts.residual_tol:
        raise SolverError(
            f"step residual stagnated at {r:.3e} > {opts.residual_tol:.1e} at t={t:.6g}",
            residual=r,
            t=t,
        )
    return PhasePoint(z.q + dt * vq, z.p + dt * vp)


def step_generic(
    model: DissipationModel,
    H: Hamiltonian,
    z: PhasePoint,
    t: float,
    dt: float,
    opts: GenericSolverOptions = GenericSolverOptions(),
) -> PhasePoint:
    """One step of the implicit evolution: accept v with vanishing
    b_omega(z, v, v - XH) - omega(v, v - XH), the step information content.

    Exploits flagged structure (position-lifted separable potentials);
    otherwise runs a projected subgradient descent with finite-difference
    subgradients, initialized at XH so that zero-residual ties resolve to
    the least-dissipative velocity.
    """
    if not model.tempered:
        raise UntemperedModelError(f"model {model.name} is not tempered")
    if dt == 0.0:
        return z
    if (
        model.separable
        and model.potential is not None
        and model.potential.q_profile is not None
        and model.duality.tag == "symplectic"
    ):
        return _step_generic_qlift(model, H, z, t, dt, opts)
    return _step_generic_numeric(model, H, z, t, dt, opts)


# ---------------------------------------------------------------------------
# Residual and trajectory-level checks
# ---------------------------------------------------------------------------


def gap_residual(
    model: DissipationModel, H: Hamiltonian, z: PhasePoint, t: float, eta: PhasePoint
) -> float:
    """b_omega(z, eta + XH(z,t), eta) - omega(eta + XH(z,t), eta).

    The subtraction is carried out in the log domain, where it equals the
    information content exactly; the result is >= -1e-12 up to roundoff
    and +inf for infeasible gap vectors.  Zero exactly on the gap set.
    """
    xh = symplectic_gradient(H, z, t)
    z1 = eta + xh
    return model.info(z, z1, eta)


def pure_dissipative_check(H: Hamiltonian, traj: "Trajectory", tol: float = 1e-10):
    """Checker for the maximal-likelihood model: a curve solves the
    evolution problem for pi_max iff omega(v, v - XH) >= 0 along it,
    i.e. the energy never grows beyond its explicit time dependence.

    Returns (ok, worst) with worst = min_k omega(v_k, eta_k).  This is a
    checker rather than an integrator: the pi_max solution set is a
    differential inequality and has no canonical selection.
    """
    w = omega_arrays(traj.v_q, traj.v_p, traj.eta_q, traj.eta_p)
    worst = float(np.min(w)) if w.size else 0.0
    return worst >= -tol, worst


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


class Trajectory:
    """Time-stamped states with per-step scheme data.

    Nodes: ``times`` (M+1,), ``q``/``p`` (M+1, n).  Steps (length M):
    difference-quotient velocities ``v_q``/``v_p``, gap vectors
    ``eta_q``/``eta_p`` = v - XH(zhat, that) at the midpoint evaluation
    points ``zhat_q``/``zhat_p``/``t_hat``, the step residuals (the
    information content of the step) and symplectic bipotential values.
    Arrays are read-only after construction.
    """

    def __init__(
        self,
        times: np.ndarray,
        q: np.ndarray,
        p: np.ndarray,
        H: Hamiltonian,
        model: Optional[DissipationModel] = None,
        scheme: str = "midpoint",
        scenario_name: str = "",
    ):
        times = np.asarray(times, dtype=float)
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValidationError("a trajectory needs at least two time stamps")
        if q.shape != p.shape or q.shape[0] != times.size:
            raise DimensionMismatch("times, q, p shapes are inconsistent")
        h = np.diff(times)
        if np.any(h <= 0.0):
            raise ValidationError("time stamps must be strictly increasing")

        self.times = times
        self.q = q
        self.p = p
        self.dt_steps = h
        self.v_q = np.diff(q, axis=0) / h[:, None]
        self.v_p = np.diff(p, axis=0) / h[:, None]
        self.zhat_q = 0.5 * (q[:-1] + q[1:])
        self.zhat_p = 0.5 * (p[:-1] + p[1:])
        self.t_hat = times[:-1] + 0.5 * h
        xh_q = np.broadcast_to(
            np.asarray(H.dp(self.zhat_q, self.zhat_p, self.t_hat), float), self.zhat_q.shape
        )
        xh_p = -np.broadcast_to(
            np.asarray(H.dq(self.zhat_q, self.zhat_p, self.t_hat), float), self.zhat_p.shape
        )
        self.xh_q = xh_q
        self.xh_p = xh_p
        self.eta_q = self.v_q - xh_q
        self.eta_p = self.v_p - xh_p
        if model is not None:
            self.residual = model.info_arrays(
                self.zhat_q, self.zhat_p, self.v_q, self.v_p, self.eta_q, self.eta_p
            )
            self.bipot = self.residual + omega_arrays(
                self.v_q, self.v_p, self.eta_q, self.eta_p
            )
        else:
            self.residual = None
            self.bipot = None
        self.scheme = scheme
        self.scenario_name = scenario_name
        for arr in (
            self.times,
            self.q,
            self.p,
            self.dt_steps,
            self.v_q,
            self.v_p,
            self.zhat_q,
            self.zhat_p,
            self.t_hat,
            self.eta_q,
            self.eta_p,
        ):
            arr.setflags(write=False)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def state(self, k: int) -> PhasePoint:
        return PhasePoint(self.q[k], self.p[k])

    @property
    def final_state(self) -> PhasePoint:
        return self.state(self.times.size - 1)

    def energies(self, H: Hamiltonian) -> np.ndarray:
        return np.broadcast_to(
            np.asarray(H.value(self.q, self.p, self.times), float), (self.times.size,)
        )


def trajectory_from_samples(
    H: Hamiltonian,
    times,
    q,
    p,
    model: Optional[DissipationModel] = None,
    scenario_name: str = "samples",
) -> Trajectory:
    """Build a trajectory from raw sampled states (rival curves,
    hand-built counterexamples); step data is derived with the same
    midpoint evaluation convention as the integrator."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if p.ndim == 1:
        p = p[:, None]
    return Trajectory(times, q, p, H, model=model, scheme="samples", scenario_name=scenario_name)


# ---------------------------------------------------------------------------
# Scenarios and the integrator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A fully specified run: Hamiltonian, tempered model, window, solver."""

    name: str
    hamiltonian: Hamiltonian
    model: DissipationModel
    z0: PhasePoint
    t0: float = 0.0
    t_end: float = 10.0
    dt: float = 1e-3
    stepper: str = "pure_hamiltonian"
    params: dict = field(default_factory=dict)
    solver_tol: float = 1e-13
    residual_tol: float = 1e-8
    max_iter: int = 100
    seed: int = 0
    temper_samples: int = 2000


_SCENARIOS = {
    "pure_hamiltonian": "Conservative flow of the oscillator Hamiltonian; zero gap vector.",
    "rayleigh": "Viscous damping from the quadratic velocity potential (a/2)|qdot|^2.",
    "friction": "Coulomb dry friction mu |qdot|_1 with stick-slip event splitting.",
    "pure_dissipative_check": "Maximal-likelihood diagnostics over a generator run.",
    "generic": "Per-step information-content minimization for a named model.",
}


def scenario_names() -> list:
    return list(_SCENARIOS.keys())


def scenario_description(name: str) -> str:
    return _SCENARIOS[name]


def make_scenario(
    name: str,
    *,
    q0=(1.0,),
    p0=(0.0,),
    t0: float = 0.0,
    t_end: float = 10.0,
    dt: float = 1e-3,
    a: float = 0.5,
    mu: float = 0.3,
    stiffness: float = 1.0,
    mass: float = 1.0,
    model: Optional[str] = None,
    generator: str = "rayleigh",
    solver_tol: float = 1e-13,
    residual_tol: float = 1e-8,
    max_iter: int = 100,
    seed: int = 0,
) -> Scenario:
    """Build a registry scenario with validated parameters."""
    if name not in _SCENARIOS:
        raise ValidationError(
            f"unknown scenario {name!r}; valid: {', '.join(_SCENARIOS)}"
        )
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    if t_end <= t0:
        raise ValidationError("T must exceed t0")
    if a < 0.0:
        raise ValidationError("a must be >= 0")
    if mu < 0.0:
        raise ValidationError("mu must be >= 0")
    z0 = PhasePoint(np.asarray(q0, dtype=float), np.asarray(p0, dtype=float))
    H = harmonic_oscillator(stiffness=stiffness, mass=mass)
    params = {"a": a, "mu": mu, "stiffness": stiffness, "mass": mass}
    common = dict(
        z0=z0,
        t0=t0,
        t_end=t_end,
        dt=dt,
        solver_tol=solver_tol,
        residual_tol=residual_tol,
        max_iter=max_iter,
        seed=seed,
    )

    if name == "pure_hamiltonian":
        return Scenario(
            name=name,
            hamiltonian=H,
            model=pure_hamiltonian_model(),
            stepper="pure_hamiltonian",
            params=params,
            **common,
        )
    if name == "rayleigh":
        m = rayleigh_model(a) if a > 0.0 else pure_hamiltonian_model()
        return Scenario(
            name=name, hamiltonian=H, model=m, stepper="rayleigh", params=params, **common
        )
    if name == "friction":
        return Scenario(
            name=name,
            hamiltonian=H,
            model=friction_model(mu),
            stepper="friction",
            params=params,
            **common,
        )
    if name == "pure_dissipative_check":
        if generator not in ("rayleigh", "friction", "pure_hamiltonian"):
            raise ValidationError(f"unknown generator {generator!r}")
        gen = make_scenario(
            generator,
            q0=q0,
            p0=p0,
            t0=t0,
            t_end=t_end,
            dt=dt,
            a=a,
            mu=mu,
            stiffness=stiffness,
            mass=mass,
            solver_tol=solver_tol,
            residual_tol=residual_tol,
            max_iter=max_iter,
            seed=seed,
        )
        params = dict(params, generator=generator)
        return Scenario(
            name=name,
            hamiltonian=H,
            model=max_likelihood_model(),
            stepper=gen.stepper,
            params=params,
            **common,
        )
    # generic: a named built-in model driven by the residual-minimizing solver
    model_name = model or "rayleigh"
    builders = {
        "rayleigh": lambda: rayleigh_model(a) if a > 0.0 else pure_hamiltonian_model(),
        "friction": lambda: friction_model(mu),
        "pure_hamiltonian": pure_hamiltonian_model,
        "max_likelihood": max_likelihood_model,
        # constructible but refused by the integrator's temperedness gate
        "always_likely": always_likely_model,
    }
    if model_name not in builders:
        raise ValidationError(
            f"unknown model {model_name!r}; valid: {', '.join(builders)}"
        )
    params = dict(params, model=model_name)
    return Scenario(
        name=name,
        hamiltonian=H,
        model=builders[model_name](),
        stepper="generic",
        params=params,
        **common,
    )


def _macro_times(t0: float, t_end: float, dt: float):
    n_steps = max(1, int(round((t_end - t0) / dt)))
    starts = [t0 + k * dt for k in range(n_steps)]
    # guard against a rounding overshoot of the final start
    while len(starts) > 1 and starts[-1] >= t_end:
        starts.pop()
    return starts


def integrate(scenario: Scenario) -> Trajectory:
    """Run a scenario from t0 to T and return the recorded trajectory.

    Refuses models that fail the temperedness check (the evolution
    problem requires a tempered likelihood).  Raises ``SolverError`` with
    the failing time stamp if any step residual exceeds the scenario's
    residual tolerance.
    """
    H = scenario.hamiltonian
    model = scenario.model
    z0 = scenario.z0
    if scenario.dt <= 0.0:
        raise ValidationError("dt must be positive")
    if scenario.t_end <= scenario.t0:
        raise ValidationError("T must exceed t0")
    report = temperedness_check(
        model,
        samples=scenario.temper_samples,
        radius=3.0,
        seed=scenario.seed,
        n=z0.n,
    )
    if not report.ok:
        raise UntemperedModelError(
            f"model {model.name} failed temperedness check "
            f"(min slack {report.min_slack:.3e})",
            witness=report.witness,
        )

    starts = _macro_times(scenario.t0, scenario.t_end, scenario.dt)
    tol = scenario.solver_tol
    max_iter = scenario.max_iter
    times = [scenario.t0]
    n = z0.n

    if scenario.stepper == "friction":
        mu = float(scenario.params.get("mu", 0.0))
        q = z0.q.copy()
        p = z0.p.copy()
        qs = [q.copy()]
        ps = [p.copy()]
        for k, t_k in enumerate(starts):
            t_next = scenario.t_end if k == len(starts) - 1 else starts[k + 1]
            h = t_next - t_k
            records = _friction_advance(H, mu, q, p, t_k, h, tol, max_iter)
            running = t_k
            for j, (h_sub, q_new, p_new) in enumerate(records):
                running = t_next if j == len(records) - 1 else running + h_sub
                times.append(running)
                qs.append(q_new)
                ps.append(p_new)
                q, p = q_new, p_new
        q_nodes = np.vstack(qs)
        p_nodes = np.vstack(ps)
    elif scenario.stepper in ("pure_hamiltonian", "rayleigh") and n == 1:
        if scenario.stepper == "pure_hamiltonian":
            rhs = _rhs_hamiltonian_scalar(H)
        else:
            rhs = _rhs_rayleigh_scalar(H, float(scenario.params.get("a", 0.0)))
        q = float(z0.q[0])
        p = float(z0.p[0])
        vq, vp = rhs(q, p, scenario.t0)
        qs = [q]
        ps = [p]
        for k, t_k in enumerate(starts):
            t_next = scenario.t_end if k == len(starts) - 1 else starts[k + 1]
            h = t_next - t_k
            q, p, vq, vp = _midpoint_scalar(rhs, q, p, t_k, h, tol, max_iter, vq, vp)
            times.append(t_next)
            qs.append(q)
            ps.append(p)
        q_nodes = np.asarray(qs)[:, None]
        p_nodes = np.asarray(ps)[:, None]
    elif scenario.stepper in ("pure_hamiltonian", "rayleigh"):
        if scenario.stepper == "pure_hamiltonian":
            rhs = _rhs_hamiltonian_vector(H)
        else:
            rhs = _rhs_rayleigh_vector(H, float(scenario.params.get("a", 0.0)))
        q = z0.q.copy()
        p = z0.p.copy()
        vq, vp = rhs(q, p, scenario.t0)
        qs = [q.copy()]
        ps = [p.copy()]
        for k, t_k in enumerate(starts):
            t_next = scenario.t_end if k == len(starts) - 1 else starts[k + 1]
            h = t_next - t_k
            q, p, vq, vp = _midpoint_vector(rhs, q, p, t_k, h, tol, max_iter, vq, vp)
            times.append(t_next)
            qs.append(q)
            ps.append(p)
        q_nodes = np.vstack(qs)
        p_nodes = np.vstack(ps)
    elif scenario.stepper == "generic":
        opts = GenericSolverOptions(
            tol=tol,
            residual_tol=scenario.residual_tol,
            max_iter=max_iter,
        )
        z = z0
        qs = [z.q.copy()]
        ps = [z.p.copy()]
        for k, t_k in enumerate(starts):
            t_next = scenario.t_end if k == len(starts) - 1 else starts[k + 1]
            z = step_generic(model, H, z, t_k, t_next - t_k, opts)
            times.append(t_next)
            qs.append(z.q.copy())
            ps.append(z.p.copy())
        q_nodes = np.vstack(qs)
        p_nodes = np.vstack(ps)
    else:
        raise ValidationError(f"unknown stepper {scenario.stepper!r}")

    traj = Trajectory(
        np.asarray(times),
        q_nodes,
        p_nodes,
        H,
        model=model,
        scheme=scenario.stepper,
        scenario_name=scenario.name,
    )
    worst = float(np.max(traj.residual))
    if not math.isfinite(worst) or worst > scenario.residual_tol:
        k = int(np.argmax(traj.residual))
        raise SolverError(
            f"step residual {worst:.3e} exceeds tolerance "
            f"{scenario.residual_tol:.1e} at t={traj.t_hat[k]:.6g}",
            residual=worst,
            t=float(traj.t_hat[k]),
        )
    return traj
