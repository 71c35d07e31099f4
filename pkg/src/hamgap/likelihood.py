"""Likelihoods, information content and bipotentials.

A likelihood is a [0, 1]-valued function pi(z, z1, z2) whose negative
logarithm, the information content I = -ln(pi), is convex and lsc in
each of the last two slots, with slot-suprema equal to 0 or 1.  For any
duality d the shifted function

    b_d(z, z1, z2) = I(z, z1, z2) + d(z1, z2)

is a bipotential in (z1, z2), and conversely.  Models here store I
(log-domain) to avoid underflow; pi is a derived view.

A likelihood is *tempered* when pi <= pi_max = exp(min{0, omega}),
equivalently when its symplectic bipotential b_omega = I + omega is
nonnegative, equivalently b_omega >= max{0, omega}.

All checks sample within a bounded radius with an explicit seed; they
are necessary, not sufficient (the axioms quantify over an unbounded
domain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .convex import ConvexPotential, GridSpec, DEFAULT_MEMBERSHIP_ATOL
from .errors import ValidationError
from .phase_space import OMEGA, Duality, PhasePoint

__all__ = [
    "DissipationModel",
    "max_likelihood",
    "minimal_symplectic_bipotential",
    "separable_bipotential",
    "model_from_bipotential",
    "pure_hamiltonian_model",
    "rayleigh_model",
    "friction_model",
    "max_likelihood_model",
    "always_likely_model",
    "temperedness_check",
    "likelihood_axioms_check",
    "dominates",
    "TemperednessReport",
    "AxiomsReport",
    "DominanceReport",
]


def max_likelihood(z1: PhasePoint, z2: PhasePoint) -> float:
    """pi_max(z1, z2) = exp(min{0, omega(z1, z2)}), a value in (0, 1]."""
    w = OMEGA(z1, z2)
    return math.exp(min(0.0, w))


def minimal_symplectic_bipotential(z1: PhasePoint, z2: PhasePoint) -> float:
    """b_min(z1, z2) = max{0, omega(z1, z2)}, the symplectic bipotential of pi_max."""
    return max(0.0, OMEGA(z1, z2))


class DissipationModel:
    """A likelihood / information-content / bipotential triple.

    ``info_fn`` evaluates I on raw arrays (zq, zp, q1, p1, q2, p2) and
    broadcasts over leading axes; values are >= 0 and may be +inf.  For
    separable models the underlying potential and its polar strategy are
    kept so integrators can exploit the structure.
    """

    def __init__(
        self,
        name: str,
        info_fn: Callable,
        *,
        tempered: bool,
        separable: bool = False,
        state_dependent: bool = False,
        potential: Optional[ConvexPotential] = None,
        duality: Duality = OMEGA,
        eta_projection: Optional[Callable] = None,
        slot1_argmin: Optional[Callable] = None,
        slot2_argmin: Optional[Callable] = None,
    ):
        self.name = name
        self._info_fn = info_fn
        self.tempered = tempered
        self.separable = separable
        self.state_dependent = state_dependent
        self.potential = potential
        self.duality = duality
        # eta_projection maps raw (q2, p2) onto the closure of the feasible
        # gap-vector domain {z2 : I(z, z1, z2) < inf}; None when unknown.
        self._eta_projection = eta_projection
        self._slot1_argmin = slot1_argmin
        self._slot2_argmin = slot2_argmin

    def __repr__(self):
        return f"DissipationModel({self.name!r}, tempered={self.tempered})"

    # -- information content and derived views ------------------------------

    def info(self, z: PhasePoint, z1: PhasePoint, z2: PhasePoint) -> float:
        return float(self._info_fn(z.q, z.p, z1.q, z1.p, z2.q, z2.p))

    def info_arrays(self, zq, zp, q1, p1, q2, p2) -> np.ndarray:
        return self._info_fn(zq, zp, q1, p1, q2, p2)

    def likelihood(self, z: PhasePoint, z1: PhasePoint, z2: PhasePoint) -> float:
        return float(np.exp(-self.info(z, z1, z2)))

    def bipotential_omega(self, z: PhasePoint, z1: PhasePoint, z2: PhasePoint) -> float:
        return self.info(z, z1, z2) + OMEGA(z1, z2)

    def bipotential(self, d: Duality) -> Callable:
        """b_d = I + d as a scalar callable; b_d - d == I by construction,
        for every duality (duality transport)."""

        def b(z: PhasePoint, z1: PhasePoint, z2: PhasePoint) -> float:
            return self.info(z, z1, z2) + d(z1, z2)

        return b

    # -- structure hooks for solvers and samplers ---------------------------

    @property
    def has_eta_projection(self) -> bool:
        return self._eta_projection is not None

    def project_eta_arrays(self, q2, p2):
        if self._eta_projection is None:
            return q2, p2
        return self._eta_projection(q2, p2)

    def project_eta(self, z2: PhasePoint) -> PhasePoint:
        q, p = self.project_eta_arrays(z2.q, z2.p)
        return PhasePoint(np.broadcast_to(q, z2.q.shape), np.broadcast_to(p, z2.p.shape))

    def slot1_argmin(self, z: PhasePoint, z2: PhasePoint) -> Optional[PhasePoint]:
        """A point z1 maximizing pi(z, ., z2), when the structure gives one."""
        if self._slot1_argmin is None:
            return None
        return self._slot1_argmin(z, z2)

    def slot2_argmin(self, z: PhasePoint, z1: PhasePoint) -> Optional[PhasePoint]:
        """A point z2 maximizing pi(z, z1, .), when the structure gives one."""
        if self._slot2_argmin is None:
            return None
        return self._slot2_argmin(z, z1)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


class _GridPolarStrategy:
    """Batched right-polar evaluation over a fixed grid (no growth probing)."""

    def __init__(self, f: ConvexPotential, d: Duality, grid: GridSpec):
        pts = grid.points()
        n = grid.n
        self._qs = pts[:, :n]
        self._ps = pts[:, n:]
        self._fv = f.value_arrays(self._qs, self._ps)
        self._d = d
        self.n = n

    def __call__(self, q, p) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        shape = np.broadcast_shapes(q.shape[:-1], p.shape[:-1])
        qb = np.broadcast_to(q, shape + q.shape[-1:]).reshape(-1, self.n)
        pb = np.broadcast_to(p, shape + p.shape[-1:]).reshape(-1, self.n)
        n_pts = self._qs.shape[0]
        block = max(1, int(2e7) // max(1, n_pts))
        out = np.empty(qb.shape[0])
        for start in range(0, qb.shape[0], block):
            sl = slice(start, start + block)
            vals = self._d.eval_arrays(
                self._qs[:, None, :],
                self._ps[:, None, :],
                qb[None, sl, :],
                pb[None, sl, :],
            ) - self._fv[:, None]
            out[sl] = np.max(vals, axis=0)
        return out.reshape(shape)


def separable_bipotential(
    f: ConvexPotential,
    d: Duality = OMEGA,
    *,
    grid: Optional[GridSpec] = None,
    name: Optional[str] = None,
    tempered: Optional[bool] = None,
) -> DissipationModel:
    """The model of the separable bipotential b(z1, z2) = f(z1) + polar_R(f, d)(z2).

    Its information content I = f(z1) + polar_R(f, d)(z2) - d(z1, z2) is
    state-independent in the first argument.  The polar strategy is the
    closed form when ``f`` carries one and d is the symplectic form,
    otherwise the supplied grid oracle.
    """
    if d.tag == "symplectic" and f.has_closed_polar:
        polar = f.polar_omega_arrays
    elif grid is not None:
        polar = _GridPolarStrategy(f, d, grid)
    else:
        raise ValidationError(
            f"{f.name}: no closed-form polar for duality {d.tag}; provide a grid"
        )

    def info_fn(zq, zp, q1, p1, q2, p2):
        return f.value_arrays(q1, p1) + polar(q2, p2) - d.eval_arrays(q1, p1, q2, p2)

    eta_projection = None
    slot1 = None
    slot2 = None
    prof = f.q_profile
    if prof is not None:
        mu = prof.mu
        if mu is None:
            # smooth position lift: feasible gap vectors have zero q-part
            eta_projection = lambda q2, p2: (np.zeros_like(q2), p2)
        else:
            eta_projection = lambda q2, p2: (np.zeros_like(q2), np.clip(p2, -mu, mu))
        if prof.dphi is not None and mu is None:
            # quadratic profile: dphi is linear, eta_p = -dphi(q1) inverts exactly
            slope = float(prof.dphi(np.ones(1))[0])
            slot2 = lambda z, z1: PhasePoint(np.zeros_like(z1.q), -prof.dphi(z1.q))
            slot1 = lambda z, z2: PhasePoint(-z2.p / slope, np.zeros_like(z2.q))
        elif mu is not None:
            slot2 = lambda z, z1: PhasePoint(np.zeros_like(z1.q), -mu * np.sign(z1.q))
            slot1 = lambda z, z2: PhasePoint(
                np.where(np.abs(z2.p) >= mu - DEFAULT_MEMBERSHIP_ATOL, -np.sign(z2.p), 0.0),
                np.zeros_like(z2.p),
            )

    if tempered is None:
        tempered = True  # all built-in separable potentials give tempered models

    return DissipationModel(
        name=name or f"separable({f.name}, {d.name or d.tag})",
        info_fn=info_fn,
        tempered=tempered,
        separable=True,
        potential=f,
        duality=d,
        eta_projection=eta_projection,
        slot1_argmin=slot1,
        slot2_argmin=slot2,
    )


def pure_hamiltonian_model() -> DissipationModel:
    """I(z, z1, z2) = chi_0(z2): the gap vector is forced to zero, so the
    dynamics reduces to the plain Hamiltonian flow.  Realized as the
    separable model of the zero potential."""
    from .convex import zero_potential

    m = separable_bipotential(zero_potential(), OMEGA, name="pure_hamiltonian")
    return m


def rayleigh_model(a: float) -> DissipationModel:
    """Smooth (viscous) dissipation with potential (a/2) |qdot|^2."""
    from .convex import quadratic_position

    return separable_bipotential(quadratic_position(a), OMEGA, name=f"rayleigh(a={float(a):g})")


def friction_model(mu: float) -> DissipationModel:
    """Rate-independent dry friction with potential mu |qdot|_1."""
    from .convex import position_norm

    return separable_bipotential(position_norm(mu), OMEGA, name=f"friction(mu={float(mu):g})")


def max_likelihood_model() -> DissipationModel:
    """The model of pi_max itself: I = max{0, -omega(z1, z2)}.

    Its symplectic bipotential is b_min = max{0, omega}; every gap vector
    with omega(z1, z2) >= 0 is maximally likely.
    """
    from .phase_space import omega_arrays

    def info_fn(zq, zp, q1, p1, q2, p2):
        return np.maximum(0.0, -omega_arrays(q1, p1, q2, p2))

    return DissipationModel(
        name="max_likelihood",
        info_fn=info_fn,
        tempered=True,
        eta_projection=lambda q2, p2: (q2, p2),
        slot1_argmin=lambda z, z2: PhasePoint(np.zeros_like(z2.q), np.zeros_like(z2.p)),
        slot2_argmin=lambda z, z1: PhasePoint(np.zeros_like(z1.q), np.zeros_like(z1.p)),
    )


def always_likely_model() -> DissipationModel:
    """I identically zero (pi identically one).  A valid likelihood, but not
    tempered: its symplectic bipotential equals omega, which takes negative
    values."""

    def info_fn(zq, zp, q1, p1, q2, p2):
        return np.zeros(np.broadcast_shapes(np.shape(q1)[:-1], np.shape(q2)[:-1]))

    return DissipationModel(
        name="always_likely",
        info_fn=info_fn,
        tempered=False,
        eta_projection=lambda q2, p2: (q2, p2),
        slot1_argmin=lambda z, z2: z2,
        slot2_argmin=lambda z, z1: z1,
    )


def model_from_bipotential(
    b: Callable,
    d: Duality,
    *,
    samples: int = 1000,
    radius: float = 3.0,
    seed: int = 0,
    name: str = "custom",
    tempered: Optional[bool] = None,
    batched: bool = False,
) -> DissipationModel:
    """Wrap a bipotential map b(z1, z2) as a model with I = b - d.

    Validates b >= d on seeded samples and raises ``ValidationError`` with
    a witness pair on violation.  ``batched=True`` declares that ``b``
    accepts raw (..., n) arrays (q1, p1, q2, p2); otherwise it is called
    pointwise on PhasePoints.
    """
    rng = np.random.default_rng(seed)

    if batched:
        b_arrays = b
    else:

        def b_arrays(q1, p1, q2, p2):
            q1, p1, q2, p2 = (np.asarray(x, dtype=float) for x in (q1, p1, q2, p2))
            shape = np.broadcast_shapes(q1.shape[:-1], q2.shape[:-1])
            nq = q1.shape[-1]
            out = np.empty(shape)
            q1b = np.broadcast_to(q1, shape + (nq,))
            p1b = np.broadcast_to(p1, shape + (nq,))
            q2b = np.broadcast_to(q2, shape + (nq,))
            p2b = np.broadcast_to(p2, shape + (nq,))
            it = np.ndindex(shape)
            for idx in it:
                out[idx] = b(
                    PhasePoint(q1b[idx], p1b[idx]), PhasePoint(q2b[idx], p2b[idx])
                )
            return out

    # sampled Fenchel-type validation: b(z1, z2) >= d(z1, z2)
    n_dim = 1
    q1 = rng.uniform(-radius, radius, (samples, n_dim))
    p1 = rng.uniform(-radius, radius, (samples, n_dim))
    q2 = rng.uniform(-radius, radius, (samples, n_dim))
    p2 = rng.uniform(-radius, radius, (samples, n_dim))
    bv = b_arrays(q1, p1, q2, p2)
    dv = d.eval_arrays(q1, p1, q2, p2)
    slack = bv - dv
    bad = np.where(slack < -1e-12)[0]
    if bad.size:
        k = int(bad[np.argmin(slack[bad])])
        raise ValidationError(
            f"{name}: b < d at z1=({q1[k]}, {p1[k]}), z2=({q2[k]}, {p2[k]}), "
            f"slack {slack[k]:.3e}"
        )

    def info_fn(zq, zp, q1, p1, q2, p2):
        return b_arrays(q1, p1, q2, p2) - d.eval_arrays(q1, p1, q2, p2)

    if tempered is None:
        model = DissipationModel(name=name, info_fn=info_fn, tempered=True)
        tempered = temperedness_check(model, samples=samples, radius=radius, seed=seed).ok
    return DissipationModel(name=name, info_fn=info_fn, tempered=bool(tempered))


# ---------------------------------------------------------------------------
# Sampled checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemperednessReport:
    ok: bool
    min_slack: float
    samples: int
    witness: Optional[tuple] = None  # (z, z1, z2) PhasePoints

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class DominanceReport:
    ok: bool
    samples: int
    witness: Optional[tuple] = None  # (z, z1, z2) with info ordering violated
    margin: float = math.inf  # min of I1 - I2 over finite comparisons

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class AxiomsReport:
    ok: bool
    slot_maxima: list  # (slot, max_pi) per anchor
    convexity_violations: int
    worst_convexity_gap: float
    samples: int

    def __bool__(self):
        return self.ok


def _sample_block(rng, count, radius, n):
    return (
        rng.uniform(-radius, radius, (count, n)),
        rng.uniform(-radius, radius, (count, n)),
    )


def _triple_samples(model: DissipationModel, rng, samples: int, radius: float, n: int):
    """Random triples plus structured probes near the model's feasible set."""
    zq, zp = _sample_block(rng, samples, radius, n)
    q1, p1 = _sample_block(rng, samples, radius, n)
    q2, p2 = _sample_block(rng, samples, radius, n)
    blocks = [(zq, zp, q1, p1, q2, p2)]
    # gap vectors projected onto the feasible domain exercise the finite branch
    pq2, pp2 = model.project_eta_arrays(q2, p2)
    blocks.append((zq, zp, q1, p1, pq2 + np.zeros_like(q2), pp2 + np.zeros_like(p2)))
    zeros = np.zeros_like(q2)
    blocks.append((zq, zp, q1, p1, zeros, zeros))
    return blocks


def temperedness_check(
    model: DissipationModel,
    samples: int = 10_000,
    radius: float = 3.0,
    seed: int = 0,
    n: int = 1,
) -> TemperednessReport:
    """Sampled test of b_omega >= b_min = max{0, omega}.

    Probabilistic only: a pass is evidence, not proof.  Returns a witness
    triple on the worst violation.
    """
    from .phase_space import omega_arrays

    rng = np.random.default_rng(seed)
    worst = math.inf
    witness = None
    total = 0
    for zq, zp, q1, p1, q2, p2 in _triple_samples(model, rng, samples, radius, n):
        info = model.info_arrays(zq, zp, q1, p1, q2, p2)
        w = omega_arrays(q1, p1, q2, p2)
        b_omega = info + w
        slack = b_omega - np.maximum(0.0, w)
        slack = np.where(np.isnan(slack), math.inf, slack)  # inf info dominates
        k = int(np.argmin(slack))
        total += slack.size
        if slack[k] < worst:
            worst = float(slack[k])
            witness = (
                PhasePoint(zq[k], zp[k]),
                PhasePoint(q1[k], p1[k]),
                PhasePoint(q2[k], p2[k]),
            )
    ok = worst >= -1e-12
    return TemperednessReport(
        ok=ok, min_slack=worst, samples=total, witness=None if ok else witness
    )


def dominates(
    m2: DissipationModel,
    m1: DissipationModel,
    samples: int = 10_000,
    radius: float = 3.0,
    seed: int = 0,
    n: int = 1,
) -> DominanceReport:
    """Sampled verdict on 'm2 dominates m1': pi_1 <= pi_2 everywhere,
    equivalently I_1 >= I_2, equivalently b_1 >= b_2.

    Any solution of the evolution problem for a dominated likelihood is a
    solution for the dominating one.
    """
    rng = np.random.default_rng(seed)
    tol = 1e-12
    worst_margin = math.inf
    witness = None
    total = 0
    blocks = _triple_samples(m1, rng, samples, radius, n)
    blocks += _triple_samples(m2, rng, samples, radius, n)
    for zq, zp, q1, p1, q2, p2 in blocks:
        i1 = m1.info_arrays(zq, zp, q1, p1, q2, p2)
        i2 = m2.info_arrays(zq, zp, q1, p1, q2, p2)
        ok_mask = (i1 + tol) >= i2
        total += ok_mask.size
        both_finite = np.isfinite(i1) & np.isfinite(i2)
        if np.any(both_finite):
            margins = np.where(both_finite, i1 - i2, math.inf)
            k = int(np.argmin(margins))
            if margins[k] < worst_margin:
                worst_margin = float(margins[k])
                if not ok_mask[k]:
                    witness = (
                        PhasePoint(zq[k], zp[k]),
                        PhasePoint(q1[k], p1[k]),
                        PhasePoint(q2[k], p2[k]),
                    )
        bad = np.where(~ok_mask)[0]
        if bad.size and witness is None:
            k = int(bad[0])
            witness = (
                PhasePoint(zq[k], zp[k]),
                PhasePoint(q1[k], p1[k]),
                PhasePoint(q2[k], p2[k]),
            )
    ok = witness is None
    return DominanceReport(ok=ok, samples=total, witness=witness, margin=worst_margin)


def likelihood_axioms_check(
    model: DissipationModel,
    samples: int = 2000,
    radius: float = 3.0,
    seed: int = 0,
    n: int = 1,
    anchors: int = 4,
) -> AxiomsReport:
    """Sampled slot-maximum and slot-convexity diagnostics.

    For a handful of anchor points the likelihood is maximized over each
    slot (random candidates plus structured probes, including the model's
    argmin hints); each sampled maximum must be within 1e-6 of 0 or 1.
    Convexity of I along random segments in each slot is also sampled.
    """
    rng = np.random.default_rng(seed)
    slot_maxima = []
    ok = True

    for _ in range(anchors):
        zq, zp = rng.uniform(-radius, radius, (2, n))
        aq, ap = rng.uniform(-radius, radius, (2, n))
        anchor_state = PhasePoint(zq, zp)
        anchor = PhasePoint(aq, ap)

        for slot in (1, 2):
            wq, wp = _sample_block(rng, samples, radius, n)
            probes = [np.zeros((1, n)), aq.reshape(1, n), -aq.reshape(1, n)]
            probes_p = [np.zeros((1, n)), ap.reshape(1, n), -ap.reshape(1, n)]
            hint = (
                model.slot1_argmin(anchor_state, anchor)
                if slot == 1
                else model.slot2_argmin(anchor_state, anchor)
            )
            if hint is not None:
                probes.append(hint.q.reshape(1, n))
                probes_p.append(hint.p.reshape(1, n))
            wq = np.concatenate([wq] + probes, axis=0)
            wp = np.concatenate([wp] + probes_p, axis=0)
            if slot == 1:
                info = model.info_arrays(zq, zp, wq, wp, aq, ap)
            else:
                info = model.info_arrays(zq, zp, aq, ap, wq, wp)
            max_pi = float(np.max(np.exp(-info)))
            slot_maxima.append((slot, max_pi))
            if not (max_pi <= 1e-6 or abs(max_pi - 1.0) <= 1e-6):
                ok = False

    # slot convexity along segments
    violations = 0
    worst_gap = 0.0
    m = max(50, samples // 4)
    for slot in (1, 2):
        zq, zp = _sample_block(rng, m, radius, n)
        aq, ap = _sample_block(rng, m, radius, n)
        uq, up = _sample_block(rng, m, radius, n)
        vq, vp = _sample_block(rng, m, radius, n)
        lam = rng.uniform(0.0, 1.0, (m, 1))
        mq = lam * uq + (1.0 - lam) * vq
        mp = lam * up + (1.0 - lam) * vp
        if slot == 1:
            iu = model.info_arrays(zq, zp, uq, up, aq, ap)
            iv = model.info_arrays(zq, zp, vq, vp, aq, ap)
            im = model.info_arrays(zq, zp, mq, mp, aq, ap)
        else:
            iu = model.info_arrays(zq, zp, aq, ap, uq, up)
            iv = model.info_arrays(zq, zp, aq, ap, vq, vp)
            im = model.info_arrays(zq, zp, aq, ap, mq, mp)
        lam = lam[:, 0]
        bound = lam * iu + (1.0 - lam) * iv  # inf endpoints make this inf
        finite_bound = np.isfinite(bound)
        gap = np.full(bound.shape, -math.inf)
        np.subtract(im, bound, out=gap, where=finite_bound)
        bad = gap > 1e-10
        violations += int(np.count_nonzero(bad))
        if np.any(bad):
            worst_gap = max(worst_gap, float(np.max(gap[bad & np.isfinite(gap)], initial=0.0)))
            ok = False

    return AxiomsReport(
        ok=ok,
        slot_maxima=slot_maxima,
        convexity_violations=violations,
        worst_convexity_gap=worst_gap,
        samples=samples,
    )
