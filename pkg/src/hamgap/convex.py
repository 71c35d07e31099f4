"""Convex analysis relative to a duality of phase space with itself.

Provides extended-real convex potentials f : R^n x R^n -> R u {+inf},
left/right polars (Fenchel conjugates with a chosen slot of a possibly
non-symmetric duality), the Fenchel gap, separable-bipotential support
sets, and brute-force grid oracles for all of the above.

Conventions
-----------
* +inf is a first-class value with saturating arithmetic; indicator
  functions are membership predicates, never large finite penalties.
  Membership predicates accept an absolute tolerance (default 1e-9) so
  that points produced by iterative solvers can be classified.
* The right polar of f with respect to a duality d places the argument
  in the second slot,

      polar_R(f, d)(w) = sup_z { d(z, w) - f(z) },

  and the left polar places it in the first slot,

      polar_L(f, d)(w) = sup_z { d(w, z) - f(z) }.

* Grid oracles report a supremum over a finite box.  A result is flagged
  UNBOUNDED when doubling the grid radius grows the running supremum by
  more than a configured factor (default 1.5); this is a heuristic and
  can miss slow growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GridBudgetError, ValidationError
from .phase_space import OMEGA, Duality, PhasePoint

__all__ = [
    "DEFAULT_MEMBERSHIP_ATOL",
    "GridSpec",
    "PolarEstimate",
    "QProfile",
    "ConvexPotential",
    "SupportSet",
    "right_polar",
    "left_polar",
    "fenchel_gap",
    "in_right_subgradient",
    "support_set",
    "polar_grid_error_bound",
    "zero_potential",
    "indicator_origin",
    "quadratic_position",
    "position_norm",
]

DEFAULT_MEMBERSHIP_ATOL = 1e-9


def _chi(member) -> np.ndarray:
    """Indicator values: 0 where ``member`` holds, +inf elsewhere."""
    return np.where(member, 0.0, np.inf)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """A regular grid over a box in R^{2n}; axes are q_0..q_{n-1}, p_0..p_{n-1}."""

    lower: tuple
    upper: tuple
    counts: tuple
    budget: int = 10_000_000

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "counts", counts)
        if not (len(lower) == len(upper) == len(counts)):
            raise ValidationError("grid lower/upper/counts must have equal length")
        if len(lower) % 2 != 0 or len(lower) == 0:
            raise ValidationError("grid must span q and p axes (even axis count)")
        for lo, hi, c in zip(lower, upper, counts):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"grid bounds must be finite with lo < hi, got [{lo}, {hi}]")
            if c < 2:
                raise ValidationError("grid needs at least 2 points per axis")
        if self.total_points > self.budget:
            raise GridBudgetError(
                f"grid has {self.total_points} points, budget is {self.budget}"
            )

    @classmethod
    def cube(cls, n: int, radius: float, count: int, budget: int = 10_000_000) -> "GridSpec":
        """Symmetric box [-radius, radius]^{2n}; odd counts include the origin."""
        r = float(radius)
        return cls(
            lower=(-r,) * (2 * n),
            upper=(r,) * (2 * n),
            counts=(int(count),) * (2 * n),
            budget=budget,
        )

    @property
    def n(self) -> int:
        return len(self.lower) // 2

    @property
    def total_points(self) -> int:
        total = 1
        for c in self.counts:
            total *= c
        return total

    @property
    def max_spacing(self) -> float:
        return max(
            (hi - lo) / (c - 1) for lo, hi, c in zip(self.lower, self.upper, self.counts)
        )

    def axes(self) -> list:
        return [
            np.linspace(lo, hi, c)
            for lo, hi, c in zip(self.lower, self.upper, self.counts)
        ]

    def points(self) -> np.ndarray:
        """All grid points as an array of shape (N, 2n)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def widened(self, factor: float) -> "GridSpec":
        """Same point counts, bounds scaled about the origin."""
        f = float(factor)
        return GridSpec(
            lower=tuple(f * lo for lo in self.lower),
            upper=tuple(f * hi for hi in self.upper),
            counts=self.counts,
            budget=self.budget,
        )


def polar_grid_error_bound(grid: GridSpec, lipschitz: float) -> float:
    """A-priori polar error bound: max-norm grid spacing times a Lipschitz bound."""
    return grid.max_spacing * float(lipschitz)


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QProfile:
    """Structure payload for position-lifted potentials f(z) = phi(q).

    ``phi`` maps (..., n) arrays to (...,); ``phi_conj`` is the ordinary
    conjugate of phi with respect to <., .>; ``dphi`` is the gradient in
    the smooth case; ``mu`` is the scale of the 1-homogeneous
    mu * |.|_1 case (None otherwise).
    """

    phi: Callable
    phi_conj: Callable
    dphi: Optional[Callable] = None
    mu: Optional[float] = None


class ConvexPotential:
    """A convex lsc extended-real function on phase space.

    Structure flags are trusted (violations surface in sampled checks).
    Optional closed forms: ``polar_omega_fn`` for the right polar with
    respect to the symplectic form, ``sympgrad_fn`` for the smooth
    right-subgradient selector (the symplectic gradient of f), a
    ``support`` set when the polar is an indicator, and a ``q_profile``
    for position-lifted potentials.
    """

    def __init__(
        self,
        name: str,
        value_fn: Callable,
        *,
        smooth: bool = False,
        one_homogeneous: bool = False,
        indicator: bool = False,
        polar_omega_fn: Optional[Callable] = None,
        sympgrad_fn: Optional[Callable] = None,
        support: Optional["SupportSet"] = None,
        q_profile: Optional[QProfile] = None,
    ):
        self.name = name
        self._value_fn = value_fn
        self.smooth = smooth
        self.one_homogeneous = one_homogeneous
        self.indicator = indicator
        self._polar_omega_fn = polar_omega_fn
        self._sympgrad_fn = sympgrad_fn
        self.support = support
        self.q_profile = q_profile

    def __repr__(self):
        return f"ConvexPotential({self.name!r})"

    def value(self, z: PhasePoint) -> float:
        return float(self._value_fn(z.q, z.p))

    def value_arrays(self, q, p) -> np.ndarray:
        return self._value_fn(q, p)

    @property
    def has_closed_polar(self) -> bool:
        return self._polar_omega_fn is not None

    def polar_omega(self, z: PhasePoint) -> float:
        """Closed-form right polar w.r.t. the symplectic form, if available."""
        if self._polar_omega_fn is None:
            raise ValidationError(f"{self.name} has no closed-form polar")
        return float(self._polar_omega_fn(z.q, z.p))

    def polar_omega_arrays(self, q, p) -> np.ndarray:
        if self._polar_omega_fn is None:
            raise ValidationError(f"{self.name} has no closed-form polar")
        return self._polar_omega_fn(q, p)

    def sympgrad(self, z: PhasePoint) -> PhasePoint:
        """Symplectic gradient Xf(z); the unique right omega-subgradient for smooth f."""
        if self._sympgrad_fn is None:
            raise ValidationError(f"{self.name} has no closed-form subgradient selector")
        gq, gp = self._sympgrad_fn(z.q, z.p)
        return PhasePoint(np.broadcast_to(gq, z.q.shape), np.broadcast_to(gp, z.p.shape))


# ---------------------------------------------------------------------------
# Support sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupportSet:
    """The convex set C whose indicator is the polar of a 1-homogeneous f.

    C = { w : omega(z, w) <= f(z) for all z }.  ``membership`` evaluates
    on raw arrays (q, p, atol) and broadcasts over leading axes.
    """

    membership: Callable
    description: Optional[str] = None

    def contains(self, z: PhasePoint, atol: float = DEFAULT_MEMBERSHIP_ATOL) -> bool:
        return bool(self.membership(z.q, z.p, atol))

    def contains_arrays(self, q, p, atol: float = DEFAULT_MEMBERSHIP_ATOL) -> np.ndarray:
        return self.membership(q, p, atol)


def support_set(
    f: ConvexPotential,
    grid: Optional[GridSpec] = None,
    atol: float = DEFAULT_MEMBERSHIP_ATOL,
) -> SupportSet:
    """Membership test for C = { w : omega(z, w) <= f(z) for all z }.

    Uses the analytic description when the potential carries one,
    otherwise scans the supremum over the supplied grid.
    """
    if not f.one_homogeneous:
        raise ValidationError("support sets are defined for 1-homogeneous potentials")
    if f.support is not None:
        return f.support
    if grid is None:
        raise ValidationError(f"{f.name}: no analytic support set; provide a grid")
    pts = grid.points()
    n = grid.n
    qs, ps = pts[:, :n], pts[:, n:]
    fv = f.value_arrays(qs, ps)

    def membership(q, p, tol):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        # sup over grid z of omega(z, w) - f(z), batched over w
        vals = (
            np.sum(q[..., None, :] * ps, axis=-1)
            - np.sum(qs * p[..., None, :], axis=-1)
            - fv
        )
        return np.max(vals, axis=-1) <= tol

    return SupportSet(membership=membership, description=f"grid scan for {f.name}")


# ---------------------------------------------------------------------------
# Polars and Fenchel machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarEstimate:
    """Grid supremum for a polar, with an unboundedness flag.

    ``value`` is the supremum over the base grid; ``unbounded`` is set by
    the nested-grid growth heuristic; ``spacing`` is the max-norm grid
    spacing, the building block of a-priori error bounds.
    """

    value: float
    unbounded: bool
    spacing: float

    def effective(self) -> float:
        return math.inf if self.unbounded else self.value


def _grid_sup(f: ConvexPotential, d: Duality, z_fixed: PhasePoint, grid: GridSpec, slot: str) -> float:
    pts = grid.points()
    n = grid.n
    if z_fixed.n != n:
        raise ValidationError(f"grid dimension {n} does not match point dimension {z_fixed.n}")
    qs, ps = pts[:, :n], pts[:, n:]
    fv = f.value_arrays(qs, ps)
    if slot == "right":
        dv = d.eval_arrays(qs, ps, z_fixed.q, z_fixed.p)
    else:
        dv = d.eval_arrays(z_fixed.q, z_fixed.p, qs, ps)
    return float(np.max(dv - fv))


def _growth_flag(v_base: float, v_wide: float, growth_factor: float) -> bool:
    if not (math.isfinite(v_base) and math.isfinite(v_wide)):
        return False
    scale = max(1.0, abs(v_base))
    return (v_wide - v_base) > (growth_factor - 1.0) * scale


def right_polar(
    f: ConvexPotential,
    d: Duality,
    z2: PhasePoint,
    grid: GridSpec,
    growth_factor: float = 1.5,
) -> PolarEstimate:
    """Grid oracle for the right polar sup_z { d(z, z2) - f(z) }.

    The supremum is evaluated on ``grid`` and again on the grid with
    doubled radius; growth beyond ``growth_factor`` flags UNBOUNDED.
    The grid value never exceeds the true supremum.
    """
    v1 = _grid_sup(f, d, z2, grid, "right")
    v2 = _grid_sup(f, d, z2, grid.widened(2.0), "right")
    return PolarEstimate(
        value=v1,
        unbounded=_growth_flag(v1, v2, growth_factor),
        spacing=grid.max_spacing,
    )


def left_polar(
    f: ConvexPotential,
    d: Duality,
    z1: PhasePoint,
    grid: GridSpec,
    growth_factor: float = 1.5,
) -> PolarEstimate:
    """Grid oracle for the left polar sup_z { d(z1, z) - f(z) }."""
    v1 = _grid_sup(f, d, z1, grid, "left")
    v2 = _grid_sup(f, d, z1, grid.widened(2.0), "left")
    return PolarEstimate(
        value=v1,
        unbounded=_growth_flag(v1, v2, growth_factor),
        spacing=grid.max_spacing,
    )


def fenchel_gap(
    f: ConvexPotential,
    d: Duality,
    z1: PhasePoint,
    z2: PhasePoint,
    grid: Optional[GridSpec] = None,
) -> float:
    """f(z1) + polar_R(f, d)(z2) - d(z1, z2); nonnegative, zero exactly on
    right-subgradient pairs.

    With ``grid`` the polar is the grid oracle (so the gap carries the
    grid resolution error); without it a closed-form polar is required,
    which is available for the built-in potentials and d = omega.
    """
    if grid is None:
        if d.tag == "symplectic" and f.has_closed_polar:
            return f.value(z1) + f.polar_omega(z2) - d(z1, z2)
        raise ValidationError(
            f"{f.name}: no closed-form polar for duality {d.tag}; provide a grid"
        )
    fstar = right_polar(f, d, z2, grid).effective()
    return f.value(z1) + fstar - d(z1, z2)


def in_right_subgradient(
    f: ConvexPotential,
    d: Duality,
    z1: PhasePoint,
    z2: PhasePoint,
    tol: float,
    grid: Optional[GridSpec] = None,
) -> bool:
    """True iff the Fenchel gap closes: z2 is a right d-subgradient of f at z1."""
    return fenchel_gap(f, d, z1, z2, grid=grid) <= tol


# ---------------------------------------------------------------------------
# Built-in potentials
# ---------------------------------------------------------------------------


def zero_potential() -> ConvexPotential:
    """f = 0.  Its right omega-polar is the indicator of the origin, so the
    separable model built on it forces a zero gap vector."""
    origin = SupportSet(
        membership=lambda q, p, atol: (
            (np.max(np.abs(q), axis=-1) <= atol) & (np.max(np.abs(p), axis=-1) <= atol)
        ),
        description="{0}",
    )
    return ConvexPotential(
        "zero",
        lambda q, p: np.zeros(np.broadcast_shapes(q.shape[:-1], p.shape[:-1])),
        smooth=True,
        one_homogeneous=True,
        polar_omega_fn=lambda q, p: _chi(
            (np.max(np.abs(q), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL)
            & (np.max(np.abs(p), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL)
        ),
        sympgrad_fn=lambda q, p: (np.zeros_like(q), np.zeros_like(p)),
        support=origin,
        q_profile=QProfile(
            phi=lambda u: np.zeros(u.shape[:-1]),
            phi_conj=lambda w: _chi(np.max(np.abs(w), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL),
            dphi=lambda u: np.zeros_like(u),
            mu=0.0,
        ),
    )


def indicator_origin() -> ConvexPotential:
    """f = chi_{0}, the indicator of the origin; its right polar vanishes
    identically (the supremum is realized at the single feasible point)."""
    whole_space = SupportSet(
        membership=lambda q, p, atol: np.broadcast_to(
            True, np.broadcast_shapes(q.shape[:-1], p.shape[:-1])
        ),
        description="all of phase space",
    )
    return ConvexPotential(
        "indicator_origin",
        lambda q, p: _chi(
            (np.max(np.abs(q), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL)
            & (np.max(np.abs(p), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL)
        ),
        one_homogeneous=True,
        indicator=True,
        polar_omega_fn=lambda q, p: np.zeros(
            np.broadcast_shapes(q.shape[:-1], p.shape[:-1])
        ),
        support=whole_space,
    )


def quadratic_position(a: float) -> ConvexPotential:
    """f(z) = (a/2) |q|^2, the smooth dissipation potential.

    Right omega-polar: chi_0(q'') + |p''|^2 / (2a).  Symplectic gradient:
    Xf(z) = (0, -a q).
    """
    a = float(a)
    if a <= 0.0:
        raise ValidationError("quadratic_position needs a > 0")
    return ConvexPotential(
        f"quadratic_position(a={a:g})",
        lambda q, p: 0.5 * a * np.sum(q * q, axis=-1),
        smooth=True,
        polar_omega_fn=lambda q, p: _chi(
            np.max(np.abs(q), axis=-1) <= DEFAULT_MEMBERSHIP_ATOL
        )
        + np.sum(p * p, axis=-1) / (2.0 * a),
        sympgrad_fn=lambda q, p: (np.zeros_like(q), -a * q),
        q_profile=QProfile(
            phi=lambda u: 0.5 * a * np.sum(u * u, axis=-1),
            phi_conj=lambda w: np.sum(w * w, axis=-1) / (2.0 * a),
            dphi=lambda u: a * u,
        ),
    )


def position_norm(mu: float) -> ConvexPotential:
    """f(z) = mu * |q|_1, the rate-independent (dry friction) potential.

    1-homogeneous; its right omega-polar is the indicator of
    C = { (q'', p'') : q'' = 0, |p''|_inf <= mu }.
    """
    mu = float(mu)
    if mu < 0.0:
        raise ValidationError("position_norm needs mu >= 0")

    def member(q, p, atol):
        return (np.max(np.abs(q), axis=-1) <= atol) & (
            np.max(np.abs(p), axis=-1) <= mu + atol
        )

    box = SupportSet(membership=member, description=f"{{(0, p): |p|_inf <= {mu:g}}}")
    return ConvexPotential(
        f"position_norm(mu={mu:g})",
        lambda q, p: mu * np.sum(np.abs(q), axis=-1),
        one_homogeneous=True,
        polar_omega_fn=lambda q, p: _chi(member(q, p, DEFAULT_MEMBERSHIP_ATOL)),
        support=box,
        q_profile=QProfile(
            phi=lambda u: mu * np.sum(np.abs(u), axis=-1),
            phi_conj=lambda w: _chi(
                np.max(np.abs(w), axis=-1) <= mu + DEFAULT_MEMBERSHIP_ATOL
            ),
            mu=mu,
        ),
    )
