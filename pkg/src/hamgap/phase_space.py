"""Finite-dimensional phase space: points, dualities, Hamiltonians.

Phase space is R^n x R^n.  A state is a pair z = (q, p) of a position
vector q and a momentum vector p; the same container holds velocities
zdot = (qdot, pdot) and gap vectors eta = (eta_q, eta_p).

The abstract pairing <q, p> is the Euclidean dot product, and the
distinguished duality of phase space with itself is the symplectic form

    omega(z1, z2) = <q2, p1> - <q1, p2>

All value-level callables in this module broadcast over leading axes:
q and p may be single vectors of shape (n,) or batches of shape (..., n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NumericsError

__all__ = [
    "PhasePoint",
    "Duality",
    "Hamiltonian",
    "pairing",
    "symplectic_form",
    "euclidean_pairing",
    "symplectic_gradient",
    "conservation_defect",
    "OMEGA",
    "EUCLIDEAN",
    "harmonic_oscillator",
    "free_drift",
    "kinetic_plus_potential",
    "hamiltonian_from_value",
]


def _as_state_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatch(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"{name} has non-finite components: {arr}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhasePoint:
    """Immutable point z = (q, p) of R^n x R^n.

    Also used for tangent vectors and gap vectors, with the same
    (q-component, p-component) ordering everywhere.
    """

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _as_state_vector(self.q, "q"))
        object.__setattr__(self, "p", _as_state_vector(self.p, "p"))
        if self.q.shape != self.p.shape:
            raise DimensionMismatch(
                f"q and p must have equal length, got {self.q.size} and {self.p.size}"
            )

    @property
    def n(self) -> int:
        return self.q.size

    @staticmethod
    def zero(n: int) -> "PhasePoint":
        return PhasePoint(np.zeros(n), np.zeros(n))

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.q + other.q, self.p + other.p)

    def __sub__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.q - other.q, self.p - other.p)

    def __mul__(self, a: float) -> "PhasePoint":
        return PhasePoint(a * self.q, a * self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "PhasePoint":
        return PhasePoint(-self.q, -self.p)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.q**2) + np.sum(self.p**2)))

    def allclose(self, other: "PhasePoint", atol: float = 0.0, rtol: float = 0.0) -> bool:
        return np.allclose(self.q, other.q, atol=atol, rtol=rtol) and np.allclose(
            self.p, other.p, atol=atol, rtol=rtol
        )


def _dot_last(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def pairing(q, p) -> float:
    """Euclidean pairing <q, p> = sum_i q_i p_i of a position and a momentum."""
    qa = np.asarray(q, dtype=float)
    pa = np.asarray(p, dtype=float)
    if qa.shape[-1:] != pa.shape[-1:]:
        raise DimensionMismatch(
            f"pairing needs equal lengths, got {qa.shape} and {pa.shape}"
        )
    return float(_dot_last(qa, pa))


def omega_arrays(q1, p1, q2, p2) -> np.ndarray:
    """Symplectic form on raw arrays, broadcasting over leading axes."""
    return _dot_last(q2, p1) - _dot_last(q1, p2)


def euclid_arrays(q1, p1, q2, p2) -> np.ndarray:
    return _dot_last(q1, q2) + _dot_last(p1, p2)


@dataclass(frozen=True)
class Duality:
    """A bilinear pairing of phase space with itself.

    ``fn`` evaluates on raw arrays (q1, p1, q2, p2) -> scalar and must be
    bilinear; it broadcasts over leading axes.  ``tag`` is one of
    ``"symplectic"``, ``"euclidean"``, ``"custom"``.
    """

    tag: str
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, z1: PhasePoint, z2: PhasePoint) -> float:
        if z1.n != z2.n:
            raise DimensionMismatch(
                f"duality operands have dimensions {z1.n} and {z2.n}"
            )
        return float(self.fn(z1.q, z1.p, z2.q, z2.p))

    def eval_arrays(self, q1, p1, q2, p2) -> np.ndarray:
        return self.fn(q1, p1, q2, p2)

    def transpose(self) -> "Duality":
        """The slot-swapped duality d^T(z1, z2) = d(z2, z1)."""
        fn = self.fn
        return Duality(
            tag="custom" if self.tag != "euclidean" else "euclidean",
            fn=lambda q1, p1, q2, p2: fn(q2, p2, q1, p1),
            name=(self.name or self.tag) + "_transposed",
        )


OMEGA = Duality(tag="symplectic", fn=omega_arrays, name="omega")
EUCLIDEAN = Duality(tag="euclidean", fn=euclid_arrays, name="euclidean")


def symplectic_form(z1: PhasePoint, z2: PhasePoint) -> float:
    """omega(z1, z2) = <q2, p1> - <q1, p2>; antisymmetric."""
    return OMEGA(z1, z2)


def euclidean_pairing(z1: PhasePoint, z2: PhasePoint) -> float:
    return EUCLIDEAN(z1, z2)


@dataclass(frozen=True)
class Hamiltonian:
    """Energy function H(q, p, t) with partial derivatives.

    ``value`` returns the energy, ``dq`` the derivative with respect to q
    (a vector in the momentum role), ``dp`` the derivative with respect to
    p (a vector in the position role) and ``dt`` the time derivative.
    All callables broadcast over leading axes of q and p.
    """

    name: str
    value: Callable
    dq: Callable
    dp: Callable
    dt: Callable = field(default=lambda q, p, t: 0.0)

    def value_at(self, z: PhasePoint, t: float) -> float:
        return float(self.value(z.q, z.p, t))

    def dq_at(self, z: PhasePoint, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.dq(z.q, z.p, t), dtype=float), z.q.shape).copy()

    def dp_at(self, z: PhasePoint, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.dp(z.q, z.p, t), dtype=float), z.p.shape).copy()

    def dt_at(self, z: PhasePoint, t: float) -> float:
        return float(self.dt(z.q, z.p, t))


def symplectic_gradient(H: Hamiltonian, z: PhasePoint, t: float) -> PhasePoint:
    """The Hamiltonian vector field XH(z, t) = (dH/dp, -dH/dq).

    With this module's sign convention for the symplectic form,
    omega(v, XH(z, t)) equals the directional derivative of H at z along
    v, for every v (equivalently omega(XH, v) = -dH[v], which is what
    makes the flow of XH conserve H).
    """
    gq = np.broadcast_to(np.asarray(H.dp(z.q, z.p, t), dtype=float), z.q.shape)
    gp = np.broadcast_to(-np.asarray(H.dq(z.q, z.p, t), dtype=float), z.p.shape)
    if not (np.all(np.isfinite(gq)) and np.all(np.isfinite(gp))):
        raise NumericsError(f"non-finite symplectic gradient of {H.name} at t={t}")
    return PhasePoint(gq, gp)


def conservation_defect(H: Hamiltonian, z: PhasePoint, zdot: PhasePoint, t: float) -> float:
    """Rate of energy change beyond explicit time dependence.

    Returns <dH/dp, pdot> + <qdot, dH/dq>, which equals
    d/dt H(z(t), t) - dH/dt(z(t), t) along a curve with velocity zdot,
    and vanishes when zdot = XH(z, t).
    """
    if z.n != zdot.n:
        raise DimensionMismatch("z and zdot have different dimensions")
    hq = np.broadcast_to(np.asarray(H.dq(z.q, z.p, t), dtype=float), z.q.shape)
    hp = np.broadcast_to(np.asarray(H.dp(z.q, z.p, t), dtype=float), z.p.shape)
    return float(_dot_last(hp, zdot.p) + _dot_last(zdot.q, hq))


# ---------------------------------------------------------------------------
# Built-in Hamiltonians
# ---------------------------------------------------------------------------


def harmonic_oscillator(stiffness: float = 1.0, mass: float = 1.0) -> Hamiltonian:
    """H = (k |q|^2 + |p|^2 / m) / 2, the standard oscillator."""
    k = float(stiffness)
    inv_m = 1.0 / float(mass)
    return Hamiltonian(
        name=f"harmonic(k={k:g}, m={float(mass):g})",
        value=lambda q, p, t: 0.5 * (k * _dot_last(q, q) + inv_m * _dot_last(p, p)),
        dq=lambda q, p, t: k * q,
        dp=lambda q, p, t: inv_m * p,
    )


def free_drift() -> Hamiltonian:
    """H = sum_i p_i; the flow translates q at unit speed."""
    return Hamiltonian(
        name="free_drift",
        value=lambda q, p, t: np.sum(p, axis=-1),
        dq=lambda q, p, t: np.zeros_like(q),
        dp=lambda q, p, t: np.ones_like(p),
    )


def kinetic_plus_potential(
    potential: Callable,
    potential_grad: Callable,
    mass: float = 1.0,
    name: str = "kinetic+potential",
) -> Hamiltonian:
    """H = |p|^2 / (2 m) + V(q) with analytic V and grad V.

    ``potential`` maps q (..., n) to energies (...,); ``potential_grad``
    maps q to the gradient array of the same shape as q.
    """
    inv_m = 1.0 / float(mass)
    return Hamiltonian(
        name=name,
        value=lambda q, p, t: 0.5 * inv_m * _dot_last(p, p) + potential(q),
        dq=lambda q, p, t: potential_grad(q),
        dp=lambda q, p, t: inv_m * p,
    )


def hamiltonian_from_value(
    name: str,
    value: Callable,
    step: float = 1e-6,
) -> Hamiltonian:
    """Wrap a value-only energy function with central-difference derivatives.

    Intended for user-defined Hamiltonians without analytic gradients;
    built-in scenarios use exact derivatives instead.
    """
    h = float(step)

    def _promote(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        scalar = q.ndim == 0
        if scalar:
            q = q.reshape(1)
            p = p.reshape(1)
        return q, p, scalar

    def dq(q, p, t):
        q, p, scalar = _promote(q, p)
        out = np.empty_like(q)
        for i in range(q.shape[-1]):
            e = np.zeros(q.shape[-1])
            e[i] = h
            out[..., i] = (value(q + e, p, t) - value(q - e, p, t)) / (2.0 * h)
        return float(out[0]) if scalar else out

    def dp(q, p, t):
        q, p, scalar = _promote(q, p)
        out = np.empty_like(p)
        for i in range(p.shape[-1]):
            e = np.zeros(p.shape[-1])
            e[i] = h
            out[..., i] = (value(q, p + e, t) - value(q, p - e, t)) / (2.0 * h)
        return float(out[0]) if scalar else out

    def dt(q, p, t):
        q, p, _ = _promote(q, p)
        return (value(q, p, t + h) - value(q, p, t - h)) / (2.0 * h)

    return Hamiltonian(name=name, value=value, dq=dq, dp=dp, dt=dt)
