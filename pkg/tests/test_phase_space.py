import math

import numpy as np
import pytest

from hamgap import (
    EUCLIDEAN,
    OMEGA,
    DimensionMismatch,
    Hamiltonian,
    NumericsError,
    PhasePoint,
    conservation_defect,
    free_drift,
    hamiltonian_from_value,
    harmonic_oscillator,
    kinetic_plus_potential,
    pairing,
    symplectic_form,
    symplectic_gradient,
)

from oracles import fd_directional


def pp(q, p):
    return PhasePoint(np.atleast_1d(np.asarray(q, float)), np.atleast_1d(np.asarray(p, float)))


class TestPhasePoint:
    def test_construction_and_invariants(self):
        z = pp([1.0, 2.0], [3.0, 4.0])
        assert z.n == 2
        with pytest.raises(DimensionMismatch):
            PhasePoint(np.array([1.0]), np.array([1.0, 2.0]))
        with pytest.raises(NumericsError):
            PhasePoint(np.array([np.nan]), np.array([0.0]))
        with pytest.raises(NumericsError):
            PhasePoint(np.array([1.0]), np.array([np.inf]))

    def test_immutability(self):
        z = pp([1.0], [2.0])
        with pytest.raises(ValueError):
            z.q[0] = 5.0

    def test_arithmetic(self):
        a = pp([1.0], [2.0])
        b = pp([3.0], [-1.0])
        assert (a + b).q[0] == 4.0
        assert (a - b).p[0] == 3.0
        assert (2.0 * a).p[0] == 4.0
        assert (-a).q[0] == -1.0


class TestPairing:
    def test_examples(self):
        assert pairing([1.0], [2.0]) == 2.0
        assert pairing([0.0, 0.0], [3.0, 4.0]) == 0.0
        assert pairing([1.0, 2.0], [3.0, 4.0]) == 11.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pairing([1.0], [1.0, 2.0])


class TestSymplecticForm:
    def test_examples(self):
        z1 = pp([1.0], [0.0])
        z2 = pp([0.0], [1.0])
        assert symplectic_form(z1, z2) == -1.0
        assert symplectic_form(z2, z1) == 1.0
        assert symplectic_form(z1, z1) == 0.0

    def test_antisymmetry_sampled(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            z1 = pp(rng.normal(size=2), rng.normal(size=2))
            z2 = pp(rng.normal(size=2), rng.normal(size=2))
            w = symplectic_form(z1, z2)
            assert abs(w + symplectic_form(z2, z1)) <= 1e-12 * (1.0 + abs(w))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            symplectic_form(pp([1.0], [0.0]), pp([1.0, 2.0], [0.0, 0.0]))


@pytest.mark.parametrize("duality", [OMEGA, EUCLIDEAN], ids=["omega", "euclidean"])
def test_bilinearity_sampled(duality):
    rng = np.random.default_rng(1)
    for _ in range(300):
        z1 = pp(rng.normal(size=2), rng.normal(size=2))
        z2 = pp(rng.normal(size=2), rng.normal(size=2))
        z3 = pp(rng.normal(size=2), rng.normal(size=2))
        a, b = rng.normal(size=2)
        lhs = duality(a * z1 + b * z2, z3)
        rhs = a * duality(z1, z3) + b * duality(z2, z3)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))
        lhs = duality(z3, a * z1 + b * z2)
        rhs = a * duality(z3, z1) + b * duality(z3, z2)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))


def test_duality_transpose():
    rng = np.random.default_rng(2)
    wt = OMEGA.transpose()
    for _ in range(50):
        z1 = pp(rng.normal(size=1), rng.normal(size=1))
        z2 = pp(rng.normal(size=1), rng.normal(size=1))
        assert wt(z1, z2) == OMEGA(z2, z1)


class TestSymplecticGradient:
    def test_harmonic(self):
        H = harmonic_oscillator()
        xh = symplectic_gradient(H, pp([1.0], [0.0]), 0.0)
        assert xh.q[0] == 0.0 and xh.p[0] == -1.0

    def test_free_drift(self):
        H = free_drift()
        xh = symplectic_gradient(H, pp([3.7], [-2.0]), 1.0)
        assert xh.q[0] == 1.0 and xh.p[0] == 0.0

    def test_time_dependent(self):
        # H = q sin(t); at t = pi/2 the force is -sin(t) = -1
        H = Hamiltonian(
            name="q_sin_t",
            value=lambda q, p, t: np.sum(q, axis=-1) * np.sin(t),
            dq=lambda q, p, t: np.sin(t) * np.ones_like(q),
            dp=lambda q, p, t: np.zeros_like(p),
            dt=lambda q, p, t: np.sum(q, axis=-1) * np.cos(t),
        )
        xh = symplectic_gradient(H, pp([2.0], [3.0]), math.pi / 2.0)
        assert xh.q[0] == 0.0
        assert abs(xh.p[0] + 1.0) < 1e-15

    @pytest.mark.parametrize(
        "H",
        [harmonic_oscillator(), harmonic_oscillator(stiffness=2.0, mass=0.5), free_drift()],
        ids=["harmonic", "stiff", "drift"],
    )
    def test_against_finite_differences(self, H):
        # omega(v, XH(z, t)) must equal the directional derivative of H
        # along v (so the flow of XH conserves H)
        rng = np.random.default_rng(3)
        for _ in range(25):
            z = pp(rng.normal(size=1), rng.normal(size=1))
            v = pp(rng.normal(size=1), rng.normal(size=1))
            xh = symplectic_gradient(H, z, 0.0)
            fd = fd_directional(
                lambda q, p: float(H.value(q, p, 0.0)), z.q, z.p, v.q, v.p, eps=1e-6
            )
            lhs = symplectic_form(v, xh)
            assert abs(lhs - fd) <= 1e-5 * (1.0 + abs(lhs))
            assert abs(symplectic_form(xh, v) + fd) <= 1e-5 * (1.0 + abs(fd))

    def test_nonfinite_rejected(self):
        H = Hamiltonian(
            name="bad",
            value=lambda q, p, t: np.sum(q, axis=-1),
            dq=lambda q, p, t: np.full_like(q, np.nan),
            dp=lambda q, p, t: np.zeros_like(p),
        )
        with pytest.raises(NumericsError):
            symplectic_gradient(H, pp([1.0], [0.0]), 0.0)


class TestConservationDefect:
    def test_zero_on_hamiltonian_flow(self):
        H = harmonic_oscillator()
        z = pp([1.0], [2.0])
        xh = symplectic_gradient(H, z, 0.0)
        assert abs(conservation_defect(H, z, xh, 0.0)) <= 1e-10

    def test_rayleigh_rate(self):
        # zdot = (1, -a) at z = (0, 1): dH/dt = q qdot + p pdot = -a p^2 = -0.5
        H = harmonic_oscillator()
        z = pp([0.0], [1.0])
        zdot = pp([1.0], [-0.5])
        value = conservation_defect(H, z, zdot, 0.0)
        assert abs(value + 0.5) < 1e-14
        fd = fd_directional(lambda q, p: float(H.value(q, p, 0.0)), z.q, z.p, zdot.q, zdot.p)
        assert abs(value - fd) < 1e-9

    def test_stationary(self):
        H = harmonic_oscillator()
        z = pp([0.3], [0.7])
        assert conservation_defect(H, z, pp([0.0], [0.0]), 0.0) == 0.0


class TestHamiltonianDerivatives:
    @pytest.mark.parametrize(
        "H",
        [
            harmonic_oscillator(),
            harmonic_oscillator(stiffness=3.0, mass=2.0),
            kinetic_plus_potential(
                lambda q: 0.5 * np.sum(q * q, axis=-1) + 0.25 * np.sum(q**4, axis=-1),
                lambda q: q + q**3,
                name="quartic",
            ),
        ],
        ids=["harmonic", "scaled", "quartic"],
    )
    def test_derivatives_match_finite_differences(self, H):
        rng = np.random.default_rng(4)
        h = 1e-6
        for _ in range(20):
            q = rng.uniform(-2, 2, 1)
            p = rng.uniform(-2, 2, 1)
            t = float(rng.uniform(0, 1))
            dq_fd = (float(H.value(q + h, p, t)) - float(H.value(q - h, p, t))) / (2 * h)
            dp_fd = (float(H.value(q, p + h, t)) - float(H.value(q, p - h, t))) / (2 * h)
            dq = float(np.broadcast_to(np.asarray(H.dq(q, p, t)), q.shape)[0])
            dp = float(np.broadcast_to(np.asarray(H.dp(q, p, t)), p.shape)[0])
            assert abs(dq - dq_fd) <= 1e-5 * (1.0 + abs(dq))
            assert abs(dp - dp_fd) <= 1e-5 * (1.0 + abs(dp))

    def test_value_only_fallback_wrapper(self):
        exact = harmonic_oscillator(stiffness=2.0)
        wrapped = hamiltonian_from_value(
            "wrapped", lambda q, p, t: 0.5 * (2.0 * np.sum(q * q, axis=-1) + np.sum(p * p, axis=-1))
        )
        rng = np.random.default_rng(5)
        for _ in range(10):
            z = pp(rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1))
            ge = symplectic_gradient(exact, z, 0.0)
            gw = symplectic_gradient(wrapped, z, 0.0)
            assert abs(ge.q[0] - gw.q[0]) < 1e-8
            assert abs(ge.p[0] - gw.p[0]) < 1e-8

    def test_fallback_handles_scalars(self):
        wrapped = hamiltonian_from_value(
            "w", lambda q, p, t: 0.5 * (np.sum(np.square(q), axis=-1) + np.sum(np.square(p), axis=-1))
        )
        out = np.asarray(wrapped.dq(np.array([1.0]), np.array([0.0]), 0.0))
        assert abs(float(out[0]) - 1.0) < 1e-8
