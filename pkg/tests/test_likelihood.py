import math

import numpy as np
import pytest

from hamgap import (
    EUCLIDEAN,
    OMEGA,
    GridSpec,
    PhasePoint,
    ValidationError,
    always_likely_model,
    dominates,
    friction_model,
    indicator_origin,
    likelihood_axioms_check,
    max_likelihood,
    max_likelihood_model,
    minimal_symplectic_bipotential,
    model_from_bipotential,
    pure_hamiltonian_model,
    quadratic_position,
    rayleigh_model,
    separable_bipotential,
    symplectic_form,
    temperedness_check,
    zero_potential,
)


def pp(q, p):
    return PhasePoint(np.atleast_1d(np.asarray(q, float)), np.atleast_1d(np.asarray(p, float)))


Z0 = pp(0.0, 0.0)


class TestMaxLikelihood:
    def test_positive_omega_gives_one(self):
        z1 = pp(0.0, 1.0)
        z2 = pp(1.0, 0.0)
        assert symplectic_form(z1, z2) > 0
        assert max_likelihood(z1, z2) == 1.0

    def test_colinear_gives_one(self):
        # dyadic components make omega(z, a z) = 0 exactly in floats
        z1 = pp(0.5, -1.25)
        assert max_likelihood(z1, 2.5 * z1) == 1.0
        # general floats: colinearity holds up to one rounding of omega
        z1 = pp(0.7, -1.1)
        assert max_likelihood(z1, 2.5 * z1) == pytest.approx(1.0, abs=1e-15)

    def test_negative_omega(self):
        z1 = pp(1.0, 0.0)
        z2 = pp(0.0, 1.0)
        assert symplectic_form(z1, z2) == -1.0
        assert max_likelihood(z1, z2) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = max_likelihood(pp(*rng.normal(size=2)), pp(*rng.normal(size=2)))
            assert 0.0 < v <= 1.0


class TestMinimalSymplecticBipotential:
    def test_examples(self):
        z1 = pp(1.0, 0.0)
        z2 = pp(0.0, 1.0)
        assert minimal_symplectic_bipotential(z1, z2) == 0.0  # omega = -1
        assert minimal_symplectic_bipotential(z2, z1) == 1.0  # omega = +1
        assert minimal_symplectic_bipotential(z1, Z0) == 0.0

    def test_consistency_with_log_likelihood(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            z1 = pp(*rng.uniform(-3, 3, 2))
            z2 = pp(*rng.uniform(-3, 3, 2))
            w = symplectic_form(z1, z2)
            lhs = minimal_symplectic_bipotential(z1, z2)
            rhs = -math.log(max_likelihood(z1, z2)) + w
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(w))
            assert lhs >= 0.0 and lhs >= w


class TestSeparableModels:
    def test_pure_hamiltonian_info_is_indicator_of_gap(self):
        m = pure_hamiltonian_model()
        rng = np.random.default_rng(2)
        for _ in range(50):
            z1 = pp(*rng.uniform(-2, 2, 2))
            assert m.info(Z0, z1, Z0) == 0.0
            z2 = pp(*rng.uniform(0.5, 2, 2))
            assert math.isinf(m.info(Z0, z1, z2))

    def test_indicator_origin_model_freezes_velocity(self):
        # the separable model of chi_0 constrains the first slot, not the gap
        m = separable_bipotential(indicator_origin())
        assert m.info(Z0, Z0, pp(1.0, 2.0)) == 0.0
        assert math.isinf(m.info(Z0, pp(1.0, 0.0), Z0))

    def test_rayleigh_bipotential_formula(self):
        a = 0.5
        m = rayleigh_model(a)
        rng = np.random.default_rng(3)
        for _ in range(100):
            q1, p1, p2 = rng.uniform(-2, 2, 3)
            z1 = pp(q1, p1)
            z2 = pp(0.0, p2)
            b = m.bipotential_omega(Z0, z1, z2)
            want = 0.5 * a * q1 * q1 + p2 * p2 / (2.0 * a)
            assert b == pytest.approx(want, abs=1e-12)
            assert math.isinf(m.bipotential_omega(Z0, z1, pp(0.3, p2)))

    def test_friction_bipotential_formula(self):
        mu = 0.3
        m = friction_model(mu)
        rng = np.random.default_rng(4)
        for _ in range(100):
            q1, p1 = rng.uniform(-2, 2, 2)
            p2 = rng.uniform(-mu, mu)
            b = m.bipotential_omega(Z0, pp(q1, p1), pp(0.0, p2))
            assert b == pytest.approx(mu * abs(q1), abs=1e-12)
            assert math.isinf(m.bipotential_omega(Z0, pp(q1, p1), pp(0.0, 2 * mu)))

    def test_info_nonnegative_sampled(self):
        rng = np.random.default_rng(5)
        for m in (pure_hamiltonian_model(), rayleigh_model(0.5), friction_model(0.3),
                  max_likelihood_model()):
            for _ in range(200):
                z1 = pp(*rng.uniform(-3, 3, 2))
                z2 = pp(*rng.uniform(-3, 3, 2))
                i = m.info(Z0, z1, m.project_eta(z2))
                assert i >= -1e-12

    def test_exp_log_round_trip_exact(self):
        m = rayleigh_model(0.5)
        rng = np.random.default_rng(6)
        for _ in range(100):
            z1 = pp(*rng.uniform(-2, 2, 2))
            z2 = pp(0.0, rng.uniform(-2, 2))
            i = m.info(Z0, z1, z2)
            b = m.bipotential_omega(Z0, z1, z2)
            # same code path: b - omega == I bitwise
            assert b - symplectic_form(z1, z2) == i
            assert 0.0 <= m.likelihood(Z0, z1, z2) <= 1.0

    def test_duality_transport_exact(self):
        # b_d - d == b_omega - omega pointwise: both bipotentials derive
        # from the same stored information content, which makes the
        # transported difference the identical float
        from hamgap import euclidean_pairing

        m = friction_model(0.3)
        b_euc = m.bipotential(EUCLIDEAN)
        rng = np.random.default_rng(7)
        for _ in range(100):
            z1 = pp(*rng.uniform(-2, 2, 2))
            z2 = pp(0.0, rng.uniform(-0.3, 0.3))
            i = m.info(Z0, z1, z2)
            assert b_euc(Z0, z1, z2) == i + euclidean_pairing(z1, z2)
            assert m.bipotential_omega(Z0, z1, z2) == i + symplectic_form(z1, z2)
            # the subtracted form agrees up to one rounding of each sum
            lhs = b_euc(Z0, z1, z2) - euclidean_pairing(z1, z2)
            rhs = m.bipotential_omega(Z0, z1, z2) - symplectic_form(z1, z2)
            assert lhs == pytest.approx(rhs, abs=1e-14)

    def test_grid_polar_strategy(self):
        # separable model over the Euclidean duality needs the grid oracle
        f = quadratic_position(1.0)
        m = separable_bipotential(f, EUCLIDEAN, grid=GridSpec.cube(1, 6.0, 121))
        rng = np.random.default_rng(8)
        for _ in range(20):
            z1 = pp(*rng.uniform(-1, 1, 2))
            z2 = pp(*rng.uniform(-1, 1, 2))
            # Fenchel inequality for the Euclidean conjugate, up to grid error
            assert m.info(Z0, z1, z2) >= -0.1

    def test_requires_polar_strategy(self):
        bare = type(zero_potential())("bare", lambda q, p: np.zeros(q.shape[:-1]))
        with pytest.raises(ValidationError):
            separable_bipotential(bare, EUCLIDEAN)


class TestModelFromBipotential:
    def test_minimal_bipotential_reproduces_max_likelihood(self):
        def b(z1, z2):
            return minimal_symplectic_bipotential(z1, z2)

        m = model_from_bipotential(b, OMEGA, name="from_bmin", seed=0)
        assert m.tempered
        ref = max_likelihood_model()
        rng = np.random.default_rng(9)
        for _ in range(50):
            z1 = pp(*rng.uniform(-2, 2, 2))
            z2 = pp(*rng.uniform(-2, 2, 2))
            assert m.info(Z0, z1, z2) == pytest.approx(ref.info(Z0, z1, z2), abs=1e-12)

    def test_b_equals_duality_is_accepted_untempered(self):
        # b = omega itself: I == 0, a valid likelihood, but not tempered
        m = model_from_bipotential(
            lambda z1, z2: symplectic_form(z1, z2), OMEGA, name="omega_itself", seed=1
        )
        assert not m.tempered
        rep = temperedness_check(m, samples=2000, seed=2)
        assert not rep.ok
        z, z1, z2 = rep.witness
        assert symplectic_form(z1, z2) < 0.0

    def test_b_below_duality_rejected(self):
        with pytest.raises(ValidationError):
            model_from_bipotential(
                lambda z1, z2: 0.5 * symplectic_form(z1, z2), OMEGA, name="bad", seed=3
            )

    def test_rayleigh_reconstruction(self):
        ref = rayleigh_model(1.0)

        def b(z1, z2):
            return ref.bipotential_omega(Z0, z1, z2)

        m = model_from_bipotential(b, OMEGA, name="rayleigh_from_b", seed=4)
        rng = np.random.default_rng(10)
        for _ in range(30):
            z1 = pp(*rng.uniform(-2, 2, 2))
            z2 = pp(0.0, rng.uniform(-2, 2))
            assert m.info(Z0, z1, z2) == ref.info(Z0, z1, z2)


class TestTemperedness:
    def test_max_likelihood_model_tempered(self):
        assert temperedness_check(max_likelihood_model(), samples=5000, seed=0).ok

    def test_rayleigh_tempered(self):
        assert temperedness_check(rayleigh_model(0.5), samples=5000, seed=0).ok
        assert temperedness_check(rayleigh_model(2.0), samples=5000, seed=1).ok

    def test_friction_tempered(self):
        assert temperedness_check(friction_model(0.3), samples=5000, seed=0).ok

    def test_pure_hamiltonian_tempered(self):
        assert temperedness_check(pure_hamiltonian_model(), samples=5000, seed=0).ok

    def test_always_likely_fails_with_witness(self):
        rep = temperedness_check(always_likely_model(), samples=5000, seed=0)
        assert not rep.ok
        assert rep.min_slack < -1e-12
        z, z1, z2 = rep.witness
        # the witness exhibits b_omega < b_min, i.e. omega(z1, z2) < 0
        assert symplectic_form(z1, z2) < 0.0


class TestAxioms:
    @pytest.mark.parametrize(
        "m",
        [
            max_likelihood_model(),
            pure_hamiltonian_model(),
            rayleigh_model(0.5),
            friction_model(0.3),
            always_likely_model(),
        ],
        ids=["pmax", "pureham", "rayleigh", "friction", "always"],
    )
    def test_builtins_pass(self, m):
        rep = likelihood_axioms_check(m, samples=600, seed=0)
        assert rep.ok, rep

    def test_pure_hamiltonian_slot_max_at_zero_gap(self):
        m = pure_hamiltonian_model()
        # the second-slot maximum is 1, attained exactly at eta = 0
        assert m.likelihood(Z0, pp(1.0, 2.0), Z0) == 1.0
        rep = likelihood_axioms_check(m, samples=400, seed=1)
        slot2 = [v for slot, v in rep.slot_maxima if slot == 2]
        assert all(abs(v - 1.0) <= 1e-6 or v <= 1e-6 for v in slot2)


class TestDominance:
    def test_max_likelihood_dominates_every_tempered_builtin(self):
        pmax = max_likelihood_model()
        for m in (pure_hamiltonian_model(), rayleigh_model(0.5), friction_model(0.3)):
            rep = dominates(pmax, m, samples=4000, seed=0)
            assert rep.ok, (m.name, rep.witness)

    def test_self_domination(self):
        m = rayleigh_model(0.5)
        assert dominates(m, m, samples=1000, seed=0).ok

    def test_rayleigh_does_not_dominate_pure_hamiltonian(self):
        # at z2 = 0 and q1 != 0 the pure-Hamiltonian information vanishes
        # while the viscous one is phi(q1) > 0, so domination fails there;
        # the sampling oracle must find such a witness
        rep = dominates(rayleigh_model(0.5), pure_hamiltonian_model(), samples=4000, seed=0)
        assert not rep.ok
        z, z1, z2 = rep.witness
        pureham = pure_hamiltonian_model()
        ray = rayleigh_model(0.5)
        assert pureham.info(z, z1, z2) < ray.info(z, z1, z2)

    def test_always_likely_dominates_all(self):
        # I == 0 is the pointwise smallest information content
        top = always_likely_model()
        for m in (pure_hamiltonian_model(), rayleigh_model(0.5), max_likelihood_model()):
            assert dominates(top, m, samples=2000, seed=0).ok
