import math

import numpy as np
import pytest

from conftest import random_rotation
from oscoal.coalescence import (
    PhasePoint,
    WavePacket,
    j_overlap,
    p_kl,
    p_kl_batch,
    p_kl_closed,
    p_kl_oracle,
    p_klm,
    p_klm_differential,
    poisson_sum,
    shell_states,
    v_and_t,
)
from oscoal.ho1d import OscParams

LEVELS_N3 = ((0, 0), (0, 1), (0, 2), (1, 0), (0, 3), (1, 1))


class TestInvariants:
    def test_origin(self, params):
        assert v_and_t((0, 0, 0), (0, 0, 0), params) == (0.0, 0.0)

    def test_parallel_vectors_have_zero_t(self, params):
        v, t = v_and_t((1.0, 2.0, -0.5), (2.0, 4.0, -1.0), params)
        assert t == 0.0
        assert v > 0

    def test_reference_point(self, params):
        # |r| = 1/nu and |p| = hbar nu at right angle: v = 1, t = 1
        v, t = v_and_t((1.0, 0, 0), (0, 1.0, 0), params)
        assert v == pytest.approx(1.0) and t == pytest.approx(1.0)

    def test_units(self):
        p = OscParams(nu=2.0, delta=0.1, hbar=0.5)
        v, t = v_and_t((0.3, 0, 0), (0, 0.4, 0), p)
        assert v == pytest.approx(0.5 * (4 * 0.09) + 0.5 * 0.16 / (0.5 * 2.0) ** 2)
        assert t == pytest.approx((0.3 * 0.4) ** 2 / 0.25)

    def test_no_cancellation_near_parallel(self, params):
        r = (1.0, 0.0, 0.0)
        p = (1.0, 1e-9, 0.0)
        _, t = v_and_t(r, p, params)
        assert t == pytest.approx(1e-18, rel=1e-6)

    def test_phase_point_helpers(self, params):
        a = WavePacket((1, 0, 0), (0, 1, 0), 0.5)
        b = WavePacket((0, 0, 0), (0, -1, 0), 0.5)
        rel = PhasePoint.from_packets(a, b)
        assert rel.r_vec == (1.0, 0.0, 0.0)
        assert rel.p_vec == (0.0, 1.0, 0.0)
        assert rel.invariants(params) == pytest.approx((1.0, 1.0))


class TestPKl:
    def test_ground_state_is_poisson_weight(self, params, rng):
        for _ in range(5):
            rv, pv = rng.uniform(-1.5, 1.5, (2, 3))
            rel = PhasePoint(tuple(rv), tuple(pv))
            v, _ = v_and_t(rv, pv, params)
            assert p_kl(0, 0, rel, params) == pytest.approx(math.exp(-v), rel=1e-13)

    def test_p01_vanishes_at_origin(self, params):
        assert p_kl(0, 1, PhasePoint((0, 0, 0), (0, 0, 0)), params) == pytest.approx(0.0, abs=1e-15)

    def test_closed_forms_match_factorized(self, params, rng):
        for _ in range(15):
            rv, pv = rng.uniform(-1.5, 1.5, (2, 3))
            rel = PhasePoint(tuple(rv), tuple(pv))
            v, t = v_and_t(rv, pv, params)
            for k, l in LEVELS_N3:
                assert p_kl(k, l, rel, params) == pytest.approx(
                    p_kl_closed(k, l, v, t), abs=1e-12
                )

    def test_closed_forms_at_generic_units(self, rng):
        # zeta = 1 with nu, hbar away from 1: delta = 1/(2 nu)
        p = OscParams(nu=1.6, delta=1 / 3.2, hbar=0.75)
        for _ in range(8):
            rv, pv = rng.uniform(-1, 1, (2, 3))
            rel = PhasePoint(tuple(rv), tuple(pv))
            v, t = v_and_t(rv, pv, p)
            for k, l in LEVELS_N3:
                assert p_kl(k, l, rel, p) == pytest.approx(
                    p_kl_closed(k, l, v, t), abs=1e-12
                )

    def test_general_zeta_against_quadrature_oracle(self, rng):
        for z in (0.5, 1.0, 2.0):
            p = OscParams.from_zeta(1.0, z)
            for _ in range(4):
                rel = PhasePoint(tuple(rng.uniform(-1.2, 1.2, 3)), tuple(rng.uniform(-1.2, 1.2, 3)))
                for k, l in ((0, 0), (0, 1), (0, 2), (1, 0)):
                    assert p_kl(k, l, rel, p) == pytest.approx(
                        p_kl_oracle(k, l, rel, p), abs=1e-7
                    )

    def test_p11_at_zeta2_matches_oracle(self, rng):
        p = OscParams.from_zeta(1.0, 2.0)
        rel = PhasePoint(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-1, 1, 3)))
        assert p_kl(1, 1, rel, p) == pytest.approx(p_kl_oracle(1, 1, rel, p), abs=1e-7)

    def test_rotation_invariance(self, params, rng):
        for k, l in ((0, 2), (1, 1)):
            for _ in range(5):
                rv, pv = rng.uniform(-1, 1, (2, 3))
                rot = random_rotation(rng)
                a = p_kl(k, l, PhasePoint(tuple(rv), tuple(pv)), params)
                b = p_kl(k, l, PhasePoint(tuple(rot @ rv), tuple(rot @ pv)), params)
                assert a == pytest.approx(b, abs=1e-12)

    def test_nonnegativity_on_grid(self, params):
        rs = np.linspace(0, 3, 20)
        ps = np.linspace(0, 3, 20)
        ths = np.linspace(0, math.pi / 2, 5)
        pts = [
            PhasePoint.from_invariants(r, p, th)
            for r in rs for p in ps for th in ths
        ]
        rel_r = np.array([pt.r_vec for pt in pts])
        rel_p = np.array([pt.p_vec for pt in pts])
        probs = p_kl_batch(LEVELS_N3, rel_r, rel_p, params)
        for k, l in LEVELS_N3:
            assert float(np.min(probs[(k, l)])) >= -1e-12

    def test_imaginary_residue_small(self, params, rng):
        from oscoal.coalescence import _p_kl_complex

        rel = PhasePoint(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-1, 1, 3)))
        assert abs(_p_kl_complex(1, 1, rel, params).imag) < 1e-12

    def test_batch_matches_scalar(self, params, rng):
        rel_r = rng.uniform(-1, 1, (6, 3))
        rel_p = rng.uniform(-1, 1, (6, 3))
        batch = p_kl_batch(LEVELS_N3, rel_r, rel_p, params)
        for k, l in LEVELS_N3:
            for i in range(6):
                rel = PhasePoint(tuple(rel_r[i]), tuple(rel_p[i]))
                assert batch[(k, l)][i] == pytest.approx(p_kl(k, l, rel, params), abs=1e-14)


class TestClosedForms:
    def test_p01_at_v1(self):
        assert p_kl_closed(0, 1, 1.0, 0.3) == pytest.approx(math.exp(-1), rel=1e-14)
        assert p_kl_closed(0, 1, 1.0, 0.7) == pytest.approx(0.3678794412, abs=1e-10)

    def test_maximal_angular_momentum_kills_radial(self):
        for v in (0.5, 1.0, 2.5):
            assert p_kl_closed(1, 0, v, v * v) == pytest.approx(0.0, abs=1e-16)

    def test_p03_formula_evaluation(self, params):
        got = p_kl_closed(0, 3, 2.0, 1.0)
        assert got == pytest.approx(math.exp(-2) * (0.4 * 8 + 0.6 * 2) / 6, rel=1e-14)
        assert got == pytest.approx(0.09924587437351598, rel=1e-12)
        # cross-check against the factorized route at a matching point
        rel = PhasePoint.from_invariants(math.sqrt(2 + math.sqrt(3)), math.sqrt(2 - math.sqrt(3)),
                                         math.pi / 2)
        v, t = v_and_t(rel.r_vec, rel.p_vec, params)
        assert (v, t) == (pytest.approx(2.0), pytest.approx(1.0))
        assert p_kl(0, 3, rel, params) == pytest.approx(got, abs=1e-13)

    def test_invalid_state_rejected(self):
        with pytest.raises(ValueError, match="closed form"):
            p_kl_closed(2, 0, 1.0, 0.0)

    def test_unphysical_t_rejected(self):
        with pytest.raises(ValueError, match="violated"):
            p_kl_closed(0, 2, 1.0, 1.5)


class TestPoissonSum:
    def test_shell_zero(self, params):
        rel = PhasePoint((0.4, 0.1, -0.2), (0.3, -0.5, 0.2))
        v, _ = v_and_t(rel.r_vec, rel.p_vec, params)
        assert poisson_sum(0, rel, params) == pytest.approx(math.exp(-v), rel=1e-13)

    def test_n2_at_v1_is_t_independent(self, params):
        for th in (0.0, 0.4, math.pi / 2):
            rel = PhasePoint.from_invariants(1.0, 1.0, th)
            assert poisson_sum(2, rel, params) == pytest.approx(math.exp(-1) / 2, abs=1e-13)

    def test_n3_formula(self, params):
        # point realizing v = 1.5, t = 0.8
        rel = PhasePoint((1.0, 0, 0), (1.0954451150103321, 0.8944271909999159, 0))
        v, t = v_and_t(rel.r_vec, rel.p_vec, params)
        assert (v, t) == (pytest.approx(1.5), pytest.approx(0.8))
        assert poisson_sum(3, rel, params) == pytest.approx(
            math.exp(-1.5) * 1.5**3 / 6, abs=1e-12
        )

    def test_poisson_rule_random_points(self, params, rng):
        for _ in range(25):
            rv, pv = rng.uniform(-1.5, 1.5, (2, 3))
            rel = PhasePoint(tuple(rv), tuple(pv))
            v, _ = v_and_t(rv, pv, params)
            for N in range(5):
                assert poisson_sum(N, rel, params) == pytest.approx(
                    math.exp(-v) * v**N / math.factorial(N), abs=1e-10
                )

    def test_completeness(self, params):
        rel = PhasePoint.from_invariants(1.2, 1.1, 0.7)
        v, _ = v_and_t(rel.r_vec, rel.p_vec, params)
        assert v <= 2.0
        total = sum(poisson_sum(N, rel, params) for N in range(13))
        assert abs(total - 1.0) <= 1e-6

    def test_requires_zeta_one(self):
        p = OscParams.from_zeta(1.0, 2.0)
        with pytest.raises(ValueError, match="zeta"):
            poisson_sum(1, PhasePoint((1, 0, 0), (0, 1, 0)), p)


class TestThetaDependence:
    def test_fig3_monotonicity_and_endpoints(self, params):
        thetas = np.linspace(0, math.pi / 2, 41)
        p03 = [p_kl(0, 3, PhasePoint.from_invariants(1, 1, th), params) for th in thetas]
        p11 = [p_kl(1, 1, PhasePoint.from_invariants(1, 1, th), params) for th in thetas]
        assert all(b >= a - 1e-14 for a, b in zip(p03, p03[1:]))
        assert all(b <= a + 1e-14 for a, b in zip(p11, p11[1:]))
        # the two states exhaust the N = 3 shell at v = 1
        for a, b in zip(p03, p11):
            assert a + b == pytest.approx(math.exp(-1) / 6, abs=1e-10)


class TestMomentumOverlap:
    def test_peak_value(self, params):
        d = params.delta
        peak = j_overlap((0.2, 0.1, 0.0), (0.2, 0.1, 0.0), d, params.hbar)
        assert peak == pytest.approx(d**3 / math.pi**1.5, rel=1e-14)
        assert peak == pytest.approx(0.02244839026564582, rel=1e-13)

    def test_normalization(self, params):
        # gaussian integral over P_f, exact by Gauss-Hermite
        t, w = np.polynomial.hermite.hermgauss(8)
        d, hbar = params.delta, params.hbar
        scale = hbar / d
        total = 0.0
        for i in range(8):
            for j in range(8):
                for k in range(8):
                    pf = np.array([t[i], t[j], t[k]]) * scale
                    total += (
                        w[i] * w[j] * w[k]
                        * j_overlap((0, 0, 0), tuple(pf), d, hbar)
                        * math.exp(t[i] ** 2 + t[j] ** 2 + t[k] ** 2)
                    )
        assert total * scale**3 == pytest.approx(1.0, rel=1e-12)

    def test_differential_recovers_p_kl(self, params):
        w1 = WavePacket((0.5, 0, 0), (0.2, 0.4, 0), params.delta)
        w2 = WavePacket((0, 0.3, 0), (-0.2, 0.1, 0.5), params.delta)
        rel = PhasePoint.from_packets(w1, w2)
        k, l = 0, 1
        # integral over P_f of J is one, so sum_m of the densities integrates
        # to p_kl; evaluate the P_f integral by Gauss-Hermite around P_i
        p_i = np.array(w1.centroid_p) + np.array(w2.centroid_p)
        t, w = np.polynomial.hermite.hermgauss(6)
        d, hbar = params.delta, params.hbar
        scale = hbar / d
        total = 0.0
        for m in range(-l, l + 1):
            for i in range(6):
                for j in range(6):
                    for s in range(6):
                        pf = p_i + np.array([t[i], t[j], t[s]]) * scale
                        total += (
                            w[i] * w[j] * w[s]
                            * p_klm_differential(k, l, m, tuple(pf), (w1, w2), params)
                            * math.exp(t[i] ** 2 + t[j] ** 2 + t[s] ** 2)
                        )
        total *= scale**3
        assert total == pytest.approx(p_kl(k, l, rel, params), rel=1e-10)

    def test_delta_limit_peak(self, params):
        w1 = WavePacket((0, 0, 0), (0.3, 0, 0), params.delta)
        w2 = WavePacket((0.4, 0, 0), (-0.1, 0, 0), params.delta)
        dens = p_klm_differential(0, 0, 0, (0.2, 0.0, 0.0), (w1, w2), params)
        rel = PhasePoint.from_packets(w1, w2)
        assert dens == pytest.approx(
            j_overlap((0.2, 0, 0), (0.2, 0, 0), params.delta) * p_klm(0, 0, 0, rel, params),
            rel=1e-14,
        )


class TestShellStates:
    def test_enumeration(self):
        assert shell_states(0) == [(0, 0)]
        assert shell_states(3) == [(0, 3), (1, 1)]
        assert shell_states(4) == [(0, 4), (1, 2), (2, 0)]
