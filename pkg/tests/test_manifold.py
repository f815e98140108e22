"""Tests for phasesync.manifold: tangent geometry, second-order tools, ascent."""

import numpy as np
import pytest

from oracles import jacobi_eigvalsh
from phasesync import linalg
from phasesync._rng import generator, stream_seed, uniform_phases
from phasesync.estimators import (
    GpmConfig,
    certificate_matrix,
    certify,
    choose_alpha,
    cost,
    eigenvector_estimator,
    fixed_point_residual,
    gpm_run,
)
from phasesync.manifold import (
    hessian_form,
    retract,
    riemannian_ascent,
    riemannian_gradient,
    second_order_check,
    sign_flip_audit,
    tangent_project,
)
from phasesync.model import assemble_instance, distance, hermitianize


def planted(n, sigma, seed):
    return assemble_instance(n, sigma, seed)


def rank_one(z):
    return hermitianize(np.outer(z, np.conj(z)))


def random_point(n, seed):
    return uniform_phases(n, generator(seed))


def random_tangent(x, seed):
    t = generator(seed).standard_normal(x.shape[0])
    return 1j * t * x


def noise_opnorm(instance):
    delta = instance.data - np.outer(instance.signal, np.conj(instance.signal))
    vals = np.linalg.eigvalsh(delta)
    return max(abs(vals[0]), abs(vals[-1]))


class TestTangentProject:
    def test_radial_direction_is_removed(self):
        x = random_point(20, 700)
        out = tangent_project(x, x.copy())
        assert np.abs(out).max() <= 1e-14

    def test_rotational_direction_is_kept(self):
        x = random_point(20, 701)
        out = tangent_project(x, 1j * x)
        assert np.abs(out - 1j * x).max() <= 1e-15

    def test_idempotent(self):
        x = random_point(30, 702)
        u = generator(703).standard_normal(30) + 1j * generator(704).standard_normal(30)
        once = tangent_project(x, u)
        twice = tangent_project(x, once)
        assert np.abs(twice - once).max() <= 1e-13

    def test_output_is_tangent(self):
        x = random_point(30, 705)
        u = generator(706).standard_normal(30) + 1j * generator(707).standard_normal(30)
        out = tangent_project(x, u)
        assert np.abs(np.real(out * np.conj(x))).max() <= 1e-13

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            tangent_project(random_point(4, 708), np.ones(5, dtype=complex))


class TestRiemannianGradient:
    def test_vanishes_at_planted_optimum(self):
        inst = planted(60, 0.0, 710)
        g = riemannian_gradient(inst.data, inst.signal)
        assert np.linalg.norm(g) <= 1e-10

    def test_gradient_is_tangent(self):
        inst = planted(40, 0.9, 711)
        x = random_point(40, 712)
        g = riemannian_gradient(inst.data, x)
        assert np.abs(np.real(g * np.conj(x))).max() <= 1e-12 * 40

    def test_equals_projected_euclidean_gradient(self):
        inst = planted(35, 0.7, 713)
        x = random_point(35, 714)
        g = riemannian_gradient(inst.data, x)
        proj = tangent_project(x, 2.0 * (inst.data @ x))
        assert np.abs(g - proj).max() <= 1e-11 * np.abs(g).max()

    def test_certificate_link(self):
        # grad f(x) = -2 S(x) x for the same data matrix
        for k in range(20):
            inst = planted(25, 1.2, stream_seed(715, k))
            x = random_point(25, stream_seed(716, k))
            g = riemannian_gradient(inst.data, x)
            sx = certificate_matrix(inst.data, x) @ x
            assert np.linalg.norm(g + 2.0 * sx) <= 1e-11 * 25

    def test_finite_difference_directional_derivative(self):
        eps = 1e-6
        for k in range(10):
            inst = planted(25, 0.8, stream_seed(717, k))
            x = random_point(25, stream_seed(718, k))
            v = random_tangent(x, stream_seed(719, k))
            g = riemannian_gradient(inst.data, x)
            ip = float(np.vdot(g, v).real)
            fd = (cost(inst.data, retract(x, eps * v))
                  - cost(inst.data, retract(x, -eps * v))) / (2.0 * eps)
            assert abs(fd - ip) <= 1e-4 * abs(ip)


class TestRetract:
    def test_zero_step_keeps_point(self):
        x = random_point(25, 720)
        out = retract(x, np.zeros(25, dtype=complex))
        assert np.abs(out - x).max() <= 1e-15

    def test_output_has_unit_moduli(self):
        x = random_point(25, 721)
        v = random_tangent(x, 722)
        out = retract(x, v)
        assert np.abs(np.abs(out) - 1.0).max() <= 1e-14

    def test_single_phase_closed_form(self):
        # retracting i*h from 1 lands at angle arctan(h)
        h = 0.3
        out = retract(np.array([1.0 + 0j]), np.array([1j * h]))
        assert abs(out[0] - np.exp(1j * np.arctan(h))) <= 1e-15

    def test_second_order_agreement_with_line_step(self):
        x = random_point(30, 723)
        v = random_tangent(x, 724)
        errs = [np.linalg.norm(retract(x, e * v) - (x + e * v))
                for e in (1e-2, 1e-3, 1e-4)]
        slopes = (np.log10(errs[0] / errs[1]), np.log10(errs[1] / errs[2]))
        assert 1.9 <= slopes[0] <= 2.1
        assert 1.9 <= slopes[1] <= 2.1


class TestHessianForm:
    def test_planted_optimum_closed_form(self):
        # noiseless data at the signal: H = n I - ones
        n = 6
        z = planted(n, 0.0, 730).signal
        h = hessian_form(rank_one(z), z).h
        expected = n * np.eye(n) - np.ones((n, n))
        assert np.abs(h - expected).max() <= 1e-12 * n

    def test_planted_optimum_spectrum(self):
        n = 8
        z = planted(n, 0.0, 731).signal
        vals = jacobi_eigvalsh(hessian_form(rank_one(z), z).h)
        assert abs(vals[0]) <= 1e-9
        assert np.abs(vals[1:] - n).max() <= 1e-9

    def test_diagonal_data_gives_zero_form(self):
        c = np.diag(np.arange(1.0, 7.0)).astype(complex)
        x = random_point(6, 732)
        assert np.abs(hessian_form(c, x).h).max() <= 1e-13 * 6

    def test_form_is_symmetric(self):
        inst = planted(30, 1.0, 733)
        h = hessian_form(inst.data, random_point(30, 734)).h
        assert np.abs(h - h.T).max() <= 1e-13 * 30

    def test_quadratic_form_matches_certificate_matrix(self):
        # t' H t = Re(v* S v) with v = i t . x, relative tolerance
        for k in range(10):
            inst = planted(20, 0.9, stream_seed(735, k))
            x = random_point(20, stream_seed(736, k))
            t = generator(stream_seed(737, k)).standard_normal(20)
            h = hessian_form(inst.data, x).h
            quad = float(t @ h @ t)
            v = 1j * t * x
            s = certificate_matrix(inst.data, x)
            ref = float(np.vdot(v, s @ v).real)
            assert abs(quad - ref) <= 1e-11 * (1.0 + abs(ref))

    def test_minimum_eigenvalue_matches_oracle(self):
        inst = planted(10, 0.8, 738)
        h = hessian_form(inst.data, random_point(10, 739)).h
        oracle_min = jacobi_eigvalsh(h)[0]
        solver_min = linalg.lambda_min(h.astype(np.complex128), tol=1e-12, seed=740)
        assert abs(solver_min - oracle_min) <= 1e-8 * (1.0 + abs(oracle_min))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hessian_form(np.eye(3, dtype=complex), np.ones(4, dtype=complex))


class TestSecondOrderCheck:
    def test_planted_optimum_passes_both_orders(self):
        inst = planted(30, 0.0, 750)
        first, second, min_h = second_order_check(inst.data, inst.signal)
        assert first and second
        assert abs(min_h) <= 1e-8

    def test_orthogonal_saddle_fails_second_order(self):
        # x orthogonal to z is critical for zz* with H = -cos matrix,
        # lambda_min = -n/2
        n = 8
        z = planted(n, 0.0, 751).signal
        x = z * (1j) ** (np.arange(n) % 4)
        first, second, min_h = second_order_check(rank_one(z), x)
        assert first
        assert not second
        assert abs(min_h + n / 2.0) <= 1e-8

    def test_far_point_fails_first_order(self):
        inst = planted(30, 0.5, 752)
        first, second, _ = second_order_check(inst.data, random_point(30, 753))
        assert not first
        assert not second

    def test_converged_gpm_output_passes(self):
        inst = planted(100, 1.0, 103)
        run = gpm_run(inst.data, eigenvector_estimator(inst.data),
                      config=GpmConfig(stop_ratio_gap=1e-14))
        assert run.converged
        first, second, min_h = second_order_check(inst.data, run.estimate)
        assert first and second
        assert min_h >= -1e-6 * 100

    def test_invariant_under_real_diagonal_shift(self):
        # S(x) and the form drop the diagonal, so verdicts ignore C - tI
        inst = planted(20, 0.6, 754)
        x = random_point(20, 755)
        shifted = inst.data - 5.0 * np.eye(20)
        assert np.real(np.diagonal(shifted)).min() < 0
        a = second_order_check(inst.data, x)
        b = second_order_check(shifted, x)
        assert a[0] == b[0] and a[1] == b[1]
        assert abs(a[2] - b[2]) <= 1e-9 * (1.0 + abs(a[2]))

    def test_tolerance_validation(self):
        inst = planted(5, 0.1, 756)
        with pytest.raises(ValueError):
            second_order_check(inst.data, inst.signal, tol=0.0)


class TestRiemannianAscent:
    def test_noiseless_recovery(self):
        inst = planted(60, 0.0, 760)
        res = riemannian_ascent(inst.data, random_point(60, 761))
        assert res.converged
        assert not res.line_search_failed
        assert distance(inst.signal, res.estimate) <= 1e-4

    def test_two_phase_analytic_cost(self):
        # optimum of [[1, c], [conj(c), 1]] has cost 2 + 2|c|
        rng = generator(762)
        c12 = complex(rng.standard_normal(), rng.standard_normal())
        c = np.array([[1.0, c12], [np.conj(c12), 1.0]])
        res = riemannian_ascent(c, random_point(2, 763))
        assert abs(cost(c, res.estimate) - (2.0 + 2.0 * abs(c12))) <= 1e-8

    def test_random_start_reaches_certified_point(self):
        inst = planted(100, 1.0, 764)
        res = riemannian_ascent(inst.data, random_point(100, 765))
        assert res.converged
        cert = certify(inst.data, res.estimate, tolerance=1e-9)
        assert cert.passed

    def test_critical_start_returns_immediately(self):
        inst = planted(30, 0.0, 766)
        res = riemannian_ascent(inst.data, inst.signal)
        assert res.iterations == 0
        assert res.converged
        assert res.cost_trace.shape == (1,)
        assert np.array_equal(res.estimate, inst.signal)

    def test_trace_monotone_and_consistent(self):
        inst = planted(50, 1.1, 767)
        res = riemannian_ascent(inst.data, random_point(50, 768))
        trace = res.cost_trace
        assert trace.shape == (res.iterations + 1,)
        gains = np.diff(trace)
        assert (gains >= -1e-9 * np.abs(trace[:-1])).all()
        assert abs(trace[-1] - cost(inst.data, res.estimate)) <= 1e-10 * abs(trace[-1])

    def test_converged_run_meets_gradient_target(self):
        inst = planted(40, 0.8, 769)
        res = riemannian_ascent(inst.data, random_point(40, 770), grad_tol=1e-7)
        assert res.converged
        assert res.grad_stat_final <= 1e-7
        g = riemannian_gradient(inst.data, res.estimate)
        assert np.linalg.norm(g) / 40**2 <= 1e-7

    def test_iteration_budget_exhaustion_is_flagged(self):
        inst = planted(40, 1.0, 771)
        res = riemannian_ascent(inst.data, random_point(40, 772), max_iter=1)
        assert res.iterations == 1
        assert not res.converged

    def test_deterministic(self):
        inst = planted(40, 1.0, 773)
        a = riemannian_ascent(inst.data, random_point(40, 774))
        b = riemannian_ascent(inst.data, random_point(40, 774))
        assert np.array_equal(a.estimate, b.estimate)
        assert a.iterations == b.iterations
        assert np.array_equal(a.cost_trace, b.cost_trace)

    def test_parameter_validation(self):
        inst = planted(5, 0.1, 775)
        x0 = random_point(5, 776)
        with pytest.raises(ValueError):
            riemannian_ascent(inst.data, x0, grad_tol=0.0)
        with pytest.raises(ValueError):
            riemannian_ascent(inst.data, x0, max_iter=-1)


class TestSignFlipAudit:
    def test_zero_at_planted_optimum(self):
        z = planted(4, 0.0, 780).signal
        assert abs(sign_flip_audit(rank_one(z), z)) <= 1e-9

    def test_ascent_output_survives_audit(self):
        inst = planted(8, 0.4, 781)
        res = riemannian_ascent(inst.data, random_point(8, 782), grad_tol=1e-8)
        audit = sign_flip_audit(inst.data, res.estimate)
        assert audit >= -1e-8 * 8**2

    def test_non_critical_point_can_fail(self):
        # audit is cost minus the best flip, so it is never meaningfully
        # positive and generically negative away from critical points
        inst = planted(8, 0.4, 783)
        audit = sign_flip_audit(inst.data, random_point(8, 784))
        assert np.isfinite(audit)
        assert audit <= 1e-9

    def test_large_n_rejected(self):
        inst = planted(21, 0.1, 785)
        with pytest.raises(ValueError):
            sign_flip_audit(inst.data, inst.signal)


class TestLandscapeInvariants:
    def test_tight_ascent_is_gpm_fixed_point(self):
        # second-order ascent outputs are near fixed points of the shifted
        # power step: residual <= 1e-6 l1
        for k in range(3):
            inst = planted(50, 0.7, stream_seed(790, k))
            res = riemannian_ascent(inst.data, random_point(50, stream_seed(791, k)),
                                    grad_tol=1e-8)
            first, second, _ = second_order_check(inst.data, res.estimate)
            assert first and second
            ct = inst.data + choose_alpha(inst.data, GpmConfig()) * np.eye(50)
            resid = fixed_point_residual(ct, res.estimate)
            l1 = float(np.abs(ct @ res.estimate).sum())
            assert resid <= 1e-6 * l1

    def test_second_order_points_are_near_signal_at_low_noise(self):
        # ||noise|| <= n/13 and nonnegative diagonal force
        # dist^2 <= 8 ||noise|| + 1e-6 for second-order critical points
        n = 50
        for k in range(3):
            inst = planted(n, 0.2, stream_seed(792, k))
            dn = noise_opnorm(inst)
            assert dn <= n / 13.0
            assert np.real(np.diagonal(inst.data)).min() >= 0.0
            res = riemannian_ascent(inst.data, random_point(n, stream_seed(793, k)),
                                    grad_tol=1e-8)
            first, second, _ = second_order_check(inst.data, res.estimate)
            assert second
            d = distance(inst.signal, res.estimate)
            assert d * d <= 8.0 * dn + 1e-6

    def test_finite_difference_curvature_at_critical_points(self):
        # along the retraction path f''(0) = -2 t'Ht; compare at 10 percent
        # when the form is bounded away from zero
        n = 40
        inst = planted(n, 0.5, 794)
        res = riemannian_ascent(inst.data, random_point(n, 795), grad_tol=1e-8)
        x = res.estimate
        h = hessian_form(inst.data, x).h
        fx = cost(inst.data, x)
        eps = 1e-4
        rng = generator(796)
        checked = 0
        for _ in range(6):
            t = rng.standard_normal(n)
            t /= np.linalg.norm(t)
            quad = float(t @ h @ t)
            if abs(quad) < 0.1 * n:
                continue
            fp = cost(inst.data, retract(x, 1j * eps * t * x))
            fm = cost(inst.data, retract(x, -1j * eps * t * x))
            fd = (fp - 2.0 * fx + fm) / eps**2
            assert np.sign(fd) == np.sign(-quad)
            assert abs(fd - (-2.0 * quad)) <= 0.1 * abs(2.0 * quad)
            checked += 1
        assert checked >= 3

    def test_second_order_implies_certificate_in_low_noise_regime(self):
        # ||noise|| <= n^(2/3)/14 and ||noise z||_inf <= n^(2/3) sqrt(log n)/14:
        # every second-order ascent output passes the 1e-9 certificate
        n = 50
        bound = n ** (2.0 / 3.0) / 14.0
        row_bound = n ** (2.0 / 3.0) * np.sqrt(np.log(n)) / 14.0
        for k in range(4):
            inst = planted(n, 0.06, stream_seed(797, k))
            delta = inst.data - np.outer(inst.signal, np.conj(inst.signal))
            assert noise_opnorm(inst) <= bound
            assert np.abs(delta @ inst.signal).max() <= row_bound
            res = riemannian_ascent(inst.data, random_point(n, stream_seed(798, k)),
                                    grad_tol=1e-8)
            first, second, _ = second_order_check(inst.data, res.estimate)
            if not second:
                continue
            cert = certify(inst.data, res.estimate, tolerance=1e-9)
            assert cert.passed
