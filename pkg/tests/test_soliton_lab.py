from __future__ import annotations

import numpy as np
import pytest

from egf_lab.flow_engine import UmbilicalProfile
from egf_lab.soliton_lab import (
    BiregularGrid,
    biregular_normal_curvature,
    check_biregular_surface,
    check_normal_soliton,
    check_trace_identity,
    classify_ricci_soliton,
    conformal_killing_factor,
    estimate_eps_leaf,
    mu_continuity_gap,
    mu_of_lambda,
)
from egf_lab.sym_curvature import (
    PrincipalCurvatureSpectrum,
    assemble_h_eigen,
    psi_of_lambda,
)

from oracles import (
    canonical_spectrum_key,
    enumerate_ricci_soliton_spectra,
    trapezoid_mean,
)
from test_flow_engine import functional_affine, functional_square, sine_profile
from test_sym_curvature import (
    functional_b1,
    functional_ext_ricci,
    functional_tau1_minus_c,
)


def constant_profile(value, grid=64):
    return UmbilicalProfile.from_function(lambda s: value + 0 * s, grid, 1.0)


class TestMuOfLambda:
    def test_b1_constant_minus_n_over_2(self):
        F = functional_b1(2)
        for lam in (-1.0, 0.3, 2.0):
            assert mu_of_lambda(F, lam) == pytest.approx(-1.0, abs=1e-12)
        assert mu_of_lambda(F, 0.0) == pytest.approx(-1.0, abs=1e-9)

    def test_constant_psi_gives_zero(self):
        from egf_lab.sym_curvature import FlowFunctional
        F = FlowFunctional(2, (lambda tau: np.full(tau.shape[:-1], 3.0),
                               lambda tau: np.zeros(tau.shape[:-1])))
        for lam in (0.0, 0.5, -2.0):
            assert mu_of_lambda(F, lam) == pytest.approx(0.0, abs=1e-12)

    def test_affine_minus_two_is_identically_one(self):
        # psi(lam) = -2 lam + c on curve leaves (n = 1) gives mu = 1 exactly
        F = functional_affine(1, -2.0, 0.0)
        lam = np.array([-3.0, -1e-8, 0.0, 1e-8, 0.2, 5.0])
        mu = mu_of_lambda(F, lam)
        assert np.all(mu == 1.0)
        for c in (1.0, -3.0, 0.7):
            Fc = functional_affine(1, -2.0, c)
            mu = np.asarray(mu_of_lambda(Fc, lam))
            np.testing.assert_allclose(mu, 1.0, atol=1e-13)

    def test_continuity_gap(self):
        for F in (functional_b1(2), functional_square(2),
                  functional_affine(1, -2.0, 0.3)):
            assert mu_continuity_gap(F) <= 1e-4

    def test_square_slope(self):
        F = functional_square(2)  # mu = -(n/2) lam
        assert mu_of_lambda(F, 0.5) == pytest.approx(-0.5)
        assert mu_of_lambda(F, 0.0) == pytest.approx(0.0, abs=1e-9)


class TestNormalSoliton:
    def test_constant_profile_is_soliton(self):
        F = functional_b1(2)
        rep = check_normal_soliton(constant_profile(1.3), F)
        assert rep.verdict == "soliton"
        assert rep.eps_used == pytest.approx(psi_of_lambda(F, 0.0))
        assert rep.n_lambda_norm == 0.0
        assert any("alternative" in note for note in rep.notes)

    def test_constant_profile_explicit_eps_via_x_zero(self):
        F = functional_b1(2)
        C = 1.3
        rep = check_normal_soliton(constant_profile(C), F, eps=psi_of_lambda(F, C))
        assert rep.verdict == "soliton"
        assert rep.residual_linf["structure_x_zero"] <= rep.tol

    def test_zero_profile_is_soliton(self):
        F = functional_tau1_minus_c(2, 0.5)
        rep = check_normal_soliton(constant_profile(0.0), F)
        assert rep.verdict == "soliton"
        assert rep.residual_linf["structure"] == pytest.approx(0.0, abs=1e-14)

    def test_nonconstant_profile_is_not(self):
        F = functional_b1(2)
        rep = check_normal_soliton(sine_profile(grid=128, amplitude=0.5), F)
        assert rep.verdict == "not_soliton"
        assert rep.n_lambda_norm > rep.tol

    def test_structure_residual_vanishes_identically_with_auto_eps(self):
        # the mu(lam) ansatz kills the (2/n)-form structure equation for any
        # profile; constancy of lam is the only remaining condition
        F = functional_square(3)
        rep = check_normal_soliton(sine_profile(grid=96, amplitude=0.7, mean=0.2), F)
        assert rep.residual_linf["structure"] <= 1e-12
        assert rep.verdict == "not_soliton"

    def test_traced_normalization_agrees_only_for_n1(self):
        prof = sine_profile(grid=96, amplitude=0.4, mean=1.0)
        rep1 = check_normal_soliton(prof, functional_affine(1, 2.0, 0.0))
        assert rep1.residual_linf["structure_traced"] <= 1e-10
        rep2 = check_normal_soliton(prof, functional_affine(2, 2.0, 0.0))
        assert rep2.residual_linf["structure_traced"] > 1e-3

    def test_equivalence_corpus(self):
        # verdict must match constancy of lam exactly, over a mixed corpus of
        # profiles and psi' != 0 functionals
        rng = np.random.default_rng(42)
        funcs = [functional_b1(2), functional_b1(3),
                 functional_tau1_minus_c(2, 1.0),
                 functional_affine(1, -2.0, 0.5), functional_affine(3, 0.7, -0.2)]
        mistakes = 0
        for i in range(50):
            F = funcs[i % len(funcs)]
            if i % 2 == 0:
                p = constant_profile(float(rng.uniform(-2, 2)))
                expect = "soliton"
            else:
                p = sine_profile(
                    grid=64,
                    amplitude=float(rng.uniform(0.1, 1.0)),
                    mean=float(rng.uniform(-1, 1)),
                )
                expect = "not_soliton"
            rep = check_normal_soliton(p, F)
            constant = rep.n_lambda_norm <= rep.tol
            if rep.verdict != expect or constant != (expect == "soliton"):
                mistakes += 1
        assert mistakes == 0

    def test_degenerate_on_singular_functional(self):
        from egf_lab.sym_curvature import FlowFunctional
        with np.errstate(divide="ignore", invalid="ignore"):
            F = FlowFunctional(2, (lambda tau: 1.0 / tau[..., 0],
                                   lambda tau: np.zeros(tau.shape[:-1])))
            rep = check_normal_soliton(constant_profile(0.0), F)
        assert rep.verdict == "degenerate"


class TestConformalKilling:
    def test_geodesic_killing(self):
        F = functional_tau1_minus_c(2, 1.0)  # psi(0) = f0(0) = -1
        factor, killing, homothety = conformal_killing_factor(
            constant_profile(0.0), F, eps=-1.0
        )
        assert killing and homothety
        np.testing.assert_allclose(factor, 0.0, atol=1e-14)

    def test_geodesic_homothety(self):
        F = functional_tau1_minus_c(2, 1.0)
        factor, killing, homothety = conformal_killing_factor(
            constant_profile(0.0), F, eps=0.5
        )
        assert homothety and not killing
        np.testing.assert_allclose(factor, -1.5)

    def test_nonconstant_conformal_only(self):
        F = functional_b1(2)
        factor, killing, homothety = conformal_killing_factor(
            sine_profile(grid=64, amplitude=0.5), F, eps=0.0
        )
        assert not killing and not homothety


class TestTraceIdentity:
    def test_umbilical_balance(self):
        F = functional_b1(3)
        lam = 0.8
        spec = PrincipalCurvatureSpectrum((lam,) * 3)
        res = check_trace_identity(spec, F, eps=psi_of_lambda(F, lam), divX=0.0)
        assert res == pytest.approx(0.0, abs=1e-12)

    def test_zero_spectrum(self):
        F = functional_tau1_minus_c(2, 2.0)
        res = check_trace_identity(
            PrincipalCurvatureSpectrum((0.0, 0.0)), F, eps=-2.0, divX=0.0
        )
        assert res == pytest.approx(0.0, abs=1e-14)

    def test_extrinsic_ricci_value(self):
        F = functional_ext_ricci(2)
        spec = PrincipalCurvatureSpectrum((1.0, 2.0))
        # tr h = -2 (tau1^2 - tau2) = -8
        assert np.sum(assemble_h_eigen(spec, F)) == pytest.approx(-8.0)
        res = check_trace_identity(spec, F, eps=1.0, divX=0.5)
        assert res == pytest.approx(-8.0 - 2.0 * 1.0 - 2.0 * 0.5)

    def test_normal_field_divergence_closes_the_identity(self):
        # with X = mu N the leafwise divergence is -n mu lam and the
        # structure tensor eps g - 2 mu b1 traces to n eps + 2 div X exactly
        n, lam, eps = 4, 0.6, 0.25
        mu = 1.7
        spec = PrincipalCurvatureSpectrum((lam,) * n)
        h_eigen = np.full(n, eps - 2.0 * mu * lam)
        div_x = -n * mu * lam
        residual = float(np.sum(h_eigen)) - n * eps - 2.0 * div_x
        assert residual == pytest.approx(0.0, abs=1e-12)


class TestEpsLeaf:
    def test_constant_trace(self):
        assert estimate_eps_leaf(np.full(10, 6.0), np.ones(10), 3) == pytest.approx(2.0)

    def test_umbilical_leaf(self):
        F = functional_b1(2)
        lam = 0.9
        trace = np.full(32, 2 * psi_of_lambda(F, lam))
        w = np.random.default_rng(0).uniform(0.5, 1.5, 32)
        assert estimate_eps_leaf(trace, w, 2) == pytest.approx(psi_of_lambda(F, lam))

    def test_sine_average_against_quadrature_oracle(self):
        s = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
        trace = 2.0 * (1.0 + np.sin(s))
        w = np.ones_like(s)
        got = estimate_eps_leaf(trace, w, 2)
        assert got == pytest.approx(trapezoid_mean(trace, w) / 2, rel=1e-12)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            estimate_eps_leaf(np.ones(4), np.zeros(4), 2)


class TestBiregular:
    def test_flat_torus(self):
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: 1.0, shape=(32, 32),
            periodic0=True, periodic1=True,
        )
        rep = check_biregular_surface(g, F, eps=psi_of_lambda(F, 0.0))
        assert rep.verdict == "soliton"
        assert all(v <= 1e-14 for v in rep.residual_linf.values())

    def test_exponential_metric_unit_curvature(self):
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: np.exp(-2.0 * u), shape=(64, 32),
        )
        lam = biregular_normal_curvature(g)
        np.testing.assert_allclose(lam, 1.0, atol=1e-10)
        rep = check_biregular_surface(g, F, eps=psi_of_lambda(F, 1.0))
        assert rep.verdict == "soliton"

    def test_mismatched_eps_rejected(self):
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: np.exp(-2.0 * u), shape=(64, 32),
        )
        rep = check_biregular_surface(g, F, eps=psi_of_lambda(F, 0.0))
        assert rep.verdict == "not_soliton"
        assert rep.residual_linf["R1_structure"] == pytest.approx(1.0, rel=1e-6)

    def test_leaf_independent_metric_is_geodesic(self):
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: 2.0 + np.sin(2 * np.pi * v),
            shape=(32, 64), periodic0=True, periodic1=True,
        )
        lam = biregular_normal_curvature(g)
        assert np.max(np.abs(lam)) <= 1e-12

    def test_nonzero_field_constraints(self):
        # X0 depending on x1 violates the leafwise-constancy constraint
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: 1.0,
            X0=lambda u, v: np.sin(2 * np.pi * v), X1=lambda u, v: 0.0,
            shape=(32, 32), periodic0=True, periodic1=True,
        )
        rep = check_biregular_surface(g, F, eps=psi_of_lambda(F, 0.0))
        assert rep.verdict == "not_soliton"
        assert rep.residual_linf["R2_X0_leafwise_constant"] > 1.0

    def test_metric_positivity_enforced(self):
        with pytest.raises(ValueError, match="positive"):
            BiregularGrid.from_functions(
                lambda u, v: 1.0, lambda u, v: u - 0.5, shape=(16, 16)
            )

    def test_auto_eps_picks_leaf_average(self):
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: np.exp(-2.0 * u), shape=(64, 32),
        )
        rep = check_biregular_surface(g, F, eps="auto")
        assert rep.eps_used == pytest.approx(1.0, abs=1e-9)
        assert rep.verdict == "soliton"


class TestSolitonCandidate:
    def test_dispatch_normal_scaled(self):
        from egf_lab.soliton_lab import SolitonCandidate
        F = functional_b1(2)
        rep = SolitonCandidate(constant_profile(0.9)).check(F)
        assert rep.verdict == "soliton"

    def test_dispatch_zero_field(self):
        from egf_lab.soliton_lab import SolitonCandidate
        F = functional_b1(2)
        C = 0.9
        cand = SolitonCandidate(constant_profile(C), "zero", psi_of_lambda(F, C))
        assert cand.check(F).verdict == "soliton"
        bad = SolitonCandidate(constant_profile(C), "zero", psi_of_lambda(F, C) + 1)
        assert bad.check(F).verdict == "not_soliton"

    def test_dispatch_biregular(self):
        from egf_lab.soliton_lab import SolitonCandidate
        F = functional_b1(1)
        g = BiregularGrid.from_functions(
            lambda u, v: 1.0, lambda u, v: np.exp(-2.0 * u), shape=(32, 32),
        )
        cand = SolitonCandidate(g, eps=psi_of_lambda(F, 1.0))
        assert cand.field_kind == "biregular"
        assert cand.check(F).verdict == "soliton"

    def test_leaf_conformal_killing_class(self):
        from egf_lab.soliton_lab import SolitonCandidate
        F = functional_tau1_minus_c(2, 1.0)
        # geodesic data with eps = psi(0): the leafwise field is Killing
        rep = SolitonCandidate(
            constant_profile(0.0), "leaf_conformal_killing", psi_of_lambda(F, 0.0)
        ).check(F)
        assert rep.verdict == "soliton"
        assert any("killing" in n for n in rep.notes)
        # mismatched eps turns it into a homothety
        rep2 = SolitonCandidate(
            constant_profile(0.0), "leaf_conformal_killing", 0.5
        ).check(F)
        assert any("homothety" in n for n in rep2.notes)

    def test_field_kind_validation(self):
        from egf_lab.soliton_lab import SolitonCandidate
        with pytest.raises(ValueError):
            SolitonCandidate(constant_profile(0.0), "biregular")


class TestRicciClassifier:
    def test_symmetric_split(self):
        cls = classify_ricci_soliton(4, 0.0, 1.0)
        assert cls.cpc
        two = [s for s in cls.spectra if s.kind == "two_root"]
        assert len(two) == 1
        np.testing.assert_allclose(two[0].roots, (1.0, -1.0))
        assert two[0].multiplicities == (2, 2)

    def test_negative_discriminant_refused(self):
        cls = classify_ricci_soliton(4, 0.0, -1.0)
        assert cls.discriminant == pytest.approx(-4.0)
        assert cls.spectra == ()
        assert not cls.cpc

    def test_no_admissible_spectrum(self):
        cls = classify_ricci_soliton(3, 1.0, 2.0)
        assert cls.spectra == ()

    def test_umbilical_branch(self):
        # k = 1 with multiplicity 3: tau1 = 3, r = k^2 (1 - n) = -2
        cls = classify_ricci_soliton(3, 3.0, -2.0)
        kinds = {s.kind for s in cls.spectra}
        assert "umbilical" in kinds
        um = next(s for s in cls.spectra if s.kind == "umbilical")
        assert um.roots == (1.0,)
        assert um.multiplicities == (3,)

    def test_totally_geodesic_at_origin(self):
        cls = classify_ricci_soliton(5, 0.0, 0.0)
        assert any(
            s.roots == (0.0,) and s.multiplicities == (5,) for s in cls.spectra
        )

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            classify_ricci_soliton(2, 0.0, 1.0)

    def test_reconstruction_invariants(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(3, 7))
            tau1 = float(rng.choice(np.arange(-5, 5.5, 0.5)))
            r = float(rng.choice(np.arange(-5, 5.5, 0.5)))
            cls = classify_ricci_soliton(n, tau1, r)
            for sp in cls.spectra:
                total = sum(m * v for v, m in zip(sp.roots, sp.multiplicities))
                assert total == pytest.approx(tau1, abs=1e-9)
                for root in sp.roots:
                    assert root * (root - tau1) == pytest.approx(r, abs=1e-9)
                assert sum(sp.multiplicities) == n

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_agreement_with_enumeration(self, n):
        grid = np.arange(-5.0, 5.5, 0.5)
        for tau1 in grid:
            for r in grid:
                expected = enumerate_ricci_soliton_spectra(n, float(tau1), float(r))
                cls = classify_ricci_soliton(n, float(tau1), float(r))
                got = {
                    canonical_spectrum_key(s.roots, s.multiplicities)
                    for s in cls.spectra
                }
                assert got == expected, (n, tau1, r)
