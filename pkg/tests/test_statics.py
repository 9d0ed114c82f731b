"""Static diagnostics tests: lambda estimation, reports, inequality, extension."""

import json

import numpy as np
import pytest

from plurigeo import statics as st
from plurigeo.families import MetricFamily
from plurigeo.grid import FormField, MetricField, perturb_with_potential, sample

from conftest import random_trig


class TestLambdaEstimate:
    def test_flat_zero(self, flat_field):
        lam, imag = st.lambda_estimate(flat_field)
        assert lam == 0.0 and imag == 0.0

    def test_torus_value_and_sign(self, torus_field):
        lam, imag = st.lambda_estimate(torus_field)
        q = 0.25 / (4 * 0.75**2)
        assert lam < 0
        assert abs(lam + q) < 2e-3  # stencil-scaled analytic value -q
        assert imag < 1e-12

    def test_kahler_near_zero_small_eps(self):
        for eps in (0.05, 0.1):
            field = sample(MetricFamily("kahler_potential", eps), (16, 4, 16, 4))
            lam, _ = st.lambda_estimate(field)
            assert abs(lam) <= 1e-10 * max(eps, 1)

    def test_scaling_inverse_linearity(self, torus_field):
        lam1, _ = st.lambda_estimate(torus_field)
        doubled = MetricField(torus_field.grid, 2.0 * torus_field.values)
        lam2, _ = st.lambda_estimate(doubled)
        assert abs(lam2 - 0.5 * lam1) <= 1e-10


class TestStaticReport:
    def test_flat_gaps_vanish(self, flat_field):
        for bundle in (np.diag([1.0, -1.0]), np.diag([1.0, 0.0]),
                       np.array([[1.0, 0.5], [0.5, -2.0]])):
            rep = st.static_report(flat_field, bundle)
            assert abs(rep.lambda_star) < 1e-12
            assert abs(rep.gap_wedge_volume) < 1e-10
            assert abs(rep.gap_degree_pairing) < 1e-10
            assert abs(rep.c1_squared) < 1e-10
            assert rep.residual_max < 1e-12

    def test_flat_bundle_degrees(self, flat_field):
        vol = (2 * np.pi) ** 4
        rep = st.static_report(flat_field, np.diag([1.0, -1.0]))
        assert abs(rep.deg_bundle) < 1e-9
        rep2 = st.static_report(flat_field, np.diag([1.0, 0.0]))
        assert abs(rep2.deg_bundle - vol) < 1e-8

    def test_torus_self_consistency(self, torus_field):
        rep = st.static_report(torus_field, np.diag([1.0, -1.0]))
        # d = 0 here, so the wedge/volume gap must equal -2 lambda Vol - 2 E_w
        expected = -2 * rep.lambda_star * rep.vol - 2 * rep.e_w
        assert abs(rep.gap_wedge_volume - expected) <= 1e-10 * max(1, abs(expected))
        assert rep.residual_l2 > 0  # the family is not static

    def test_non_hermitian_bundle_rejected(self, flat_field):
        with pytest.raises(ValueError, match="Hermitian"):
            st.static_report(flat_field, np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_json_roundtrip(self, tmp_path, flat_field):
        rep = st.static_report(flat_field, np.diag([1.0, -1.0]))
        p = tmp_path / "report.json"
        st.write_static_report(p, rep)
        data = json.loads(p.read_text())
        assert data["lambda_star"] == rep.lambda_star
        assert set(data) == set(rep.__dataclass_fields__)


class TestBuchdahl:
    def test_equality_for_psi_equal_omega(self, torus_field):
        r = st.buchdahl_check(torus_field, FormField.from_metric(torus_field))
        assert r.gap == 0.0

    def test_equality_case_potential(self, flat_field):
        grid = flat_field.grid
        x = grid.coords()
        f = 0.3 * (np.cos(x[0]) + np.sin(x[2]))
        psi = FormField(grid, 2.0 * flat_field.values + 2.0 * grid.complex_hessian(f))
        r = st.buchdahl_check(flat_field, psi)
        assert abs(r.gap) <= 1e-6 * r.scale

    def test_positive_gap_for_non_cohomologous(self, flat_field):
        other = sample(MetricFamily("torus_pluriclosed", 0.7), flat_field.grid.dims)
        r = st.buchdahl_check(flat_field, FormField.from_metric(other))
        assert r.gap > 0

    def test_rejects_non_pluriclosed(self, flat_field):
        x = flat_field.grid.coords()
        bad = flat_field.values.copy()
        bad[..., 0, 0] += 0.3 * np.cos(x[2])
        with pytest.raises(ValueError, match="pluriclosed"):
            st.buchdahl_check(flat_field, FormField(flat_field.grid, bad))

    def test_rejects_non_real(self, flat_field):
        bad = flat_field.values.astype(complex).copy()
        bad[..., 0, 1] += 0.5  # breaks hermiticity
        with pytest.raises(ValueError, match="real"):
            st.buchdahl_check(flat_field, FormField(flat_field.grid, bad))

    def test_seeded_family_nonnegative(self, flat_field):
        grid = flat_field.grid
        base = sample(MetricFamily("torus_pluriclosed", 0.4), grid.dims)
        rng = np.random.default_rng(42)
        for seed in range(20):
            alpha = rng.uniform(-2, 2)
            f = 0.2 * random_trig(grid, seed=1000 + seed)
            psi = FormField(
                grid, alpha * base.values + 2.0 * grid.complex_hessian(f)
            )
            r = st.buchdahl_check(flat_field, psi)
            assert r.gap >= -1e-8 * r.scale


class TestHermitianSymplectic:
    def test_lambda_zero_rejected(self, torus_field):
        with pytest.raises(ValueError, match="lambda = 0"):
            st.hermitian_symplectic(torus_field, 0.0)

    def test_kahler_extension_is_identity(self, kahler_field):
        hs = st.hermitian_symplectic(kahler_field, 2.0)
        assert np.abs(hs.omega_tilde.block20()).max() < 1e-13
        assert hs.d_omega_tilde.max_norm() <= 1e-6
        assert hs.self_intersection > 0

    def test_family_identity_residual(self, torus_field):
        hs = st.hermitian_symplectic(torus_field, 1.0)
        assert hs.identity_max <= 1e-6
        expected = 2 * torus_field.volume()
        assert hs.self_intersection >= expected - 1e-9

    def test_perturbed_identity_converges(self):
        vals = {}
        for n3 in (16, 32):
            field = sample(MetricFamily("torus_pluriclosed", 0.5), (4, 4, n3, 4))
            x = field.grid.coords()
            pert = perturb_with_potential(field, 0.05 * np.sin(x[2]))
            hs = st.hermitian_symplectic(pert, 1.0)
            vals[n3] = hs.identity_max
            assert hs.self_intersection > 0
        assert np.log2(vals[16] / vals[32]) >= 3.5

    def test_real_form(self, torus_field):
        hs = st.hermitian_symplectic(torus_field, 1.3)
        assert hs.omega_tilde.reality_deviation() < 1e-13
