import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinmarket.core import (
    ConstantBackground,
    DistributionGrid,
    ModelParams,
    NoiseModel,
    PiecewiseBackground,
    Scenario,
    SinExpBackground,
    background_W,
    compromise_P,
    deposit_mass,
    diffusion_d,
    drift_phi,
    H_of_w,
    herding_gamma,
    moments,
    rational_fraction,
    total_mass,
)


def uniform_grid(n_x=8, n_w=10, density=1.0, **kw):
    g = DistributionGrid(n_x, n_w, **kw)
    g.values[:] = density
    return g


# ---------------------------------------------------------------------------
# drift_phi
# ---------------------------------------------------------------------------

class TestDriftPhi:
    def test_inside_band(self):
        p = ModelParams(delta=1.0, kappa=1.0, band_R=0.025)
        assert drift_phi(0.0, 0.51, 0.5, p) == -1.0

    def test_outside_band(self):
        p = ModelParams(delta=1.0, kappa=1.0, band_R=0.025)
        assert drift_phi(0.0, 0.9, 0.5, p) == 1.0

    def test_boundary_counts_as_outside(self):
        p = ModelParams(delta=2.0, kappa=1.0, band_R=0.025)
        assert drift_phi(0.0, 0.525, 0.5, p) == 1.0

    @given(x=st.floats(-1, 1), w=st.floats(0, 1))
    def test_independent_of_x_and_two_valued(self, x, w):
        p = ModelParams(delta=3.0, kappa=2.0, band_R=0.1)
        v = drift_phi(x, w, 0.5, p)
        assert v == drift_phi(-x, w, 0.5, p)
        assert v in (-6.0, 2.0)
        assert (v < 0) == (abs(w - 0.5) < 0.1)


# ---------------------------------------------------------------------------
# compromise_P / diffusion_d / herding_gamma
# ---------------------------------------------------------------------------

class TestModelFunctions:
    def test_constant_selector(self):
        assert compromise_P(0.3, ModelParams()) == 1.0

    def test_indicator_selector(self):
        p = ModelParams(p_kind="indicator", p_radius=0.1)
        assert compromise_P(0.05, p) == 1.0
        assert compromise_P(0.2, p) == 0.0

    def test_diffusion_vanishes_at_ends(self):
        assert diffusion_d(0.0) == 0.0
        assert diffusion_d(1.0) == 0.0

    def test_diffusion_peak(self):
        # 4 * 0.5 * 0.5
        assert diffusion_d(0.5) == pytest.approx(1.0)

    def test_diffusion_scaled(self):
        assert diffusion_d(0.5, d_scale=0.25) == pytest.approx(0.25)

    def test_gamma_product_kernel(self):
        p = ModelParams()
        # 0.6 * (1 - 0.2)
        assert herding_gamma(0.6, 0.2, p) == pytest.approx(0.48)
        assert herding_gamma(0.2, 0.6, p) == 0.0
        assert herding_gamma(1.0, 0.0, p) == 1.0

    def test_gamma_distance_kernel(self):
        p = ModelParams(gamma_kind="distance-indicator", gamma_radius=0.1)
        assert herding_gamma(0.55, 0.5, p) == 1.0
        assert herding_gamma(0.9, 0.5, p) == 0.0

    @given(v=st.floats(0, 1), w=st.floats(0, 1))
    def test_gamma_bounded(self, v, w):
        g = herding_gamma(v, w, ModelParams())
        assert 0.0 <= g <= 1.0


# ---------------------------------------------------------------------------
# background_W
# ---------------------------------------------------------------------------

class TestBackground:
    def test_constant(self):
        s = Scenario(background=ConstantBackground(0.5))
        assert background_W(0.3, s) == 0.5

    def test_sin_exp_at_zero(self):
        # 0.1 + 0.05 * (sin 0 + exp(0)/2)
        s = Scenario(background=SinExpBackground(0.1, 0.05, 200.0, 1 / 0.015))
        assert background_W(0.0, s) == pytest.approx(0.125)

    def test_piecewise_right_continuous(self):
        bg = PiecewiseBackground(((0.0, 0.5), (0.2, 0.3)))
        s = Scenario(background=bg)
        assert background_W(0.25, s) == 0.3
        assert background_W(0.2, s) == 0.3
        assert background_W(0.1999, s) == 0.5

    def test_out_of_range_rejected(self):
        s = Scenario(background=ConstantBackground(1.5))
        with pytest.raises(ValueError, match="outside"):
            background_W(0.0, s)

    def test_piecewise_needs_origin(self):
        with pytest.raises(ValueError, match="t=0"):
            PiecewiseBackground(((0.1, 0.5),))


# ---------------------------------------------------------------------------
# H_of_w
# ---------------------------------------------------------------------------

class TestHOfW:
    def test_point_mass(self):
        p = ModelParams(tau_I=1.0)
        assert H_of_w(0.8, 0.5, p) == pytest.approx(0.3)
        assert H_of_w(0.5, 0.5, p) == 0.0

    def test_selective_perception(self):
        p = ModelParams(p_kind="indicator", p_radius=0.1)
        assert H_of_w(0.9, 0.5, p) == 0.0

    def test_density_background_matches_point_mass_limit(self):
        p = ModelParams()
        nodes = np.linspace(0.4, 0.6, 4001)
        sd = 0.005
        vals = np.exp(-0.5 * ((nodes - 0.5) / sd) ** 2)
        vals /= np.trapezoid(vals, nodes)
        assert H_of_w(0.8, (nodes, vals), p) == pytest.approx(0.3, abs=1e-4)

    def test_unnormalized_density_rejected(self):
        p = ModelParams()
        nodes = np.linspace(0, 1, 11)
        with pytest.raises(ValueError, match="normalized"):
            H_of_w(0.5, (nodes, np.full(11, 2.0)), p)

    def test_affine_in_w_with_constant_P(self):
        # slope 1/tau_I for P == 1
        p = ModelParams(tau_I=2.0)
        w = np.linspace(0.1, 0.9, 9)
        h = np.array([H_of_w(wi, 0.5, p) for wi in w])
        slopes = np.diff(h) / np.diff(w)
        assert np.allclose(slopes, 0.5)


# ---------------------------------------------------------------------------
# total_mass / moments / rational_fraction
# ---------------------------------------------------------------------------

class TestMassAndMoments:
    def test_unit_density_mass_is_area(self):
        for n_x, n_w in [(4, 7), (70, 70)]:
            g = uniform_grid(n_x, n_w)
            assert total_mass(g) == pytest.approx(2.0)

    def test_zero_grid(self):
        assert total_mass(DistributionGrid(5, 5)) == 0.0

    def test_single_deposit(self):
        g = DistributionGrid(5, 5)
        deposit_mass(g, 0.1, 0.37, 0.25)
        assert total_mass(g) == pytest.approx(0.25)

    def test_uniform_moments(self):
        g = uniform_grid(8, 10, density=0.5)  # mass 1 on [-1,1]x[0,1]
        m_w, m_x, _ = moments(g, 0.5)
        assert m_w == pytest.approx(0.5)
        assert m_x == pytest.approx(0.0, abs=1e-15)

    def test_point_concentration(self):
        g = DistributionGrid(10, 10)
        i, j = g.x_cell_index(0.3), g.w_cell_index(0.7)
        g.values[i, j] = 1.0 / g.cell_area
        m_w, m_x, _ = moments(g, 0.5)
        assert abs(m_w - 0.7) <= g.dw / 2
        assert abs(m_x - 0.3) <= g.dx / 2

    def test_two_point_distribution(self):
        # centers at exactly 0.2 and 0.8: bounds [-0.1, 1.1], two w cells
        g = DistributionGrid(1, 2, w_min=-0.1, w_max=1.1)
        assert np.allclose(g.w_centers, [0.2, 0.8])
        g.values[0, :] = 0.5 / g.cell_area
        m_w, _, V_w = moments(g, 0.5)
        assert m_w == pytest.approx(0.5)
        assert V_w == pytest.approx(0.09)

    def test_mirror_symmetric_grid_has_zero_mean_rationality(self):
        rng = np.random.default_rng(0)
        half = rng.random((5, 10))
        g = DistributionGrid(10, 10, values=np.vstack([half, half[::-1]]))
        _, m_x, _ = moments(g, 0.5)
        assert m_x == pytest.approx(0.0, abs=1e-14)

    def test_rational_fraction_symmetric(self):
        g = uniform_grid(8, 4)
        assert rational_fraction(g, 2) == 0.5

    def test_rational_fraction_one_sided(self):
        g = DistributionGrid(8, 4)
        g.values[g.x_centers > 0, 1] = 3.0
        assert rational_fraction(g, 1) == 1.0

    def test_rational_fraction_three_to_one(self):
        g = DistributionGrid(4, 3)
        g.values[:2, 0] = 1.0   # x < 0
        g.values[2:, 0] = 3.0   # x > 0
        assert rational_fraction(g, 0) == pytest.approx(0.75)

    def test_rational_fraction_empty_column(self):
        g = DistributionGrid(4, 3)
        assert rational_fraction(g, 1) == 0.5

    @given(j=st.integers(0, 9), seed=st.integers(0, 100))
    @settings(max_examples=30)
    def test_rational_fraction_bounds(self, j, seed):
        rng = np.random.default_rng(seed)
        g = DistributionGrid(7, 10, values=rng.random((7, 10)))
        assert 0.0 <= rational_fraction(g, j) <= 1.0


# ---------------------------------------------------------------------------
# deposit_mass
# ---------------------------------------------------------------------------

class TestDeposit:
    def test_at_center_single_cell(self):
        g = DistributionGrid(4, 10)
        w = g.w_centers[3]
        deposit_mass(g, 0.0, w, 1.0)
        i = g.x_cell_index(0.0)
        assert g.values[i, 3] == pytest.approx(1.0 / g.cell_area)
        assert np.count_nonzero(g.values) == 1

    def test_midway_even_split(self):
        g = DistributionGrid(4, 10)
        w = 0.5 * (g.w_centers[3] + g.w_centers[4])
        deposit_mass(g, 0.0, w, 1.0)
        i = g.x_cell_index(0.0)
        assert g.values[i, 3] == pytest.approx(g.values[i, 4])
        assert total_mass(g) == pytest.approx(1.0)

    def test_quarter_offset_weights(self):
        g = DistributionGrid(4, 10)
        w = g.w_centers[3] + 0.25 * g.dw
        deposit_mass(g, 0.0, w, 1.0)
        i = g.x_cell_index(0.0)
        area = g.cell_area
        assert g.values[i, 3] * area == pytest.approx(0.75)
        assert g.values[i, 4] * area == pytest.approx(0.25)

    def test_boundary_half_cell(self):
        g = DistributionGrid(4, 10)
        deposit_mass(g, 0.0, g.w_min, 1.0)
        deposit_mass(g, 0.0, g.w_max, 1.0)
        i = g.x_cell_index(0.0)
        area = g.cell_area
        assert g.values[i, 0] * area == pytest.approx(1.0)
        assert g.values[i, -1] * area == pytest.approx(1.0)

    def test_outside_range_rejected(self):
        g = DistributionGrid(4, 10)
        with pytest.raises(ValueError, match="outside"):
            deposit_mass(g, 0.0, 1.2, 1.0)

    @given(w=st.floats(0.0, 1.0), x=st.floats(-1.0, 1.0),
           m=st.floats(0.0, 10.0))
    @settings(max_examples=200)
    def test_mass_exactly_added(self, w, x, m):
        g = DistributionGrid(6, 13)
        g.values[:] = 0.3
        before = total_mass(g)
        deposit_mass(g, x, w, m)
        assert total_mass(g) == pytest.approx(before + m, rel=1e-13, abs=1e-13)

    def test_interpolation_preserves_mean_value(self):
        # linear weights put the deposited mass at w_star in expectation
        g = DistributionGrid(1, 10)
        w_star = 0.537
        deposit_mass(g, 0.0, w_star, 2.0)
        m_w, _, _ = moments(g, 0.5)
        assert m_w == pytest.approx(2.0 * w_star, rel=1e-12)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

class TestValidation:
    def test_beta_range(self):
        with pytest.raises(ValueError, match="beta"):
            ModelParams(beta=0.9)

    def test_alpha_range(self):
        with pytest.raises(ValueError, match="alpha"):
            ModelParams(alpha=-0.1)

    def test_threshold_order(self):
        with pytest.raises(ValueError, match="rule_thresholds"):
            ModelParams(rule_thresholds=(0.7, 0.3))

    def test_noise_kinds(self):
        with pytest.raises(ValueError, match="kind"):
            NoiseModel(kind="uniform")
        n = NoiseModel(kind="truncated-gaussian", amplitude=0.06)
        assert n.variance == pytest.approx(0.0036)

    def test_noise_zero_mean(self):
        rng = np.random.default_rng(1)
        for kind in ("two-point", "truncated-gaussian"):
            s = NoiseModel(kind=kind).sample(rng, 200_000)
            assert abs(s.mean()) < 1e-3
            assert s.std() == pytest.approx(0.06, rel=0.02)

    def test_scenario_validation(self):
        with pytest.raises(ValueError, match="dt"):
            Scenario(dt=-1e-5)
        with pytest.raises(ValueError, match="ensemble"):
            Scenario(ensemble=0)
