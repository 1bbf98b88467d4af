import numpy as np
import pytest

from bgqkd import (
    ChannelSpec,
    ModeFamily,
    ModeSpec,
    ObstacleSpec,
    PolarizedField,
    ScalarField,
    TransverseGrid,
    apply_obstacle,
    back_propagate,
    evaluate_bg,
    evaluate_lg,
    horizontally_polarized,
    inner_product,
    nondiffracting_distance,
    propagate,
    propagate_scalar,
)
from bgqkd.analysis import boundary_power_fraction
from bgqkd.propagation import BandLimitWarning, transmit_to_station

from conftest import W0, WAVELENGTH, K_R, random_polarized
from oracles import gaussian_overlap_blocked, rayleigh_sommerfeld_point


def gaussian_field(grid, w0):
    spec = ModeSpec(family=ModeFamily.LG, ell=0, w0=w0, wavelength=WAVELENGTH)
    return horizontally_polarized(evaluate_lg(spec, grid), WAVELENGTH)


def beam_width(f):
    """1/e^2 radius from the second moment of intensity (Gaussian beams)."""
    intensity = f.intensity()
    r2 = np.sum(intensity * f.grid.r ** 2) / np.sum(intensity)
    return np.sqrt(2.0 * r2)


class TestPropagate:
    def test_zero_distance_identity(self, grid256):
        f = random_polarized(grid256, seed=31)
        out = propagate(f, 0.0)
        assert out is f

    def test_negative_distance_rejected(self, grid256):
        f = random_polarized(grid256, seed=32)
        with pytest.raises(ValueError):
            propagate(f, -0.1)

    @pytest.mark.parametrize("factor", [0.5, 1.0, 2.0])
    def test_gaussian_width_law(self, factor):
        grid = TransverseGrid(n=512, extent=10e-3)
        w0 = 0.4e-3
        f = gaussian_field(grid, w0)
        z_r = np.pi * w0 ** 2 / WAVELENGTH
        z = factor * z_r
        out = propagate(f, z)
        expected = w0 * np.sqrt(1.0 + factor ** 2)
        assert beam_width(out) == pytest.approx(expected, rel=0.01)

    def test_power_conserved(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        out = propagate(f, 0.25)
        assert out.power() == pytest.approx(f.power(), abs=1e-9)

    def test_linearity(self, grid256):
        a = random_polarized(grid256, seed=33)
        b = random_polarized(grid256, seed=34)
        summed = PolarizedField(
            ScalarField(grid256, a.h.samples + b.h.samples),
            ScalarField(grid256, a.v.samples + b.v.samples),
            WAVELENGTH,
        )
        z = 0.1
        lhs = propagate(summed, z)
        ra, rb = propagate(a, z), propagate(b, z)
        scale = np.abs(lhs.h.samples).max()
        assert np.max(np.abs(lhs.h.samples - ra.h.samples - rb.h.samples)) < 1e-12 * scale
        assert np.max(np.abs(lhs.v.samples - ra.v.samples - rb.v.samples)) < 1e-12 * scale

    def test_back_propagation_round_trip(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        z = 0.3
        back = back_propagate(propagate(f, z), z)
        fidelity = abs(inner_product(f, back)) ** 2 / (f.power() * back.power())
        assert fidelity > 1 - 1e-9

    def test_bg_nondiffracting_profile(self):
        # numerically propagated BG at half the non-diffracting range stays
        # correlated with the z = 0 ring profile inside r < 1 mm, and matches
        # the analytic mode evaluated at that distance
        grid = TransverseGrid(n=512, extent=10e-3)
        spec = ModeSpec(family=ModeFamily.BG, ell=0, w0=W0, wavelength=WAVELENGTH, k_r=K_R)
        z = 0.5 * nondiffracting_distance(spec)
        start = evaluate_bg(spec, grid, z=0.0)
        numeric = propagate_scalar(start, WAVELENGTH, z)
        sel = grid.r < 1e-3
        i0 = np.abs(start.samples[sel]) ** 2
        iz = np.abs(numeric.samples[sel]) ** 2
        corr = np.corrcoef(i0, iz)[0, 1]
        assert corr > 0.99
        analytic = evaluate_bg(spec, grid, z=z)
        overlap = abs(np.sum(np.conj(analytic.samples) * numeric.samples)
                      * grid.pixel_area) ** 2
        assert overlap > 0.999

    def test_band_limit_warning(self, grid256):
        rng = np.random.default_rng(35)
        noisy = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))
        f = horizontally_polarized(ScalarField(grid256, noisy), WAVELENGTH)
        with pytest.warns(BandLimitWarning):
            propagate(f, 0.01)

    def test_evanescent_truncation_removes_power(self):
        # extreme grid: spacing below the wavelength puts real spectral
        # content beyond k, which must be dropped, never amplified
        grid = TransverseGrid(n=64, extent=64 * 0.4e-6)
        rng = np.random.default_rng(36)
        u = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        f = horizontally_polarized(ScalarField(grid, u), WAVELENGTH)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = propagate(f, 1e-6)
        assert out.power() < f.power()


class TestObstacle:
    def test_covering_grid_zeroes_field(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        out = apply_obstacle(f, ObstacleSpec(radius=8e-3))
        assert out.power() == 0.0

    def test_tiny_radius_near_identity(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        out = apply_obstacle(f, ObstacleSpec(radius=grid256.spacing / 4))
        center_power = (np.abs(f.h.samples[128, 128]) ** 2) * grid256.pixel_area
        assert f.power() - out.power() <= center_power + 1e-15

    def test_removed_power_matches_integral(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        obs = ObstacleSpec(radius=400e-6)
        out = apply_obstacle(f, obs)
        mask = grid256.r < obs.radius
        inside = float(np.sum(f.intensity()[mask]) * grid256.pixel_area)
        assert f.power() - out.power() == pytest.approx(inside, abs=1e-12)

    def test_gaussian_blocked_fraction_closed_form(self):
        grid = TransverseGrid(n=1024, extent=10e-3)
        f = gaussian_field(grid, W0)
        obs = ObstacleSpec(radius=600e-6)
        out = apply_obstacle(f, obs)
        expected = 1.0 - gaussian_overlap_blocked(obs.radius, W0)
        assert out.power() / f.power() == pytest.approx(expected, rel=2e-3)

    def test_off_center_mask(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        obs = ObstacleSpec(radius=300e-6, center=(1e-3, 0.0))
        out = apply_obstacle(f, obs)
        assert 0 < out.power() < f.power()
        x, y = grid256.xy
        blocked = np.hypot(x - 1e-3, y) < 300e-6
        assert np.all(out.h.samples[blocked] == 0)


class TestChannelSpec:
    def test_orders_obstacles(self):
        o1 = ObstacleSpec(radius=1e-4, z=0.2)
        o2 = ObstacleSpec(radius=1e-4, z=0.1)
        chan = ChannelSpec(length=0.5, obstacles=(o1, o2), station_z=0.3)
        assert chan.obstacles[0].z == 0.1
        assert chan.decoding_distance == pytest.approx(0.2)

    def test_rejects_obstacle_past_station(self):
        with pytest.raises(ValueError):
            ChannelSpec(length=0.5, obstacles=(ObstacleSpec(radius=1e-4, z=0.4),),
                        station_z=0.3)

    def test_rejects_station_outside(self):
        with pytest.raises(ValueError):
            ChannelSpec(length=0.5, station_z=0.6)

    def test_transmit_applies_all(self, grid256):
        f = gaussian_field(grid256, 0.6e-3)
        chan = ChannelSpec(
            length=0.4,
            obstacles=(ObstacleSpec(radius=200e-6, z=0.05),
                       ObstacleSpec(radius=300e-6, z=0.1)),
            station_z=0.1,
        )
        out = transmit_to_station(f, chan, check_band_limit=False)
        assert out.power() < f.power()


class TestRayleighSommerfeldOracle:
    def test_gaussian_on_axis(self):
        # independent direct-integration check of the FFT engine, n = 128
        grid = TransverseGrid(n=128, extent=8e-3)
        w0 = 0.8e-3
        f = gaussian_field(grid, w0).h
        for z in (0.4, 0.6, 0.8):
            numeric = propagate_scalar(f, WAVELENGTH, z, check_band_limit=False)
            center = grid.n // 2
            got = abs(numeric.samples[center, center]) ** 2
            ref = abs(rayleigh_sommerfeld_point(
                f.samples, grid.spacing, WAVELENGTH, 0.0, 0.0, z)) ** 2
            assert got == pytest.approx(ref, rel=0.02)

    def test_obstructed_bg_heals_and_matches_oracle(self):
        # scaled geometry keeping the direct integral well sampled at n = 128:
        # the on-axis signal beyond the shadow recovers and agrees with the
        # Rayleigh-Sommerfeld sum within 2%
        lam, k_r, w0, r_obs = 40e-6, 3e3, 2e-3, 0.5e-3
        grid = TransverseGrid(n=128, extent=16e-3)
        spec = ModeSpec(family=ModeFamily.BG, ell=0, w0=w0, wavelength=lam, k_r=k_r)
        u = evaluate_bg(spec, grid)
        blocked = ScalarField(grid, u.samples * (grid.r >= r_obs))
        z_min = 2 * np.pi * r_obs / (k_r * lam)
        center = grid.n // 2

        def on_axis(z):
            out = propagate_scalar(blocked, lam, z, check_band_limit=False)
            return abs(out.samples[center, center]) ** 2

        just_behind = on_axis(0.1 * z_min)
        healed = on_axis(2 * z_min)
        assert healed > 3 * just_behind
        ref = abs(rayleigh_sommerfeld_point(
            blocked.samples, grid.spacing, lam, 0.0, 0.0, 2 * z_min)) ** 2
        assert healed == pytest.approx(ref, rel=0.02)


class TestGuards:
    def test_boundary_power_reported(self, grid256):
        f = gaussian_field(grid256, 3.5e-3)  # wide beam reaching the edge
        assert boundary_power_fraction(f) > 1e-6
        narrow = gaussian_field(grid256, 0.6e-3)
        assert boundary_power_fraction(narrow) < 1e-12
