"""Grid/field infrastructure: unitary FFT, norms, convolution, serialization."""

import math

import numpy as np
import pytest
from scipy import integrate

from horopoisson import field as fd
from horopoisson.builtins import bump, gaussian, random_bandlimited
from horopoisson.errors import GridMismatch, SpaceError


class TestGrid:
    def test_power_of_two_required(self):
        with pytest.raises(ValueError):
            fd.SpectralGrid(1, 16.0, 1000)

    def test_dimension_range(self):
        with pytest.raises(ValueError):
            fd.SpectralGrid(4, 16.0, 64)

    def test_dual_lattice(self, grid1):
        # xi_k = pi k / L is the exact FFT dual of x_j = j h
        assert grid1.frequency_spacing == pytest.approx(np.pi / grid1.extent)
        ax = grid1.frequency_axis()
        assert ax[grid1.points_per_axis // 2] == 0.0


class TestFourier:
    def test_round_trip(self, grid1):
        f = random_bandlimited(grid1, cutoff=5.0, seed=11)
        back = fd.inverse_fourier(fd.fourier(f))
        rel = np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))
        assert rel < 1e-12

    def test_gaussian_self_dual(self, grid1):
        f = gaussian(grid1, width=1.0)
        hat = fd.fourier(f)
        xi = grid1.frequency_axis()
        ref = np.exp(-(xi**2) / 2.0)
        assert np.max(np.abs(hat.values - ref)) < 1e-10

    def test_parseval(self, grid1):
        f = random_bandlimited(grid1, cutoff=4.0, seed=2)
        hat = fd.fourier(f)
        pos = math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * grid1.spacing)
        frq = math.sqrt(float(np.sum(np.abs(hat.values) ** 2)) * grid1.frequency_spacing)
        assert abs(pos - frq) / pos < 1e-12

    def test_shift_multiplier_matches_analytic_continuation(self, grid1):
        # exp(-y xi) on the frequency side gives f(x + iy). The growing
        # exponential amplifies the FFT noise floor at far frequencies, so the
        # spectrum must be truncated at that floor first (the poisson slice
        # maps get this from the kernel decay instead).
        y = 0.8
        f = gaussian(grid1, width=1.0)
        hat = fd.fourier(f)
        vals = hat.values.copy()
        vals[np.abs(vals) < 1e-16 * np.max(np.abs(vals))] = 0.0
        xi = grid1.frequency_axis()
        shifted = fd.inverse_fourier(hat.with_values(vals * np.exp(-y * xi)))
        x = grid1.axis()
        ref = np.exp(-((x + 1j * y) ** 2) / 2.0)
        assert np.max(np.abs(shifted.values - ref)) < 1e-8

    def test_space_errors(self, grid1, gauss1):
        hat = fd.fourier(gauss1)
        with pytest.raises(SpaceError):
            fd.fourier(hat)
        with pytest.raises(SpaceError):
            fd.inverse_fourier(gauss1)


class TestNorm:
    def test_zero(self, grid1):
        z = fd.field_from_values(grid1, np.zeros(grid1.shape))
        assert fd.norm(z, "L2") == 0.0
        assert fd.norm(z, "L1") == 0.0
        assert fd.norm(z, "Linf") == 0.0

    @pytest.mark.parametrize("n,m", [(1, 1024), (2, 128)])
    def test_gaussian_l2(self, n, m):
        g = fd.SpectralGrid(n, 16.0, m)
        f = gaussian(g, width=1.0)
        assert fd.norm(f, "L2") == pytest.approx(math.pi ** (n / 4.0), rel=1e-12)

    def test_bump_l1_against_adaptive_quadrature(self):
        g = fd.SpectralGrid(1, 16.0, 2048)
        radius = 3.0
        f = bump(g, radius=radius)
        ref, _ = integrate.quad(
            lambda x: math.exp(1.0 - 1.0 / (1.0 - (x / radius) ** 2)) if abs(x) < radius else 0.0,
            -radius,
            radius,
            limit=200,
        )
        assert abs(fd.norm(f, "L1") - ref) / ref < 1e-8

    def test_refinement_stability(self):
        vals = []
        for m in (1024, 2048):
            g = fd.SpectralGrid(1, 16.0, m)
            vals.append(fd.norm(gaussian(g), "L2"))
        assert abs(vals[1] - vals[0]) < 1e-10


class TestConvolve:
    def test_narrow_gaussian_is_approximate_identity(self, grid1):
        eps = 0.05
        f = gaussian(grid1, width=1.5)
        x = grid1.axis()
        # normalized narrow Gaussian as a delta surrogate, including the
        # convolution convention factor
        delta = fd.field_from_values(
            grid1, np.exp(-(x**2) / (2 * eps**2)) / (math.sqrt(2 * math.pi) * eps)
        )
        conv = fd.convolve(f, delta)
        rel = fd.norm(conv.with_values(conv.values - f.values)) / fd.norm(f)
        assert rel < 1e-3

    def test_gaussian_variances_add(self, grid1):
        s1, s2 = 1.0, 0.7
        f = gaussian(grid1, width=s1)
        g = gaussian(grid1, width=s2)
        conv = fd.convolve(f, g)
        s3 = math.hypot(s1, s2)
        x = grid1.axis()
        amp = math.sqrt(2 * math.pi) * s1 * s2 / s3
        ref = amp * np.exp(-(x**2) / (2 * s3**2))
        assert np.max(np.abs(conv.values - ref)) / amp < 1e-12

    def test_commutativity(self, grid1):
        # exact up to FMA rounding asymmetry in the elementwise product
        f = gaussian(grid1, width=1.0)
        g = bump(grid1, radius=2.0)
        a = fd.convolve(f, g)
        b = fd.convolve(g, f)
        scale = np.max(np.abs(a.values))
        assert np.max(np.abs(a.values - b.values)) < 1e-15 * scale

    def test_grid_mismatch(self, grid1):
        other = fd.SpectralGrid(1, 16.0, 512)
        with pytest.raises(GridMismatch):
            fd.convolve(gaussian(grid1), gaussian(other))


class TestSerialization:
    def test_binary_round_trip(self, tmp_path, grid1):
        f = random_bandlimited(grid1, cutoff=3.0, seed=5)
        path = tmp_path / "f.bin"
        fd.write_binary(f, path)
        g = fd.read_binary(path)
        assert g.grid == f.grid
        assert np.array_equal(g.values, f.values)

    def test_csv_layout(self, tmp_path, grid1, gauss1):
        path = tmp_path / "f.csv"
        fd.write_csv(gauss1, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,re,im"
        assert len(lines) == grid1.points_per_axis + 1
        cells = lines[1].split(",")
        assert len(cells) == 3
        float(cells[1])  # parses

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError):
            fd.read_binary(path)
