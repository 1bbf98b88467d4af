import numpy as np
import pytest

from bgqkd import ModeFamily, ModeSpec, TransverseGrid

WAVELENGTH = 810e-9
W0 = 1.253e-3
K_R = 18e3


@pytest.fixture(scope="session")
def grid256():
    return TransverseGrid(n=256, extent=10e-3)


@pytest.fixture(scope="session")
def grid512():
    return TransverseGrid(n=512, extent=10e-3)


@pytest.fixture(scope="session")
def bg_source():
    return ModeSpec(family=ModeFamily.BG, ell=1, w0=W0, wavelength=WAVELENGTH, k_r=K_R)


@pytest.fixture(scope="session")
def lg_source():
    return ModeSpec(family=ModeFamily.LG, ell=1, w0=W0, wavelength=WAVELENGTH)


def random_polarized(grid, seed, wavelength=WAVELENGTH, band_limit=0.2):
    """Smooth random band-limited field for property tests."""
    from bgqkd import PolarizedField, ScalarField

    rng = np.random.default_rng(seed)
    k_cut = band_limit * np.pi / grid.spacing
    keep = grid.k_squared <= k_cut ** 2
    comps = []
    for _ in range(2):
        spec = (rng.standard_normal((grid.n, grid.n))
                + 1j * rng.standard_normal((grid.n, grid.n))) * keep
        comps.append(np.fft.ifft2(spec))
    f = PolarizedField(ScalarField(grid, comps[0]), ScalarField(grid, comps[1]), wavelength)
    return f.normalized()
