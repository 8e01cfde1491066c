import numpy as np
import pytest

from kglab.config import Config, build_data
from kglab.dft import build_basis
from kglab.dynamics import build_discrete_soliton
from kglab.grids import GridSpec
from kglab.manifold import shoot_stable
from kglab.soliton import build_soliton


@pytest.fixture(scope="session")
def spectral_model():
    """Fine grid for spectral assertions (ground eigenvalue to 1e-3)."""
    return build_soliton(1.5, GridSpec.from_spacing(40.0, 0.02))


@pytest.fixture(scope="session")
def fine_model():
    """Very fine grid for scattering coefficients (unitarity to 1e-6)."""
    return build_soliton(1.5, GridSpec.from_spacing(40.0, 0.01))


@pytest.fixture(scope="session")
def spec_basis(fine_model):
    """Spectral-quality distorted basis for isometry/round-trip assertions."""
    return build_basis(fine_model.V, fine_model.grid.x, fine_model.rho,
                       k_max=15.0, dk=0.02)


@pytest.fixture(scope="session")
def disc():
    """Production dynamics grid with discrete soliton and eigenpair."""
    return build_discrete_soliton(1.5, GridSpec.from_spacing(170.0, 0.05))


@pytest.fixture(scope="session")
def prod_basis(disc):
    """Distorted basis on the dynamics grid for profile/X-norm tracking."""
    return build_basis(-4.0 * disc.Q_analytic**3, disc.x, disc.rho,
                       k_max=8.0, dk=0.02)


@pytest.fixture(scope="session")
def default_spec(disc):
    """Default well-prepared data from the default config."""
    return build_data(Config(), disc)


@pytest.fixture(scope="session")
def shot(default_spec, disc):
    """Shot trajectory over the full production window with snapshots."""
    return shoot_stable(default_spec, disc, horizon=150.0,
                        snapshot_stride=0.5)


def gaussian_even(rng, x):
    """Random even localized test function."""
    c = rng.uniform(0.5, 3.0)
    a = rng.uniform(-1.0, 1.0, 3)
    return (a[0] * np.exp(-((x / c) ** 2))
            + a[1] * np.exp(-((x / (2.0 * c)) ** 2))
            + a[2] * x**2 * np.exp(-((x / c) ** 2)))
