"""Shared fixtures.

The decaying MHD trajectory is the expensive one (a few seconds); it is
session scoped and reused by the diagnostics, criteria, and acceptance
tests so the solver only runs once.
"""

import numpy as np
import pytest

from lpmhd.diagnostics import CriterionConfig, build_records
from lpmhd.dyadic import build_partition
from lpmhd.solver import SolverConfig, initial_data, run
from lpmhd.spectral import Grid3


@pytest.fixture(scope="session")
def grid8():
    return Grid3(8)


@pytest.fixture(scope="session")
def grid16():
    return Grid3(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid3(32)


@pytest.fixture(scope="session")
def grid64():
    return Grid3(64)


@pytest.fixture(scope="session")
def part16(grid16):
    return build_partition(grid16)


@pytest.fixture(scope="session")
def part64(grid64):
    return build_partition(grid64)


@pytest.fixture(scope="session")
def part32(grid32):
    return build_partition(grid32)


# Frozen parameters for the shared decaying run.  The seed and spectrum
# shape keep every dyadic shell populated over the whole window, which
# the criteria tests rely on.
MHD_RUN = dict(
    nu=0.02,
    mu=0.02,
    dt=2e-3,
    t_end=0.5,
    snapshot_interval=2e-2,
    scheme="if-rk4",
)
MHD_IC = dict(
    seed=5,
    energy=4.0,
    magnetic_energy=2.0,
    peak_shell=2,
    slope=2.0,
)
MHD_CRITERIA = dict(r=4.0, l=2.0, s=0.6, c_r=1e-3)


@pytest.fixture(scope="session")
def mhd_config():
    return SolverConfig(**MHD_RUN)


@pytest.fixture(scope="session")
def mhd_trajectory(mhd_config, grid32):
    u0, b0 = initial_data("random-spectrum", MHD_IC, grid32)
    result = run(u0, b0, mhd_config)
    assert result.complete
    return result


@pytest.fixture(scope="session")
def mhd_criterion_config():
    return CriterionConfig(**MHD_CRITERIA)


@pytest.fixture(scope="session")
def mhd_records(mhd_trajectory, part32, mhd_criterion_config, mhd_config):
    return build_records(
        mhd_trajectory.snapshots,
        part32,
        mhd_criterion_config,
        nu=mhd_config.nu,
        mu=mhd_config.mu,
    )


def make_solenoidal(grid, seed, scale=1.0):
    """Random divergence-free dealiased vector field, reproducible."""
    from lpmhd.spectral import SpectralVectorField, dealias, leray_project, random_vector

    rng = np.random.default_rng(seed)
    field = dealias(leray_project(random_vector(grid, rng)))
    if scale != 1.0:
        field = SpectralVectorField(grid, field.coeffs * scale)
    return field
