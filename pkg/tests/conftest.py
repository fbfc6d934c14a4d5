"""Shared fixtures for the designer test-suite"""

import pytest

from config import RunConfig
from core import PumpSpec
from transfer import coupled_params


@pytest.fixture
def unit_params():
    """kappa_p = kappa_is = 1 with both couplings at kappa / sqrt(12)"""
    return coupled_params(1.0)


@pytest.fixture
def ratio_params():
    def build(ratio: float, **kwargs):
        return coupled_params(ratio, 1.0, **kwargs)
    return build


@pytest.fixture
def narrow_pump():
    return PumpSpec.from_fwhm(0.5)


@pytest.fixture
def small_config():
    """Coarse grids and loose tolerances so CLI runs finish in seconds"""
    return RunConfig(
        kappa_p_ratio=2.0,
        pump_fwhm_over_kappa_p=0.5,
        grid_n=33,
        tol_k=1e-2,
        max_n=129,
        ratios=(2.0,),
    )
