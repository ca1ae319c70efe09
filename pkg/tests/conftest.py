import numpy as np
import pytest

from stablewalk import AXIAL, LAZY, build_step_law
from stablewalk.green import convolution_green_oracle, quadrature_table


@pytest.fixture(scope="session")
def axial_law():
    return build_step_law(2, 0.7, 0.25, AXIAL)


@pytest.fixture(scope="session")
def alpha_one_law():
    return build_step_law(2, 1.0, 0.25, AXIAL)


@pytest.fixture(scope="session")
def lazy6_law():
    return build_step_law(6, 2, 0.5, LAZY)


@pytest.fixture(scope="session")
def green_table_axial(axial_law):
    # shared certified table, radius 12 covers every set-based test
    return quadrature_table(axial_law, 12, 3e-5)


@pytest.fixture(scope="session")
def oracle_axial(axial_law):
    return convolution_green_oracle(axial_law, 128, 192)
