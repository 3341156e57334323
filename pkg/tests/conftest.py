import pytest

from fnef import build_biplane_qr, biplane_divisor, biplane_curve_functional


@pytest.fixture(scope="session")
def qr_biplane():
    return build_biplane_qr()


@pytest.fixture(scope="session")
def qr_divisor(qr_biplane):
    return biplane_divisor(qr_biplane)


@pytest.fixture(scope="session")
def qr_witness(qr_biplane):
    return biplane_curve_functional(qr_biplane)
