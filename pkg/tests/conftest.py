import numpy as np
import pytest

import packimb as pi


@pytest.fixture
def affine():
    return pi.AffineOcv(u0=3.0, alpha=1.2)


@pytest.fixture
def fig2_pack(affine):
    """Reference mismatched pack: (5 Ah, 50 mOhm) with (5.6 Ah, 33 mOhm)."""
    return pi.PackParams(
        cell_a=pi.CellParams(capacity_ah=5.0, resistance_ohm=0.05, ocv=affine),
        cell_b=pi.CellParams(capacity_ah=5.6, resistance_ohm=0.033, ocv=affine),
    )


@pytest.fixture
def identical_pack(affine):
    return pi.PackParams(
        cell_a=pi.CellParams(capacity_ah=5.0, resistance_ohm=0.05, ocv=affine),
        cell_b=pi.CellParams(capacity_ah=5.0, resistance_ohm=0.05, ocv=affine),
    )


@pytest.fixture
def nmc_table():
    return pi.default_nmc_table()


def random_affine_pack(rng: np.random.Generator, q_range=(0.5, 2.0), r_range=(0.5, 2.0)):
    """Random mismatched pack with cell a fixed at (5 Ah, 50 mOhm)."""
    model = pi.AffineOcv(u0=3.0, alpha=1.2)
    q = rng.uniform(*q_range)
    r = rng.uniform(*r_range)
    return pi.PackParams(
        cell_a=pi.CellParams(capacity_ah=5.0, resistance_ohm=0.05, ocv=model),
        cell_b=pi.CellParams(capacity_ah=5.0 / q, resistance_ohm=0.05 / r, ocv=model),
    )
