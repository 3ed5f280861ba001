import os

# Single-threaded BLAS keeps every run bit-reproducible; must be set before
# numpy is first imported.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import pytest

from isacsim.channel import SystemConfig
from isacsim.numerics import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def small_system():
    return SystemConfig(m=2, l=4, k_users=2)
