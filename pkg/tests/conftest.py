import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mcdeform.polyvectors import shear_pair, standard_pair  # noqa: E402
from mcdeform.scalars import TruncationCtx  # noqa: E402


@pytest.fixture
def ctx2():
    return TruncationCtx(2, 0, (), 4, -4, 4)


@pytest.fixture
def ctx3():
    return TruncationCtx(3, 0, (), 4, -4, 4)


@pytest.fixture
def ctx4():
    return TruncationCtx(4, 0, (), 4, -4, 4)


@pytest.fixture
def std2(ctx2):
    return standard_pair(ctx2)


@pytest.fixture
def shear4(ctx4):
    return shear_pair(ctx4)
