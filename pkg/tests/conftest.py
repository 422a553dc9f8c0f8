import pytest

import mslz

ENSEMBLE_FREQS_GHZ = [5.507, 5.513, 5.518, 5.531]
ENSEMBLE_COUPLINGS_MHZ = [14.6, 12.1, 14.4, 6.3]


@pytest.fixture(scope="session")
def four_mode_spec():
    return mslz.SystemSpec.from_ghz(
        5.307, 5.707, ENSEMBLE_FREQS_GHZ, ENSEMBLE_COUPLINGS_MHZ, 2
    )


@pytest.fixture(scope="session")
def single_mode_spec():
    return mslz.SystemSpec.from_ghz(5.307, 5.707, [5.507], [14.6], 2)
