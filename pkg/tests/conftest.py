import warnings

import pytest

from wiremodel.emodel import Band, CodecProfile


@pytest.fixture
def nb_profile():
    return CodecProfile("NB-test", Band.NB, ie=10.0, bpl=4.3)


@pytest.fixture
def wb_profile():
    return CodecProfile("WB-test", Band.WB, ie=10.0, bpl=20.0)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
