import pytest

from pytest_mock import MockFixture

from soundfield.pinn import config
from soundfield.pinn.config import (
    MAX_SEED,
    SeedStream,
    derive_seed,
)


@pytest.fixture(autouse=True)
def reset_seed():
    # every test starts without a configured seed
    config._SEED = None

    yield


def test_get_seed_when_set(mocker: MockFixture):
    expected_seed = 4242
    mocker.patch("soundfield.pinn.config._SEED", expected_seed)

    assert config.get_seed() == expected_seed


def test_get_seed_when_not_set(mocker: MockFixture):
    call = mocker.call
    expected_seed = 4242

    configure_mock = mocker.Mock()

    def set_seed_patch():
        mocker.patch("soundfield.pinn.config._SEED", expected_seed)

    configure_mock.side_effect = set_seed_patch
    mocker.patch("soundfield.pinn.config.configure_seed", configure_mock)

    assert config.get_seed() == expected_seed
    assert configure_mock.mock_calls == [call()]


def test_configure_seed_when_value_given():
    assert config.configure_seed(4242) == 4242
    assert config.get_seed() == 4242


def test_configure_seed_default_value(mocker: MockFixture):
    default_seed_spy = mocker.spy(config.random, "randint")

    seed = config.configure_seed()

    assert config.get_seed() == seed == default_seed_spy.spy_return
    assert default_seed_spy.mock_calls == [mocker.call(0, MAX_SEED)]


def test_derived_streams_are_distinct():
    seeds = [derive_seed(7, stream) for stream in SeedStream]

    assert len(set(seeds)) == len(SeedStream)
    assert all(0 <= seed < 2 ** 64 for seed in seeds)


def test_derived_seed_is_stable():
    assert derive_seed(7, SeedStream.NOISE) == derive_seed(7, SeedStream.NOISE)
    assert derive_seed(7, SeedStream.NOISE) != derive_seed(8, SeedStream.NOISE)
    assert isinstance(derive_seed(0, SeedStream.INIT), int)
