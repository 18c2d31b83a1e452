"""Shared fixtures: seeded RNGs, toy parameter sets and pinned Paillier keys."""

import random

import pytest

from he_compress.additive_he import ahe_keygen, ahe_keypair_from_primes
from he_compress.config import Config


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def config():
    # Built-in defaults, independent of any config.yaml in the working directory.
    return Config()


@pytest.fixture
def toy_lwe(config):
    """n=2, q=64, p=4 (Δ=16), noise bound 3."""
    return config.parameter_set("toy-lwe")


@pytest.fixture
def toy_rlwe(config):
    """N=2, q=64, p=4 (Δ=16), noise bound 3."""
    return config.parameter_set("toy-rlwe")


@pytest.fixture
def ring16(config):
    return config.parameter_set("ring16")


@pytest.fixture
def n630(config):
    return config.parameter_set("n630")


@pytest.fixture
def toy_keypair():
    """m = 101·103 = 10403: compatible with the toy sets (q + 2q² = 8256) but too small to batch."""
    return ahe_keypair_from_primes(101, 103)


@pytest.fixture(scope="session")
def keypair_512():
    return ahe_keygen(512, random.Random(512))


@pytest.fixture(scope="session")
def keypair_3072():
    """Generated once per session; tests using it are marked slow."""
    return ahe_keygen(3072, random.Random(3072))
