"""Integration tests for the demo client and server."""

import random
import threading

import pytest

from he_compress.additive_he import ahe_keypair_from_primes
from he_compress.client import expected_result, run_session
from he_compress.compression import encrypt_lattice_key
from he_compress.errors import ProtocolError
from he_compress.key_registry import KeyRegistry
from he_compress.lwe_scheme import lwe_keygen
from he_compress.models import Polynomial, SchemeTag, SessionConfig
from he_compress.protocol import RESPONSE_OVERHEAD_BYTES
from he_compress.rlwe_scheme import rlwe_keygen
from he_compress.server import CompressionServer, parse_address

pytestmark = pytest.mark.integration


@pytest.fixture
def server(tmp_path, config):
    srv = CompressionServer(("127.0.0.1", 0), config, KeyRegistry(tmp_path / "keys.db"), random.Random(99))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    srv.registry.close()
    thread.join(timeout=5)


def _address(server):
    return server.server_address[:2]


@pytest.mark.parametrize("label", ["n630", "n750"])
def test_lwe_session(server, config, keypair_512, rng, label):
    params = config.parameter_set(label)
    sk = lwe_keygen(params, rng)
    messages = [3, 7, 15, 0]
    session = SessionConfig(SchemeTag.LWE, label, 512, ((0, 1), (1, 2), (2, 5), (3, 9)))

    result = run_session(_address(server), session, params, sk, keypair_512, messages, rng, config=config)
    assert result.values == expected_result(session, messages, params) == [(3 + 14 + 75) % 16]
    assert result.uploaded_key
    assert result.response_wire_bytes == keypair_512.public.ciphertext_bytes + RESPONSE_OVERHEAD_BYTES


def test_second_session_skips_upload(server, config, n630, keypair_512, rng):
    sk = lwe_keygen(n630, rng)
    session = SessionConfig(SchemeTag.LWE, "n630", 512, ((0, 1),))
    esk = encrypt_lattice_key(keypair_512.public, sk, n630, rng)

    first = run_session(_address(server), session, n630, sk, keypair_512, [4], rng, esk=esk, config=config)
    second = run_session(_address(server), session, n630, sk, keypair_512, [11], rng, esk=esk, config=config)
    assert first.uploaded_key and not second.uploaded_key
    assert (first.values, second.values) == ([4], [11])
    assert server.registry.count() == 1
    assert server.registry.is_registered(keypair_512.public.fingerprint, n630.fingerprint)


def test_response_size_independent_of_dimension(server, config, keypair_512, rng):
    sizes = set()
    for label in ("n630", "n750"):
        params = config.parameter_set(label)
        sk = lwe_keygen(params, rng)
        session = SessionConfig(SchemeTag.LWE, label, 512, ((0, 1),))
        sizes.add(run_session(_address(server), session, params, sk, keypair_512, [1], rng, config=config).response_wire_bytes)
    assert sizes == {128 + 9}


def test_rlwe_batched_session(server, config, ring16, keypair_512, rng):
    sk = rlwe_keygen(ring16, rng)
    messages = [Polynomial(tuple(rng.randrange(16) for _ in range(16))) for _ in range(3)]
    session = SessionConfig(SchemeTag.RLWE, "ring16", 512, ((0, 1), (1, 4), (2, 15)), (0, 3, 8, 15))

    result = run_session(_address(server), session, ring16, sk, keypair_512, messages, rng, config=config)
    assert result.values == expected_result(session, messages, ring16)
    assert len(result.values) == 4


def test_rlwe_single_coefficient(server, config, ring16, keypair_512, rng):
    sk = rlwe_keygen(ring16, rng)
    messages = [[5] * 16, [1] * 16]
    session = SessionConfig(SchemeTag.RLWE, "ring16", 512, ((0, 2), (1, 7)), (6,))
    result = run_session(_address(server), session, ring16, sk, keypair_512, messages, rng, config=config)
    assert result.values == [(10 + 7) % 16]


def test_empty_input_set_rejected(server, config, n630, keypair_512, rng):
    sk = lwe_keygen(n630, rng)
    session = SessionConfig(SchemeTag.LWE, "n630", 512, ((0, 1),))
    with pytest.raises(ProtocolError, match="no input"):
        run_session(_address(server), session, n630, sk, keypair_512, [], rng, config=config)


def test_index_beyond_inputs_rejected(server, config, n630, keypair_512, rng):
    sk = lwe_keygen(n630, rng)
    session = SessionConfig(SchemeTag.LWE, "n630", 512, ((0, 1), (2, 1)))
    with pytest.raises(ProtocolError, match="index 2"):
        run_session(_address(server), session, n630, sk, keypair_512, [1, 2], rng, config=config)


def test_incompatible_key_rejected_before_upload(server, config, n630, rng):
    small = ahe_keypair_from_primes(101, 103)
    sk = lwe_keygen(n630, rng)
    session = SessionConfig(SchemeTag.LWE, "n630", 14, ((0, 1),))
    with pytest.raises(ProtocolError, match="too small"):
        run_session(_address(server), session, n630, sk, small, [1], rng, config=config)
    assert server.registry.count() == 0


def test_unknown_label_rejected(server, config, toy_lwe, keypair_512, rng):
    sk = lwe_keygen(toy_lwe, rng)
    session = SessionConfig(SchemeTag.LWE, "n999", 512, ((0, 1),))
    with pytest.raises(ProtocolError, match="Unknown parameter set"):
        run_session(_address(server), session, toy_lwe, sk, keypair_512, [1], rng, config=config)


@pytest.mark.slow
def test_many_sessions(server, config, n630, keypair_512):
    rng = random.Random(100)
    sk = lwe_keygen(n630, rng)
    esk = encrypt_lattice_key(keypair_512.public, sk, n630, rng)
    for _ in range(100):
        messages = [rng.randrange(16) for _ in range(4)]
        weights = tuple((i, rng.randrange(16)) for i in range(4))
        session = SessionConfig(SchemeTag.LWE, "n630", 512, weights)
        result = run_session(_address(server), session, n630, sk, keypair_512, messages, rng, esk=esk, config=config)
        assert result.values == expected_result(session, messages, n630)


def test_parse_address():
    assert parse_address("", "127.0.0.1", 9464) == ("127.0.0.1", 9464)
    assert parse_address("0.0.0.0:8000", "127.0.0.1", 9464) == ("0.0.0.0", 8000)
    assert parse_address(":8000", "127.0.0.1", 9464) == ("127.0.0.1", 8000)
    assert parse_address("example.org", "127.0.0.1", 9464) == ("example.org", 9464)
    with pytest.raises(ProtocolError):
        parse_address("host:port", "127.0.0.1", 9464)
