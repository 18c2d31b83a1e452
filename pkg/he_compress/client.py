"""
Demo client: encrypt inputs, send them to the compression server, decrypt the
compressed response.
"""

import logging
import random
import socket
from collections.abc import Sequence
from typing import NamedTuple

from he_compress.codec import esk_to_bytes
from he_compress.compression import encrypt_lattice_key, modified_decrypt, modified_decrypt_batch
from he_compress.config import Config, get_config
from he_compress.lwe_scheme import lwe_encrypt_seeded
from he_compress.models import AdditiveKeypair, EncryptedSecretKey, LatticeParams, LweParams, Polynomial, SessionConfig
from he_compress.protocol import (
    FRAME_HEADER_BYTES,
    FrameType,
    HelloMessage,
    decode_hello_reply,
    decode_response,
    encode_hello,
    encode_request,
    expect_frame,
    send_frame,
)
from he_compress.rlwe_scheme import rlwe_encrypt_seeded

logger = logging.getLogger(__name__)


class SessionResult(NamedTuple):
    """Outcome of one client session."""

    values: list[int]
    response_wire_bytes: int
    request_wire_bytes: int
    uploaded_key: bool


def expected_result(session: SessionConfig, messages: Sequence, params: LatticeParams) -> list[int]:
    """The clear-text answer: Σ weight·message[index] mod p (per requested coefficient for RLWE)."""
    p = params.p
    if isinstance(params, LweParams):
        return [sum(w * messages[i] for i, w in session.weights) % p]
    return [sum(w * messages[i][k] for i, w in session.weights) % p for k in session.coefficients]


def encrypt_inputs(sk, messages: Sequence, params: LatticeParams, rng: random.Random) -> list:
    if isinstance(params, LweParams):
        return [lwe_encrypt_seeded(sk, mu, params, None, rng) for mu in messages]
    return [rlwe_encrypt_seeded(sk, mu if isinstance(mu, Polynomial) else Polynomial(tuple(mu)), params, None, rng) for mu in messages]


def run_session(
    address: tuple[str, int],
    session: SessionConfig,
    params: LatticeParams,
    sk,
    keypair: AdditiveKeypair,
    messages: Sequence,
    rng: random.Random,
    esk: EncryptedSecretKey | None = None,
    config: Config | None = None,
) -> SessionResult:
    """Run one HELLO → (KEY_UPLOAD) → REQUEST → RESPONSE exchange and decrypt the result.

    The encrypted key is only built and uploaded when the server does not have it yet.
    """
    config = config or get_config()
    max_frame = config.server.max_frame_bytes
    pk = keypair.public

    with socket.create_connection(address, timeout=config.server.socket_timeout_s) as sock:
        send_frame(sock, FrameType.HELLO, encode_hello(HelloMessage.from_session(session, pk, params)), max_frame)
        reply = decode_hello_reply(expect_frame(sock, FrameType.HELLO, max_frame))

        if not reply.registered:
            if esk is None:
                esk = encrypt_lattice_key(pk, sk, params, rng)
            sent = send_frame(sock, FrameType.KEY_UPLOAD, esk_to_bytes(esk), max_frame)
            logger.info("Uploaded encrypted key (%d bytes)", sent)

        scts = encrypt_inputs(sk, messages, params, rng)
        request_bytes = send_frame(sock, FrameType.REQUEST, encode_request(scts, params), max_frame)
        payload = expect_frame(sock, FrameType.RESPONSE, max_frame)

    compressed = decode_response(payload, pk, params)
    if compressed.layout.slot_count == 1:
        values = [modified_decrypt(keypair, compressed, params)]
    else:
        values = modified_decrypt_batch(keypair, compressed, params)
    return SessionResult(values, FRAME_HEADER_BYTES + len(payload), request_bytes, not reply.registered)
