"""
Demo compression server.

One thread per connection, one session per connection. The server holds only
public material: additive public keys and encrypted lattice keys (in the
KeyRegistry). It expands the client's seeded ciphertexts, evaluates the
requested weighted sum, compresses the result and returns one additive
ciphertext.
"""

import logging
import random
import socket
import socketserver
from collections.abc import Sequence

from he_compress.codec import esk_from_bytes
from he_compress.compression import lwe_compress, rerandomize_compressed, rlwe_compress, rlwe_compress_batch
from he_compress.config import Config, get_config
from he_compress.errors import HeCompressError, ProtocolError
from he_compress.guardrails import ProcessingGuardrails
from he_compress.key_registry import KeyRegistry
from he_compress.lwe_scheme import lwe_expand_seeded, lwe_weighted_sum
from he_compress.models import CompressedCiphertext, EncryptedSecretKey, LatticeParams, LweParams, SessionConfig
from he_compress.protocol import (
    FrameType,
    decode_hello,
    decode_request,
    encode_hello_reply,
    encode_response,
    expect_frame,
    send_frame,
)
from he_compress.rlwe_scheme import rlwe_expand_seeded, rlwe_weighted_sum

logger = logging.getLogger(__name__)


def evaluate_session(scts: Sequence, session: SessionConfig, params: LatticeParams):
    """Expand seeded inputs and compute Σ weight·input[index]."""
    if isinstance(params, LweParams):
        cts = [lwe_expand_seeded(s, params) for s in scts]
        return lwe_weighted_sum(cts, session.weights, params)
    cts = [rlwe_expand_seeded(s, params) for s in scts]
    return rlwe_weighted_sum(cts, session.weights, params)


def compress_result(esk: EncryptedSecretKey, ct, session: SessionConfig, params: LatticeParams) -> CompressedCiphertext:
    if isinstance(params, LweParams):
        return lwe_compress(esk, ct, params)
    if len(session.coefficients) == 1:
        return rlwe_compress(esk, ct, session.coefficients[0], params)
    return rlwe_compress_batch(esk, ct, session.coefficients, params)


class SessionHandler(socketserver.BaseRequestHandler):
    """Runs one HELLO → (KEY_UPLOAD) → REQUEST → RESPONSE session."""

    server: "CompressionServer"

    def handle(self):
        sock: socket.socket = self.request
        sock.settimeout(self.server.config.server.socket_timeout_s)
        peer = "%s:%s" % self.client_address[:2]
        logger.info("Connection from %s", peer)
        try:
            self._run_session(sock)
        except HeCompressError as e:
            logger.warning("Rejected session from %s: %s", peer, e)
            self._send_error(sock, str(e))
        except OSError:
            logger.warning("Connection error with %s", peer, exc_info=True)
        finally:
            logger.info("Closed connection from %s", peer)

    def _send_error(self, sock: socket.socket, message: str) -> None:
        try:
            send_frame(sock, FrameType.ERROR, message.encode("utf-8"))
        except OSError:
            pass

    def _run_session(self, sock: socket.socket) -> None:
        server = self.server
        max_frame = server.config.server.max_frame_bytes

        hello = decode_hello(expect_frame(sock, FrameType.HELLO, max_frame))
        session = hello.session()
        params = server.config.parameter_set(session.label)
        if hello.params_fingerprint != params.fingerprint.hex():
            raise ProtocolError(f"parameter fingerprint mismatch for {session.label!r}")
        pk = hello.public_key()

        is_valid, reason = server.guardrails.validate_session(session, params, modulus=pk.modulus)
        if not is_valid:
            raise ProtocolError(reason)

        known = server.registry.is_registered(pk.fingerprint, params.fingerprint)
        esk = server.registry.lookup(pk, params) if known else None
        send_frame(sock, FrameType.HELLO, encode_hello_reply(esk is not None), max_frame)
        if esk is None:
            esk = esk_from_bytes(expect_frame(sock, FrameType.KEY_UPLOAD, max_frame), params, pk)
            server.registry.register(esk, params)

        scts = decode_request(expect_frame(sock, FrameType.REQUEST, max_frame), params)
        is_valid, reason = server.guardrails.validate_session(session, params, input_count=len(scts), modulus=pk.modulus)
        if not is_valid:
            raise ProtocolError(reason)

        result = evaluate_session(scts, session, params)
        compressed = rerandomize_compressed(pk, compress_result(esk, result, session, params), server.rng)
        sent = send_frame(sock, FrameType.RESPONSE, encode_response(compressed, pk), max_frame)
        logger.info("Answered %s session over %d inputs with %d response bytes", params.label, len(scts), sent)


class CompressionServer(socketserver.ThreadingMixIn, socketserver.TCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], config: Config | None = None, registry: KeyRegistry | None = None, rng: random.Random | None = None):
        self.config = config or get_config()
        self.registry = registry if registry is not None else KeyRegistry(self.config.registry_db_path)
        self.guardrails = ProcessingGuardrails()
        self.rng = rng or random.SystemRandom()
        super().__init__(address, SessionHandler)


def parse_address(address: str, default_host: str, default_port: int) -> tuple[str, int]:
    """'host:port', 'host' or ':port'."""
    host, sep, port = address.rpartition(":")
    if not sep:
        return address or default_host, default_port
    try:
        return host or default_host, int(port)
    except ValueError:
        raise ProtocolError(f"invalid port in address {address!r}") from None


def serve(bind: str | None = None, config: Config | None = None) -> None:
    """Serve until interrupted."""
    config = config or get_config()
    address = parse_address(bind or "", config.server.host, config.server.port)
    with CompressionServer(address, config) as server:
        logger.info("Serving on %s:%d", *server.server_address[:2])
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("Shutting down")
        finally:
            server.registry.close()
