"""
Wire protocol between the demo client and server.

Every message is one frame: type (1 byte) | payload length (4 bytes, little
endian) | payload. A session is:

    client → HELLO        session JSON (linear function, params, additive modulus)
    server → HELLO        {"registered": bool}
    client → KEY_UPLOAD   encrypted key entries (only when not registered)
    client → REQUEST      count (4 bytes) | seeded ciphertexts
    server → RESPONSE     slot count (2) | slot width (2) | additive ciphertext
                          or ERROR with a UTF-8 message

No frame type carries a lattice or additive secret key.
"""

import socket
import struct
from enum import IntEnum

from pydantic import BaseModel, Field, ValidationError

from he_compress.additive_he import ahe_ciphertext_from_bytes, ahe_ciphertext_to_bytes
from he_compress.codec import Reader, seeded_from_reader, seeded_to_bytes
from he_compress.errors import FormatError, ProtocolError
from he_compress.models import AdditivePublicKey, CompressedCiphertext, LatticeParams, SchemeTag, SessionConfig, SlotLayout

_FRAME_HEADER = struct.Struct("<BI")
FRAME_HEADER_BYTES = _FRAME_HEADER.size
_RESPONSE_HEADER = struct.Struct("<HH")
RESPONSE_OVERHEAD_BYTES = FRAME_HEADER_BYTES + _RESPONSE_HEADER.size
DEFAULT_MAX_FRAME_BYTES = 64 * 1024 * 1024


class FrameType(IntEnum):
    HELLO = 0x01
    KEY_UPLOAD = 0x02
    REQUEST = 0x03
    RESPONSE = 0x04
    ERROR = 0x05


class HelloMessage(BaseModel):
    """Client HELLO payload."""

    scheme: SchemeTag
    label: str
    ahe_bits: int = Field(ge=1)
    weights: list[tuple[int, int]]
    coefficients: list[int] = Field(default_factory=list)
    modulus: str
    params_fingerprint: str

    @classmethod
    def from_session(cls, session: SessionConfig, pk: AdditivePublicKey, params: LatticeParams) -> "HelloMessage":
        return cls(
            scheme=session.scheme,
            label=session.label,
            ahe_bits=session.ahe_bits,
            weights=[tuple(pair) for pair in session.weights],
            coefficients=list(session.coefficients),
            modulus=str(pk.modulus),
            params_fingerprint=params.fingerprint.hex(),
        )

    def session(self) -> SessionConfig:
        return SessionConfig(self.scheme, self.label, self.ahe_bits, tuple((i, w) for i, w in self.weights), tuple(self.coefficients))

    def public_key(self) -> AdditivePublicKey:
        try:
            modulus = int(self.modulus)
        except ValueError:
            raise ProtocolError("HELLO carries a non-integer modulus") from None
        if modulus < 2:
            raise ProtocolError("HELLO carries an invalid modulus")
        return AdditivePublicKey(modulus)


class HelloReply(BaseModel):
    registered: bool


def encode_frame(frame_type: FrameType, payload: bytes, max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES) -> bytes:
    if len(payload) > max_frame_bytes:
        raise ProtocolError(f"frame payload of {len(payload)} bytes exceeds the {max_frame_bytes}-byte limit")
    return _FRAME_HEADER.pack(frame_type, len(payload)) + payload


def _recv_exact(sock: socket.socket, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining:
        chunk = sock.recv(min(remaining, 1 << 20))
        if not chunk:
            raise ProtocolError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def send_frame(sock: socket.socket, frame_type: FrameType, payload: bytes, max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES) -> int:
    """Send one frame; returns the bytes written."""
    frame = encode_frame(frame_type, payload, max_frame_bytes)
    sock.sendall(frame)
    return len(frame)


def recv_frame(sock: socket.socket, max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES) -> tuple[FrameType, bytes]:
    """Read one frame. Oversized or unknown frames raise ProtocolError before the payload is read."""
    type_byte, length = _FRAME_HEADER.unpack(_recv_exact(sock, FRAME_HEADER_BYTES))
    try:
        frame_type = FrameType(type_byte)
    except ValueError:
        raise ProtocolError(f"unknown frame type {type_byte:#x}") from None
    if length > max_frame_bytes:
        raise ProtocolError(f"frame of {length} bytes exceeds the {max_frame_bytes}-byte limit")
    return frame_type, _recv_exact(sock, length)


def expect_frame(sock: socket.socket, expected: FrameType, max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES) -> bytes:
    """Read one frame of the expected type. An ERROR frame from the peer is raised as ProtocolError."""
    frame_type, payload = recv_frame(sock, max_frame_bytes)
    if frame_type is FrameType.ERROR:
        raise ProtocolError(payload.decode("utf-8", errors="replace"))
    if frame_type is not expected:
        raise ProtocolError(f"expected {expected.name} frame, got {frame_type.name}")
    return payload


def encode_hello(hello: HelloMessage) -> bytes:
    return hello.model_dump_json().encode("utf-8")


def decode_hello(payload: bytes) -> HelloMessage:
    try:
        return HelloMessage.model_validate_json(payload)
    except ValidationError as e:
        raise ProtocolError(f"malformed HELLO: {e.error_count()} validation error(s)") from e


def encode_hello_reply(registered: bool) -> bytes:
    return HelloReply(registered=registered).model_dump_json().encode("utf-8")


def decode_hello_reply(payload: bytes) -> HelloReply:
    try:
        return HelloReply.model_validate_json(payload)
    except ValidationError as e:
        raise ProtocolError("malformed HELLO reply") from e


def encode_request(scts, params: LatticeParams) -> bytes:
    return struct.pack("<I", len(scts)) + b"".join(seeded_to_bytes(s, params) for s in scts)


def decode_request(payload: bytes, params: LatticeParams) -> list:
    reader = Reader(payload)
    try:
        (count,) = reader.unpack(struct.Struct("<I"))
        scts = [seeded_from_reader(reader, params) for _ in range(count)]
        reader.done()
    except FormatError as e:
        raise ProtocolError(f"malformed REQUEST: {e}") from e
    return scts


def encode_response(x: CompressedCiphertext, pk: AdditivePublicKey) -> bytes:
    return _RESPONSE_HEADER.pack(x.layout.slot_count, x.layout.slot_width) + ahe_ciphertext_to_bytes(pk, x.payload)


def decode_response(payload: bytes, pk: AdditivePublicKey, params: LatticeParams) -> CompressedCiphertext:
    """Rebuild the compressed ciphertext; the layout's scheme and fingerprint come from the session params."""
    reader = Reader(payload)
    try:
        slot_count, slot_width = reader.unpack(_RESPONSE_HEADER)
        payload_ct = ahe_ciphertext_from_bytes(pk, reader.rest())
    except FormatError as e:
        raise ProtocolError(f"malformed RESPONSE: {e}") from e
    if slot_count < 1:
        raise ProtocolError("RESPONSE declares zero slots")
    return CompressedCiphertext(payload_ct, SlotLayout(params.scheme, slot_count, slot_width, params.fingerprint))
