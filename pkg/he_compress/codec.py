"""
Binary formats.

Residues are fixed-width little-endian integers of ceil(log2_q/8) bytes. Additive
ciphertexts are 2·ceil(bits/8) bytes. Every file starts with the envelope
``b"HEC1" | version | kind``; lattice-bearing bodies open with a self-describing
parameter header so a file can be read without the config that produced it.
"""

import struct
from enum import IntEnum
from pathlib import Path

from he_compress.additive_he import ahe_ciphertext_from_bytes, ahe_ciphertext_to_bytes
from he_compress.compression import check_compatibility
from he_compress.errors import FormatError
from he_compress.models import (
    SEED_BYTES,
    AdditiveKeypair,
    AdditivePublicKey,
    CompressedCiphertext,
    EncryptedSecretKey,
    LatticeParams,
    LweCiphertext,
    LweParams,
    LweSecretKey,
    NoiseParams,
    Polynomial,
    RlweCiphertext,
    RlweParams,
    RlweSecretKey,
    SchemeTag,
    SeededLweCiphertext,
    SeededRlweCiphertext,
    SlotLayout,
)

MAGIC = b"HEC1"
FORMAT_VERSION = 0x01
ENVELOPE_BYTES = len(MAGIC) + 2

# scheme tag, slot count, slot width, params fingerprint
_COMPRESSED_HEADER = struct.Struct("<BHH8s")
COMPRESSED_HEADER_BYTES = _COMPRESSED_HEADER.size

# scheme tag, dimension, log2_q, p, sigma, bound, label length
_PARAMS_HEADER = struct.Struct("<BIHIdIB")


class FileKind(IntEnum):
    LATTICE_KEY = 1
    CIPHERTEXTS = 2
    SEEDED_CIPHERTEXTS = 3
    ADDITIVE_KEYPAIR = 4
    ADDITIVE_PUBLIC_KEY = 5
    ENCRYPTED_KEY = 6
    COMPRESSED = 7


class Reader:
    """Cursor over a byte string that raises FormatError on truncation."""

    def __init__(self, data: bytes):
        self._data = memoryview(data)
        self._offset = 0

    def take(self, count: int) -> bytes:
        if count < 0 or self._offset + count > len(self._data):
            raise FormatError(f"truncated input: wanted {count} bytes at offset {self._offset}, have {len(self._data) - self._offset}")
        chunk = bytes(self._data[self._offset : self._offset + count])
        self._offset += count
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def rest(self) -> bytes:
        return self.take(len(self._data) - self._offset)

    def done(self) -> None:
        if self._offset != len(self._data):
            raise FormatError(f"{len(self._data) - self._offset} trailing bytes")


# Residues


def encode_residues(values, params: LatticeParams) -> bytes:
    width = params.residue_bytes
    return b"".join(v.to_bytes(width, "little") for v in values)


def decode_residues(reader: Reader, count: int, params: LatticeParams) -> tuple[int, ...]:
    width = params.residue_bytes
    raw = reader.take(count * width)
    values = tuple(int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(count))
    if any(v >= params.q for v in values):
        raise FormatError("residue not below q")
    return values


# Parameters


def encode_params(params: LatticeParams) -> bytes:
    label = params.label.encode("utf-8")
    if len(label) > 255:
        raise FormatError("parameter label longer than 255 bytes")
    header = _PARAMS_HEADER.pack(params.scheme.code, params.dimension, params.log2_q, params.p, params.noise.sigma, params.noise.bound, len(label))
    return header + label


def decode_params(reader: Reader) -> LatticeParams:
    code, dimension, log2_q, p, sigma, bound, label_len = reader.unpack(_PARAMS_HEADER)
    try:
        label = reader.take(label_len).decode("utf-8", errors="strict")
    except UnicodeDecodeError:
        raise FormatError("parameter label is not valid UTF-8") from None
    scheme = SchemeTag.from_code(code)
    noise = NoiseParams(sigma, bound)
    if scheme is SchemeTag.LWE:
        return LweParams(dimension, log2_q, p, noise, label)
    return RlweParams(dimension, log2_q, p, noise, label)


# Lattice objects


def lwe_ciphertext_to_bytes(ct: LweCiphertext, params: LweParams) -> bytes:
    return encode_residues(ct.a, params) + encode_residues((ct.b,), params)


def lwe_ciphertext_from_reader(reader: Reader, params: LweParams) -> LweCiphertext:
    a = decode_residues(reader, params.n, params)
    (b,) = decode_residues(reader, 1, params)
    return LweCiphertext(a, b, params.fresh_noise_budget_bits)


def seeded_lwe_to_bytes(sct: SeededLweCiphertext, params: LweParams) -> bytes:
    return sct.seed + encode_residues((sct.b,), params)


def seeded_lwe_from_reader(reader: Reader, params: LweParams) -> SeededLweCiphertext:
    seed = reader.take(SEED_BYTES)
    (b,) = decode_residues(reader, 1, params)
    return SeededLweCiphertext(seed, b, params.fresh_noise_budget_bits)


def rlwe_ciphertext_to_bytes(ct: RlweCiphertext, params: RlweParams) -> bytes:
    return encode_residues(ct.a, params) + encode_residues(ct.b, params)


def rlwe_ciphertext_from_reader(reader: Reader, params: RlweParams) -> RlweCiphertext:
    a = decode_residues(reader, params.N, params)
    b = decode_residues(reader, params.N, params)
    return RlweCiphertext(Polynomial(a), Polynomial(b), params.fresh_noise_budget_bits)


def seeded_rlwe_to_bytes(sct: SeededRlweCiphertext, params: RlweParams) -> bytes:
    return sct.seed + encode_residues(sct.b, params)


def seeded_rlwe_from_reader(reader: Reader, params: RlweParams) -> SeededRlweCiphertext:
    seed = reader.take(SEED_BYTES)
    return SeededRlweCiphertext(seed, Polynomial(decode_residues(reader, params.N, params)), params.fresh_noise_budget_bits)


def ciphertext_to_bytes(ct: LweCiphertext | RlweCiphertext, params: LatticeParams) -> bytes:
    if isinstance(params, LweParams):
        return lwe_ciphertext_to_bytes(ct, params)
    return rlwe_ciphertext_to_bytes(ct, params)


def ciphertext_from_reader(reader: Reader, params: LatticeParams) -> LweCiphertext | RlweCiphertext:
    if isinstance(params, LweParams):
        return lwe_ciphertext_from_reader(reader, params)
    return rlwe_ciphertext_from_reader(reader, params)


def seeded_to_bytes(sct: SeededLweCiphertext | SeededRlweCiphertext, params: LatticeParams) -> bytes:
    if isinstance(params, LweParams):
        return seeded_lwe_to_bytes(sct, params)
    return seeded_rlwe_to_bytes(sct, params)


def seeded_from_reader(reader: Reader, params: LatticeParams) -> SeededLweCiphertext | SeededRlweCiphertext:
    if isinstance(params, LweParams):
        return seeded_lwe_from_reader(reader, params)
    return seeded_rlwe_from_reader(reader, params)


def secret_key_to_bytes(sk: LweSecretKey | RlweSecretKey, params: LatticeParams) -> bytes:
    coeffs = sk.coeffs if isinstance(sk, LweSecretKey) else sk.s.coeffs
    return encode_residues(coeffs, params)


def secret_key_from_reader(reader: Reader, params: LatticeParams) -> LweSecretKey | RlweSecretKey:
    coeffs = decode_residues(reader, params.dimension, params)
    if isinstance(params, LweParams):
        return LweSecretKey(coeffs)
    return RlweSecretKey(Polynomial(coeffs))


# Additive objects


def _modulus_width(modulus: int) -> int:
    return (modulus.bit_length() + 7) // 8


def public_key_to_bytes(pk: AdditivePublicKey) -> bytes:
    width = _modulus_width(pk.modulus)
    return struct.pack("<H", width) + pk.modulus.to_bytes(width, "little")


def public_key_from_reader(reader: Reader) -> AdditivePublicKey:
    (width,) = reader.unpack(struct.Struct("<H"))
    modulus = int.from_bytes(reader.take(width), "little")
    if modulus < 2:
        raise FormatError("additive modulus must be >= 2")
    return AdditivePublicKey(modulus)


def keypair_to_bytes(kp: AdditiveKeypair) -> bytes:
    width = _modulus_width(kp.modulus)
    return public_key_to_bytes(kp.public) + kp.lam.to_bytes(width, "little") + kp.mu_inv.to_bytes(width, "little")


def keypair_from_reader(reader: Reader) -> AdditiveKeypair:
    pk = public_key_from_reader(reader)
    width = _modulus_width(pk.modulus)
    lam = int.from_bytes(reader.take(width), "little")
    mu_inv = int.from_bytes(reader.take(width), "little")
    return AdditiveKeypair(pk, lam, mu_inv)


def esk_to_bytes(esk: EncryptedSecretKey) -> bytes:
    """The encrypted key entries only: dimension × 2·ceil(bits/8) bytes."""
    return b"".join(ahe_ciphertext_to_bytes(esk.public_key, entry) for entry in esk.entries)


def esk_from_bytes(data: bytes, params: LatticeParams, pk: AdditivePublicKey) -> EncryptedSecretKey:
    width = pk.ciphertext_bytes
    if len(data) != params.dimension * width:
        raise FormatError(f"encrypted key must be {params.dimension * width} bytes, got {len(data)}")
    entries = tuple(ahe_ciphertext_from_bytes(pk, data[i * width : (i + 1) * width]) for i in range(params.dimension))
    return EncryptedSecretKey(params.scheme, entries, params.fingerprint, pk, compatible=check_compatibility(params, pk.plaintext_modulus))


def compressed_to_bytes(x: CompressedCiphertext, pk: AdditivePublicKey) -> bytes:
    layout = x.layout
    header = _COMPRESSED_HEADER.pack(layout.scheme.code, layout.slot_count, layout.slot_width, layout.params_fingerprint)
    return header + ahe_ciphertext_to_bytes(pk, x.payload)


def compressed_from_bytes(data: bytes, pk: AdditivePublicKey) -> CompressedCiphertext:
    reader = Reader(data)
    code, slot_count, width, fingerprint = reader.unpack(_COMPRESSED_HEADER)
    if slot_count < 1:
        raise FormatError("compressed ciphertext declares zero slots")
    payload = ahe_ciphertext_from_bytes(pk, reader.rest())
    return CompressedCiphertext(payload, SlotLayout(SchemeTag.from_code(code), slot_count, width, fingerprint))


# Envelope and files


def wrap(kind: FileKind, body: bytes) -> bytes:
    return MAGIC + bytes((FORMAT_VERSION, kind)) + body


def unwrap(data: bytes, expected: FileKind | None = None) -> tuple[FileKind, Reader]:
    if len(data) < ENVELOPE_BYTES or data[: len(MAGIC)] != MAGIC:
        raise FormatError("not an he-compress file (bad magic)")
    version, kind_byte = data[len(MAGIC)], data[len(MAGIC) + 1]
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version:#x}")
    try:
        kind = FileKind(kind_byte)
    except ValueError:
        raise FormatError(f"unknown file kind {kind_byte:#x}") from None
    if expected is not None and kind is not expected:
        raise FormatError(f"expected a {expected.name.lower()} file, got {kind.name.lower()}")
    return kind, Reader(data[ENVELOPE_BYTES:])


def dump_lattice_key(sk: LweSecretKey | RlweSecretKey, params: LatticeParams) -> bytes:
    return wrap(FileKind.LATTICE_KEY, encode_params(params) + secret_key_to_bytes(sk, params))


def load_lattice_key(data: bytes) -> tuple[LweSecretKey | RlweSecretKey, LatticeParams]:
    _, reader = unwrap(data, FileKind.LATTICE_KEY)
    params = decode_params(reader)
    sk = secret_key_from_reader(reader, params)
    reader.done()
    return sk, params


def dump_ciphertexts(cts, params: LatticeParams) -> bytes:
    body = encode_params(params) + struct.pack("<I", len(cts)) + b"".join(ciphertext_to_bytes(ct, params) for ct in cts)
    return wrap(FileKind.CIPHERTEXTS, body)


def load_ciphertexts(data: bytes) -> tuple[list, LatticeParams]:
    _, reader = unwrap(data, FileKind.CIPHERTEXTS)
    params = decode_params(reader)
    (count,) = reader.unpack(struct.Struct("<I"))
    cts = [ciphertext_from_reader(reader, params) for _ in range(count)]
    reader.done()
    return cts, params


def dump_seeded(scts, params: LatticeParams) -> bytes:
    body = encode_params(params) + struct.pack("<I", len(scts)) + b"".join(seeded_to_bytes(s, params) for s in scts)
    return wrap(FileKind.SEEDED_CIPHERTEXTS, body)


def load_seeded(data: bytes) -> tuple[list, LatticeParams]:
    _, reader = unwrap(data, FileKind.SEEDED_CIPHERTEXTS)
    params = decode_params(reader)
    (count,) = reader.unpack(struct.Struct("<I"))
    scts = [seeded_from_reader(reader, params) for _ in range(count)]
    reader.done()
    return scts, params


def dump_keypair(kp: AdditiveKeypair) -> bytes:
    return wrap(FileKind.ADDITIVE_KEYPAIR, keypair_to_bytes(kp))


def load_keypair(data: bytes) -> AdditiveKeypair:
    _, reader = unwrap(data, FileKind.ADDITIVE_KEYPAIR)
    kp = keypair_from_reader(reader)
    reader.done()
    return kp


def dump_public_key(pk: AdditivePublicKey) -> bytes:
    return wrap(FileKind.ADDITIVE_PUBLIC_KEY, public_key_to_bytes(pk))


def load_public_key(data: bytes) -> AdditivePublicKey:
    _, reader = unwrap(data, FileKind.ADDITIVE_PUBLIC_KEY)
    pk = public_key_from_reader(reader)
    reader.done()
    return pk


def dump_encrypted_key(esk: EncryptedSecretKey, params: LatticeParams) -> bytes:
    return wrap(FileKind.ENCRYPTED_KEY, encode_params(params) + public_key_to_bytes(esk.public_key) + esk_to_bytes(esk))


def load_encrypted_key(data: bytes) -> tuple[EncryptedSecretKey, LatticeParams]:
    _, reader = unwrap(data, FileKind.ENCRYPTED_KEY)
    params = decode_params(reader)
    pk = public_key_from_reader(reader)
    return esk_from_bytes(reader.rest(), params, pk), params


def dump_compressed(x: CompressedCiphertext, params: LatticeParams, pk: AdditivePublicKey) -> bytes:
    return wrap(FileKind.COMPRESSED, encode_params(params) + public_key_to_bytes(pk) + compressed_to_bytes(x, pk))


def load_compressed(data: bytes) -> tuple[CompressedCiphertext, LatticeParams, AdditivePublicKey]:
    _, reader = unwrap(data, FileKind.COMPRESSED)
    params = decode_params(reader)
    pk = public_key_from_reader(reader)
    return compressed_from_bytes(reader.rest(), pk), params, pk


def read_file(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e


def write_file(path: str | Path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise FormatError(f"cannot write {path}: {e}") from e
