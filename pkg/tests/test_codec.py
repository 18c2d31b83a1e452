"""Tests for the binary formats."""

import struct

import pytest

from he_compress import codec
from he_compress.additive_he import ahe_keypair_from_primes
from he_compress.codec import FileKind, Reader
from he_compress.compression import encrypt_lattice_key, lwe_compress, lwe_compress_batch
from he_compress.errors import FormatError
from he_compress.lwe_scheme import lwe_encrypt, lwe_encrypt_seeded, lwe_keygen
from he_compress.models import LweCiphertext, Polynomial
from he_compress.rlwe_scheme import rlwe_encrypt, rlwe_keygen


def test_ciphertext_sizes(n630, ring16, rng):
    sk = lwe_keygen(n630, rng)
    assert len(codec.ciphertext_to_bytes(lwe_encrypt(sk, 1, n630, rng), n630)) == 631 * 8
    assert len(codec.seeded_to_bytes(lwe_encrypt_seeded(sk, 1, n630, None, rng), n630)) == 24

    rsk = rlwe_keygen(ring16, rng)
    ct = rlwe_encrypt(rsk, Polynomial((1,) * 16), ring16, rng)
    assert len(codec.ciphertext_to_bytes(ct, ring16)) == 2 * 16 * 4
    assert len(codec.secret_key_to_bytes(rsk, ring16)) == 16 * 4


def test_compressed_layout_bytes(toy_lwe, keypair_512, rng):
    sk = lwe_keygen(toy_lwe, rng)
    esk = encrypt_lattice_key(keypair_512.public, sk, toy_lwe, rng)
    x = lwe_compress_batch(esk, [lwe_encrypt(sk, 2, toy_lwe, rng)] * 3, toy_lwe)
    data = codec.compressed_to_bytes(x, keypair_512.public)
    assert len(data) == codec.COMPRESSED_HEADER_BYTES + 128
    assert codec.COMPRESSED_HEADER_BYTES == 13
    scheme, slots, width, fingerprint = struct.unpack("<BHH8s", data[:13])
    assert (scheme, slots, width, fingerprint) == (1, 3, 14, toy_lwe.fingerprint)
    assert codec.compressed_from_bytes(data, keypair_512.public) == x


def test_encrypted_key_bytes(toy_lwe, toy_keypair, rng):
    esk = encrypt_lattice_key(toy_keypair.public, lwe_keygen(toy_lwe, rng), toy_lwe, rng)
    data = codec.esk_to_bytes(esk)
    assert len(data) == 2 * toy_keypair.public.ciphertext_bytes
    restored = codec.esk_from_bytes(data, toy_lwe, toy_keypair.public)
    assert restored == esk
    with pytest.raises(FormatError):
        codec.esk_from_bytes(data[:-1], toy_lwe, toy_keypair.public)


def test_encrypted_key_compatibility_recomputed(toy_lwe):
    small = ahe_keypair_from_primes(61, 67)
    entries = (1).to_bytes(small.public.ciphertext_bytes, "little") * 2
    esk = codec.esk_from_bytes(entries, toy_lwe, small.public)
    assert esk.compatible is False


def test_params_header_preserves_fingerprint_and_label(config):
    for label in config.labels():
        params = config.parameter_set(label)
        reader = Reader(codec.encode_params(params))
        decoded = codec.decode_params(reader)
        reader.done()
        assert decoded == params
        assert decoded.label == label
        assert decoded.fingerprint == params.fingerprint


def test_lattice_key_file(toy_rlwe, rng):
    sk = rlwe_keygen(toy_rlwe, rng)
    data = codec.dump_lattice_key(sk, toy_rlwe)
    assert data[:4] == b"HEC1"
    assert data[4] == codec.FORMAT_VERSION
    assert data[5] == FileKind.LATTICE_KEY
    assert codec.load_lattice_key(data) == (sk, toy_rlwe)


def test_ciphertext_files_keep_count_and_params(toy_lwe, rng):
    sk = lwe_keygen(toy_lwe, rng)
    cts = [lwe_encrypt(sk, mu, toy_lwe, rng) for mu in range(4)]
    loaded, params = codec.load_ciphertexts(codec.dump_ciphertexts(cts, toy_lwe))
    assert loaded == cts
    assert params.fingerprint == toy_lwe.fingerprint
    assert all(ct.noise_budget_bits == toy_lwe.fresh_noise_budget_bits for ct in loaded)

    scts = [lwe_encrypt_seeded(sk, 1, toy_lwe, None, rng) for _ in range(3)]
    loaded_seeded, _ = codec.load_seeded(codec.dump_seeded(scts, toy_lwe))
    assert loaded_seeded == scts


def test_additive_key_files(toy_keypair):
    assert codec.load_keypair(codec.dump_keypair(toy_keypair)) == toy_keypair
    assert codec.load_public_key(codec.dump_public_key(toy_keypair.public)) == toy_keypair.public


def test_encrypted_key_and_compressed_files(toy_lwe, toy_keypair, rng):
    sk = lwe_keygen(toy_lwe, rng)
    esk = encrypt_lattice_key(toy_keypair.public, sk, toy_lwe, rng)
    loaded_esk, params = codec.load_encrypted_key(codec.dump_encrypted_key(esk, toy_lwe))
    assert loaded_esk == esk
    assert params == toy_lwe

    x = lwe_compress(esk, lwe_encrypt(sk, 3, toy_lwe, rng), toy_lwe)
    loaded_x, params, pk = codec.load_compressed(codec.dump_compressed(x, toy_lwe, toy_keypair.public))
    assert (loaded_x, params, pk) == (x, toy_lwe, toy_keypair.public)


def test_envelope_errors(toy_keypair):
    data = codec.dump_public_key(toy_keypair.public)
    with pytest.raises(FormatError, match="magic"):
        codec.unwrap(b"XXXX" + data[4:])
    with pytest.raises(FormatError, match="version"):
        codec.unwrap(data[:4] + b"\x02" + data[5:])
    with pytest.raises(FormatError, match="kind"):
        codec.unwrap(data[:5] + b"\x63" + data[6:])
    with pytest.raises(FormatError, match="expected"):
        codec.load_keypair(data)
    with pytest.raises(FormatError):
        codec.unwrap(b"HEC")


def test_truncated_and_trailing_bytes(toy_lwe, rng):
    data = codec.dump_lattice_key(lwe_keygen(toy_lwe, rng), toy_lwe)
    with pytest.raises(FormatError, match="truncated"):
        codec.load_lattice_key(data[:-1])
    with pytest.raises(FormatError, match="trailing"):
        codec.load_lattice_key(data + b"\x00")


def test_residue_not_below_q(toy_lwe):
    bad = LweCiphertext((0, 0), 0)
    data = bytearray(codec.dump_ciphertexts([bad], toy_lwe))
    data[-1] = 64
    with pytest.raises(FormatError, match="below q"):
        codec.load_ciphertexts(bytes(data))


def test_read_missing_file(tmp_path):
    with pytest.raises(FormatError, match="cannot read"):
        codec.read_file(tmp_path / "missing.bin")


def test_write_then_read_file(tmp_path):
    path = tmp_path / "blob.bin"
    codec.write_file(path, b"HEC1")
    assert codec.read_file(path) == b"HEC1"


def test_label_not_utf8(toy_lwe, rng):
    data = bytearray(codec.dump_lattice_key(lwe_keygen(toy_lwe, rng), toy_lwe))
    data[data.index(b"toy-lwe")] = 0xFF
    with pytest.raises(FormatError, match="UTF-8"):
        codec.load_lattice_key(bytes(data))
