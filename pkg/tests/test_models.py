"""Tests for data models."""

import pytest

from he_compress.errors import ParameterError
from he_compress.models import (
    AdditivePublicKey,
    LweParams,
    NoiseParams,
    RlweParams,
    SchemeTag,
    SlotLayout,
)

NOISE = NoiseParams(3.2, 20)


def test_noise_params_validation():
    with pytest.raises(ParameterError):
        NoiseParams(0, 5)
    with pytest.raises(ParameterError):
        NoiseParams(3.2, 0)


def test_lwe_params_derived_values():
    params = LweParams(630, 64, 16, NOISE, "n630")
    assert params.q == 2**64
    assert params.delta == 2**60
    assert params.dimension == 630
    assert params.residue_bytes == 8
    assert params.seed_bits == 128
    assert params.scheme is SchemeTag.LWE


def test_lwe_params_validation():
    with pytest.raises(ParameterError):
        LweParams(0, 64, 16, NOISE)
    with pytest.raises(ParameterError):
        LweParams(4, 3, 16, NOISE)  # p > q
    with pytest.raises(ParameterError):
        LweParams(4, 6, 1, NOISE)


def test_rlwe_params_requires_power_of_two():
    assert RlweParams(1024, 27, 16, NOISE).residue_bytes == 4
    with pytest.raises(ParameterError):
        RlweParams(1000, 27, 16, NOISE)


def test_fresh_noise_budget():
    # Δ/2 = 2^59, bound 20 has 5 bits
    assert LweParams(630, 64, 16, NOISE).fresh_noise_budget_bits == 54
    # Δ/2 = 8 (3 bits), bound 3 has 2 bits
    assert LweParams(2, 6, 4, NoiseParams(0.5, 3)).fresh_noise_budget_bits == 1


def test_fingerprint_ignores_label_but_not_values():
    a = LweParams(630, 64, 16, NOISE, "one")
    b = LweParams(630, 64, 16, NOISE, "two")
    assert a == b
    assert a.fingerprint == b.fingerprint
    assert len(a.fingerprint) == 8
    assert a.fingerprint != LweParams(630, 64, 8, NOISE).fingerprint
    assert LweParams(16, 27, 16, NOISE).fingerprint != RlweParams(16, 27, 16, NOISE).fingerprint


def test_scheme_tag_codes():
    assert SchemeTag.from_code(SchemeTag.LWE.code) is SchemeTag.LWE
    assert SchemeTag.from_code(SchemeTag.RLWE.code) is SchemeTag.RLWE
    with pytest.raises(ParameterError):
        SchemeTag.from_code(0x7F)


def test_additive_public_key_sizes():
    pk = AdditivePublicKey(10403)
    assert pk.modulus_sq == 10403**2
    assert pk.bits == 14
    assert pk.ciphertext_bytes == 4
    assert AdditivePublicKey((1 << 3071) + 1).ciphertext_bytes == 768


def test_slot_layout_needs_a_slot():
    with pytest.raises(ParameterError):
        SlotLayout(SchemeTag.LWE, 0, 14, bytes(8))
