"""
Server-side ciphertext compression under an additively encrypted lattice key.

The client encrypts every coefficient of its lattice secret key under an additive
scheme (Paillier). Given those encryptions, the server evaluates the linear part
of lattice decryption, b + Σ (q − a[i])·sk[i], homomorphically and returns one
additive ciphertext. The client decrypts it, reduces mod q and rounds by Δ.

As long as m > q + d·q² (d = n or N) the additive plaintext never wraps, so the
compressed result decrypts to exactly what direct lattice decryption returns.
Several such values fit side by side in one plaintext when m is large enough:
slot j occupies bits [j·w, (j+1)·w) with w = bitlen(q + d·q²).
"""

import logging
import random
import time
from collections.abc import Sequence

from he_compress.additive_he import PAILLIER, AdditiveScheme
from he_compress.core_math import floor_log2, round_half_up_div
from he_compress.errors import BatchCapacityError, CoefficientIndexError, IncompatibleParametersError, ParameterError
from he_compress.models import (
    AdditiveCiphertext,
    AdditiveKeypair,
    AdditivePublicKey,
    CompressedCiphertext,
    EncryptedSecretKey,
    LatticeParams,
    LweCiphertext,
    LweParams,
    LweSecretKey,
    RlweCiphertext,
    RlweParams,
    RlweSecretKey,
    SchemeTag,
    SlotLayout,
)

logger = logging.getLogger(__name__)


def compression_bound(params: LatticeParams, d: int | None = None) -> int:
    """q + d·q², the largest value the additive plaintext has to hold for one slot."""
    d = params.dimension if d is None else d
    return params.q + d * params.q * params.q


def check_compatibility(params: LatticeParams, m: int, d: int | None = None) -> bool:
    """True iff m > q + d·q² (strict)."""
    return m > compression_bound(params, d)


def slot_width(params: LatticeParams, d: int | None = None) -> int:
    """Bits per slot: bitlen(q + d·q²), so every slot value is < 2^w."""
    return compression_bound(params, d).bit_length()


def batch_capacity(params: LatticeParams, m: int, d: int | None = None) -> int:
    """How many compressed values fit in one additive plaintext: floor(floor_log2(m) / w).

    capacity·w <= floor_log2(m) guarantees the packed value stays below m.
    """
    if not check_compatibility(params, m, d):
        raise IncompatibleParametersError(f"additive modulus ({m.bit_length()} bits) does not exceed q + d·q² for {params.label or params.scheme.value}")
    capacity = floor_log2(m) // slot_width(params, d)
    if capacity == 0:
        raise BatchCapacityError(f"additive modulus ({m.bit_length()} bits) is too small to batch: slot width is {slot_width(params, d)} bits")
    return capacity


def _require_compatible(pk: AdditivePublicKey, params: LatticeParams, scheme: AdditiveScheme) -> None:
    m = scheme.plaintext_modulus(pk)
    if not check_compatibility(params, m):
        raise IncompatibleParametersError(f"additive modulus ({m.bit_length()} bits) must exceed q + d·q² ({compression_bound(params).bit_length()} bits) for {params.label or params.scheme.value}")


def encrypt_lattice_key(
    pk: AdditivePublicKey,
    sk: LweSecretKey | RlweSecretKey,
    params: LatticeParams,
    rng: random.Random,
    scheme: AdditiveScheme = PAILLIER,
) -> EncryptedSecretKey:
    """Encrypt every secret-key coefficient under the additive public key."""
    coeffs = sk.coeffs if isinstance(sk, LweSecretKey) else sk.s.coeffs
    if isinstance(sk, LweSecretKey) != isinstance(params, LweParams):
        raise ParameterError("secret key and parameters belong to different schemes")
    if len(coeffs) != params.dimension:
        raise ParameterError(f"secret key has {len(coeffs)} coefficients, params expect {params.dimension}")
    _require_compatible(pk, params, scheme)

    started = time.perf_counter()
    entries = tuple(scheme.encrypt(pk, c, rng) for c in coeffs)
    logger.info("Encrypted %s secret key: dimension=%d, %.2fs", params.scheme.value, len(entries), time.perf_counter() - started)
    return EncryptedSecretKey(params.scheme, entries, params.fingerprint, pk, compatible=True)


def _check_key_matches(esk: EncryptedSecretKey, params: LatticeParams) -> None:
    if esk.scheme is not params.scheme:
        raise ParameterError(f"encrypted key is for {esk.scheme.value}, params are {params.scheme.value}")
    if esk.params_fingerprint != params.fingerprint:
        raise ParameterError("encrypted key fingerprint does not match the ciphertext parameters")
    if esk.dimension != params.dimension:
        raise ParameterError(f"encrypted key has {esk.dimension} entries, params expect {params.dimension}")
    if not esk.compatible:
        raise IncompatibleParametersError("encrypted key was built with an additive modulus too small for these parameters")


def _linear_phase(esk: EncryptedSecretKey, b: int, scalars: Sequence[int], scheme: AdditiveScheme) -> AdditiveCiphertext:
    """b ⊕ Σ scalars[i] ⊗ esk[i]."""
    pk = esk.public_key
    acc: AdditiveCiphertext | None = None
    for entry, k in zip(esk.entries, scalars):
        term = scheme.plain_mul(pk, entry, k)
        acc = term if acc is None else scheme.add(pk, acc, term)
    return scheme.add_plain(pk, acc, b)


def _lwe_scalars(ct: LweCiphertext, params: LweParams) -> tuple[int, ...]:
    # a[i] == 0 gives the scalar q, not 0
    return tuple(params.q - x for x in ct.a)


def _rlwe_scalars(ct: RlweCiphertext, k: int, params: RlweParams) -> tuple[int, ...]:
    N, q, a = params.N, params.q, ct.a.coeffs
    return tuple(q - a[k - i] if i <= k else a[N + k - i] for i in range(N))


def _check_lwe_ciphertext(ct: LweCiphertext, params: LweParams) -> None:
    if len(ct.a) != params.n:
        raise ParameterError(f"ciphertext mask has length {len(ct.a)}, params expect n={params.n}")


def _check_rlwe_ciphertext(ct: RlweCiphertext, params: RlweParams) -> None:
    if len(ct.a) != params.N or len(ct.b) != params.N:
        raise ParameterError(f"ciphertext polynomials must have length N={params.N}")


def _check_index(k: int, params: RlweParams) -> None:
    if not 0 <= k < params.N:
        raise CoefficientIndexError(f"coefficient index {k} outside [0, {params.N})")


def _single_layout(params: LatticeParams) -> SlotLayout:
    return SlotLayout(params.scheme, 1, slot_width(params), params.fingerprint)


def lwe_compress(esk: EncryptedSecretKey, ct: LweCiphertext, params: LweParams, scheme: AdditiveScheme = PAILLIER) -> CompressedCiphertext:
    """x = b ⊕ Σ (q − a[i]) ⊗ esk[i]."""
    _check_key_matches(esk, params)
    _check_lwe_ciphertext(ct, params)
    payload = _linear_phase(esk, ct.b, _lwe_scalars(ct, params), scheme)
    logger.debug("Compressed LWE ciphertext (n=%d) into one additive ciphertext", params.n)
    return CompressedCiphertext(payload, _single_layout(params))


def rlwe_compress(esk: EncryptedSecretKey, ct: RlweCiphertext, k: int, params: RlweParams, scheme: AdditiveScheme = PAILLIER) -> CompressedCiphertext:
    """Compress coefficient k: B[k] ⊕ Σ_{i<=k} (q − A[k−i]) ⊗ esk[i] ⊕ Σ_{i>k} A[N+k−i] ⊗ esk[i]."""
    _check_key_matches(esk, params)
    _check_rlwe_ciphertext(ct, params)
    _check_index(k, params)
    payload = _linear_phase(esk, ct.b[k], _rlwe_scalars(ct, k, params), scheme)
    logger.debug("Compressed RLWE coefficient %d (N=%d)", k, params.N)
    return CompressedCiphertext(payload, _single_layout(params))


def _pack(esk: EncryptedSecretKey, singles: Sequence[AdditiveCiphertext], params: LatticeParams, scheme: AdditiveScheme) -> CompressedCiphertext:
    pk = esk.public_key
    if not singles:
        raise ParameterError("batch must contain at least one ciphertext")
    capacity = batch_capacity(params, scheme.plaintext_modulus(pk))
    if len(singles) > capacity:
        raise BatchCapacityError(f"batch of {len(singles)} exceeds capacity {capacity}")
    w = slot_width(params)
    acc = singles[0]
    for j, single in enumerate(singles[1:], start=1):
        acc = scheme.add(pk, acc, scheme.plain_mul(pk, single, 1 << (j * w)))
    logger.debug("Packed %d compressed values into one additive ciphertext (slot width %d)", len(singles), w)
    return CompressedCiphertext(acc, SlotLayout(params.scheme, len(singles), w, params.fingerprint))


def lwe_compress_batch(esk: EncryptedSecretKey, cts: Sequence[LweCiphertext], params: LweParams, scheme: AdditiveScheme = PAILLIER) -> CompressedCiphertext:
    """Slot j carries ciphertext j: the payload encrypts Σ_j 2^{jw}·(b_j + Σ_i (q − a_j[i])·sk[i])."""
    _check_key_matches(esk, params)
    if cts:
        batch_capacity(params, scheme.plaintext_modulus(esk.public_key))
    singles = [lwe_compress(esk, ct, params, scheme).payload for ct in cts]
    return _pack(esk, singles, params, scheme)


def rlwe_compress_batch(esk: EncryptedSecretKey, ct: RlweCiphertext, ks: Sequence[int], params: RlweParams, scheme: AdditiveScheme = PAILLIER) -> CompressedCiphertext:
    """Slot j carries coefficient ks[j]. Repeated indices are allowed."""
    _check_key_matches(esk, params)
    for k in ks:
        _check_index(k, params)
    if ks:
        batch_capacity(params, scheme.plaintext_modulus(esk.public_key))
    singles = [rlwe_compress(esk, ct, k, params, scheme).payload for k in ks]
    return _pack(esk, singles, params, scheme)


def rerandomize_compressed(pk: AdditivePublicKey, x: CompressedCiphertext, rng: random.Random, scheme: AdditiveScheme = PAILLIER) -> CompressedCiphertext:
    """Fresh additive randomness, same layout and decoded values."""
    return CompressedCiphertext(scheme.rerandomize(pk, x.payload, rng), x.layout)


def _check_layout(x: CompressedCiphertext, params: LatticeParams) -> None:
    if x.layout.scheme is not params.scheme:
        raise ParameterError(f"compressed ciphertext is {x.layout.scheme.value}, params are {params.scheme.value}")
    if x.layout.params_fingerprint != params.fingerprint:
        raise ParameterError("compressed ciphertext fingerprint does not match the parameters")
    if x.layout.slot_width != slot_width(params):
        raise ParameterError(f"slot width {x.layout.slot_width} does not match the parameters ({slot_width(params)})")


def _round_slot(value: int, params: LatticeParams) -> int:
    return round_half_up_div(value % params.q, params.delta) % params.p


def modified_decrypt(kp: AdditiveKeypair, x: CompressedCiphertext, params: LatticeParams, scheme: AdditiveScheme = PAILLIER) -> int:
    """y = ADec(x); μ' = ⌊(y mod q)/Δ⌉ mod p. Single-slot payloads only."""
    _check_layout(x, params)
    if x.layout.slot_count != 1:
        raise ParameterError(f"payload has {x.layout.slot_count} slots; use modified_decrypt_batch")
    return _round_slot(scheme.decrypt(kp, x.payload), params)


def modified_lwe_decrypt(kp: AdditiveKeypair, x: CompressedCiphertext, params: LweParams, scheme: AdditiveScheme = PAILLIER) -> int:
    if x.layout.scheme is not SchemeTag.LWE:
        raise ParameterError("not an LWE compressed ciphertext")
    return modified_decrypt(kp, x, params, scheme)


def modified_rlwe_decrypt(kp: AdditiveKeypair, x: CompressedCiphertext, params: RlweParams, scheme: AdditiveScheme = PAILLIER) -> int:
    if x.layout.scheme is not SchemeTag.RLWE:
        raise ParameterError("not an RLWE compressed ciphertext")
    return modified_decrypt(kp, x, params, scheme)


def modified_decrypt_batch(kp: AdditiveKeypair, x: CompressedCiphertext, params: LatticeParams, scheme: AdditiveScheme = PAILLIER) -> list[int]:
    """Slot j → ⌊((y >> j·w) mod 2^w mod q)/Δ⌉ mod p."""
    _check_layout(x, params)
    w = x.layout.slot_width
    if x.layout.slot_count > 1 and x.layout.slot_count * w > floor_log2(scheme.plaintext_modulus(kp.public)):
        raise ParameterError(f"layout of {x.layout.slot_count} slots × {w} bits does not fit the additive modulus")
    y = scheme.decrypt(kp, x.payload)
    mask = (1 << w) - 1
    return [_round_slot((y >> (j * w)) & mask, params) for j in range(x.layout.slot_count)]


def lwe_phase_clear(sk: LweSecretKey, ct: LweCiphertext, params: LweParams) -> int:
    """The additive plaintext lwe_compress produces, computed in the clear (no reduction)."""
    _check_lwe_ciphertext(ct, params)
    return ct.b + sum(k * s for k, s in zip(_lwe_scalars(ct, params), sk.coeffs))


def rlwe_phase_clear(sk: RlweSecretKey, ct: RlweCiphertext, k: int, params: RlweParams) -> int:
    """The additive plaintext rlwe_compress produces for coefficient k, computed in the clear."""
    _check_rlwe_ciphertext(ct, params)
    _check_index(k, params)
    return ct.b[k] + sum(c * s for c, s in zip(_rlwe_scalars(ct, k, params), sk.s.coeffs))
