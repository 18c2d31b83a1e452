"""
Additively homomorphic encryption: a small capability contract plus Paillier.

Paillier uses the simplified generator g = N+1, so encryption is
(1 + N·x)·r^N mod N² and decryption is L(c^λ mod N²)·μ mod N with
L(u) = (u − 1) / N and μ = λ^-1 mod N. Big-integer work goes through gmpy2.
"""

import logging
import math
import random
from abc import ABC, abstractmethod

import gmpy2

from he_compress.errors import FormatError, KeyGenerationError, MessageRangeError, ParameterError
from he_compress.models import AdditiveCiphertext, AdditiveKeypair, AdditivePublicKey

logger = logging.getLogger(__name__)

MIN_KEY_BITS = 16


def _powmod(base: int, exponent: int, modulus: int) -> int:
    return int(gmpy2.powmod(base, exponent, modulus))


def _invert(a: int, modulus: int) -> int:
    inverse = int(gmpy2.invert(a, modulus))
    if inverse == 0:
        raise ParameterError(f"{a} has no inverse modulo the key modulus")
    return inverse


def _random_prime(bits: int, rng: random.Random, rounds: int, max_attempts: int) -> int:
    """Random prime of exactly `bits` bits with its two top bits set."""
    top = (1 << (bits - 1)) | (1 << (bits - 2))
    for attempt in range(1, max_attempts + 1):
        candidate = rng.getrandbits(bits) | top | 1
        if gmpy2.is_prime(candidate, rounds):
            logger.debug("Found %d-bit prime after %d candidates", bits, attempt)
            return candidate
    raise KeyGenerationError(f"no {bits}-bit prime found in {max_attempts} candidates")


def ahe_keypair_from_primes(p: int, q: int) -> AdditiveKeypair:
    """Build a keypair from known primes. Used for pinned test keys."""
    if p == q:
        raise ParameterError("Paillier primes must be distinct")
    modulus = p * q
    lam = math.lcm(p - 1, q - 1)
    if math.gcd(modulus, (p - 1) * (q - 1)) != 1:
        raise ParameterError("gcd(pq, (p-1)(q-1)) must be 1")
    return AdditiveKeypair(AdditivePublicKey(modulus), lam, _invert(lam, modulus))


def ahe_keygen(bits: int, rng: random.Random, rounds: int = 64, max_attempts: int = 10_000) -> AdditiveKeypair:
    """Generate a Paillier keypair whose modulus has exactly `bits` bits.

    The two primes are bits//2 and bits − bits//2 bits long; both have their top
    two bits set so the product never loses a bit.
    """
    if bits < MIN_KEY_BITS:
        raise ParameterError(f"additive key size must be >= {MIN_KEY_BITS} bits, got {bits}")
    half = bits // 2
    while True:
        p = _random_prime(bits - half, rng, rounds, max_attempts)
        q = _random_prime(half, rng, rounds, max_attempts)
        if p == q:
            continue
        keypair = ahe_keypair_from_primes(p, q)
        if keypair.public.bits != bits:
            continue
        logger.info("Generated %d-bit Paillier key", bits)
        return keypair


def _check_plaintext(pk: AdditivePublicKey, x: int) -> None:
    if not 0 <= x < pk.modulus:
        raise MessageRangeError(f"additive plaintext outside Z_m (m has {pk.bits} bits)")


def _check_ciphertext(pk: AdditivePublicKey, c: AdditiveCiphertext) -> None:
    if not 0 <= c.value < pk.modulus_sq:
        raise FormatError("additive ciphertext value is not below modulus^2")


def ahe_encrypt_with_nonce(pk: AdditivePublicKey, x: int, r: int) -> AdditiveCiphertext:
    """(1 + N·x)·r^N mod N² for a caller-chosen nonce r coprime to N."""
    _check_plaintext(pk, x)
    if not 0 < r < pk.modulus or math.gcd(r, pk.modulus) != 1:
        raise ParameterError("nonce must be a unit modulo N")
    n, n_sq = pk.modulus, pk.modulus_sq
    return AdditiveCiphertext((1 + n * x) % n_sq * _powmod(r, n, n_sq) % n_sq)


def _random_unit(pk: AdditivePublicKey, rng: random.Random) -> int:
    while True:
        r = rng.randrange(1, pk.modulus)
        if math.gcd(r, pk.modulus) == 1:
            return r


def ahe_encrypt(pk: AdditivePublicKey, x: int, rng: random.Random) -> AdditiveCiphertext:
    return ahe_encrypt_with_nonce(pk, x, _random_unit(pk, rng))


def ahe_decrypt(kp: AdditiveKeypair, c: AdditiveCiphertext) -> int:
    _check_ciphertext(kp.public, c)
    n, n_sq = kp.modulus, kp.modulus_sq
    u = _powmod(c.value, kp.lam, n_sq)
    return (u - 1) // n * kp.mu_inv % n


def ahe_add(pk: AdditivePublicKey, c1: AdditiveCiphertext, c2: AdditiveCiphertext) -> AdditiveCiphertext:
    """c1 ⊕ c2: decrypts to (x1 + x2) mod m."""
    _check_ciphertext(pk, c1)
    _check_ciphertext(pk, c2)
    return AdditiveCiphertext(int(gmpy2.mpz(c1.value) * c2.value % pk.modulus_sq))


def ahe_plain_mul(pk: AdditivePublicKey, c: AdditiveCiphertext, k: int) -> AdditiveCiphertext:
    """k ⊗ c: decrypts to k·x mod m. k is reduced mod m first."""
    _check_ciphertext(pk, c)
    if k < 0:
        raise ParameterError(f"plaintext scalar must be non-negative, got {k}")
    return AdditiveCiphertext(_powmod(c.value, k % pk.modulus, pk.modulus_sq))


def ahe_add_plain(pk: AdditivePublicKey, c: AdditiveCiphertext, x: int) -> AdditiveCiphertext:
    """c ⊕ x for a clear x: multiplies by the trivial encryption 1 + N·x."""
    _check_ciphertext(pk, c)
    n_sq = pk.modulus_sq
    return AdditiveCiphertext(int(gmpy2.mpz(c.value) * ((1 + pk.modulus * (x % pk.modulus)) % n_sq) % n_sq))


def ahe_rerandomize(pk: AdditivePublicKey, c: AdditiveCiphertext, rng: random.Random) -> AdditiveCiphertext:
    """c ⊕ Enc(0): same plaintext, fresh-looking ciphertext."""
    return ahe_add(pk, c, ahe_encrypt(pk, 0, rng))


def ahe_ciphertext_to_bytes(pk: AdditivePublicKey, c: AdditiveCiphertext) -> bytes:
    _check_ciphertext(pk, c)
    return c.value.to_bytes(pk.ciphertext_bytes, "little")


def ahe_ciphertext_from_bytes(pk: AdditivePublicKey, data: bytes) -> AdditiveCiphertext:
    if len(data) != pk.ciphertext_bytes:
        raise FormatError(f"additive ciphertext must be {pk.ciphertext_bytes} bytes, got {len(data)}")
    c = AdditiveCiphertext(int.from_bytes(data, "little"))
    _check_ciphertext(pk, c)
    return c


class AdditiveScheme(ABC):
    """What compression needs from an additive scheme: Enc, Dec, ⊕, ⊗ and the plaintext modulus."""

    name: str

    @abstractmethod
    def plaintext_modulus(self, pk: AdditivePublicKey) -> int: ...

    @abstractmethod
    def ciphertext_bytes(self, pk: AdditivePublicKey) -> int: ...

    @abstractmethod
    def encrypt(self, pk: AdditivePublicKey, x: int, rng: random.Random) -> AdditiveCiphertext: ...

    @abstractmethod
    def decrypt(self, kp: AdditiveKeypair, c: AdditiveCiphertext) -> int: ...

    @abstractmethod
    def add(self, pk: AdditivePublicKey, c1: AdditiveCiphertext, c2: AdditiveCiphertext) -> AdditiveCiphertext: ...

    @abstractmethod
    def plain_mul(self, pk: AdditivePublicKey, c: AdditiveCiphertext, k: int) -> AdditiveCiphertext: ...

    @abstractmethod
    def add_plain(self, pk: AdditivePublicKey, c: AdditiveCiphertext, x: int) -> AdditiveCiphertext: ...

    def rerandomize(self, pk: AdditivePublicKey, c: AdditiveCiphertext, rng: random.Random) -> AdditiveCiphertext:
        return self.add(pk, c, self.encrypt(pk, 0, rng))


class PaillierScheme(AdditiveScheme):
    name = "paillier"

    def plaintext_modulus(self, pk: AdditivePublicKey) -> int:
        return pk.plaintext_modulus

    def ciphertext_bytes(self, pk: AdditivePublicKey) -> int:
        return pk.ciphertext_bytes

    def encrypt(self, pk: AdditivePublicKey, x: int, rng: random.Random) -> AdditiveCiphertext:
        return ahe_encrypt(pk, x, rng)

    def decrypt(self, kp: AdditiveKeypair, c: AdditiveCiphertext) -> int:
        return ahe_decrypt(kp, c)

    def add(self, pk: AdditivePublicKey, c1: AdditiveCiphertext, c2: AdditiveCiphertext) -> AdditiveCiphertext:
        return ahe_add(pk, c1, c2)

    def plain_mul(self, pk: AdditivePublicKey, c: AdditiveCiphertext, k: int) -> AdditiveCiphertext:
        return ahe_plain_mul(pk, c, k)

    def add_plain(self, pk: AdditivePublicKey, c: AdditiveCiphertext, x: int) -> AdditiveCiphertext:
        return ahe_add_plain(pk, c, x)

    def rerandomize(self, pk: AdditivePublicKey, c: AdditiveCiphertext, rng: random.Random) -> AdditiveCiphertext:
        return ahe_rerandomize(pk, c, rng)


PAILLIER = PaillierScheme()
