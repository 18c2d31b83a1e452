"""
Core data models for he-compress.

Every value here is immutable once built. Residues are plain Python ints in the
canonical range [0, q); vectors and polynomials are tuples of them.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum

from he_compress.errors import ParameterError

# λ of the seed-compression technique: seeds are 128 bits.
SEED_BYTES = 16


class SchemeTag(Enum):
    """Lattice scheme a key or ciphertext belongs to."""

    LWE = "lwe"
    RLWE = "rlwe"

    @property
    def code(self) -> int:
        """One-byte tag used by the binary formats."""
        return 1 if self is SchemeTag.LWE else 2

    @classmethod
    def from_code(cls, code: int) -> "SchemeTag":
        for tag in cls:
            if tag.code == code:
                return tag
        raise ParameterError(f"Unknown scheme tag byte: {code:#x}")


@dataclass(frozen=True)
class NoiseParams:
    """Discrete Gaussian error distribution with a hard rejection bound."""

    sigma: float
    bound: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.bound < 1:
            raise ParameterError(f"noise bound must be >= 1, got {self.bound}")


def _fingerprint(*parts: object) -> bytes:
    canonical = "|".join(str(part) for part in parts).encode("utf-8")
    return hashlib.blake2b(canonical, digest_size=8).digest()


def _validate_moduli(log2_q: int, p: int) -> None:
    if log2_q < 1:
        raise ParameterError(f"log2_q must be >= 1, got {log2_q}")
    if p < 2:
        raise ParameterError(f"plaintext modulus p must be >= 2, got {p}")
    if p > 2**log2_q:
        raise ParameterError(f"plaintext modulus p={p} exceeds q=2^{log2_q}")


@dataclass(frozen=True)
class LweParams:
    """Parameters of the LWE scheme: dimension n, q = 2^log2_q, plaintext modulus p."""

    n: int
    log2_q: int
    p: int
    noise: NoiseParams
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"LWE dimension n must be >= 1, got {self.n}")
        _validate_moduli(self.log2_q, self.p)

    scheme = SchemeTag.LWE
    seed_bits = SEED_BYTES * 8

    @property
    def q(self) -> int:
        return 1 << self.log2_q

    @property
    def delta(self) -> int:
        return self.q // self.p

    @property
    def dimension(self) -> int:
        """Number of secret-key coefficients (n)."""
        return self.n

    @property
    def residue_bytes(self) -> int:
        """Byte width of one serialized Z_q residue."""
        return (self.log2_q + 7) // 8

    @property
    def fresh_noise_budget_bits(self) -> int:
        """floor(log2(Δ/2)) minus the bit size of the noise bound."""
        return (max(self.delta // 2, 1)).bit_length() - 1 - self.noise.bound.bit_length()

    @property
    def fingerprint(self) -> bytes:
        """8-byte digest binding keys and compressed ciphertexts to these parameters."""
        return _fingerprint(self.scheme.value, self.n, self.log2_q, self.p, repr(self.noise.sigma), self.noise.bound)


@dataclass(frozen=True)
class RlweParams:
    """Parameters of the RLWE scheme over Z_q[X]/(X^N+1)."""

    N: int
    log2_q: int
    p: int
    noise: NoiseParams
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise ParameterError(f"ring degree N must be a power of two, got {self.N}")
        _validate_moduli(self.log2_q, self.p)

    scheme = SchemeTag.RLWE
    seed_bits = SEED_BYTES * 8

    @property
    def q(self) -> int:
        return 1 << self.log2_q

    @property
    def delta(self) -> int:
        return self.q // self.p

    @property
    def dimension(self) -> int:
        """Number of secret-key coefficients (N)."""
        return self.N

    @property
    def residue_bytes(self) -> int:
        return (self.log2_q + 7) // 8

    @property
    def fresh_noise_budget_bits(self) -> int:
        """floor(log2(Δ/2)) minus the bit size of the noise bound."""
        return (max(self.delta // 2, 1)).bit_length() - 1 - self.noise.bound.bit_length()

    @property
    def fingerprint(self) -> bytes:
        return _fingerprint(self.scheme.value, self.N, self.log2_q, self.p, repr(self.noise.sigma), self.noise.bound)


LatticeParams = LweParams | RlweParams


@dataclass(frozen=True)
class Polynomial:
    """Element of Z_q[X]/(X^N+1) (or R_p for plaintexts), lowest degree first."""

    coeffs: tuple[int, ...]

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, index: int) -> int:
        return self.coeffs[index]

    def __iter__(self):
        return iter(self.coeffs)


@dataclass(frozen=True)
class LweSecretKey:
    coeffs: tuple[int, ...]


@dataclass(frozen=True)
class LweCiphertext:
    """An LWE ciphertext (a, b). noise_budget_bits is bookkeeping only."""

    a: tuple[int, ...]
    b: int
    noise_budget_bits: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SeededLweCiphertext:
    """A fresh LWE ciphertext whose mask is replaced by the PRG seed that produced it."""

    seed: bytes
    b: int
    noise_budget_bits: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RlweSecretKey:
    s: Polynomial


@dataclass(frozen=True)
class RlweCiphertext:
    a: Polynomial
    b: Polynomial
    noise_budget_bits: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SeededRlweCiphertext:
    seed: bytes
    b: Polynomial
    noise_budget_bits: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AdditivePublicKey:
    """Paillier public key. The plaintext space is Z_m with m == modulus."""

    modulus: int
    modulus_sq: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "modulus_sq", self.modulus * self.modulus)

    @property
    def plaintext_modulus(self) -> int:
        return self.modulus

    @property
    def bits(self) -> int:
        return self.modulus.bit_length()

    @property
    def ciphertext_bytes(self) -> int:
        """Serialized size of one ciphertext: an element of Z_{modulus^2}."""
        return 2 * ((self.bits + 7) // 8)

    @property
    def fingerprint(self) -> bytes:
        return _fingerprint("paillier", self.modulus)


@dataclass(frozen=True)
class AdditiveKeypair:
    """Paillier key material: the public key plus λ = lcm(p-1, q-1) and μ = λ^-1 mod N."""

    public: AdditivePublicKey
    lam: int = field(repr=False)
    mu_inv: int = field(repr=False)

    @property
    def modulus(self) -> int:
        return self.public.modulus

    @property
    def modulus_sq(self) -> int:
        return self.public.modulus_sq

    @property
    def plaintext_modulus(self) -> int:
        return self.public.modulus


@dataclass(frozen=True)
class AdditiveCiphertext:
    value: int


@dataclass(frozen=True)
class EncryptedSecretKey:
    """Additive encryptions of every lattice secret-key coefficient, bound to its params and additive key."""

    scheme: SchemeTag
    entries: tuple[AdditiveCiphertext, ...]
    params_fingerprint: bytes
    public_key: AdditivePublicKey
    compatible: bool = True

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def ahe_fingerprint(self) -> bytes:
        return self.public_key.fingerprint


@dataclass(frozen=True)
class SlotLayout:
    """How values are packed into one additive plaintext: slot j sits at bit offset j*slot_width."""

    scheme: SchemeTag
    slot_count: int
    slot_width: int
    params_fingerprint: bytes

    def __post_init__(self):
        if self.slot_count < 1:
            raise ParameterError(f"slot_count must be >= 1, got {self.slot_count}")


@dataclass(frozen=True)
class CompressedCiphertext:
    payload: AdditiveCiphertext
    layout: SlotLayout


@dataclass(frozen=True)
class SessionConfig:
    """What a client asks the demo server to compute.

    The server returns Σ weight·input[index] over `weights`, compressed. For RLWE,
    `coefficients` lists the plaintext coefficients to extract (one slot each).
    """

    scheme: SchemeTag
    label: str
    ahe_bits: int
    weights: tuple[tuple[int, int], ...]
    coefficients: tuple[int, ...] = ()
