"""
Exception hierarchy for he-compress.

Library code raises these; only the CLI turns them into exit codes.
"""


class HeCompressError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(HeCompressError, ValueError):
    """Invalid parameters, mismatched lengths/params, or a fingerprint mismatch."""


class MessageRangeError(ParameterError):
    """A plaintext lies outside its message space (Z_p or Z_m)."""


class CoefficientIndexError(ParameterError, IndexError):
    """A polynomial coefficient index outside [0, N)."""


class IncompatibleParametersError(HeCompressError):
    """The additive plaintext modulus is too small for the lattice parameters (m <= q + d*q^2)."""


class BatchCapacityError(IncompatibleParametersError):
    """A batch does not fit into one additive plaintext."""


class KeyGenerationError(HeCompressError):
    """Prime generation gave up after its bounded number of attempts."""


class FormatError(HeCompressError, ValueError):
    """Malformed serialized data."""


class ProtocolError(HeCompressError):
    """A wire-protocol violation, or an error frame received from the peer."""
