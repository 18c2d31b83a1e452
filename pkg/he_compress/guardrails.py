"""
Guardrails for server-side processing requests.

Checks that a session's linear function is well-formed and that its result can
still be decrypted and compressed correctly before any work is done.
"""

from he_compress.compression import batch_capacity, check_compatibility, compression_bound
from he_compress.core_math import scalar_growth_bits
from he_compress.errors import IncompatibleParametersError
from he_compress.models import LatticeParams, SchemeTag, SessionConfig


def weighted_sum_budget(fresh_budget: int, weights: list[int] | tuple[int, ...]) -> int:
    """Noise budget left after Σ w_j·ct_j on fresh inputs, folded the way the schemes fold it."""
    budget: int | None = None
    for w in weights:
        term = fresh_budget - scalar_growth_bits(w)
        budget = term if budget is None else min(budget, term) - 1
    return fresh_budget if budget is None else budget


class ProcessingGuardrails:
    """Validates a session before the server evaluates and compresses it."""

    def validate_weights(self, session: SessionConfig, params: LatticeParams, input_count: int | None = None) -> tuple[bool, str]:
        if input_count == 0:
            return False, "Request carries no input ciphertexts"
        if not session.weights:
            return False, "Linear function has no (index, weight) pairs"
        for index, weight in session.weights:
            if not 0 <= weight < params.p:
                return False, f"Weight {weight} outside Z_{params.p}"
            if index < 0 or (input_count is not None and index >= input_count):
                return False, f"Input index {index} out of range"
        return True, ""

    def validate_noise(self, session: SessionConfig, params: LatticeParams) -> tuple[bool, str]:
        """A non-negative budget means the noise bound is still below Δ/2."""
        budget = weighted_sum_budget(params.fresh_noise_budget_bits, [w for _, w in session.weights])
        if budget < 0:
            return False, f"Weighted sum exhausts the noise budget ({budget} bits left)"
        return True, ""

    def validate_compression(self, session: SessionConfig, params: LatticeParams, modulus: int | None = None) -> tuple[bool, str]:
        """Compatibility bound m > q + d·q², plus slot capacity for multi-coefficient RLWE requests.

        Without a concrete modulus, 2^(ahe_bits−1) is used as a lower bound for m.
        """
        m = modulus if modulus is not None else 1 << (session.ahe_bits - 1)
        if modulus is not None and modulus.bit_length() != session.ahe_bits:
            return False, f"Additive key has {modulus.bit_length()} bits, session declares {session.ahe_bits}"
        if not check_compatibility(params, m):
            return False, f"Additive modulus too small: needs more than {compression_bound(params).bit_length()} bits"

        if params.scheme is SchemeTag.LWE:
            if session.coefficients:
                return False, "LWE sessions do not take coefficient indices"
            return True, ""

        if not session.coefficients:
            return False, "RLWE sessions need at least one coefficient index"
        for k in session.coefficients:
            if not 0 <= k < params.dimension:
                return False, f"Coefficient index {k} outside [0, {params.dimension})"
        if len(session.coefficients) > 1:
            try:
                capacity = batch_capacity(params, m)
            except IncompatibleParametersError as e:
                return False, str(e)
            if len(session.coefficients) > capacity:
                return False, f"{len(session.coefficients)} coefficients exceed batch capacity {capacity}"
        return True, ""

    def validate_session(self, session: SessionConfig, params: LatticeParams, input_count: int | None = None, modulus: int | None = None) -> tuple[bool, str]:
        """Validate a session against its parameter set.

        Args:
            session: The requested linear function
            params: Resolved parameters for session.label
            input_count: Number of input ciphertexts, once known
            modulus: The additive public modulus, once known

        Returns:
            Tuple of (is_valid, reason_if_invalid)
        """
        if session.scheme is not params.scheme:
            return False, f"Session scheme {session.scheme.value} does not match parameter set {params.label!r}"
        if params.label and session.label != params.label:
            return False, f"Session label {session.label!r} does not match parameter set {params.label!r}"

        is_valid, reason = self.validate_weights(session, params, input_count)
        if not is_valid:
            return is_valid, reason

        is_valid, reason = self.validate_noise(session, params)
        if not is_valid:
            return is_valid, reason

        return self.validate_compression(session, params, modulus)
