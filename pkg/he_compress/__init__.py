"""
he-compress

Compresses LWE and RLWE ciphertexts into a single additively homomorphic
(Paillier) ciphertext by evaluating decryption under an encrypted secret key.
"""

__version__ = "0.1.0"
