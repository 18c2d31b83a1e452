"""Persistent registry of encrypted lattice keys uploaded to the demo server.

A client uploads its encrypted secret key once; later sessions with the same
additive key and parameter set skip the upload. Rows are keyed by
(additive fingerprint, params fingerprint) and hold the raw entry bytes, so the
server only ever stores ciphertexts. Backed by stdlib sqlite3.
"""

import logging
import sqlite3
import threading
from datetime import datetime
from pathlib import Path

from he_compress.codec import esk_from_bytes, esk_to_bytes
from he_compress.errors import FormatError
from he_compress.models import AdditivePublicKey, EncryptedSecretKey, LatticeParams

logger = logging.getLogger(__name__)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS encrypted_keys (
    ahe_fingerprint     BLOB NOT NULL,
    params_fingerprint  BLOB NOT NULL,
    label               TEXT,
    modulus             TEXT NOT NULL,
    entries             BLOB NOT NULL,
    registered_at       TEXT,
    PRIMARY KEY (ahe_fingerprint, params_fingerprint)
)
"""


class KeyRegistry:
    """Thread-safe store of encrypted secret keys.

    Registered keys are also cached in memory; lookups hit the cache first and
    only fall back to sqlite for keys registered by an earlier process.
    """

    def __init__(self, path: str | Path = "he_compress_keys.db"):
        # check_same_thread=False + a lock: every server connection runs on its
        # own thread and they share this connection.
        self._lock = threading.Lock()
        self._cache: dict[tuple[bytes, bytes], EncryptedSecretKey] = {}
        self._conn: sqlite3.Connection | None = None
        try:
            self._conn = sqlite3.connect(str(path), check_same_thread=False)
            self._conn.execute(_SCHEMA)
            self._conn.commit()
        except sqlite3.Error:
            # A registry in this state keeps working from the in-memory cache.
            logger.warning("Failed to open/initialize key registry at %s; registry will be memory-only", path, exc_info=True)
            self._conn = None

    def is_registered(self, ahe_fingerprint: bytes, params_fingerprint: bytes) -> bool:
        """Return True if a key for this (additive key, parameter set) pair is on record."""
        if (ahe_fingerprint, params_fingerprint) in self._cache:
            return True
        if self._conn is None:
            return False
        try:
            with self._lock:
                row = self._conn.execute(
                    "SELECT 1 FROM encrypted_keys WHERE ahe_fingerprint = ? AND params_fingerprint = ?",
                    (ahe_fingerprint, params_fingerprint),
                ).fetchone()
            return row is not None
        except sqlite3.Error:
            logger.warning("Failed to check registration for %s", ahe_fingerprint.hex(), exc_info=True)
            return False

    def register(self, esk: EncryptedSecretKey, params: LatticeParams) -> None:
        """Record an uploaded key. Re-registering the same pair replaces it."""
        key = (esk.ahe_fingerprint, esk.params_fingerprint)
        with self._lock:
            self._cache[key] = esk
        logger.info("Registered %s key for %s (dimension %d)", params.scheme.value, params.label or "unlabelled params", esk.dimension)
        if self._conn is None:
            return
        try:
            with self._lock:
                self._conn.execute(
                    "INSERT INTO encrypted_keys (ahe_fingerprint, params_fingerprint, label, modulus, entries, registered_at) VALUES (?, ?, ?, ?, ?, ?) "
                    "ON CONFLICT(ahe_fingerprint, params_fingerprint) DO UPDATE SET label=excluded.label, modulus=excluded.modulus, entries=excluded.entries, registered_at=excluded.registered_at",
                    (key[0], key[1], params.label, str(esk.public_key.modulus), esk_to_bytes(esk), datetime.now().isoformat()),
                )
                self._conn.commit()
        except sqlite3.Error:
            logger.warning("Failed to persist key for %s", params.label, exc_info=True)

    def lookup(self, pk: AdditivePublicKey, params: LatticeParams) -> EncryptedSecretKey | None:
        """The registered key for (pk, params), or None."""
        key = (pk.fingerprint, params.fingerprint)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self._conn is None:
            return None
        try:
            with self._lock:
                row = self._conn.execute(
                    "SELECT modulus, entries FROM encrypted_keys WHERE ahe_fingerprint = ? AND params_fingerprint = ?",
                    key,
                ).fetchone()
        except sqlite3.Error:
            logger.warning("Failed to look up key for %s", params.label, exc_info=True)
            return None
        if row is None:
            return None
        if int(row[0]) != pk.modulus:
            logger.warning("Registry row for %s has a different modulus; ignoring it", params.label)
            return None
        try:
            esk = esk_from_bytes(row[1], params, pk)
        except FormatError:
            logger.warning("Registry row for %s is corrupt; ignoring it", params.label, exc_info=True)
            return None
        with self._lock:
            self._cache[key] = esk
        return esk

    def count(self) -> int:
        """Number of registered keys on record."""
        if self._conn is None:
            return len(self._cache)
        try:
            with self._lock:
                return self._conn.execute("SELECT COUNT(*) FROM encrypted_keys").fetchone()[0]
        except sqlite3.Error:
            logger.warning("Failed to count registered keys", exc_info=True)
            return len(self._cache)

    def close(self) -> None:
        if self._conn is None:
            return
        with self._lock:
            self._conn.close()
            self._conn = None
