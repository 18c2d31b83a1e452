"""
Configuration management for he-compress.
"""

import math
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings

from he_compress.errors import ParameterError
from he_compress.models import LatticeParams, LweParams, NoiseParams, RlweParams


class ReportedRow(BaseModel):
    """Values reported for a parameter set, kept next to what we compute. Sizes in KB (1000 B)."""

    uncompressed_kb: float | None = None
    compressed_bytes: int | None = None
    encrypted_key_kb: float | None = None
    reduction_percent: float | None = None
    key_encryption_s: float | None = None
    compression_s: float | None = None


class ParameterSetConfig(BaseModel):
    """One entry of the parameter-set registry."""

    label: str
    scheme: Literal["lwe", "rlwe"]
    n: int | None = None
    N: int | None = None
    log2_q: int = Field(ge=1)
    p: int = Field(default=16, ge=2)
    sigma: float = Field(default=3.2, gt=0)
    reported: ReportedRow | None = None

    @model_validator(mode="after")
    def _check_dimension(self) -> "ParameterSetConfig":
        if self.scheme == "lwe" and (self.n is None or self.N is not None):
            raise ValueError(f"LWE parameter set {self.label!r} needs n and no N")
        if self.scheme == "rlwe" and (self.N is None or self.n is not None):
            raise ValueError(f"RLWE parameter set {self.label!r} needs N and no n")
        return self


def _default_parameter_sets() -> list[ParameterSetConfig]:
    return [
        ParameterSetConfig(label="toy-lwe", scheme="lwe", n=2, log2_q=6, p=4, sigma=0.5),
        ParameterSetConfig(label="toy-rlwe", scheme="rlwe", N=2, log2_q=6, p=4, sigma=0.5),
        ParameterSetConfig(label="ring16", scheme="rlwe", N=16, log2_q=27),
        ParameterSetConfig(label="n630", scheme="lwe", n=630, log2_q=64),
        ParameterSetConfig(label="n750", scheme="lwe", n=750, log2_q=64),
        ParameterSetConfig(label="N1024", scheme="rlwe", N=1024, log2_q=27),
        ParameterSetConfig(label="N2048", scheme="rlwe", N=2048, log2_q=54),
        ParameterSetConfig(label="N4096", scheme="rlwe", N=4096, log2_q=36),
        ParameterSetConfig(label="N8192", scheme="rlwe", N=8192, log2_q=43),
    ]


class NoiseConfig(BaseSettings):
    """Configuration for the lattice error distribution."""

    # Rejection bound is ceil(bound_sigmas * sigma).
    bound_sigmas: float = Field(default=6.0, gt=0)


class AdditiveConfig(BaseSettings):
    """Configuration for Paillier key generation."""

    key_bits: int = 3072
    miller_rabin_rounds: int = 64
    max_prime_attempts: int = 10_000


class BenchConfig(BaseSettings):
    """Configuration for the size report and benchmark runner."""

    groups: dict[str, list[str]] = Field(default_factory=lambda: {"table1": ["n630", "n750"], "table2": ["N1024", "N2048", "N4096", "N8192"]})
    trials: int = Field(default=3, ge=1)
    kb: int = 1000
    reduction_tolerance_pct: float = 3.0
    key_size_tolerance_pct: float = 1.0


class ServerConfig(BaseSettings):
    """Configuration for the demo server and client."""

    host: str = "127.0.0.1"
    port: int = 9464
    max_frame_bytes: int = 64 * 1024 * 1024
    socket_timeout_s: float = 60.0


class Config(BaseSettings):
    """Main configuration class."""

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}

    parameter_sets: list[ParameterSetConfig] = Field(default_factory=_default_parameter_sets)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    additive: AdditiveConfig = Field(default_factory=AdditiveConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    server: ServerConfig = Field(default_factory=ServerConfig)

    # SQLite file holding encrypted keys uploaded to the demo server.
    registry_db_path: str = Field(default="he_compress_keys.db", alias="REGISTRY_DB_PATH")
    log_file: str = Field(default="he_compress.log", alias="LOG_FILE")

    @classmethod
    def load(cls, config_path: str | Path = "config.yaml") -> "Config":
        """Load configuration from a YAML file and environment variables."""
        config_path = Path(config_path)

        if config_path.exists():
            with open(config_path, "r", encoding="utf-8") as f:
                yaml_config = yaml.safe_load(f) or {}
        else:
            yaml_config = {}

        config_data = {}
        if "parameter_sets" in yaml_config:
            config_data["parameter_sets"] = [ParameterSetConfig(**entry) for entry in yaml_config["parameter_sets"]]
        if "noise" in yaml_config:
            config_data["noise"] = NoiseConfig(**yaml_config["noise"])
        if "additive" in yaml_config:
            config_data["additive"] = AdditiveConfig(**yaml_config["additive"])
        if "bench" in yaml_config:
            config_data["bench"] = BenchConfig(**yaml_config["bench"])
        if "server" in yaml_config:
            config_data["server"] = ServerConfig(**yaml_config["server"])

        return cls(**config_data)

    def labels(self) -> list[str]:
        return [entry.label for entry in self.parameter_sets]

    def parameter_set_config(self, label: str) -> ParameterSetConfig:
        for entry in self.parameter_sets:
            if entry.label == label:
                return entry
        raise ParameterError(f"Unknown parameter set {label!r} (known: {', '.join(self.labels())})")

    def parameter_set(self, label: str) -> LatticeParams:
        """Resolve a registry label to LweParams or RlweParams."""
        entry = self.parameter_set_config(label)
        noise = NoiseParams(entry.sigma, max(1, math.ceil(self.noise.bound_sigmas * entry.sigma)))
        if entry.scheme == "lwe":
            return LweParams(entry.n, entry.log2_q, entry.p, noise, entry.label)
        return RlweParams(entry.N, entry.log2_q, entry.p, noise, entry.label)

    def group(self, name: str) -> list[str]:
        """A bench group name, or a comma-separated list of labels."""
        if name in self.bench.groups:
            return list(self.bench.groups[name])
        labels = [label.strip() for label in name.split(",") if label.strip()]
        for label in labels:
            self.parameter_set_config(label)
        return labels


# Global config instance
_config: Config | None = None


def get_config() -> Config:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = Config.load()
    return _config


def set_config(config: Config) -> None:
    """Set the global configuration instance."""
    global _config
    _config = config
