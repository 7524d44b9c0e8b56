"""
Library configuration using Pydantic Settings.
"""
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical settings loaded from environment variables (prefix GRASSGEO_)."""

    # Logging
    LOG_LEVEL: str = "WARNING"

    # Dense exterior algebra guard rail (ambient dimension)
    MAX_N: int = 12

    # Nondegeneracy and isotropy thresholds
    NONDEGENERACY_COND: float = 1e12
    EIGEN_RELATIVE_FLOOR: float = 1e-10
    ISOTROPY_THRESHOLD: float = 1e-8
    # Forms are constructed exactly, so hermitian symmetry is checked without slack
    HERMITIAN_TOLERANCE: float = 0.0

    # Finite differences
    FD_STEP: float = 1e-4
    NESTED_FD_STEP: float = 1e-3
    # Closed-form curvature = CURVATURE_SIGN * (nabla-commutator curvature)
    CURVATURE_SIGN: int = -1

    # Generic geodesics
    EIGEN_REALNESS_TOL: float = 1e-8
    EUCLIDEAN_RELATIVE_FLOOR: float = 1e-10

    # Convexity criterion and Monte Carlo oracle
    CONVEXITY_TOL: float = 1e-10
    ORACLE_SAMPLES: int = 100_000
    ORACLE_MIN_MEMBERS: int = 200
    # Normalized membership products on H_i ^ H_j this close to zero leave the oracle inconclusive
    ORACLE_MARGIN: float = 1e-2
    DISAGREEMENT_DIR: str = "fixtures/disagreements"

    model_config = SettingsConfigDict(
        env_prefix="GRASSGEO_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    @field_validator("MAX_N")
    @classmethod
    def validate_max_n(cls, value: int) -> int:
        """Dense wedge operators have C(n, n/2)^2 entries; keep n desk-scale."""
        if not 1 <= value <= 16:
            raise ValueError("MAX_N must lie in [1, 16]")
        return value

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_log_level(cls, value: str) -> str:
        """Accept lower-case level names from the environment."""
        if isinstance(value, str):
            return value.strip().upper()
        return value

    @field_validator("CURVATURE_SIGN")
    @classmethod
    def validate_curvature_sign(cls, value: int) -> int:
        if value not in (-1, 1):
            raise ValueError("CURVATURE_SIGN must be +1 or -1")
        return value


# Global settings instance
settings = Settings()
