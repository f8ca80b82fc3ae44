"""Centralized numerical configuration loaded from environment variables."""

import os
from dotenv import load_dotenv

load_dotenv()

# Keys whose environment value could not be parsed; validate() reports them
_UNPARSED: list[str] = []


def _env(key: str, default: str, cast):
    raw = os.getenv(key, default)
    try:
        return cast(raw)
    except ValueError:
        _UNPARSED.append(key)
        return cast(default)


class Settings:
    """Tolerances and search limits loaded from .env file."""

    # Acceptance tolerance for residual checks (scaled by n)
    TOL: float = _env("GRASSFACTOR_TOL", "1e-9", float)

    # Two phases / eigenvalues are the same cluster within this gap
    CLUSTER_TOL: float = _env("GRASSFACTOR_CLUSTER_TOL", "1e-8", float)

    # Genericity thresholds for the symplectic constructions
    GENERIC_TOL: float = _env("GRASSFACTOR_GENERIC_TOL", "1e-6", float)

    # Symplectic factorizations accumulate more rounding
    SP_TOL: float = _env("GRASSFACTOR_SP_TOL", "1e-7", float)
    SP_RETRIES: int = _env("GRASSFACTOR_SP_RETRIES", "16", int)

    # Default seed for samplers and randomized searches
    SEED: int = _env("GRASSFACTOR_SEED", "0", int)

    def validate(self) -> list[str]:
        """Return a list of config keys holding unusable values."""
        invalid = list(_UNPARSED)
        if not self.TOL > 0:
            invalid.append("GRASSFACTOR_TOL")
        if not self.CLUSTER_TOL > 0:
            invalid.append("GRASSFACTOR_CLUSTER_TOL")
        if not self.GENERIC_TOL > 0:
            invalid.append("GRASSFACTOR_GENERIC_TOL")
        if not self.SP_TOL > 0:
            invalid.append("GRASSFACTOR_SP_TOL")
        if self.SP_RETRIES < 1:
            invalid.append("GRASSFACTOR_SP_RETRIES")
        if self.SEED < 0:
            invalid.append("GRASSFACTOR_SEED")
        return list(dict.fromkeys(invalid))


settings = Settings()
