"""Server configuration shared by the CLI and the app factory."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class ServerConfig:
    data_dir: Path
    cache_mb: int = 512
    cors_origins: tuple[str, ...] = ()
    max_download_gb: float = 16.0
    max_session_mb: int = 16

    def __post_init__(self):
        object.__setattr__(self, "data_dir", Path(self.data_dir))
        if self.cache_mb < 1:
            raise ValueError("cache_mb must be >= 1")
        if self.max_download_gb <= 0:
            raise ValueError("max_download_gb must be positive")

    @property
    def cache_bytes(self) -> int:
        return self.cache_mb * 1024 * 1024

    @property
    def max_download_bytes(self) -> int:
        return int(self.max_download_gb * 1024**3)

    @property
    def max_session_bytes(self) -> int:
        return self.max_session_mb * 1024 * 1024

    @property
    def trajectories_dir(self) -> Path:
        return self.data_dir / "trajectories"

    @property
    def sessions_dir(self) -> Path:
        return self.data_dir / "sessions"
