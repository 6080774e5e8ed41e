"""HTTP streaming service: trajectory registry, frame cache, sessions."""

from mdstream.server.app import create_app
from mdstream.server.config import ServerConfig
from mdstream.server.service import StreamService

__all__ = ["ServerConfig", "StreamService", "create_app"]
