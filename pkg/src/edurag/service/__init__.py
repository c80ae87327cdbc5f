from .config import ServiceConfig
from .engine import Engine, citation_url

__all__ = ["Engine", "ServiceConfig", "citation_url"]
