from .app import create_app  # noqa: F401
from .store import Session, SessionStore  # noqa: F401

__all__ = ["Session", "SessionStore", "create_app"]
