from .app import HANDLERS, create_app

__all__ = ["create_app", "HANDLERS"]
