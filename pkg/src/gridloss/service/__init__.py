"""Request/response models and operation handlers.

The HTTP app lives in .app (imported on demand so that in-process callers
don't pay for the web stack).
"""

from . import handlers, schemas

__all__ = ["handlers", "schemas"]
