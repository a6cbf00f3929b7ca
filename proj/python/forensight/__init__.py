"""Python access to the forensight service core.

The heavy lifting lives in the compiled ``_core`` module; this package adds a
few conveniences on top.
"""

from ._core import (
    Service as _Service,
    detect_audio,
    detect_image,
    detectors,
    error_statuses,
    frame_flatness,
    high_frequency_ratio,
    openapi_document,
    route_table,
    sniff,
)
from .errors import ForensightError

__all__ = [
    "ForensightError",
    "Service",
    "detect_audio",
    "detect_image",
    "detectors",
    "error_statuses",
    "frame_flatness",
    "high_frequency_ratio",
    "openapi_document",
    "route_table",
    "sniff",
]


class Service(_Service):
    """Runs the HTTP service in-process; usable as a context manager.

    ``settings`` takes the same keys as the environment (TOKEN_KEY,
    STORE_URL, BLOB_ROOT, ...). BIND_ADDR defaults to an ephemeral port.
    """

    def __init__(self, settings):
        settings = {"BIND_ADDR": "127.0.0.1:0", **{k: str(v) for k, v in settings.items()}}
        super().__init__(settings)

    @property
    def url(self):
        return f"http://{self.host}:{self.port}"

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()
        return False
