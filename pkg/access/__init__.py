from .mount import (
    MountedArc,
    MountedTape,
    MountSnapshot,
    StoreMount,
    mount_arc,
    mount_tape,
)
from .oaipmh import (
    OaiSettings,
    ResumptionToken,
    handle_oai,
    oai_error_code,
    oai_response_items,
)
from .openurl import (
    OpenUrlResponse,
    URL_VER,
    handle_openurl,
)
from .app import (
    create_app,
    locate_document,
    oai_settings,
)

__all__ = [
    "MountedArc",
    "MountedTape",
    "MountSnapshot",
    "StoreMount",
    "mount_arc",
    "mount_tape",
    "OaiSettings",
    "ResumptionToken",
    "handle_oai",
    "oai_error_code",
    "oai_response_items",
    "OpenUrlResponse",
    "URL_VER",
    "handle_openurl",
    "create_app",
    "locate_document",
    "oai_settings",
]
