from .identifier_locator import (
    IdentifierLocator,
    parse_log_line,
)

__all__ = [
    "IdentifierLocator",
    "parse_log_line",
]
