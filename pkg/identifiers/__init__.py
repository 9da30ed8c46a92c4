from .repo_uri import (
    NamespaceClass,
    RepoUri,
    PREFIX,
    SUBNAMESPACES,
    mint,
    parse,
    parse_as,
    from_uuid,
    validate_content_identifier,
)

__all__ = [
    "NamespaceClass",
    "RepoUri",
    "PREFIX",
    "SUBNAMESPACES",
    "mint",
    "parse",
    "parse_as",
    "from_uuid",
    "validate_content_identifier",
]
