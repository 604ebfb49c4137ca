"""Portable File System (PFS) web document wrappers: format, tools and server."""
from .format import (
    Archive,
    Encoding,
    EntityRecord,
    Mode,
    PathIndex,
    Storage,
    ValidationIssue,
    WrapperHeader,
    build_index,
    decode_content,
    encode_content,
    lookup_indexed,
    lookup_linear,
    normalize_interior_path,
    parse_file,
    parse_wrapper,
    read_content,
    serialize_wrapper,
    validate,
    write_wrapper,
)

__version__ = "0.1.0"
