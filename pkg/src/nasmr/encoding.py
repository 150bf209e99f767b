"""Canonical, injective byte encoding for every value that gets signed or logged.

Layout (all integers big-endian):

* top level: 1-byte format version, then the body
* int: ``T_INT`` + 8-byte signed
* bytes / str: tag + 8-byte length + data (str as UTF-8)
* tuple/list: ``T_SEQ`` + 8-byte count + items
* set/frozenset: ``T_SET`` + 8-byte count + items sorted by their own encodings
* registered dataclass: 1-byte class tag + each field in declaration order
* ``Block``: its tag + 8-byte count + transactions sorted by encoding

Encodings of frozen dataclasses are memoised on the instance, so large
messages that are relayed many times are only serialised once.
"""

from __future__ import annotations

import dataclasses
import struct
from typing import Any

FORMAT_VERSION = 1

T_INT = 0x01
T_BYTES = 0x02
T_STR = 0x03
T_SEQ = 0x04
T_SET = 0x05
T_NONE = 0x06
T_BOOL = 0x07

_U64 = struct.Struct(">Q")
_I64 = struct.Struct(">q")

_CLASS_BY_TAG: dict[int, type] = {}
_TAG_BY_CLASS: dict[type, int] = {}
_COUNTED: set[type] = set()

_CACHE_ATTR = "_enc_cache"


class EncodingError(ValueError):
    pass


def register(tag: int, counted_set: bool = False):
    """Class decorator assigning a wire tag to a dataclass.

    ``counted_set`` marks single-field set containers (``Block``) that encode
    as tag + count + elements, without a nested set tag.
    """

    def deco(cls):
        if tag in _CLASS_BY_TAG:
            raise EncodingError(f"tag 0x{tag:02x} already used by {_CLASS_BY_TAG[tag].__name__}")
        if tag < 0x10 or tag > 0xFF:
            raise EncodingError("class tags live in 0x10..0xff")
        _CLASS_BY_TAG[tag] = cls
        _TAG_BY_CLASS[cls] = tag
        if counted_set:
            _COUNTED.add(cls)
        return cls

    return deco


def _set_body(items) -> bytes:
    encs = sorted(encode_body(x) for x in items)
    return _U64.pack(len(encs)) + b"".join(encs)


def encode_body(obj: Any) -> bytes:
    """Encoding without the version prefix (used for nesting)."""
    cls = type(obj)
    tag = _TAG_BY_CLASS.get(cls)
    if tag is not None:
        cached = obj.__dict__.get(_CACHE_ATTR)
        if cached is not None:
            return cached
        if cls in _COUNTED:
            (field,) = dataclasses.fields(obj)
            out = bytes([tag]) + _set_body(getattr(obj, field.name))
        else:
            parts = [bytes([tag])]
            for field in dataclasses.fields(obj):
                if field.metadata.get("skip_encoding"):
                    continue
                parts.append(encode_body(getattr(obj, field.name)))
            out = b"".join(parts)
        object.__setattr__(obj, _CACHE_ATTR, out)
        return out
    if obj is None:
        return bytes([T_NONE])
    if cls is bool:
        return bytes([T_BOOL, 1 if obj else 0])
    if cls is int:
        return bytes([T_INT]) + _I64.pack(obj)
    if cls is bytes:
        return bytes([T_BYTES]) + _U64.pack(len(obj)) + obj
    if cls is str:
        raw = obj.encode("utf-8")
        return bytes([T_STR]) + _U64.pack(len(raw)) + raw
    if cls is tuple or cls is list:
        return bytes([T_SEQ]) + _U64.pack(len(obj)) + b"".join(encode_body(x) for x in obj)
    if cls is frozenset or cls is set:
        return bytes([T_SET]) + _set_body(obj)
    raise EncodingError(f"cannot encode {cls.__name__}")


def canonical_encode(obj: Any) -> bytes:
    return bytes([FORMAT_VERSION]) + encode_body(obj)


class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes, pos: int = 0):
        self.buf = buf
        self.pos = pos

    def take(self, k: int) -> bytes:
        end = self.pos + k
        if end > len(self.buf):
            raise EncodingError("truncated input")
        out = self.buf[self.pos:end]
        self.pos = end
        return out

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]


def _decode(r: _Reader) -> Any:
    tag = r.take(1)[0]
    if tag == T_INT:
        return _I64.unpack(r.take(8))[0]
    if tag == T_BYTES:
        return r.take(r.u64())
    if tag == T_STR:
        return r.take(r.u64()).decode("utf-8")
    if tag == T_SEQ:
        return tuple(_decode(r) for _ in range(r.u64()))
    if tag == T_SET:
        return frozenset(_decode(r) for _ in range(r.u64()))
    if tag == T_NONE:
        return None
    if tag == T_BOOL:
        return r.take(1) != b"\x00"
    cls = _CLASS_BY_TAG.get(tag)
    if cls is None:
        raise EncodingError(f"unknown tag 0x{tag:02x}")
    if cls in _COUNTED:
        return cls(frozenset(_decode(r) for _ in range(r.u64())))
    values = [
        _decode(r)
        for field in dataclasses.fields(cls)
        if not field.metadata.get("skip_encoding")
    ]
    return cls(*values)


def canonical_decode(data: bytes) -> Any:
    if not data or data[0] != FORMAT_VERSION:
        raise EncodingError("unsupported format version")
    r = _Reader(data, 1)
    obj = _decode(r)
    if r.pos != len(data):
        raise EncodingError("trailing bytes")
    return obj
