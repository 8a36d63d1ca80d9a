"""Canonical object-XML reader/writer plus the verbose baseline emitter.

The canonical data document is bit-exact: one header line, one line per
object sorted by OID, no discretionary whitespace. Two documents holding the
same object set are therefore equal as byte strings. The verbose emitter
reproduces the legacy multi-file encoding (per-object storage details and
repeated type descriptors) and exists only as the size-comparison baseline.

Writers and readers keep no shared mutable state, so different documents
may be processed concurrently; a single read_canonical call is
single-threaded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, BinaryIO
from xml.parsers import expat

from .errors import TransodbError
from .model import (
    ClassModel,
    FieldDef,
    LayoutIndex,
    ListOf,
    Ref,
    Scalar,
    ScalarKind,
    dump_model,
)

OID_RE = re.compile(r"[A-Za-z0-9_.\-]+\Z")
INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1

_INT_TEXT_RE = re.compile(r"-?(0|[1-9][0-9]*)\Z")

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


class RecordError(TransodbError):
    """A record failed validation against the model."""


class DocumentError(TransodbError):
    """A data document could not be decoded; carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class HeaderMismatchError(DocumentError):
    """The document's schema hash does not match the supplied model."""


@dataclass(frozen=True)
class Oid:
    """Object identity token, compared byte-wise; the regex keeps it ASCII."""

    token: str


# A field value: str, bool, int, float, Oid, or a homogeneous list of those.
Value = str | bool | int | float | Oid | list


@dataclass
class ObjectRecord:
    """One serialized object; references stay symbolic (OID tokens)."""

    class_name: str
    oid: Oid
    values: dict[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class DocumentHeader:
    schema_name: str
    schema_hash: str


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def schema_hash(model: ClassModel) -> str:
    """16 lowercase hex digits binding a data document to its schema."""
    return f"{fnv1a64(dump_model(model).encode('utf-8')):016x}"


# Newlines are escaped so one record is always one physical line (the store
# log is framed on that); carriage returns because XML readers normalize
# them away; tabs additionally in attributes, where they normalize to spaces.
_TEXT_ESCAPES = {ord("&"): "&amp;", ord("<"): "&lt;", ord(">"): "&gt;",
                 ord("\r"): "&#13;", ord("\n"): "&#10;"}
_ATTR_ESCAPES = dict(_TEXT_ESCAPES)
_ATTR_ESCAPES.update({ord('"'): "&quot;", ord("\t"): "&#9;"})

# Code points XML 1.0 cannot carry at all (even as character references).
_XML_UNREPRESENTABLE = re.compile(
    "[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff￾￿]"
)


def escape_text(text: str) -> str:
    return text.translate(_TEXT_ESCAPES)


def escape_attr(text: str) -> str:
    return text.translate(_ATTR_ESCAPES)


def validate_record(record: ObjectRecord, model: ClassModel, layouts: LayoutIndex | None = None) -> None:
    """Raise RecordError unless the record conforms to its class layout."""
    layouts = layouts or LayoutIndex(model)
    if not isinstance(record.oid, Oid) or not OID_RE.match(record.oid.token):
        raise RecordError(f"invalid OID {getattr(record.oid, 'token', record.oid)!r}")
    if record.class_name not in model.classes:
        raise RecordError(f"unknown class {record.class_name!r} (record {record.oid.token})")
    layout = layouts.layout(record.class_name)
    declared = {f.name for f in layout}
    for name in record.values:
        if name not in declared:
            raise RecordError(
                f"unknown field {name!r} on {record.class_name} (record {record.oid.token})"
            )
    for fdef in layout:
        if fdef.name not in record.values:
            if not fdef.optional:
                raise RecordError(
                    f"missing required field {fdef.name!r} (record {record.oid.token})"
                )
            continue
        _check_value(fdef, record.values[fdef.name], record.oid.token)


def _check_value(fdef: FieldDef, value: Value, token: str) -> None:
    kind = fdef.kind
    if isinstance(kind, ListOf):
        if not isinstance(value, list):
            raise RecordError(f"field {fdef.name!r} expects a list (record {token})")
        for item in value:
            _check_scalar_or_ref(fdef.name, kind.element, item, token)
    else:
        _check_scalar_or_ref(fdef.name, kind, value, token)


def _check_scalar_or_ref(name: str, kind: Scalar | Ref, value, token: str) -> None:
    if isinstance(kind, Ref):
        if not isinstance(value, Oid):
            raise RecordError(f"field {name!r} expects a reference (record {token})")
        if not OID_RE.match(value.token):
            raise RecordError(f"field {name!r} holds invalid OID {value.token!r} (record {token})")
        return
    sk = kind.kind
    if sk is ScalarKind.STR:
        if not isinstance(value, str):
            raise RecordError(f"field {name!r} expects text (record {token})")
        if _XML_UNREPRESENTABLE.search(value):
            raise RecordError(
                f"field {name!r} holds characters XML cannot carry (record {token})"
            )
    elif sk is ScalarKind.BOOL:
        if not isinstance(value, bool):
            raise RecordError(f"field {name!r} expects a boolean (record {token})")
    elif sk is ScalarKind.INT64:
        if isinstance(value, bool) or not isinstance(value, int):
            raise RecordError(f"field {name!r} expects an integer (record {token})")
        if not INT64_MIN <= value <= INT64_MAX:
            raise RecordError(f"field {name!r} out of 64-bit range (record {token})")
    elif sk is ScalarKind.FLOAT64:
        if not isinstance(value, float):
            raise RecordError(f"field {name!r} expects a float (record {token})")
        if not math.isfinite(value):
            raise RecordError(f"field {name!r} is not finite (record {token})")


def iter_refs(record: ObjectRecord, layouts: LayoutIndex) -> Iterator[tuple[str, str, Oid]]:
    """Yield (field name, declared target class, oid) for every reference."""
    for fdef in layouts.layout(record.class_name):
        if fdef.name not in record.values:
            continue
        kind = fdef.kind
        if isinstance(kind, Ref):
            yield fdef.name, kind.target, record.values[fdef.name]
        elif isinstance(kind, ListOf) and isinstance(kind.element, Ref):
            for item in record.values[fdef.name]:
                yield fdef.name, kind.element.target, item


def format_record(record: ObjectRecord, layouts: LayoutIndex) -> str:
    """Render one record as its canonical single-line element (no newline)."""
    parts = [f'<o c="{escape_attr(record.class_name)}" id="{escape_attr(record.oid.token)}">']
    for fdef in layouts.layout(record.class_name):
        if fdef.name not in record.values:
            continue
        value = record.values[fdef.name]
        if isinstance(fdef.kind, ListOf):
            for item in value:
                parts.append(_format_leaf(fdef.name, fdef.kind.element, item))
        else:
            parts.append(_format_leaf(fdef.name, fdef.kind, value))
    parts.append("</o>")
    return "".join(parts)


def _format_leaf(name: str, kind: Scalar | Ref, value) -> str:
    if isinstance(kind, Ref):
        return f'<{name} r="{escape_attr(value.token)}"/>'
    text = _scalar_text(kind.kind, value)
    if text == "":
        return f"<{name}/>"
    return f"<{name}>{escape_text(text)}</{name}>"


def _scalar_text(sk: ScalarKind, value) -> str:
    if sk is ScalarKind.STR:
        return value
    if sk is ScalarKind.BOOL:
        return "true" if value else "false"
    if sk is ScalarKind.INT64:
        return str(value)
    # repr() is the shortest decimal string that parses back to the same
    # binary64 value; non-finite values were rejected during validation.
    return repr(value)


class CanonicalWriter:
    """Streaming canonical emitter; callers feed records in ascending OID
    order (enforced, which also rejects duplicates)."""

    def __init__(self, model: ClassModel, out: BinaryIO):
        self._layouts = LayoutIndex(model)
        self._model = model
        self._out = out
        self._last_token: str | None = None
        self.count = 0

    def begin(self) -> None:
        if _XML_UNREPRESENTABLE.search(self._model.name):
            raise RecordError("model name holds characters XML cannot carry")
        name = escape_attr(self._model.name)
        self._out.write(b'<?xml version="1.0" encoding="UTF-8"?>\n')
        self._out.write(
            f'<objects schema="{name}" schemaHash="{schema_hash(self._model)}">\n'.encode("utf-8")
        )

    def record(self, record: ObjectRecord) -> None:
        validate_record(record, self._model, self._layouts)
        token = record.oid.token
        if self._last_token is not None and token.encode() <= self._last_token.encode():
            if token == self._last_token:
                raise RecordError(f"duplicate OID {token!r}")
            raise RecordError(f"records out of OID order at {token!r}")
        self._last_token = token
        self._out.write(format_record(record, self._layouts).encode("utf-8"))
        self._out.write(b"\n")
        self.count += 1

    def end(self) -> None:
        self._out.write(b"</objects>\n")


def write_canonical(records: Iterable[ObjectRecord], model: ClassModel) -> bytes:
    """Serialize a record set to the canonical document.

    A pure function of (record set, model): input order never shows in the
    output because records are emitted in byte-wise OID order.
    """
    import io

    ordered = sorted(records, key=lambda r: r.oid.token.encode() if isinstance(r.oid, Oid) else b"")
    buf = io.BytesIO()
    writer = CanonicalWriter(model, buf)
    writer.begin()
    for record in ordered:
        writer.record(record)
    writer.end()
    return buf.getvalue()


class _RecordAssembler:
    """Shared o-element decoding used by the document reader and the
    single-line parser. Field events arrive through on_* callbacks."""

    def __init__(self, layouts: LayoutIndex, pos: Callable[[], tuple[int, int]]):
        self._layouts = layouts
        self._pos = pos
        self.record: ObjectRecord | None = None
        self._fdef: FieldDef | None = None
        self._text: list[str] | None = None
        self._is_ref_leaf = False

    def _fail(self, message: str):
        raise DocumentError(message, *self._pos())

    def open_record(self, attrs: dict[str, str]) -> None:
        unknown = set(attrs) - {"c", "id"}
        if unknown:
            self._fail(f"unexpected attribute {sorted(unknown)[0]!r} on <o>")
        if "c" not in attrs or "id" not in attrs:
            self._fail("<o> requires c and id attributes")
        class_name, token = attrs["c"], attrs["id"]
        if not OID_RE.match(token):
            self._fail(f"invalid OID {token!r}")
        if class_name not in self._layouts.model.classes:
            self._fail(f"unknown class {class_name!r}")
        self.record = ObjectRecord(class_name, Oid(token))

    def open_field(self, name: str, attrs: dict[str, str]) -> None:
        if self._fdef is not None:
            self._fail(f"unexpected nested element <{name}>")
        assert self.record is not None
        fdef = self._layouts.field(self.record.class_name, name)
        if fdef is None:
            self._fail(f"unknown field {name!r} on {self.record.class_name}")
        self._fdef = fdef
        kind = fdef.kind.element if isinstance(fdef.kind, ListOf) else fdef.kind
        self._is_ref_leaf = isinstance(kind, Ref)
        if self._is_ref_leaf:
            if set(attrs) != {"r"}:
                self._fail(f"reference field {name!r} requires exactly the r attribute")
            if not OID_RE.match(attrs["r"]):
                self._fail(f"invalid OID {attrs['r']!r} in field {name!r}")
            self._store(name, Oid(attrs["r"]))
            self._text = None
        else:
            if attrs:
                self._fail(f"unexpected attribute on scalar field {name!r}")
            self._text = []

    def text(self, data: str) -> bool:
        """Feed character data; returns False if it was not consumed."""
        if self._fdef is None:
            return False
        if self._is_ref_leaf:
            self._fail(f"unexpected text in reference field {self._fdef.name!r}")
        self._text.append(data)
        return True

    def close_field(self) -> None:
        fdef = self._fdef
        assert fdef is not None
        if not self._is_ref_leaf:
            raw = "".join(self._text)
            kind = fdef.kind.element if isinstance(fdef.kind, ListOf) else fdef.kind
            self._store(fdef.name, self._decode_scalar(kind.kind, raw, fdef.name))
        self._fdef = None
        self._text = None

    def close_record(self, model: ClassModel) -> ObjectRecord:
        record = self.record
        assert record is not None
        try:
            validate_record(record, model, self._layouts)
        except RecordError as exc:
            self._fail(str(exc))
        self.record = None
        return record

    def _store(self, name: str, value) -> None:
        record = self.record
        if isinstance(self._fdef.kind, ListOf):
            record.values.setdefault(name, []).append(value)
        elif name in record.values:
            self._fail(f"duplicate field {name!r}")
        else:
            record.values[name] = value

    def _decode_scalar(self, sk: ScalarKind, raw: str, name: str):
        if sk is ScalarKind.STR:
            return raw
        if sk is ScalarKind.BOOL:
            if raw == "true":
                return True
            if raw == "false":
                return False
            self._fail(f"field {name!r}: {raw!r} is not a boolean")
        if sk is ScalarKind.INT64:
            if not _INT_TEXT_RE.match(raw):
                self._fail(f"field {name!r}: {raw!r} is not a canonical integer")
            value = int(raw)
            if not INT64_MIN <= value <= INT64_MAX:
                self._fail(f"field {name!r}: integer overflows 64 bits")
            return value
        try:
            value = float(raw)
        except ValueError:
            self._fail(f"field {name!r}: {raw!r} is not a float")
        if not math.isfinite(value):
            self._fail(f"field {name!r}: non-finite float")
        return value


def _line_count(data: bytes) -> int:
    if not data:
        return 1
    lines = data.count(b"\n")
    return lines if data.endswith(b"\n") else lines + 1


def read_canonical(
    data: bytes,
    model: ClassModel,
    sink: Callable[[ObjectRecord], None],
    instrumentation=None,
) -> DocumentHeader:
    """Stream-decode a canonical document, invoking sink once per object.

    At most one record is materialized at a time; the schema hash in the
    header is verified against the model before any record is decoded.
    Every rejection carries the offending line and column.
    """
    expected_hash = schema_hash(model)
    layouts = LayoutIndex(model)
    parser = expat.ParserCreate()
    parser.buffer_text = True

    def pos() -> tuple[int, int]:
        return parser.CurrentLineNumber, parser.CurrentColumnNumber + 1

    def fail(message: str):
        raise DocumentError(message, *pos())

    header: list[DocumentHeader] = []
    depth = 0
    assembler = _RecordAssembler(layouts, pos)

    def start(name: str, attrs: dict[str, str]) -> None:
        nonlocal depth
        depth += 1
        if depth == 1:
            if name != "objects":
                fail(f"root element must be <objects>, found <{name}>")
            unknown = set(attrs) - {"schema", "schemaHash"}
            if unknown:
                fail(f"unexpected attribute {sorted(unknown)[0]!r} on <objects>")
            if "schema" not in attrs or "schemaHash" not in attrs:
                fail("<objects> requires schema and schemaHash attributes")
            if attrs["schemaHash"] != expected_hash:
                raise HeaderMismatchError(
                    f"document schemaHash {attrs['schemaHash']!r} does not match "
                    f"model hash {expected_hash!r}",
                    *pos(),
                )
            header.append(DocumentHeader(attrs["schema"], attrs["schemaHash"]))
        elif depth == 2:
            if name != "o":
                fail(f"expected <o>, found <{name}>")
            if instrumentation is not None:
                instrumentation.record_opened()
            assembler.open_record(attrs)
        elif depth == 3:
            assembler.open_field(name, attrs)
        else:
            fail(f"unexpected nested element <{name}>")

    def end(name: str) -> None:
        nonlocal depth
        if depth == 3:
            assembler.close_field()
        elif depth == 2:
            record = assembler.close_record(model)
            sink(record)
            if instrumentation is not None:
                instrumentation.record_closed()
        depth -= 1

    def chars(text: str) -> None:
        if assembler.text(text):
            return
        if text.strip():
            fail("unexpected text content")

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars

    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        line = min(exc.lineno, _line_count(data))
        raise DocumentError(
            f"malformed XML: {expat.errors.messages[exc.code]}", max(line, 1), exc.offset + 1
        ) from None
    except (LookupError, ValueError) as exc:
        # expat raises these for unknown/invalid encoding declarations
        raise DocumentError(f"malformed XML: {exc}", 1, 1) from None
    if not header:
        raise DocumentError("document has no <objects> root", 1, 1)
    return header[0]


VERBOSE_FILE_NAMES = ("schema.dtd", "schema.xml", "data.dtd", "data.xml")

_SCHEMA_DTD = """\
<!ELEMENT ObjectSchema (Class*)>
<!ATTLIST ObjectSchema name CDATA #REQUIRED>
<!ELEMENT Class (FieldDescriptor*)>
<!ATTLIST Class name CDATA #REQUIRED extends CDATA #IMPLIED>
<!ELEMENT FieldDescriptor EMPTY>
<!ATTLIST FieldDescriptor name CDATA #REQUIRED kind CDATA #REQUIRED optional (true|false) #REQUIRED>
"""

_DATA_DTD = """\
<!ELEMENT ObjectData (Object*)>
<!ATTLIST ObjectData schema CDATA #REQUIRED>
<!ELEMENT Object (Database, Container, Page, Slot, TypeDescriptor, ObjectId, Fields)>
<!ELEMENT Database (#PCDATA)>
<!ELEMENT Container (#PCDATA)>
<!ELEMENT Page (#PCDATA)>
<!ELEMENT Slot (#PCDATA)>
<!ELEMENT TypeDescriptor (ClassName, SuperClass?, FieldDescriptor*)>
<!ELEMENT ClassName (#PCDATA)>
<!ELEMENT SuperClass (#PCDATA)>
<!ELEMENT FieldDescriptor EMPTY>
<!ATTLIST FieldDescriptor name CDATA #REQUIRED kind CDATA #REQUIRED optional (true|false) #REQUIRED>
<!ELEMENT ObjectId (#PCDATA)>
<!ELEMENT Fields (Field*)>
<!ELEMENT Field (#PCDATA|Item)*>
<!ATTLIST Field name CDATA #REQUIRED type CDATA #REQUIRED ref CDATA #IMPLIED>
<!ELEMENT Item (#PCDATA)>
<!ATTLIST Item ref CDATA #IMPLIED>
"""


def write_verbose(records: Iterable[ObjectRecord], model: ClassModel) -> dict[str, bytes]:
    """Emit the legacy multi-file baseline: two DTDs, a schema restatement,
    and a data file that repeats synthetic storage coordinates and the full
    type descriptor for every object. Used only for size comparison."""
    from .model import _kind_spec  # rendering reuses the dump kind grammar

    layouts = LayoutIndex(model)
    ordered = sorted(records, key=lambda r: r.oid.token)
    for record in ordered:
        validate_record(record, model, layouts)
    seen: set[str] = set()
    for record in ordered:
        if record.oid.token in seen:
            raise RecordError(f"duplicate OID {record.oid.token!r}")
        seen.add(record.oid.token)

    schema_lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<!DOCTYPE ObjectSchema SYSTEM "schema.dtd">',
        f'<ObjectSchema name="{escape_attr(model.name)}">',
    ]
    for cname in sorted(model.classes):
        cdef = model.classes[cname]
        extends = f' extends="{cdef.superclass}"' if cdef.superclass else ""
        schema_lines.append(f'  <Class name="{cname}"{extends}>')
        for fdef in cdef.own_fields:
            schema_lines.append("    " + _descriptor_line(fdef))
        schema_lines.append("  </Class>")
    schema_lines.append("</ObjectSchema>")

    data_lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<!DOCTYPE ObjectData SYSTEM "data.dtd">',
        f'<ObjectData schema="{escape_attr(model.name)}">',
    ]
    for index, record in enumerate(ordered):
        layout = layouts.layout(record.class_name)
        cdef = model.classes[record.class_name]
        data_lines.append("  <Object>")
        data_lines.append("    <Database>DB0</Database>")
        data_lines.append(f"    <Container>{index // 100}</Container>")
        data_lines.append(f"    <Page>{index // 10}</Page>")
        data_lines.append(f"    <Slot>{index}</Slot>")
        data_lines.append("    <TypeDescriptor>")
        data_lines.append(f"      <ClassName>{record.class_name}</ClassName>")
        if cdef.superclass:
            data_lines.append(f"      <SuperClass>{cdef.superclass}</SuperClass>")
        for fdef in layout:
            data_lines.append("      " + _descriptor_line(fdef))
        data_lines.append("    </TypeDescriptor>")
        data_lines.append(f"    <ObjectId>{record.oid.token}</ObjectId>")
        data_lines.append("    <Fields>")
        for fdef in layout:
            if fdef.name not in record.values:
                continue
            value = record.values[fdef.name]
            spec = _kind_spec(fdef.kind)
            if isinstance(fdef.kind, ListOf):
                data_lines.append(f'      <Field name="{fdef.name}" type="{spec}">')
                for item in value:
                    data_lines.append("        " + _verbose_item(fdef.kind.element, item))
                data_lines.append("      </Field>")
            elif isinstance(fdef.kind, Ref):
                data_lines.append(
                    f'      <Field name="{fdef.name}" type="{spec}" ref="{item_token(value)}"/>'
                )
            else:
                text = escape_text(_scalar_text(fdef.kind.kind, value))
                data_lines.append(f'      <Field name="{fdef.name}" type="{spec}">{text}</Field>')
        data_lines.append("    </Fields>")
        data_lines.append("  </Object>")
    data_lines.append("</ObjectData>")

    return {
        "schema.dtd": _SCHEMA_DTD.encode("utf-8"),
        "schema.xml": ("\n".join(schema_lines) + "\n").encode("utf-8"),
        "data.dtd": _DATA_DTD.encode("utf-8"),
        "data.xml": ("\n".join(data_lines) + "\n").encode("utf-8"),
    }


def item_token(value: Oid) -> str:
    return escape_attr(value.token)


def _verbose_item(kind: Scalar | Ref, item) -> str:
    if isinstance(kind, Ref):
        return f'<Item ref="{item_token(item)}"/>'
    return f"<Item>{escape_text(_scalar_text(kind.kind, item))}</Item>"


def _descriptor_line(fdef: FieldDef) -> str:
    from .model import _kind_spec

    optional = "true" if fdef.optional else "false"
    return f'<FieldDescriptor name="{fdef.name}" kind="{_kind_spec(fdef.kind)}" optional="{optional}"/>'


def parse_record_line(line: str, model: ClassModel, layouts: LayoutIndex | None = None) -> ObjectRecord:
    """Decode one canonical ``<o .../>`` line (as stored in a FileStore log)."""
    layouts = layouts or LayoutIndex(model)
    parser = expat.ParserCreate()
    parser.buffer_text = True

    def pos() -> tuple[int, int]:
        return parser.CurrentLineNumber, parser.CurrentColumnNumber + 1

    out: list[ObjectRecord] = []
    depth = 0
    assembler = _RecordAssembler(layouts, pos)

    def start(name: str, attrs: dict[str, str]) -> None:
        nonlocal depth
        depth += 1
        if depth == 1:
            if name != "o":
                raise DocumentError(f"expected <o>, found <{name}>", *pos())
            assembler.open_record(attrs)
        elif depth == 2:
            assembler.open_field(name, attrs)
        else:
            raise DocumentError(f"unexpected nested element <{name}>", *pos())

    def end(name: str) -> None:
        nonlocal depth
        if depth == 2:
            assembler.close_field()
        elif depth == 1:
            out.append(assembler.close_record(model))
        depth -= 1

    def chars(text: str) -> None:
        if not assembler.text(text) and text.strip():
            raise DocumentError("unexpected text content", *pos())

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(line.encode("utf-8"), True)
    except expat.ExpatError as exc:
        raise DocumentError(
            f"malformed record line: {expat.errors.messages[exc.code]}", exc.lineno, exc.offset + 1
        ) from None
    except (LookupError, ValueError) as exc:
        raise DocumentError(f"malformed record line: {exc}", 1, 1) from None
    if not out:
        raise DocumentError("record line held no <o> element", 1, 1)
    return out[0]
