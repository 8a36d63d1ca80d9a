"""Class-model intermediate representation.

The model is a catalog of entity classes: single inheritance, ordered typed
fields, four scalar kinds. It is the contract between the schema frontend,
the object codec, and the stores. Instances are treated as immutable after
construction; every operation here is pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import TransodbError

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Field names that would collide with wire-format element/attribute names.
RESERVED_FIELD_NAMES = frozenset({"o", "c", "id"})


class InvalidModelError(TransodbError):
    """Raised by operations that require a valid model."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__(
            "invalid model: " + "; ".join(d.message for d in diagnostics)
        )


class ScalarKind(Enum):
    STR = "str"
    BOOL = "bool"
    INT64 = "int"
    FLOAT64 = "float"


@dataclass(frozen=True)
class Scalar:
    kind: ScalarKind


@dataclass(frozen=True)
class Ref:
    """Reference to another object by class; resolves to an OID on the wire."""

    target: str


@dataclass(frozen=True)
class ListOf:
    """Homogeneous repeated field. Lists never nest."""

    element: Scalar | Ref


FieldKind = Scalar | Ref | ListOf


@dataclass(frozen=True)
class FieldDef:
    """One declared field.

    List fields are always optional-with-empty-default: the wire format
    cannot distinguish an absent list from an empty one, so the flag is
    normalized to True at construction.
    """

    name: str
    kind: FieldKind
    optional: bool = False

    def __post_init__(self):
        if isinstance(self.kind, ListOf) and not self.optional:
            object.__setattr__(self, "optional", True)


@dataclass(frozen=True)
class ClassDef:
    """One entity class: a name, an optional superclass, and its own fields
    in declaration order (inherited fields live on the ancestors)."""

    name: str
    superclass: str | None = None
    own_fields: tuple[FieldDef, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "own_fields", tuple(self.own_fields))


@dataclass(frozen=True)
class Diagnostic:
    """One model-validation violation. Ordered by (class, field, message)."""

    class_name: str
    field_name: str | None
    message: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.class_name, self.field_name or "", self.message)


@dataclass
class ClassModel:
    """The whole catalog. `name` identifies the model in document headers
    but does not participate in the dump or the schema hash."""

    name: str
    classes: dict[str, ClassDef] = field(default_factory=dict)


def validate_model(model: ClassModel) -> list[Diagnostic]:
    """Check model well-formedness; an empty result means valid.

    Reports every violation rather than stopping at the first: unresolved
    superclasses and Ref targets, inheritance cycles, duplicate field names
    in the resolved layout, and reserved or malformed names. Deterministic
    order (class name, then field name).
    """
    diags: list[Diagnostic] = []

    for cname, cdef in model.classes.items():
        if not NAME_RE.match(cname):
            diags.append(Diagnostic(cname, None, f"invalid class name {cname!r}"))
        if cdef.name != cname:
            diags.append(
                Diagnostic(cname, None, f"class registered under {cname!r} is named {cdef.name!r}")
            )
        if cdef.superclass is not None and cdef.superclass not in model.classes:
            diags.append(
                Diagnostic(cname, None, f"unresolved superclass {cdef.superclass!r} of {cname}")
            )
        for fdef in cdef.own_fields:
            if not NAME_RE.match(fdef.name):
                diags.append(Diagnostic(cname, fdef.name, f"invalid field name {fdef.name!r}"))
            elif fdef.name in RESERVED_FIELD_NAMES:
                diags.append(
                    Diagnostic(cname, fdef.name, f"reserved field name {fdef.name!r} in {cname}")
                )
            target = _ref_target(fdef.kind)
            if target is not None and target not in model.classes:
                diags.append(
                    Diagnostic(
                        cname, fdef.name, f"unresolved reference target {target!r} in {cname}.{fdef.name}"
                    )
                )

    cyclic = _cycle_members(model)
    for cname in cyclic:
        diags.append(Diagnostic(cname, None, f"inheritance cycle at {cname}"))

    # Duplicate detection needs a resolvable chain: skip classes whose
    # ancestry is broken by a cycle or a missing superclass.
    for cname, cdef in model.classes.items():
        chain = _chain(model, cname, cyclic)
        if chain is None:
            continue
        seen: set[str] = set()
        for ancestor in chain:
            for fdef in model.classes[ancestor].own_fields:
                if fdef.name in seen:
                    diags.append(
                        Diagnostic(cname, fdef.name, f"duplicate field {fdef.name} in {cname}")
                    )
                seen.add(fdef.name)

    diags.sort(key=Diagnostic.sort_key)
    return diags


def resolve_layout(model: ClassModel, class_name: str) -> list[FieldDef]:
    """Flattened field layout: root ancestor's fields first, then each
    descendant's own fields, declaration order preserved within a class."""
    chain = _chain(model, class_name, _cycle_members(model))
    if class_name not in model.classes:
        raise KeyError(f"unknown class {class_name!r}")
    if chain is None:
        raise InvalidModelError(validate_model(model))
    layout: list[FieldDef] = []
    for ancestor in chain:
        layout.extend(model.classes[ancestor].own_fields)
    return layout


def is_subtype(model: ClassModel, sub: str, sup: str) -> bool:
    """True iff `sup` is `sub` or reachable from it along superclass links."""
    for name in (sub, sup):
        if name not in model.classes:
            raise KeyError(f"unknown class {name!r}")
    current: str | None = sub
    seen: set[str] = set()
    while current is not None:
        if current == sup:
            return True
        if current in seen:
            raise InvalidModelError(validate_model(model))
        seen.add(current)
        current = model.classes[current].superclass if current in model.classes else None
    return False


def dump_model(model: ClassModel) -> str:
    """Deterministic one-line-per-class rendering.

    Classes sort by name byte-wise; each line is
    ``class NAME [: SUPER] { field, field }`` with fields as
    ``name:kindspec`` plus a ``?`` suffix when optional. This exact byte
    sequence feeds the schema hash, so the grammar must never drift.
    """
    diags = validate_model(model)
    if diags:
        raise InvalidModelError(diags)
    lines = []
    for cname in sorted(model.classes):
        cdef = model.classes[cname]
        head = f"class {cname}"
        if cdef.superclass is not None:
            head += f" : {cdef.superclass}"
        fields = ", ".join(_field_spec(f) for f in cdef.own_fields)
        lines.append(f"{head} {{ {fields} }}\n")
    return "".join(lines)


class LayoutIndex:
    """Per-class layout cache over a validated model."""

    def __init__(self, model: ClassModel):
        self.model = model
        self._layouts: dict[str, list[FieldDef]] = {}
        self._by_name: dict[str, dict[str, FieldDef]] = {}

    def layout(self, class_name: str) -> list[FieldDef]:
        cached = self._layouts.get(class_name)
        if cached is None:
            cached = resolve_layout(self.model, class_name)
            self._layouts[class_name] = cached
            self._by_name[class_name] = {f.name: f for f in cached}
        return cached

    def field(self, class_name: str, field_name: str) -> FieldDef | None:
        self.layout(class_name)
        return self._by_name[class_name].get(field_name)


def _field_spec(fdef: FieldDef) -> str:
    spec = f"{fdef.name}:{_kind_spec(fdef.kind)}"
    return spec + "?" if fdef.optional else spec


def _kind_spec(kind: FieldKind) -> str:
    if isinstance(kind, Scalar):
        return kind.kind.value
    if isinstance(kind, Ref):
        return f"ref({kind.target})"
    return f"list({_kind_spec(kind.element)})"


def _ref_target(kind: FieldKind) -> str | None:
    if isinstance(kind, Ref):
        return kind.target
    if isinstance(kind, ListOf) and isinstance(kind.element, Ref):
        return kind.element.target
    return None


def _cycle_members(model: ClassModel) -> set[str]:
    """Classes that sit on a superclass cycle."""
    members: set[str] = set()
    for start in model.classes:
        path: list[str] = []
        seen: set[str] = set()
        current: str | None = start
        while current is not None and current in model.classes:
            if current in seen:
                members.update(path[path.index(current):])
                break
            seen.add(current)
            path.append(current)
            current = model.classes[current].superclass
    return members


def _chain(model: ClassModel, class_name: str, cyclic: set[str]) -> list[str] | None:
    """Root-first ancestry of a class, or None if it cannot be resolved."""
    if class_name not in model.classes:
        return None
    chain: list[str] = []
    current: str | None = class_name
    while current is not None:
        if current in cyclic or current not in model.classes:
            return None
        chain.append(current)
        current = model.classes[current].superclass
    chain.reverse()
    return chain
