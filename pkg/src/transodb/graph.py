"""Object-graph construction: closure and reference-type checking.

A stream of records becomes a validated, closed graph in two passes: the
first registers identities and collects outbound references, the second
checks that every reference lands on a present record of an acceptable
class. Forward references and cycles of any length are fine; failures are
reported all at once.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import ModelMismatchError, TransodbError
from .model import ClassModel, LayoutIndex, dump_model, is_subtype
from .objectxml import ObjectRecord, Oid, RecordError, Value, iter_refs, validate_record


class BuildErrorKind(Enum):
    DANGLING_REF = "DanglingRef"
    DUPLICATE_OID = "DuplicateOid"
    REF_TYPE_MISMATCH = "RefTypeMismatch"
    RECORD_INVALID = "RecordInvalid"


@dataclass(frozen=True)
class BuildError:
    kind: BuildErrorKind
    offending_oid: Oid
    detail: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.offending_oid.token, self.kind.value, self.detail)


class GraphBuildError(TransodbError):
    """Raised when a record stream cannot form a valid graph; carries the
    complete, deterministically ordered error list."""

    def __init__(self, errors: list[BuildError]):
        self.errors = errors
        summary = "; ".join(f"{e.kind.value}({e.offending_oid.token}): {e.detail}" for e in errors[:5])
        if len(errors) > 5:
            summary += f"; ... {len(errors) - 5} more"
        super().__init__(summary)


@dataclass
class ObjectGraph:
    """A closed, type-correct set of records keyed by OID."""

    model: ClassModel
    records: dict[Oid, ObjectRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)


def build_graph(records: Iterable[ObjectRecord], model: ClassModel) -> ObjectGraph:
    """Assemble a graph, or raise GraphBuildError listing every problem."""
    layouts = LayoutIndex(model)
    errors: list[BuildError] = []
    by_oid: dict[Oid, ObjectRecord] = {}
    outbound: list[tuple[Oid, str, str, Oid]] = []

    for record in records:
        try:
            validate_record(record, model, layouts)
        except RecordError as exc:
            errors.append(BuildError(BuildErrorKind.RECORD_INVALID, record.oid, str(exc)))
            continue
        if record.oid in by_oid:
            errors.append(
                BuildError(BuildErrorKind.DUPLICATE_OID, record.oid, f"OID {record.oid.token} seen twice")
            )
            continue
        by_oid[record.oid] = record
        for field_name, target_class, target in iter_refs(record, layouts):
            outbound.append((record.oid, field_name, target_class, target))

    for source, field_name, target_class, target in outbound:
        resolved = by_oid.get(target)
        if resolved is None:
            errors.append(
                BuildError(
                    BuildErrorKind.DANGLING_REF,
                    source,
                    f"{source.token}.{field_name} references missing {target.token}",
                )
            )
        elif not is_subtype(model, resolved.class_name, target_class):
            errors.append(
                BuildError(
                    BuildErrorKind.REF_TYPE_MISMATCH,
                    source,
                    f"{source.token}.{field_name} expects {target_class}, "
                    f"{target.token} is {resolved.class_name}",
                )
            )

    if errors:
        errors.sort(key=BuildError.sort_key)
        raise GraphBuildError(errors)
    return ObjectGraph(model, by_oid)


def values_equal(a: Value, b: Value) -> bool:
    """Strict value comparison: kinds must match and floats compare bit-wise."""
    if isinstance(a, bool) or isinstance(b, bool):
        return type(a) is type(b) and a == b
    if isinstance(a, float) or isinstance(b, float):
        return (
            type(a) is type(b)
            and struct.pack(">d", a) == struct.pack(">d", b)
        )
    if isinstance(a, list) or isinstance(b, list):
        return (
            type(a) is type(b)
            and len(a) == len(b)
            and all(values_equal(x, y) for x, y in zip(a, b))
        )
    return type(a) is type(b) and a == b


def records_equal(a: ObjectRecord, b: ObjectRecord) -> bool:
    if a.class_name != b.class_name or a.oid != b.oid:
        return False
    if set(a.values) != set(b.values):
        return False
    return all(values_equal(a.values[k], b.values[k]) for k in a.values)


def graphs_equal(a: ObjectGraph, b: ObjectGraph) -> bool:
    """Field-wise graph equality; both graphs must share one schema."""
    if dump_model(a.model) != dump_model(b.model):
        raise ModelMismatchError("graphs bound to different models")
    if set(a.records) != set(b.records):
        return False
    return all(records_equal(rec, b.records[oid]) for oid, rec in a.records.items())


class Lcg:
    """64-bit linear-congruential generator (modulus 2**64) used by the
    synthetic workload so byte counts stay reproducible everywhere."""

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state

    def below(self, bound: int) -> int:
        return self.next() % bound

    def chance(self, percent: int) -> bool:
        return self.below(100) < percent


_STRING_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _.-"
_MARKUP_CHARS = '&<>"'


def _random_string(rng: Lcg) -> str:
    length = 1 + rng.below(32)
    chars = [_STRING_ALPHABET[rng.below(len(_STRING_ALPHABET))] for _ in range(length)]
    if rng.chance(10):
        chars[rng.below(length)] = _MARKUP_CHARS[rng.below(len(_MARKUP_CHARS))]
    return "".join(chars)


def synthesize_graph(model: ClassModel, seed: int, n: int) -> ObjectGraph:
    """Deterministic benchmark workload over the bundled reference schema.

    Produces exactly n records with OIDs o0..o(n-1); every reference points
    at an earlier-or-equal index, so the result is closed by construction.
    """
    for required in ("Person", "Employee"):
        if required not in model.classes:
            raise ModelMismatchError(
                f"benchmark workload needs class {required!r}; model lacks it"
            )
    rng = Lcg(seed)
    records: dict[Oid, ObjectRecord] = {}
    employees: list[int] = []

    for i in range(n):
        is_employee = rng.chance(50)
        values: dict[str, Value] = {
            "name": _random_string(rng),
            "age": rng.below(100),
        }
        if rng.chance(60):
            values["email"] = _random_string(rng)
        if rng.chance(50):
            values["spouse"] = Oid(f"o{rng.below(i + 1)}")
        friends = [Oid(f"o{rng.below(i + 1)}") for _ in range(rng.below(4))]
        if friends:
            values["friends"] = friends
        class_name = "Person"
        if is_employee:
            class_name = "Employee"
            values["salary"] = rng.below(10_000_000) / 100.0
            candidates = employees + [i]
            if rng.chance(50):
                values["manager"] = Oid(f"o{candidates[rng.below(len(candidates))]}")
            employees.append(i)
        oid = Oid(f"o{i}")
        records[oid] = ObjectRecord(class_name, oid, values)

    return build_graph(records.values(), model)
