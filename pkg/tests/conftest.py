import pytest

from transodb import ClassDef, ClassModel, FieldDef, ListOf, Oid, ObjectRecord, Ref, Scalar, ScalarKind


@pytest.fixture
def person_model():
    """Person(name, age): the smallest interesting model."""
    return ClassModel(
        "m",
        {
            "Person": ClassDef(
                "Person",
                None,
                (
                    FieldDef("name", Scalar(ScalarKind.STR)),
                    FieldDef("age", Scalar(ScalarKind.INT64)),
                ),
            )
        },
    )


@pytest.fixture
def family_model():
    """Person with refs and a list, Employee extending it."""
    return ClassModel(
        "family",
        {
            "Person": ClassDef(
                "Person",
                None,
                (
                    FieldDef("name", Scalar(ScalarKind.STR)),
                    FieldDef("age", Scalar(ScalarKind.INT64)),
                    FieldDef("spouse", Ref("Person"), optional=True),
                    FieldDef("friends", ListOf(Ref("Person"))),
                ),
            ),
            "Employee": ClassDef(
                "Employee",
                "Person",
                (FieldDef("salary", Scalar(ScalarKind.FLOAT64), optional=True),),
            ),
        },
    )


def person(oid, name="A", age=30, **extra):
    values = {"name": name, "age": age}
    values.update(extra)
    return ObjectRecord("Person", Oid(oid), values)
