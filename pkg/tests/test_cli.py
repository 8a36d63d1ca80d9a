"""End-to-end command tests: exit codes, outputs, and no partial files."""

import pytest

from transodb import (
    FileStore,
    MemStore,
    export_store,
    import_document,
    synthesize_graph,
    write_canonical,
)
from transodb.bench import bench_model
from transodb.cli import MEM_FIXTURES, main

from conftest import person

EMPTY_XSD = '<?xml version="1.0" encoding="UTF-8"?>\n<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"/>\n'

PERSON_XSD = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">\n'
    '  <xs:complexType name="Person">\n'
    "    <xs:sequence>\n"
    '      <xs:element name="name" type="xs:string"/>\n'
    '      <xs:element name="age" type="xs:long"/>\n'
    "    </xs:sequence>\n"
    "  </xs:complexType>\n"
    "</xs:schema>\n"
)


@pytest.fixture(autouse=True)
def fresh_fixture_registry():
    MEM_FIXTURES.clear()
    yield
    MEM_FIXTURES.clear()


@pytest.fixture
def person_xsd(tmp_path):
    path = tmp_path / "person.xsd"
    path.write_text(PERSON_XSD, encoding="utf-8")
    return path


@pytest.fixture
def bench_xsd(tmp_path):
    from importlib import resources

    path = tmp_path / "bench.xsd"
    path.write_bytes(resources.files("transodb").joinpath("bench_schema.xsd").read_bytes())
    return path


# -- schema ---------------------------------------------------------------------


def test_schema_empty(tmp_path, capsys):
    path = tmp_path / "empty.xsd"
    path.write_text(EMPTY_XSD, encoding="utf-8")
    assert main(["schema", str(path)]) == 0
    out = capsys.readouterr().out
    assert out == "cbf29ce484222325\n"


def test_schema_bench_model(bench_xsd, capsys):
    assert main(["schema", str(bench_xsd)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("class Employee : Person {")
    assert out[1].startswith("class Person {")
    assert len(out[2]) == 16


def test_schema_rejects_datetime(tmp_path, capsys):
    path = tmp_path / "bad.xsd"
    path.write_text(
        PERSON_XSD.replace('type="xs:long"', 'type="xs:dateTime"'), encoding="utf-8"
    )
    assert main(["schema", str(path)]) == 1
    err = capsys.readouterr().err
    assert "xs:dateTime" in err
    assert "line" in err


def test_schema_missing_file(tmp_path):
    assert main(["schema", str(tmp_path / "nope.xsd")]) == 2


# -- export ----------------------------------------------------------------------


def test_export_empty_filestore(person_xsd, tmp_path, capsys):
    model, _ = _model_of(person_xsd)
    FileStore(tmp_path / "store", model).close()
    out = tmp_path / "out.odbx"
    assert main(["export", "--schema", str(person_xsd), "--store", str(tmp_path / "store"), "--out", str(out)]) == 0
    assert out.read_bytes() == write_canonical([], model)


def test_export_matches_library_bytes(bench_xsd, tmp_path):
    model, _ = _model_of(bench_xsd)
    graph = synthesize_graph(model, 42, 100)
    store = FileStore(tmp_path / "store", model)
    for record in graph.records.values():
        store.put(record)
    store.commit()
    store.close()

    out = tmp_path / "graph.odbx"
    assert main(["export", "--schema", str(bench_xsd), "--store", str(tmp_path / "store"), "--out", str(out)]) == 0
    assert out.read_bytes() == write_canonical(graph.records.values(), model)


def test_export_wrong_schema_creates_nothing(person_xsd, bench_xsd, tmp_path, capsys):
    model, _ = _model_of(bench_xsd)
    FileStore(tmp_path / "store", model).close()
    out = tmp_path / "out.odbx"
    assert main(["export", "--schema", str(person_xsd), "--store", str(tmp_path / "store"), "--out", str(out)]) == 1
    assert not out.exists()
    assert list(tmp_path.glob("*.tmp")) == []


def test_export_missing_store_is_io_error(person_xsd, tmp_path):
    out = tmp_path / "out.odbx"
    assert main(["export", "--schema", str(person_xsd), "--store", str(tmp_path / "ghost"), "--out", str(out)]) == 2
    assert not out.exists()


# -- import ----------------------------------------------------------------------


def _model_of(xsd_path):
    from transodb import parse_schema

    model, diags = parse_schema(xsd_path.read_bytes(), xsd_path.stem)
    assert model is not None
    return model, diags


def test_import_empty_document(person_xsd, tmp_path, capsys):
    model, _ = _model_of(person_xsd)
    doc = tmp_path / "empty.odbx"
    doc.write_bytes(write_canonical([], model))
    assert main(["import", "--schema", str(person_xsd), "--in", str(doc), "--store", str(tmp_path / "s")]) == 0
    assert "0 records" in capsys.readouterr().out


def test_export_import_export_chain(bench_xsd, tmp_path, capsys):
    model, _ = _model_of(bench_xsd)
    graph = synthesize_graph(model, 7, 150)
    original = write_canonical(graph.records.values(), model)
    doc = tmp_path / "g.odbx"
    doc.write_bytes(original)

    assert main(["import", "--schema", str(bench_xsd), "--in", str(doc), "--store", str(tmp_path / "s")]) == 0
    out = tmp_path / "back.odbx"
    assert main(["export", "--schema", str(bench_xsd), "--store", str(tmp_path / "s"), "--out", str(out)]) == 0
    assert out.read_bytes() == original


def test_import_truncated_document_rolls_back(person_xsd, tmp_path, capsys):
    model, _ = _model_of(person_xsd)
    store = FileStore(tmp_path / "s", model)
    import_document(write_canonical([person("keep")], model), model, store)
    before = export_store(store, model)
    store.close()

    full = write_canonical([person("o1"), person("o2")], model)
    doc = tmp_path / "cut.odbx"
    doc.write_bytes(full[: len(full) - 25])

    assert main(["import", "--schema", str(person_xsd), "--in", str(doc), "--store", str(tmp_path / "s")]) == 1
    err = capsys.readouterr().err
    assert "line" in err

    store = FileStore(tmp_path / "s", model)
    assert export_store(store, model) == before
    store.close()


def test_import_failure_removes_created_directory(person_xsd, tmp_path):
    model, _ = _model_of(person_xsd)
    bad = write_canonical([person("o1")], model)
    doc = tmp_path / "bad.odbx"
    doc.write_bytes(bad.replace(b"Person", b"Ghost"))
    target = tmp_path / "newstore"
    assert main(["import", "--schema", str(person_xsd), "--in", str(doc), "--store", str(target)]) == 1
    assert not target.exists()


def test_import_missing_input_is_io_error(person_xsd, tmp_path):
    assert main(["import", "--schema", str(person_xsd), "--in", str(tmp_path / "none.odbx"), "--store", str(tmp_path / "s")]) == 2


# -- migrate ---------------------------------------------------------------------


def test_migrate_empty_file_to_file(person_xsd, tmp_path, capsys):
    model, _ = _model_of(person_xsd)
    FileStore(tmp_path / "src", model).close()
    assert main([
        "migrate", "--schema", str(person_xsd),
        "--from", f"file:{tmp_path / 'src'}", "--to", f"file:{tmp_path / 'dst'}",
    ]) == 0
    assert "0 records" in capsys.readouterr().out


def test_migrate_mem_to_file(bench_xsd, tmp_path, capsys):
    model, _ = _model_of(bench_xsd)
    graph = synthesize_graph(model, 42, 500)
    fixture = MemStore(model)
    for record in graph.records.values():
        fixture.put(record)
    MEM_FIXTURES["src"] = fixture

    assert main([
        "migrate", "--schema", str(bench_xsd),
        "--from", "mem:src", "--to", f"file:{tmp_path / 'dst'}",
    ]) == 0
    dst = FileStore(tmp_path / "dst", model)
    assert export_store(dst, model) == export_store(fixture, model)
    dst.close()


def test_migrate_collision_leaves_destination_unchanged(person_xsd, tmp_path, capsys):
    model, _ = _model_of(person_xsd)
    src = MemStore(model)
    src.put(person("dup"))
    MEM_FIXTURES["src"] = src

    dst_dir = tmp_path / "dst"
    dst = FileStore(dst_dir, model)
    dst.put(person("dup", age=77))
    dst.commit()
    before = export_store(dst, model)
    dst.close()

    assert main([
        "migrate", "--schema", str(person_xsd), "--from", "mem:src", "--to", f"file:{dst_dir}",
    ]) == 1
    dst = FileStore(dst_dir, model)
    assert export_store(dst, model) == before
    dst.close()


def test_export_from_mem_fixture(person_xsd, tmp_path):
    model, _ = _model_of(person_xsd)
    fixture = MemStore(model)
    fixture.put(person("m1"))
    MEM_FIXTURES["box"] = fixture
    out = tmp_path / "box.odbx"
    assert main(["export", "--schema", str(person_xsd), "--store", "mem:box", "--out", str(out)]) == 0
    assert out.read_bytes() == export_store(fixture, model)


def test_mem_fixture_schema_binding_checked(person_xsd, bench_xsd, tmp_path):
    model, _ = _model_of(bench_xsd)
    MEM_FIXTURES["bound"] = MemStore(model)
    out = tmp_path / "x.odbx"
    assert main(["export", "--schema", str(person_xsd), "--store", "mem:bound", "--out", str(out)]) == 1
    assert not out.exists()


# -- bench -----------------------------------------------------------------------


def test_bench_empty_sizes(capsys):
    assert main(["bench", "--sizes", ""]) == 0
    out = capsys.readouterr().out
    assert out == "n\tcanonical_bytes\tverbose_bytes\texport_ms\timport_ms\n"


def test_bench_rows_and_determinism(tmp_path, capsys):
    assert main(["bench", "--sizes", "50,100", "--seed", "42"]) == 0
    first = [line.split("\t")[:3] for line in capsys.readouterr().out.splitlines()[1:]]
    assert main(["bench", "--sizes", "50,100", "--seed", "42"]) == 0
    second = [line.split("\t")[:3] for line in capsys.readouterr().out.splitlines()[1:]]
    assert first == second
    assert [row[0] for row in first] == ["50", "100"]


def test_bench_out_file(tmp_path):
    out = tmp_path / "report.tsv"
    assert main(["bench", "--sizes", "25", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n\t")
    assert len(lines) == 2
