"""Command-line surface for the whole pipeline.

Commands: schema (inspect an XSD), export / import (move a store to and
from the canonical data document), migrate (store to store), bench (size
and timing table). Exit codes: 0 success, 1 domain or validation error,
2 I/O failure. Failing commands leave the filesystem as they found it.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
from pathlib import Path

from .bench import bench_model, rows_to_tsv, run_bench
from .errors import TransodbError
from .model import ClassModel, dump_model
from .store import FileStore, MemStore, StoreAdapter, export_to, import_document, migrate
from .objectxml import schema_hash
from .xsd import parse_schema

# Named in-process stores addressable as mem:NAME; intended for tests that
# drive main() directly.
MEM_FIXTURES: dict[str, MemStore] = {}

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _load_model(path: str) -> tuple[ClassModel | None, int]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_IO
    model, diagnostics = parse_schema(data, Path(path).stem)
    for diag in diagnostics:
        print(str(diag), file=sys.stderr)
    if model is None:
        return None, EXIT_DOMAIN
    return model, EXIT_OK


def _open_store(spec: str, model: ClassModel, create: bool) -> StoreAdapter:
    if spec.startswith("mem:"):
        name = spec[4:]
        store = MEM_FIXTURES.get(name)
        if store is None:
            store = MemStore(model)
            MEM_FIXTURES[name] = store
        elif dump_model(store.model) != dump_model(model):
            raise TransodbError(f"mem fixture {name!r} is bound to a different schema")
        return store
    path = spec[5:] if spec.startswith("file:") else spec
    return FileStore(path, model, create=create)


def _write_atomically(path: str, produce) -> None:
    """produce(fileobj) writes the payload; publish via rename only on success."""
    target = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as out:
            produce(out)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def cmd_schema(args) -> int:
    model, code = _load_model(args.xsd)
    if model is None:
        return code
    sys.stdout.write(dump_model(model))
    print(schema_hash(model))
    return EXIT_OK


def cmd_export(args) -> int:
    model, code = _load_model(args.schema)
    if model is None:
        return code
    try:
        store = _open_store(args.store, model, create=False)
    except TransodbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _write_atomically(args.out, lambda out: export_to(store, model, out))
    except TransodbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        store.close()
    return EXIT_OK


def _store_dir_if_new(spec: str) -> Path | None:
    if spec.startswith("mem:"):
        return None
    path = Path(spec[5:] if spec.startswith("file:") else spec)
    return path if not path.exists() else None


def cmd_import(args) -> int:
    model, code = _load_model(args.schema)
    if model is None:
        return code
    try:
        data = Path(args.infile).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.infile}: {exc}", file=sys.stderr)
        return EXIT_IO

    created = _store_dir_if_new(args.store)
    store = None
    try:
        store = _open_store(args.store, model, create=True)
        count = import_document(data, model, store)
    except TransodbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if created is not None:
            if store is not None:
                store.close()
                store = None
            shutil.rmtree(created, ignore_errors=True)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if created is not None:
            if store is not None:
                store.close()
                store = None
            shutil.rmtree(created, ignore_errors=True)
        return EXIT_IO
    finally:
        if store is not None:
            store.close()
    print(f"{count} records")
    return EXIT_OK


def cmd_migrate(args) -> int:
    model, code = _load_model(args.schema)
    if model is None:
        return code
    created = _store_dir_if_new(args.to_spec)
    src = dst = None
    try:
        src = _open_store(args.from_spec, model, create=False)
        dst = _open_store(args.to_spec, model, create=True)
        count = migrate(src, dst, model)
    except TransodbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if created is not None:
            if dst is not None:
                dst.close()
                dst = None
            shutil.rmtree(created, ignore_errors=True)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if created is not None:
            if dst is not None:
                dst.close()
                dst = None
            shutil.rmtree(created, ignore_errors=True)
        return EXIT_IO
    finally:
        if src is not None:
            src.close()
        if dst is not None:
            dst.close()
    print(f"{count} records")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        print(f"error: bad --sizes value {args.sizes!r}", file=sys.stderr)
        return EXIT_DOMAIN
    model = bench_model()
    try:
        with tempfile.TemporaryDirectory(prefix="transodb-bench-") as workdir:
            rows = run_bench(model, sizes, args.seed, Path(workdir))
        tsv = rows_to_tsv(rows)
        if args.out:
            _write_atomically(args.out, lambda out: out.write(tsv.encode("utf-8")))
        else:
            sys.stdout.write(tsv)
    except TransodbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transodb",
        description="Move object graphs between XML documents and object stores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schema", help="parse an XSD and print the class dump and hash")
    p.add_argument("xsd")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("export", help="write a store's content as a canonical document")
    p.add_argument("--schema", required=True)
    p.add_argument("--store", required=True, help="store directory, file:PATH, or mem:NAME")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="load a canonical document into a store")
    p.add_argument("--schema", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--store", required=True, help="store directory, file:PATH, or mem:NAME")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("migrate", help="copy every record from one store into another")
    p.add_argument("--schema", required=True)
    p.add_argument("--from", dest="from_spec", required=True, help="file:PATH or mem:NAME")
    p.add_argument("--to", dest="to_spec", required=True, help="file:PATH or mem:NAME")
    p.set_defaults(func=cmd_migrate)

    p = sub.add_parser("bench", help="size and timing table over the bundled schema")
    p.add_argument("--sizes", default="", help="comma-separated object counts")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="write the TSV here instead of stdout")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
