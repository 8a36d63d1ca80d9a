"""Benchmark harness: size comparison against the verbose baseline and
export/import timing over the bundled reference schema."""

from __future__ import annotations

import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .graph import ObjectGraph, synthesize_graph
from .model import ClassModel
from .objectxml import write_canonical, write_verbose
from .store import FileStore, import_document
from .xsd import emit_schema, parse_schema

BENCH_MODEL_NAME = "bench"


@dataclass(frozen=True)
class BenchRow:
    n_objects: int
    canonical_bytes: int
    verbose_bytes: int
    export_ms: float
    import_ms: float


TSV_HEADER = "n\tcanonical_bytes\tverbose_bytes\texport_ms\timport_ms"


def bench_model() -> ClassModel:
    """The bundled reference schema (Person / Employee)."""
    data = resources.files("transodb").joinpath("bench_schema.xsd").read_bytes()
    model, diagnostics = parse_schema(data, BENCH_MODEL_NAME)
    if model is None:
        raise RuntimeError(
            "bundled benchmark schema failed to parse: "
            + "; ".join(str(d) for d in diagnostics)
        )
    return model


def measure(graph: ObjectGraph, model: ClassModel, workdir: Path) -> BenchRow:
    """One timed export+import pipeline run over an already-built graph.

    Canonical bytes count the two-file representation (schema plus data);
    verbose bytes count all four baseline files.
    """
    t0 = time.perf_counter()
    data = write_canonical(graph.records.values(), model)
    export_ms = (time.perf_counter() - t0) * 1000.0

    store_dir = workdir / f"store-{len(graph.records)}-{time.monotonic_ns()}"
    store = FileStore(store_dir, model)
    try:
        t0 = time.perf_counter()
        import_document(data, model, store)
        import_ms = (time.perf_counter() - t0) * 1000.0
    finally:
        store.close()

    verbose = write_verbose(graph.records.values(), model)
    canonical_bytes = len(data) + len(emit_schema(model).encode("utf-8"))
    verbose_bytes = sum(len(body) for body in verbose.values())
    row = BenchRow(len(graph.records), canonical_bytes, verbose_bytes, export_ms, import_ms)
    if row.n_objects >= 1 and row.verbose_bytes <= row.canonical_bytes:
        raise AssertionError("verbose baseline must out-weigh the canonical form")
    return row


def run_bench(model: ClassModel, sizes: list[int], seed: int, workdir: Path) -> list[BenchRow]:
    return [measure(synthesize_graph(model, seed, n), model, workdir) for n in sizes]


def rows_to_tsv(rows: list[BenchRow]) -> str:
    lines = [TSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.n_objects}\t{row.canonical_bytes}\t{row.verbose_bytes}"
            f"\t{row.export_ms:.3f}\t{row.import_ms:.3f}"
        )
    return "\n".join(lines) + "\n"


def materialize_comparison(
    outdir: Path, model: ClassModel, graph: ObjectGraph
) -> tuple[list[Path], list[Path]]:
    """Write both representations to disk and return their file lists.

    The canonical side is exactly two files (one .xsd, one .odbx); the
    baseline side is the four legacy files under verbose/.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    xsd_path = outdir / f"{model.name}.xsd"
    data_path = outdir / f"{model.name}.odbx"
    xsd_path.write_text(emit_schema(model), encoding="utf-8")
    data_path.write_bytes(write_canonical(graph.records.values(), model))

    verbose_dir = outdir / "verbose"
    verbose_dir.mkdir(exist_ok=True)
    verbose_paths = []
    for name, body in write_verbose(graph.records.values(), model).items():
        path = verbose_dir / name
        path.write_bytes(body)
        verbose_paths.append(path)
    return [xsd_path, data_path], verbose_paths
