"""Batch stages behind the CLI subcommands.

Each stage reads its inputs, writes JSON Lines outputs plus a manifest into
the output directory, and returns a StageResult carrying an exit code and a
short human summary. Per-item work runs on a thread pool; results are
collected in input order, so output files do not depend on ``workers``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TypeVar

from . import __version__
from .compose import compose_function_docstring
from .config import PipelineConfig
from .dataset_build import (
    DatasetError,
    ExplodedRecord,
    FormattedRecord,
    balance,
    explode,
    format_record,
    split,
)
from .directives import BASELINE_TEMPLATE_VERSION, Backends, build_bundle
from .doc_parse import (
    RANK_INCONSISTENT,
    RANK_ONE,
    RANK_THREE,
    RANK_TWO,
    completeness_rank,
    has_param_tokens,
    parse_docstring,
)
from .jsonl import digest_json, file_sha256, iter_jsonl, write_jsonl, write_manifest
from .metrics import (
    MetricReport,
    accuracy,
    bleu4,
    cohens_kappa,
    corpus_meteor,
    micro_f1,
    tokenize,
)
from .model_backend import ConstantBackend, EchoBackend, HttpBackend
from .py_extract import (
    ExtractionError,
    FunctionRecord,
    extract_functions,
    extract_parameters,
    passes_function_filters,
)
from .repo_filter import MetadataError, ScanStats, SourceFile, evaluate_metadata, scan_corpus
from .rewrite import insert_docstrings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class StageResult:
    exit_code: int
    summary: str
    outputs: dict[str, Path] = field(default_factory=dict)
    manifest: dict[str, Any] = field(default_factory=dict)


def _ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _base_manifest(command: str, config: PipelineConfig, inputs: dict[str, str]) -> dict[str, Any]:
    return {
        "command": command,
        "tool_version": __version__,
        "seed": config.seed,
        "config_digest": digest_json(config.digest_view()),
        "inputs": inputs,
    }


def _prepare_output(config: PipelineConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- filter-repos ------------------------------------------------------------


def run_filter_repos(metadata_path: Path, config: PipelineConfig) -> StageResult:
    out = _prepare_output(config)
    verdicts: list[dict[str, Any]] = []
    malformed: list[dict[str, Any]] = []
    total = 0
    for lineno, line in iter_jsonl(metadata_path):
        total += 1
        try:
            data = json.loads(line)
            verdict = evaluate_metadata(data, config.iec)
        except (json.JSONDecodeError, MetadataError) as exc:
            malformed.append({"line": lineno, "error": str(exc)})
            continue
        verdicts.append(verdict.to_dict())

    target = out / "verdicts.jsonl"
    write_jsonl(target, verdicts)
    counts = {
        "lines": total,
        "malformed": len(malformed),
        "included": sum(v["included"] for v in verdicts),
        "excluded": sum(not v["included"] and not v["indeterminate"] for v in verdicts),
        "indeterminate": sum(v["indeterminate"] for v in verdicts),
        "by_code": dict(sorted(Counter(c for v in verdicts for c in v["triggered_codes"]).items())),
    }
    manifest = _base_manifest("filter-repos", config, {metadata_path.name: file_sha256(metadata_path)})
    manifest.update(counts=counts, malformed_lines=malformed)
    write_manifest(out / "verdicts.manifest.json", manifest)

    rate = len(malformed) / total if total else 0.0
    exit_code = 1 if rate > config.malformed_threshold else 0
    summary = (
        f"{counts['included']} included, {counts['excluded']} excluded, "
        f"{counts['indeterminate']} indeterminate, {counts['malformed']} malformed of {total}"
    )
    return StageResult(exit_code, summary, {"verdicts": target}, manifest)


# --- extract -----------------------------------------------------------------


def _extract_file(source: SourceFile) -> tuple[list[FunctionRecord], dict[str, Any] | None]:
    try:
        return extract_functions(source), None
    except ExtractionError as exc:
        return [], {"path": source.path, "line": exc.lineno, "col": exc.col, "error": str(exc)}


def _corpus_digest(files: Iterable[SourceFile]) -> str:
    digest = hashlib.sha256()
    for f in files:
        digest.update(f.path.encode("utf-8") + b"\0" + f.text.encode("utf-8") + b"\0")
    return digest.hexdigest()


def run_extract(config: PipelineConfig) -> StageResult:
    if config.corpus_root is None:
        raise ValueError("no corpus root configured (use --corpus or [pipeline] corpus_root)")
    out = _prepare_output(config)
    stats = ScanStats()
    files = list(scan_corpus(config.corpus_root, stats))
    results = _ordered_map(_extract_file, files, config.workers)

    syntax_errors = [err for _, err in results if err is not None]
    extracted = [rec for recs, _ in results for rec in recs]
    filtered = [r for r in extracted if passes_function_filters(r)]
    kept = [r for r in filtered if r.raw_docstring and has_param_tokens(r.raw_docstring)]

    target = out / "functions.jsonl"
    write_jsonl(target, (r.to_dict() for r in kept))
    counts = {
        "files_scanned": stats.yielded,
        "files_skipped_decode": stats.skipped_decode,
        "files_skipped_unreadable": stats.skipped_unreadable,
        "notebooks_excluded": stats.skipped_notebooks,
        "files_syntax_error": len(syntax_errors),
        "functions_extracted": len(extracted),
        "functions_passing_filters": len(filtered),
        "functions_with_param_tokens": len(kept),
    }
    manifest = _base_manifest("extract", config, {"corpus": _corpus_digest(files)})
    manifest.update(counts=counts, syntax_errors=syntax_errors)
    write_manifest(out / "functions.manifest.json", manifest)
    if not kept:
        logger.warning("no functions survived extraction filters")
    summary = (
        f"{len(kept)} functions written ({len(extracted)} extracted, "
        f"{len(filtered)} passing filters, {len(syntax_errors)} files with syntax errors)"
    )
    return StageResult(0, summary, {"functions": target}, manifest)


def load_functions(path: Path) -> list[FunctionRecord]:
    return [FunctionRecord.from_dict(json.loads(line)) for _, line in iter_jsonl(path)]


# --- build-dataset -----------------------------------------------------------


def _rank_one(function: FunctionRecord) -> tuple[str, FormattedRecord | None, str | None]:
    parsed = parse_docstring(function.raw_docstring or "")
    rank = completeness_rank(parsed, extract_parameters(function))
    if rank.rank != RANK_ONE:
        return rank.rank, None, None
    try:
        return rank.rank, format_record(function, parsed), None
    except DatasetError as exc:
        return rank.rank, None, str(exc)


def run_build_dataset(functions_path: Path, config: PipelineConfig) -> StageResult:
    out = _prepare_output(config)
    functions = load_functions(functions_path)
    ranked = _ordered_map(_rank_one, functions, config.workers)

    histogram = {k: 0 for k in (RANK_ONE, RANK_TWO, RANK_THREE, RANK_INCONSISTENT)}
    for rank, _, _ in ranked:
        histogram[rank] += 1
    mismatches = [err for _, _, err in ranked if err]
    formatted = [rec for _, rec, _ in ranked if rec is not None]

    manifest = _base_manifest(
        "build-dataset", config, {functions_path.name: file_sha256(functions_path)}
    )
    manifest.update(
        corpus_hash=file_sha256(functions_path),
        train_fraction=config.train_fraction,
        rank_histogram=histogram,
        name_mismatches=mismatches,
    )
    if not formatted:
        write_manifest(out / "manifest.json", manifest)
        return StageResult(1, f"no rank-one functions; rank histogram {histogram}", {}, manifest)

    exploded: list[ExplodedRecord] = [e for rec in formatted for e in explode(rec)]
    outputs = {
        "formatted": out / "formatted.jsonl",
        "exploded": out / "exploded.jsonl",
        "pn_balanced": out / "pn_balanced.jsonl",
    }
    write_jsonl(outputs["formatted"], (r.to_dict() for r in formatted))
    write_jsonl(outputs["exploded"], (r.to_dict() for r in exploded))

    labels = Counter(r.none_label for r in exploded)
    try:
        balanced = balance(exploded, config.seed)
    except DatasetError as exc:
        logger.warning("PN dataset left empty: %s", exc)
        manifest["pn_warning"] = str(exc)
        balanced = []
    write_jsonl(outputs["pn_balanced"], (r.to_dict() for r in balanced))

    split_counts: dict[str, dict[str, int]] = {}
    for name, rows in (("formatted", formatted), ("exploded", exploded), ("pn", balanced)):
        if len(rows) < 2:
            continue
        parts = split(rows, config.train_fraction, config.seed)
        for side in ("train", "valid"):
            path = out / f"{name}_{side}.jsonl"
            write_jsonl(path, (r.to_dict() for r in parts[side]))
            outputs[f"{name}_{side}"] = path
        split_counts[name] = {side: len(parts[side]) for side in ("train", "valid")}

    manifest.update(
        counts={
            "functions": len(functions),
            "formatted": len(formatted),
            "exploded": len(exploded),
            "pn_balanced": len(balanced),
        },
        label_counts={"0": labels.get(0, 0), "1": labels.get(1, 0)},
        pn_balanced_label_counts={
            "0": sum(r.none_label == 0 for r in balanced),
            "1": sum(r.none_label == 1 for r in balanced),
        },
        splits=split_counts,
        outputs={k: file_sha256(v) for k, v in sorted(outputs.items())},
    )
    write_manifest(out / "manifest.json", manifest)
    summary = f"{len(formatted)} formatted, {len(exploded)} exploded, {len(balanced)} balanced PN; ranks {histogram}"
    return StageResult(0, summary, outputs, manifest)


# --- generate ----------------------------------------------------------------


def make_backends(config: PipelineConfig) -> Backends:
    sel = config.backends
    http = HttpBackend(sel.http) if sel.http is not None else None
    generation: Any = None
    if sel.generation == "echo":
        generation = EchoBackend()
    elif sel.generation == "constant":
        generation = ConstantBackend(output=sel.constant_output)
    elif sel.generation == "http":
        generation = http
    classification: Any = None
    if sel.classification == "constant":
        classification = ConstantBackend(label=sel.constant_label)
    elif sel.classification == "http":
        classification = http
    return Backends(
        generation=generation,
        classification=classification,
        types=http if sel.types == "http" else None,
    )


def _generate_one(
    function: FunctionRecord, backends: Backends, style: str
) -> dict[str, Any]:
    params = extract_parameters(function)
    row: dict[str, Any] = {"qualified_name": function.qualified_name, "file_path": function.file_path}
    if not params:
        return {**row, "status": "skipped", "reason": "E2"}
    try:
        bundles = [build_bundle(function, i, backends) for i in range(1, len(params) + 1)]
        composed = compose_function_docstring(bundles, style=style)
    except Exception as exc:  # isolate one function's failure from the batch
        logger.exception("generation failed for %s", function.qualified_name)
        return {**row, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}
    return {
        **row,
        "start_line": function.start_line,
        "text": composed.text,
        "provenance": [
            {"param": b.param_name, **dict(sorted(b.provenance.items()))} for b in bundles
        ],
        "status": "ok",
    }


def run_generate(
    functions_path: Path,
    config: PipelineConfig,
    backends: Backends | None = None,
    rewrite: str | None = None,
) -> StageResult:
    out = _prepare_output(config)
    functions = load_functions(functions_path)
    backends = backends if backends is not None else make_backends(config)
    results = _ordered_map(
        lambda f: _generate_one(f, backends, config.docstring_style), functions, config.workers
    )

    ok = [r for r in results if r["status"] == "ok"]
    skipped = [r for r in results if r["status"] == "skipped"]
    failed = [r for r in results if r["status"] == "failed"]
    target = out / "docstrings.jsonl"
    write_jsonl(
        target,
        (
            {
                "qualified_name": r["qualified_name"],
                "file_path": r["file_path"],
                "text": r["text"],
                "provenance": r["provenance"],
            }
            for r in ok
        ),
    )
    fallbacks = Counter(
        key for r in ok for p in r["provenance"] for key, v in p.items() if v == "baseline"
    )
    manifest = _base_manifest(
        "generate", config, {functions_path.name: file_sha256(functions_path)}
    )
    manifest.update(
        baseline_template_version=BASELINE_TEMPLATE_VERSION,
        counts={"functions": len(functions), "ok": len(ok), "skipped": len(skipped), "failed": len(failed)},
        baseline_directives=dict(sorted(fallbacks.items())),
        skipped=[{k: r[k] for k in ("qualified_name", "file_path", "reason")} for r in skipped],
        failed=[{k: r[k] for k in ("qualified_name", "file_path", "error")} for r in failed],
        docstrings_sha256=file_sha256(target),
    )
    outputs = {"docstrings": target}
    if rewrite:
        outputs.update(_rewrite_sources(ok, config, rewrite))
    write_manifest(out / "docstrings.manifest.json", manifest)

    attempted = len(ok) + len(failed)
    rate = len(failed) / attempted if attempted else 0.0
    exit_code = 1 if rate > config.failure_threshold else 0
    summary = f"{len(ok)} docstrings, {len(skipped)} skipped, {len(failed)} failed"
    return StageResult(exit_code, summary, outputs, manifest)


def _rewrite_sources(rows: list[dict[str, Any]], config: PipelineConfig, mode: str) -> dict[str, Path]:
    if config.corpus_root is None:
        raise ValueError("source rewriting needs the corpus root (--corpus)")
    root = Path(config.corpus_root)
    by_file: dict[str, dict[int, str]] = {}
    for row in rows:
        by_file.setdefault(row["file_path"], {})[row["start_line"]] = row["text"]
    written: dict[str, Path] = {}
    for rel, texts in sorted(by_file.items()):
        src = root / rel
        new_text = insert_docstrings(src.read_text(encoding="utf-8"), texts)
        if mode == "inplace":
            dest = src
        elif mode == "copy":
            dest = Path(config.output_dir) / "rewritten" / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
        else:
            raise ValueError(f"unknown rewrite mode {mode!r}")
        dest.write_text(new_text, encoding="utf-8")
        written[f"rewritten:{rel}"] = dest
    return written


# --- evaluate ----------------------------------------------------------------


class KeyMismatchError(ValueError):
    pass


def _keyed(path: Path, key: str) -> dict[str, dict[str, Any]]:
    rows: dict[str, dict[str, Any]] = {}
    for lineno, line in iter_jsonl(path):
        row = json.loads(line)
        if key not in row:
            raise ValueError(f"{path}:{lineno}: record has no {key!r} field")
        rows[str(row[key])] = row
    return rows


def evaluate_records(
    candidates: dict[str, dict[str, Any]], references: dict[str, dict[str, Any]]
) -> MetricReport:
    missing_c = sorted(set(references) - set(candidates))
    missing_r = sorted(set(candidates) - set(references))
    if missing_c or missing_r:
        raise KeyMismatchError(
            f"keys missing from candidates: {missing_c}; keys missing from references: {missing_r}"
        )
    keys = sorted(references)
    if not keys:
        raise ValueError("no records to evaluate")
    bleu = met = f1 = acc = kappa = None
    if all("text" in candidates[k] and "text" in references[k] for k in keys):
        cand_tokens = [tokenize(candidates[k]["text"]) for k in keys]
        ref_tokens = [tokenize(references[k]["text"]) for k in keys]
        bleu = bleu4(cand_tokens, ref_tokens)
        met = corpus_meteor(cand_tokens, ref_tokens)
    if all("label" in candidates[k] and "label" in references[k] for k in keys):
        preds = [int(candidates[k]["label"]) for k in keys]
        labels = [int(references[k]["label"]) for k in keys]
        f1 = micro_f1(preds, labels)
        acc = accuracy(preds, labels)
        try:
            kappa = cohens_kappa(preds, labels)
        except ValueError:
            kappa = None
    return MetricReport(bleu4=bleu, meteor=met, micro_f1=f1, accuracy=acc, kappa=kappa, n_samples=len(keys))


def run_evaluate(
    candidates_path: Path, references_path: Path, config: PipelineConfig, key: str = "id"
) -> StageResult:
    out = _prepare_output(config)
    report = evaluate_records(_keyed(candidates_path, key), _keyed(references_path, key))
    target = out / "report.json"
    write_manifest(target, report.to_dict())
    manifest = _base_manifest(
        "evaluate",
        config,
        {
            "candidates": file_sha256(candidates_path),
            "references": file_sha256(references_path),
        },
    )
    write_manifest(out / "report.manifest.json", manifest)
    return StageResult(0, json.dumps(report.to_dict(), sort_keys=True), {"report": target}, manifest)
