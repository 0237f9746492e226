"""Formatted / Exploded dataset construction, PN labels, balancing and splits."""

from __future__ import annotations

import math
import random
import re
from dataclasses import asdict, dataclass
from typing import Any, Callable, Hashable, Iterable, Sequence, TypeVar

from .compose import render_param_fields
from .doc_parse import (
    RANK_ONE,
    ParamDocEntry,
    ParsedDocstring,
    completeness_rank,
    normalize_param_name,
)
from .py_extract import FunctionRecord, extract_parameters

T = TypeVar("T")

DEFAULT_ABBREVIATIONS = frozenset({"e.g.", "i.e.", "etc.", "cf.", "vs.", "fig.", "eq."})

_URL = re.compile(r"\b[A-Za-z][A-Za-z0-9+.\-]*://\S+")
_EMAIL = re.compile(r"[\w.+\-]+@[\w\-]+(?:\.[\w\-]+)+")
_EMPTY_ANGLE = re.compile(r"<\s*>")
_EXAMPLES_HEADER = re.compile(r"^\s*Examples?\s*:?\s*$", re.IGNORECASE)
_SECTION_HEADER = re.compile(
    r"^\s*(Args|Arguments|Parameters|Returns?|Yields?|Raises|Notes?|Attributes|"
    r"See Also|References|Warnings?|Other Parameters|Keyword Arguments)\s*:?\s*$",
    re.IGNORECASE,
)
_UNDERLINE = re.compile(r"^\s*[-=]{3,}\s*$")
_NONE_TOKEN = re.compile(r"\bNone\b")
_PERIOD = re.compile(r"\.(?=\s|$)")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class FormattedRecord:
    function: FunctionRecord
    cleaned_params: tuple[ParamDocEntry, ...]
    target_text: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "function": self.function.to_dict(),
            "cleaned_params": [asdict(p) for p in self.cleaned_params],
            "target_text": self.target_text,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FormattedRecord":
        return cls(
            function=FunctionRecord.from_dict(data["function"]),
            cleaned_params=tuple(ParamDocEntry.from_dict(p) for p in data["cleaned_params"]),
            target_text=data["target_text"],
        )


@dataclass(frozen=True)
class ExplodedRecord:
    input_text: str
    param_index: int
    param_name: str
    target_description: str
    none_label: int
    full_description: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExplodedRecord":
        return cls(**data)

    @property
    def source_text(self) -> str:
        return self.input_text[len(prompt_prefix(self.param_index)) :]


def prompt_prefix(param_index: int) -> str:
    return f"parameter {param_index}: "


def _strip_examples(lines: list[str]) -> list[str]:
    kept: list[str] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.lstrip().startswith(">>>"):
            # A doctest block runs until the next blank line.
            while i < len(lines) and lines[i].strip():
                i += 1
            continue
        if _EXAMPLES_HEADER.match(line):
            i += 1
            while i < len(lines):
                nxt = lines[i]
                underlined = i + 1 < len(lines) and _UNDERLINE.match(lines[i + 1])
                if _SECTION_HEADER.match(nxt) and (underlined or nxt.rstrip().endswith(":")):
                    break
                i += 1
            continue
        kept.append(line)
        i += 1
    return kept


def _clean_once(text: str) -> str:
    text = "\n".join(_strip_examples(text.splitlines()))
    text = _URL.sub(" ", text)
    text = _EMAIL.sub(" ", text)
    text = _EMPTY_ANGLE.sub(" ", text)
    return " ".join(text.split())


def clean_docstring(raw: str) -> str:
    """Flatten to one line; drop links, e-mail addresses and example blocks."""
    text = raw
    # Removing one construct can expose another (a link before ">>>" leaves a
    # line that now starts with ">>>"), so iterate to a fixpoint.
    for _ in range(10):
        cleaned = _clean_once(text)
        if cleaned == text:
            break
        text = cleaned
    return text


def first_sentence(text: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS) -> str:
    """Text up to and including the first sentence-ending period."""
    guarded = {a.lower() for a in abbreviations}
    text = text.strip()
    for match in _PERIOD.finditer(text):
        end = match.end()
        start = max(text.rfind(" ", 0, end), text.rfind("\t", 0, end), text.rfind("\n", 0, end)) + 1
        token = text[start:end].lstrip("([{\"'").lower()
        if token in guarded:
            continue
        return text[:end]
    return text


def label_none_acceptance(full_description: str) -> int:
    return 1 if _NONE_TOKEN.search(full_description) else 0


def _paired_entries(function: FunctionRecord, parsed: ParsedDocstring) -> list[ParamDocEntry]:
    by_name: dict[str, ParamDocEntry] = {}
    for entry in parsed.params:
        by_name.setdefault(normalize_param_name(entry.name), entry)
    paired = []
    for param in extract_parameters(function):
        entry = by_name.get(param.name)
        if entry is None:
            raise DatasetError(
                f"{function.qualified_name}: docstring does not document header parameter {param.name!r}"
            )
        paired.append(
            ParamDocEntry(
                name=param.name,
                type_text=clean_docstring(entry.type_text) or None if entry.type_text else None,
                description=clean_docstring(entry.description),
            )
        )
    return paired


def format_record(function: FunctionRecord, parsed: ParsedDocstring) -> FormattedRecord:
    rank = completeness_rank(parsed, extract_parameters(function))
    if rank.rank != RANK_ONE:
        raise DatasetError(f"{function.qualified_name}: rank {rank.rank}, only rank one is accepted")
    cleaned = tuple(_paired_entries(function, parsed))
    target = "\n".join(render_param_fields(p.name, p.description, p.type_text) for p in cleaned)
    return FormattedRecord(function=function, cleaned_params=cleaned, target_text=target)


def build_formatted(items: Iterable[tuple[FunctionRecord, ParsedDocstring]]) -> list[FormattedRecord]:
    return [format_record(function, parsed) for function, parsed in items]


def explode(record: FormattedRecord) -> list[ExplodedRecord]:
    out = []
    for index, entry in enumerate(record.cleaned_params, start=1):
        out.append(
            ExplodedRecord(
                input_text=prompt_prefix(index) + record.function.source_text,
                param_index=index,
                param_name=entry.name,
                target_description=first_sentence(entry.description),
                none_label=label_none_acceptance(entry.description),
                full_description=entry.description,
            )
        )
    return out


def balance(records: Sequence[ExplodedRecord], seed: int) -> list[ExplodedRecord]:
    """Down-sample the majority label and shuffle, both driven by ``seed``."""
    positives = [i for i, r in enumerate(records) if r.none_label == 1]
    negatives = [i for i, r in enumerate(records) if r.none_label == 0]
    if not positives:
        raise DatasetError("cannot balance: no records with label 1")
    if not negatives:
        raise DatasetError("cannot balance: no records with label 0")
    rng = random.Random(seed)
    # Selection depends only on majority/minority roles, never on which label
    # is which, so relabelling commutes with balancing.
    minority, majority = sorted((positives, negatives), key=len)
    if len(majority) > len(minority):
        majority = [majority[j] for j in sorted(rng.sample(range(len(majority)), len(minority)))]
    keep = sorted(minority + majority)
    out = [records[i] for i in keep]
    rng.shuffle(out)
    return out


def split(
    records: Sequence[T],
    train_fraction: float,
    seed: int,
    key: Callable[[T], Hashable] | None = None,
) -> dict[str, list[T]]:
    """Seeded group-aware split; records sharing a key land on the same side.

    ``train_fraction`` is the share of groups (functions) placed in train.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(records) < 2:
        raise DatasetError("need at least two records to split")
    key = key or _default_group_key
    groups: dict[Hashable, list[T]] = {}
    for record in records:
        groups.setdefault(key(record), []).append(record)
    order = list(groups)
    rng = random.Random(seed)
    rng.shuffle(order)
    n_train = math.floor(train_fraction * len(order) + 0.5)
    if len(order) >= 2:
        n_train = min(max(n_train, 1), len(order) - 1)
    train = [r for k in order[:n_train] for r in groups[k]]
    valid = [r for k in order[n_train:] for r in groups[k]]
    return {"train": train, "valid": valid}


def _default_group_key(record: Any) -> Hashable:
    if isinstance(record, ExplodedRecord):
        return record.source_text
    if isinstance(record, FormattedRecord):
        return record.function.source_text
    if isinstance(record, FunctionRecord):
        return record.source_text
    return record
