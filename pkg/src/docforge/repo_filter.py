"""Repository inclusion/exclusion criteria and local corpus walking."""

from __future__ import annotations

import datetime as dt
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

logger = logging.getLogger(__name__)

SCIENCE_TOPICS = frozenset(
    {"data-science", "machine-learning", "deep-learning", "statistics", "science"}
)

# Apache 2.0, Creative Commons family, BSD Zero-Clause, GNU GPL family, MIT.
DEFAULT_LICENSES = frozenset(
    {
        "Apache-2.0",
        "CC0-1.0",
        "CC-BY-3.0",
        "CC-BY-4.0",
        "CC-BY-SA-3.0",
        "CC-BY-SA-4.0",
        "CC-BY-NC-4.0",
        "CC-BY-NC-SA-4.0",
        "CC-BY-ND-4.0",
        "CC-BY-NC-ND-4.0",
        "0BSD",
        "GPL-2.0",
        "GPL-2.0-only",
        "GPL-2.0-or-later",
        "GPL-3.0",
        "GPL-3.0-only",
        "GPL-3.0-or-later",
        "LGPL-2.1",
        "LGPL-2.1-only",
        "LGPL-2.1-or-later",
        "LGPL-3.0",
        "LGPL-3.0-only",
        "LGPL-3.0-or-later",
        "AGPL-3.0",
        "AGPL-3.0-only",
        "AGPL-3.0-or-later",
        "MIT",
    }
)

REQUIRED_FIELDS = (
    "repo_id",
    "language_fractions",
    "license_id",
    "topics",
    "last_commit",
    "is_fork",
)

# Report order for triggered codes.
CODE_ORDER = ("I1", "I2", "I3", "I4", "E1", "E5")


class MetadataError(ValueError):
    """A metadata record is present but malformed (bad type, bad date, ...)."""


@dataclass(frozen=True)
class RepoMetadata:
    repo_id: str
    language_fractions: Mapping[str, float]
    license_id: str
    topics: frozenset[str]
    last_commit: dt.date
    is_fork: bool
    primary_natural_language: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "repo_id": self.repo_id,
            "language_fractions": dict(self.language_fractions),
            "license_id": self.license_id,
            "topics": sorted(self.topics),
            "last_commit": self.last_commit.isoformat(),
            "is_fork": self.is_fork,
            "primary_natural_language": self.primary_natural_language,
        }


@dataclass(frozen=True)
class IecConfig:
    licenses: frozenset[str] = DEFAULT_LICENSES
    topics: frozenset[str] = SCIENCE_TOPICS
    activity_cutoff: dt.date = dt.date(2023, 2, 1)
    python_fraction: float = 0.75

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "IecConfig":
        kwargs: dict[str, Any] = {}
        if "licenses" in data:
            kwargs["licenses"] = frozenset(data["licenses"])
        if "topics" in data:
            kwargs["topics"] = frozenset(t.lower() for t in data["topics"])
        if "activity_cutoff" in data:
            kwargs["activity_cutoff"] = _parse_date(data["activity_cutoff"])
        if "python_fraction" in data:
            kwargs["python_fraction"] = float(data["python_fraction"])
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "licenses": sorted(self.licenses),
            "topics": sorted(self.topics),
            "activity_cutoff": self.activity_cutoff.isoformat(),
            "python_fraction": self.python_fraction,
        }


@dataclass(frozen=True)
class IecVerdict:
    included: bool
    triggered_codes: list[str]
    repo_id: str | None = None
    indeterminate: bool = False
    missing_fields: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "repo_id": self.repo_id,
            "included": self.included,
            "triggered_codes": list(self.triggered_codes),
            "indeterminate": self.indeterminate,
            "missing_fields": list(self.missing_fields),
            "notes": list(self.notes),
        }


def _parse_date(value: Any) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if not isinstance(value, str):
        raise MetadataError(f"expected ISO date string, got {type(value).__name__}")
    try:
        # Accept both plain dates and full timestamps ("2023-03-01T10:00:00Z").
        return dt.date.fromisoformat(value[:10])
    except ValueError as exc:
        raise MetadataError(f"invalid date {value!r}") from exc


def metadata_from_dict(data: Mapping[str, Any]) -> RepoMetadata | list[str]:
    """Build a RepoMetadata from a decoded JSON object.

    Returns the list of missing required field names instead of a record when
    any are absent; raises MetadataError for fields of the wrong shape.
    """
    if not isinstance(data, Mapping):
        raise MetadataError("metadata line is not a JSON object")
    missing = [name for name in REQUIRED_FIELDS if data.get(name) is None]
    if missing:
        return missing

    fractions = data["language_fractions"]
    if not isinstance(fractions, Mapping):
        raise MetadataError("language_fractions must be an object")
    clean_fractions: dict[str, float] = {}
    for lang, frac in fractions.items():
        if isinstance(frac, bool) or not isinstance(frac, (int, float)):
            raise MetadataError(f"fraction for {lang!r} is not a number")
        if not 0.0 <= frac <= 1.0:
            raise MetadataError(f"fraction for {lang!r} outside [0, 1]")
        clean_fractions[str(lang)] = float(frac)
    if sum(clean_fractions.values()) > 1.0 + 1e-9:
        raise MetadataError("language fractions sum to more than 1")

    topics = data["topics"]
    if isinstance(topics, str) or not isinstance(topics, (list, tuple, set, frozenset)):
        raise MetadataError("topics must be a list of strings")
    if not isinstance(data["is_fork"], bool):
        raise MetadataError("is_fork must be a boolean")
    language = data.get("primary_natural_language")
    if language is not None and not isinstance(language, str):
        raise MetadataError("primary_natural_language must be a string")

    return RepoMetadata(
        repo_id=str(data["repo_id"]),
        language_fractions=clean_fractions,
        license_id=str(data["license_id"]),
        topics=frozenset(str(t).lower() for t in topics),
        last_commit=_parse_date(data["last_commit"]),
        is_fork=data["is_fork"],
        primary_natural_language=language,
    )


def _python_fraction(fractions: Mapping[str, float]) -> float:
    return sum(v for k, v in fractions.items() if k.lower() == "python")


def _is_english(language: str) -> bool:
    lang = language.strip().lower()
    return lang in {"en", "english"} or lang.startswith("en-") or lang.startswith("en_")


def apply_iec(meta: RepoMetadata, config: IecConfig = IecConfig()) -> IecVerdict:
    """Evaluate every criterion and report all that fail."""
    failed: list[str] = []
    notes: list[str] = []

    if meta.primary_natural_language is None:
        notes.append("I1 unchecked: primary_natural_language absent")
    elif not _is_english(meta.primary_natural_language):
        failed.append("I1")
    if _python_fraction(meta.language_fractions) < config.python_fraction:
        failed.append("I2")
    if meta.license_id not in config.licenses:
        failed.append("I3")
    if not (meta.topics & config.topics):
        failed.append("I4")
    # Inactive repositories are excluded: no commit on or after the cutoff.
    if meta.last_commit < config.activity_cutoff:
        failed.append("E1")
    if meta.is_fork:
        failed.append("E5")

    return IecVerdict(
        included=not failed,
        triggered_codes=failed,
        repo_id=meta.repo_id,
        notes=notes,
    )


def indeterminate_verdict(repo_id: str | None, missing: list[str]) -> IecVerdict:
    return IecVerdict(
        included=False,
        triggered_codes=[],
        repo_id=repo_id,
        indeterminate=True,
        missing_fields=list(missing),
        notes=[f"indeterminate: missing field {name}" for name in missing],
    )


def evaluate_metadata(data: Mapping[str, Any], config: IecConfig = IecConfig()) -> IecVerdict:
    """Decode one metadata object and apply the criteria.

    Missing fields give an indeterminate (excluded) verdict; malformed values
    raise MetadataError.
    """
    meta = metadata_from_dict(data)
    if isinstance(meta, list):
        repo_id = data.get("repo_id") if isinstance(data, Mapping) else None
        return indeterminate_verdict(None if repo_id is None else str(repo_id), meta)
    return apply_iec(meta, config)


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str


@dataclass
class ScanStats:
    yielded: int = 0
    skipped_decode: int = 0
    skipped_unreadable: int = 0
    skipped_notebooks: int = 0

    @property
    def skipped(self) -> int:
        return self.skipped_decode + self.skipped_unreadable


def scan_corpus(root: str | os.PathLike[str], stats: ScanStats | None = None) -> Iterator[SourceFile]:
    """Yield every ``.py`` file below ``root`` in lexicographic path order.

    Paths are reported relative to ``root`` with forward slashes. Notebooks are
    never yielded; undecodable or unreadable files are skipped and counted in
    ``stats``.
    """
    base = Path(root)
    if not base.is_dir():
        raise FileNotFoundError(f"corpus root {str(base)!r} is not a readable directory")
    if not os.access(base, os.R_OK | os.X_OK):
        raise PermissionError(f"corpus root {str(base)!r} is not readable")
    stats = stats if stats is not None else ScanStats()

    candidates: list[tuple[str, Path]] = []
    for dirpath, dirnames, filenames in os.walk(base):
        dirnames.sort()
        for name in filenames:
            full = Path(dirpath) / name
            rel = full.relative_to(base).as_posix()
            if name.endswith(".ipynb"):
                stats.skipped_notebooks += 1
            elif name.endswith(".py"):
                candidates.append((rel, full))

    for rel, full in sorted(candidates):
        try:
            data = full.read_bytes()
        except OSError as exc:
            logger.warning("skipping unreadable file %s: %s", rel, exc)
            stats.skipped_unreadable += 1
            continue
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            logger.warning("skipping undecodable file %s", rel)
            stats.skipped_decode += 1
            continue
        stats.yielded += 1
        yield SourceFile(path=rel, text=text)
