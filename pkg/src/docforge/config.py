"""Pipeline configuration: INI file, then DOCFORGE_* environment, then CLI flags."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .model_backend import BackendConfig
from .repo_filter import IecConfig

ENV_PREFIX = "DOCFORGE_"

GENERATION_KINDS = ("baseline", "echo", "constant", "http")
CLASSIFICATION_KINDS = ("baseline", "constant", "http")
TYPE_KINDS = ("none", "http")


@dataclass(frozen=True)
class BackendSelection:
    generation: str = "baseline"
    classification: str = "baseline"
    types: str = "none"
    constant_output: str = "A parameter."
    constant_label: int = 0
    http: BackendConfig | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "generation": self.generation,
            "classification": self.classification,
            "types": self.types,
        }
        if self.http is not None:
            # The token stays out of manifests.
            data["http"] = {
                "base_url": self.http.base_url,
                "timeout_ms": self.http.timeout_ms,
                "max_retries": self.http.max_retries,
                "max_inflight": self.http.max_inflight,
            }
        return data


@dataclass(frozen=True)
class PipelineConfig:
    corpus_root: Path | None = None
    iec: IecConfig = field(default_factory=IecConfig)
    seed: int = 13
    train_fraction: float = 0.8
    backends: BackendSelection = field(default_factory=BackendSelection)
    output_dir: Path = Path("out")
    workers: int = 1
    malformed_threshold: float = 0.01
    failure_threshold: float = 0.10
    docstring_style: str = "rest"

    def digest_view(self) -> dict[str, Any]:
        """Settings that influence outputs (paths excluded so reruns elsewhere match)."""
        return {
            "iec": self.iec.to_dict(),
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "backends": self.backends.to_dict(),
            "docstring_style": self.docstring_style,
        }


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.replace("\n", ",").split(",") if item.strip()]


def _env(environ: Mapping[str, str], key: str) -> str | None:
    value = environ.get(ENV_PREFIX + key.upper())
    return value if value else None


def load_config(
    path: str | os.PathLike[str] | None = None, environ: Mapping[str, str] | None = None
) -> PipelineConfig:
    environ = os.environ if environ is None else environ
    parser = configparser.ConfigParser(inline_comment_prefixes=(";",))
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file {path} not found")
        parser.read(path, encoding="utf-8")

    pipe: dict[str, str] = dict(parser["pipeline"]) if parser.has_section("pipeline") else {}
    for key in ("corpus_root", "seed", "train_fraction", "output_dir", "workers", "docstring_style"):
        if _env(environ, key):
            pipe[key] = _env(environ, key)  # type: ignore[assignment]

    kwargs: dict[str, Any] = {}
    if pipe.get("corpus_root"):
        kwargs["corpus_root"] = Path(pipe["corpus_root"])
    if pipe.get("output_dir"):
        kwargs["output_dir"] = Path(pipe["output_dir"])
    for key, conv in (
        ("seed", int),
        ("workers", int),
        ("train_fraction", float),
        ("malformed_threshold", float),
        ("failure_threshold", float),
    ):
        if pipe.get(key):
            kwargs[key] = conv(pipe[key])
    if pipe.get("docstring_style"):
        kwargs["docstring_style"] = pipe["docstring_style"]

    if parser.has_section("iec"):
        section = parser["iec"]
        iec: dict[str, Any] = {}
        for key in ("licenses", "topics"):
            if key in section:
                iec[key] = _split_list(section[key])
        for key in ("activity_cutoff", "python_fraction"):
            if key in section:
                iec[key] = section[key]
        kwargs["iec"] = IecConfig.from_mapping(iec)

    kwargs["backends"] = _load_backends(
        dict(parser["backends"]) if parser.has_section("backends") else {}, environ
    )
    return PipelineConfig(**kwargs)


def _load_backends(section: dict[str, str], environ: Mapping[str, str]) -> BackendSelection:
    generation = section.get("generation", "baseline")
    classification = section.get("classification", "baseline")
    types = section.get("types", "none")
    if generation not in GENERATION_KINDS:
        raise ValueError(f"backends.generation must be one of {GENERATION_KINDS}")
    if classification not in CLASSIFICATION_KINDS:
        raise ValueError(f"backends.classification must be one of {CLASSIFICATION_KINDS}")
    if types not in TYPE_KINDS:
        raise ValueError(f"backends.types must be one of {TYPE_KINDS}")

    http = None
    if "http" in (generation, classification, types):
        values: dict[str, Any] = {}
        if "base_url" in section:
            values["base_url"] = section["base_url"]
        if "auth_token" in section:
            values["auth_token"] = section["auth_token"]
        for key in ("timeout_ms", "max_retries", "max_inflight", "backoff_base_ms"):
            if key in section:
                values[key] = int(section[key])
        http = BackendConfig.from_mapping(values, environ)
    return BackendSelection(
        generation=generation,
        classification=classification,
        types=types,
        constant_output=section.get("constant_output", "A parameter."),
        constant_label=int(section.get("constant_label", 0)),
        http=http,
    )


def with_overrides(config: PipelineConfig, **overrides: Any) -> PipelineConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
