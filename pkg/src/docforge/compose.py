"""Render directive bundles into parameter docstring text."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .directives import DirectiveBundle

UNKNOWN_TYPE = "unknown"
NO_DEFAULT = "no default"

REST_STYLE = "rest"
GOOGLE_STYLE = "google"


@dataclass(frozen=True)
class ComposedDocstring:
    text: str
    per_param_blocks: tuple[str, ...]


def _one_line(text: str) -> str:
    return " ".join(text.split())


def render_param_fields(name: str, description: str, datatype: str | None) -> str:
    """The ``:param``/``:type`` prefix shared by training targets and output."""
    type_text = _one_line(datatype) if datatype else UNKNOWN_TYPE
    return f":param {name}: {_one_line(description)} :type {name}: {type_text}."


def _yes_no(value: bool | None) -> str:
    if value is None:
        return "unknown"
    return "yes" if value else "no"


def compose_param_block(bundle: DirectiveBundle) -> str:
    if not bundle.description.strip():
        raise ValueError(f"empty description for parameter {bundle.param_name!r}")
    default = _one_line(bundle.default_text) if bundle.default_text is not None else NO_DEFAULT
    return (
        f"{render_param_fields(bundle.param_name, bundle.description, bundle.datatype)}"
        f" Defaults to {default}. Can be None: {_yes_no(bundle.none_accepted)}."
    )


def compose_google_block(bundle: DirectiveBundle) -> str:
    if not bundle.description.strip():
        raise ValueError(f"empty description for parameter {bundle.param_name!r}")
    type_text = _one_line(bundle.datatype) if bundle.datatype else UNKNOWN_TYPE
    default = _one_line(bundle.default_text) if bundle.default_text is not None else NO_DEFAULT
    return (
        f"{bundle.param_name} ({type_text}): {_one_line(bundle.description)}"
        f" Defaults to {default}. Can be None: {_yes_no(bundle.none_accepted)}."
    )


def compose_function_docstring(
    bundles: Sequence[DirectiveBundle], style: str = REST_STYLE
) -> ComposedDocstring:
    """Join per-parameter blocks, one per line, in the given order."""
    if not bundles:
        raise ValueError("cannot compose a docstring from zero parameter bundles")
    if style == REST_STYLE:
        blocks = tuple(compose_param_block(b) for b in bundles)
        return ComposedDocstring(text="\n".join(blocks), per_param_blocks=blocks)
    if style == GOOGLE_STYLE:
        blocks = tuple(compose_google_block(b) for b in bundles)
        text = "Args:\n" + "\n".join("    " + b for b in blocks)
        return ComposedDocstring(text=text, per_param_blocks=blocks)
    raise ValueError(f"unknown docstring style {style!r}")
