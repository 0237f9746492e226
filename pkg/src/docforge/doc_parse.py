"""Docstring parsing for ReST, Google and NumPy conventions.

Parsing is total: anything that cannot be understood comes back with
``style="unknown"`` and no parameters, with the raw text kept for audit.
"""

from __future__ import annotations

import inspect
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from .py_extract import ParameterInfo

PARAM_TOKENS = (
    ":param",
    ":arguments",
    ":args",
    ":parameters",
    "param:",
    "arguments:",
    "args:",
    "parameters:",
)

REST = "rest"
GOOGLE = "google"
NUMPY = "numpy"
UNKNOWN = "unknown"

RANK_ONE = "one"
RANK_TWO = "two"
RANK_THREE = "three"
RANK_INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class ParamDocEntry:
    name: str
    type_text: str | None
    description: str

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ParamDocEntry":
        return cls(**data)


@dataclass(frozen=True)
class ParsedDocstring:
    short_description: str | None = None
    long_description: str | None = None
    params: tuple[ParamDocEntry, ...] = ()
    returns_text: str | None = None
    raises_texts: tuple[str, ...] = ()
    style: str = UNKNOWN
    raw: str = ""

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["params"] = [asdict(p) for p in self.params]
        data["raises_texts"] = list(self.raises_texts)
        return data


@dataclass(frozen=True)
class CompletenessRank:
    rank: str
    doc_param_count: int
    header_param_count: int


class _Unparseable(Exception):
    pass


def has_param_tokens(raw: str) -> bool:
    lowered = raw.lower()
    return any(token in lowered for token in PARAM_TOKENS)


def normalize_param_name(name: str) -> str:
    return name.strip().lstrip("*").strip()


# --- ReST field lists --------------------------------------------------------

# Tags that introduce a parameter entry. Restricted to spellings that the
# token filter recognises, so a docstring without tokens never yields params.
_REST_PARAM_TAGS = {"param", "params", "parameter", "parameters", "args", "arguments"}
_REST_TYPE_TAGS = {"type"}
_REST_RETURN_TAGS = {"return", "returns"}
_REST_RAISE_TAGS = {"raise", "raises", "except", "exception"}

# ":tag:" or ":tag args:" where the closing colon is followed by whitespace/end
# (so inline roles like :class:`Foo` are not mistaken for fields).
_REST_FIELD = re.compile(r"(?<!\S):([A-Za-z]+)((?:[ \t]+[^:\n]*?)?)[ \t]*:(?=\s|$)")


def _join(parts: Sequence[str]) -> str:
    return " ".join(" ".join(parts).split())


def _split_description(lines: list[str]) -> tuple[str | None, str | None]:
    text = "\n".join(lines).strip()
    if not text:
        return None, None
    paragraphs = re.split(r"\n\s*\n", text)
    short = _join(paragraphs[0].splitlines()) or None
    rest = [p.strip() for p in paragraphs[1:] if p.strip()]
    long = "\n\n".join(rest) if rest else None
    return short, long


def _parse_rest(text: str) -> ParsedDocstring | None:
    fields = list(_REST_FIELD.finditer(text))
    if not fields:
        return None
    short, long = _split_description(text[: fields[0].start()].splitlines())

    entries: dict[str, dict[str, Any]] = {}
    order: list[str] = []
    types: dict[str, str] = {}
    returns: list[str] = []
    raises: list[str] = []
    for i, match in enumerate(fields):
        tag = match.group(1).lower()
        args = match.group(2).split()
        end = fields[i + 1].start() if i + 1 < len(fields) else len(text)
        body = _join(text[match.end() : end].splitlines())
        if tag in _REST_PARAM_TAGS:
            if not args:
                raise _Unparseable(f":{tag}: without a parameter name")
            name = normalize_param_name(args[-1])
            inline_type = " ".join(args[:-1]) or None
            if name not in entries:
                order.append(name)
                entries[name] = {"type": inline_type, "description": body}
            else:
                entries[name]["description"] = body
                entries[name]["type"] = entries[name]["type"] or inline_type
        elif tag in _REST_TYPE_TAGS and args:
            types[normalize_param_name(args[-1])] = body
        elif tag in _REST_RETURN_TAGS:
            returns.append(body)
        elif tag in _REST_RAISE_TAGS:
            raises.append(f"{' '.join(args)}: {body}" if args else body)

    params = tuple(
        ParamDocEntry(
            name=name,
            type_text=entries[name]["type"] or types.get(name) or None,
            description=entries[name]["description"],
        )
        for name in order
    )
    return ParsedDocstring(
        short_description=short,
        long_description=long,
        params=params,
        returns_text=" ".join(returns) or None,
        raises_texts=tuple(raises),
        style=REST,
    )


# --- Google sections ---------------------------------------------------------

_GOOGLE_PARAM_HEADERS = {
    "args",
    "arguments",
    "parameters",
    "keyword args",
    "keyword arguments",
    "kwargs",
    "other parameters",
}
_GOOGLE_RETURN_HEADERS = {"returns", "return", "yields", "yield"}
_GOOGLE_RAISE_HEADERS = {"raises", "raise", "exceptions", "except"}
_GOOGLE_OTHER_HEADERS = {
    "attributes",
    "example",
    "examples",
    "note",
    "notes",
    "references",
    "see also",
    "todo",
    "warning",
    "warnings",
    "methods",
}
_GOOGLE_HEADERS = (
    _GOOGLE_PARAM_HEADERS | _GOOGLE_RETURN_HEADERS | _GOOGLE_RAISE_HEADERS | _GOOGLE_OTHER_HEADERS
)
_GOOGLE_HEADER = re.compile(r"^\s*([A-Za-z](?:[A-Za-z ]*[A-Za-z])?):\s*$")
_GOOGLE_ITEM = re.compile(r"^(\*{0,2}[A-Za-z_]\w*)\s*(?:\((.*?)\))?\s*:(?:\s+(.*)|$)")


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


def _google_header(line: str) -> str | None:
    match = _GOOGLE_HEADER.match(line)
    if match and match.group(1).lower() in _GOOGLE_HEADERS:
        return match.group(1).lower()
    return None


def _section_blocks(lines: list[str], start: int, header_indent: int) -> tuple[list[str], int]:
    body: list[str] = []
    i = start
    while i < len(lines):
        line = lines[i]
        if line.strip() and _indent(line) <= header_indent:
            break
        body.append(line)
        i += 1
    while body and not body[-1].strip():
        body.pop()
    return body, i


def _google_items(body: list[str]) -> list[ParamDocEntry]:
    nonblank = [line for line in body if line.strip()]
    if not nonblank:
        return []
    item_indent = min(_indent(line) for line in nonblank)
    items: list[list[Any]] = []
    for line in body:
        if not line.strip():
            continue
        stripped = line.strip()
        match = _GOOGLE_ITEM.match(stripped) if _indent(line) == item_indent else None
        if match:
            desc = [match.group(3)] if match.group(3) else []
            items.append([match.group(1), match.group(2), desc])
        elif items:
            items[-1][2].append(stripped)
        else:
            raise _Unparseable(f"unrecognised parameter line {stripped!r}")
    return [
        ParamDocEntry(
            name=normalize_param_name(name),
            type_text=type_text.strip() if type_text and type_text.strip() else None,
            description=_join(desc),
        )
        for name, type_text, desc in items
    ]


def _parse_google(text: str) -> ParsedDocstring | None:
    lines = text.splitlines()
    first = next((i for i, line in enumerate(lines) if _google_header(line)), None)
    if first is None:
        return None
    short, long = _split_description(lines[:first])
    params: list[ParamDocEntry] = []
    returns: list[str] = []
    raises: list[str] = []
    i = first
    while i < len(lines):
        header = _google_header(lines[i])
        if header is None:
            i += 1
            continue
        body, i = _section_blocks(lines, i + 1, _indent(lines[i]))
        if header in _GOOGLE_PARAM_HEADERS:
            params.extend(_google_items(body))
        elif header in _GOOGLE_RETURN_HEADERS:
            returns.append(_join(body))
        elif header in _GOOGLE_RAISE_HEADERS:
            raises.extend(_join([line]) for line in body if line.strip())
    return ParsedDocstring(
        short_description=short,
        long_description=long,
        params=tuple(params),
        returns_text=" ".join(r for r in returns if r) or None,
        raises_texts=tuple(raises),
        style=GOOGLE,
    )


# --- NumPy sections ----------------------------------------------------------

_NUMPY_PARAM_HEADERS = {"parameters", "other parameters", "keyword arguments", "params"}
_NUMPY_RETURN_HEADERS = {"returns", "yields"}
_NUMPY_RAISE_HEADERS = {"raises", "warns"}
_NUMPY_UNDERLINE = re.compile(r"^\s*-{3,}\s*$")
_NUMPY_ITEM = re.compile(r"^(\*{0,2}[A-Za-z_][\w, *]*?)\s*(?::\s*(.*))?$")


def _numpy_headers(lines: list[str]) -> list[int]:
    return [
        i
        for i in range(len(lines) - 1)
        if lines[i].strip() and _NUMPY_UNDERLINE.match(lines[i + 1])
    ]


def _numpy_items(body: list[str]) -> list[tuple[str, str | None, str]]:
    nonblank = [line for line in body if line.strip()]
    if not nonblank:
        return []
    item_indent = min(_indent(line) for line in nonblank)
    items: list[list[Any]] = []
    for line in nonblank:
        if _indent(line) == item_indent:
            match = _NUMPY_ITEM.match(line.strip())
            if not match:
                raise _Unparseable(f"unrecognised parameter line {line.strip()!r}")
            items.append([match.group(1), match.group(2), []])
        else:
            items[-1][2].append(line.strip())
    return [(name, type_text, _join(desc)) for name, type_text, desc in items]


def _parse_numpy(text: str) -> ParsedDocstring | None:
    lines = text.splitlines()
    headers = _numpy_headers(lines)
    if not headers:
        return None
    short, long = _split_description(lines[: headers[0]])
    params: list[ParamDocEntry] = []
    returns: list[str] = []
    raises: list[str] = []
    for n, h in enumerate(headers):
        end = headers[n + 1] if n + 1 < len(headers) else len(lines)
        body = lines[h + 2 : end]
        name = lines[h].strip().lower()
        if name in _NUMPY_PARAM_HEADERS:
            for names, type_text, desc in _numpy_items(body):
                type_text = type_text.strip() if type_text and type_text.strip() else None
                for single in names.split(","):
                    if single.strip():
                        params.append(ParamDocEntry(normalize_param_name(single), type_text, desc))
        elif name in _NUMPY_RETURN_HEADERS:
            returns.append(_join(body))
        elif name in _NUMPY_RAISE_HEADERS:
            raises.extend(
                _join([n_, d]) if d else n_ for n_, _, d in _numpy_items(body)
            )
    return ParsedDocstring(
        short_description=short,
        long_description=long,
        params=tuple(params),
        returns_text=" ".join(r for r in returns if r) or None,
        raises_texts=tuple(raises),
        style=NUMPY,
    )


def _clean_indent(raw: str) -> str:
    text = inspect.cleandoc(raw)
    lines = text.splitlines()
    # cleandoc measures the margin without the first line, so a docstring that
    # opens with a section header gets its items flattened to the header's
    # column. Push them back under the header.
    if len(lines) > 1 and _google_header(lines[0]):
        following = next((line for line in lines[1:] if line.strip()), "")
        if following and _indent(following) == 0:
            lines = [lines[0]] + ["    " + line if line.strip() else line for line in lines[1:]]
            return "\n".join(lines)
    return text


def parse_docstring(raw: str) -> ParsedDocstring:
    """Detect the docstring convention and split it into structured parts."""
    if not isinstance(raw, str) or not raw.strip():
        return ParsedDocstring(raw=raw if isinstance(raw, str) else "")
    text = _clean_indent(raw)
    try:
        for parser in (_parse_numpy, _parse_google, _parse_rest):
            parsed = parser(text)
            if parsed is not None:
                return ParsedDocstring(
                    short_description=parsed.short_description,
                    long_description=parsed.long_description,
                    params=parsed.params,
                    returns_text=parsed.returns_text,
                    raises_texts=parsed.raises_texts,
                    style=parsed.style,
                    raw=raw,
                )
    except _Unparseable:
        return ParsedDocstring(raw=raw)
    short, long = _split_description(text.splitlines())
    return ParsedDocstring(short_description=short, long_description=long, raw=raw)


def documented_names(parsed: ParsedDocstring) -> list[str]:
    """Distinct documented parameter names, in docstring order."""
    seen: dict[str, None] = {}
    for entry in parsed.params:
        seen.setdefault(normalize_param_name(entry.name), None)
    return list(seen)


def completeness_rank(parsed: ParsedDocstring, header_params: Sequence[ParameterInfo]) -> CompletenessRank:
    """Compare documented parameter count against the header's.

    ``header_params`` should already have ``self``/``cls`` removed.
    """
    doc_count = len(documented_names(parsed))
    header_count = len(header_params)
    if doc_count > header_count:
        rank = RANK_INCONSISTENT
    elif doc_count == 0:
        # header_count == 0 here means a parameterless function; the filters
        # upstream drop these, so bin them with the undocumented case.
        rank = RANK_THREE
    elif doc_count == header_count:
        rank = RANK_ONE
    else:
        rank = RANK_TWO
    return CompletenessRank(rank=rank, doc_param_count=doc_count, header_param_count=header_count)
