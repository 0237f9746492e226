"""Static extraction of functions, parameters and defaults from Python source.

Nothing here executes user code; default expressions are kept as verbatim
source text.
"""

from __future__ import annotations

import ast
import textwrap
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator

from .repo_filter import SourceFile

POSITIONAL_ONLY = "positional_only"
POSITIONAL_OR_KEYWORD = "positional_or_keyword"
VAR_POSITIONAL = "var_positional"
KEYWORD_ONLY = "keyword_only"
VAR_KEYWORD = "var_keyword"

PARAM_KINDS = (POSITIONAL_ONLY, POSITIONAL_OR_KEYWORD, VAR_POSITIONAL, KEYWORD_ONLY, VAR_KEYWORD)

_FUNCTION_NODES = (ast.FunctionDef, ast.AsyncFunctionDef)
_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)


class ExtractionError(ValueError):
    """A source file could not be parsed; no records are produced for it."""

    def __init__(self, path: str, message: str, lineno: int | None, col: int | None):
        self.path = path
        self.lineno = lineno
        self.col = col
        super().__init__(f"{path}:{lineno}:{col}: {message}")


@dataclass(frozen=True)
class ParameterInfo:
    name: str
    kind: str
    default_text: str | None = None
    annotation_text: str | None = None
    position: int = 0

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ParameterInfo":
        return cls(**data)


@dataclass(frozen=True)
class FunctionRecord:
    qualified_name: str
    source_text: str
    params: tuple[ParameterInfo, ...]
    has_return_value: bool
    raw_docstring: str | None
    file_path: str
    start_line: int
    # True when the def sits directly in a class body.
    is_method: bool = False

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["params"] = [asdict(p) for p in self.params]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FunctionRecord":
        values = dict(data)
        values["params"] = tuple(ParameterInfo.from_dict(p) for p in data["params"])
        return cls(**values)


def _segment(source: str, node: ast.AST | None) -> str | None:
    if node is None:
        return None
    return ast.get_source_segment(source, node)


def _parameters(args: ast.arguments, source: str) -> list[ParameterInfo]:
    params: list[ParameterInfo] = []

    def add(arg: ast.arg, kind: str, default: ast.expr | None) -> None:
        params.append(
            ParameterInfo(
                name=arg.arg,
                kind=kind,
                default_text=_segment(source, default),
                annotation_text=_segment(source, arg.annotation),
                position=len(params),
            )
        )

    positional = [(a, POSITIONAL_ONLY) for a in args.posonlyargs]
    positional += [(a, POSITIONAL_OR_KEYWORD) for a in args.args]
    # Positional defaults are right-aligned against posonlyargs + args.
    offset = len(positional) - len(args.defaults)
    for i, (arg, kind) in enumerate(positional):
        add(arg, kind, args.defaults[i - offset] if i >= offset else None)
    if args.vararg is not None:
        add(args.vararg, VAR_POSITIONAL, None)
    # kw_defaults pairs one-to-one with kwonlyargs; None marks "no default".
    for arg, default in zip(args.kwonlyargs, args.kw_defaults):
        add(arg, KEYWORD_ONLY, default)
    if args.kwarg is not None:
        add(args.kwarg, VAR_KEYWORD, None)
    return params


def _own_body_nodes(func: ast.AST) -> Iterator[ast.AST]:
    """Walk a function body without descending into nested scopes."""
    stack = list(ast.iter_child_nodes(func))
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, _SCOPE_NODES):
            continue
        stack.extend(ast.iter_child_nodes(node))


def _has_return_value(func: ast.FunctionDef | ast.AsyncFunctionDef) -> bool:
    for node in _own_body_nodes(func):
        if isinstance(node, ast.Return) and node.value is not None:
            return True
        if isinstance(node, (ast.Yield, ast.YieldFrom)):
            return True
    return False


def _leading_docstring(func: ast.FunctionDef | ast.AsyncFunctionDef) -> str | None:
    if not func.body:
        return None
    first = func.body[0]
    if (
        isinstance(first, ast.Expr)
        and isinstance(first.value, ast.Constant)
        and isinstance(first.value.value, str)
    ):
        return first.value.value
    return None


def _function_source(lines: list[str], node: ast.AST) -> str:
    chunk = lines[node.lineno - 1 : node.end_lineno]
    return textwrap.dedent("".join(chunk)).rstrip() + "\n"


def parse_snippet(text: str) -> ast.Module:
    """Parse a function's stored source text, tolerating residual indentation."""
    try:
        return ast.parse(text)
    except IndentationError:
        return ast.parse("if True:\n" + textwrap.indent(text, " "))


def extract_functions(source: SourceFile) -> list[FunctionRecord]:
    """One record per ``def`` in the file, methods and nested functions included."""
    try:
        tree = ast.parse(source.text, filename=source.path)
    except SyntaxError as exc:
        raise ExtractionError(source.path, exc.msg, exc.lineno, exc.offset) from exc
    except ValueError as exc:  # e.g. null bytes in source
        raise ExtractionError(source.path, str(exc), None, None) from exc

    lines = source.text.splitlines(keepends=True)
    records: list[FunctionRecord] = []

    def visit(node: ast.AST, prefix: str, in_class: bool) -> None:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, _FUNCTION_NODES):
                qualname = f"{prefix}{child.name}"
                records.append(
                    FunctionRecord(
                        qualified_name=qualname,
                        source_text=_function_source(lines, child),
                        params=tuple(_parameters(child.args, source.text)),
                        has_return_value=_has_return_value(child),
                        raw_docstring=_leading_docstring(child),
                        file_path=source.path,
                        start_line=child.lineno,
                        is_method=in_class,
                    )
                )
                visit(child, f"{qualname}.", False)
            elif isinstance(child, ast.ClassDef):
                visit(child, f"{prefix}{child.name}.", True)
            else:
                visit(child, prefix, in_class)

    visit(tree, "", False)
    records.sort(key=lambda r: r.start_line)
    return records


def extract_parameters(record: FunctionRecord) -> list[ParameterInfo]:
    """Parameters that need documenting.

    For methods a leading ``self``/``cls`` is dropped and the remaining
    positions are renumbered from 0.
    """
    params = list(record.params)
    if record.is_method and params and params[0].name in ("self", "cls") and params[0].kind in (
        POSITIONAL_ONLY,
        POSITIONAL_OR_KEYWORD,
    ):
        params = params[1:]
    return [
        p if p.position == i else ParameterInfo(p.name, p.kind, p.default_text, p.annotation_text, i)
        for i, p in enumerate(params)
    ]


def extract_defaults(record: FunctionRecord) -> dict[str, str]:
    """Map of parameter name to the verbatim default expression."""
    return {p.name: p.default_text for p in record.params if p.default_text is not None}


def passes_function_filters(record: FunctionRecord) -> bool:
    """Drop functions without parameters or without a returned value."""
    return bool(extract_parameters(record)) and record.has_return_value


def function_key(record: FunctionRecord) -> str:
    return f"{record.file_path}::{record.qualified_name}:{record.start_line}"
