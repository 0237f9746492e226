"""Insert composed docstrings into source files as leading string literals."""

from __future__ import annotations

import ast
from typing import Mapping


def _escape_controls(text: str) -> str:
    # NUL is illegal in source and \r would be normalised away; escape all C0
    # controls except newline.
    return "".join(
        ch.encode("unicode_escape").decode("ascii") if (ord(ch) < 32 and ch != "\n") or ch == "\x7f" else ch
        for ch in text
    )


def _literal(text: str, indent: str) -> list[str]:
    # Expand tabs now; once indented they would land on different columns.
    body = text.expandtabs().replace("\\", "\\\\")
    # A closing quote would merge with the terminator; escape it separately.
    tail = '\\"' if body.endswith('"') else ""
    body = body[:-1] if tail else body
    body = _escape_controls(body.replace('"""', '\\"\\"\\"')) + tail
    lines = body.split("\n")
    if len(lines) == 1:
        return [f'{indent}"""{lines[0]}"""\n']
    out = [f'{indent}"""{lines[0]}\n']
    out += [f"{indent}{line}\n" if line else "\n" for line in lines[1:]]
    out.append(f'{indent}"""\n')
    return out


def insert_docstrings(source: str, docstrings: Mapping[int, str]) -> str:
    """Rewrite ``source`` giving each function starting at a key line the mapped text.

    An existing docstring is kept and the parameter blocks are appended after a
    blank line. Functions whose body shares the ``def`` line are left alone.
    """
    tree = ast.parse(source)
    lines = source.splitlines(keepends=True)
    if lines and not lines[-1].endswith("\n"):
        lines[-1] += "\n"

    edits: list[tuple[int, int, list[str]]] = []
    for node in ast.walk(tree):
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        text = docstrings.get(node.lineno)
        if text is None or not node.body:
            continue
        first = node.body[0]
        if first.lineno == node.lineno:
            continue
        indent = lines[first.lineno - 1][: first.col_offset]
        existing = ast.get_docstring(node, clean=True)
        if existing is not None:
            if len(node.body) > 1 and node.body[1].lineno == first.end_lineno:
                continue  # docstring shares a line with code; leave it alone
            merged = f"{existing}\n\n{text}"
            edits.append((first.lineno - 1, first.end_lineno, _literal(merged, indent)))
        else:
            edits.append((first.lineno - 1, first.lineno - 1, _literal(text, indent)))

    for start, end, new in sorted(edits, key=lambda e: e[0], reverse=True):
        lines[start:end] = new
    return "".join(lines)

