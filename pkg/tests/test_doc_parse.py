from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import record_of
from docforge.doc_parse import (
    GOOGLE,
    NUMPY,
    PARAM_TOKENS,
    REST,
    UNKNOWN,
    ParamDocEntry,
    completeness_rank,
    has_param_tokens,
    parse_docstring,
)
from docforge.py_extract import ParameterInfo, extract_parameters

PRECOOK_DOC = (
    ":param s: string, sentence to be converted into ngrams\n"
    ":param n: int, number of ngrams for which representation is calculated\n"
    ":return: term frequency vector for occurring ngrams"
)


@pytest.mark.parametrize(
    "raw, expected",
    [
        (":param x: the input", True),
        ("Args:\n  x: the input", True),
        ("Returns the sum.", False),
        ("PARAMETERS: upper case", True),
        ("see :Arguments section", True),
        ("Parameters\n----------\nx : int", False),
    ],
)
def test_param_tokens(raw, expected):
    assert has_param_tokens(raw) is expected


def test_rest_fields():
    parsed = parse_docstring(":param param1: this parameter does things\n:type param1: int")
    assert parsed.style == REST
    assert parsed.params == (ParamDocEntry("param1", "int", "this parameter does things"),)


def test_rest_inline_type_and_sections():
    parsed = parse_docstring(
        """Summary line.

        Longer text here.

        :param int count: how many
            items to take
        :param name: label
        :returns: a list
        :raises ValueError: if count < 0
        """
    )
    assert parsed.short_description == "Summary line."
    assert parsed.long_description == "Longer text here."
    assert parsed.params == (
        ParamDocEntry("count", "int", "how many items to take"),
        ParamDocEntry("name", None, "label"),
    )
    assert parsed.returns_text == "a list"
    assert parsed.raises_texts == ("ValueError: if count < 0",)


def test_rest_one_line_docstring():
    parsed = parse_docstring(":param s: string, sentence. :param n: int, number of n-grams.")
    assert [p.name for p in parsed.params] == ["s", "n"]
    assert parsed.params[1].description == "int, number of n-grams."


def test_google_section():
    parsed = parse_docstring("Args:\n  param2 (str, optional): a parameter")
    assert parsed.style == GOOGLE
    assert parsed.params == (ParamDocEntry("param2", "str, optional", "a parameter"),)


def test_google_full():
    parsed = parse_docstring(
        """Do a thing.

        Args:
            path (str): Where to look.
                Continues here.
            *items: Extra items.
            **opts (dict): Options.

        Returns:
            bool: success.

        Raises:
            OSError: on failure.
        """
    )
    assert [(p.name, p.type_text) for p in parsed.params] == [
        ("path", "str"),
        ("items", None),
        ("opts", "dict"),
    ]
    assert parsed.params[0].description == "Where to look. Continues here."
    assert parsed.returns_text == "bool: success."
    assert parsed.raises_texts == ("OSError: on failure.",)
    assert parsed.short_description == "Do a thing."


def test_numpy_section():
    parsed = parse_docstring(
        """Summary.

        Parameters
        ----------
        x, y : float
            Coordinates.
        scale : float, optional
            Multiplier.

        Returns
        -------
        float
        """
    )
    assert parsed.style == NUMPY
    assert [(p.name, p.type_text, p.description) for p in parsed.params] == [
        ("x", "float", "Coordinates."),
        ("y", "float", "Coordinates."),
        ("scale", "float, optional", "Multiplier."),
    ]
    assert parsed.returns_text == "float"


def test_summary_only_is_unknown():
    parsed = parse_docstring("just a summary")
    assert parsed.style == UNKNOWN
    assert parsed.params == ()
    assert parsed.short_description == "just a summary"


def test_raw_preserved():
    raw = "  weird :: text\n"
    assert parse_docstring(raw).raw == raw


def _header(n: int) -> list[ParameterInfo]:
    return [ParameterInfo(f"p{i}", "positional_or_keyword", position=i) for i in range(n)]


def test_precook_ranks_two_and_full_variant_ranks_one():
    src = f'def precook(s, n=4, out=False):\n    """{PRECOOK_DOC}"""\n    return s\n'
    record = record_of(src)
    rank = completeness_rank(parse_docstring(record.raw_docstring), extract_parameters(record))
    assert (rank.rank, rank.doc_param_count, rank.header_param_count) == ("two", 2, 3)

    full = PRECOOK_DOC + "\n:param out: bool, whether to return the counts only"
    src = f'def precook(s, n=4, out=False):\n    """{full}"""\n    return s\n'
    record = record_of(src)
    assert completeness_rank(parse_docstring(record.raw_docstring), extract_parameters(record)).rank == "one"


def test_rank_examples():
    two = parse_docstring(":param p0: a\n:param p1: b")
    assert completeness_rank(two, _header(2)).rank == "one"
    three = parse_docstring(":param p0: a\n:param p1: b\n:param gone: removed")
    assert completeness_rank(three, _header(2)).rank == "inconsistent"
    assert completeness_rank(parse_docstring("nothing"), _header(2)).rank == "three"


def test_rank_star_prefix_and_duplicates():
    parsed = parse_docstring(":param *args: extra\n:param **kw: more\n:param kw: again")
    assert completeness_rank(parsed, _header(2)).doc_param_count == 2


def test_rank_no_header_no_doc():
    # Parameterless functions never reach ranking; declared convention.
    assert completeness_rank(parse_docstring("x"), []).rank == "three"


_text = st.lists(
    st.sampled_from(list("abcxyz :()*,-\n\t.") + ["Args:", "Returns:", "param", "----", "Parameters"]),
    max_size=60,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.text(max_size=200), _text))
def test_parse_is_total(raw):
    parsed = parse_docstring(raw)
    assert parsed.style in (REST, GOOGLE, NUMPY, UNKNOWN)
    for entry in parsed.params:
        assert entry.name
        assert entry.description is not None


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.text(max_size=200), _text))
def test_no_tokens_means_no_rest_or_google_params(raw):
    parsed = parse_docstring(raw)
    if not has_param_tokens(raw) and parsed.style in (REST, GOOGLE, UNKNOWN):
        assert parsed.params == ()


@given(
    st.sampled_from(["Args", "Arguments", "Parameters", "Keyword Args"]),
    st.lists(st.sampled_from(["a", "b", "c", "long_name"]), min_size=1, unique=True),
)
def test_google_param_sections_carry_tokens(header, names):
    raw = f"{header}:\n" + "".join(f"    {n}: desc\n" for n in names)
    if header == "Keyword Args":
        assert has_param_tokens(raw)
    else:
        assert any(t in raw.lower() for t in PARAM_TOKENS)
    assert [p.name for p in parse_docstring(raw).params] == names


@given(st.integers(0, 6), st.integers(1, 6))
def test_rank_predicates_exclusive_and_exhaustive(doc, header):
    parsed = parse_docstring("\n".join(f":param q{i}: d" for i in range(doc)) or "summary")
    rank = completeness_rank(parsed, _header(header))
    preds = {
        "one": doc == header,
        "two": 0 < doc < header,
        "three": doc == 0,
        "inconsistent": doc > header,
    }
    assert sum(preds.values()) == 1
    assert preds[rank.rank]
    assert (rank.doc_param_count, rank.header_param_count) == (doc, header)
