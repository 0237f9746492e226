from __future__ import annotations

import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import record_of
from docforge.directives import (
    ANNOTATION,
    BACKEND,
    BASELINE,
    HEADER,
    LITERAL,
    SERVICE,
    Backends,
    DirectiveBundle,
    baseline_description,
    baseline_none,
    build_bundle,
    classify_none,
    generate_description,
    infer_type_from_literal,
    predict_type,
)
from docforge.model_backend import (
    BackendUnavailable,
    ConstantBackend,
    EchoBackend,
    FailingBackend,
    ScriptedBackend,
)
from docforge.py_extract import ParameterInfo, extract_defaults, extract_parameters

F = 'def f(filename, content=None, mode="w"):\n    return filename\n'


def _param(name: str, default: str | None = None, annotation: str | None = None) -> ParameterInfo:
    return ParameterInfo(name, "positional_or_keyword", default, annotation, 0)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("max_depth", "The max depth."),
        ("x", "The x."),
        ("userName", "The user name."),
        ("num_items", "The num items."),
        ("HTTPServer", "The http server."),
        ("_private", "The private."),
    ],
)
def test_baseline_description(name, expected):
    assert baseline_description(_param(name)) == expected


def test_generate_description_baseline():
    assert generate_description(record_of(F), 1) == "The filename."


@pytest.mark.parametrize("index", [0, 4])
def test_generate_description_index_range(index):
    with pytest.raises(IndexError):
        generate_description(record_of(F), index)


def test_echo_backend_truncated_to_first_sentence():
    src = "def f(x):\n    return x. real\n"
    # The prompt is "parameter 1: def f(x):\n    return x. real"; the first
    # sentence ends at "x.".
    assert generate_description(record_of(src), 1, EchoBackend()) == "parameter 1: def f(x):\n    return x."


def test_prompt_sent_to_backend():
    record = record_of(F)
    scripted = ScriptedBackend(outputs={"parameter 2: " + record.source_text: "Text to write. Extra."})
    assert generate_description(record, 2, scripted) == "Text to write."


def test_backend_failure_falls_back():
    bundle = build_bundle(record_of(F), 1, Backends(generation=FailingBackend(), classification=FailingBackend()))
    assert bundle.description == "The filename."
    assert bundle.provenance["description"] == BASELINE
    assert bundle.provenance["none_accepted"] == BASELINE


def test_empty_backend_output_falls_back():
    bundle = build_bundle(record_of(F), 1, Backends(generation=ConstantBackend(output="   ")))
    assert bundle.description == "The filename."
    assert bundle.provenance["description"] == BASELINE


@pytest.mark.parametrize(
    "text, expected",
    [
        ("4", "int"),
        ("-4", "int"),
        ("1.5", "float"),
        ("1e-3", "float"),
        ("True", "bool"),
        ("'w'", "str"),
        ('"""doc"""', "str"),
        ("b'x'", "bytes"),
        ("[1, 2]", "list"),
        ("{'a': 1}", "dict"),
        ("{1, 2}", "set"),
        ("{}", "dict"),
        ("(1,)", "tuple"),
        ("()", "tuple"),
        ("None", None),
        ("...", None),
        ("os.sep", None),
        ("len('x')", None),
        ("-x", None),
        ("not valid(", None),
    ],
)
def test_infer_type_from_literal(text, expected):
    assert infer_type_from_literal(text) == expected


def test_predict_type_order():
    record = record_of("def f(n: int, out=False, x=None, y=2):\n    return n\n")
    n, out, x, y = extract_parameters(record)
    pred = predict_type(record, n)
    assert (pred.type_text, pred.confidence, pred.source) == ("int", 1.0, ANNOTATION)
    pred = predict_type(record, out)
    assert (pred.type_text, pred.confidence, pred.source) == ("bool", 1.0, LITERAL)
    assert predict_type(record, x) is None


def test_predict_type_service_filters_to_parameter():
    record = record_of("def f(x, y):\n    z = x\n    return z\n")
    service = ScriptedBackend(
        types={record.source_text: {"z": [("str", 0.99)], "x": [("int", 0.4), ("float", 0.7)]}}
    )
    x, y = extract_parameters(record)
    pred = predict_type(record, x, service)
    assert (pred.type_text, pred.confidence, pred.source) == ("float", 0.7, SERVICE)
    assert predict_type(record, y, service) is None


def test_predict_type_service_failure_degrades():
    record = record_of("def f(x, y=3):\n    return x\n")
    x, y = extract_parameters(record)
    assert predict_type(record, x, FailingBackend()) is None
    assert predict_type(record, y, FailingBackend()).source == LITERAL


@pytest.mark.parametrize(
    "default, annotation, expected",
    [
        ("None", None, True),
        (None, "Optional[int]", True),
        (None, "typing.Optional[str]", True),
        (None, "int | None", True),
        (None, "None | str", True),
        ("3", "int", False),
        (None, "NoneType", False),
        (None, None, False),
    ],
)
def test_baseline_none(default, annotation, expected):
    assert baseline_none(_param("y", default, annotation)) is expected


def test_classify_none_backend_and_baseline():
    record = record_of("def f(y=None, z: int = 3):\n    return y\n")
    y, z = extract_parameters(record)
    assert classify_none(record, y) is True
    assert classify_none(record, z) is False
    assert classify_none(record, z, ConstantBackend(label=1)) is True
    assert classify_none(record, y, FailingBackend()) is True
    with pytest.raises(ValueError):
        classify_none(record, _param("missing"))


def test_build_bundle_composition():
    record = record_of(F)
    second = build_bundle(record, 2)
    assert second == DirectiveBundle(
        param_name="content",
        description="The content.",
        datatype=None,
        default_text="None",
        none_accepted=True,
        provenance={"description": BASELINE, "default_text": HEADER, "none_accepted": BASELINE},
    )
    first = build_bundle(record, 1)
    assert (first.description, first.datatype, first.default_text, first.none_accepted) == (
        "The filename.",
        None,
        None,
        False,
    )
    assert build_bundle(record, 3).provenance["datatype"] == LITERAL


def test_annotated_param_provenance():
    bundle = build_bundle(record_of("def f(n: int):\n    return n\n"), 1)
    assert bundle.datatype == "int"
    assert bundle.provenance["datatype"] == ANNOTATION


def test_backend_provenance():
    backends = Backends(generation=ConstantBackend(output="A name. More."), classification=ConstantBackend(label=0))
    bundle = build_bundle(record_of(F), 2, backends)
    assert bundle.description == "A name."
    assert bundle.none_accepted is False
    assert bundle.provenance["description"] == BACKEND
    assert bundle.provenance["none_accepted"] == BACKEND


class _Flaky:
    """Fails every other call, thread-safely."""

    def __init__(self):
        self.calls = 0
        self.lock = threading.Lock()

    def generate(self, input_text: str) -> str:
        with self.lock:
            self.calls += 1
            fail = self.calls % 2 == 0
        if fail:
            raise BackendUnavailable("flaky")
        return "Backend text."


def test_failures_never_abort():
    record = record_of("def f(a, b, c, d):\n    return a\n")
    backend = _Flaky()
    bundles = [build_bundle(record, i, Backends(generation=backend)) for i in range(1, 5)]
    assert [b.provenance["description"] for b in bundles] == [BACKEND, BASELINE, BACKEND, BASELINE]


_defaults = st.one_of(st.none(), st.sampled_from(["None", "1", "'s'", "[]", "x.y", "(1, None)"]))
_annotations = st.one_of(st.none(), st.sampled_from(["int", "Optional[int]", "str | None", "list[str]"]))


@st.composite
def functions(draw):
    n = draw(st.integers(1, 4))
    parts = []
    for i in range(n):
        text = f"p{i}"
        annotation = draw(_annotations)
        if annotation:
            text += f": {annotation}"
        parts.append(text)
    # Defaults must form a suffix.
    n_defaults = draw(st.integers(0, n))
    for i in range(n - n_defaults, n):
        default = draw(_defaults) or "0"
        parts[i] += f" = {default}" if ":" in parts[i] else f"={default}"
    return record_of(f"def f({', '.join(parts)}):\n    return p0\n")


@settings(max_examples=100, deadline=None)
@given(functions())
def test_bundles_deterministic_and_pv_agree(record):
    defaults = extract_defaults(record)
    for i, param in enumerate(extract_parameters(record), 1):
        bundle = build_bundle(record, i)
        assert bundle == build_bundle(record, i)
        assert bundle.default_text == defaults.get(param.name)
        assert ("default_text" in bundle.provenance) == (param.name in defaults)
        assert bundle.description
        for key in ("datatype", "default_text", "none_accepted"):
            if getattr(bundle, key) is not None:
                assert key in bundle.provenance


@given(st.sampled_from([None, "int", "str", "Optional[str]", "list | None"]), st.sampled_from([None, "1", "'a'"]))
def test_baseline_none_monotone(annotation, default):
    before = baseline_none(_param("y", default, annotation))
    after = baseline_none(_param("y", "None", annotation))
    assert after or not before
    assert after
