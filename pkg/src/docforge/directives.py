"""The four per-parameter directives: description, datatype, default, None acceptance."""

from __future__ import annotations

import ast
import logging
import re
from dataclasses import dataclass, field
from typing import Any

from .dataset_build import first_sentence, prompt_prefix
from .model_backend import (
    BackendUnavailable,
    ClassificationBackend,
    GenerationBackend,
    TypeServiceClient,
)
from .py_extract import FunctionRecord, ParameterInfo, extract_parameters

logger = logging.getLogger(__name__)

# Provenance values.
BACKEND = "backend"
BASELINE = "baseline"
ANNOTATION = "annotation"
LITERAL = "literal"
SERVICE = "service"
HEADER = "header"

BASELINE_TEMPLATE_VERSION = "1"

_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_OPTIONAL_UNION = re.compile(r"\|\s*None\b|\bNone\s*\|")


@dataclass(frozen=True)
class TypePrediction:
    type_text: str
    confidence: float
    source: str


@dataclass(frozen=True)
class DirectiveBundle:
    param_name: str
    description: str
    datatype: str | None = None
    default_text: str | None = None
    none_accepted: bool | None = None
    provenance: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "param_name": self.param_name,
            "description": self.description,
            "datatype": self.datatype,
            "default_text": self.default_text,
            "none_accepted": self.none_accepted,
            "provenance": dict(sorted(self.provenance.items())),
        }


@dataclass
class Backends:
    """Optional external engines; ``None`` selects the local baseline."""

    generation: GenerationBackend | None = None
    classification: ClassificationBackend | None = None
    types: TypeServiceClient | None = None


def _param_at(function: FunctionRecord, param_index: int) -> ParameterInfo:
    params = extract_parameters(function)
    if not 1 <= param_index <= len(params):
        raise IndexError(
            f"param_index {param_index} out of range 1..{len(params)} for {function.qualified_name}"
        )
    return params[param_index - 1]


def baseline_description(param: ParameterInfo) -> str:
    words = []
    for chunk in param.name.strip("_").split("_"):
        words.extend(w.lower() for w in _CAMEL_BOUNDARY.split(chunk) if w)
    return f"The {' '.join(words) or param.name}."


def describe(
    function: FunctionRecord, param_index: int, backend: GenerationBackend | None
) -> tuple[str, str]:
    """Description plus its provenance (backend or baseline)."""
    param = _param_at(function, param_index)
    if backend is not None:
        try:
            output = first_sentence(backend.generate(prompt_prefix(param_index) + function.source_text))
        except BackendUnavailable as exc:
            logger.warning("generation backend failed for %s: %s", function.qualified_name, exc)
        else:
            if output.strip():
                return output, BACKEND
    return baseline_description(param), BASELINE


def generate_description(
    function: FunctionRecord, param_index: int, backend: GenerationBackend | None = None
) -> str:
    return describe(function, param_index, backend)[0]


def infer_type_from_literal(default_text: str) -> str | None:
    try:
        node = ast.parse(default_text.strip(), mode="eval").body
    except SyntaxError:
        return None
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        node = node.operand
        if not (isinstance(node, ast.Constant) and type(node.value) in (int, float, complex)):
            return None
    if isinstance(node, ast.Constant):
        value = node.value
        if value is None or value is Ellipsis:
            return None
        return type(value).__name__
    if isinstance(node, ast.JoinedStr):
        return "str"
    if isinstance(node, ast.List):
        return "list"
    if isinstance(node, ast.Dict):
        return "dict"
    if isinstance(node, ast.Set):
        return "set"
    if isinstance(node, ast.Tuple):
        return "tuple"
    return None


def predict_type(
    function: FunctionRecord, param: ParameterInfo, client: TypeServiceClient | None = None
) -> TypePrediction | None:
    """Annotation, then literal default, then the type service, else nothing."""
    if param.annotation_text:
        return TypePrediction(param.annotation_text, 1.0, ANNOTATION)
    if param.default_text is not None:
        literal = infer_type_from_literal(param.default_text)
        if literal is not None:
            return TypePrediction(literal, 1.0, LITERAL)
    if client is not None:
        try:
            predictions = client.predict_types(function.source_text)
        except BackendUnavailable as exc:
            logger.warning("type service failed for %s: %s", function.qualified_name, exc)
            return None
        # Only this parameter's entry; other variables in the response are ignored.
        candidates = predictions.get(param.name) or []
        if candidates:
            best = candidates[0]
            return TypePrediction(best.type_text, best.confidence, SERVICE)
    return None


def baseline_none(param: ParameterInfo) -> bool:
    if param.default_text is not None and param.default_text.strip() == "None":
        return True
    annotation = param.annotation_text or ""
    return "Optional[" in annotation or bool(_OPTIONAL_UNION.search(annotation))


def decide_none(
    function: FunctionRecord, param_index: int, backend: ClassificationBackend | None
) -> tuple[bool, str]:
    param = _param_at(function, param_index)
    if backend is not None:
        try:
            result = backend.classify(prompt_prefix(param_index) + function.source_text)
        except BackendUnavailable as exc:
            logger.warning("classification backend failed for %s: %s", function.qualified_name, exc)
        else:
            return result.label == 1, BACKEND
    return baseline_none(param), BASELINE


def classify_none(
    function: FunctionRecord, param: ParameterInfo, backend: ClassificationBackend | None = None
) -> bool:
    params = extract_parameters(function)
    index = next((i for i, p in enumerate(params, 1) if p.name == param.name), None)
    if index is None:
        raise ValueError(f"{param.name!r} is not a parameter of {function.qualified_name}")
    return decide_none(function, index, backend)[0]


def build_bundle(
    function: FunctionRecord, param_index: int, backends: Backends | None = None
) -> DirectiveBundle:
    backends = backends or Backends()
    param = _param_at(function, param_index)
    provenance: dict[str, str] = {}

    description, provenance["description"] = describe(function, param_index, backends.generation)

    datatype = None
    prediction = predict_type(function, param, backends.types)
    if prediction is not None:
        datatype = prediction.type_text
        provenance["datatype"] = prediction.source

    if param.default_text is not None:
        provenance["default_text"] = HEADER

    none_accepted, provenance["none_accepted"] = decide_none(
        function, param_index, backends.classification
    )
    return DirectiveBundle(
        param_name=param.name,
        description=description,
        datatype=datatype,
        default_text=param.default_text,
        none_accepted=none_accepted,
        provenance=provenance,
    )
