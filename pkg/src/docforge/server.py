"""Stub model server speaking the backend wire protocol.

Useful for exercising HttpBackend end to end, and as a template for wrapping
a real fine-tuned model behind the same endpoints.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .directives import baseline_description, baseline_none, infer_type_from_literal
from .model_backend import (
    BackendUnavailable,
    ClassificationBackend,
    ClassifyResult,
    GenerationBackend,
    TypeCandidate,
    TypeServiceClient,
)
from .py_extract import extract_functions, extract_parameters
from .repo_filter import SourceFile


class GenerateRequest(BaseModel):
    task: str = "describe"
    input: str = Field(min_length=1)


class GenerateResponse(BaseModel):
    output: str


class ClassifyRequest(BaseModel):
    task: str = "classify_none"
    input: str = Field(min_length=1)


class ClassifyResponse(BaseModel):
    label: int = Field(ge=0, le=1)
    score: float = Field(ge=0.0, le=1.0)


class PredictRequest(BaseModel):
    source: str = Field(min_length=1)


class TypeCandidateModel(BaseModel):
    type_text: str
    confidence: float = Field(ge=0.0, le=1.0)


def _split_prompt(text: str) -> tuple[int, str]:
    head, sep, source = text.partition(": ")
    words = head.split()
    if not sep or len(words) != 2 or words[0] != "parameter" or not words[1].isdigit():
        raise HTTPException(status_code=422, detail="input must start with 'parameter N: '")
    return int(words[1]), source


def _prompt_param(text: str):
    index, source = _split_prompt(text)
    try:
        records = extract_functions(SourceFile("<request>", source))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    if not records:
        raise HTTPException(status_code=422, detail="no function in input")
    params = extract_parameters(records[0])
    if not 1 <= index <= len(params):
        raise HTTPException(status_code=422, detail=f"parameter {index} out of range")
    return records[0], params[index - 1]


class _TemplateModel:
    """Default engines: the deterministic baselines, served over HTTP."""

    def generate(self, input_text: str) -> str:
        return baseline_description(_prompt_param(input_text)[1])

    def classify(self, input_text: str) -> ClassifyResult:
        return ClassifyResult(int(baseline_none(_prompt_param(input_text)[1])), 1.0)

    def predict_types(self, source_text: str) -> dict[str, list[TypeCandidate]]:
        try:
            records = extract_functions(SourceFile("<request>", source_text))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        out: dict[str, list[TypeCandidate]] = {}
        for record in records[:1]:
            for param in record.params:
                literal = infer_type_from_literal(param.default_text) if param.default_text else None
                if param.annotation_text:
                    out[param.name] = [TypeCandidate(param.annotation_text, 1.0)]
                elif literal:
                    out[param.name] = [TypeCandidate(literal, 0.9)]
        return out


def create_app(
    generator: GenerationBackend | None = None,
    classifier: ClassificationBackend | None = None,
    types: TypeServiceClient | None = None,
) -> FastAPI:
    default = _TemplateModel()
    generator = generator or default
    classifier = classifier or default
    types = types or default
    app = FastAPI(title="docforge stub backend")

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        if req.task != "describe":
            raise HTTPException(status_code=422, detail=f"unsupported task {req.task!r}")
        try:
            return GenerateResponse(output=generator.generate(req.input))
        except BackendUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.post("/classify", response_model=ClassifyResponse)
    def classify(req: ClassifyRequest) -> ClassifyResponse:
        if req.task != "classify_none":
            raise HTTPException(status_code=422, detail=f"unsupported task {req.task!r}")
        try:
            result = classifier.classify(req.input)
        except BackendUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        return ClassifyResponse(label=result.label, score=result.score)

    @app.post("/predict", response_model=dict[str, list[TypeCandidateModel]])
    def predict(req: PredictRequest) -> dict[str, list[TypeCandidateModel]]:
        try:
            table = types.predict_types(req.source)
        except BackendUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        return {
            name: [TypeCandidateModel(type_text=c.type_text, confidence=c.confidence) for c in cands]
            for name, cands in table.items()
        }

    return app
