"""HTTP surface over the engine. Errors are ``{"error": {code, message, details}}``."""

from __future__ import annotations

import re

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..errors import (
    ContractError, EngineError, GenerationFailedError, InFlightError, NotFoundError, ParseError, RequestError,
    StateError, TransportError, ValidationError,
)
from .engine import Engine, IngestFailed

STATUS_BY_ERROR: list[tuple[type[EngineError], int]] = [
    (NotFoundError, 404),
    (ParseError, 400),
    (ValidationError, 400),
    (InFlightError, 409),
    (ContractError, 422),
    (StateError, 409),
    (IngestFailed, 502),
    (GenerationFailedError, 502),
    (TransportError, 502),
    (RequestError, 502),
]

_FRAGMENT_RE = re.compile(r"^(\d+)-(\d+)$")


class DnuRequest(BaseModel):
    material_id: str
    slide_index: int
    concept_id: str


class AskRequest(BaseModel):
    question: str


def error_response(exc: EngineError) -> JSONResponse:
    status = next((s for cls, s in STATUS_BY_ERROR if isinstance(exc, cls)), 500)
    details = getattr(exc, "details", None) or {}
    return JSONResponse({"error": {"code": exc.code, "message": str(exc), "details": details}}, status_code=status)


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="edurag", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        return error_response(exc)

    @app.post("/materials")
    async def upload_material(request: Request):
        deck = await request.body()
        return await run_in_threadpool(engine.ingest, deck)

    @app.get("/materials/{material_id}/slides/{n}/concepts")
    def slide_concepts(material_id: str, n: int):
        return engine.concepts(material_id, n)

    @app.post("/materials/{material_id}/slides/{n}/ask")
    def ask(material_id: str, n: int, body: AskRequest):
        answers = engine.ask(material_id, n, body.question)
        return _answer_response(engine, material_id, answers)

    @app.post("/learners/{lid}/dnu")
    def mark_dnu(lid: str, body: DnuRequest):
        return engine.mark_dnu(lid, body.material_id, body.slide_index, body.concept_id)

    @app.get("/learners/{lid}/pkg")
    def pkg(lid: str, material: str):
        return engine.pkg(lid, material)

    @app.post("/questions/{qid}/answer")
    def answer(qid: str):
        q = engine.question(qid)
        return _answer_response(engine, q["material_id"], engine.answer(qid))

    @app.get("/materials/{material_id}/sources/{article:path}/{paragraph}")
    def source(material_id: str, article: str, paragraph: str, h: str | None = None):
        doc = engine.source_text(material_id, article, paragraph)
        if h is not None:
            m = _FRAGMENT_RE.match(h)
            start, end = (int(m.group(1)), int(m.group(2))) if m else (-1, -1)
            if not m or not 0 <= start < end <= len(doc["text"]):
                raise ValidationError(f"highlight {h!r} is not a valid span of this source")
            doc["highlight"] = {"start": start, "end": end, "text": doc["text"][start:end]}
        return doc

    return app


def _answer_response(engine: Engine, material_id: str, answers):
    doc = engine.answer_document(material_id, answers)
    if answers.status == "error" and isinstance(answers.cause, (TransportError, RequestError)):
        return JSONResponse(
            {"error": {"code": answers.cause.code, "message": answers.error, "details": doc}}, status_code=502
        )
    return doc
