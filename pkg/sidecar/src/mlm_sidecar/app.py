"""FastAPI application speaking the sidecar wire protocol.

Endpoints: GET /healthz, GET /meta, POST /tokenize, POST /predict,
POST /sessions, DELETE /sessions/{id}.  Malformed bodies return 400,
over-limit inputs 413, unknown sessions 404, exhausted session capacity 507.
"""

from __future__ import annotations

import hashlib
import json

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import schemas
from .config import Settings
from .modeling import ModelBundle
from .sessions import SessionLimitError, SessionStore


def create_app(bundle: ModelBundle | None = None,
               settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings.from_env()
    app = FastAPI(title="mlm-sidecar", version="0.1.0")
    state: dict = {"bundle": bundle, "settings": settings}

    def get_bundle() -> ModelBundle:
        if state["bundle"] is None:
            state["bundle"] = ModelBundle.load(state["settings"])
        return state["bundle"]

    sessions = SessionStore(max_sessions=settings.max_sessions)

    @app.exception_handler(RequestValidationError)
    async def malformed(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc.errors()[:3])})

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", model=get_bundle().identity)

    @app.get("/meta", response_model=schemas.MetaResponse)
    def meta() -> schemas.MetaResponse:
        bundle = get_bundle()
        return schemas.MetaResponse(
            identity=bundle.identity,
            capabilities=["tokenize", "predict", "tune"],
            max_input_len=settings.max_input_len,
            specials=bundle.specials,
            vocab_size=bundle.tokenizer.vocab_size,
            tuning_defaults={
                "epochs": settings.epochs,
                "learning_rate": settings.learning_rate,
            },
        )

    @app.post("/tokenize", response_model=schemas.TokenizeResponse)
    def tokenize(request: schemas.TokenizeRequest) -> schemas.TokenizeResponse:
        bundle = get_bundle()
        tokens = []
        for text in request.texts:
            sentence = bundle.tokenize_text(text)
            if len(sentence) > settings.max_input_len:
                raise HTTPException(
                    status_code=413,
                    detail=f"text of {len(sentence)} tokens exceeds limit "
                           f"{settings.max_input_len}",
                )
            tokens.append(sentence)
        return schemas.TokenizeResponse(tokens=tokens)

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(request: schemas.PredictRequest) -> schemas.PredictResponse:
        bundle = get_bundle()
        model = None
        if request.session_id is not None:
            record = sessions.get(request.session_id)
            if record is None:
                raise HTTPException(status_code=404, detail="unknown session")
            model = record.tuned.model
        instances = []
        for index, instance in enumerate(request.instances):
            n = len(instance.input_ids)
            if n > settings.max_input_len:
                raise HTTPException(
                    status_code=413,
                    detail=f"instance {index} has {n} tokens, limit "
                           f"{settings.max_input_len}",
                )
            for position in instance.masked_positions:
                if not 0 <= position < n:
                    raise HTTPException(
                        status_code=400,
                        detail=f"instance {index}: masked position {position} "
                               f"outside input of {n} tokens",
                    )
            instances.append(instance.model_dump())
        return schemas.PredictResponse(
            predictions=bundle.predict(instances, model=model)
        )

    @app.post("/sessions", response_model=schemas.SessionOut)
    def create_session(request: schemas.SessionCreateRequest) -> schemas.SessionOut:
        bundle = get_bundle()
        tuning = request.tuning.model_dump()
        epochs = request.epochs if request.epochs is not None else settings.epochs
        learning_rate = (
            request.learning_rate
            if request.learning_rate is not None
            else settings.learning_rate
        )
        if epochs < 1 or learning_rate <= 0:
            raise HTTPException(status_code=400, detail="invalid tuning parameters")
        summary = [
            [token.model_dump() for token in sentence]
            for sentence in request.summary_tokens
        ]
        fingerprint = hashlib.blake2b(
            json.dumps({"summary": summary, "tuning": tuning}, sort_keys=True).encode(),
            digest_size=8,
        ).hexdigest()
        with sessions.tuning_lock:
            tuned = bundle.fine_tune(summary, tuning, epochs, learning_rate)
            try:
                record = sessions.add(bundle.identity, tuned)
            except SessionLimitError as exc:
                raise HTTPException(status_code=507, detail=str(exc)) from exc
        return schemas.SessionOut(
            session_id=record.session_id,
            base_model=record.base_model,
            created_at=record.created_at,
            tuned_on=fingerprint,
            tuning_params=tuned.echo["tuning_params"],
            epochs=tuned.echo["epochs"],
            learning_rate=tuned.echo["learning_rate"],
            n_copies=tuned.echo["n_copies"],
        )

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str) -> Response:
        if not sessions.delete(session_id):
            raise HTTPException(status_code=404, detail="unknown session")
        return Response(status_code=204)

    return app


def build_default_app() -> FastAPI:
    """Entry point for `uvicorn mlm_sidecar.app:app` deployments."""
    return create_app()


app = build_default_app()
