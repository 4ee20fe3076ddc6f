"""HTTP front of the judgment study.

Three endpoints: fetch an assignment, submit one judgment, read the
aggregates. Bodies are JSON with field names exactly matching the study
data model.
"""

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .study import (
    ConflictError,
    NotFoundError,
    PoolExhaustedError,
    ValidationError,
)


class JudgmentIn(BaseModel):
    participant_id: str
    pair_id: str
    presentation_order: str | None = Field(default=None, pattern="^(unshifted_first|shifted_first)$")
    rating: int = Field(ge=1, le=7)
    response_time_ms: float | None = None
    submitted_at: str | None = None


def create_app(store):
    app = FastAPI(title="shiftbench study service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store

    @app.get("/api/assignment")
    def get_assignment(participant: str = Query(min_length=1)):
        try:
            return store.create_assignment(participant).to_record()
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except PoolExhaustedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/api/judgments", status_code=201)
    def post_judgment(judgment: JudgmentIn):
        try:
            stored = store.submit_judgment(judgment.model_dump())
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"status": "accepted", "judgment": stored}

    @app.get("/api/aggregates")
    def get_aggregates():
        return [agg.to_record() for agg in store.aggregates()]

    return app
