"""Pydantic request/response models for the HTTP + socket API."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

Mode = Literal[
    "human-led-mod", "ai-led-mod", "static-interpretable", "static-blackbox", "fcp"
]

INTERPRETABLE_MODES = {"human-led-mod", "ai-led-mod", "static-interpretable"}


class CreateSessionRequest(BaseModel):
    mode: Mode
    layout: str
    human_seat: Literal[0, 1] = 0
    seed: int = 0
    tutorial: bool = False  # play against a uniform-random AI (pre-study warmup)


class SessionView(BaseModel):
    id: str
    mode: Mode
    tutorial: bool = False
    layout: str
    human_seat: int
    iteration: int
    max_iterations: int
    phase: Literal["idle", "playing", "optimizing"]
    episodes_completed: int
    policy_hash: str | None = None
    can_view_policy: bool
    can_edit_policy: bool


class PolicyResponse(BaseModel):
    document: dict[str, Any]


class EditRequest(BaseModel):
    ops: list[dict[str, Any]] = Field(min_length=1)
    parent_hash: str | None = None


class EpisodeStartResponse(BaseModel):
    episode_id: int
    socket_path: str
    tick_rate: float
    horizon: int


class LayoutView(BaseModel):
    name: str
    grid: list[str]
    shared_counters: list[list[int]]
    cook_time: int
    horizon: int
    recipes: dict[str, int]


class OptimizeStartResponse(BaseModel):
    job_id: str
    status: Literal["running"]


class OptimizeStatus(BaseModel):
    job_id: str
    status: Literal["running", "done", "failed"]
    progress: float
    detail: str = ""
    accepted: bool | None = None


class ErrorBody(BaseModel):
    error: str
    detail: str = ""


class HumanInput(BaseModel):
    t: int
    key: str


class TickPlayer(BaseModel):
    pos: list[int]
    facing: int
    held: dict[str, Any] | None


class TickMessage(BaseModel):
    type: Literal["tick"] = "tick"
    t: int
    players: list[TickPlayer]
    pots: dict[str, Any]
    counters: dict[str, Any]
    score: int
    rewards: list[int]
    done: bool
    ai_macro: str | None = None
