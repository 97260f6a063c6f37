"""Pydantic request/response models for the stream service API."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class GeoModel(BaseModel):
    lat: float
    lon: float


class MicroblogModel(BaseModel):
    id: int
    scenario_time: float
    author: str
    text: str
    hashtags: list[str]
    visibility: str
    source: str
    geo: Optional[GeoModel] = None
    retweet_of: Optional[int] = None
    category: Optional[str] = None


class EventEntryModel(BaseModel):
    seq: int
    wall_time: float
    scenario_time: float
    kind: str
    message: MicroblogModel


class ClockModel(BaseModel):
    scenario_time: float
    compression: float
    paused: bool
    banner: str
    last_seq: int
    pending: int
    replay_finished: bool


class SessionRequest(BaseModel):
    handle: str
    password: str


class SessionResponse(BaseModel):
    token: str
    handle: str
    kind: str
    visibility: str
    banner: str
    clock: ClockModel


class PostRequest(BaseModel):
    text: str
    lat: Optional[float] = None
    lon: Optional[float] = None


class PostResponse(BaseModel):
    id: int
    seq: int


class RetweetRequest(BaseModel):
    message_id: int


class InjectRequest(BaseModel):
    text: str
    visibility: str
    author_handle: Optional[str] = None


class TrendingEntryModel(BaseModel):
    topic: str
    count: int
    rank: int


class TrendingResponse(BaseModel):
    entries: list[TrendingEntryModel]


class FeedResponse(BaseModel):
    entries: list[EventEntryModel]
    next_since: int


class MapPin(BaseModel):
    lat: float
    lon: float
    id: int


class MapResponse(BaseModel):
    pins: list[MapPin]


class ProfileResponse(BaseModel):
    handle: str
    kind: str
    visibility: str
    profile_url: Optional[str] = None


class ClockUpdateRequest(BaseModel):
    paused: bool = Field(description="Pause or resume the exercise clock")
