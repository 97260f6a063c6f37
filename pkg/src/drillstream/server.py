"""Stream service: plan replay on the exercise clock plus live operations.

One logical writer: the replay driver and every mutating endpoint
serialize through a single asyncio lock, appending to the event log,
feeding the live trend window, and fanning entries out to subscribers.
Scheduled messages keep their planned scenario times in the log, so
two uninterrupted replays of the same plan differ only in wall_time.
"""
from __future__ import annotations

import asyncio
import dataclasses
import heapq
import itertools
import json
import random
import secrets
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from fastapi import Depends, FastAPI, Header, Query, Request, WebSocket, WebSocketDisconnect

from .clock import ExerciseClock
from .errors import (
    AlreadyRunning,
    AuthError,
    ConfigurationError,
    DrillstreamError,
    EmptyText,
    Forbidden,
    NotFound,
    Overlength,
)
from .eventlog import EventKind, EventLog, EventLogEntry
from .geo import GeoCircle, GeoPoint
from .model import (
    Account,
    AccountKind,
    Microblog,
    SourceClass,
    VisibilityLevel,
    validate_microblog,
)
from .scheduling import SchedulePlan, generate_ghost_retweets, retweet_text
from .schemas import (
    ClockModel,
    ClockUpdateRequest,
    EventEntryModel,
    FeedResponse,
    InjectRequest,
    MapPin,
    MapResponse,
    PostRequest,
    PostResponse,
    ProfileResponse,
    RetweetRequest,
    SessionRequest,
    SessionResponse,
    TrendingEntryModel,
    TrendingResponse,
)
from .trends import TopicWindow, extract_topics

DEFAULT_BANNER = (
    "EXERCISE EXERCISE EXERCISE: every message in this feed is simulated "
    "training content and must not be redistributed."
)


@dataclass(frozen=True)
class RosterAccount:
    account: Account
    password: Optional[str] = None


@dataclass(frozen=True)
class Roster:
    accounts: tuple[RosterAccount, ...]
    banner: str = DEFAULT_BANNER

    def get(self, handle: str) -> Optional[RosterAccount]:
        for ra in self.accounts:
            if ra.account.handle == handle:
                return ra
        return None

    def ghosts(self) -> list[Account]:
        return [ra.account for ra in self.accounts if ra.account.kind == AccountKind.GHOST]


def load_roster(path: Union[str, Path]) -> Roster:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    accounts = []
    for a in d["accounts"]:
        accounts.append(
            RosterAccount(
                account=Account(
                    handle=a["handle"],
                    kind=AccountKind(a["kind"]),
                    visibility=VisibilityLevel(a["visibility"]),
                    profile_url=a.get("profile_url"),
                ),
                password=a.get("password"),
            )
        )
    handles = [ra.account.handle for ra in accounts]
    if len(handles) != len(set(handles)):
        raise ConfigurationError("duplicate handles in roster")
    return Roster(accounts=tuple(accounts), banner=d.get("banner", DEFAULT_BANNER))


@dataclass(frozen=True)
class Session:
    token: str
    account: Account
    created: float


class ExerciseRuntime:
    """Owns the clock, the event log, the live trend window, and the
    merged emission queue (plan messages plus live-scheduled ghost
    retweets)."""

    def __init__(
        self,
        plan: SchedulePlan,
        roster: Roster,
        *,
        compression: float = 1.0,
        seed: int = 0,
        log_path: Optional[Union[str, Path]] = None,
    ):
        self.plan = plan
        self.roster = roster
        self.policy = plan.policy
        self.clock = ExerciseClock(compression=compression)
        self.log = EventLog(log_path)
        self.window = TopicWindow(self.policy.trend_window_s)
        self.rng = random.Random(seed)
        self.banner = roster.banner
        self.ghost_pool = roster.ghosts()
        self.lock = asyncio.Lock()
        self._sessions: dict[str, Session] = {}
        self._messages_by_id: dict[int, Microblog] = {}
        self._subscribers: list[asyncio.Queue] = []
        self._pending: list[tuple[float, int, Microblog]] = []
        self._tiebreak = itertools.count()
        self._plan_cursor = 0
        self._next_id = (
            max((s.payload.id for s in plan.messages), default=0) + 1
        )
        self._wake: Optional[asyncio.Event] = None
        self._task: Optional[asyncio.Task] = None
        self._closing = False
        self.log.add_listener(self._fan_out)

    # -- lifecycle ------------------------------------------------------

    def start_replay(self) -> asyncio.Task:
        """Start the emitter on the running event loop. One replay per
        runtime: a second call raises AlreadyRunning."""
        if self._task is not None:
            raise AlreadyRunning("a replay is already running")
        self._wake = asyncio.Event()
        self.clock.start()
        self._task = asyncio.get_running_loop().create_task(self._replay_loop())
        return self._task

    async def close(self) -> None:
        self._closing = True
        if self._wake is not None:
            self._wake.set()
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
            self._task = None
        self.log.close()

    async def wait_idle(self) -> None:
        """Block until the plan is exhausted and no ghost retweets are
        pending. Used by tests and batch replays."""
        while not self.replay_finished:
            await asyncio.sleep(0.01)

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    @property
    def replay_finished(self) -> bool:
        return self._plan_cursor >= len(self.plan.messages) and not self._pending

    # -- emitter --------------------------------------------------------

    def _next_due_time(self) -> Optional[float]:
        plan_t = (
            self.plan.messages[self._plan_cursor].emit_time
            if self._plan_cursor < len(self.plan.messages)
            else None
        )
        ghost_t = self._pending[0][0] if self._pending else None
        if plan_t is None and ghost_t is None:
            return None
        if plan_t is None:
            return ghost_t
        if ghost_t is None:
            return plan_t
        return min(plan_t, ghost_t)

    async def _replay_loop(self) -> None:
        while not self._closing:
            due = self._next_due_time()
            if due is None:
                await self._wake.wait()
                self._wake.clear()
                continue
            wait_s = self.clock.wall_seconds_until(due)
            if wait_s > 0:
                timeout = None if wait_s == float("inf") else wait_s
                try:
                    await asyncio.wait_for(self._wake.wait(), timeout=timeout)
                    self._wake.clear()
                    continue  # something changed; recompute next due
                except asyncio.TimeoutError:
                    pass
            async with self.lock:
                self._emit_due()

    def _emit_due(self) -> None:
        """Emit everything whose time has come, plan order first so late
        wake-ups never reorder or skip scheduled messages."""
        now = self.clock.scenario_now
        while True:
            plan_t = (
                self.plan.messages[self._plan_cursor].emit_time
                if self._plan_cursor < len(self.plan.messages)
                else None
            )
            ghost_t = self._pending[0][0] if self._pending else None
            take_plan = plan_t is not None and plan_t <= now and (
                ghost_t is None or plan_t <= ghost_t
            )
            take_ghost = not take_plan and ghost_t is not None and ghost_t <= now
            if take_plan:
                sched = self.plan.messages[self._plan_cursor]
                self._plan_cursor += 1
                self._append(EventKind.EMITTED, sched.payload)
            elif take_ghost:
                _, _, draft = heapq.heappop(self._pending)
                msg = self._renumber(draft)
                self._append(EventKind.GHOST_RETWEET, msg)
            else:
                break

    def _renumber(self, draft: Microblog) -> Microblog:
        msg = dataclasses.replace(draft, id=self._next_id)
        self._next_id += 1
        return msg

    def _alloc_id(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def _append(self, kind: EventKind, msg: Microblog) -> EventLogEntry:
        entry = self.log.append(
            kind, msg, wall_time=time.time(), scenario_time=msg.scenario_time
        )
        self._messages_by_id[msg.id] = msg
        self.window.observe(msg)
        return entry

    def _fan_out(self, entry: EventLogEntry) -> None:
        for q in self._subscribers:
            q.put_nowait(entry)

    def add_subscriber(self, q: asyncio.Queue) -> None:
        self._subscribers.append(q)

    def remove_subscriber(self, q: asyncio.Queue) -> None:
        if q in self._subscribers:
            self._subscribers.remove(q)

    def _schedule_ghosts(self, msg: Microblog) -> None:
        for sched in generate_ghost_retweets(
            msg, self.policy.retweet_policy, self.ghost_pool, self.rng
        ):
            heapq.heappush(
                self._pending, (sched.emit_time, next(self._tiebreak), sched.payload)
            )
        if self._wake is not None:
            self._wake.set()

    # -- sessions -------------------------------------------------------

    def login(self, handle: str, password: str) -> Session:
        ra = self.roster.get(handle)
        if ra is None or ra.password is None or ra.password != password:
            raise AuthError("unknown handle or wrong password")
        session = Session(
            token=secrets.token_hex(16), account=ra.account, created=time.time()
        )
        self._sessions[session.token] = session
        return session

    def session_for(self, token: Optional[str]) -> Session:
        if not token or token not in self._sessions:
            raise AuthError("missing or invalid session token")
        return self._sessions[token]

    # -- live operations --------------------------------------------------

    async def post_message(
        self, session: Session, text: str, geo: Optional[GeoPoint] = None
    ) -> tuple[Microblog, int]:
        validate_microblog(text)
        async with self.lock:
            msg = Microblog(
                id=self._alloc_id(),
                scenario_time=self.clock.scenario_now,
                author=session.account.handle,
                text=text,
                visibility=session.account.visibility,
                source=SourceClass.AUTHORITATIVE,
                geo=geo,
            )
            entry = self._append(EventKind.POSTED, msg)
            self._schedule_ghosts(msg)
        return msg, entry.seq

    async def retweet(self, session: Session, msg_id: int) -> tuple[Microblog, int]:
        async with self.lock:
            parent = self._messages_by_id.get(msg_id)
            if parent is None:
                raise NotFound(f"message {msg_id} does not exist")
            msg = Microblog(
                id=self._alloc_id(),
                scenario_time=self.clock.scenario_now,
                author=session.account.handle,
                text=retweet_text(parent.author, parent.text),
                visibility=session.account.visibility,
                source=SourceClass.AUTHORITATIVE,
                retweet_of=parent.id,
            )
            entry = self._append(EventKind.RETWEETED, msg)
        return msg, entry.seq

    async def inject(
        self,
        session: Session,
        text: str,
        visibility: VisibilityLevel,
        author_handle: Optional[str] = None,
    ) -> tuple[Microblog, int]:
        if session.account.kind != AccountKind.CONTROLLER:
            raise Forbidden("only controller sessions may inject messages")
        validate_microblog(text)
        async with self.lock:
            author = author_handle or self.rng.choice(self.plan.manifest.username_pool)
            msg = Microblog(
                id=self._alloc_id(),
                scenario_time=self.clock.scenario_now,
                author=author,
                text=text,
                visibility=visibility,
                source=SourceClass.CONTROLLER_INJECTION,
            )
            entry = self._append(EventKind.INJECTED, msg)
            self._schedule_ghosts(msg)
        return msg, entry.seq

    def set_paused(self, session: Session, paused: bool) -> None:
        if session.account.kind != AccountKind.CONTROLLER:
            raise Forbidden("only controller sessions may pause the clock")
        if paused:
            self.clock.pause()
        else:
            self.clock.resume()
        if self._wake is not None:
            self._wake.set()

    # -- queries ----------------------------------------------------------

    def query_trending(self, k: int = 20):
        self.window.advance_to(self.clock.scenario_now)
        return self.window.top_k(k)

    def query_unfiltered(
        self, since_seq: int = 0, limit: int = 50
    ) -> tuple[list[EventLogEntry], int]:
        entries = self.log.entries_since(since_seq, limit)
        next_since = entries[-1].seq if entries else since_seq
        return entries, next_since

    def query_topic(
        self, topic: str, since_seq: int = 0, limit: int = 50
    ) -> tuple[list[EventLogEntry], int]:
        key = topic.casefold()
        matches: list[EventLogEntry] = []
        last = since_seq
        for entry in self.log.entries_since(since_seq):
            last = entry.seq
            if key in extract_topics(entry.message.text, self.window.stopwords):
                matches.append(entry)
                if len(matches) >= limit:
                    break
        next_since = matches[-1].seq if matches else last
        return matches, next_since

    def query_map(
        self, topic: Optional[str] = None, circle: Optional[GeoCircle] = None
    ) -> list[tuple[GeoPoint, int]]:
        key = topic.casefold() if topic else None
        pins = []
        for entry in self.log.all_entries():
            msg = entry.message
            if msg.geo is None:
                continue
            if key is not None and key not in extract_topics(
                msg.text, self.window.stopwords
            ):
                continue
            if circle is not None and not circle.contains(msg.geo):
                continue
            pins.append((msg.geo, msg.id))
        return pins

    def query_profile(self, handle: str) -> Account:
        ra = self.roster.get(handle)
        if ra is not None:
            return ra.account
        if handle in self.plan.manifest.username_pool:
            return Account(
                handle=handle, kind=AccountKind.CITIZEN, visibility=VisibilityLevel.LOW
            )
        for msg in self._messages_by_id.values():
            if msg.author == handle:
                return Account(
                    handle=handle, kind=AccountKind.CITIZEN, visibility=VisibilityLevel.LOW
                )
        raise NotFound(f"no profile for handle {handle!r}")

    def clock_info(self) -> dict:
        return {
            **self.clock.to_dict(),
            "banner": self.banner,
            "last_seq": self.log.last_seq,
            "pending": self.pending_count,
            "replay_finished": self.replay_finished,
        }


async def replay_plan_async(
    plan: SchedulePlan,
    roster: Roster,
    *,
    compression: float = 60.0,
    seed: int = 0,
    log_path: Optional[Union[str, Path]] = None,
) -> ExerciseRuntime:
    """Run a full uninterrupted replay (no clients) and return the runtime
    with its completed event log."""
    runtime = ExerciseRuntime(
        plan, roster, compression=compression, seed=seed, log_path=log_path
    )
    runtime.start_replay()
    await runtime.wait_idle()
    await runtime.close()
    return runtime


def replay_plan(plan: SchedulePlan, roster: Roster, **kwargs) -> ExerciseRuntime:
    return asyncio.run(replay_plan_async(plan, roster, **kwargs))


# --- FastAPI app -------------------------------------------------------------

_ERROR_STATUS = {
    AuthError: 401,
    Forbidden: 403,
    NotFound: 404,
    AlreadyRunning: 409,
    EmptyText: 422,
    Overlength: 422,
}


def create_app(runtime: ExerciseRuntime) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runtime.start_replay()
        yield
        await runtime.close()

    app = FastAPI(title="drillstream", lifespan=lifespan)
    app.state.runtime = runtime

    @app.exception_handler(DrillstreamError)
    async def _handle_engine_error(request: Request, exc: DrillstreamError):
        from fastapi.responses import JSONResponse

        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def require_session(authorization: Optional[str] = Header(None)) -> Session:
        token = None
        if authorization and authorization.lower().startswith("bearer "):
            token = authorization[7:].strip()
        return runtime.session_for(token)

    def _entry_model(entry: EventLogEntry) -> EventEntryModel:
        return EventEntryModel.model_validate(entry.to_dict())

    def _clock_model() -> ClockModel:
        return ClockModel.model_validate(runtime.clock_info())

    @app.post("/session", response_model=SessionResponse)
    def create_session(req: SessionRequest):
        session = runtime.login(req.handle, req.password)
        return SessionResponse(
            token=session.token,
            handle=session.account.handle,
            kind=session.account.kind.value,
            visibility=session.account.visibility.value,
            banner=runtime.banner,
            clock=_clock_model(),
        )

    @app.post("/messages", response_model=PostResponse)
    async def post_message(req: PostRequest, session: Session = Depends(require_session)):
        geo = None
        if req.lat is not None and req.lon is not None:
            geo = GeoPoint(lat=req.lat, lon=req.lon)
        msg, seq = await runtime.post_message(session, req.text, geo)
        return PostResponse(id=msg.id, seq=seq)

    @app.post("/retweets", response_model=PostResponse)
    async def retweet(req: RetweetRequest, session: Session = Depends(require_session)):
        msg, seq = await runtime.retweet(session, req.message_id)
        return PostResponse(id=msg.id, seq=seq)

    @app.post("/inject", response_model=PostResponse)
    async def inject(req: InjectRequest, session: Session = Depends(require_session)):
        msg, seq = await runtime.inject(
            session, req.text, VisibilityLevel(req.visibility), req.author_handle
        )
        return PostResponse(id=msg.id, seq=seq)

    @app.get("/trending", response_model=TrendingResponse)
    def trending(k: int = Query(20, ge=1, le=100)):
        entries = runtime.query_trending(k)
        return TrendingResponse(
            entries=[
                TrendingEntryModel(topic=e.topic, count=e.count, rank=e.rank)
                for e in entries
            ]
        )

    @app.get("/topics/{topic}", response_model=FeedResponse)
    def topic_feed(topic: str, since: int = 0, limit: int = Query(50, ge=1, le=500)):
        entries, next_since = runtime.query_topic(topic, since, limit)
        return FeedResponse(
            entries=[_entry_model(e) for e in entries], next_since=next_since
        )

    @app.get("/stream", response_model=FeedResponse)
    def stream(since: int = 0, limit: int = Query(50, ge=1, le=500)):
        entries, next_since = runtime.query_unfiltered(since, limit)
        return FeedResponse(
            entries=[_entry_model(e) for e in entries], next_since=next_since
        )

    @app.get("/map", response_model=MapResponse)
    def map_pins(
        topic: Optional[str] = None,
        lat: Optional[float] = None,
        lon: Optional[float] = None,
        radius_m: Optional[float] = None,
    ):
        circle = None
        given = [v is not None for v in (lat, lon, radius_m)]
        if any(given) and not all(given):
            from fastapi import HTTPException

            raise HTTPException(422, "lat, lon and radius_m must be given together")
        if all(given):
            circle = GeoCircle(center=GeoPoint(lat=lat, lon=lon), radius_m=radius_m)
        pins = runtime.query_map(topic, circle)
        return MapResponse(
            pins=[MapPin(lat=g.lat, lon=g.lon, id=mid) for g, mid in pins]
        )

    @app.get("/profiles/{handle}", response_model=ProfileResponse)
    def profile(handle: str):
        account = runtime.query_profile(handle)
        return ProfileResponse(
            handle=account.handle,
            kind=account.kind.value,
            visibility=account.visibility.value,
            profile_url=account.profile_url,
        )

    @app.get("/clock", response_model=ClockModel)
    def clock():
        return _clock_model()

    @app.post("/clock", response_model=ClockModel)
    def update_clock(req: ClockUpdateRequest, session: Session = Depends(require_session)):
        runtime.set_paused(session, req.paused)
        return _clock_model()

    @app.websocket("/subscribe")
    async def subscribe(ws: WebSocket):
        token = ws.query_params.get("token")
        try:
            runtime.session_for(token)
        except AuthError:
            await ws.close(code=4401)
            return
        await ws.accept()
        try:
            since = int(ws.query_params.get("since", runtime.log.last_seq))
        except ValueError:
            since = runtime.log.last_seq
        queue: asyncio.Queue = asyncio.Queue()
        async with runtime.lock:
            backlog = runtime.log.entries_since(since)
            runtime.add_subscriber(queue)
        last = since
        try:
            for entry in backlog:
                await ws.send_text(entry.to_json())
                last = entry.seq
            while True:
                entry = await queue.get()
                if entry.seq <= last:
                    continue
                await ws.send_text(entry.to_json())
                last = entry.seq
        except WebSocketDisconnect:
            pass
        finally:
            runtime.remove_subscriber(queue)

    return app
