"""Append-only exercise event log with gapless sequence numbers.

Every emission, live post, retweet, injection, and ghost retweet lands
here exactly once; the JSONL file is the single input to after-action
analysis. Listeners (push subscribers) are invoked synchronously on
append so a pushed entry is always byte-identical to the logged entry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, TextIO, Union

from .model import Microblog, canonical_json


class EventKind(str, Enum):
    EMITTED = "emitted"
    POSTED = "posted"
    RETWEETED = "retweeted"
    INJECTED = "injected"
    GHOST_RETWEET = "ghost_retweet"


@dataclass(frozen=True)
class EventLogEntry:
    seq: int
    wall_time: float
    scenario_time: float
    kind: EventKind
    message: Microblog

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "wall_time": self.wall_time,
            "scenario_time": self.scenario_time,
            "kind": self.kind.value,
            "message": self.message.to_dict(),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "EventLogEntry":
        return cls(
            seq=int(d["seq"]),
            wall_time=float(d["wall_time"]),
            scenario_time=float(d["scenario_time"]),
            kind=EventKind(d["kind"]),
            message=Microblog.from_dict(d["message"]),
        )


class EventLog:
    """In-memory log with optional JSONL persistence. Single logical
    writer; readers page over an immutable prefix."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self._entries: list[EventLogEntry] = []
        self._listeners: list[Callable[[EventLogEntry], None]] = []
        self._fh: Optional[TextIO] = None
        if path is not None:
            self._fh = open(path, "w", encoding="utf-8")

    @property
    def last_seq(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def append(
        self, kind: EventKind, message: Microblog, wall_time: float, scenario_time: float
    ) -> EventLogEntry:
        entry = EventLogEntry(
            seq=len(self._entries) + 1,
            wall_time=wall_time,
            scenario_time=scenario_time,
            kind=kind,
            message=message,
        )
        self._entries.append(entry)
        if self._fh is not None:
            self._fh.write(entry.to_json() + "\n")
            self._fh.flush()
        for listener in self._listeners:
            listener(entry)
        return entry

    def add_listener(self, fn: Callable[[EventLogEntry], None]) -> None:
        self._listeners.append(fn)

    def remove_listener(self, fn: Callable[[EventLogEntry], None]) -> None:
        if fn in self._listeners:
            self._listeners.remove(fn)

    def entries_since(self, since_seq: int, limit: Optional[int] = None) -> list[EventLogEntry]:
        """Entries with seq > since_seq, in order, up to limit."""
        start = max(0, since_seq)
        chunk = self._entries[start:]
        if limit is not None:
            chunk = chunk[:limit]
        return chunk

    def all_entries(self) -> list[EventLogEntry]:
        return list(self._entries)

    def get(self, seq: int) -> Optional[EventLogEntry]:
        if 1 <= seq <= len(self._entries):
            return self._entries[seq - 1]
        return None

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_log(path: Union[str, Path]) -> list[EventLogEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(EventLogEntry.from_dict(json.loads(line)))
    return entries


def iter_log(path: Union[str, Path]) -> Iterable[EventLogEntry]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield EventLogEntry.from_dict(json.loads(line))
