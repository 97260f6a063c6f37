"""Sliding-window topic counting and top-K trending ranking.

Topics are hashtags plus alphabetic unigrams of length >= 4 that are not in
the committed stopword list. Counting keys are case-folded; the window keeps
the first-seen surface form of each hashtag for display. The window covers
the half-open interval (now - K, now].
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .errors import MonotonicityError
from .model import Microblog, _HASHTAG_RE

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
_MIN_WORD_LEN = 4


def _load_default_stopwords() -> frozenset[str]:
    text = resources.files("drillstream").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


DEFAULT_STOPWORDS = _load_default_stopwords()


def extract_topics_display(
    text: str, stopwords: Optional[frozenset[str]] = None
) -> list[tuple[str, str]]:
    """(counting key, display form) pairs, deduplicated by key in first-seen
    order. Hashtags keep their surface case for display; words display
    case-folded."""
    if stopwords is None:
        stopwords = DEFAULT_STOPWORDS
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    remainder = []
    last = 0
    for m in _HASHTAG_RE.finditer(text):
        tag = m.group(0)
        key = tag.casefold()
        if key not in seen:
            seen.add(key)
            pairs.append((key, tag))
        remainder.append(text[last : m.start()])
        last = m.end()
    remainder.append(text[last:])
    for m in _WORD_RE.finditer("".join(remainder)):
        word = m.group(0).casefold()
        if len(word) < _MIN_WORD_LEN or word in stopwords:
            continue
        if word not in seen:
            seen.add(word)
            pairs.append((word, word))
    return pairs


def extract_topics(text: str, stopwords: Optional[frozenset[str]] = None) -> list[str]:
    """Case-folded topic keys for one message, deduplicated."""
    return [key for key, _display in extract_topics_display(text, stopwords)]


@dataclass(frozen=True)
class TrendingEntry:
    topic: str
    count: int
    rank: int


class TopicWindow:
    """Single-writer sliding window of (time, topic) observations.

    Observations must be fed in roughly monotone time order; arrivals more
    than ``tolerance_s`` behind the newest observed time raise
    MonotonicityError. Counts always reflect entries in (now - K, now].
    """

    def __init__(
        self,
        window_s: float = 300.0,
        *,
        tolerance_s: float = 60.0,
        stopwords: Optional[frozenset[str]] = None,
    ):
        if window_s <= 0:
            raise ValueError("window span must be positive")
        self.window_s = float(window_s)
        self.tolerance_s = float(tolerance_s)
        self.stopwords = stopwords if stopwords is not None else DEFAULT_STOPWORDS
        self.now = float("-inf")
        self._entries: deque[tuple[float, str]] = deque()
        self._counts: dict[str, int] = {}
        self._display: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def counts(self) -> dict[str, int]:
        return dict(self._counts)

    def count(self, topic: str) -> int:
        return self._counts.get(topic.casefold(), 0)

    def advance_to(self, t: float) -> None:
        """Move the window clock forward (never backward) and evict."""
        if t > self.now:
            self.now = t
        cutoff = self.now - self.window_s
        entries = self._entries
        while entries and entries[0][0] <= cutoff:
            _, key = entries.popleft()
            remaining = self._counts[key] - 1
            if remaining:
                self._counts[key] = remaining
            else:
                del self._counts[key]
                self._display.pop(key, None)

    def observe_text(self, t: float, text: str) -> None:
        if self.now != float("-inf") and t < self.now - self.tolerance_s:
            raise MonotonicityError(
                f"observation at {t} is more than {self.tolerance_s}s behind {self.now}"
            )
        self.advance_to(t)
        if t <= self.now - self.window_s:
            return  # older than the window itself; nothing to retain
        for key, display in extract_topics_display(text, self.stopwords):
            self._insert(t, key, display)

    def observe(self, msg: Microblog) -> None:
        self.observe_text(msg.scenario_time, msg.text)

    def _insert(self, t: float, key: str, display: str) -> None:
        entries = self._entries
        if entries and t < entries[-1][0]:
            # rare slightly-late arrival: keep the deque time-ordered
            tail: list[tuple[float, str]] = []
            while entries and entries[-1][0] > t:
                tail.append(entries.pop())
            entries.append((t, key))
            while tail:
                entries.append(tail.pop())
        else:
            entries.append((t, key))
        self._counts[key] = self._counts.get(key, 0) + 1
        self._display.setdefault(key, display)

    def top_k(self, k: int) -> list[TrendingEntry]:
        """k highest-count topics; ties break lexicographically ascending
        on the case-folded key."""
        if k <= 0:
            return []
        ranked = sorted(self._counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        return [
            TrendingEntry(topic=self._display.get(key, key), count=count, rank=i + 1)
            for i, (key, count) in enumerate(ranked)
        ]

    def topmost_count(self) -> int:
        if not self._counts:
            return 0
        return max(self._counts.values())

    def topic_in_top_k(self, topic: str, k: int) -> bool:
        key = topic.casefold()
        count = self._counts.get(key)
        if count is None:
            return False
        better = 0
        for other, c in self._counts.items():
            if c > count or (c == count and other < key):
                better += 1
                if better >= k:
                    return False
        return True
