"""Per-session attempt counters with optional JSON snapshot persistence."""
from __future__ import annotations

import json
import threading
from pathlib import Path


class AttemptsExhausted(Exception):
    def __init__(self, used: int, maximum: int):
        self.used = used
        self.maximum = maximum
        super().__init__(f"all {maximum} attempts used")


class SessionStore:
    """Counts successful submissions per (session, question).

    reserve/release form the atomic read-modify-write pair: a slot is taken
    before grading and handed back if the backend fails, so counters never
    exceed the question's maximum even under concurrent submits.
    """

    def __init__(self, snapshot_path: str | Path | None = None):
        self._lock = threading.Lock()
        self._counts: dict[str, int] = {}
        self._path = Path(snapshot_path) if snapshot_path else None
        if self._path and self._path.exists():
            self._counts = json.loads(self._path.read_text(encoding="utf-8"))

    @staticmethod
    def _key(session_id: str, question_id: str) -> str:
        return f"{session_id}\x00{question_id}"

    def used(self, session_id: str, question_id: str) -> int:
        with self._lock:
            return self._counts.get(self._key(session_id, question_id), 0)

    def reserve(self, session_id: str, question_id: str, maximum: int) -> int:
        """Take one attempt slot; returns the count including this attempt."""
        key = self._key(session_id, question_id)
        with self._lock:
            used = self._counts.get(key, 0)
            if used >= maximum:
                raise AttemptsExhausted(used, maximum)
            self._counts[key] = used + 1
            return used + 1

    def release(self, session_id: str, question_id: str) -> None:
        key = self._key(session_id, question_id)
        with self._lock:
            if self._counts.get(key, 0) > 0:
                self._counts[key] -= 1

    def save(self) -> None:
        if self._path:
            with self._lock:
                self._path.write_text(json.dumps(self._counts), encoding="utf-8")
