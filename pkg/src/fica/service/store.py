"""In-memory session store with per-session revision counters.

Sessions are independent; inside one session every mutation happens under
the session lock and bumps the revision, so concurrent readers observe
either the previous or the new state, never a blend. Fitted models are
immutable; selection changes never touch them.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..basis import BasisExpansion
from ..errors import FicaError
from ..fpca import FpcaModel
from ..ica import FicaModel
from ..tuning import TuningResult


class UnknownSessionError(FicaError):
    code = "unknown-session"


class StaleRevisionError(FicaError):
    code = "stale-revision"


@dataclass
class Session:
    id: str
    expansion: BasisExpansion
    times: np.ndarray | None = None
    revision: int = 0
    tuning: TuningResult | None = None
    model: FpcaModel | None = None
    fica: FicaModel | None = None
    selection: tuple[int, ...] = ()
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def snapshot(self) -> dict:
        """Consistent view of the mutable fields, taken under the lock."""
        with self.lock:
            return {
                "revision": self.revision,
                "tuning": self.tuning,
                "model": self.model,
                "fica": self.fica,
                "selection": self.selection,
            }


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, expansion: BasisExpansion, times=None) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], expansion=expansion, times=times)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return session

    def drop(self, session_id: str) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)

    def mutate(self, session_id: str, expected_revision: int | None, apply) -> Session:
        """Run ``apply(session)`` under the session lock and bump the revision.

        ``expected_revision`` of None skips the optimistic check; otherwise a
        mismatch raises :class:`StaleRevisionError` without applying.
        """
        session = self.get(session_id)
        with session.lock:
            if expected_revision is not None and expected_revision != session.revision:
                raise StaleRevisionError(
                    f"revision {expected_revision} is stale (current {session.revision})"
                )
            apply(session)
            session.revision += 1
        return session
