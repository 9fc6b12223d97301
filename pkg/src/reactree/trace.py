import csv
import io
import threading
from dataclasses import dataclass

TICK = "TICK"
HALT = "HALT"
STATUS_CHANGE = "STATUS_CHANGE"
BB_WRITE = "BB_WRITE"
SKILL_MSG = "SKILL_MSG"


@dataclass
class TraceEvent:
    tick: int
    path: str
    kind: str
    status: str = ""

    def as_row(self):
        return [str(self.tick), self.path, self.kind, self.status]


class TraceSink:
    """Ordered, thread-safe event log with optional line-oriented file output.

    Records are ``tick_no,node_path,event,status`` rows (csv quoting rules).
    A TICK event is opened when a node starts ticking and its status is
    filled in on return, so events stay in pre-order.
    """

    def __init__(self, path=None):
        self.events = []
        self.tick = 0
        self._lock = threading.Lock()
        self._flushed = 0
        self._file = open(path, "w", newline="", encoding="utf-8") if path else None

    def emit(self, path, kind, status="") -> TraceEvent:
        with self._lock:
            event = TraceEvent(self.tick, path, kind, str(status))
            self.events.append(event)
            return event

    def flush(self):
        with self._lock:
            pending = self.events[self._flushed:]
            self._flushed = len(self.events)
        if self._file is not None and pending:
            self._file.write(format_events(pending))
            self._file.flush()

    def close(self):
        self.flush()
        if self._file is not None:
            self._file.close()
            self._file = None

    def text(self) -> str:
        with self._lock:
            return format_events(list(self.events))

    def of_kind(self, kind):
        return [e for e in self.events if e.kind == kind]


def format_events(events) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for event in events:
        writer.writerow(event.as_row())
    return buf.getvalue()


def parse_trace(text):
    return [TraceEvent(int(r[0]), r[1], r[2], r[3]) for r in csv.reader(io.StringIO(text)) if r]
