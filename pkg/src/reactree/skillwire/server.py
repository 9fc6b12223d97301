"""Simulated skill server.

:meth:`SkillServer.handle` answers one request. Each started chart runs on
its own thread, stepping once per ``step_period`` of the server clock, so a
shared :class:`~reactree.clock.SimClock` keeps whole scenarios reproducible.
:func:`serve` exposes the same handler over TCP, one thread per connection.
"""

import logging
import socketserver
import threading
import time

from ..clock import RealClock
from ..errors import DecodeError
from .charts import CHARTS, CONDITIONS, ChartRun
from .protocol import SkillMessage, decode, encode

log = logging.getLogger(__name__)


class Episode:
    def __init__(self, run: ChartRun, clock, period):
        self.run = run
        self.clock = clock
        self.period = period
        self.stop_event = threading.Event()
        self.error = None
        self.attachment = clock.attach()
        self.thread = threading.Thread(target=self._loop, name=f"skill:{run.chart.name}", daemon=True)

    def _loop(self):
        try:
            while self.run.outcome is None:
                if not self.clock.sleep(self.period, cancel=self.stop_event):
                    self.run.stop()
                    break
                self.run.step()
        except Exception as exc:
            log.exception("skill %s crashed", self.run.chart.name)
            self.error = exc
        finally:
            self.attachment.release()

    @property
    def outcome(self):
        if self.error is not None:
            return "failure"
        return self.run.outcome

    def stop(self, timeout):
        self.stop_event.set()
        self.clock.wake()
        self.thread.join(timeout)
        return not self.thread.is_alive()


class SkillServer:
    def __init__(self, world, charts=None, conditions=None, clock=None, step_period=0.1, stop_timeout=2.0):
        self.world = world
        self.charts = dict(CHARTS if charts is None else charts)
        self.conditions = dict(CONDITIONS if conditions is None else conditions)
        self.clock = clock or RealClock()
        self.step_period = step_period
        self.stop_timeout = stop_timeout
        self.stop_delay = 0.0
        self.episodes = {}
        self.history = []
        self._lock = threading.Lock()

    def handle(self, msg: SkillMessage) -> SkillMessage:
        if msg.op == "start":
            return self._start(msg)
        if msg.op == "status":
            return self._status(msg)
        if msg.op == "stop":
            return self._stop(msg)
        return msg.reply("error", f"unexpected op {msg.op!r}")

    def _start(self, msg):
        if msg.skill in self.conditions:
            try:
                with self.world.lock:
                    ok = self.conditions[msg.skill](self.world, msg.args)
            except (KeyError, ValueError) as exc:
                return msg.reply("error", f"bad arguments for {msg.skill}: {exc}")
            return msg.reply("result", "success" if ok else "failure")
        chart = self.charts.get(msg.skill)
        if chart is None:
            return msg.reply("error", f"unknown skill {msg.skill!r}")
        # a new start preempts an episode of the same skill, like a new nav goal
        self._stop(msg)
        episode = Episode(ChartRun(chart, self.world, msg.args, self.step_period), self.clock, self.step_period)
        with self._lock:
            self.episodes[msg.skill] = episode
            self.history.append(episode.run)
        episode.thread.start()
        return msg.reply("ack")

    def _status(self, msg):
        with self._lock:
            episode = self.episodes.get(msg.skill)
            if episode is None:
                return msg.reply("status", "idle")
            outcome = episode.outcome
            if outcome is None:
                return msg.reply("status", "running")
            del self.episodes[msg.skill]
        episode.thread.join()
        payload = "success" if outcome == "success" else "failure"
        return msg.reply("result", payload, episode.run.outputs)

    def _stop(self, msg):
        with self._lock:
            episode = self.episodes.pop(msg.skill, None)
        if self.stop_delay:
            time.sleep(self.stop_delay)
        if episode is not None and not episode.stop(self.stop_timeout):
            return msg.reply("error", f"{msg.skill} did not settle after stop")
        return msg.reply("ack")

    def shutdown(self):
        with self._lock:
            episodes = list(self.episodes.values())
            self.episodes.clear()
        for episode in episodes:
            episode.stop(self.stop_timeout)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server.skill_server
        self.server.connections.add(self.connection)
        try:
            for line in self.rfile:
                try:
                    msg = decode(line)
                except DecodeError as exc:
                    self.wfile.write(encode(SkillMessage(0, "error", "", {}, str(exc))))
                    continue
                self.wfile.write(encode(server.handle(msg)))
        except OSError:
            pass
        finally:
            self.server.connections.discard(self.connection)


class SkillTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, skill_server):
        super().__init__(address, _Handler)
        self.skill_server = skill_server
        self.connections = set()

    @property
    def endpoint(self):
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def drop_connections(self):
        """Close every client socket (fault injection)."""
        for conn in list(self.connections):
            try:
                conn.shutdown(2)
            except OSError:
                pass
            conn.close()

    def start_background(self):
        thread = threading.Thread(target=self.serve_forever, name="skill-server", daemon=True)
        thread.start()
        return thread

    def stop(self):
        self.shutdown()
        self.drop_connections()
        self.server_close()
        self.skill_server.shutdown()


def parse_endpoint(endpoint):
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {endpoint!r}")
    return host or "127.0.0.1", int(port)


def serve(world, charts=None, endpoint="127.0.0.1:0", clock=None, step_period=0.1):
    """Bind a TCP skill server; call ``serve_forever`` or ``start_background``."""
    skill_server = SkillServer(world, charts, clock=clock, step_period=step_period)
    return SkillTCPServer(parse_endpoint(endpoint), skill_server)
