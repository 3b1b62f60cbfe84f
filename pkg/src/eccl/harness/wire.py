"""Newline-delimited JSON protocol between the harness (environment side) and an agent.

server -> agent  {"type":"obs","episode":id,"step":n,"observation":..,"mode":..,
                  "goal":..?,"knowledge":..?,"budget_left":n}
agent -> server  {"type":"act","episode":id,"action":"go to bed 1"}
server -> agent  {"type":"end","episode":id,"success":bool,"ecc":x?}

Each episode has at most one outstanding request. Several episodes may share
one connection; replies are routed by episode id.
"""
from __future__ import annotations

import json
import logging
import queue
import shlex
import socket
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .. import rng as rngmod
from ..checkpoints import build_checkpoints
from ..eta import summarize
from ..policies.softmax import Decision
from ..rollout import EpisodeAborted, run_episode
from ..world.types import TaskGoal, Trajectory, WorldSpec

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0
_CLOSED = object()


class WireTimeout(EpisodeAborted):
    pass


class WireClosed(EpisodeAborted):
    pass


class LineChannel:
    """Line transport over a pair of text streams; a reader thread feeds a callback."""

    def __init__(self, rfile, wfile, closer=None):
        self._r = rfile
        self._w = wfile
        self._closer = closer
        self._wlock = threading.Lock()

    def send(self, line: str) -> None:
        with self._wlock:
            try:
                self._w.write(line + "\n")
                self._w.flush()
            except (BrokenPipeError, OSError, ValueError) as exc:
                raise WireClosed(f"write failed: {exc}") from None

    def lines(self):
        try:
            for line in self._r:
                yield line.rstrip("\r\n")
        except (OSError, ValueError):
            return

    def close(self) -> None:
        if self._closer is not None:
            self._closer()


def subprocess_channel(command: str) -> LineChannel:
    proc = subprocess.Popen(shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                            text=True, bufsize=1)

    def closer():
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    return LineChannel(proc.stdout, proc.stdin, closer)


def socket_channel(sock: socket.socket) -> LineChannel:
    rfile = sock.makefile("r", encoding="utf-8", newline="\n")
    wfile = sock.makefile("w", encoding="utf-8", newline="\n")

    def closer():
        # shut down first: closing rfile while the reader thread blocks in it would deadlock
        try:
            sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        for f in (wfile, rfile):
            try:
                f.close()
            except OSError:
                pass
        sock.close()

    return LineChannel(rfile, wfile, closer)


def listen_channel(host: str, port: int, accept_timeout: Optional[float] = None) -> LineChannel:
    srv = socket.create_server((host, port))
    srv.settimeout(accept_timeout)
    try:
        conn, _ = srv.accept()
    finally:
        srv.close()
    conn.settimeout(None)
    return socket_channel(conn)


class WireSession:
    """Request/reply multiplexer over one channel."""

    def __init__(self, channel: LineChannel):
        self.channel = channel
        self._waiting: dict[str, queue.Queue] = {}
        self._lock = threading.Lock()
        self._closed = False
        self.dropped: list[str] = []
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        for line in self.channel.lines():
            if not line.strip():
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                msg = None
            self._route(msg, line)
        with self._lock:
            self._closed = True
            waiting = list(self._waiting.values())
        for q in waiting:
            q.put(_CLOSED)

    def _route(self, msg, raw: str) -> None:
        with self._lock:
            target = None
            if isinstance(msg, dict) and isinstance(msg.get("episode"), str):
                target = self._waiting.get(msg["episode"])
            elif len(self._waiting) == 1:
                # no usable episode id: only unambiguous with a single pending request
                target = next(iter(self._waiting.values()))
            if target is None:
                self.dropped.append(raw)
                log.warning("dropping unroutable agent message: %.80s", raw)
                return
        target.put(msg if isinstance(msg, dict) else {"_malformed": raw})

    def request(self, episode: str, msg: dict, timeout: float = DEFAULT_TIMEOUT) -> dict:
        q: queue.Queue = queue.Queue()
        with self._lock:
            if self._closed:
                raise WireClosed("agent disconnected")
            if episode in self._waiting:
                raise RuntimeError(f"episode {episode} already has a request in flight")
            self._waiting[episode] = q
        try:
            self.channel.send(json.dumps(msg, sort_keys=True))
            try:
                reply = q.get(timeout=timeout)
            except queue.Empty:
                raise WireTimeout(f"no reply for episode {episode} within {timeout}s") from None
            if reply is _CLOSED:
                raise WireClosed("agent disconnected")
            return reply
        finally:
            with self._lock:
                self._waiting.pop(episode, None)

    def notify(self, msg: dict) -> None:
        try:
            self.channel.send(json.dumps(msg, sort_keys=True))
        except WireClosed:
            pass

    def close(self) -> None:
        self.channel.close()


class ExternalPolicy:
    """Policy whose decisions come from an agent across the wire."""

    name = "external"
    records_features = False

    def __init__(self, session: WireSession, episode: str = "0", budget: int = 50,
                 timeout: float = DEFAULT_TIMEOUT):
        self.session = session
        self.episode = episode
        self.budget = budget
        self.timeout = timeout
        self.transcript: list = []
        self._mode = "act"
        self._goal: Optional[str] = None
        self._knowledge: Optional[str] = None

    def begin(self, ctx) -> None:
        self._mode = ctx.mode
        self._goal = ctx.goal.text if ctx.goal is not None else None
        k = ctx.knowledge
        self._knowledge = k.render() if k is not None and not k.is_empty() else None

    def decide(self, ctx, rng=None) -> Decision:
        n = len(ctx.history)
        msg = {"type": "obs", "episode": self.episode, "step": n, "observation": ctx.view.last_obs,
               "mode": self._mode, "budget_left": self.budget - n}
        if self._goal is not None:
            msg["goal"] = self._goal
        if self._knowledge is not None:
            msg["knowledge"] = self._knowledge
        reply = self.session.request(self.episode, msg, self.timeout)
        self.transcript.append({"sent": msg, "received": reply})
        text = reply.get("action") if reply.get("type") == "act" else None
        if not isinstance(text, str):
            text = ""
        return Decision(None, text, 0.0, None, None)

    def end(self, success: bool, ecc: Optional[float] = None) -> None:
        msg = {"type": "end", "episode": self.episode, "success": bool(success)}
        if ecc is not None:
            msg["ecc"] = ecc
        self.session.notify(msg)


@dataclass
class WireJob:
    world: WorldSpec
    goal: Optional[TaskGoal] = None
    mode: str = "explore"            # explore | act | eta
    budget: int = 100
    max_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("explore", "act", "eta"):
            raise ValueError(f"unknown wire job mode {self.mode!r}")
        if self.mode != "explore" and self.goal is None:
            raise ValueError(f"{self.mode} jobs need a goal")


@dataclass
class WireEpisode:
    episode: str
    mode: str
    traj: Trajectory
    success: Optional[bool]
    ecc: Optional[float]
    invalid: bool
    transcript: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"episode": self.episode, "mode": self.mode, "world_id": self.traj.world_id,
                "steps": len(self.traj), "success": self.success, "ecc": self.ecc,
                "invalid": self.invalid}


def _episode(session, job: WireJob, eid: str, mode: str, knowledge, cps, timeout) -> WireEpisode:
    budget = job.budget if mode == "explore" else job.max_steps
    policy = ExternalPolicy(session, eid, budget, timeout)
    ep = run_episode(policy, job.world, mode, goal=job.goal if mode == "act" else None,
                     knowledge=knowledge, max_steps=budget, seed=job.seed,
                     cps=cps if mode == "explore" else None)
    success = None if mode == "explore" else ep.success
    if not ep.invalid:
        policy.end(bool(success), ep.ecc)
    return WireEpisode(eid, mode, ep.traj, success, ep.ecc, ep.invalid, policy.transcript)


def run_job(session: WireSession, job: WireJob, job_id: str,
            timeout: float = DEFAULT_TIMEOUT) -> list[WireEpisode]:
    cps = build_checkpoints(job.world)
    if job.mode == "explore":
        return [_episode(session, job, job_id, "explore", None, cps, timeout)]
    if job.mode == "act":
        return [_episode(session, job, job_id, "act", None, cps, timeout)]
    exp = _episode(session, job, f"{job_id}/explore", "explore", None, cps, timeout)
    if exp.invalid:
        return [exp]
    k = summarize(exp.traj)
    return [exp, _episode(session, job, f"{job_id}/act", "act", k, cps, timeout)]


def serve_wire_protocol(session: WireSession, jobs: Iterable[WireJob], concurrency: int = 1,
                        timeout: float = DEFAULT_TIMEOUT) -> list[WireEpisode]:
    """Run every job against the connected agent; results keep job order."""
    jobs = list(jobs)
    ids = [f"ep-{i}" for i in range(len(jobs))]
    if concurrency <= 1:
        out = [run_job(session, j, i, timeout) for j, i in zip(jobs, ids)]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            out = list(pool.map(lambda ji: run_job(session, ji[0], ji[1], timeout), zip(jobs, ids)))
    return [ep for group in out for ep in group]


def tally(episodes: list[WireEpisode]) -> dict:
    """Aggregate with invalid episodes excluded from every denominator."""
    valid = [e for e in episodes if not e.invalid]
    acts = [e for e in valid if e.mode == "act"]
    explores = [e for e in valid if e.mode == "explore"]
    return {
        "episodes": len(episodes),
        "invalid": len(episodes) - len(valid),
        "success_rate": (sum(bool(e.success) for e in acts) / len(acts)) if acts else None,
        "mean_ecc": (sum(e.ecc for e in explores) / len(explores)) if explores else None,
    }


def job_seed(root: int, index: int) -> int:
    return rngmod.child_seed(root, "wire", index)
