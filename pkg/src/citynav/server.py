"""Gym-style environment server: line-delimited JSON requests over TCP.

Every request line gets exactly one response line. All world mutation funnels
through a single lock; in fast mode the sim clock advances while a step request
waits for its action to complete, in realtime mode a pacer thread drives the
clock at wall speed and step requests block until completion.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import time
from typing import Optional

from .agents import AgentBusy, MessageTooLong, RobotAction, UnknownAgent, observe
from .config import EngineConfig
from .mapio import load_map, map_hash
from .session import MMNavSession, MRSSession
from .tasks.mmnav import MMNavTask
from .tasks.mrs import MRSTask
from .world import BUFFER_TICK_UNITS, UNITS_PER_SECOND, World


class EngineSession:
    """One loaded map + one active task, shared by all connections."""

    def __init__(self, config: EngineConfig):
        self.config = config
        if not config.map_path:
            raise ValueError("server config needs map_path")
        self.city_map = load_map(config.map_path)
        self.map_hash = map_hash(self.city_map)
        self.task_doc = None
        if config.task_path:
            self.task_doc = json.loads(open(config.task_path, encoding="utf-8").read())
        self.lock = threading.RLock()
        self.world: Optional[World] = None
        self.session = None
        self._build()

    def _build(self) -> None:
        with self.lock:
            if self.task_doc is None:
                self.world = World(self.city_map, with_traffic=bool(self.city_map.traffic))
                self.session = None
                return
            benchmark = self.task_doc.get("benchmark")
            if benchmark == "mmnav":
                task = MMNavTask.from_dict(self.task_doc)
                self.world = World(self.city_map, with_traffic=task.difficulty == "hard")
                self.session = MMNavSession(self.world, task)
            elif benchmark == "mrs":
                task = MRSTask.from_dict(self.task_doc)
                self.world = World(self.city_map, with_traffic=bool(self.city_map.traffic))
                self.session = MRSSession(self.world, task)
            else:
                raise ValueError(f"unknown benchmark in task file: {benchmark!r}")

    @property
    def agent_ids(self) -> list[str]:
        with self.lock:
            return sorted(self.world.robots)

    def episode_status(self) -> str:
        return self.session.status if self.session is not None else "none"


def _error(code: str, message: str) -> dict:
    return {"status": "error", "error": {"code": code, "message": message}}


def _map_geometry(engine: EngineSession) -> dict:
    """Static geometry layers for viewers: roads, sidewalks, buildings, elements."""
    city = engine.city_map
    return {
        "hash": engine.map_hash,
        "bounds": [city.bounds.min.x, city.bounds.min.y, city.bounds.max.x, city.bounds.max.y],
        "roads": [
            {
                "id": r.id,
                "axis": r.axis,
                "centerline": [[r.centerline[0].x, r.centerline[0].y], [r.centerline[1].x, r.centerline[1].y]],
                "width": r.width,
                "sidewalk_width": city.spec.sidewalk_width,
            }
            for r in city.roads
        ],
        "intersections": [
            {"id": i.id, "center": [i.center.x, i.center.y], "signal": i.signal_id} for i in city.intersections
        ],
        "buildings": [
            {
                "id": b.id,
                "box": [b.footprint.min.x, b.footprint.min.y, b.footprint.max.x, b.footprint.max.y],
                "door": [b.front_door.x, b.front_door.y],
                "tag": b.asset_tag,
            }
            for b in city.buildings
        ],
        "elements": [
            {
                "id": e.id,
                "class": e.element_class,
                "box": [e.footprint.min.x, e.footprint.min.y, e.footprint.max.x, e.footprint.max.y],
            }
            for e in city.elements
        ],
    }


def _world_snapshot(engine: EngineSession) -> dict:
    """Dynamic world state for viewers: agent poses, signals, instruction."""
    world = engine.world
    agents = []
    for aid, kind, pos, radius in world.dynamic_discs():
        record = {"id": aid, "kind": kind, "x": pos.x, "y": pos.y, "radius": radius}
        if kind == "robot":
            robot = world.robot(aid)
            record["heading"] = robot.heading
            record["available"] = world.buffer.is_available(aid)
        elif kind == "vehicle":
            agent = next(v for v in world.vehicles if v.id == aid)
            record["heading"] = agent.heading
            record["speed"] = agent.speed
        else:
            agent = next(p for p in world.pedestrians if p.id == aid)
            record["heading"] = agent.heading
        agents.append(record)
    signals = [
        {"intersection": iid, "phase": light.phase, "remaining": light.remaining}
        for iid, light in world.all_light_states().items()
    ]
    instructions = {
        aid: world.robot(aid).instruction_payload and {
            k: v for k, v in world.robot(aid).instruction_payload.items() if k != "hint"
        }
        for aid in sorted(world.robots)
    }
    return {
        "sim_time": world.sim_time,
        "tick": world.tick_index,
        "agents": agents,
        "signals": signals,
        "instructions": instructions,
        "episode": engine.episode_status(),
    }


_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class _Handler(socketserver.StreamRequestHandler):
    """Serves the line protocol directly, or the same protocol in WebSocket text
    frames when the connection opens with an HTTP Upgrade (browser teleop)."""

    def handle(self) -> None:
        try:
            first = self.rfile.readline()
        except (ConnectionResetError, OSError):
            return
        if not first:
            return
        if first.startswith(b"GET "):
            self._handle_websocket()
            return
        if not self._handle_line(first):
            return
        while True:
            try:
                line = self.rfile.readline()
            except (ConnectionResetError, OSError):
                return
            if not line:
                return
            if not self._handle_line(line):
                return

    def _process(self, text: str) -> tuple[dict, bool]:
        """Returns (response, keep_going)."""
        try:
            request = json.loads(text)
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except ValueError as exc:
            return _error("BadRequest", f"malformed request: {exc}"), True
        try:
            response = self.server.dispatch(request)
        except UnknownAgent as exc:
            response = _error("UnknownAgent", str(exc))
        except AgentBusy as exc:
            response = _error("AgentBusy", f"agent {exc} is executing an action")
        except MessageTooLong as exc:
            response = _error("MessageTooLong", str(exc))
        except Exception as exc:  # noqa: BLE001 - protocol totality over crashes
            response = _error("InternalError", f"{type(exc).__name__}: {exc}")
        if request.get("op") == "shutdown":
            threading.Thread(target=self.server.shutdown, daemon=True).start()
            return response, False
        return response, True

    def _handle_line(self, line: bytes) -> bool:
        text = line.decode("utf-8", errors="replace").strip()
        if not text:
            return True
        response, keep_going = self._process(text)
        self._send(response)
        return keep_going

    def _send(self, doc: dict) -> None:
        try:
            self.wfile.write((json.dumps(doc, sort_keys=True) + "\n").encode("utf-8"))
            self.wfile.flush()
        except (BrokenPipeError, OSError):
            pass

    # -- websocket framing ------------------------------------------------------

    def _handle_websocket(self) -> None:
        import base64
        import hashlib

        headers = {}
        while True:
            line = self.rfile.readline()
            if not line or line in (b"\r\n", b"\n"):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if not key:
            self.wfile.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return
        accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode("latin-1")).digest()).decode()
        self.wfile.write(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode("latin-1")
        )
        self.wfile.flush()
        while True:
            frame = self._read_ws_frame()
            if frame is None:
                return
            opcode, payload = frame
            if opcode == 0x8:  # close
                self._send_ws(0x8, b"")
                return
            if opcode == 0x9:  # ping
                self._send_ws(0xA, payload)
                continue
            if opcode not in (0x1, 0x2):
                continue
            response, keep_going = self._process(payload.decode("utf-8", errors="replace"))
            self._send_ws(0x1, json.dumps(response, sort_keys=True).encode("utf-8"))
            if not keep_going:
                return

    def _read_ws_frame(self):
        try:
            header = self.rfile.read(2)
            if len(header) < 2:
                return None
            opcode = header[0] & 0x0F
            masked = bool(header[1] & 0x80)
            length = header[1] & 0x7F
            if length == 126:
                length = int.from_bytes(self.rfile.read(2), "big")
            elif length == 127:
                length = int.from_bytes(self.rfile.read(8), "big")
            mask = self.rfile.read(4) if masked else b""
            payload = self.rfile.read(length) if length else b""
            if masked and payload:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            return opcode, payload
        except (ConnectionResetError, OSError):
            return None

    def _send_ws(self, opcode: int, data: bytes) -> None:
        header = bytes([0x80 | opcode])
        n = len(data)
        if n < 126:
            header += bytes([n])
        elif n < 65536:
            header += bytes([126]) + n.to_bytes(2, "big")
        else:
            header += bytes([127]) + n.to_bytes(8, "big")
        try:
            self.wfile.write(header + data)
            self.wfile.flush()
        except (BrokenPipeError, OSError):
            pass


class EnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: EngineConfig):
        super().__init__((config.host, config.port), _Handler)
        self.engine = EngineSession(config)
        self.config = config
        self._stop_pacer = threading.Event()
        self._pacer: Optional[threading.Thread] = None
        if config.mode == "realtime":
            self._pacer = threading.Thread(target=self._pace, daemon=True)
            self._pacer.start()

    def _pace(self) -> None:
        engine = self.engine
        started = time.monotonic()
        base_units = engine.world.units
        while not self._stop_pacer.is_set():
            time.sleep(0.005)
            target = base_units + int((time.monotonic() - started) * UNITS_PER_SECOND)
            with engine.lock:
                if engine.world.units < target:
                    engine.world.advance_to_units(target)

    def shutdown(self) -> None:
        self._stop_pacer.set()
        super().shutdown()

    # -- op handling ----------------------------------------------------------

    def dispatch(self, request: dict) -> dict:
        op = request.get("op")
        engine = self.engine
        if op == "info":
            with engine.lock:
                return {
                    "status": "ok",
                    "config": engine.config.to_dict(),
                    "map_hash": engine.map_hash,
                    "agents": engine.agent_ids,
                    "benchmark": engine.task_doc.get("benchmark") if engine.task_doc else None,
                    "episode": engine.episode_status(),
                    "sim_time": engine.world.sim_time,
                }
        if op == "reset":
            agent = request.get("agent")
            with engine.lock:
                if engine.session is not None and engine.session.status != "running":
                    self._rebuild()
                if agent is None:
                    return {"status": "ok", "agents": engine.agent_ids, "episode": engine.episode_status()}
                robot = engine.world.robot(agent)
                return {
                    "status": "ok",
                    "observation": (robot.last_observation or observe(engine.world, agent)).to_dict(),
                    "episode": engine.episode_status(),
                }
        if op == "observe":
            agent = request.get("agent")
            with engine.lock:
                return {"status": "ok", "observation": observe(engine.world, agent).to_dict()}
        if op == "map":
            with engine.lock:
                return {"status": "ok", "map": _map_geometry(engine)}
        if op == "snapshot":
            with engine.lock:
                return {"status": "ok", "snapshot": _world_snapshot(engine)}
        if op == "transcript":
            with engine.lock:
                return {"status": "ok", "transcript": list(engine.world.transcript), "episode": engine.episode_status()}
        if op in ("step", "evaluate", "check_task_complete", "send_message"):
            agent = request.get("agent")
            if op == "step":
                action = RobotAction.from_dict(request.get("action", {}))
            elif op == "send_message":
                action = RobotAction("send_message", text=request.get("text", ""))
            else:
                action = RobotAction(op)
            return self._step(agent, action)
        if op == "shutdown":
            return {"status": "ok"}
        return _error("UnknownOp", f"unsupported op: {op!r}")

    def _rebuild(self) -> None:
        self.engine._build()

    def _step(self, agent_id: str, action: RobotAction) -> dict:
        engine = self.engine
        with engine.lock:
            engine.world.submit_action(agent_id, action)
            log_mark = len(engine.world.action_log)
        self._wait_for_completion(agent_id)
        with engine.lock:
            record = None
            for rec in engine.world.action_log[log_mark:]:
                if rec["agent"] == agent_id:
                    record = rec
                    break
            robot = engine.world.robot(agent_id)
            return {
                "status": "ok",
                "outcome": record["outcome"] if record else None,
                "result": record["status"] if record else None,
                "observation": robot.last_observation.to_dict() if robot.last_observation else None,
                "episode": engine.episode_status(),
            }

    def _wait_for_completion(self, agent_id: str) -> None:
        engine = self.engine
        while True:
            with engine.lock:
                robot = engine.world.robot(agent_id)
                slot = engine.world.buffer.slots[agent_id]
                if robot.execution is None and slot.pending is None and slot.available:
                    return
                if self.config.mode == "fast":
                    engine.world.advance_to_units(engine.world.units + BUFFER_TICK_UNITS)
                    continue
            time.sleep(0.002)


def serve(config: EngineConfig) -> EnvServer:
    """Bind and serve until shutdown; raises OSError on bind failure."""
    server = EnvServer(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server._serve_thread = thread
    return server


class EnvClient:
    """Minimal line-protocol client used by the CLI and tests."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.file = self.sock.makefile("rwb")

    def request(self, doc: dict) -> dict:
        self.file.write((json.dumps(doc) + "\n").encode("utf-8"))
        self.file.flush()
        line = self.file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line.decode("utf-8"))

    def close(self) -> None:
        try:
            self.file.close()
            self.sock.close()
        except OSError:
            pass
