"""Stateless HTTP service: /meta, /compile, /step/{i}.svg.

Selection is solved offline; the service only compiles and renders per
request. The lone piece of mutable state is an LRU cache of compiled
tutorials keyed by quantized camera and ability, so responses stay pure
functions of the loaded plan and the request body.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import threading
from collections import OrderedDict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .docio import canonical_dumps, loads
from .model_io import load_model, normalize_model
from .pipeline import Plan, compile_from_plan, import_plan
from .projective import Camera, CameraError
from .render import export_tutorial, render_step
from .tutorial import Tutorial, TutorialError

log = logging.getLogger("h2s.service")

CACHE_SIZE = 32
QUANT_REL = 1e-4
_STEP_RE = re.compile(r"^/step/(\d+)\.svg$")

CORS_HEADERS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, POST, OPTIONS",
    "Access-Control-Allow-Headers": "Content-Type",
}


class RequestError(ValueError):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def camera_key(cam: Camera, diag: float) -> tuple:
    """Quantize at 1e-4 relative so an orbit stream dedups into few keys."""
    pos_step = QUANT_REL * (diag if diag > 0.0 else 1.0)
    key = [round(v / pos_step) for v in (*cam.eye, *cam.target)]
    n = math.sqrt(sum(u * u for u in cam.up))
    if n <= 0.0:
        raise RequestError(422, "camera up vector is zero")
    key += [round(u / n / QUANT_REL) for u in cam.up]
    key += [round(cam.fov_deg / (180.0 * QUANT_REL)), cam.width, cam.height]
    return tuple(key)


def _session_of(key: tuple, ability: str) -> str:
    text = json.dumps([list(key), ability])
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class ServiceState:
    """Everything the handlers need; shared across request threads."""

    def __init__(self, plan: Plan, cache_size: int = CACHE_SIZE):
        self.plan = plan
        self.diag = plan.model.bbox_diagonal()
        self._lock = threading.Lock()
        self._cache: OrderedDict[str, tuple[Tutorial, str]] = OrderedDict()
        self._cache_size = cache_size
        self._meta_text = canonical_dumps(self._meta_doc())

    def _meta_doc(self) -> dict:
        plan = self.plan
        model = plan.model
        return {
            "kind": "meta",
            "stats": {
                "segments": len(model.segments),
                "triangles": int(sum(
                    len(s.triangles) for s in model.segments)),
                "candidates": len(plan.candidates),
                "objective": plan.selection.objective,
                "optimal": plan.selection.optimal,
                "method": plan.selection.method,
            },
            "parts": [
                {
                    "id": s.id,
                    "name": s.name,
                    "kind": plan.primitives[s.id].kind,
                    "chosen_candidate": plan.selection.chosen.get(s.id),
                }
                for s in sorted(model.segments, key=lambda s: s.id)
            ],
            "relations": [r.to_dict() for r in plan.relations],
            "order": plan.selection.order,
        }

    # -- endpoint cores, shared by HTTP handler and tests ------------------

    def meta(self) -> tuple[int, str, str, dict]:
        return 200, "application/json", self._meta_text, {}

    def compile(self, body: bytes) -> tuple[int, str, str, dict]:
        try:
            doc = loads(body.decode("utf-8"))
        except (UnicodeDecodeError, ValueError) as e:
            raise RequestError(400, f"body is not valid JSON: {e}") from e
        if not isinstance(doc, dict):
            raise RequestError(400, "body must be an object")
        if "camera" not in doc or "ability" not in doc:
            raise RequestError(400, "body needs 'camera' and 'ability'")
        try:
            camera = Camera.from_dict(doc["camera"])
        except CameraError as e:
            # geometry problems are 422; only shape problems are 400
            raise RequestError(422, f"degenerate camera: {e}") from e
        except (KeyError, TypeError, ValueError) as e:
            raise RequestError(400, f"malformed camera: {e}") from e
        ability = doc["ability"]
        if not isinstance(ability, str):
            raise RequestError(400, "ability must be a string")
        try:
            camera.validate()
        except CameraError as e:
            raise RequestError(422, f"degenerate camera: {e}") from e

        key = camera_key(camera, self.diag)
        try:
            tut, text, session = self._compile_cached(key, camera, ability)
        except (TutorialError, CameraError) as e:
            raise RequestError(422, str(e)) from e
        return 200, "application/json", text, {"X-H2S-Session": session}

    def _compile_cached(
        self, key: tuple, camera: Camera, ability: str,
    ) -> tuple[Tutorial, str, str]:
        session = _session_of(key, ability.lower())
        with self._lock:
            hit = self._cache.get(session)
            if hit is not None:
                self._cache.move_to_end(session)
                return hit[0], hit[1], session
        tut = compile_from_plan(self.plan, camera, ability)
        text = export_tutorial(tut)
        with self._lock:
            self._cache[session] = (tut, text)
            self._cache.move_to_end(session)
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return tut, text, session

    def step_svg(self, index: int, session: str) -> tuple[int, str, str, dict]:
        with self._lock:
            hit = self._cache.get(session)
            if hit is not None:
                self._cache.move_to_end(session)
        if hit is None:
            raise RequestError(
                404, f"unknown session {session!r}; POST /compile first")
        tut = hit[0]
        if not 0 <= index < len(tut.steps):
            raise RequestError(404, f"step {index} out of range")
        sheet = render_step(tut, index)
        return 200, "image/svg+xml", sheet.svg_text, {}

    def route(
        self, method: str, path: str, query: dict, body: bytes,
    ) -> tuple[int, str, str, dict]:
        """Dispatch; raises RequestError for every failure mode."""
        if method == "OPTIONS":
            return 204, "text/plain", "", {}
        if method == "GET" and path == "/meta":
            return self.meta()
        if method == "POST" and path == "/compile":
            return self.compile(body)
        m = _STEP_RE.match(path) if method == "GET" else None
        if m:
            session = query.get("session", "")
            return self.step_svg(int(m.group(1)), session)
        raise RequestError(404, f"no route for {method} {path}")


def _error_body(status: int, message: str) -> str:
    return canonical_dumps({"error": {"status": status, "message": message}})


class _Handler(BaseHTTPRequestHandler):
    server_version = "h2s"
    state: ServiceState    # set by serve()

    def _respond(self, status, ctype, body: str, extra: dict) -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        for k, v in CORS_HEADERS.items():
            self.send_header(k, v)
        for k, v in extra.items():
            self.send_header(k, v)
        self.end_headers()
        if data:
            self.wfile.write(data)

    def _handle(self, method: str) -> None:
        path, _, qs = self.path.partition("?")
        query = {}
        for pair in qs.split("&"):
            k, _, v = pair.partition("=")
            if k:
                query[k] = v
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        try:
            status, ctype, text, extra = self.state.route(
                method, path, query, body)
        except RequestError as e:
            status, ctype, text, extra = (
                e.status, "application/json", _error_body(e.status, str(e)), {})
        except Exception as e:   # pragma: no cover - last-ditch guard
            log.exception("internal error on %s %s", method, path)
            status, ctype, text, extra = (
                500, "application/json", _error_body(500, str(e)), {})
        self._respond(status, ctype, text, extra)

    def do_GET(self):
        self._handle("GET")

    def do_POST(self):
        self._handle("POST")

    def do_OPTIONS(self):
        self._handle("OPTIONS")

    def log_message(self, fmt, *args):
        log.info("%s %s", self.address_string(), fmt % args)


def make_server(state: ServiceState, port: int) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer(("0.0.0.0", port), handler)


def serve(plan_path: str, port: int = 8042, model_path: str | None = None) -> None:
    with open(plan_path, "r", encoding="utf-8") as f:
        plan = import_plan(f.read())
    if model_path:
        plan.model = normalize_model(load_model(model_path))
    state = ServiceState(plan)
    httpd = make_server(state, port)
    log.info("serving plan %s on port %d", plan_path, httpd.server_address[1])
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
