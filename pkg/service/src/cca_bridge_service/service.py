"""Reference implementation of the cca-bridge/1 scoring service.

Hosts the synthetic scene function from a JSON scene-spec file (the same
schema the optimizer's synth scorer consumes) and exposes the adapter seam
where a real render+detect pipeline can be mounted instead. The service is
stateless across requests: all noise is derived from request content, so a
retried request returns a byte-identical response.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

from camoevolve.bridge import (
    HEALTH_PATH,
    PROTOCOL_VERSION,
    SCORE_PATH,
    parse_score_response,
    pattern_from_wire,
    scene_score_to_wire,
)
from camoevolve.errors import CamoError, ProtocolError
from camoevolve.scene import Transformation, split_for_location
from camoevolve.synthsim import SynthSceneSpec, load_spec, synth_score
from camoevolve.texture import CamouflagePattern

# an adapter maps (camouflage doc, transformation doc) from the wire request
# to a full response document in the wire schema
Adapter = Callable[[dict, dict], dict]

_ADAPTERS: dict[str, Adapter] = {}


class ServiceStartupError(Exception):
    """The service has neither a scene spec nor a registered adapter."""


class RequestValidationError(Exception):
    """A request field failed validation; maps to HTTP 400."""


def register_adapter(name: str, adapter: Adapter) -> None:
    _ADAPTERS[name] = adapter


def get_adapter(name: str) -> Adapter:
    if name not in _ADAPTERS:
        raise ServiceStartupError(
            f"no adapter named {name!r} registered (have: {sorted(_ADAPTERS)})"
        )
    return _ADAPTERS[name]


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8731
    spec_path: str | None = None
    adapter: str | None = None


def _validate_request(doc) -> tuple[dict, dict]:
    if not isinstance(doc, dict):
        raise RequestValidationError("request body must be a JSON object")
    protocol = doc.get("protocol")
    if protocol != PROTOCOL_VERSION:
        raise RequestValidationError(
            f"field 'protocol' must be {PROTOCOL_VERSION!r}, got {protocol!r}"
        )
    camo = doc.get("camouflage")
    if not isinstance(camo, dict):
        raise RequestValidationError("field 'camouflage' must be an object")
    for key in ("width", "height", "channels"):
        if key not in camo:
            raise RequestValidationError(f"field 'camouflage.{key}' is missing")
    if not isinstance(camo["channels"], list):
        raise RequestValidationError("field 'camouflage.channels' must be a list")
    trans = doc.get("transformation")
    if not isinstance(trans, dict):
        raise RequestValidationError("field 'transformation' must be an object")
    for key in ("location_id", "orientation_id", "lighting"):
        if key not in trans:
            raise RequestValidationError(f"field 'transformation.{key}' is missing")
    return camo, trans


def _parse_pattern(camo: dict) -> CamouflagePattern:
    try:
        return pattern_from_wire(camo)
    except (CamoError, TypeError, ValueError) as exc:
        raise RequestValidationError(f"field 'camouflage' invalid: {exc}") from exc


def _parse_transformation(trans: dict) -> Transformation:
    try:
        location = int(trans["location_id"])
        return Transformation(
            location_id=location,
            orientation_id=int(trans["orientation_id"]),
            lighting=float(trans["lighting"]),
            split=split_for_location(location),
        )
    except (TypeError, ValueError) as exc:
        raise RequestValidationError(f"field 'transformation' invalid: {exc}") from exc


class SynthBackend:
    """Hosts the synthetic scene function for a fixed scene spec."""

    def __init__(self, spec: SynthSceneSpec):
        self.spec = spec

    def score(self, camo: dict, trans: dict) -> dict:
        pattern = _parse_pattern(camo)
        t = _parse_transformation(trans)
        try:
            result = synth_score(self.spec, pattern, t)
        except CamoError as exc:
            raise RequestValidationError(str(exc)) from exc
        return scene_score_to_wire(result)


class AdapterBackend:
    """Delegates scoring to a mounted pipeline, then validates its output."""

    def __init__(self, adapter: Adapter):
        self.adapter = adapter

    def score(self, camo: dict, trans: dict) -> dict:
        _parse_pattern(camo)  # reject malformed patterns before the adapter runs
        _parse_transformation(trans)
        response = self.adapter(camo, trans)
        try:
            parse_score_response(response)  # same validator the client uses
        except ProtocolError as exc:
            raise RuntimeError(f"adapter produced an invalid response: {exc}") from exc
        return response


def build_backend(config: ServiceConfig):
    if config.adapter:
        return AdapterBackend(get_adapter(config.adapter))
    if config.spec_path:
        return SynthBackend(load_spec(config.spec_path))
    raise ServiceStartupError("either a scene spec file or an adapter is required")


def _make_handler(backend):
    class Handler(BaseHTTPRequestHandler):
        def _send(self, status: int, doc: dict) -> None:
            body = json.dumps(doc, separators=(",", ":")).encode("ascii")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path != HEALTH_PATH:
                self._send(404, {"error": f"unknown path {self.path}"})
                return
            self._send(200, {"protocol": PROTOCOL_VERSION})

        def do_POST(self):
            if self.path != SCORE_PATH:
                self._send(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                doc = json.loads(self.rfile.read(length))
            except (TypeError, ValueError):
                self._send(400, {"error": "request body is not valid JSON"})
                return
            try:
                camo, trans = _validate_request(doc)
                self._send(200, backend.score(camo, trans))
            except RequestValidationError as exc:
                self._send(400, {"error": str(exc)})
            except Exception as exc:  # adapter/internal failure
                self._send(500, {"error": f"{type(exc).__name__}: {exc}"})

        def log_message(self, *args):
            pass

    return Handler


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    """Bound server ready for serve_forever(); raises on startup problems."""
    backend = build_backend(config)
    return ThreadingHTTPServer((config.host, config.port), _make_handler(backend))


def serve(config: ServiceConfig) -> None:
    server = make_server(config)
    host, port = server.server_address[:2]
    print(f"cca-bridge-service {PROTOCOL_VERSION} listening on {host}:{port}")
    try:
        server.serve_forever()
    finally:
        server.server_close()
