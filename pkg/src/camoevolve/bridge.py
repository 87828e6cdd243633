"""Client for the cca-bridge/1 wire protocol.

Lets the optimizer drive an external render+detect service. Requests carry
full-precision channel values; scoring must be idempotent on the server
(any noise derived from request content), which is what makes retries safe.

Wire protocol (shared with the reference service, see WIRE_PROTOCOL.md):

    GET  /v1/health -> {"protocol": "cca-bridge/1"}
    POST /v1/score  <- {"protocol": "cca-bridge/1",
                        "camouflage": {"width": W, "height": H, "channels": [...]},
                        "transformation": {"location_id": L, "orientation_id": O,
                                           "lighting": F}}
                    -> {"detections": [{"confidence": F, "box": [x0,y0,x1,y1],
                                        "is_camouflaged": B}],
                        "ground_truth": [{"vehicle_id": I, "box": [...],
                                          "is_camouflaged": B}]}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from .errors import BridgeVersionError, InvalidBoxError, ProtocolError, ServiceError, TransportError
from .scene import Box, Detection, GroundTruth, SceneScore, Transformation
from .texture import CamouflagePattern

PROTOCOL_VERSION = "cca-bridge/1"
SCORE_PATH = "/v1/score"
HEALTH_PATH = "/v1/health"


@dataclass(frozen=True)
class BridgeConfig:
    endpoint: str
    timeout: float = 30.0
    retry_limit: int = 2
    protocol_version: str = PROTOCOL_VERSION

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if self.retry_limit < 0:
            raise ValueError(f"retry_limit must be >= 0, got {self.retry_limit}")


def build_score_request(pattern: CamouflagePattern, t: Transformation) -> dict:
    return {
        "protocol": PROTOCOL_VERSION,
        "camouflage": {
            "width": pattern.width,
            "height": pattern.height,
            "channels": pattern.channels.ravel().tolist(),
        },
        "transformation": {
            "location_id": t.location_id,
            "orientation_id": t.orientation_id,
            "lighting": t.lighting,
        },
    }


def scene_score_to_wire(score: SceneScore) -> dict:
    """Serialize a SceneScore into the cca-bridge/1 response schema."""
    return {
        "detections": [
            {
                "confidence": d.confidence,
                "box": d.box.as_list(),
                "is_camouflaged": d.is_camouflaged,
            }
            for d in score.detections
        ],
        "ground_truth": [
            {
                "vehicle_id": g.vehicle_id,
                "box": g.box.as_list(),
                "is_camouflaged": g.is_camouflaged,
            }
            for g in score.ground_truth
        ],
    }


def pattern_from_wire(doc: dict) -> CamouflagePattern:
    width, height = int(doc["width"]), int(doc["height"])
    channels = np.asarray(doc["channels"], dtype=np.float64)
    if channels.size != width * height * 3:
        raise ProtocolError(
            f"camouflage.channels holds {channels.size} values, expected {width * height * 3}"
        )
    return CamouflagePattern(channels.reshape(height, width, 3))


def _parse_box(raw, where: str) -> Box:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ProtocolError(f"{where} must be [x_min, y_min, x_max, y_max], got {raw!r}")
    try:
        return Box(*(float(v) for v in raw))
    except (TypeError, ValueError, InvalidBoxError) as exc:
        raise ProtocolError(f"{where} invalid: {exc}") from exc


def parse_score_response(doc: dict) -> SceneScore:
    """Validate the cca-bridge/1 score schema; names the offending field."""
    if not isinstance(doc, dict):
        raise ProtocolError(f"score response must be an object, got {type(doc).__name__}")
    for key in ("detections", "ground_truth"):
        if key not in doc:
            raise ProtocolError(f"score response missing field '{key}'")
        if not isinstance(doc[key], list):
            raise ProtocolError(f"field '{key}' must be a list")
    detections = []
    for i, d in enumerate(doc["detections"]):
        where = f"detections[{i}]"
        if not isinstance(d, dict) or "confidence" not in d or "box" not in d:
            raise ProtocolError(f"{where} must carry 'confidence' and 'box'")
        conf = float(d["confidence"])
        if not 0.0 <= conf <= 1.0:
            raise ProtocolError(f"{where}.confidence {conf} outside [0, 1]")
        detections.append(
            Detection(conf, _parse_box(d["box"], f"{where}.box"), bool(d.get("is_camouflaged", False)))
        )
    ground_truth = []
    for i, g in enumerate(doc["ground_truth"]):
        where = f"ground_truth[{i}]"
        if not isinstance(g, dict) or "vehicle_id" not in g or "box" not in g:
            raise ProtocolError(f"{where} must carry 'vehicle_id' and 'box'")
        ground_truth.append(
            GroundTruth(
                int(g["vehicle_id"]),
                _parse_box(g["box"], f"{where}.box"),
                bool(g.get("is_camouflaged", False)),
            )
        )
    return SceneScore(tuple(detections), tuple(ground_truth))


def _post_with_retries(config: BridgeConfig, url: str, body: dict) -> requests.Response:
    attempts = config.retry_limit + 1
    last_exc: Exception | None = None
    for _ in range(attempts):
        try:
            return requests.post(url, json=body, timeout=config.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_exc = exc
    raise TransportError(
        f"{url} unreachable after {attempts} attempts: {last_exc}"
    ) from last_exc


def remote_score(
    config: BridgeConfig, pattern: CamouflagePattern, t: Transformation
) -> SceneScore:
    url = config.endpoint.rstrip("/") + SCORE_PATH
    response = _post_with_retries(config, url, build_score_request(pattern, t))
    if response.status_code != 200:
        raise ServiceError(
            f"{url} returned HTTP {response.status_code}: {response.text[:200]}"
        )
    try:
        doc = response.json()
    except ValueError as exc:
        raise ProtocolError(f"score response is not JSON: {exc}") from exc
    return parse_score_response(doc)


def healthcheck(config: BridgeConfig) -> str:
    """Return the service's protocol version; raise on any mismatch."""
    url = config.endpoint.rstrip("/") + HEALTH_PATH
    try:
        response = requests.get(url, timeout=config.timeout)
    except (requests.ConnectionError, requests.Timeout) as exc:
        raise TransportError(f"{url} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise ServiceError(f"{url} returned HTTP {response.status_code}: {response.text[:200]}")
    try:
        doc = response.json()
    except ValueError as exc:
        raise ProtocolError(f"health response is not JSON: {exc}") from exc
    version = doc.get("protocol") if isinstance(doc, dict) else None
    if version is None:
        raise ProtocolError("health response missing field 'protocol'")
    if version != config.protocol_version:
        raise BridgeVersionError(
            f"service speaks {version!r}, client expects {config.protocol_version!r}"
        )
    return version


class BridgeScorer:
    """SceneScorer adapter over the remote service.

    Per-request state is isolated, so concurrent calls are safe; failures
    raise without mutating anything on the client side.
    """

    concurrent_safe = True

    def __init__(self, config: BridgeConfig):
        self.config = config

    def score(self, pattern: CamouflagePattern, t: Transformation) -> SceneScore:
        return remote_score(self.config, pattern, t)
