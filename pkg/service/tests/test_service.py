import json
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest
import requests

from camoevolve.bridge import build_score_request, parse_score_response
from camoevolve.scene import Split, Transformation, build_transformation_grid
from camoevolve.synthsim import generate_spec, save_spec
from camoevolve.texture import new_random

from cca_bridge_service.service import (
    ServiceConfig,
    ServiceStartupError,
    build_backend,
    make_server,
    register_adapter,
)


@pytest.fixture(scope="module")
def spec_file(tmp_path_factory):
    grid = build_transformation_grid(seed=3)
    subset = [t for t in grid if t.location_id in (0, 18) and t.orientation_id < 2]
    spec = generate_spec(subset, 8, 8, noise_std=0.02, seed=3)
    path = tmp_path_factory.mktemp("spec") / "scene_spec.json"
    save_spec(spec, path)
    return path, subset


@pytest.fixture()
def live_service(spec_file):
    path, subset = spec_file
    server = make_server(ServiceConfig(port=0, spec_path=str(path)))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}", path, subset
    finally:
        server.shutdown()
        server.server_close()


def score_request(endpoint, body):
    return requests.post(endpoint + "/v1/score", json=body, timeout=10)


def test_health(live_service):
    endpoint, _, _ = live_service
    response = requests.get(endpoint + "/v1/health", timeout=10)
    assert response.status_code == 200
    assert response.json() == {"protocol": "cca-bridge/1"}


def test_unknown_paths(live_service):
    endpoint, _, _ = live_service
    assert requests.get(endpoint + "/v2/health", timeout=10).status_code == 404
    assert requests.post(endpoint + "/v1/other", json={}, timeout=10).status_code == 404


def test_score_matches_in_process(live_service):
    endpoint, path, subset = live_service
    from camoevolve.synthsim import load_spec, synth_score

    spec = load_spec(path)
    pattern = new_random(8, 8, 5)
    for t in subset:
        response = score_request(endpoint, build_score_request(pattern, t))
        assert response.status_code == 200
        assert parse_score_response(response.json()) == synth_score(spec, pattern, t)


def test_score_idempotent_byte_identical(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 9), subset[0])
    first = score_request(endpoint, body)
    second = score_request(endpoint, body)
    assert first.content == second.content


def test_wrong_protocol_field(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 1), subset[0])
    body["protocol"] = "cca-bridge/9"
    response = score_request(endpoint, body)
    assert response.status_code == 400
    assert "protocol" in response.json()["error"]


def test_missing_channels_field(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 1), subset[0])
    del body["camouflage"]["channels"]
    response = score_request(endpoint, body)
    assert response.status_code == 400
    assert "camouflage.channels" in response.json()["error"]


def test_channel_count_mismatch(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 1), subset[0])
    body["camouflage"]["channels"] = body["camouflage"]["channels"][:-1]
    response = score_request(endpoint, body)
    assert response.status_code == 400
    assert "camouflage" in response.json()["error"]


def test_out_of_range_channel(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 1), subset[0])
    body["camouflage"]["channels"][0] = 300.0
    response = score_request(endpoint, body)
    assert response.status_code == 400


def test_bad_transformation(live_service):
    endpoint, _, subset = live_service
    body = build_score_request(new_random(8, 8, 1), subset[0])
    body["transformation"]["location_id"] = 99
    response = score_request(endpoint, body)
    assert response.status_code == 400
    assert "transformation" in response.json()["error"]


def test_uncovered_transformation(live_service):
    endpoint, _, _ = live_service
    t = Transformation(5, 5, 0.5, Split.TRAIN)  # not in the hosted spec
    response = score_request(endpoint, build_score_request(new_random(8, 8, 1), t))
    assert response.status_code == 400
    assert "not covered" in response.json()["error"]


def test_non_json_body(live_service):
    endpoint, _, _ = live_service
    response = requests.post(
        endpoint + "/v1/score", data=b"not json", timeout=10,
        headers={"Content-Type": "application/json"},
    )
    assert response.status_code == 400


def test_concurrent_requests(live_service):
    endpoint, _, subset = live_service
    bodies = [build_score_request(new_random(8, 8, seed), subset[0]) for seed in range(12)]
    with ThreadPoolExecutor(max_workers=6) as pool:
        responses = list(pool.map(lambda b: score_request(endpoint, b), bodies))
    assert all(r.status_code == 200 for r in responses)
    # same request from different threads returns identical content
    repeat = [score_request(endpoint, bodies[0]).content for _ in range(3)]
    assert len(set(repeat)) == 1


# ----------------------------------------------------------------------
# adapter seam
# ----------------------------------------------------------------------

STATIC_RESPONSE = {
    "detections": [
        {"confidence": 0.6, "box": [0.0, 0.0, 5.0, 5.0], "is_camouflaged": False}
    ],
    "ground_truth": [
        {"vehicle_id": 1, "box": [0.0, 0.0, 5.0, 5.0], "is_camouflaged": False}
    ],
}


@pytest.fixture()
def adapter_service(request):
    name, adapter = request.param
    register_adapter(name, adapter)
    server = make_server(ServiceConfig(port=0, adapter=name))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()


def sample_body():
    t = Transformation(0, 0, 0.5, Split.TRAIN)
    return build_score_request(new_random(4, 4, 2), t)


@pytest.mark.parametrize(
    "adapter_service", [("echo-static", lambda camo, trans: STATIC_RESPONSE)],
    indirect=True,
)
def test_adapter_static_response(adapter_service):
    response = score_request(adapter_service, sample_body())
    assert response.status_code == 200
    assert parse_score_response(response.json()).unpainted_confidences() == [0.6]


@pytest.mark.parametrize(
    "adapter_service",
    [("bad-confidence", lambda camo, trans: json.loads(
        json.dumps(STATIC_RESPONSE).replace("0.6", "1.3")))],
    indirect=True,
)
def test_adapter_out_of_bounds_confidence_is_500(adapter_service):
    response = score_request(adapter_service, sample_body())
    assert response.status_code == 500
    assert "confidence" in response.json()["error"]


def _exploding(camo, trans):
    raise RuntimeError("detector pipeline fell over")


@pytest.mark.parametrize("adapter_service", [("exploding", _exploding)], indirect=True)
def test_adapter_exception_is_500(adapter_service):
    response = score_request(adapter_service, sample_body())
    assert response.status_code == 500
    assert "fell over" in response.json()["error"]


def test_startup_requires_spec_or_adapter():
    with pytest.raises(ServiceStartupError):
        build_backend(ServiceConfig())
    with pytest.raises(ServiceStartupError):
        build_backend(ServiceConfig(adapter="never-registered"))


def test_cli_startup_error(capsys):
    from cca_bridge_service.cli import main

    assert main([]) == 2
    assert "scene spec" in capsys.readouterr().err
