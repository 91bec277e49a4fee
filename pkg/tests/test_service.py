import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pdlab import load_image, make_rng, save_image
from pdlab.service import create_app
from pdlab.synthdata import synthetic_scene


@pytest.fixture
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "store")
    with TestClient(app) as c:
        yield c


def png_bytes(img):
    import tempfile

    with tempfile.NamedTemporaryFile(suffix=".png") as fh:
        save_image(img, fh.name)
        fh.seek(0)
        return fh.read()


@pytest.fixture
def noisy_id(client):
    from pdlab import add_correlated_awgn

    rng = make_rng(91)
    clean = synthetic_scene(rng, 96, 96)
    noisy = add_correlated_awgn(clean, 25, 2, rng)
    r = client.post("/images", files={"file": ("n.png", png_bytes(noisy), "image/png")})
    assert r.status_code == 200
    return r.json()["id"]


def test_upload_and_fetch_roundtrip(client, rng):
    img = synthetic_scene(rng, 64, 64)
    r = client.post("/images", files={"file": ("a.png", png_bytes(img), "image/png")})
    assert r.status_code == 200
    body = r.json()
    assert body["width"] == 64 and body["channels"] == 3
    r2 = client.get(f"/images/{body['id']}")
    assert r2.status_code == 200
    assert r2.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_upload_deterministic_id(client, rng):
    img = synthetic_scene(rng, 64, 64)
    blob = png_bytes(img)
    a = client.post("/images", files={"file": ("a.png", blob, "image/png")}).json()["id"]
    b = client.post("/images", files={"file": ("b.png", blob, "image/png")}).json()["id"]
    assert a == b


def test_upload_garbage_400(client):
    r = client.post("/images", files={"file": ("x.png", b"not an image", "image/png")})
    assert r.status_code == 400


def test_upload_oversized_413(client):
    # 5000x4000 = 20 MP constant image compresses to a tiny PNG
    import zlib, struct

    w, h = 5000, 4000
    raw = zlib.compress(b"".join(b"\x00" + b"\x80" * w for _ in range(h)), 6)

    def chunk(t, d):
        return struct.pack(">I", len(d)) + t + d + struct.pack(">I", zlib.crc32(t + d) & 0xFFFFFFFF)

    blob = (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
        + chunk(b"IDAT", raw)
        + chunk(b"IEND", b"")
    )
    r = client.post("/images", files={"file": ("big.png", blob, "image/png")})
    assert r.status_code == 413


def test_unknown_image_404(client):
    assert client.post("/estimate", json={"id": "img-none"}).status_code == 404
    assert client.post("/denoise", json={"id": "img-none"}).status_code == 404
    assert client.get("/images/img-none").status_code == 404


def test_estimate_endpoint(client, noisy_id):
    r = client.post("/estimate", json={"id": noisy_id, "estimator": "classical"})
    assert r.status_code == 200
    body = r.json()
    assert len(body["stats"]["awgn_mean"]) == 3
    vis = client.get(f"/results/{body['vis_result']}.png")
    assert vis.status_code == 200


def test_adapt_contract(client):
    from pdlab import add_awgn

    rng = make_rng(92)
    clean = synthetic_scene(rng, 256, 256)
    noisy, _ = add_awgn(clean, 30, rng)
    image_id = client.post(
        "/images", files={"file": ("n.png", png_bytes(noisy), "image/png")}
    ).json()["id"]
    r = client.post("/adapt", json={"id": image_id, "tau": 0.008, "smax": 5})
    assert r.status_code == 200
    body = r.json()
    assert len(body["r"]) == 5  # r_sequence covers s = 1..s_max
    assert body["chosen_stride"] == 1


def test_denoise_param_validation(client, noisy_id):
    assert client.post("/denoise", json={"id": noisy_id, "k": 1.5}).status_code == 400
    assert client.post("/denoise", json={"id": noisy_id, "stride": 0}).status_code == 400
    assert client.post("/denoise", json={"id": noisy_id, "mode": "other"}).status_code == 400
    assert client.post("/denoise", json={"id": noisy_id, "denoiser": "magic"}).status_code == 400
    assert client.post("/denoise", json={"id": noisy_id, "denoiser": "learned"}).status_code == 400


def test_denoise_jobs_deterministic_and_cached(client, noisy_id):
    a = client.post("/denoise", json={"id": noisy_id, "stride": 2, "k": 0.0}).json()
    b = client.post("/denoise", json={"id": noisy_id, "stride": 2, "k": 0.0}).json()
    assert a["job"] == b["job"]
    assert a["result"] == b["result"]


def test_blend_linearity_across_endpoints(client, noisy_id, tmp_path):
    """Server blend at k=0.5 equals the pixel-wise average of the k=0 and k=1
    results within 1/255 per sample."""
    ids = {}
    for k in (0.0, 1.0, 0.5):
        r = client.post("/denoise", json={"id": noisy_id, "stride": 2, "k": k})
        assert r.status_code == 200
        ids[k] = r.json()["result"]

    def fetch(result_id):
        data = client.get(f"/results/{result_id}.png").content
        p = tmp_path / f"{result_id}.png"
        p.write_bytes(data)
        return load_image(p).data

    lo, hi, mid = fetch(ids[0.0]), fetch(ids[1.0]), fetch(ids[0.5])
    assert np.max(np.abs((lo + hi) / 2 - mid)) <= 1.0 / 255 + 1e-6


def test_stateless_across_restart(tmp_path, rng):
    store = tmp_path / "persist"
    app1 = create_app(data_dir=store)
    with TestClient(app1) as c1:
        img = synthetic_scene(rng, 64, 64)
        image_id = c1.post(
            "/images", files={"file": ("a.png", png_bytes(img), "image/png")}
        ).json()["id"]
    app2 = create_app(data_dir=store)
    with TestClient(app2) as c2:
        assert c2.get(f"/images/{image_id}").status_code == 200
