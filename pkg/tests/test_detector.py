from __future__ import annotations

import json
import math

import numpy as np
import pytest

from defectscan import (
    DefectMap,
    DefectModel,
    GrayImage,
    TrainConfig,
    classify_window,
    detect,
    load_image,
    render_overlay,
    save_image,
    sorensen_distance,
    synth_texture,
    train,
    write_report,
)
from defectscan.detector import report_dict

V = lambda *xs: np.array(xs, dtype=np.float64)  # noqa: E731


def _model(threshold: float, average=None) -> DefectModel:
    return DefectModel(
        config=TrainConfig(levels=8, window=32),
        average=V(0, 0, 0, 0, 0, 0) if average is None else average,
        threshold=threshold,
        trained_windows=1,
    )


# ---------------------------------------------------------------------------
# single-window classification
# ---------------------------------------------------------------------------


def test_classify_below_threshold_healthy():
    avg = V(0.3, 0, 0, 0, 0, 0)
    f = V(0.2, 0, 0, 0, 0, 0)  # distance 0.1/0.5 = 0.2
    distance, defective = classify_window(f, _model(0.3, avg))
    assert distance == pytest.approx(0.2, abs=1e-15)
    assert not defective


def test_classify_above_threshold_defective():
    avg = V(0.1, 0, 0, 0, 0, 0)
    f = V(0.9, 0, 0, 0, 0, 0)  # distance 0.8/1.0 = 0.8
    distance, defective = classify_window(f, _model(0.3, avg))
    assert distance == pytest.approx(0.8, abs=1e-15)
    assert defective


def test_classify_boundary_is_healthy():
    avg = V(0.2, 0, 0, 0, 0, 0)
    f = V(0.4, 0, 0, 0, 0, 0)
    d = sorensen_distance(f, avg)
    _, defective = classify_window(f, _model(threshold=d, average=avg))
    assert not defective
    _, defective = classify_window(f, _model(threshold=d * (1 - 1e-12), average=avg))
    assert defective


def test_infinite_distance_always_defective():
    avg = V(0.1, -0.1, 0, 0, 0, 0)
    f = V(-0.1, 0.1, 0, 0, 0, 0)
    distance, defective = classify_window(f, _model(1e9, avg))
    assert math.isinf(distance)
    assert defective


# ---------------------------------------------------------------------------
# whole-image detection
# ---------------------------------------------------------------------------


def test_detect_training_image_is_clean():
    img = synth_texture("checker", period=8, size=128, noise=6.0, seed=3)
    model = train([img], TrainConfig(levels=16, window=32))
    result = detect(img, model)
    assert result.defective_count == 0
    assert result.rows == 4 and result.cols == 4
    assert result.window == 32
    assert result.image_width == 128 and result.image_height == 128


def test_detect_flags_rotated_stripe_blob():
    # noise-free training stripes tile evenly, so the threshold is 0 and
    # healthy test windows (bit-identical to training) sit exactly on it;
    # diagonal stripes pasted over the four center windows must all flag
    clean = synth_texture("stripes", period=8, size=256, noise=0.0, seed=0)
    model = train([clean], TrainConfig(levels=32, window=32))
    assert model.threshold == 0.0

    r, c = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    diagonal = np.where(((r + c) % 8) * 2 < 8, 192, 64).astype(np.uint8)
    pixels = clean.pixels.copy()
    pixels[96:160, 96:160] = diagonal[96:160, 96:160]
    result = detect(GrayImage(pixels), model)

    flagged = {(int(i), int(j)) for i, j in zip(*np.nonzero(result.defective))}
    assert flagged == {(3, 3), (3, 4), (4, 3), (4, 4)}


def test_detect_rejects_small_image():
    img = GrayImage(np.zeros((16, 16), dtype=np.uint8))
    with pytest.raises(ValueError):
        detect(img, _model(0.5))


def test_detect_is_deterministic(rng, monkeypatch):
    img = GrayImage(rng.integers(0, 256, (160, 160), dtype=np.uint8))
    model = train([img], TrainConfig(levels=8, window=32))
    first = detect(img, model)
    monkeypatch.setenv("DEFECTSCAN_THREADS", "5")
    second = detect(img, model)
    assert (first.distances == second.distances).all()


# ---------------------------------------------------------------------------
# defect map semantics
# ---------------------------------------------------------------------------


def _small_map(distances, threshold, window=32):
    grid = np.asarray(distances, dtype=np.float64)
    return DefectMap(
        distances=grid,
        window=window,
        threshold=threshold,
        image_width=grid.shape[1] * window,
        image_height=grid.shape[0] * window,
    )


def test_defective_is_strictly_greater():
    m = _small_map([[0.1, 0.5], [0.5, 0.9]], threshold=0.5)
    assert m.defective.tolist() == [[False, False], [False, True]]
    assert m.defective_count == 1


def test_verdicts_row_major():
    m = _small_map([[0.0, 1.0], [2.0, 3.0]], threshold=1.5)
    verdicts = list(m.verdicts())
    assert [(v.row, v.col) for v in verdicts] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [v.defective for v in verdicts] == [False, False, True, True]
    for v in verdicts:
        assert v.defective == (v.distance > m.threshold)


def test_rescored_monotone():
    rng = np.random.default_rng(5)
    m = _small_map(rng.uniform(0, 1, (4, 4)), threshold=0.0)
    counts = [m.rescored(t).defective_count for t in np.linspace(0, 1, 21)]
    assert counts == sorted(counts, reverse=True)
    assert m.rescored(2.0).defective_count == 0


def test_map_accepts_infinite_distance_rejects_bad():
    m = _small_map([[math.inf, 0.0]], threshold=1e12)
    assert m.defective.tolist() == [[True, False]]
    with pytest.raises(ValueError):
        _small_map([[-0.1]], threshold=0.5)
    with pytest.raises(ValueError):
        _small_map([[math.nan]], threshold=0.5)
    with pytest.raises(ValueError):
        _small_map([[0.0]], threshold=math.nan)


# ---------------------------------------------------------------------------
# overlay rendering
# ---------------------------------------------------------------------------


def test_overlay_clean_map_is_identity(tmp_path, rng):
    img = GrayImage(rng.integers(0, 256, (64, 64), dtype=np.uint8))
    m = _small_map([[0.0, 0.0], [0.0, 0.0]], threshold=1.0)
    out = tmp_path / "overlay.png"
    render_overlay(img, m, out)
    assert (load_image(out).pixels == img.pixels).all()


def test_overlay_highlights_single_block(tmp_path, rng):
    img = GrayImage(rng.integers(0, 200, (64, 64), dtype=np.uint8))
    m = _small_map([[9.0, 0.0], [0.0, 0.0]], threshold=1.0)
    out = tmp_path / "overlay.png"
    render_overlay(img, m, out)
    got = load_image(out).pixels

    block = got[:32, :32]
    assert (block[0, :] == 255).all() and (block[-1, :] == 255).all()
    assert (block[:, 0] == 255).all() and (block[:, -1] == 255).all()
    interior_want = (img.pixels[1:31, 1:31].astype(np.int32) + 255) // 2
    assert (block[1:31, 1:31] == interior_want).all()
    assert (got[:32, 32:] == img.pixels[:32, 32:]).all()
    assert (got[32:, :] == img.pixels[32:, :]).all()


def test_overlay_dimension_mismatch(tmp_path, rng):
    img = GrayImage(rng.integers(0, 256, (64, 96), dtype=np.uint8))
    m = _small_map([[0.0, 0.0]], threshold=1.0)  # claims 64x32 source
    with pytest.raises(ValueError):
        render_overlay(img, m, tmp_path / "x.png")


# ---------------------------------------------------------------------------
# report document
# ---------------------------------------------------------------------------


def test_report_schema_and_order(tmp_path):
    m = _small_map([[0.25, math.inf], [0.0, 0.75]], threshold=0.5)
    path = tmp_path / "report.json"
    write_report(m, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"rows", "cols", "window", "threshold", "windows"}
    assert doc["rows"] == 2 and doc["cols"] == 2
    assert doc["window"] == 32 and doc["threshold"] == 0.5
    assert [(w["row"], w["col"]) for w in doc["windows"]] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert doc["windows"][1]["distance"] == "inf"
    assert doc["windows"][1]["defective"] is True
    assert doc["windows"][0]["distance"] == 0.25
    assert doc["windows"][0]["defective"] is False
    assert doc == report_dict(m)


def test_report_round_trips_distances(tmp_path):
    m = _small_map([[1 / 3, 0.1]], threshold=0.2)
    write_report(m, tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["windows"][0]["distance"] == 1 / 3


def test_overlay_interops_with_saved_pgm(tmp_path):
    img = synth_texture("sinusoid", period=16, size=64, noise=0.0, seed=0)
    save_image(img, tmp_path / "s.pgm")
    again = load_image(tmp_path / "s.pgm")
    assert (again.pixels == img.pixels).all()
