import json
import math

import numpy as np
import pytest

import landseg


def square(cls, x0, y0, x1, y1):
    ring = [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]
    return {"type": "Feature", "properties": {"class": cls}, "geometry": {"type": "Polygon", "coordinates": [ring]}}


def collection(*features):
    return json.dumps({"type": "FeatureCollection", "features": list(features)})


def test_rasterize_square_covers_its_pixels():
    doc = collection(square("foret_fermee_feuillus", 100.0, 199.0, 101.0, 200.0))
    labels = landseg.rasterize(doc, 100.0, 200.0, 0.5, 4, 4)
    assert labels.shape == (4, 4) and labels.dtype == np.uint8
    assert (labels[:2, :2] == 0).all()
    assert (labels[2:, :] == landseg.NODATA).all() and (labels[:, 2:] == landseg.NODATA).all()


def test_unknown_class_raises_data_error():
    doc = collection(square("no such class", 0.0, -1.0, 1.0, 0.0))
    with pytest.raises(landseg.DataError):
        landseg.rasterize(doc, 0.0, 0.0, 0.5, 2, 2)
    labels = landseg.rasterize(doc, 0.0, 0.0, 0.5, 2, 2, unknown_policy="nodata")
    assert (labels == landseg.NODATA).all()


def test_weights():
    assert landseg.PUBLISHED_WEIGHTS == [0.5, 1.31237, 1.38874, 1.39761, 1.5, 1.47807]
    assert landseg.compute_weights([1, 2, 3, 4, 5, 6]) == landseg.PUBLISHED_WEIGHTS
    assert landseg.compute_weights([7] * 6, "inverse_frequency") == [1.0] * 6
    with pytest.raises(landseg.DataError):
        landseg.compute_weights([0, 1, 1, 1, 1, 1], "inverse_frequency")


def test_uniform_logits_give_ln6():
    logits = np.zeros((3, 5, 6))
    labels = np.arange(15, dtype=np.uint8).reshape(3, 5) % 6
    loss, grad = landseg.weighted_cross_entropy(logits, labels)
    assert abs(loss - math.log(6)) < 1e-12
    assert grad.shape == logits.shape
    assert abs(grad.sum()) < 1e-12


def test_tile_filter_is_strict_at_half():
    image = np.zeros((4, 8, 3), dtype=np.uint8)
    labels = np.zeros((4, 8), dtype=np.uint8)
    labels[:2, :4] = landseg.NODATA
    labels[:3, 4:] = landseg.NODATA
    tiles = landseg.cut_tiles(image, labels, 935000.0, 6390000.0, 0.5, tile_px=4)
    assert [t[0] for t in tiles] == ["0935_6390"]
    assert tiles[0][3] == 0.5
    assert landseg.nodata_fraction(labels[:, 4:]) == 0.75


def test_metrics_and_palette():
    rng = np.random.default_rng(0)
    truth = rng.integers(0, 6, size=(16, 16)).astype(np.uint8)
    report = landseg.evaluate_labels(truth, truth)
    assert report["miou"] == 1.0 and report["accuracy"] == 1.0
    assert int(report["confusion"].sum()) == truth.size

    truth[0, 0] = landseg.NODATA
    rgb = landseg.colorize(truth)
    assert rgb.shape == (16, 16, 3)
    assert (rgb[0, 0] == 0).all()
    assert (landseg.decolorize(rgb) == truth).all()


def test_segmenter_shapes_and_checkpoint(tmp_path):
    model = landseg.Segmenter("tiny", seed=3)
    image = landseg.image_to_input(np.full((32, 32, 3), 90, dtype=np.uint8))
    logits = model.logits(image)
    assert logits.shape == (32, 32, landseg.NUM_CLASSES)
    assert np.isfinite(logits).all()
    model.save(tmp_path / "m.swseg")
    again = landseg.Segmenter(tmp_path / "m.swseg")
    assert again.parameter_count == model.parameter_count
    assert (again.logits(image) == logits).all()
    labels = again.predict(np.zeros((40, 48, 3), dtype=np.uint8), window=32, stride=16)
    assert labels.shape == (40, 48) and labels.max() < landseg.NUM_CLASSES


def test_pipeline_on_fixture(tmp_path):
    landseg.write_fixture(tmp_path, tiles_x=3, tiles_y=1, tile_px=64, full_cover=True)
    cfg = tmp_path / "landseg.ini"
    fast = ["train.max_steps=3", "train.batch_size=1", "train.crop_size=32"]
    assert "3 tiles cut, 3 kept, 0 dropped" in landseg.prepare(cfg)
    assert "weights (0.5, 1.31237, 1.38874, 1.39761, 1.5, 1.47807)" in landseg.stats(cfg)
    assert "checkpoint:" in landseg.train(cfg, fast)
    assert "mIoU" in landseg.evaluate(cfg, fast)
    landseg.infer(tmp_path / "ortho.png", tmp_path / "pred.png", cfg, fast)
    landseg.colorize_file(tmp_path / "pred.png", tmp_path / "pred_rgb.png", config=cfg)
    assert (tmp_path / "pred_rgb.png").exists()
    manifest = (tmp_path / "dataset" / "manifest.tsv").read_text().splitlines()
    assert [line.split("\t")[0] for line in manifest[1:4]].count("validation") == 1
    with pytest.raises(landseg.UsageError):
        landseg.prepare(cfg, ["tiles.max_nodata=2"])
