import numpy as np
import pytest

import tassel

SMALL = dict(epochs=30, batch_size=8, lr=1e-3, n_components=2, eval_every=5, dropout=0.1,
             conv_filters=8, wide_filters=8, head_units=16)


@pytest.fixture(scope="module")
def data():
    return tassel.generate(classes=3, objects_per_class=8, T=12, B=2, min_pixels=6, max_pixels=10, seed=4)


@pytest.fixture(scope="module")
def trained(data):
    dataset, _ = data
    return tassel.train(dataset, seed=1, **SMALL)


def test_generate_shapes_and_truth(data):
    dataset, truth = data
    assert len(dataset) == 24
    assert dataset.length == 12 and dataset.bands == 2
    assert dataset.class_names == ["class0", "class1", "class2"]
    assert len(truth["objects"]) == 24
    assert sorted(set(dataset.labels())) == [0, 1, 2]


def test_ndjson_round_trip(data, tmp_path):
    dataset, _ = data
    path = tmp_path / "d.ndjson"
    dataset.save(str(path))
    again = tassel.load_dataset(str(path))
    assert again.to_ndjson() == dataset.to_ndjson()
    assert tassel.read_dataset(dataset.to_ndjson()).ids == dataset.ids


def test_kmeans_two_blobs():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    out = tassel.kmeans(pts, 2, seed=3)
    assert out["inertia"] == pytest.approx(1.0)
    a = out["assignment"]
    assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]


def test_metrics_hand_cases():
    assert tassel.metrics([0, 1, 2], [0, 1, 2], 3)["kappa"] == 1.0
    assert tassel.metrics([0, 1, 0, 1], [0, 0, 1, 1], 2)["kappa"] == 0.0


def test_train_predict_evaluate(data, trained):
    dataset, _ = data
    model, report = trained
    assert len(report["train_loss"]) == 30
    assert 0.0 <= report["test"]["weighted_f1"] <= 1.0
    preds = tassel.predict(model, dataset)
    assert len(preds) == len(dataset)
    for p in preds:
        assert sum(p["alpha"]) == pytest.approx(1.0, abs=1e-6)
        assert sum(p["scores"]) == pytest.approx(1.0, abs=1e-6)
    # predict then score equals evaluate
    direct = tassel.evaluate(model, dataset)
    recount = tassel.metrics([p["label"] for p in preds], dataset.labels(), 3)
    assert direct["weighted_f1"] == recount["weighted_f1"]


def test_checkpoint_bytes_round_trip(data, trained, tmp_path):
    dataset, _ = data
    model, _ = trained
    blob = model.to_bytes()
    again = tassel.model_from_bytes(blob)
    assert again.to_bytes() == blob
    path = tmp_path / "m.ckpt"
    model.save(str(path))
    assert tassel.load_model(str(path)).to_bytes() == blob
    assert tassel.predict(again, dataset) == tassel.predict(model, dataset)


def test_training_is_deterministic(data, trained):
    dataset, _ = data
    model, _ = trained
    again, _ = tassel.train(dataset, seed=1, **SMALL)
    assert again.to_bytes() == model.to_bytes()


def test_explain_renders_pgm(data, trained):
    dataset, _ = data
    model, _ = trained
    out = tassel.explain(model, dataset, dataset.ids[0], bins=5)
    assert out["pgm"].startswith("P2\n")
    assert out["csv"].startswith("object_id,pixel_index,row,col,alpha,bin\n")
    assert len(out["pixel_alpha"]) == len(out["assignment"])


def test_baseline_runs(data):
    dataset, _ = data
    report = tassel.baseline(dataset, seed=1, **SMALL)
    assert 0.0 <= report["weighted_f1"] <= 1.0


def test_errors_surface_as_tassel_error(data):
    dataset, _ = data
    with pytest.raises(tassel.TasselError):
        tassel.train(dataset, epochs=0)
    with pytest.raises(tassel.TasselError):
        tassel.train(dataset, bogus=1)
