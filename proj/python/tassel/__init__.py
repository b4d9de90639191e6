"""TASSEL: weakly supervised object-based classification of satellite image
time series with attention over per-object K-means components."""

import json

import numpy as np

from ._core import (
    Dataset,
    Model,
    TasselError,
    __version__,
    load_dataset,
    load_model,
    model_from_bytes,
    read_dataset,
)
from . import _core

__all__ = [
    "Dataset",
    "Model",
    "TasselError",
    "__version__",
    "baseline",
    "evaluate",
    "explain",
    "generate",
    "kmeans",
    "load_dataset",
    "load_model",
    "metrics",
    "model_from_bytes",
    "predict",
    "read_dataset",
    "train",
]


def generate(**config):
    """Synthetic dataset. Keyword names follow the generator config
    (T, B, classes, objects_per_class, ..., seed). Returns (Dataset, truth)."""
    dataset, truth = _core._generate(json.dumps(config))
    return dataset, json.loads(truth)


def kmeans(points, k, seed=0, restarts=10, max_iters=100, tol=1e-6):
    """Restarted k-means++ / Lloyd on the rows of `points`."""
    out = json.loads(_core._kmeans(np.asarray(points, dtype=np.float64), k, seed, restarts, max_iters, tol))
    pts = np.asarray(points)
    out["centroids"] = np.asarray(out["centroids"]).reshape(k, pts.shape[1])
    out["assignment"] = np.asarray(out["assignment"], dtype=np.int64)
    return out


def metrics(predicted, truth, classes):
    """Accuracy, kappa, per-class and weighted F1, and the confusion matrix."""
    return json.loads(_core._metrics(list(map(int, predicted)), list(map(int, truth)), int(classes)))


def train(dataset, **config):
    """Trains on the seeded 50/20/30 split of `dataset`. Keyword names follow
    the training config (epochs, lr, lambda_, n_components, seed, ...).
    Returns (Model, report) where report holds the fit trace and test metrics."""
    if "lambda_" in config:
        config["lambda"] = config.pop("lambda_")
    model, info = _core._train(dataset, json.dumps(config))
    return model, json.loads(info)


def baseline(dataset, **config):
    """Test metrics of the mean-representation MLP on the same split."""
    if "lambda_" in config:
        config["lambda"] = config.pop("lambda_")
    return json.loads(_core._baseline(dataset, json.dumps(config)))


def predict(model, dataset):
    return json.loads(model._predict(dataset))


def evaluate(model, dataset):
    return json.loads(model._evaluate(dataset))


def explain(model, dataset, object_id, bins=5):
    """Per-pixel attention of one object, with CSV and (when the object has
    pixel coordinates) PGM renderings."""
    return json.loads(model._explain(dataset, object_id, bins))
