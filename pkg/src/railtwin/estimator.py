"""sklearn-style front door.

Wraps pair building, training, and gallery scoring behind the familiar
fit / transform / predict surface so the detector composes with pipelines,
grid search, and clone(). The engine underneath is the same deterministic
code the CLI uses.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .model import distance, embed, score
from .pipeline import make_gallery
from .training import TrainConfig, build_pairs, train
from .validation import check_image_stack, check_labels


class SiameseAnomalyDetector(BaseEstimator):
    """Dissimilarity scorer for 64x64 grayscale frames.

    fit() trains the shared-weight embedding network on labeled images
    (y=0: contains track, y=1: does not) against an explicit benchmark
    gallery; predict() flags frames whose best gallery score crosses the
    threshold. All randomness flows from `seed`, so fits are reproducible.

    Attributes after fit: model_, gallery_, history_, val_accuracy_.
    """

    def __init__(
        self,
        learning_rate: float = 0.01,
        momentum: float = 0.9,
        batch_size: int = 16,
        max_epochs: int = 100,
        target_accuracy: float = 0.95,
        val_fraction: float = 0.2,
        margin: float = 1.0,
        threshold: float = 0.5,
        seed: int = 0,
    ):
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.target_accuracy = target_accuracy
        self.val_fraction = val_fraction
        self.margin = margin
        self.threshold = threshold
        self.seed = seed

    def fit(self, X, y, benchmarks=None):
        """Train on images X with 0/1 labels y against `benchmarks` (an array
        or list of benchmark track images; required, never guessed)."""
        images = check_image_stack(X)
        labels = check_labels(y, len(images))
        if benchmarks is None:
            raise ValueError(
                "benchmarks is required: pass the gallery of known-good track images"
            )
        bench = check_image_stack(benchmarks, "benchmarks")
        positives = [images[i] for i in range(len(images)) if labels[i] == 0]
        negatives = [images[i] for i in range(len(images)) if labels[i] == 1]
        if not positives or not negatives:
            raise ValueError("y must contain both labels (0 and 1)")
        pairs = build_pairs(list(bench), positives, negatives)
        config = TrainConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            target_accuracy=self.target_accuracy,
            val_fraction=self.val_fraction,
            seed=self.seed,
            margin=self.margin,
        )
        self.model_, self.history_ = train(config, pairs)
        self.gallery_ = make_gallery(self.model_, list(bench))
        self.val_accuracy_ = self.history_[-1].val_accuracy if self.history_ else None
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                "this SiameseAnomalyDetector is not fitted yet; call fit() first"
            )

    def transform(self, X) -> np.ndarray:
        """Embed images into the learned 64-d metric space."""
        self._require_fitted()
        images = check_image_stack(X)
        return np.stack([embed(self.model_, img) for img in images])

    def decision_function(self, X) -> np.ndarray:
        """Dissimilarity score in [0, 1] per image: the minimum score over
        the benchmark gallery (resembling any benchmark counts as normal)."""
        self._require_fitted()
        images = check_image_stack(X)
        margin = self.model_.margin
        out = np.empty(len(images), dtype=np.float64)
        for i, img in enumerate(images):
            emb = embed(self.model_, img)
            out[i] = min(
                score(distance(emb, bench), margin)
                for bench in self.gallery_.embeddings
            )
        return out

    def predict(self, X) -> np.ndarray:
        """1 where the image is anomalous (score >= threshold), else 0."""
        return (self.decision_function(X) >= self.threshold).astype(int)

    def score(self, X, y) -> float:
        """Accuracy of predict() against 0/1 labels (1 = anomalous)."""
        images = check_image_stack(X)
        labels = check_labels(y, len(images))
        return float(np.mean(self.predict(images) == labels))
