"""railtwin: one-shot railway track anomaly detection.

A small twin-branch embedding network scores video frames by dissimilarity
to a gallery of known-good track images. Deterministic end to end: a seed
pins the synthetic corpus, the weight initialization, the training run, and
the detection report, bit-exactly.
"""

from .errors import ModelFileError, PgmError, ShapeError, StreamError
from .estimator import SiameseAnomalyDetector
from .model import (
    EMBEDDING_DIM,
    INPUT_SHAPE,
    SiameseModel,
    contrastive_loss,
    distance,
    embed,
    init_model,
    new_model,
    pair_grad,
    score,
)
from .persistence import load_model, save_model
from .pgm import read_corpus_dir, read_pgm, write_corpus_dir, write_pgm
from .pipeline import (
    AnomalyEvent,
    AnomalyRecord,
    BenchmarkGallery,
    SamplerConfig,
    detect_stream,
    make_gallery,
    merge_events,
    sample_indices,
    score_frame,
    write_report,
)
from .rng import Rng
from .synth import Scene, SceneParams, generate, generate_corpus, generate_scene
from .training import (
    EpochStats,
    EvalReport,
    LabeledPair,
    TrainConfig,
    build_pairs,
    evaluate,
    gradcheck,
    split_train_val,
    standard_gradcheck,
    train,
)
from .validation import check_image, check_image_stack, check_labels, crop_resize_roi

__version__ = "0.1.0"

__all__ = [
    "AnomalyEvent",
    "AnomalyRecord",
    "BenchmarkGallery",
    "EMBEDDING_DIM",
    "EpochStats",
    "EvalReport",
    "INPUT_SHAPE",
    "LabeledPair",
    "ModelFileError",
    "PgmError",
    "Rng",
    "SamplerConfig",
    "Scene",
    "SceneParams",
    "ShapeError",
    "SiameseAnomalyDetector",
    "SiameseModel",
    "StreamError",
    "TrainConfig",
    "build_pairs",
    "check_image",
    "check_image_stack",
    "check_labels",
    "contrastive_loss",
    "crop_resize_roi",
    "detect_stream",
    "distance",
    "embed",
    "evaluate",
    "generate",
    "generate_corpus",
    "generate_scene",
    "gradcheck",
    "init_model",
    "load_model",
    "make_gallery",
    "merge_events",
    "new_model",
    "pair_grad",
    "read_corpus_dir",
    "read_pgm",
    "sample_indices",
    "save_model",
    "score",
    "score_frame",
    "split_train_val",
    "standard_gradcheck",
    "train",
    "write_corpus_dir",
    "write_pgm",
    "write_report",
]
