"""NER as multiple-choice reading comprehension, at desk scale."""

from .backend import active_backend, set_backend
from .catalog import EntityCatalog, build_catalog, load_catalog
from .corpus import (
    CorpusParseError,
    CorpusStats,
    TaggedSentence,
    Token,
    compute_stats,
    parse_conll,
    repair_iob,
    serialize_conll,
    validate_iob,
)
from .decoder import DecodedTags, SelectionMatrix, decode, decode_types, recover_iob, select
from .encoder import EncoderConfig, HiddenStates, Vocabulary, encode_all_options, encode_triplet
from .head import PredictionMatrix, cce_loss, overall_loss, predict
from .hrca import HrcaConfig, attention, hrca_forward
from .metrics import EntitySpan, F1Report, extract_spans, micro_f1
from .model import McModel, ModelConfig, model_from_checkpoint
from .reconstruct import UNIVERSAL_QUESTION, McTriplet, reconstruct, strip_iob
from .train import RunRecord, TrainConfig, run_ablation, train

__version__ = "0.1.0"

__all__ = [
    "CorpusParseError", "CorpusStats", "TaggedSentence", "Token",
    "parse_conll", "serialize_conll", "validate_iob", "repair_iob", "compute_stats",
    "EntityCatalog", "build_catalog", "load_catalog",
    "UNIVERSAL_QUESTION", "McTriplet", "reconstruct", "strip_iob",
    "EncoderConfig", "HiddenStates", "Vocabulary", "encode_triplet", "encode_all_options",
    "HrcaConfig", "attention", "hrca_forward",
    "PredictionMatrix", "predict", "cce_loss", "overall_loss",
    "SelectionMatrix", "DecodedTags", "select", "decode_types", "recover_iob", "decode",
    "EntitySpan", "F1Report", "extract_spans", "micro_f1",
    "McModel", "ModelConfig", "model_from_checkpoint",
    "TrainConfig", "RunRecord", "train", "run_ablation",
    "active_backend", "set_backend",
    "__version__",
]
