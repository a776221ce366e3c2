"""Model assembly for the three ablation variants.

* ``full``: triplet reconstruction, shared encoder pass per option, the
  review/read/find stack, then per-option sub-heads.
* ``reconstruction_only``: same triplets and sub-heads but the passage
  states go straight from the encoder to the heads.
* ``vanilla``: no reconstruction at all; the sentence alone is encoded and a
  single linear layer classifies every token over the entity types plus an
  outside class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .catalog import EntityCatalog
from .corpus import TaggedSentence
from .decoder import decode
from .encoder import (
    EncoderConfig,
    Vocabulary,
    encode_all_options,
    encode_ids,
    init_encoder_params,
)
from .head import PredictionMatrix, _softmax_pairs, init_head_params, option_logits, overall_loss_t
from .hrca import HrcaConfig, hrca_forward, init_hrca_params, xavier
from .reconstruct import McTriplet, inference_triplet, question_tokens

VARIANTS = ("full", "reconstruction_only", "vanilla")


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig
    hrca: HrcaConfig
    variant: str = "full"
    truncate: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")

    def to_dict(self) -> dict:
        return {
            "encoder": vars(self.encoder) | {},
            "hrca": vars(self.hrca) | {},
            "variant": self.variant,
            "truncate": self.truncate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            encoder=EncoderConfig(**d["encoder"]),
            hrca=HrcaConfig(**d["hrca"]),
            variant=d.get("variant", "full"),
            truncate=d.get("truncate", False),
        )


def build_vocabulary(sentences: Sequence[TaggedSentence], catalog: EntityCatalog, variant: str) -> Vocabulary:
    """Training vocabulary; reconstruction variants also cover the question
    and option texts so they are not all unknowns."""
    groups = [s.surfaces for s in sentences]
    if variant != "vanilla":
        groups.append(question_tokens())
        for text in catalog.option_texts:
            groups.append(tuple(text.split()))
    return Vocabulary.build(groups)


class McModel:
    def __init__(self, config: ModelConfig, vocab: Vocabulary, catalog: EntityCatalog, seed: int = 0):
        self.config = config
        self.vocab = vocab
        self.catalog = catalog
        self.seed = seed
        rng = np.random.default_rng(seed)
        d = config.encoder.width
        self.params: dict[str, Tensor] = init_encoder_params(rng, len(vocab), config.encoder)
        if config.variant == "full":
            self.params.update(init_hrca_params(rng, d, config.hrca))
        if config.variant == "vanilla":
            n_classes = len(catalog) + 1  # entity types + outside
            self.params["cls.w"] = ag.parameter(xavier(rng, d, n_classes))
            self.params["cls.b"] = ag.parameter(np.zeros(n_classes))
        else:
            self.params.update(init_head_params(rng, d, len(catalog)))

    # -- parameter plumbing ------------------------------------------------

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.params.items()}

    def load_state_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        if set(arrays) != set(self.params):
            missing = set(self.params) - set(arrays)
            extra = set(arrays) - set(self.params)
            raise ValueError(f"state mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, arr in arrays.items():
            if arr.shape != self.params[name].data.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {self.params[name].data.shape}")
            self.params[name].data = np.array(arr, dtype=np.float64)

    # -- forward paths -----------------------------------------------------

    def _option_logit_list(self, triplet: McTriplet) -> list[Tensor]:
        states = encode_all_options(
            triplet, self.params, self.config.encoder, self.vocab, truncate=self.config.truncate
        )
        logits = []
        for i, hs in enumerate(states):
            if self.config.variant == "full":
                enriched = hrca_forward(hs, self.params, self.config.hrca)
            else:
                enriched = hs.passage
            logits.append(option_logits(enriched, self.params, i))
        return logits

    def _vanilla_logits(self, tokens: Sequence[str]) -> Tensor:
        ids = self.vocab.encode(tokens)
        x = encode_ids(ids, self.params, self.config.encoder)
        return ag.linear(x, self.params["cls.w"], self.params["cls.b"])

    def loss_for(self, sentence: TaggedSentence, triplet: McTriplet | None) -> Tensor:
        """Differentiable training loss for one sentence."""
        if self.config.variant == "vanilla":
            logits = self._vanilla_logits(sentence.surfaces)
            k, n_classes = logits.shape
            target = np.zeros((k, n_classes))
            for r, tok in enumerate(sentence.tokens):
                etype = tok.entity_type
                col = len(self.catalog) if etype is None else self.catalog.index_of(etype)
                target[r, col] = 1.0
            return ag.scale(ag.weighted_sum(ag.log_softmax(logits), target), -1.0 / k)
        if triplet is None or triplet.label_matrix is None:
            raise ValueError("reconstruction variants need a triplet with a label matrix")
        if len(triplet.passage) != triplet.label_matrix.shape[0]:
            raise ValueError("label matrix rows must match passage length")
        return overall_loss_t(self._option_logit_list(triplet), triplet.label_matrix)

    def prediction_matrix(self, triplet: McTriplet) -> PredictionMatrix:
        if self.config.variant == "vanilla":
            raise ValueError("the vanilla variant does not produce a prediction matrix")
        with ag.no_grad():
            columns = [_softmax_pairs(t.data) for t in self._option_logit_list(triplet)]
        return PredictionMatrix(np.stack(columns, axis=1), normalized=True)

    def predict_tags(self, tokens: Sequence[str]) -> tuple[str, ...]:
        """IOB tags for an untagged token sequence."""
        from .decoder import recover_iob  # local to keep module import light

        if self.config.variant == "vanilla":
            with ag.no_grad():
                logits = self._vanilla_logits(tokens).data
            classes = logits.argmax(axis=1)
            outside = len(self.catalog)
            types = [None if c == outside else self.catalog.types[c] for c in classes]
            return recover_iob(types).tags
        triplet = inference_triplet(tokens, self.catalog)
        pred = self.prediction_matrix(triplet)
        k = pred.k
        tags = decode(pred, self.catalog).tags
        if k < len(tokens):  # truncated tail positions default to outside
            tags = tags + ("O",) * (len(tokens) - k)
        return tags


def model_from_checkpoint(path) -> McModel:
    """Restore a model (config, vocabulary, catalog, weights) from disk."""
    from .catalog import build_catalog
    from .checkpoint import CheckpointError, load_checkpoint

    arrays, meta = load_checkpoint(path)
    config = ModelConfig.from_dict(meta["model_config"])
    vocab = Vocabulary.from_full_tokens(meta["vocab"])
    if meta.get("vocab_hash") and vocab.sha256() != meta["vocab_hash"]:
        raise CheckpointError(f"{path}: vocabulary hash mismatch")
    catalog = build_catalog(meta["catalog"])
    model = McModel(config, vocab, catalog, seed=int(meta.get("seed", 0)))
    model.load_state_arrays(arrays)
    return model
